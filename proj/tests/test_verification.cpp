#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chooserank/verification.hpp"

using namespace chooserank;
using doctest::Approx;

namespace {

std::vector<std::vector<Item>> all_orders(int n) {
  std::vector<Item> o(n);
  std::iota(o.begin(), o.end(), 0);
  std::vector<std::vector<Item>> out;
  do out.push_back(o);
  while (std::next_permutation(o.begin(), o.end()));
  return out;
}

double pl_prob(const std::vector<double>& g, const std::vector<Item>& o) {
  double p = 1.0;
  for (std::size_t k = 0; k < o.size(); ++k) {
    double rest = 0.0;
    for (std::size_t l = k; l < o.size(); ++l) rest += g[o[l]];
    p *= g[o[k]] / rest;
  }
  return p;
}

// Item at position i is the one eliminated from the first i+1 items.
double elimination_prob(const std::vector<double>& g, const std::vector<Item>& o) {
  double p = 1.0;
  for (std::size_t i = 1; i < o.size(); ++i) {
    double prefix = 0.0;
    for (std::size_t l = 0; l <= i; ++l) prefix += g[o[l]];
    p *= g[o[i]] / prefix;
  }
  return p;
}

double grid_min_tv(const std::vector<double>& gamma, int res) {
  const auto orders = all_orders(3);
  std::vector<double> target;
  for (const auto& o : orders) target.push_back(pl_prob(gamma, o));
  double best = 2.0;
  for (int i = 1; i < res; ++i)
    for (int j = 1; i + j < res; ++j) {
      const std::vector<double> w{double(i) / res, double(j) / res, double(res - i - j) / res};
      double tv = 0.0;
      for (std::size_t s = 0; s < orders.size(); ++s) tv += std::abs(target[s] - elimination_prob(w, orders[s]));
      best = std::min(best, 0.5 * tv);
    }
  return best;
}

ChoiceModel mnl(std::initializer_list<double> gamma) {
  Eigen::VectorXd lg(static_cast<Eigen::Index>(gamma.size()));
  Eigen::Index i = 0;
  for (double g : gamma) lg(i++) = std::log(g);
  return ChoiceModel(MnlParams{lg});
}

}  // namespace

TEST_CASE("enumeration") {
  const auto three = enumerate_rankings(3);
  REQUIRE(three.size() == 6);
  CHECK(three.front() == Ranking({0, 1, 2}));
  CHECK(three.back() == Ranking({2, 1, 0}));
  CHECK(enumerate_rankings(6).size() == 720);
  CHECK(enumerate_topk(5, 2).size() == 20);
  CHECK(enumerate_topk(4, 1).size() == 4);
  CHECK_THROWS_AS(enumerate_rankings(9), Error);
  CHECK_THROWS_AS(enumerate_rankings(1), Error);
}

TEST_CASE("brute-force normalization constants") {
  // Pairwise choices do not define a distribution: uniform gives 6 * (1/2)^3.
  CHECK(brute_force_Z(RepresentationKind::pw(), UniformModel{3}, 3) == Approx(0.75));
  CHECK(brute_force_Z(RepresentationKind::pw(), DeterministicModel{Ranking({2, 0, 1})}, 3) == Approx(1.0));
  CHECK(brute_force_Z(RepresentationKind::rs(), mnl({1, 2, 3, 4}), 4) == Approx(1.0));
  CHECK(brute_force_Z(RepresentationKind::re(), mnl({1, 2, 3, 4}), 4) == Approx(1.0));
  // RE over top-3 of 5 covers each ranked set once per choice of that set.
  CHECK(brute_force_Z_topk(RepKind::RE, mnl({1, 2, 3, 4, 5}), 5, 3) == Approx(10.0));
  CHECK(brute_force_Z_topk(RepKind::RS, mnl({1, 2, 3, 4, 5}), 5, 3) == Approx(1.0));
  CHECK_THROWS_AS(brute_force_Z_topk(RepKind::RE, UniformModel{4}, 4, 1), Error);
  CHECK_THROWS_AS(brute_force_Z(RepresentationKind::rs(), UniformModel{8}, 8), Error);
}

TEST_CASE("label invariance") {
  for (int n = 2; n <= 4; ++n) {
    CHECK(check_label_invariance(RepresentationKind::rs(), n).pass);
    CHECK(check_label_invariance(RepresentationKind::re(), n).pass);
    CHECK(check_label_invariance(RepresentationKind::pw(), n).pass);
  }
  // A representation that ignores the ranking cannot be label invariant.
  const Representation constant = [](const Ranking&) { return std::vector<Choice>{Choice(0, {0, 1})}; };
  const auto r = check_label_invariance(constant, 3, "constant");
  CHECK_FALSE(r.pass);
  CHECK(r.name == "constant");
}

TEST_CASE("move-to-front stationary law is Plackett-Luce") {
  const std::vector<double> uniform{1, 1, 1};
  for (double p : mtf_stationary(uniform)) CHECK(p == Approx(1.0 / 6.0).epsilon(1e-9));

  const std::vector<double> g{2, 1, 1};
  const auto law = mtf_stationary(g);
  CHECK(law[0] == Approx(0.25).epsilon(1e-9));

  const std::vector<double> g4{0.4, 0.1, 0.3, 0.2};
  const auto law4 = mtf_stationary(g4);
  const auto orders = all_orders(4);
  for (std::size_t s = 0; s < orders.size(); ++s) CHECK(law4[s] == Approx(pl_prob(g4, orders[s])).epsilon(1e-8));

  const std::vector<double> two{3, 1};
  const auto law2 = mtf_stationary(two);
  CHECK(law2[0] == Approx(0.75).epsilon(1e-9));
  const std::vector<double> bad{1, 0, 1};
  CHECK_THROWS_AS(mtf_stationary(bad), Error);
}

TEST_CASE("RS and RE distributions against direct formulas") {
  const std::vector<double> g{0.5, 0.2, 0.3};
  const auto m = mnl({0.5, 0.2, 0.3});
  const auto rs = rs_distribution(m, 3), re = re_distribution(m, 3);
  const auto orders = all_orders(3);
  for (std::size_t s = 0; s < orders.size(); ++s) {
    CHECK(rs[s] == Approx(pl_prob(g, orders[s])).epsilon(1e-12));
    CHECK(re[s] == Approx(elimination_prob(g, orders[s])).epsilon(1e-12));
  }
}

TEST_CASE("minimum distance between RS-MNL and RE-MNL") {
  const double refined = min_tv_rs_re_mnl({0.6, 0.3, 0.1}, 200);
  const double grid = min_tv_rs_re_mnl({0.6, 0.3, 0.1}, 200, false);
  const double oracle = grid_min_tv({0.6, 0.3, 0.1}, 200);
  MESSAGE("refined " << refined << " grid " << grid << " oracle " << oracle);
  CHECK(grid == Approx(oracle).epsilon(1e-12));
  CHECK(refined <= grid);
  CHECK(refined == Approx(0.0533957).epsilon(1e-5));
  // Uniform weights are shared by both families.
  CHECK(min_tv_rs_re_mnl({1, 1, 1}, 30) <= 1e-9);
  CHECK_THROWS_AS(min_tv_rs_re_mnl({1, 1, 1}, 5), Error);
  CHECK_THROWS_AS(min_tv_rs_re_mnl({1, 0, 1}, 50), Error);
}

TEST_CASE("R-decomposability witness") {
  const auto r = check_r_decomposability_counterexample();
  CHECK(r.pass);
  CHECK(r.expects_violation);
  const double p_swapped = pl_prob({1, 1, 2, 1}, {0, 1, 3, 2});
  const double p_identity = pl_prob({1, 1, 2, 1}, {0, 1, 2, 3});
  CHECK(r.max_abs_residual == Approx(std::abs(p_swapped - p_identity)).epsilon(1e-12));
  // Equal weights make the two rankings equally likely.
  CHECK_FALSE(check_r_decomposability_counterexample({1, 1, 1, 1}).pass);
}

TEST_CASE("suite runner") {
  SuiteOptions opts;
  opts.seed = 3;
  opts.trials = 0;
  const std::vector<std::string> none;
  CHECK(run_suite(none, opts).empty());
  const std::vector<std::string> bogus{"nope"};
  try {
    run_suite(bogus, opts);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownCheck);
  }
  for (const auto& name : known_suites()) {
    if (name == "all") continue;
    const std::vector<std::string> one{name};
    const auto results = run_suite(one, opts);
    CHECK_MESSAGE(!results.empty(), name);
    for (const auto& r : results) CHECK_MESSAGE(r.pass, name << "/" << r.name << " n=" << r.n << " " << r.detail);
  }
  const std::vector<std::string> norm{"normalization"};
  const auto a = run_suite(norm, opts), b = run_suite(norm, opts);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].max_abs_residual == b[i].max_abs_residual);
}
