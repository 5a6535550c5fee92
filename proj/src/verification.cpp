#include "chooserank/verification.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <bit>
#include <limits>
#include <sstream>

#include "chooserank/estimation.hpp"

namespace chooserank {

std::vector<Ranking> enumerate_rankings(int n) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "enumeration needs n >= 2");
  if (n > 8) throw Error(ErrorKind::NTooLarge, "enumeration is capped at n = 8");
  std::vector<Item> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<Ranking> out;
  do {
    out.emplace_back(order);
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

namespace {

void extend_prefixes(int n, int k, std::vector<Item>& prefix, std::vector<char>& used,
                     std::vector<TopKRanking>& out) {
  if (static_cast<int>(prefix.size()) == k) {
    out.emplace_back(prefix, n);
    return;
  }
  for (Item i = 0; i < n; ++i) {
    if (used[i]) continue;
    used[i] = 1;
    prefix.push_back(i);
    extend_prefixes(n, k, prefix, used, out);
    prefix.pop_back();
    used[i] = 0;
  }
}

}  // namespace

std::vector<TopKRanking> enumerate_topk(int n, int k) {
  if (n > 8) throw Error(ErrorKind::NTooLarge, "enumeration is capped at n = 8");
  if (k < 1 || k > n) throw Error(ErrorKind::InvalidArgument, "need 1 <= k <= n");
  std::vector<TopKRanking> out;
  std::vector<Item> prefix;
  std::vector<char> used(n, 0);
  extend_prefixes(n, k, prefix, used, out);
  return out;
}

namespace {

double product_of(const ChoiceModel& m, const std::vector<Choice>& choices) {
  double log_total = 0.0;
  for (const auto& c : choices) log_total += log_prob(m, c);
  return std::exp(log_total);
}

void require_brute_force_size(int n) {
  if (n > 7) throw Error(ErrorKind::NTooLarge, "brute-force normalization is capped at n = 7");
}

}  // namespace

double brute_force_Z(const Representation& rep, const ChoiceModel& m, int n) {
  require_brute_force_size(n);
  double z = 0.0;
  for (const auto& sigma : enumerate_rankings(n)) z += product_of(m, rep(sigma));
  return z;
}

double brute_force_Z(const RepresentationKind& rep, const ChoiceModel& m, int n) {
  return brute_force_Z([&](const Ranking& r) { return represent(r, rep); }, m, n);
}

double brute_force_Z_topk(RepKind rep, const ChoiceModel& m, int n, int k) {
  require_brute_force_size(n);
  if (rep != RepKind::RS && rep != RepKind::RE)
    throw Error(ErrorKind::InvalidArgument, "top-k normalization is defined for rs and re");
  if (rep == RepKind::RE && k < 2)
    throw Error(ErrorKind::TopKTooShort, "repeated elimination needs k >= 2");
  double z = 0.0;
  for (const auto& r : enumerate_topk(n, k)) {
    const AnyRanking any = r;
    z += product_of(m, rep == RepKind::RS ? rs_represent(any) : re_represent(any));
  }
  return z;
}

namespace {

std::vector<Choice> sorted_choices(std::vector<Choice> v) {
  std::sort(v.begin(), v.end(), canonical_less);
  return v;
}

std::string format_order(std::span<const Item> v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s + "]";
}

}  // namespace

TheoremCheckResult check_label_invariance(const Representation& rep, int n,
                                          const std::string& name) {
  if (n > 5) throw Error(ErrorKind::NTooLarge, "label-invariance check is capped at n = 5");
  const auto all = enumerate_rankings(n);
  TheoremCheckResult result{name, n, 0.0, 0.0, true, 0, false, ""};
  std::int64_t violations = 0;
  for (const auto& sigma : all) {
    const auto base = rep(sigma);
    for (const auto& pi : all) {
      // sigma composed with pi: the item at each position is relabeled by pi^{-1}.
      const auto pi_inv = pi.inverse();
      std::vector<Item> relabeled(n);
      for (int k = 0; k < n; ++k) relabeled[k] = pi_inv[sigma.at(k)];
      const auto lhs = sorted_choices(rep(Ranking(relabeled)));
      std::vector<Choice> rhs;
      rhs.reserve(base.size());
      for (const auto& c : base) rhs.push_back(relabel(c, pi_inv));
      if (lhs != sorted_choices(std::move(rhs))) {
        if (violations == 0)
          result.detail = "witness sigma=" + format_order(sigma.order()) +
                          " pi=" + format_order(pi.order());
        ++violations;
      }
      ++result.trials;
    }
  }
  result.max_abs_residual = static_cast<double>(violations);
  result.pass = violations == 0;
  return result;
}

TheoremCheckResult check_label_invariance(const RepresentationKind& rep, int n) {
  return check_label_invariance([&](const Ranking& r) { return represent(r, rep); }, n,
                                "label_invariance/" + to_string(rep));
}

std::vector<double> rs_distribution(const ChoiceModel& m, int n) {
  std::vector<double> out;
  for (const auto& r : enumerate_rankings(n))
    out.push_back(std::exp(ranking_log_prob(m, RepresentationKind::rs(), r)));
  return out;
}

std::vector<double> re_distribution(const ChoiceModel& m, int n) {
  std::vector<double> out;
  for (const auto& r : enumerate_rankings(n))
    out.push_back(std::exp(ranking_log_prob(m, RepresentationKind::re(), r)));
  return out;
}

std::vector<double> mtf_stationary(std::span<const double> gamma_in) {
  const int n = static_cast<int>(gamma_in.size());
  if (n > 5) throw Error(ErrorKind::NTooLarge, "move-to-front chain is capped at n = 5");
  std::vector<double> gamma(gamma_in.begin(), gamma_in.end());
  const double total = std::accumulate(gamma.begin(), gamma.end(), 0.0);
  for (double& g : gamma) {
    if (!(g > 0.0)) throw Error(ErrorKind::InvalidArgument, "access probabilities must be positive");
    g /= total;
  }

  const auto states = enumerate_rankings(n);
  std::map<std::vector<Item>, Eigen::Index> index;
  for (std::size_t s = 0; s < states.size(); ++s)
    index[std::vector<Item>(states[s].order().begin(), states[s].order().end())] =
        static_cast<Eigen::Index>(s);

  const auto count = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd transition = Eigen::MatrixXd::Zero(count, count);
  for (Eigen::Index s = 0; s < count; ++s) {
    const auto order = states[s].order();
    for (Item i = 0; i < n; ++i) {
      std::vector<Item> next{i};
      for (Item j : order)
        if (j != i) next.push_back(j);
      transition(s, index.at(next)) += gamma[i];
    }
  }

  Eigen::RowVectorXd dist = Eigen::RowVectorXd::Constant(count, 1.0 / static_cast<double>(count));
  for (long iter = 0; iter < 10'000'000; ++iter) {
    Eigen::RowVectorXd next = dist * transition;
    const double residual = (next - dist).lpNorm<1>();
    dist = next;
    if (residual < 1e-12) break;
  }
  return std::vector<double>(dist.data(), dist.data() + count);
}

namespace {

std::vector<double> re_mnl_n3(double g0, double g1, double g2) {
  const Eigen::Vector3d log_gamma(std::log(g0), std::log(g1), std::log(g2));
  return re_distribution(ChoiceModel(MnlParams{log_gamma}), 3);
}

}  // namespace

double min_tv_rs_re_mnl(const std::array<double, 3>& gamma, int grid_resolution, bool refine) {
  if (grid_resolution < 10) throw Error(ErrorKind::InvalidArgument, "grid resolution must be >= 10");
  for (double g : gamma)
    if (!(g > 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be positive");
  const Eigen::Vector3d log_gamma(std::log(gamma[0]), std::log(gamma[1]), std::log(gamma[2]));
  const auto target = rs_distribution(ChoiceModel(MnlParams{log_gamma}), 3);

  auto tv_at = [&](double g0, double g1, double g2) {
    const auto q = re_mnl_n3(g0, g1, g2);
    double l1 = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) l1 += std::abs(target[i] - q[i]);
    return 0.5 * l1;
  };

  const int res = grid_resolution;
  double best = std::numeric_limits<double>::infinity();
  int best_i = 1, best_j = 1;
  for (int i = 1; i < res; ++i)
    for (int j = 1; i + j < res; ++j) {
      const double tv = tv_at(i, j, res - i - j);
      if (tv < best) {
        best = tv;
        best_i = i;
        best_j = j;
      }
    }
  if (!refine) return best;

  // Pattern search over log-ratios (x, y) = (log g1/g0, log g2/g0).
  double x = std::log(static_cast<double>(best_j) / best_i);
  double y = std::log(static_cast<double>(res - best_i - best_j) / best_i);
  double step = 0.5;
  const double dirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
  while (step > 1e-12) {
    bool improved = false;
    for (const auto& d : dirs) {
      const double nx = x + step * d[0], ny = y + step * d[1];
      const double tv = tv_at(1.0, std::exp(nx), std::exp(ny));
      if (tv < best) {
        best = tv;
        x = nx;
        y = ny;
        improved = true;
        break;
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

TheoremCheckResult check_r_decomposability_counterexample(const std::array<double, 4>& gamma) {
  Eigen::Vector4d log_gamma;
  for (int i = 0; i < 4; ++i) {
    if (!(gamma[i] > 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be positive");
    log_gamma(i) = std::log(gamma[i]);
  }
  const ChoiceModel m(MnlParams{log_gamma});
  const double swapped = std::exp(ranking_log_prob(m, RepresentationKind::rs(), Ranking({0, 1, 3, 2})));
  const double identity = std::exp(ranking_log_prob(m, RepresentationKind::rs(), Ranking({0, 1, 2, 3})));
  TheoremCheckResult result;
  result.name = "r_decomposability_witness";
  result.n = 4;
  result.max_abs_residual = std::abs(swapped - identity);
  result.tolerance = 1e-9;
  result.expects_violation = true;
  result.pass = result.max_abs_residual > result.tolerance;
  result.trials = 1;
  std::ostringstream detail;
  detail.precision(17);
  detail << "P(0,1,3,2)=" << swapped << " P(0,1,2,3)=" << identity;
  result.detail = detail.str();
  return result;
}

ChoiceModel random_model(Family family, int n, Rng& rng, int cdm_dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
  };
  switch (family) {
    case Family::Mnl:
      return MnlParams{draw(n, 1).col(0)};
    case Family::Cdm: {
      Eigen::MatrixXd a = draw(n, cdm_dim);
      Eigen::MatrixXd b = draw(n, cdm_dim);
      return CdmParams{std::move(a), std::move(b)};
    }
    case Family::Pcmc:
      return PcmcParams{draw(n, n)};
    case Family::Mallows: {
      std::vector<Item> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      const double theta = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
      return MallowsParams{Ranking(std::move(order)), theta};
    }
    case Family::Uniform:
      return UniformModel{n};
    case Family::Deterministic: {
      std::vector<Item> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      return DeterministicModel{Ranking(std::move(order))};
    }
  }
  throw Error(ErrorKind::UnknownFamily, "unknown family");
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

namespace {

constexpr Family kParametricFamilies[] = {Family::Mnl, Family::Cdm, Family::Pcmc, Family::Mallows};

struct Recorder {
  std::vector<TheoremCheckResult>& out;

  void equality(std::string name, int n, double worst, double tol, int trials,
                std::string detail = {}) {
    out.push_back({std::move(name), n, worst, tol, worst <= tol, trials, false, std::move(detail)});
  }
  void witness(std::string name, int n, double gap, double tol, int trials,
               std::string detail = {}) {
    out.push_back({std::move(name), n, gap, tol, gap > tol, trials, true, std::move(detail)});
  }
};

int count_or(const SuiteOptions& o, int fallback) { return o.trials > 0 ? o.trials : fallback; }

std::vector<int> sizes_or(const SuiteOptions& o, std::vector<int> fallback, int lo, int hi) {
  std::vector<int> out;
  for (int n : (o.sizes.empty() ? fallback : o.sizes))
    if (n >= lo && n <= hi) out.push_back(n);
  return out;
}

int cdm_dim_for(int trial, int n) { return trial % 2 == 0 ? 1 : n; }

std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> pi(n);
  std::iota(pi.begin(), pi.end(), 0);
  std::shuffle(pi.begin(), pi.end(), rng);
  return pi;
}

/// All subsets of {0..n-1} with at least two members, as sorted lists.
std::vector<std::vector<Item>> subsets_of_size_at_least_two(int n) {
  std::vector<std::vector<Item>> out;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) < 2) continue;
    std::vector<Item> s;
    for (Item i = 0; i < n; ++i)
      if (mask & (1u << i)) s.push_back(i);
    out.push_back(std::move(s));
  }
  return out;
}

double binomial(int n, int k) { return std::round(std::exp(log_binomial(n, k))); }

void suite_normalization(const SuiteOptions& o, Rng& rng, Recorder& rec) {
  const int trials = count_or(o, 20);
  for (int n : sizes_or(o, {3, 4, 5}, 2, 7)) {
    double worst_rs = 0.0, worst_re = 0.0, worst_perm = 0.0;
    int models = 0;
    for (Family f : kParametricFamilies)
      for (int t = 0; t < trials; ++t) {
        const ChoiceModel m = random_model(f, n, rng, cdm_dim_for(t, n));
        worst_rs = std::max(worst_rs, std::abs(brute_force_Z(RepresentationKind::rs(), m, n) - 1.0));
        worst_re = std::max(worst_re, std::abs(brute_force_Z(RepresentationKind::re(), m, n) - 1.0));
        for (int p = 0; p < 5; ++p) {
          const auto rep = RepresentationKind::permuted_rs(random_permutation(n, rng));
          worst_perm = std::max(worst_perm, std::abs(brute_force_Z(rep, m, n) - 1.0));
        }
        ++models;
      }
    rec.equality("Z_rs", n, worst_rs, 1e-10, models);
    rec.equality("Z_re", n, worst_re, 1e-10, models);
    rec.equality("Z_permuted_rs", n, worst_perm, 1e-10, models * 5);
  }
}

void suite_topk(const SuiteOptions& o, Rng& rng, Recorder& rec) {
  const int trials = count_or(o, 10);
  for (int n : sizes_or(o, {3, 4, 5, 6}, 3, 7))
    for (int k = 2; k < n; ++k) {
      double worst_rs = 0.0, worst_re = 0.0;
      int models = 0;
      const double expected_re = binomial(n, k);
      for (Family f : kParametricFamilies)
        for (int t = 0; t < trials; ++t) {
          const ChoiceModel m = random_model(f, n, rng, cdm_dim_for(t, n));
          worst_rs = std::max(worst_rs, std::abs(brute_force_Z_topk(RepKind::RS, m, n, k) - 1.0));
          worst_re = std::max(worst_re, std::abs(brute_force_Z_topk(RepKind::RE, m, n, k) - expected_re));
          ++models;
        }
      const std::string suffix = "/k=" + std::to_string(k);
      rec.equality("Zk_rs" + suffix, n, worst_rs, 1e-10, models);
      rec.equality("Zk_re" + suffix, n, worst_re, 1e-8, models, "expected C(n,k)");
    }
}

void suite_pairwise(const SuiteOptions& o, Rng& rng, Recorder& rec) {
  const int trials = count_or(o, 20);
  for (int n : sizes_or(o, {3, 4, 5}, 3, 7)) {
    const double pairs = n * (n - 1) / 2.0;
    const double expected_uniform = std::exp(std::lgamma(n + 1.0) - pairs * std::log(2.0));
    const double z_uniform = brute_force_Z(RepresentationKind::pw(), UniformModel{n}, n);
    rec.equality("Z_pw_uniform", n, std::abs(z_uniform - expected_uniform), 1e-12, 1,
                 "expected n!/2^C(n,2)");
    double worst_det = 0.0;
    for (int t = 0; t < trials; ++t) {
      const ChoiceModel det = random_model(Family::Deterministic, n, rng);
      worst_det = std::max(worst_det, std::abs(brute_force_Z(RepresentationKind::pw(), det, n) - 1.0));
    }
    rec.equality("Z_pw_deterministic", n, worst_det, 1e-12, trials);

    double lo = std::min(z_uniform, 1.0), hi = std::max(z_uniform, 1.0);
    for (Family f : kParametricFamilies)
      for (int t = 0; t < trials; ++t) {
        const double z = brute_force_Z(RepresentationKind::pw(), random_model(f, n, rng, cdm_dim_for(t, n)), n);
        lo = std::min(lo, z);
        hi = std::max(hi, z);
      }
    rec.witness("Z_pw_nonconstant", n, hi - lo, 1e-3, 4 * trials + 2, "spread of Z(PW, p) across models");
  }
}

void suite_label_invariance(const SuiteOptions& o, Rng& rng, Recorder& rec) {
  for (int n : sizes_or(o, {4}, 2, 5)) {
    for (const auto& rep : {RepresentationKind::rs(), RepresentationKind::re(), RepresentationKind::pw(),
                            RepresentationKind::permuted_rs(random_permutation(n, rng))}) {
      rec.out.push_back(check_label_invariance(rep, n));
    }
    // The constant representation c(sigma) = {(0, U)} is the standard
    // non-example; the check must find a witness.
    auto constant = [n](const Ranking&) {
      std::vector<Item> all(n);
      std::iota(all.begin(), all.end(), 0);
      return std::vector<Choice>{Choice(0, all)};
    };
    auto r = check_label_invariance(constant, n, "label_invariance/constant");
    r.expects_violation = true;
    r.tolerance = 0.0;
    r.pass = r.max_abs_residual > 0.0;
    rec.out.push_back(std::move(r));
  }
}

/// Choice probabilities of the CDM construction as literally stated with
/// u_ij = log gamma_j and the set utility summed over every j in S.
Eigen::VectorXd cdm_with_self_term(const Eigen::VectorXd& log_gamma, std::span<const Item> set) {
  Eigen::VectorXd u(set.size());
  for (std::size_t k = 0; k < set.size(); ++k) {
    double total = 0.0;
    for (Item j : set) total += log_gamma(j);
    u(k) = total;
  }
  return (u.array() - log_sum_exp(u)).exp();
}

void suite_embeddings(const SuiteOptions& o, Rng& rng, Recorder& rec) {
  const int trials = count_or(o, 10);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int n : sizes_or(o, {3, 4, 5, 6}, 2, 8)) {
    double worst_pcmc = 0.0, worst_cdm = 0.0, gap_pcmc_literal = 0.0, gap_cdm_literal = 0.0;
    const auto sets = subsets_of_size_at_least_two(n);
    for (int t = 0; t < trials; ++t) {
      Eigen::VectorXd lg(n);
      for (int i = 0; i < n; ++i) lg(i) = normal(rng);
      const ChoiceModel mnl(MnlParams{lg});
      const ChoiceModel pcmc(pcmc_from_mnl(lg));
      const ChoiceModel cdm(cdm_from_mnl(lg, cdm_dim_for(t, n)));
      // Rates as literally written: q_ij = gamma_i / (gamma_i + gamma_j).
      Eigen::MatrixXd q_literal = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) q_literal(i, j) = sigmoid(lg(i) - lg(j));
      const ChoiceModel pcmc_literal(PcmcParams::from_rates(q_literal));
      for (const auto& s : sets) {
        const Eigen::VectorXd p = choice_distribution(mnl, s);
        worst_pcmc = std::max(worst_pcmc, (choice_distribution(pcmc, s) - p).cwiseAbs().maxCoeff());
        worst_cdm = std::max(worst_cdm, (choice_distribution(cdm, s) - p).cwiseAbs().maxCoeff());
        gap_pcmc_literal = std::max(gap_pcmc_literal, (choice_distribution(pcmc_literal, s) - p).cwiseAbs().maxCoeff());
        gap_cdm_literal = std::max(gap_cdm_literal, (cdm_with_self_term(lg, s) - p).cwiseAbs().maxCoeff());
      }
    }
    rec.equality("embedding_pcmc_from_mnl", n, worst_pcmc, 1e-8, trials);
    rec.equality("embedding_cdm_from_mnl", n, worst_cdm, 1e-8, trials);
    rec.witness("embedding_pcmc_literal_mismatch", n, gap_pcmc_literal, 1e-8, trials,
                "q_ij = gamma_i/(gamma_i+gamma_j) does not reproduce MNL");
    rec.witness("embedding_cdm_literal_mismatch", n, gap_cdm_literal, 1e-8, trials,
                "self-inclusive u_iS with u_ij = log gamma_j is uniform");
  }
}

void suite_gradients(const SuiteOptions& o, Rng& rng, Recorder& rec) {
  const int trials = count_or(o, 100);
  constexpr double h = 1e-5;
  constexpr double floor = 1e-3;
  std::uniform_int_distribution<int> pick_n(2, 6);
  for (Family f : {Family::Mnl, Family::Cdm, Family::Pcmc}) {
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
      const int n = pick_n(rng);
      const int d = std::uniform_int_distribution<int>(1, n)(rng);
      ChoiceModel m = random_model(f, n, rng, d);
      std::vector<Item> set;
      while (set.size() < 2) {
        set.clear();
        for (Item i = 0; i < n; ++i)
          if (std::bernoulli_distribution(0.6)(rng)) set.push_back(i);
      }
      const Item winner = set[std::uniform_int_distribution<std::size_t>(0, set.size() - 1)(rng)];
      const Choice c(winner, set);
      const Eigen::VectorXd analytic = grad_log_prob(m, c);
      const Eigen::VectorXd base = parameter_vector(m);
      for (Eigen::Index k = 0; k < base.size(); ++k) {
        Eigen::VectorXd v = base;
        v(k) = base(k) + h;
        set_parameter_vector(m, v);
        const double up = log_prob(m, c);
        v(k) = base(k) - h;
        set_parameter_vector(m, v);
        const double down = log_prob(m, c);
        const double fd = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(fd), std::abs(analytic(k)), floor});
        worst = std::max(worst, std::abs(fd - analytic(k)) / denom);
      }
      set_parameter_vector(m, base);
    }
    rec.equality(std::string("gradient_") + std::string(to_string(f)), 0, worst, 1e-5, trials,
                 "relative error vs central differences");
  }
}

void suite_mallows(const SuiteOptions& o, Rng& rng, Recorder& rec) {
  const int trials = count_or(o, 20);
  for (int n : sizes_or(o, {2, 3, 4, 5}, 2, 7)) {
    double worst = 0.0;
    const auto all = enumerate_rankings(n);
    for (int t = 0; t < trials; ++t) {
      const ChoiceModel m = random_model(Family::Mallows, n, rng);
      const auto& p = m.as<MallowsParams>();
      for (const auto& r : all) {
        const double via_choices = std::exp(ranking_log_prob(m, RepresentationKind::rs(), r));
        const double density = std::exp(mallows_log_density_bruteforce(p, r));
        worst = std::max(worst, std::abs(via_choices - density));
      }
    }
    rec.equality("mallows_rs_density", n, worst, 1e-10, trials);
  }
  // Identity and reversal against the identity reference: I/N = 3/6.
  const std::vector<AnyRanking> data{Ranking({0, 1, 2}), Ranking({2, 1, 0})};
  const double theta = mallows_theta_mle(data, Ranking::identity(3));
  rec.equality("mallows_theta_half_inversions", 3, std::abs(theta - std::log(2.0)), 1e-12, 1,
               "expected log 2");
}

void suite_mtf(const SuiteOptions& o, Rng& rng, Recorder& rec) {
  const int trials = count_or(o, 20);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int n : sizes_or(o, {3, 4}, 2, 5)) {
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
      Eigen::VectorXd lg(n);
      std::vector<double> gamma(n);
      for (int i = 0; i < n; ++i) {
        lg(i) = normal(rng);
        gamma[i] = std::exp(lg(i));
      }
      const auto chain = mtf_stationary(gamma);
      const auto pl = rs_distribution(ChoiceModel(MnlParams{lg}), n);
      for (std::size_t s = 0; s < pl.size(); ++s) worst = std::max(worst, std::abs(chain[s] - pl[s]));
    }
    rec.equality("mtf_stationary_is_plackett_luce", n, worst, 1e-9, trials);
  }
}

void suite_reversibility(const SuiteOptions&, Rng&, Recorder& rec) {
  constexpr int res = 100;
  rec.equality("min_tv_center", 3, min_tv_rs_re_mnl({1.0 / 3, 1.0 / 3, 1.0 / 3}, res), 1e-3, 1);
  double corner = 0.0;
  for (const auto& g : {std::array<double, 3>{0.9998, 0.0001, 0.0001},
                        std::array<double, 3>{0.0001, 0.9998, 0.0001},
                        std::array<double, 3>{0.0001, 0.0001, 0.9998}})
    corner = std::max(corner, min_tv_rs_re_mnl(g, res));
  rec.equality("min_tv_corners", 3, corner, 1e-3, 3);
  rec.witness("min_tv_interior", 3, min_tv_rs_re_mnl({0.6, 0.3, 0.1}, res), 1e-3, 1,
              "gamma = (0.6, 0.3, 0.1)");
  rec.out.push_back(check_r_decomposability_counterexample());
  auto equal_case = check_r_decomposability_counterexample({1.0, 1.0, 2.0, 2.0});
  equal_case.name = "r_decomposability_equal_when_tied";
  equal_case.expects_violation = false;
  equal_case.pass = equal_case.max_abs_residual <= equal_case.tolerance;
  rec.out.push_back(std::move(equal_case));
}

/// max over T, i in S cap T of |p(i,T) - p(S cap T, T) p(i, S cap T)|.
double nested_iia_residual(const ChoiceModel& m, std::span<const Item> s, int n) {
  std::vector<char> in_s(n, 0);
  for (Item i : s) in_s[i] = 1;
  double worst = 0.0;
  for (const auto& t : subsets_of_size_at_least_two(n)) {
    std::vector<Item> inner;
    for (Item i : t)
      if (in_s[i]) inner.push_back(i);
    if (inner.empty()) continue;
    const Eigen::VectorXd p_t = choice_distribution(m, t);
    double mass = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k)
      if (in_s[t[k]]) mass += p_t(k);
    Eigen::VectorXd p_inner = Eigen::VectorXd::Ones(1);
    if (inner.size() >= 2) p_inner = choice_distribution(m, inner);
    std::size_t a = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (!in_s[t[k]]) continue;
      worst = std::max(worst, std::abs(p_t(k) - mass * p_inner(a)));
      ++a;
    }
  }
  return worst;
}

std::vector<Item> random_proper_subset(int n, Rng& rng) {
  std::vector<Item> s;
  while (s.size() < 2 || static_cast<int>(s.size()) == n) {
    s.clear();
    for (Item i = 0; i < n; ++i)
      if (std::bernoulli_distribution(0.5)(rng)) s.push_back(i);
  }
  return s;
}

/// CDM with u_ij = c for every i in S, j outside S.
ChoiceModel nested_cdm(int n, std::span<const Item> s, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd u(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) u(i, j) = normal(rng);
  const double c = normal(rng);
  std::vector<char> in_s(n, 0);
  for (Item i : s) in_s[i] = 1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (in_s[i] && !in_s[j]) u(i, j) = c;
  return cdm_from_utilities(u);
}

ChoiceModel block_model(int n, std::span<const int> block, int blocks, bool symmetric, Rng& rng) {
  std::uniform_real_distribution<double> rate(0.2, 3.0);
  Eigen::MatrixXd within(n, n), between(blocks, blocks);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) within(i, j) = rate(rng);
  if (symmetric) within = (0.5 * (within + within.transpose())).eval();
  for (int a = 0; a < blocks; ++a)
    for (int b = 0; b < blocks; ++b) between(a, b) = rate(rng);
  return block_pcmc(block, within, between);
}

double rs_within_rs_residual(const ChoiceModel& m, std::span<const Item> s, int n) {
  std::vector<char> in_s(n, 0);
  for (Item i : s) in_s[i] = 1;
  std::map<std::vector<Item>, double> marginal;
  for (const auto& r : enumerate_rankings(n)) {
    std::vector<Item> restricted;
    for (Item i : r.order())
      if (in_s[i]) restricted.push_back(i);
    marginal[restricted] += std::exp(ranking_log_prob(m, RepresentationKind::rs(), r));
  }
  double worst = 0.0;
  for (const auto& [order, prob] : marginal) {
    // RS probability of the restricted order with choices from subsets of S.
    double log_p = 0.0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k)
      log_p += log_prob(m, Choice(order[k], std::vector<Item>(order.begin() + k, order.end())));
    worst = std::max(worst, std::abs(prob - std::exp(log_p)));
  }
  return worst;
}

void suite_axioms(const SuiteOptions& o, Rng& rng, Recorder& rec) {
  const int trials = count_or(o, 10);
  for (int n : sizes_or(o, {3, 4, 5}, 3, 5)) {
    // Regularity lower bounds for MNL (a random utility model).
    double worst_bound = 0.0, worst_eps = 0.0;
    for (int t = 0; t < trials; ++t) {
      const ChoiceModel m = random_model(Family::Mnl, n, rng);
      std::vector<Item> all(n);
      std::iota(all.begin(), all.end(), 0);
      const Eigen::VectorXd top = choice_distribution(m, all);
      const double bound = top.prod() / top.maxCoeff();
      const double eps_bound = std::pow(top.minCoeff(), n - 1);
      for (double p : rs_distribution(m, n)) {
        worst_bound = std::max(worst_bound, bound - p);
        worst_eps = std::max(worst_eps, eps_bound - p);
      }
    }
    rec.equality("regularity_bound_mnl", n, std::max(worst_bound, 0.0), 1e-15, trials,
                 "max shortfall of P(sigma) below prod p(i,U)/max p(i,U)");
    rec.equality("regularity_epsilon_bound_mnl", n, std::max(worst_eps, 0.0), 1e-15, trials,
                 "max shortfall of P(sigma) below eps^(n-1)");

    double worst_cdm = 0.0, worst_pcmc_sym = 0.0, worst_nested_rs = 0.0, gap_pcmc_general = 0.0;
    for (int t = 0; t < trials; ++t) {
      const auto s = random_proper_subset(n, rng);
      const ChoiceModel cdm = nested_cdm(n, s, rng);
      worst_cdm = std::max(worst_cdm, nested_iia_residual(cdm, s, n));
      worst_nested_rs = std::max(worst_nested_rs, rs_within_rs_residual(cdm, s, n));

      std::vector<int> block(n, 1);
      for (Item i : s) block[i] = 0;
      const ChoiceModel sym = block_model(n, block, 2, true, rng);
      worst_pcmc_sym = std::max(worst_pcmc_sym, nested_iia_residual(sym, s, n));
      worst_nested_rs = std::max(worst_nested_rs, rs_within_rs_residual(sym, s, n));
      const ChoiceModel general = block_model(n, block, 2, false, rng);
      gap_pcmc_general = std::max(gap_pcmc_general, nested_iia_residual(general, s, n));
    }
    rec.equality("nested_iia_cdm", n, worst_cdm, 1e-8, trials);
    rec.equality("nested_iia_pcmc_symmetric_blocks", n, worst_pcmc_sym, 1e-8, trials);
    rec.equality("rs_within_rs", n, worst_nested_rs, 1e-8, 2 * trials);
    rec.witness("nested_iia_pcmc_asymmetric_blocks_fails", n, gap_pcmc_general, 1e-8, trials,
                "block-constant cross rates alone do not give nested IIA");
  }
}

using SuiteFn = void (*)(const SuiteOptions&, Rng&, Recorder&);

const std::vector<std::pair<std::string, SuiteFn>>& suite_table() {
  static const std::vector<std::pair<std::string, SuiteFn>> table{
      {"normalization", suite_normalization}, {"topk", suite_topk},
      {"pairwise", suite_pairwise},           {"label_invariance", suite_label_invariance},
      {"embeddings", suite_embeddings},       {"gradients", suite_gradients},
      {"mallows", suite_mallows},             {"mtf", suite_mtf},
      {"reversibility", suite_reversibility}, {"axioms", suite_axioms},
  };
  return table;
}

}  // namespace

std::vector<std::string> known_suites() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : suite_table()) names.push_back(name);
  names.push_back("all");
  return names;
}

std::vector<TheoremCheckResult> run_suite(std::span<const std::string> names,
                                          const SuiteOptions& options) {
  std::vector<TheoremCheckResult> results;
  Recorder rec{results};
  for (const auto& name : names) {
    bool found = false;
    for (const auto& [suite, fn] : suite_table()) {
      if (name != suite && name != "all") continue;
      found = true;
      // Each suite gets its own stream so results do not depend on which
      // other suites ran first.
      Rng rng(options.seed + std::hash<std::string>{}(suite));
      fn(options, rng, rec);
    }
    if (!found) throw Error(ErrorKind::UnknownCheck, "unknown check suite '" + name + "'");
  }
  return results;
}

}  // namespace chooserank
