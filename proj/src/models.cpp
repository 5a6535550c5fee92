#include "chooserank/models.hpp"

#include <algorithm>
#include <numeric>

namespace chooserank {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Mnl: return "mnl";
    case Family::Cdm: return "cdm";
    case Family::Pcmc: return "pcmc";
    case Family::Mallows: return "mallows";
    case Family::Uniform: return "uniform";
    case Family::Deterministic: return "deterministic";
  }
  return "?";
}

Family family_from_string(std::string_view name) {
  if (name == "mnl") return Family::Mnl;
  if (name == "cdm") return Family::Cdm;
  if (name == "pcmc") return Family::Pcmc;
  if (name == "mallows") return Family::Mallows;
  if (name == "uniform") return Family::Uniform;
  if (name == "deterministic") return Family::Deterministic;
  throw Error(ErrorKind::UnknownFamily, "unknown model family '" + std::string(name) + "'");
}

PcmcParams PcmcParams::from_rates(const Eigen::MatrixXd& q) {
  if (q.rows() != q.cols())
    throw Error(ErrorKind::DimensionMismatch, "rate matrix must be square");
  PcmcParams p;
  p.theta = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      if (i == j) continue;
      const double excess = q(i, j) - rate_floor;
      if (!(excess > 0.0))
        throw Error(ErrorKind::InvalidArgument, "rates must exceed the PCMC rate floor");
      p.theta(i, j) = softplus_inverse(excess);
    }
  return p;
}

namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite())
    throw Error(ErrorKind::InvalidArgument, std::string(what) + " has non-finite entries");
}

}  // namespace

ChoiceModel::ChoiceModel(MnlParams p) : params_(std::move(p)) {
  if (as<MnlParams>().log_gamma.size() < 2)
    throw Error(ErrorKind::InvalidArgument, "MNL needs n >= 2");
}

ChoiceModel::ChoiceModel(CdmParams p) : params_(std::move(p)) {
  const auto& c = as<CdmParams>();
  if (c.A.rows() != c.B.rows() || c.A.cols() != c.B.cols())
    throw Error(ErrorKind::DimensionMismatch, "CDM A and B must have the same shape");
  if (c.A.rows() < 2 || c.d() < 1 || c.d() > c.A.rows())
    throw Error(ErrorKind::InvalidArgument, "CDM needs n >= 2 and 1 <= d <= n");
  require_finite(c.A, "CDM A");
  require_finite(c.B, "CDM B");
}

ChoiceModel::ChoiceModel(PcmcParams p) : params_(std::move(p)) {
  const auto& t = as<PcmcParams>().theta;
  if (t.rows() != t.cols() || t.rows() < 2)
    throw Error(ErrorKind::DimensionMismatch, "PCMC theta must be square with n >= 2");
  require_finite(t, "PCMC theta");
}

ChoiceModel::ChoiceModel(MallowsParams p) : params_(std::move(p)) {
  const auto& m = as<MallowsParams>();
  if (!(m.theta >= 0.0) || !std::isfinite(m.theta))
    throw Error(ErrorKind::InvalidArgument, "Mallows theta must be finite and >= 0");
  if (m.reference.size() < 2)
    throw Error(ErrorKind::InvalidArgument, "Mallows needs n >= 2");
}

ChoiceModel::ChoiceModel(UniformModel p) : params_(p) {
  if (p.n < 2) throw Error(ErrorKind::InvalidArgument, "uniform model needs n >= 2");
}

ChoiceModel::ChoiceModel(DeterministicModel p) : params_(std::move(p)) {}

int ChoiceModel::n() const {
  return std::visit(
      [](const auto& p) -> int {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MnlParams>) return static_cast<int>(p.log_gamma.size());
        else if constexpr (std::is_same_v<T, CdmParams>) return static_cast<int>(p.A.rows());
        else if constexpr (std::is_same_v<T, PcmcParams>) return static_cast<int>(p.theta.rows());
        else if constexpr (std::is_same_v<T, MallowsParams>) return p.reference.size();
        else if constexpr (std::is_same_v<T, UniformModel>) return p.n;
        else return p.ranking.size();
      },
      params_);
}

namespace {

void check_set(const ChoiceModel& m, std::span<const Item> set) {
  if (set.empty()) throw Error(ErrorKind::InvalidArgument, "empty choice set");
  const int n = m.n();
  for (Item i : set)
    if (i < 0 || i >= n) throw Error(ErrorKind::IdOutOfRange, "item id out of range for model");
}

Eigen::VectorXd cdm_utilities(const CdmParams& p, std::span<const Item> set) {
  // u_iS = a_i . (sum_{j in S} b_j - b_i)
  Eigen::RowVectorXd context = Eigen::RowVectorXd::Zero(p.d());
  for (Item j : set) context += p.B.row(j);
  Eigen::VectorXd u(set.size());
  for (std::size_t k = 0; k < set.size(); ++k) {
    const Item i = set[k];
    u(k) = p.A.row(i).dot(context - p.B.row(i));
  }
  return u;
}

Eigen::MatrixXd pcmc_rates(const PcmcParams& p, std::span<const Item> set) {
  const auto m = static_cast<Eigen::Index>(set.size());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b)
      if (a != b) q(a, b) = p.rate(set[a], set[b]);
  return q;
}

Eigen::VectorXd mallows_log_dist(const MallowsParams& p, std::span<const Item> set) {
  const auto m = static_cast<Eigen::Index>(set.size());
  // Rank of each member within S under the reference ordering.
  std::vector<int> pos(set.size());
  for (std::size_t k = 0; k < set.size(); ++k) pos[k] = p.reference.position_of(set[k]);
  Eigen::VectorXd scores(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    int above = 0;
    for (Eigen::Index l = 0; l < m; ++l)
      if (pos[l] < pos[k]) ++above;
    scores(k) = -p.theta * above;
  }
  Eigen::VectorXd ladder(m);
  for (Eigen::Index r = 0; r < m; ++r) ladder(r) = -p.theta * static_cast<double>(r);
  return scores.array() - log_sum_exp(ladder);
}

std::size_t index_in(std::span<const Item> set, Item item) {
  const auto it = std::find(set.begin(), set.end(), item);
  if (it == set.end()) throw Error(ErrorKind::InvalidArgument, "winner not in choice set");
  return static_cast<std::size_t>(it - set.begin());
}

}  // namespace

Eigen::VectorXd log_choice_distribution(const ChoiceModel& m, std::span<const Item> set) {
  check_set(m, set);
  const auto size = static_cast<Eigen::Index>(set.size());
  return std::visit(
      [&](const auto& p) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MnlParams>) {
          Eigen::VectorXd u(size);
          for (Eigen::Index k = 0; k < size; ++k) u(k) = p.log_gamma(set[k]);
          return u.array() - log_sum_exp(u);
        } else if constexpr (std::is_same_v<T, CdmParams>) {
          Eigen::VectorXd u = cdm_utilities(p, set);
          return u.array() - log_sum_exp(u);
        } else if constexpr (std::is_same_v<T, PcmcParams>) {
          return pcmc_stationary(pcmc_rates(p, set)).array().log();
        } else if constexpr (std::is_same_v<T, MallowsParams>) {
          return mallows_log_dist(p, set);
        } else if constexpr (std::is_same_v<T, UniformModel>) {
          return Eigen::VectorXd::Constant(size, -std::log(static_cast<double>(size)));
        } else {
          std::size_t best = 0;
          for (std::size_t k = 1; k < set.size(); ++k)
            if (p.ranking.position_of(set[k]) < p.ranking.position_of(set[best])) best = k;
          Eigen::VectorXd out =
              Eigen::VectorXd::Constant(size, -std::numeric_limits<double>::infinity());
          out(static_cast<Eigen::Index>(best)) = 0.0;
          return out;
        }
      },
      m.params());
}

Eigen::VectorXd choice_distribution(const ChoiceModel& m, std::span<const Item> set) {
  // Scalar exp: the vectorized one maps -inf to a denormal instead of 0.
  return log_choice_distribution(m, set).unaryExpr([](double x) { return std::exp(x); });
}

double log_prob(const ChoiceModel& m, const Choice& c) {
  const auto dist = log_choice_distribution(m, c.choice_set);
  return dist(static_cast<Eigen::Index>(index_in(c.choice_set, c.winner)));
}

Eigen::VectorXd parameter_vector(const ChoiceModel& m) {
  switch (m.family()) {
    case Family::Mnl:
      return m.as<MnlParams>().log_gamma;
    case Family::Cdm: {
      const auto& p = m.as<CdmParams>();
      const Eigen::Index block = p.A.size();
      Eigen::VectorXd v(2 * block);
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          v.data(), p.A.rows(), p.A.cols()) = p.A;
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          v.data() + block, p.B.rows(), p.B.cols()) = p.B;
      return v;
    }
    case Family::Pcmc: {
      const auto& t = m.as<PcmcParams>().theta;
      Eigen::VectorXd v(t.size());
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          v.data(), t.rows(), t.cols()) = t;
      return v;
    }
    default:
      throw Error(ErrorKind::UnsupportedModel,
                  std::string("no continuous parameters for ") + std::string(to_string(m.family())));
  }
}

void set_parameter_vector(ChoiceModel& m, const Eigen::VectorXd& v) {
  if (v.size() != parameter_vector(m).size())
    throw Error(ErrorKind::DimensionMismatch, "parameter vector has the wrong length");
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  switch (m.family()) {
    case Family::Mnl:
      m.as<MnlParams>().log_gamma = v;
      break;
    case Family::Cdm: {
      auto& p = m.as<CdmParams>();
      const Eigen::Index block = p.A.size();
      p.A = Eigen::Map<const RowMat>(v.data(), p.A.rows(), p.A.cols());
      p.B = Eigen::Map<const RowMat>(v.data() + block, p.B.rows(), p.B.cols());
      break;
    }
    case Family::Pcmc: {
      auto& t = m.as<PcmcParams>().theta;
      t = Eigen::Map<const RowMat>(v.data(), t.rows(), t.cols());
      break;
    }
    default:
      throw Error(ErrorKind::UnsupportedModel, "model has no continuous parameters");
  }
}

double accumulate_grad_log_prob(const ChoiceModel& m, const Choice& c, double weight,
                                Eigen::Ref<Eigen::VectorXd> grad) {
  const std::span<const Item> set = c.choice_set;
  check_set(m, set);
  const auto size = static_cast<Eigen::Index>(set.size());
  const auto w = static_cast<Eigen::Index>(index_in(set, c.winner));

  switch (m.family()) {
    case Family::Mnl: {
      const auto& p = m.as<MnlParams>();
      Eigen::VectorXd u(size);
      for (Eigen::Index k = 0; k < size; ++k) u(k) = p.log_gamma(set[k]);
      const Eigen::VectorXd logp = u.array() - log_sum_exp(u);
      for (Eigen::Index k = 0; k < size; ++k)
        grad(set[k]) += weight * ((k == w ? 1.0 : 0.0) - std::exp(logp(k)));
      return logp(w);
    }
    case Family::Cdm: {
      const auto& p = m.as<CdmParams>();
      const int d = p.d();
      const Eigen::Index b_offset = p.A.size();
      Eigen::RowVectorXd context = Eigen::RowVectorXd::Zero(d);
      for (Item j : set) context += p.B.row(j);
      const Eigen::VectorXd u = cdm_utilities(p, set);
      const Eigen::VectorXd logp = u.array() - log_sum_exp(u);
      // r_k = 1[k == winner] - p_k
      Eigen::VectorXd r = -logp.array().exp();
      r(w) += 1.0;
      Eigen::RowVectorXd weighted_a = Eigen::RowVectorXd::Zero(d);
      for (Eigen::Index k = 0; k < size; ++k) weighted_a += r(k) * p.A.row(set[k]);
      for (Eigen::Index k = 0; k < size; ++k) {
        const Item i = set[k];
        const Eigen::RowVectorXd ga = r(k) * (context - p.B.row(i));
        const Eigen::RowVectorXd gb = weighted_a - r(k) * p.A.row(i);
        for (int t = 0; t < d; ++t) {
          grad(i * d + t) += weight * ga(t);
          grad(b_offset + i * d + t) += weight * gb(t);
        }
      }
      return logp(w);
    }
    case Family::Pcmc: {
      const auto& p = m.as<PcmcParams>();
      const int n = m.n();
      const Eigen::MatrixXd q = pcmc_rates(p, set);
      Eigen::MatrixXd system = Eigen::MatrixXd::Zero(size, size);
      for (Eigen::Index a = 0; a < size; ++a)
        for (Eigen::Index b = 0; b < size; ++b) {
          if (a == b) continue;
          system(b, a) += q(a, b);
          system(a, a) -= q(a, b);
        }
      system.row(size - 1).setOnes();
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
      rhs(size - 1) = 1.0;
      const Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
      const Eigen::VectorXd pi = lu.solve(rhs);
      // Adjoint: d log pi_w = -lambda^T (dA) pi with A^T lambda = e_w / pi_w.
      Eigen::VectorXd seed = Eigen::VectorXd::Zero(size);
      seed(w) = 1.0 / pi(w);
      const Eigen::VectorXd lambda = lu.transpose().solve(seed);
      const Eigen::Index last = size - 1;
      for (Eigen::Index a = 0; a < size; ++a)
        for (Eigen::Index b = 0; b < size; ++b) {
          if (a == b) continue;
          const double dq = sigmoid(p.theta(set[a], set[b]));
          const double lb = b == last ? 0.0 : lambda(b);
          const double la = a == last ? 0.0 : lambda(a);
          grad(static_cast<Eigen::Index>(set[a]) * n + set[b]) += weight * (-dq * pi(a) * (lb - la));
        }
      return std::log(pi(w));
    }
    default:
      throw Error(ErrorKind::UnsupportedModel,
                  std::string("no gradient for ") + std::string(to_string(m.family())));
  }
}

Eigen::VectorXd grad_log_prob(const ChoiceModel& m, const Choice& c) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(parameter_vector(m).size());
  accumulate_grad_log_prob(m, c, 1.0, g);
  return g;
}

Item sample_choice(const ChoiceModel& m, std::span<const Item> set, Rng& rng) {
  if (set.size() == 1) return set.front();
  const Eigen::VectorXd probs = choice_distribution(m, set);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * probs.sum();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    acc += probs(k);
    if (u < acc) return set[k];
  }
  // Rounding can leave u just above the final cumulative sum.
  for (Eigen::Index k = probs.size() - 1; k >= 0; --k)
    if (probs(k) > 0.0) return set[k];
  return set.back();
}

Item sample_choice(const ChoiceModel& m, std::span<const Item> set, std::uint64_t seed) {
  Rng rng(seed);
  return sample_choice(m, set, rng);
}

AnyRanking sample_ranking(const ChoiceModel& m, int n, Rng& rng, int top_k) {
  if (n != m.n()) throw Error(ErrorKind::DimensionMismatch, "n differs from model size");
  const int length = (top_k >= 1 && top_k < n) ? top_k : n;
  std::vector<Item> remaining(n);
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<Item> order;
  order.reserve(n);
  while (static_cast<int>(order.size()) < length) {
    const Item pick = sample_choice(m, remaining, rng);
    order.push_back(pick);
    remaining.erase(std::find(remaining.begin(), remaining.end(), pick));
  }
  if (length == n) return Ranking(std::move(order));
  return TopKRanking(std::move(order), n);
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double ranking_log_prob(const ChoiceModel& m, const RepresentationKind& rep,
                        const AnyRanking& r) {
  const int n = universe_size(r);
  if (n != m.n()) throw Error(ErrorKind::DimensionMismatch, "ranking and model sizes differ");
  double total = 0.0;
  switch (rep.kind) {
    case RepKind::RS:
      for (const auto& c : rs_represent(r)) total += log_prob(m, c);
      return total;
    case RepKind::PermutedRS:
      for (const auto& c : permuted_rs_represent(r, rep.permutation)) total += log_prob(m, c);
      return total;
    case RepKind::RE: {
      const int k = ranked_length(r);
      if (k == 1) return -std::log(static_cast<double>(n));
      for (const auto& c : re_represent(r)) total += log_prob(m, c);
      return k == n ? total : total - log_binomial(n, k);
    }
    case RepKind::PW:
      break;
  }
  throw Error(ErrorKind::InvalidArgument, "pairwise breaking does not define a normalized ranking distribution");
}

namespace {

std::int64_t count_inversions_merge(std::vector<int>& seq, std::vector<int>& buf,
                                    std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = (lo + hi) / 2;
  std::int64_t count = count_inversions_merge(seq, buf, lo, mid) +
                       count_inversions_merge(seq, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (seq[i] <= seq[j]) {
      buf[k++] = seq[i++];
    } else {
      count += static_cast<std::int64_t>(mid - i);
      buf[k++] = seq[j++];
    }
  }
  while (i < mid) buf[k++] = seq[i++];
  while (j < hi) buf[k++] = seq[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, seq.begin() + lo);
  return count;
}

}  // namespace

std::int64_t kendall_tau(const Ranking& a, const Ranking& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "rankings differ in size");
  const int n = a.size();
  // Positions under b of the items listed in a's order; inversions of this
  // sequence are the discordant pairs.
  std::vector<int> seq(n);
  for (int k = 0; k < n; ++k) seq[k] = b.position_of(a.at(k));
  if (n <= 64) {
    std::int64_t count = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (seq[i] > seq[j]) ++count;
    return count;
  }
  std::vector<int> buf(n);
  return count_inversions_merge(seq, buf, 0, seq.size());
}

double mallows_log_density_bruteforce(const MallowsParams& p, const Ranking& r) {
  const int n = p.reference.size();
  if (n > 8) throw Error(ErrorKind::NTooLarge, "brute-force Mallows normalization needs n <= 8");
  std::vector<Item> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> terms;
  do {
    terms.push_back(-p.theta * static_cast<double>(kendall_tau(Ranking(order), p.reference)));
  } while (std::next_permutation(order.begin(), order.end()));
  const Eigen::Map<const Eigen::VectorXd> t(terms.data(), static_cast<Eigen::Index>(terms.size()));
  return -p.theta * static_cast<double>(kendall_tau(r, p.reference)) - log_sum_exp(t);
}

PcmcParams pcmc_from_mnl(const Eigen::VectorXd& log_gamma) {
  const Eigen::Index n = log_gamma.size();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) q(i, j) = sigmoid(log_gamma(j) - log_gamma(i));
  return PcmcParams::from_rates(q);
}

CdmParams cdm_from_mnl(const Eigen::VectorXd& log_gamma, int d) {
  const Eigen::Index n = log_gamma.size();
  if (d < 1 || d > n) throw Error(ErrorKind::InvalidArgument, "CDM rank must be in [1, n]");
  CdmParams p;
  p.A = Eigen::MatrixXd::Zero(n, d);
  p.B = Eigen::MatrixXd::Zero(n, d);
  p.A.col(0).setOnes();
  p.B.col(0) = -log_gamma;
  return p;
}

CdmParams cdm_from_utilities(const Eigen::MatrixXd& U) {
  if (U.rows() != U.cols()) throw Error(ErrorKind::DimensionMismatch, "utility matrix must be square");
  CdmParams p;
  p.A = U;
  p.B = Eigen::MatrixXd::Identity(U.rows(), U.cols());
  return p;
}

PcmcParams block_pcmc(std::span<const int> block, const Eigen::MatrixXd& within,
                      const Eigen::MatrixXd& between) {
  const auto n = static_cast<Eigen::Index>(block.size());
  if (within.rows() != n || within.cols() != n)
    throw Error(ErrorKind::DimensionMismatch, "within-block rates must be n x n");
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      q(i, j) = block[i] == block[j] ? within(i, j) : between(block[i], block[j]);
    }
  return PcmcParams::from_rates(q);
}

}  // namespace chooserank
