#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "chooserank/ranking.hpp"

namespace chooserank {

// ---------------------------------------------------------------------------
// Numeric kernels
// ---------------------------------------------------------------------------

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar hi = x.maxCoeff();
  if (!std::isfinite(hi)) return hi;
  return hi + std::log((x.derived().array() - hi).exp().sum());
}

template <typename Scalar>
Scalar softplus(Scalar x) {
  return x > Scalar(30) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return x >= Scalar(0) ? Scalar(1) / (Scalar(1) + std::exp(-x))
                        : std::exp(x) / (Scalar(1) + std::exp(x));
}

/// Inverse of softplus on (0, inf).
template <typename Scalar>
Scalar softplus_inverse(Scalar y) {
  return y > Scalar(30) ? y + std::log(-std::expm1(-y)) : std::log(std::expm1(y));
}

/// Stationary distribution of the continuous-time chain with off-diagonal
/// rates `rates(i, j)` (from state i to state j). The diagonal is ignored.
///
/// Solves the global balance equations pi Q = 0 with the last equation
/// replaced by sum(pi) = 1, using partial-pivoting LU.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> pcmc_stationary(
    const Eigen::MatrixBase<Derived>& rates) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index m = rates.rows();
  if (rates.cols() != m)
    throw Error(ErrorKind::DimensionMismatch, "rate matrix must be square");
  if (m == 1) return Vec::Ones(1);

  // Row b of A is the balance equation for state b: sum_a pi_a Q_ab = 0.
  Mat system = Mat::Zero(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      if (a == b) continue;
      const Scalar q = rates(a, b);
      if (!(q > Scalar(0)))
        throw Error(ErrorKind::SingularSystem, "PCMC rates must be strictly positive");
      system(b, a) += q;
      system(a, a) -= q;
    }
  }
  system.row(m - 1).setOnes();
  Vec rhs = Vec::Zero(m);
  rhs(m - 1) = Scalar(1);
  return system.partialPivLu().solve(rhs);
}

// ---------------------------------------------------------------------------
// Model parameters
// ---------------------------------------------------------------------------

/// Multinomial logit: p(i, S) proportional to exp(log_gamma[i]).
struct MnlParams {
  Eigen::VectorXd log_gamma;
};

/// Low-rank context-dependent model. The utility of i in S is
/// sum over j in S, j != i, of A.row(i) . B.row(j).
struct CdmParams {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;

  int d() const { return static_cast<int>(A.cols()); }
};

/// Pairwise choice Markov chain with effective rate
/// q_ij = softplus(theta(i, j)) + rate_floor from i to j.
struct PcmcParams {
  static constexpr double rate_floor = 1e-6;
  Eigen::MatrixXd theta;

  double rate(int i, int j) const { return softplus(theta(i, j)) + rate_floor; }

  /// Builds parameters whose effective rates equal `q` off the diagonal.
  static PcmcParams from_rates(const Eigen::MatrixXd& q);
};

struct MallowsParams {
  Ranking reference;
  double theta = 0.0;
};

struct UniformModel {
  int n = 0;
};

/// Always picks the item of S ranked highest by `ranking`.
struct DeterministicModel {
  Ranking ranking;
};

enum class Family { Mnl, Cdm, Pcmc, Mallows, Uniform, Deterministic };

std::string_view to_string(Family f);
Family family_from_string(std::string_view name);

class ChoiceModel {
 public:
  using Variant = std::variant<MnlParams, CdmParams, PcmcParams, MallowsParams,
                               UniformModel, DeterministicModel>;

  ChoiceModel(MnlParams p);
  ChoiceModel(CdmParams p);
  ChoiceModel(PcmcParams p);
  ChoiceModel(MallowsParams p);
  ChoiceModel(UniformModel p);
  ChoiceModel(DeterministicModel p);

  Family family() const { return static_cast<Family>(params_.index()); }
  int n() const;
  const Variant& params() const { return params_; }

  template <typename T>
  const T& as() const { return std::get<T>(params_); }
  template <typename T>
  T& as() { return std::get<T>(params_); }

 private:
  Variant params_;
};

// ---------------------------------------------------------------------------
// Choice probabilities
// ---------------------------------------------------------------------------

/// Log-probabilities of choosing each member of `set` (in the given order).
Eigen::VectorXd log_choice_distribution(const ChoiceModel& m, std::span<const Item> set);
Eigen::VectorXd choice_distribution(const ChoiceModel& m, std::span<const Item> set);
double log_prob(const ChoiceModel& m, const Choice& c);

/// Gradient of log p(c) with respect to the model's unconstrained parameter
/// vector (see `parameter_vector`). Mnl, Cdm and Pcmc only.
Eigen::VectorXd grad_log_prob(const ChoiceModel& m, const Choice& c);

/// Adds weight * d log p(c) / d params into `grad` and returns log p(c).
double accumulate_grad_log_prob(const ChoiceModel& m, const Choice& c, double weight,
                                Eigen::Ref<Eigen::VectorXd> grad);

/// Flattened unconstrained parameters: Mnl log_gamma; Cdm A then B
/// (row-major); Pcmc theta (row-major, diagonal included).
Eigen::VectorXd parameter_vector(const ChoiceModel& m);
void set_parameter_vector(ChoiceModel& m, const Eigen::VectorXd& params);

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

Item sample_choice(const ChoiceModel& m, std::span<const Item> set, Rng& rng);
Item sample_choice(const ChoiceModel& m, std::span<const Item> set, std::uint64_t seed);

/// Draws a ranking by repeated selection. With `top_k` < n the result is a
/// top-k prefix, otherwise a full ranking.
AnyRanking sample_ranking(const ChoiceModel& m, int n, Rng& rng, int top_k = 0);

// ---------------------------------------------------------------------------
// Ranking probabilities
// ---------------------------------------------------------------------------

/// Log-probability of a ranking under the RS or RE distribution of `m`.
/// RE on a top-k prefix includes the -log C(n, k) normalization.
double ranking_log_prob(const ChoiceModel& m, const RepresentationKind& rep,
                        const AnyRanking& r);

double log_binomial(int n, int k);

/// Number of pairs ordered differently by the two rankings.
std::int64_t kendall_tau(const Ranking& a, const Ranking& b);

/// Exact log Mallows density, normalized by brute force over S_n (n <= 8).
double mallows_log_density_bruteforce(const MallowsParams& p, const Ranking& r);

// ---------------------------------------------------------------------------
// Constructions
// ---------------------------------------------------------------------------

/// PCMC whose stationary distributions reproduce MNL(gamma):
/// q_ij = gamma_j / (gamma_i + gamma_j).
PcmcParams pcmc_from_mnl(const Eigen::VectorXd& log_gamma);

/// CDM reproducing MNL(gamma) with u_ij = -log gamma_j; rank d >= 1.
CdmParams cdm_from_mnl(const Eigen::VectorXd& log_gamma, int d = 1);

/// Full-rank CDM with pairwise utilities u_ij = U(i, j) (diagonal ignored).
CdmParams cdm_from_utilities(const Eigen::MatrixXd& U);

/// PCMC whose rate between items of different blocks depends only on the
/// blocks: q_ij = between(block[i], block[j]). Within-block rates come from
/// `within(i, j)`.
PcmcParams block_pcmc(std::span<const int> block, const Eigen::MatrixXd& within,
                      const Eigen::MatrixXd& between);

}  // namespace chooserank
