#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chooserank/models.hpp"
#include "chooserank/ranking.hpp"

namespace chooserank {

/// Defaults follow PyTorch's Adam.
struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 10;
  int batch_size = 128;
  std::uint64_t seed = 0;
  double l2_weight = 0.0;

  void validate() const;
};

struct FamilySpec {
  Family family = Family::Mnl;
  int dim = 1;  // CDM rank
};

struct FitResult {
  ChoiceModel model;
  double initial_mean_nll = 0.0;
  double final_mean_nll = 0.0;
  std::vector<double> nll_trace;
  double wall_time = 0.0;
};

struct FoldSplit {
  std::vector<std::vector<std::size_t>> folds;
};

/// Model of the given family with every parameter drawn from N(0, 0.01^2).
ChoiceModel initial_model(const FamilySpec& spec, int n, Rng& rng);

/// Multiplicity-weighted mean negative log-likelihood.
double mean_nll(const ChoiceModel& m, const ChoiceDataset& data);

/// Mini-batch Adam on the mean negative log-likelihood of `data`.
FitResult fit_mle(const FamilySpec& spec, const ChoiceDataset& data, const AdamConfig& cfg);

/// Same, starting from an existing model (its parameters are the initial point).
FitResult fit_mle_from(ChoiceModel start, const ChoiceDataset& data, const AdamConfig& cfg);

/// Greedy reference ranking: repeatedly append the remaining item with the
/// fewest observed "ranked after a remaining item" events. A ranked item is
/// taken to precede every unranked item of the same ranking unless
/// `unranked_follow` is false, in which case only ranked pairs count.
Ranking mga_reference(std::span<const std::pair<AnyRanking, std::int64_t>> rankings,
                      bool unranked_follow = true);
Ranking mga_reference(std::span<const AnyRanking> rankings);

inline constexpr double kMallowsThetaMax = 50.0;

struct PairwiseTally {
  std::int64_t inversions = 0;
  std::int64_t comparable_pairs = 0;
};

/// Inversions against `reference` over the pairs each ranking orders.
PairwiseTally mallows_pair_tally(std::span<const std::pair<AnyRanking, std::int64_t>> rankings,
                                 const Ranking& reference);

/// Pseudo-MLE of the Mallows concentration given a reference: -log(I/N),
/// clamped to [0, kMallowsThetaMax].
double mallows_theta_from_tally(const PairwiseTally& tally);
double mallows_theta_mle(std::span<const std::pair<AnyRanking, std::int64_t>> rankings,
                         const Ranking& reference);
double mallows_theta_mle(std::span<const AnyRanking> rankings, const Ranking& reference);

/// Seeded Fisher-Yates shuffle of 0..count-1, then a contiguous partition in
/// which the first count % k folds get one extra element.
FoldSplit kfold_split(std::size_t count, int k, std::uint64_t seed);

}  // namespace chooserank
