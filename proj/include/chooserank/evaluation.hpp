#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chooserank/estimation.hpp"
#include "chooserank/models.hpp"

namespace chooserank {

struct PositionStat {
  int position = 0;  // 1-based
  double mean_loglik = 0.0;
  double stderr_loglik = 0.0;
  std::int64_t count = 0;
};

struct EvalReport {
  double mean_nll = 0.0;
  double stderr_nll = 0.0;
  std::int64_t count = 0;
  std::vector<PositionStat> per_position;
  /// Test choices involving an item never seen in training (cross-validation only).
  std::int64_t unseen_item_choices = 0;
};

/// Raw per-ranking scores, kept so that folds can be pooled before summarizing.
struct RankingScores {
  std::vector<double> nll;
  /// position_loglik[k] holds the log-probability of the choice of the item
  /// at 0-based position k. RS: chosen from the items not yet ranked. RE
  /// (full rankings only, empty if any test ranking is top-k): chosen from
  /// the prefix through k, i.e. RS on the reversed ranking.
  std::vector<std::vector<double>> position_loglik;

  void append(const RankingScores& other);
};

RankingScores score_rankings(const ChoiceModel& m, const RepresentationKind& rep,
                             std::span<const AnyRanking> test);
EvalReport summarize(const RankingScores& scores);

/// Mean out-of-sample NLL with standard error and per-position curves.
EvalReport evaluate(const ChoiceModel& m, const RepresentationKind& rep,
                    std::span<const AnyRanking> test);

/// Fits any family (gradient families via Adam, Mallows via the greedy
/// reference plus closed-form concentration, Uniform trivially) to rankings
/// under the RS or RE representation.
ChoiceModel fit_rankings(const FamilySpec& spec, const RepresentationKind& rep,
                         std::span<const AnyRanking> training, const AdamConfig& cfg);

struct CrossValidationReport {
  EvalReport aggregate;
  std::vector<EvalReport> folds;
};

/// k-fold cross-validation. The aggregate pools per-ranking values across
/// folds. Folds run on up to `threads` threads; results do not depend on it.
CrossValidationReport cross_validate(const FamilySpec& spec, const RepresentationKind& rep,
                                     std::span<const AnyRanking> rankings, int k_folds,
                                     const AdamConfig& cfg, int threads = 1);

double tv_distance(std::span<const double> p, std::span<const double> q);

}  // namespace chooserank
