#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chooserank/models.hpp"
#include "chooserank/ranking.hpp"

namespace chooserank {

/// Outcome of one brute-force check. For equality checks `pass` means the
/// worst residual stayed within `tolerance`; for witness checks
/// (`expects_violation`) it means a violation larger than `tolerance` was found.
struct TheoremCheckResult {
  std::string name;
  int n = 0;
  double max_abs_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  int trials = 0;
  bool expects_violation = false;
  std::string detail;
};

/// All n! rankings in lexicographic order of `order`; 2 <= n <= 8.
std::vector<Ranking> enumerate_rankings(int n);

/// All n!/(n-k)! top-k prefixes in lexicographic order; k < n.
std::vector<TopKRanking> enumerate_topk(int n, int k);

using Representation = std::function<std::vector<Choice>(const Ranking&)>;

/// Sum over S_n of the product of the representation's choice probabilities.
double brute_force_Z(const RepresentationKind& rep, const ChoiceModel& m, int n);
double brute_force_Z(const Representation& rep, const ChoiceModel& m, int n);

/// Sum over all top-k rankings of the product of RS or RE choice
/// probabilities (without the RE normalization).
double brute_force_Z_topk(RepKind rep, const ChoiceModel& m, int n, int k);

TheoremCheckResult check_label_invariance(const RepresentationKind& rep, int n);
TheoremCheckResult check_label_invariance(const Representation& rep, int n,
                                          const std::string& name);

/// RS probabilities of every ranking (enumeration order) under a choice model.
std::vector<double> rs_distribution(const ChoiceModel& m, int n);
/// RE probabilities of every full ranking (enumeration order).
std::vector<double> re_distribution(const ChoiceModel& m, int n);

/// Stationary law of the move-to-front chain with access probabilities gamma
/// (normalized on entry), over enumerate_rankings(n), by power iteration.
std::vector<double> mtf_stationary(std::span<const double> gamma);

/// Smallest total-variation distance between the RS-MNL distribution with
/// weights gamma (n = 3) and any RE-MNL distribution. Searches the interior
/// barycentric grid of the given resolution, then (if `refine`) polishes the
/// best grid point with a shrinking pattern search.
double min_tv_rs_re_mnl(const std::array<double, 3>& gamma, int grid_resolution,
                        bool refine = true);

/// Compares the RS-MNL probabilities of the rankings 0,1,3,2 and 0,1,2,3
/// (n = 4). The check passes when they differ by more than 1e-9.
TheoremCheckResult check_r_decomposability_counterexample(
    const std::array<double, 4>& gamma = {1.0, 1.0, 2.0, 1.0});

/// Random model per family with the suite's sampling conventions.
ChoiceModel random_model(Family family, int n, Rng& rng, int cdm_dim = 1);

struct SuiteOptions {
  std::uint64_t seed = 0;
  int trials = 20;
  /// Universe sizes to use; empty means each check's default sizes.
  std::vector<int> sizes;
};

/// Known suites: normalization, topk, pairwise, label_invariance, embeddings,
/// gradients, mallows, mtf, reversibility, axioms, all.
std::vector<std::string> known_suites();
std::vector<TheoremCheckResult> run_suite(std::span<const std::string> names,
                                          const SuiteOptions& options);

}  // namespace chooserank
