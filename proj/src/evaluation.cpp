#include "chooserank/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>
#include <tuple>

#include <spdlog/spdlog.h>

namespace chooserank {

void RankingScores::append(const RankingScores& other) {
  nll.insert(nll.end(), other.nll.begin(), other.nll.end());
  if (position_loglik.size() < other.position_loglik.size())
    position_loglik.resize(other.position_loglik.size());
  for (std::size_t k = 0; k < other.position_loglik.size(); ++k)
    position_loglik[k].insert(position_loglik[k].end(), other.position_loglik[k].begin(),
                              other.position_loglik[k].end());
}

RankingScores score_rankings(const ChoiceModel& m, const RepresentationKind& rep,
                             std::span<const AnyRanking> test) {
  if (rep.kind != RepKind::RS && rep.kind != RepKind::RE)
    throw Error(ErrorKind::InvalidArgument, "evaluation supports the rs and re representations");
  RankingScores scores;
  scores.nll.reserve(test.size());
  bool re_topk_seen = false;
  for (const auto& r : test) {
    if (rep.kind == RepKind::RE) {
      // Full rankings only: these are the RS choices of the reversed ranking,
      // reported at the chosen item's original position (position 1 has none).
      scores.nll.push_back(-ranking_log_prob(m, rep, r));
      if (!is_complete(r)) {
        re_topk_seen = true;
        continue;
      }
      const auto choices = re_represent(r);
      if (scores.position_loglik.size() < choices.size() + 1)
        scores.position_loglik.resize(choices.size() + 1);
      for (std::size_t k = 0; k < choices.size(); ++k)
        scores.position_loglik[k + 1].push_back(log_prob(m, choices[k]));
      continue;
    }
    const auto choices = rs_represent(r);
    if (scores.position_loglik.size() < choices.size()) scores.position_loglik.resize(choices.size());
    double total = 0.0;
    for (std::size_t k = 0; k < choices.size(); ++k) {
      const double lp = log_prob(m, choices[k]);
      scores.position_loglik[k].push_back(lp);
      total += lp;
    }
    scores.nll.push_back(-total);
  }
  // Position curves have no meaning for elimination on top-k data.
  if (re_topk_seen) scores.position_loglik.clear();
  return scores;
}

namespace {

std::pair<double, double> mean_and_stderr(const std::vector<double>& values) {
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

}  // namespace

EvalReport summarize(const RankingScores& scores) {
  if (scores.nll.empty()) throw Error(ErrorKind::InvalidArgument, "no test rankings");
  EvalReport report;
  report.count = static_cast<std::int64_t>(scores.nll.size());
  std::tie(report.mean_nll, report.stderr_nll) = mean_and_stderr(scores.nll);
  for (std::size_t k = 0; k < scores.position_loglik.size(); ++k) {
    const auto& vals = scores.position_loglik[k];
    if (vals.empty()) continue;
    const auto [mean, se] = mean_and_stderr(vals);
    report.per_position.push_back(
        {static_cast<int>(k + 1), mean, se, static_cast<std::int64_t>(vals.size())});
  }
  return report;
}

EvalReport evaluate(const ChoiceModel& m, const RepresentationKind& rep,
                    std::span<const AnyRanking> test) {
  if (test.empty()) throw Error(ErrorKind::InvalidArgument, "empty test set");
  return summarize(score_rankings(m, rep, test));
}

namespace {

AnyRanking reverse_for_elimination(const AnyRanking& r) {
  const auto items = ranked_items(r);
  std::vector<Item> rev(items.rbegin(), items.rend());
  if (is_complete(r)) return Ranking(std::move(rev));
  return TopKRanking(std::move(rev), universe_size(r));
}

ChoiceModel fit_mallows(const RepresentationKind& rep, std::span<const AnyRanking> training) {
  std::vector<std::pair<AnyRanking, std::int64_t>> weighted;
  weighted.reserve(training.size());
  if (rep.kind == RepKind::RS) {
    for (const auto& r : training) weighted.emplace_back(r, 1);
    Ranking reference = mga_reference(weighted);
    const double theta = mallows_theta_mle(weighted, reference);
    return MallowsParams{std::move(reference), theta};
  }
  // RE: the greedy reference is built on reversed rankings, counting only
  // pairs that the elimination choices actually see. That reference is the
  // one the elimination choice model uses.
  for (const auto& r : training) weighted.emplace_back(reverse_for_elimination(r), 1);
  Ranking reference = mga_reference(weighted, /*unranked_follow=*/false);
  weighted.clear();
  for (const auto& r : training) weighted.emplace_back(r, 1);
  const double theta = mallows_theta_mle(weighted, reference.reversed());
  return MallowsParams{std::move(reference), theta};
}

}  // namespace

ChoiceModel fit_rankings(const FamilySpec& spec, const RepresentationKind& rep,
                         std::span<const AnyRanking> training, const AdamConfig& cfg) {
  if (training.empty()) throw Error(ErrorKind::InvalidArgument, "empty training set");
  if (rep.kind != RepKind::RS && rep.kind != RepKind::RE)
    throw Error(ErrorKind::InvalidArgument, "fitting supports the rs and re representations");
  const int n = universe_size(training.front());
  switch (spec.family) {
    case Family::Uniform:
      return UniformModel{n};
    case Family::Mallows:
      return fit_mallows(rep, training);
    case Family::Deterministic:
      throw Error(ErrorKind::UnsupportedModel, "deterministic models are not fitted");
    default:
      break;
  }
  const ChoiceDataset data = build_choice_dataset(training, rep);
  return fit_mle(spec, data, cfg).model;
}

namespace {

std::int64_t count_unseen_choices(const RepresentationKind& rep,
                                  std::span<const AnyRanking> training,
                                  std::span<const AnyRanking> test) {
  const int n = universe_size(training.front());
  std::vector<char> seen(n, 0);
  for (const auto& r : training)
    for (Item i : ranked_items(r)) seen[i] = 1;
  std::int64_t affected = 0;
  for (const auto& r : test)
    for (const auto& c : represent(r, rep))
      if (std::any_of(c.choice_set.begin(), c.choice_set.end(), [&](Item i) { return !seen[i]; }))
        ++affected;
  return affected;
}

}  // namespace

CrossValidationReport cross_validate(const FamilySpec& spec, const RepresentationKind& rep,
                                     std::span<const AnyRanking> rankings, int k_folds,
                                     const AdamConfig& cfg, int threads) {
  if (k_folds < 2) throw Error(ErrorKind::InvalidArgument, "need at least two folds");
  const FoldSplit split = kfold_split(rankings.size(), k_folds, cfg.seed);

  struct FoldOutcome {
    RankingScores scores;
    std::int64_t unseen = 0;
  };
  std::vector<FoldOutcome> outcomes(k_folds);

  auto run_fold = [&](int f) {
    std::vector<char> in_test(rankings.size(), 0);
    for (std::size_t i : split.folds[f]) in_test[i] = 1;
    std::vector<AnyRanking> train, test;
    train.reserve(rankings.size() - split.folds[f].size());
    for (std::size_t i = 0; i < rankings.size(); ++i)
      if (!in_test[i]) train.push_back(rankings[i]);
    for (std::size_t i : split.folds[f]) test.push_back(rankings[i]);
    AdamConfig fold_cfg = cfg;
    fold_cfg.seed = cfg.seed + static_cast<std::uint64_t>(f) + 1;
    const ChoiceModel model = fit_rankings(spec, rep, train, fold_cfg);
    outcomes[f].scores = score_rankings(model, rep, test);
    outcomes[f].unseen = count_unseen_choices(rep, train, test);
  };

  const int workers = std::clamp(threads, 1, k_folds);
  if (workers == 1) {
    for (int f = 0; f < k_folds; ++f) run_fold(f);
  } else {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(k_folds);
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (int f = next++; f < k_folds; f = next++) {
          try {
            run_fold(f);
          } catch (...) {
            errors[f] = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  CrossValidationReport report;
  RankingScores pooled;
  std::int64_t unseen = 0;
  for (const auto& o : outcomes) {
    EvalReport fold = summarize(o.scores);
    fold.unseen_item_choices = o.unseen;
    report.folds.push_back(std::move(fold));
    pooled.append(o.scores);
    unseen += o.unseen;
  }
  if (rep.kind == RepKind::RE &&
      std::any_of(rankings.begin(), rankings.end(), [](const AnyRanking& r) { return !is_complete(r); }))
    pooled.position_loglik.clear();
  report.aggregate = summarize(pooled);
  report.aggregate.unseen_item_choices = unseen;
  if (unseen > 0)
    spdlog::warn("{} test choices involve items unseen in their training fold", unseen);
  return report;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(ErrorKind::DimensionMismatch, "distributions differ in length");
  double sp = 0.0, sq = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sp += p[i];
    sq += q[i];
    l1 += std::abs(p[i] - q[i]);
  }
  if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9)
    throw Error(ErrorKind::InvalidArgument, "distributions must sum to 1");
  return 0.5 * l1;
}

}  // namespace chooserank
