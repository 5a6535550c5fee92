#include "chooserank/estimation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

namespace chooserank {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0))
    throw Error(ErrorKind::InvalidArgument, "learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw Error(ErrorKind::InvalidArgument, "Adam betas must lie in [0, 1)");
  if (epochs < 1) throw Error(ErrorKind::InvalidArgument, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorKind::InvalidArgument, "batch_size must be >= 1");
  if (!(l2_weight >= 0.0)) throw Error(ErrorKind::InvalidArgument, "l2_weight must be >= 0");
}

ChoiceModel initial_model(const FamilySpec& spec, int n, Rng& rng) {
  std::normal_distribution<double> init(0.0, 0.01);
  auto draw = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    // Row-major draw order so the sequence matches the flattened layout.
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = init(rng);
    return m;
  };
  switch (spec.family) {
    case Family::Mnl:
      return MnlParams{draw(n, 1).col(0)};
    case Family::Cdm: {
      if (spec.dim < 1 || spec.dim > n)
        throw Error(ErrorKind::InvalidArgument, "CDM dimension must be in [1, n]");
      Eigen::MatrixXd a = draw(n, spec.dim);
      Eigen::MatrixXd b = draw(n, spec.dim);
      return CdmParams{std::move(a), std::move(b)};
    }
    case Family::Pcmc:
      return PcmcParams{draw(n, n)};
    default:
      throw Error(ErrorKind::UnsupportedModel,
                  "gradient fitting supports mnl, cdm and pcmc only, got " +
                      std::string(to_string(spec.family)));
  }
}

double mean_nll(const ChoiceModel& m, const ChoiceDataset& data) {
  double total = 0.0;
  std::int64_t count = 0;
  for (const auto& e : data.entries) {
    total -= static_cast<double>(e.multiplicity) * log_prob(m, e.choice);
    count += e.multiplicity;
  }
  if (count == 0) throw Error(ErrorKind::InvalidArgument, "empty choice dataset");
  return total / static_cast<double>(count);
}

FitResult fit_mle_from(ChoiceModel model, const ChoiceDataset& data, const AdamConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw Error(ErrorKind::InvalidArgument, "cannot fit an empty dataset");
  const auto start = std::chrono::steady_clock::now();

  // One slot per raw choice, holding its entry index; the order is reshuffled
  // every epoch.
  std::vector<std::uint32_t> slots;
  slots.reserve(static_cast<std::size_t>(data.total_count()));
  for (std::size_t e = 0; e < data.entries.size(); ++e)
    slots.insert(slots.end(), static_cast<std::size_t>(data.entries[e].multiplicity),
                 static_cast<std::uint32_t>(e));

  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  Eigen::VectorXd params = parameter_vector(model);
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(params.size());
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(params.size());
  Eigen::VectorXd grad(params.size());
  std::vector<std::uint32_t> batch;
  std::int64_t step = 0;

  FitResult result{model, mean_nll(model, data), 0.0, {}, 0.0};
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = slots.size() - 1; i > 0; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i);
      std::swap(slots[i], slots[pick(rng)]);
    }
    for (std::size_t begin = 0; begin < slots.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(slots.size(), begin + cfg.batch_size);
      batch.assign(slots.begin() + begin, slots.begin() + end);
      std::sort(batch.begin(), batch.end());

      grad.setZero();
      double loglik = 0.0;
      for (std::size_t i = 0; i < batch.size();) {
        std::size_t j = i;
        while (j < batch.size() && batch[j] == batch[i]) ++j;
        const double w = static_cast<double>(j - i);
        loglik += w * accumulate_grad_log_prob(model, data.entries[batch[i]].choice, w, grad);
        i = j;
      }
      const double size = static_cast<double>(batch.size());
      double loss = -loglik / size;
      grad = -grad / size;
      if (cfg.l2_weight > 0.0) {
        loss += 0.5 * cfg.l2_weight * params.squaredNorm();
        grad += cfg.l2_weight * params;
      }
      if (!std::isfinite(loss) || !grad.allFinite()) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << ", batch " << begin / cfg.batch_size
            << " (loss " << loss << ")";
        throw Error(ErrorKind::NonFiniteLoss, msg.str());
      }

      ++step;
      m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * grad;
      m2 = cfg.beta2 * m2 + (1.0 - cfg.beta2) * grad.cwiseAbs2();
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      params.array() -= cfg.learning_rate * (m1.array() / c1) /
                        ((m2.array() / c2).sqrt() + cfg.epsilon);
      set_parameter_vector(model, params);
    }
    result.nll_trace.push_back(mean_nll(model, data));
  }

  result.model = std::move(model);
  result.final_mean_nll = result.nll_trace.back();
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

FitResult fit_mle(const FamilySpec& spec, const ChoiceDataset& data, const AdamConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw Error(ErrorKind::InvalidArgument, "cannot fit an empty dataset");
  Rng rng(cfg.seed);
  return fit_mle_from(initial_model(spec, data.universe.n, rng), data, cfg);
}

namespace {

int common_universe(std::span<const std::pair<AnyRanking, std::int64_t>> rankings) {
  if (rankings.empty()) throw Error(ErrorKind::InvalidArgument, "no rankings given");
  const int n = universe_size(rankings.front().first);
  for (const auto& [r, mult] : rankings)
    if (universe_size(r) != n)
      throw Error(ErrorKind::MixedUniverse, "rankings over different universe sizes");
  return n;
}

std::vector<std::pair<AnyRanking, std::int64_t>> unit_weights(std::span<const AnyRanking> rs) {
  std::vector<std::pair<AnyRanking, std::int64_t>> out;
  out.reserve(rs.size());
  for (const auto& r : rs) out.emplace_back(r, 1);
  return out;
}

}  // namespace

Ranking mga_reference(std::span<const std::pair<AnyRanking, std::int64_t>> rankings,
                      bool unranked_follow) {
  const int n = common_universe(rankings);
  // before(j, i): weighted count of rankings placing j ahead of i.
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> before =
      Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  std::vector<char> ranked(n);
  for (const auto& [r, w] : rankings) {
    const auto items = ranked_items(r);
    for (std::size_t a = 0; a < items.size(); ++a)
      for (std::size_t b = a + 1; b < items.size(); ++b) before(items[a], items[b]) += w;
    if (unranked_follow && static_cast<int>(items.size()) < n) {
      std::fill(ranked.begin(), ranked.end(), 0);
      for (Item i : items) ranked[i] = 1;
      for (Item i : items)
        for (Item u = 0; u < n; ++u)
          if (!ranked[u]) before(i, u) += w;
    }
  }

  std::vector<char> placed(n, 0);
  std::vector<Item> order;
  order.reserve(n);
  for (int step = 0; step < n; ++step) {
    Item best = -1;
    std::int64_t best_cost = 0;
    for (Item i = 0; i < n; ++i) {
      if (placed[i]) continue;
      std::int64_t cost = 0;
      for (Item j = 0; j < n; ++j)
        if (!placed[j] && j != i) cost += before(j, i);
      if (best < 0 || cost < best_cost) {
        best = i;
        best_cost = cost;
      }
    }
    placed[best] = 1;
    order.push_back(best);
  }
  return Ranking(std::move(order));
}

Ranking mga_reference(std::span<const AnyRanking> rankings) {
  const auto weighted = unit_weights(rankings);
  return mga_reference(weighted);
}

PairwiseTally mallows_pair_tally(std::span<const std::pair<AnyRanking, std::int64_t>> rankings,
                                 const Ranking& reference) {
  const int n = common_universe(rankings);
  if (reference.size() != n)
    throw Error(ErrorKind::DimensionMismatch, "reference size differs from the rankings");
  PairwiseTally tally;
  std::vector<char> ranked(n);
  for (const auto& [r, w] : rankings) {
    const auto items = ranked_items(r);
    const auto len = static_cast<std::int64_t>(items.size());
    if (len == n) {
      tally.comparable_pairs += w * (len * (len - 1) / 2);
    } else {
      tally.comparable_pairs += w * (len * (len - 1) / 2 + (n - len) * len);
    }
    std::int64_t inv = 0;
    for (std::size_t a = 0; a < items.size(); ++a)
      for (std::size_t b = a + 1; b < items.size(); ++b)
        if (reference.position_of(items[a]) > reference.position_of(items[b])) ++inv;
    if (len < n) {
      std::fill(ranked.begin(), ranked.end(), 0);
      for (Item i : items) ranked[i] = 1;
      for (Item i : items)
        for (Item u = 0; u < n; ++u)
          if (!ranked[u] && reference.position_of(u) < reference.position_of(i)) ++inv;
    }
    tally.inversions += w * inv;
  }
  return tally;
}

double mallows_theta_from_tally(const PairwiseTally& tally) {
  if (tally.comparable_pairs <= 0)
    throw Error(ErrorKind::InvalidArgument, "no comparable pairs for the Mallows estimate");
  if (tally.inversions == 0) return kMallowsThetaMax;
  const double ratio =
      static_cast<double>(tally.inversions) / static_cast<double>(tally.comparable_pairs);
  return std::clamp(-std::log(ratio), 0.0, kMallowsThetaMax);
}

double mallows_theta_mle(std::span<const std::pair<AnyRanking, std::int64_t>> rankings,
                         const Ranking& reference) {
  return mallows_theta_from_tally(mallows_pair_tally(rankings, reference));
}

double mallows_theta_mle(std::span<const AnyRanking> rankings, const Ranking& reference) {
  const auto weighted = unit_weights(rankings);
  return mallows_theta_mle(weighted, reference);
}

FoldSplit kfold_split(std::size_t count, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::InvalidArgument, "need at least two folds");
  if (count < static_cast<std::size_t>(k))
    throw Error(ErrorKind::TooFewItems, "fewer items than folds");
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = count - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(idx[i], idx[pick(rng)]);
  }
  FoldSplit split;
  const std::size_t base = count / k, extra = count % k;
  std::size_t at = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    split.folds.emplace_back(idx.begin() + at, idx.begin() + at + size);
    at += size;
  }
  return split;
}

}  // namespace chooserank
