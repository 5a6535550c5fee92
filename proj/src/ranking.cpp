#include "chooserank/ranking.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace chooserank {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::TopKTooShort: return "TopKTooShort";
    case ErrorKind::FullRankingRequired: return "FullRankingRequired";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::MixedUniverse: return "MixedUniverse";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::UnsupportedModel: return "UnsupportedModel";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::TooFewItems: return "TooFewItems";
    case ErrorKind::NTooLarge: return "NTooLarge";
    case ErrorKind::UnknownCheck: return "UnknownCheck";
    case ErrorKind::TiesUnsupported: return "TiesUnsupported";
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::MissingAlternativesCount: return "MissingAlternativesCount";
    case ErrorKind::IdOutOfRange: return "IdOutOfRange";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::UnknownFamily: return "UnknownFamily";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Universe::Universe(int size, std::vector<std::string> names)
    : n(size), labels(std::move(names)) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "universe needs n >= 2");
  if (!labels.empty() && static_cast<int>(labels.size()) != n)
    throw Error(ErrorKind::DimensionMismatch, "label count differs from n");
}

bool is_permutation_of_range(std::span<const int> values, int n) {
  if (static_cast<int>(values.size()) != n) return false;
  std::vector<char> seen(n, 0);
  for (int v : values) {
    if (v < 0 || v >= n || seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

Ranking::Ranking(std::vector<Item> order) : order_(std::move(order)) {
  const int n = size();
  if (!is_permutation_of_range(order_, n))
    throw Error(ErrorKind::InvalidArgument, "ranking order is not a permutation");
  inverse_.resize(n);
  for (int k = 0; k < n; ++k) inverse_[order_[k]] = k;
}

Ranking Ranking::identity(int n) {
  std::vector<Item> order(n);
  std::iota(order.begin(), order.end(), 0);
  return Ranking(std::move(order));
}

Ranking Ranking::reversed() const {
  return Ranking(std::vector<Item>(order_.rbegin(), order_.rend()));
}

TopKRanking::TopKRanking(std::vector<Item> prefix, int n)
    : prefix_(std::move(prefix)), n_(n) {
  if (prefix_.empty() || k() > n_)
    throw Error(ErrorKind::InvalidArgument, "top-k ranking needs 1 <= k <= n");
  std::vector<char> seen(n_, 0);
  for (Item i : prefix_) {
    if (i < 0 || i >= n_) throw Error(ErrorKind::IdOutOfRange, "item id out of range");
    if (seen[i]) throw Error(ErrorKind::InvalidArgument, "duplicate item in prefix");
    seen[i] = 1;
  }
}

Ranking TopKRanking::completed() const {
  if (k() < n_ - 1)
    throw Error(ErrorKind::InvalidArgument, "prefix does not determine a full ranking");
  std::vector<Item> order = prefix_;
  if (k() == n_ - 1) {
    std::vector<char> seen(n_, 0);
    for (Item i : prefix_) seen[i] = 1;
    for (Item i = 0; i < n_; ++i)
      if (!seen[i]) order.push_back(i);
  }
  return Ranking(std::move(order));
}

std::span<const Item> ranked_items(const AnyRanking& r) {
  return std::visit(
      [](const auto& x) -> std::span<const Item> {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, Ranking>)
          return x.order();
        else
          return x.prefix();
      },
      r);
}

int universe_size(const AnyRanking& r) {
  if (const auto* full = std::get_if<Ranking>(&r)) return full->size();
  return std::get<TopKRanking>(r).universe_size();
}

int ranked_length(const AnyRanking& r) {
  return static_cast<int>(ranked_items(r).size());
}

bool is_complete(const AnyRanking& r) {
  return ranked_length(r) == universe_size(r);
}

Choice::Choice(Item w, std::vector<Item> set) : winner(w), choice_set(std::move(set)) {
  std::sort(choice_set.begin(), choice_set.end());
  if (choice_set.size() < 2)
    throw Error(ErrorKind::InvalidArgument, "choice set needs at least two items");
  if (std::adjacent_find(choice_set.begin(), choice_set.end()) != choice_set.end())
    throw Error(ErrorKind::InvalidArgument, "choice set has duplicates");
  if (!std::binary_search(choice_set.begin(), choice_set.end(), winner))
    throw Error(ErrorKind::InvalidArgument, "winner not in choice set");
}

bool canonical_less(const Choice& a, const Choice& b) {
  if (a.choice_set != b.choice_set) return a.choice_set < b.choice_set;
  return a.winner < b.winner;
}

std::int64_t ChoiceDataset::total_count() const {
  std::int64_t total = 0;
  for (const auto& e : entries) total += e.multiplicity;
  return total;
}

RepresentationKind RepresentationKind::permuted_rs(std::vector<int> pi) {
  return {RepKind::PermutedRS, std::move(pi)};
}

std::string to_string(const RepresentationKind& rep) {
  switch (rep.kind) {
    case RepKind::RS: return "rs";
    case RepKind::RE: return "re";
    case RepKind::PW: return "pw";
    case RepKind::PermutedRS: {
      std::string s = "permuted_rs(";
      for (std::size_t i = 0; i < rep.permutation.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(rep.permutation[i]);
      }
      return s + ")";
    }
  }
  return "?";
}

std::vector<Choice> rs_represent(const AnyRanking& r) {
  const auto items = ranked_items(r);
  const int n = universe_size(r);
  const int steps = std::min<int>(static_cast<int>(items.size()), n - 1);

  // Remaining set starts as the whole universe and loses each winner in turn.
  std::vector<char> removed(n, 0);
  std::vector<Choice> out;
  out.reserve(steps);
  for (int i = 0; i < steps; ++i) {
    std::vector<Item> set;
    set.reserve(n - i);
    for (Item j = 0; j < n; ++j)
      if (!removed[j]) set.push_back(j);
    out.emplace_back(items[i], std::move(set));
    removed[items[i]] = 1;
  }
  return out;
}

std::vector<Choice> re_represent(const AnyRanking& r) {
  const auto items = ranked_items(r);
  if (items.size() < 2)
    throw Error(ErrorKind::TopKTooShort, "repeated elimination needs at least two ranked items");
  std::vector<Choice> out;
  out.reserve(items.size() - 1);
  for (std::size_t i = 1; i < items.size(); ++i)
    out.emplace_back(items[i], std::vector<Item>(items.begin(), items.begin() + i + 1));
  return out;
}

std::vector<Choice> pw_represent(const AnyRanking& r) {
  if (!is_complete(r))
    throw Error(ErrorKind::FullRankingRequired, "pairwise breaking needs a full ranking");
  const auto items = ranked_items(r);
  std::vector<Choice> out;
  out.reserve(items.size() * (items.size() - 1) / 2);
  for (std::size_t a = 0; a < items.size(); ++a)
    for (std::size_t b = a + 1; b < items.size(); ++b)
      out.emplace_back(items[a], std::vector<Item>{items[a], items[b]});
  return out;
}

std::vector<Choice> permuted_rs_represent(const AnyRanking& r, std::span<const int> pi) {
  if (!is_complete(r))
    throw Error(ErrorKind::FullRankingRequired, "permuted selection needs a full ranking");
  const auto items = ranked_items(r);
  const int n = static_cast<int>(items.size());
  if (!is_permutation_of_range(pi, n))
    throw Error(ErrorKind::DimensionMismatch, "pi is not a permutation of the ranking's universe");

  // Step t selects the item at position pi^{-1}(t) from the items at positions
  // pi^{-1}(t), pi^{-1}(t+1), ...
  std::vector<int> pi_inv(n);
  for (int i = 0; i < n; ++i) pi_inv[pi[i]] = i;
  std::vector<Choice> out;
  out.reserve(n - 1);
  for (int t = 0; t + 1 < n; ++t) {
    std::vector<Item> set;
    set.reserve(n - t);
    for (int s = t; s < n; ++s) set.push_back(items[pi_inv[s]]);
    out.emplace_back(items[pi_inv[t]], std::move(set));
  }
  return out;
}

std::vector<Choice> represent(const AnyRanking& r, const RepresentationKind& rep) {
  switch (rep.kind) {
    case RepKind::RS: return rs_represent(r);
    case RepKind::RE: return re_represent(r);
    case RepKind::PW: return pw_represent(r);
    case RepKind::PermutedRS: return permuted_rs_represent(r, rep.permutation);
  }
  return {};
}

namespace {

struct ChoiceKeyLess {
  bool operator()(const Choice& a, const Choice& b) const { return canonical_less(a, b); }
};

}  // namespace

ChoiceDataset build_choice_dataset(
    std::span<const std::pair<AnyRanking, std::int64_t>> rankings,
    const RepresentationKind& rep) {
  ChoiceDataset data;
  if (rankings.empty()) return data;
  const int n = universe_size(rankings.front().first);
  data.universe = Universe(n);
  std::map<Choice, std::int64_t, ChoiceKeyLess> counts;
  for (const auto& [r, mult] : rankings) {
    if (universe_size(r) != n)
      throw Error(ErrorKind::MixedUniverse, "rankings over different universe sizes");
    if (mult < 1) throw Error(ErrorKind::InvalidArgument, "multiplicity must be positive");
    for (auto& c : represent(r, rep)) counts[std::move(c)] += mult;
  }
  data.entries.reserve(counts.size());
  for (auto& [c, m] : counts) data.entries.push_back({c, m});
  return data;
}

ChoiceDataset build_choice_dataset(std::span<const AnyRanking> rankings,
                                   const RepresentationKind& rep) {
  std::vector<std::pair<AnyRanking, std::int64_t>> weighted;
  weighted.reserve(rankings.size());
  for (const auto& r : rankings) weighted.emplace_back(r, 1);
  return build_choice_dataset(std::span<const std::pair<AnyRanking, std::int64_t>>(weighted), rep);
}

Choice relabel(const Choice& c, std::span<const int> map) {
  std::vector<Item> set;
  set.reserve(c.choice_set.size());
  for (Item i : c.choice_set) set.push_back(map[i]);
  return Choice(map[c.winner], std::move(set));
}

}  // namespace chooserank
