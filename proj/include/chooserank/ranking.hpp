#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "chooserank/error.hpp"

namespace chooserank {

using Item = int;

/// The set of alternatives being ranked: ids 0..n-1 with optional display names.
struct Universe {
  int n = 0;
  std::vector<std::string> labels;

  Universe() = default;
  explicit Universe(int size, std::vector<std::string> names = {});

  bool operator==(const Universe&) const = default;
};

/// A complete ranking. `order()[k]` is the item at position k and
/// `inverse()[i]` is the position of item i.
class Ranking {
 public:
  Ranking() = default;
  explicit Ranking(std::vector<Item> order);

  static Ranking identity(int n);

  int size() const { return static_cast<int>(order_.size()); }
  std::span<const Item> order() const { return order_; }
  std::span<const int> inverse() const { return inverse_; }
  Item at(int position) const { return order_[position]; }
  int position_of(Item item) const { return inverse_[item]; }

  Ranking reversed() const;

  bool operator==(const Ranking& other) const { return order_ == other.order_; }
  auto operator<=>(const Ranking& other) const { return order_ <=> other.order_; }

 private:
  std::vector<Item> order_;
  std::vector<int> inverse_;
};

/// An ordered prefix of k distinct items from a universe of n.
class TopKRanking {
 public:
  TopKRanking() = default;
  TopKRanking(std::vector<Item> prefix, int n);

  int k() const { return static_cast<int>(prefix_.size()); }
  int universe_size() const { return n_; }
  std::span<const Item> prefix() const { return prefix_; }
  bool is_complete() const { return k() == n_; }

  /// The unique full ranking extending this prefix; requires k >= n - 1.
  Ranking completed() const;

  bool operator==(const TopKRanking&) const = default;

 private:
  std::vector<Item> prefix_;
  int n_ = 0;
};

using AnyRanking = std::variant<Ranking, TopKRanking>;

std::span<const Item> ranked_items(const AnyRanking& r);
int universe_size(const AnyRanking& r);
/// Number of ranked positions (n for a full ranking, k for a top-k prefix).
int ranked_length(const AnyRanking& r);
bool is_complete(const AnyRanking& r);

/// A choice of `winner` from `choice_set` (sorted, distinct, size >= 2).
struct Choice {
  Item winner = 0;
  std::vector<Item> choice_set;

  Choice() = default;
  Choice(Item winner, std::vector<Item> choice_set);

  bool operator==(const Choice&) const = default;
};

/// Ordering used for canonical dataset layout: by choice set, then winner.
bool canonical_less(const Choice& a, const Choice& b);

struct WeightedChoice {
  Choice choice;
  std::int64_t multiplicity = 1;

  bool operator==(const WeightedChoice&) const = default;
};

struct ChoiceDataset {
  Universe universe;
  std::vector<WeightedChoice> entries;

  std::int64_t total_count() const;
  bool empty() const { return entries.empty(); }
};

enum class RepKind { RS, RE, PW, PermutedRS };

/// Selects a choice representation. PermutedRS carries the order in which
/// positions are selected.
struct RepresentationKind {
  RepKind kind = RepKind::RS;
  std::vector<int> permutation;

  static RepresentationKind rs() { return {RepKind::RS, {}}; }
  static RepresentationKind re() { return {RepKind::RE, {}}; }
  static RepresentationKind pw() { return {RepKind::PW, {}}; }
  static RepresentationKind permuted_rs(std::vector<int> pi);
};

std::string to_string(const RepresentationKind& rep);

bool is_permutation_of_range(std::span<const int> values, int n);

std::vector<Choice> rs_represent(const AnyRanking& r);
std::vector<Choice> re_represent(const AnyRanking& r);
std::vector<Choice> pw_represent(const AnyRanking& r);
std::vector<Choice> permuted_rs_represent(const AnyRanking& r,
                                          std::span<const int> pi);
std::vector<Choice> represent(const AnyRanking& r,
                              const RepresentationKind& rep);

ChoiceDataset build_choice_dataset(std::span<const AnyRanking> rankings,
                                   const RepresentationKind& rep);

/// Same as above with a multiplicity per ranking.
ChoiceDataset build_choice_dataset(
    std::span<const std::pair<AnyRanking, std::int64_t>> rankings,
    const RepresentationKind& rep);

/// Relabels items: item i becomes relabel[i].
Choice relabel(const Choice& c, std::span<const int> relabel);

}  // namespace chooserank
