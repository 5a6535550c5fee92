#pragma once

// Random well-formed Preflib files with the rankings they encode.

#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "chooserank/io.hpp"

namespace preflib_gen {

struct Generated {
  std::string text;
  int n = 0;
  std::vector<std::string> labels;
  std::vector<std::pair<std::vector<chooserank::Item>, std::int64_t>> ballots;
};

inline std::string random_name(std::mt19937_64& rng) {
  static const char alphabet[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 -_.()";
  std::uniform_int_distribution<int> len(1, 12), ch(0, sizeof(alphabet) - 2);
  std::string s;
  const int l = len(rng);
  for (int i = 0; i < l; ++i) s += alphabet[ch(rng)];
  // Names are trimmed on read.
  while (!s.empty() && s.back() == ' ') s.pop_back();
  while (!s.empty() && s.front() == ' ') s.erase(s.begin());
  return s.empty() ? "x" : s;
}

inline Generated generate(std::mt19937_64& rng) {
  Generated g;
  std::uniform_int_distribution<int> nd(2, 12), coin(0, 1), lines(0, 25), mult(1, 50), pad(0, 2);
  g.n = nd(rng);
  const bool legacy = std::uniform_int_distribution<int>(0, 4)(rng) == 0;
  const bool named = legacy || coin(rng);
  for (int i = 0; i < g.n; ++i) g.labels.push_back(named ? random_name(rng) : std::string());
  if (!named) g.labels.clear();

  const int count = lines(rng);
  std::vector<chooserank::Item> items(g.n);
  std::iota(items.begin(), items.end(), 0);
  std::int64_t voters = 0;
  for (int b = 0; b < count; ++b) {
    std::shuffle(items.begin(), items.end(), rng);
    const int k = std::uniform_int_distribution<int>(1, g.n)(rng);
    g.ballots.emplace_back(std::vector<chooserank::Item>(items.begin(), items.begin() + k), mult(rng));
    voters += g.ballots.back().second;
  }

  auto spaces = [&] { return std::string(pad(rng), ' '); };
  auto ballot_line = [&](const auto& ballot, bool legacy_line) {
    std::string s = std::to_string(ballot.second) + (legacy_line ? "," : ":" + spaces());
    for (std::size_t i = 0; i < ballot.first.size(); ++i) {
      if (i) s += legacy_line ? "," : "," + spaces();
      s += std::to_string(ballot.first[i] + 1);
    }
    return s;
  };

  if (legacy) {
    g.text = std::to_string(g.n) + "\n";
    for (int i = 0; i < g.n; ++i) g.text += std::to_string(i + 1) + "," + g.labels[i] + "\n";
    g.text += std::to_string(voters) + "," + std::to_string(voters) + "," + std::to_string(count) + "\n";
    for (const auto& b : g.ballots) g.text += ballot_line(b, true) + "\n";
    return g;
  }

  if (coin(rng)) g.text += "# FILE NAME: fuzz.soi\n# TITLE: " + random_name(rng) + "\n";
  g.text += "# NUMBER ALTERNATIVES: " + std::to_string(g.n) + "\n";
  for (std::size_t i = 0; i < g.labels.size(); ++i)
    g.text += "# ALTERNATIVE NAME " + std::to_string(i + 1) + ": " + g.labels[i] + "\n";
  if (coin(rng)) g.text += "# NUMBER VOTERS: " + std::to_string(voters) + "\n";
  for (const auto& b : g.ballots) {
    if (std::uniform_int_distribution<int>(0, 9)(rng) == 0) g.text += "\n";
    g.text += ballot_line(b, false) + "\n";
  }
  if (coin(rng) && !g.text.empty()) g.text.pop_back();  // no trailing newline
  return g;
}

// Empty string when the parse matches the generated ballots.
inline std::string mismatch(const Generated& g, const chooserank::RankingDataset& d) {
  if (d.universe.n != g.n) return "universe size";
  if (!g.labels.empty() && d.universe.labels != g.labels) return "labels";
  if (d.rankings.size() != g.ballots.size()) return "ballot count";
  for (std::size_t b = 0; b < g.ballots.size(); ++b) {
    const auto items = chooserank::ranked_items(d.rankings[b].first);
    if (!std::equal(items.begin(), items.end(), g.ballots[b].first.begin(), g.ballots[b].first.end()))
      return "ballot " + std::to_string(b);
    if (d.rankings[b].second != g.ballots[b].second) return "multiplicity " + std::to_string(b);
    if (chooserank::is_complete(d.rankings[b].first) != (static_cast<int>(items.size()) == g.n))
      return "completeness " + std::to_string(b);
  }
  return "";
}

inline bool same_dataset(const chooserank::RankingDataset& a, const chooserank::RankingDataset& b) {
  return a.universe == b.universe && a.rankings == b.rankings;
}

}  // namespace preflib_gen
