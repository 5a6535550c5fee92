#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "chooserank/evaluation.hpp"
#include "chooserank/models.hpp"
#include "chooserank/ranking.hpp"

namespace chooserank {

struct RankingDataset {
  Universe universe;
  std::vector<std::pair<AnyRanking, std::int64_t>> rankings;
  std::string source;

  std::int64_t total_count() const;
  /// One entry per ballot (multiplicities expanded), in file order.
  std::vector<AnyRanking> expanded() const;
  /// histogram[k] = number of ballots (with multiplicity) of length k.
  std::vector<std::int64_t> length_histogram() const;
};

/// Preflib strict-order data (.soc / .soi). Accepts the 2023 header format
/// and the older count-line format.
RankingDataset parse_preflib(std::string_view text, std::string source = "");
/// Writes the 2023 format. parse_preflib(write_preflib(d)) == d.
std::string write_preflib(const RankingDataset& d);

/// One ranking per line, comma-separated 0-based ids, optional "Nx" prefix
/// giving a multiplicity ("3x 0,1").
RankingDataset parse_csv(std::string_view text, int n, std::string source = "");
std::string write_csv(const RankingDataset& d);

std::string read_file(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Reads a dataset, choosing the parser from the extension (.csv needs n).
RankingDataset load_dataset(const std::filesystem::path& path, int csv_n = 0);

nlohmann::json model_to_json(const ChoiceModel& m);
ChoiceModel model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const ChoiceModel& m);
ChoiceModel load_model(const std::filesystem::path& path);

nlohmann::json report_to_json(const EvalReport& r);
/// position,mean_loglik,stderr,count
std::string report_to_csv(const EvalReport& r);

}  // namespace chooserank
