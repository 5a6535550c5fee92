#include "chooserank/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace chooserank {

std::int64_t RankingDataset::total_count() const {
  std::int64_t total = 0;
  for (const auto& [r, m] : rankings) total += m;
  return total;
}

std::vector<AnyRanking> RankingDataset::expanded() const {
  std::vector<AnyRanking> out;
  out.reserve(static_cast<std::size_t>(total_count()));
  for (const auto& [r, m] : rankings)
    for (std::int64_t c = 0; c < m; ++c) out.push_back(r);
  return out;
}

std::vector<std::int64_t> RankingDataset::length_histogram() const {
  std::vector<std::int64_t> hist(universe.n + 1, 0);
  for (const auto& [r, m] : rankings) hist[ranked_length(r)] += m;
  return hist;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto end = s.find(sep, start);
    parts.push_back(trim(s.substr(start, end == std::string_view::npos ? end : end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
  throw Error(ErrorKind::MalformedLine, "line " + std::to_string(line_no) + ": " + why);
}

/// Turns a list of ids (already 0-based) into a ranking, checking range and
/// duplicates.
AnyRanking make_ranking(std::vector<Item> ids, int n, std::size_t line_no, ErrorKind range_error) {
  if (ids.empty()) malformed(line_no, "empty ranking");
  std::vector<char> seen(n, 0);
  for (Item i : ids) {
    if (i < 0 || i >= n) {
      if (range_error == ErrorKind::IdOutOfRange)
        throw Error(ErrorKind::IdOutOfRange,
                    "line " + std::to_string(line_no) + ": id " + std::to_string(i) + " out of range");
      malformed(line_no, "candidate out of range");
    }
    if (seen[i]) malformed(line_no, "duplicate candidate");
    seen[i] = 1;
  }
  if (static_cast<int>(ids.size()) == n) return Ranking(std::move(ids));
  return TopKRanking(std::move(ids), n);
}

/// Parses "c1,c2,..." of 1-based candidate ids.
std::vector<Item> parse_candidates(std::string_view list, std::size_t line_no) {
  if (list.find('{') != std::string_view::npos)
    throw Error(ErrorKind::TiesUnsupported,
                "line " + std::to_string(line_no) + ": tied candidates are not supported");
  std::vector<Item> ids;
  for (auto tok : split(list, ',')) {
    std::int64_t v = 0;
    if (!parse_int(tok, v)) malformed(line_no, "expected a candidate id");
    if (v < 1 || v > std::numeric_limits<int>::max()) malformed(line_no, "candidate out of range");
    ids.push_back(static_cast<Item>(v - 1));
  }
  return ids;
}

std::int64_t parse_multiplicity(std::string_view s, std::size_t line_no) {
  std::int64_t m = 0;
  if (!parse_int(s, m) || m < 1) malformed(line_no, "multiplicity must be a positive integer");
  return m;
}

bool is_integer_line(std::string_view s) {
  std::int64_t v;
  return parse_int(s, v);
}

RankingDataset parse_legacy(const std::vector<std::string_view>& lines, std::string source) {
  std::size_t i = 0;
  auto next_content = [&]() -> std::pair<std::string_view, std::size_t> {
    while (i < lines.size()) {
      const auto t = trim(lines[i++]);
      if (!t.empty()) return {t, i};
    }
    return {{}, 0};
  };

  const auto [count_line, count_no] = next_content();
  std::int64_t n = 0;
  if (!parse_int(count_line, n) || n < 2 || n > 1'000'000) malformed(count_no, "bad alternatives count");
  std::vector<std::string> labels(n);
  for (std::int64_t a = 0; a < n; ++a) {
    const auto [line, no] = next_content();
    if (line.empty()) malformed(lines.size(), "missing alternative names");
    const auto comma = line.find(',');
    std::int64_t id = 0;
    if (comma == std::string_view::npos || !parse_int(line.substr(0, comma), id) || id < 1 || id > n)
      malformed(no, "expected 'id,name'");
    labels[id - 1] = std::string(trim(line.substr(comma + 1)));
  }

  RankingDataset d;
  d.universe = Universe(static_cast<int>(n), std::move(labels));
  d.source = std::move(source);

  const auto [summary, summary_no] = next_content();
  if (summary.empty()) return d;
  if (split(summary, ',').size() != 3) malformed(summary_no, "expected 'voters,total,unique'");
  for (auto tok : split(summary, ',')) {
    std::int64_t v;
    if (!parse_int(tok, v)) malformed(summary_no, "expected 'voters,total,unique'");
  }

  while (true) {
    const auto [line, no] = next_content();
    if (line.empty()) break;
    if (line.find('{') != std::string_view::npos)
      throw Error(ErrorKind::TiesUnsupported,
                  "line " + std::to_string(no) + ": tied candidates are not supported");
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) malformed(no, "expected 'count,c1,c2,...'");
    const auto mult = parse_multiplicity(line.substr(0, comma), no);
    d.rankings.emplace_back(make_ranking(parse_candidates(line.substr(comma + 1), no),
                                         d.universe.n, no, ErrorKind::MalformedLine),
                            mult);
  }
  return d;
}

constexpr std::string_view kAltCount = "# NUMBER ALTERNATIVES:";
constexpr std::string_view kAltName = "# ALTERNATIVE NAME ";

}  // namespace

RankingDataset parse_preflib(std::string_view text, std::string source) {
  const auto lines = split_lines(text);
  for (const auto& line : lines) {
    const auto t = trim(line);
    if (t.empty()) continue;
    if (is_integer_line(t)) return parse_legacy(lines, std::move(source));
    break;
  }

  int n = 0;
  std::vector<std::pair<std::int64_t, std::string>> names;
  std::vector<std::pair<std::vector<Item>, std::pair<std::int64_t, std::size_t>>> raw;
  for (std::size_t idx = 0; idx < lines.size(); ++idx) {
    const std::size_t no = idx + 1;
    const auto t = trim(lines[idx]);
    if (t.empty()) continue;
    if (t.front() == '#') {
      if (t.starts_with(kAltCount)) {
        std::int64_t v = 0;
        if (!parse_int(t.substr(kAltCount.size()), v) || v < 2 || v > 1'000'000)
          malformed(no, "bad alternatives count");
        n = static_cast<int>(v);
      } else if (t.starts_with(kAltName)) {
        const auto rest = t.substr(kAltName.size());
        const auto colon = rest.find(':');
        std::int64_t k = 0;
        if (colon == std::string_view::npos || !parse_int(rest.substr(0, colon), k) || k < 1)
          malformed(no, "bad alternative name line");
        names.emplace_back(k, std::string(trim(rest.substr(colon + 1))));
      }
      continue;
    }
    if (n == 0)
      throw Error(ErrorKind::MissingAlternativesCount,
                  "line " + std::to_string(no) + ": data before '# NUMBER ALTERNATIVES:'");
    const auto colon = t.find(':');
    if (colon == std::string_view::npos) {
      if (t.find('{') != std::string_view::npos)
        throw Error(ErrorKind::TiesUnsupported,
                    "line " + std::to_string(no) + ": tied candidates are not supported");
      malformed(no, "expected 'multiplicity: c1,c2,...'");
    }
    auto ids = parse_candidates(t.substr(colon + 1), no);
    raw.emplace_back(std::move(ids), std::make_pair(parse_multiplicity(t.substr(0, colon), no), no));
  }
  if (n == 0) throw Error(ErrorKind::MissingAlternativesCount, "no '# NUMBER ALTERNATIVES:' line");

  std::vector<std::string> labels;
  if (!names.empty()) {
    labels.assign(n, "");
    for (auto& [k, name] : names)
      if (k <= n) labels[k - 1] = std::move(name);
  }
  RankingDataset d;
  d.universe = Universe(n, std::move(labels));
  d.source = std::move(source);
  for (auto& [ids, meta] : raw)
    d.rankings.emplace_back(make_ranking(std::move(ids), n, meta.second, ErrorKind::MalformedLine),
                            meta.first);
  return d;
}

std::string write_preflib(const RankingDataset& d) {
  std::ostringstream out;
  if (!d.source.empty()) out << "# FILE NAME: " << d.source << '\n';
  out << kAltCount << ' ' << d.universe.n << '\n';
  for (std::size_t k = 0; k < d.universe.labels.size(); ++k)
    out << kAltName << k + 1 << ": " << d.universe.labels[k] << '\n';
  for (const auto& [r, m] : d.rankings) {
    out << m << ':';
    const auto items = ranked_items(r);
    for (std::size_t k = 0; k < items.size(); ++k) out << (k ? "," : " ") << items[k] + 1;
    out << '\n';
  }
  return out.str();
}

RankingDataset parse_csv(std::string_view text, int n, std::string source) {
  RankingDataset d;
  d.universe = Universe(n);
  d.source = std::move(source);
  const auto lines = split_lines(text);
  for (std::size_t idx = 0; idx < lines.size(); ++idx) {
    const std::size_t no = idx + 1;
    auto t = trim(lines[idx]);
    if (t.empty() || t.front() == '#') continue;
    std::int64_t mult = 1;
    const auto first_end = t.find_first_of(", \t");
    const auto first = t.substr(0, first_end);
    if (!first.empty() && first.back() == 'x') {
      mult = parse_multiplicity(first.substr(0, first.size() - 1), no);
      if (first_end == std::string_view::npos) malformed(no, "multiplicity without a ranking");
      t = trim(t.substr(first_end));
      if (!t.empty() && t.front() == ',') t = trim(t.substr(1));
    }
    std::vector<Item> ids;
    for (auto tok : split(t, ',')) {
      std::int64_t v = 0;
      if (!parse_int(tok, v)) malformed(no, "expected an item id");
      if (v < 0 || v >= n)
        throw Error(ErrorKind::IdOutOfRange,
                    "line " + std::to_string(no) + ": id " + std::to_string(v) + " out of range");
      ids.push_back(static_cast<Item>(v));
    }
    d.rankings.emplace_back(make_ranking(std::move(ids), n, no, ErrorKind::IdOutOfRange), mult);
  }
  return d;
}

std::string write_csv(const RankingDataset& d) {
  std::ostringstream out;
  for (const auto& [r, m] : d.rankings) {
    if (m != 1) out << m << "x ";
    const auto items = ranked_items(r);
    for (std::size_t k = 0; k < items.size(); ++k) out << (k ? "," : "") << items[k];
    out << '\n';
  }
  return out.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp" + std::to_string(std::random_device{}());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::IoError, "cannot replace " + path.string());
  }
}

RankingDataset load_dataset(const std::filesystem::path& path, int csv_n) {
  const std::string text = read_file(path);
  if (path.extension() == ".csv") {
    if (csv_n < 2) throw Error(ErrorKind::InvalidArgument, "csv data needs the universe size (--n)");
    return parse_csv(text, csv_n, path.filename().string());
  }
  return parse_preflib(text, path.filename().string());
}

// ---------------------------------------------------------------------------
// Model JSON
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

void require_finite(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) throw Error(ErrorKind::InvalidArgument, "cannot save non-finite parameters");
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  require_finite(m);
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

[[noreturn]] void schema(const std::string& why) { throw Error(ErrorKind::SchemaMismatch, why); }

const json& field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) schema(std::string("missing field '") + key + "'");
  return obj.at(key);
}

double number(const json& v) {
  if (!v.is_number()) schema("expected a number");
  return v.get<double>();
}

Eigen::VectorXd vector_from_json(const json& v, int n) {
  if (!v.is_array() || static_cast<int>(v.size()) != n) schema("vector has the wrong length");
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out(i) = number(v[i]);
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& v, int rows, int cols) {
  if (!v.is_array() || static_cast<int>(v.size()) != rows) schema("matrix has the wrong number of rows");
  Eigen::MatrixXd out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (!v[i].is_array() || static_cast<int>(v[i].size()) != cols) schema("matrix row has the wrong length");
    for (int j = 0; j < cols; ++j) out(i, j) = number(v[i][j]);
  }
  return out;
}

Ranking ranking_from_json(const json& v, int n) {
  if (!v.is_array() || static_cast<int>(v.size()) != n) schema("reference has the wrong length");
  std::vector<Item> order;
  for (const auto& e : v) {
    if (!e.is_number_integer()) schema("reference entries must be integers");
    order.push_back(e.get<Item>());
  }
  if (!is_permutation_of_range(order, n)) schema("reference is not a permutation");
  return Ranking(std::move(order));
}

json ranking_to_json(const Ranking& r) { return json(std::vector<Item>(r.order().begin(), r.order().end())); }

}  // namespace

json model_to_json(const ChoiceModel& m) {
  json params = json::object();
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MnlParams>) {
          require_finite(p.log_gamma);
          params["log_gamma"] = std::vector<double>(p.log_gamma.data(), p.log_gamma.data() + p.log_gamma.size());
        } else if constexpr (std::is_same_v<T, CdmParams>) {
          params["d"] = p.d();
          params["A"] = matrix_to_json(p.A);
          params["B"] = matrix_to_json(p.B);
        } else if constexpr (std::is_same_v<T, PcmcParams>) {
          params["theta_matrix"] = matrix_to_json(p.theta);
        } else if constexpr (std::is_same_v<T, MallowsParams>) {
          if (!std::isfinite(p.theta)) throw Error(ErrorKind::InvalidArgument, "cannot save non-finite theta");
          params["reference"] = ranking_to_json(p.reference);
          params["theta"] = p.theta;
        } else if constexpr (std::is_same_v<T, DeterministicModel>) {
          params["reference"] = ranking_to_json(p.ranking);
        }
      },
      m.params());
  return json{{"family", std::string(to_string(m.family()))}, {"n", m.n()}, {"params", std::move(params)}};
}

ChoiceModel model_from_json(const json& j) {
  const auto& fam = field(j, "family");
  if (!fam.is_string()) schema("family must be a string");
  const Family family = family_from_string(fam.get<std::string>());
  const auto& nj = field(j, "n");
  if (!nj.is_number_integer() || nj.get<std::int64_t>() < 2 || nj.get<std::int64_t>() > 1'000'000)
    schema("n must be an integer >= 2");
  const int n = nj.get<int>();
  const json empty = json::object();
  const auto& p = j.contains("params") ? j.at("params") : empty;
  if (!p.is_object()) schema("params must be an object");

  switch (family) {
    case Family::Mnl:
      return MnlParams{vector_from_json(field(p, "log_gamma"), n)};
    case Family::Cdm: {
      const auto& a = field(p, "A");
      const auto& b = field(p, "B");
      if (!a.is_array() || !b.is_array() || a.size() != b.size())
        schema("A and B must have the same number of rows");
      if (static_cast<int>(a.size()) != n) schema("A and B must have n rows");
      const auto& dj = field(p, "d");
      if (!dj.is_number_integer() || dj.get<int>() < 1) schema("d must be a positive integer");
      const int d = dj.get<int>();
      return CdmParams{matrix_from_json(a, n, d), matrix_from_json(b, n, d)};
    }
    case Family::Pcmc:
      return PcmcParams{matrix_from_json(field(p, "theta_matrix"), n, n)};
    case Family::Mallows:
      return MallowsParams{ranking_from_json(field(p, "reference"), n), number(field(p, "theta"))};
    case Family::Uniform:
      return UniformModel{n};
    case Family::Deterministic:
      return DeterministicModel{ranking_from_json(field(p, "reference"), n)};
  }
  throw Error(ErrorKind::UnknownFamily, "unknown family");
}

void save_model(const std::filesystem::path& path, const ChoiceModel& m) {
  write_file_atomic(path, model_to_json(m).dump(2) + "\n");
}

ChoiceModel load_model(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorKind::SchemaMismatch, "model file is not valid JSON");
  return model_from_json(j);
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

json report_to_json(const EvalReport& r) {
  json positions = json::array();
  for (const auto& s : r.per_position)
    positions.push_back({{"position", s.position},
                         {"mean_loglik", s.mean_loglik},
                         {"stderr", s.stderr_loglik},
                         {"count", s.count}});
  return json{{"mean_nll", r.mean_nll},
              {"stderr", r.stderr_nll},
              {"count", r.count},
              {"unseen_item_choices", r.unseen_item_choices},
              {"per_position", std::move(positions)}};
}

std::string report_to_csv(const EvalReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "position,mean_loglik,stderr,count\n";
  for (const auto& s : r.per_position)
    out << s.position << ',' << s.mean_loglik << ',' << s.stderr_loglik << ',' << s.count << '\n';
  return out.str();
}

}  // namespace chooserank
