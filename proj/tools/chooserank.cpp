// chooserank command-line driver: fit | eval | xval | sample | verify | positions

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "chooserank/evaluation.hpp"
#include "chooserank/io.hpp"
#include "chooserank/verification.hpp"

using namespace chooserank;
using nlohmann::json;

namespace {

struct RunConfig {
  std::string command;
  std::string data_path;
  std::string model_path;
  std::string rep = "rs";
  std::string family = "mnl";
  int dim = 1;
  AdamConfig adam;
  int folds = 5;
  std::string out_path;
  int threads = 0;
  std::string suite = "all";
  int n = 0;
  std::int64_t count = 0;
  int topk = 0;
};

json config_json(const RunConfig& c) {
  json j{{"command", c.command}};
  if (!c.data_path.empty()) j["data"] = c.data_path;
  if (!c.model_path.empty()) j["model"] = c.model_path;
  if (c.command == "fit" || c.command == "xval" || c.command == "eval" || c.command == "positions")
    j["rep"] = c.rep;
  if (c.command == "fit" || c.command == "xval" || c.command == "positions") {
    j["family"] = c.family;
    j["dim"] = c.dim;
    j["epochs"] = c.adam.epochs;
    j["lr"] = c.adam.learning_rate;
    j["batch"] = c.adam.batch_size;
  }
  if (c.command == "xval" || c.command == "positions") j["folds"] = c.folds;
  if (c.command == "verify") j["suite"] = c.suite;
  if (c.command == "sample") {
    j["count"] = c.count;
    j["topk"] = c.topk;
  }
  if (c.n > 0) j["n"] = c.n;
  j["seed"] = c.adam.seed;
  return j;
}

RepresentationKind parse_rep(const std::string& s) {
  if (s == "rs") return RepresentationKind::rs();
  if (s == "re") return RepresentationKind::re();
  throw Error(ErrorKind::InvalidArgument, "--rep must be rs or re");
}

FamilySpec parse_family(const RunConfig& c) {
  const Family f = family_from_string(c.family);
  if (f == Family::Deterministic) throw Error(ErrorKind::UnsupportedModel, "deterministic models are not fitted");
  if (c.dim < 1) throw Error(ErrorKind::InvalidArgument, "--dim must be >= 1");
  return {f, c.dim};
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw Error(ErrorKind::InvalidArgument, std::string(flag) + " is required");
}

std::vector<AnyRanking> load_rankings(const RunConfig& c) {
  require(c.data_path, "--data");
  const auto d = load_dataset(c.data_path, c.n);
  spdlog::info("loaded {} ballots over {} items from {}", d.total_count(), d.universe.n, c.data_path);
  return d.expanded();
}

void emit(const RunConfig& c, const std::string& text) {
  if (c.out_path.empty())
    std::cout << text;
  else
    write_file_atomic(c.out_path, text);
}

bool wants_csv(const std::string& path) { return path.size() >= 4 && path.ends_with(".csv"); }

int run_fit(const RunConfig& c) {
  const auto spec = parse_family(c);
  const auto rankings = load_rankings(c);
  const ChoiceModel m = fit_rankings(spec, parse_rep(c.rep), rankings, c.adam);
  json j = model_to_json(m);
  j["config"] = config_json(c);
  emit(c, j.dump(2) + "\n");
  return 0;
}

int run_eval(const RunConfig& c) {
  require(c.model_path, "--model");
  const ChoiceModel m = load_model(c.model_path);
  const auto rankings = load_rankings(c);
  const EvalReport r = evaluate(m, parse_rep(c.rep), rankings);
  if (wants_csv(c.out_path)) {
    emit(c, report_to_csv(r));
  } else {
    json j = report_to_json(r);
    j["config"] = config_json(c);
    emit(c, j.dump(2) + "\n");
  }
  return 0;
}

CrossValidationReport run_cv(const RunConfig& c) {
  const auto spec = parse_family(c);
  const auto rankings = load_rankings(c);
  const int threads = c.threads > 0 ? c.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return cross_validate(spec, parse_rep(c.rep), rankings, c.folds, c.adam, threads);
}

int run_xval(const RunConfig& c) {
  const auto cv = run_cv(c);
  json folds = json::array();
  for (const auto& f : cv.folds) folds.push_back(report_to_json(f));
  json j{{"config", config_json(c)}, {"aggregate", report_to_json(cv.aggregate)}, {"folds", std::move(folds)}};
  emit(c, j.dump(2) + "\n");
  return 0;
}

int run_positions(const RunConfig& c) {
  if (!c.model_path.empty()) {
    const ChoiceModel m = load_model(c.model_path);
    emit(c, report_to_csv(evaluate(m, parse_rep(c.rep), load_rankings(c))));
  } else {
    emit(c, report_to_csv(run_cv(c).aggregate));
  }
  return 0;
}

int run_sample(const RunConfig& c) {
  require(c.model_path, "--model");
  if (c.count < 0) throw Error(ErrorKind::InvalidArgument, "--count must be >= 0");
  const ChoiceModel m = load_model(c.model_path);
  if (c.topk < 0 || c.topk > m.n()) throw Error(ErrorKind::InvalidArgument, "--topk must be in [0, n]");
  RankingDataset d;
  d.universe = Universe(m.n());
  Rng rng(c.adam.seed);
  for (std::int64_t s = 0; s < c.count; ++s) d.rankings.emplace_back(sample_ranking(m, m.n(), rng, c.topk), 1);
  const bool preflib = c.out_path.ends_with(".soc") || c.out_path.ends_with(".soi");
  emit(c, preflib ? write_preflib(d) : write_csv(d));
  return 0;
}

int run_verify(const RunConfig& c) {
  SuiteOptions opts;
  opts.seed = c.adam.seed;
  opts.trials = 0;
  if (c.n > 0) opts.sizes = {c.n};
  const std::vector<std::string> names{c.suite};
  const auto results = run_suite(names, opts);
  std::string lines;
  bool all_pass = true;
  for (const auto& r : results) {
    json j{{"name", r.name},
           {"n", r.n},
           {"max_abs_residual", r.max_abs_residual},
           {"tolerance", r.tolerance},
           {"pass", r.pass},
           {"trials", r.trials},
           {"expects_violation", r.expects_violation}};
    if (!r.detail.empty()) j["detail"] = r.detail;
    lines += j.dump() + "\n";
    all_pass = all_pass && r.pass;
  }
  std::cout << lines;
  if (!c.out_path.empty()) write_file_atomic(c.out_path, lines);
  return all_pass ? 0 : 1;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("chooserank");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("CHOOSERANK_LOG")) spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  RunConfig c;
  CLI::App app{"Rankings as sequences of discrete choices"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", c.adam.seed, "Random seed");
    sub->add_option("--out", c.out_path, "Output path (stdout if omitted)");
  };
  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--data", c.data_path, "Preflib .soc/.soi or .csv file");
    sub->add_option("--n", c.n, "Universe size for .csv data");
    sub->add_option("--rep", c.rep, "Representation: rs or re");
  };
  auto add_training = [&](CLI::App* sub) {
    sub->add_option("--family", c.family, "mnl, cdm, pcmc, mallows or uniform");
    sub->add_option("--dim", c.dim, "CDM rank");
    sub->add_option("--epochs", c.adam.epochs, "Training epochs");
    sub->add_option("--lr", c.adam.learning_rate, "Adam learning rate");
    sub->add_option("--batch", c.adam.batch_size, "Mini-batch size");
  };
  auto add_cv = [&](CLI::App* sub) {
    sub->add_option("--folds", c.folds, "Cross-validation folds");
    sub->add_option("--threads", c.threads, "Worker threads (default: logical cores)");
  };

  auto* fit = app.add_subcommand("fit", "Fit a model and write it as JSON");
  add_common(fit), add_data(fit), add_training(fit);
  auto* eval = app.add_subcommand("eval", "Score a saved model on rankings");
  add_common(eval), add_data(eval);
  eval->add_option("--model", c.model_path, "Model JSON");
  auto* xval = app.add_subcommand("xval", "k-fold cross-validation");
  add_common(xval), add_data(xval), add_training(xval), add_cv(xval);
  auto* positions = app.add_subcommand("positions", "Per-position log-likelihood curve (CSV)");
  add_common(positions), add_data(positions), add_training(positions), add_cv(positions);
  positions->add_option("--model", c.model_path, "Score this model instead of cross-validating");
  auto* sample = app.add_subcommand("sample", "Draw rankings from a saved model");
  add_common(sample);
  sample->add_option("--model", c.model_path, "Model JSON");
  sample->add_option("--count", c.count, "Number of rankings");
  sample->add_option("--topk", c.topk, "Prefix length (0 = full rankings)");
  auto* verify = app.add_subcommand("verify", "Run brute-force checks; one JSON line per result");
  add_common(verify);
  verify->add_option("--suite", c.suite, "Suite name or 'all'");
  verify->add_option("--n", c.n, "Restrict to this universe size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: InvalidArgument: %s\n", e.what());
    return 2;
  }

  try {
    c.command = app.get_subcommands().front()->get_name();
    c.adam.validate();
    if (c.command == "fit") return run_fit(c);
    if (c.command == "eval") return run_eval(c);
    if (c.command == "xval") return run_xval(c);
    if (c.command == "positions") return run_positions(c);
    if (c.command == "sample") return run_sample(c);
    return run_verify(c);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", std::string(to_string(e.kind())).c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: Internal: %s\n", e.what());
    return 3;
  }
}
