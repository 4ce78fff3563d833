#include "pokm/cli.hpp"

#include "pokm/calibration.hpp"
#include "pokm/datagen.hpp"
#include "pokm/engine.hpp"
#include "pokm/graph.hpp"
#include "pokm/model_io.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"

namespace pokm::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ClusterOptions {
  std::string input;
  bool header = false;
  std::string label_column;
  bool standardize = false;
  Index k = 8;
  std::optional<double> m;
  std::optional<double> overlap;
  double gamma = 0.1;
  int restarts = 100;
  InitMethod init = InitMethod::RandomPoints;
  int max_iterations = 500;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out;
};

struct GenerateOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct CalibrateOptions {
  std::optional<double> m;
  std::optional<double> overlap;
};

const std::map<std::string, InitMethod> kInitNames = {{"random-points", InitMethod::RandomPoints},
                                                      {"greedy-spread", InitMethod::GreedySpread}};

std::string init_name(InitMethod m) { return m == InitMethod::GreedySpread ? "greedy-spread" : "random-points"; }

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write '" + path.string() + "'");
  f << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

fs::path resolve_out(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  throw UsageError(std::string("--out is required when ") + kOutDirEnv + " is not set");
}

OverlapSpec resolve_overlap(const std::optional<double>& m, const std::optional<double>& overlap) {
  if (m && overlap) throw UsageError("--m and --overlap are mutually exclusive");
  try {
    if (m) return OverlapSpec::from_m(*m);
    return OverlapSpec::from_overlap(overlap.value_or(1.0 / 3.0));
  } catch (const std::domain_error& e) {
    throw UsageError(std::string(m ? "--m: " : "--overlap: ") + e.what());
  }
}

int cmd_cluster(const ClusterOptions& opt, std::ostream& out) {
  const auto started = std::chrono::steady_clock::now();
  const OverlapSpec overlap = resolve_overlap(opt.m, opt.overlap);
  if (opt.k < 1) throw UsageError("--k must be at least 1");
  if (!(opt.gamma >= 0.0 && opt.gamma <= 1.0)) throw UsageError("--gamma must lie in [0, 1]");
  if (opt.restarts < 1) throw UsageError("--restarts must be at least 1");
  if (opt.max_iterations < 1) throw UsageError("--max-iter must be at least 1");
  const fs::path out_dir = resolve_out(opt.out);

  const std::optional<std::string> label =
      opt.label_column.empty() ? std::nullopt : std::optional<std::string>(opt.label_column);
  Dataset<double> data = load_csv(opt.input, opt.header, label);
  if (opt.standardize) {
    if (data.size() < 2) throw DataError("--standardize needs at least two rows");
    data = standardize(data);
  }
  if (opt.k > data.size())
    throw DataError("--k " + std::to_string(opt.k) + " exceeds the number of rows " + std::to_string(data.size()));

  FitConfig config;
  config.k = opt.k;
  config.m = overlap.m;
  config.init = opt.init;
  config.restarts = opt.restarts;
  config.max_iterations = opt.max_iterations;
  config.seed = opt.seed;
  config.threads = opt.threads;
  const auto result = fit_restarts(data, config);
  const auto& model = result.best;
  const auto graph = extract_graph(model, opt.gamma);

  nlohmann::ordered_json report;
  report["schema"] = "pokm.report";
  report["version"] = 1;
  report["config"] = {{"input", opt.input},
                      {"header", opt.header},
                      {"label_column", opt.label_column},
                      {"standardize", opt.standardize},
                      {"k", opt.k},
                      {"m", overlap.m},
                      {"r_overlap", overlap.r_overlap},
                      {"gamma", opt.gamma},
                      {"restarts", opt.restarts},
                      {"init", init_name(opt.init)},
                      {"max_iterations", opt.max_iterations},
                      {"seed", opt.seed}};
  report["rows"] = data.size();
  report["dim"] = data.dim();
  report["restart_objectives"] = result.objectives;
  report["winning_restart"] = result.best_restart;
  report["objective"] = model.objective;
  report["iterations"] = model.iterations;
  report["converged"] = model.converged;
  report["cluster_sizes"] = cluster_sizes(model.assignments, model.k());
  report["overlap_counts"] = nlohmann::ordered_json::array();
  for (const auto& [pair, count] : count_overlaps(model))
    report["overlap_counts"].push_back({{"i", pair.first}, {"j", pair.second}, {"count", count}});
  report["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : graph.edges)
    report["edges"].push_back({{"i", e.i}, {"j", e.j}, {"overlap_count", e.overlap_count}, {"ratio", graph.ratio(e)}});
  // Run-to-run varying values live only under "timing".
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
  report["timing"] = {{"wall_seconds", elapsed.count()}};

  fs::create_directories(out_dir);
  write_file(out_dir / "model.json", model_to_json(model, data.labels()));
  write_file(out_dir / "graph.json", to_json(graph));
  write_file(out_dir / "graph.dot", to_dot(graph));
  write_file(out_dir / "report.json", report.dump(2) + "\n");

  out << "k=" << model.k() << " m=" << std::setprecision(10) << overlap.m << " objective=" << model.objective
      << " restart=" << result.best_restart << " edges=" << graph.edges.size() << "\n";
  out << "wrote " << (out_dir / "model.json").string() << ", graph.json, graph.dot, report.json\n";
  return kOk;
}

int cmd_generate(const GenerateOptions& opt, std::ostream& out) {
  const fs::path out_dir = resolve_out(opt.out);
  const std::string text = read_file(opt.config);
  ScenarioSpec spec;
  ScenarioTruth truth;
  try {
    spec = parse_scenario(text);
    if (opt.seed) spec.seed = *opt.seed;
    truth = generate_scenario(spec);
  } catch (const DataError& e) {
    throw UsageError(std::string("scenario '") + opt.config + "': " + e.what());
  }

  nlohmann::ordered_json t;
  t["seed"] = spec.seed;
  t["rows"] = truth.dataset.size();
  t["true_bridges"] = nlohmann::ordered_json::array();
  for (const auto& [a, b] : truth.true_bridges) t["true_bridges"].push_back({a, b});
  t["source"] = truth.source;

  fs::create_directories(out_dir);
  write_csv(out_dir / "data.csv", truth.dataset);
  write_file(out_dir / "truth.json", t.dump(2) + "\n");
  out << "wrote " << truth.dataset.size() << " rows to " << (out_dir / "data.csv").string() << "\n";
  return kOk;
}

int cmd_calibrate(const CalibrateOptions& opt, std::ostream& out) {
  if (!opt.m && !opt.overlap) throw UsageError("one of --m or --overlap is required");
  const OverlapSpec spec = resolve_overlap(opt.m, opt.overlap);
  const IntervalGeometry g = interval_geometry(spec.m, 1.0);
  out << std::setprecision(12);
  out << "m          " << spec.m << "\n";
  out << "r_overlap  " << spec.r_overlap << "\n";
  out << "unit interval between two adjacent means:\n";
  out << "  exclusive (each side)  " << g.l_exclusive << "\n";
  out << "  overlap                " << g.l_overlap << "\n";
  out << "  total                  " << g.l_total << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pairwise overlapping k-means with cluster-relation graphs", "pokm"};
  app.require_subcommand(1);

  ClusterOptions copt;
  auto* cluster = app.add_subcommand("cluster", "Fit a model to a CSV matrix and extract the cluster graph");
  cluster->add_option("--input", copt.input, "CSV file, one point per row")->required();
  cluster->add_flag("--header", copt.header, "First line holds column names");
  cluster->add_option("--label-column", copt.label_column, "Header column holding row labels");
  cluster->add_flag("--standardize", copt.standardize, "Scale columns to zero mean and unit variance");
  cluster->add_option("--k", copt.k, "Number of clusters")->capture_default_str();
  auto* m_flag = cluster->add_option("--m", copt.m, "Overlap exponent m >= 1");
  auto* r_flag = cluster->add_option("--overlap", copt.overlap, "Overlap level in [0, 1) (default 1/3)");
  m_flag->excludes(r_flag);
  cluster->add_option("--gamma", copt.gamma, "Edge threshold in [0, 1]")->capture_default_str();
  cluster->add_option("--restarts", copt.restarts, "Independent restarts")->capture_default_str();
  cluster->add_option("--init", copt.init, "random-points or greedy-spread")
      ->transform(CLI::CheckedTransformer(kInitNames, CLI::ignore_case));
  cluster->add_option("--max-iter", copt.max_iterations, "Iteration cap per run")->capture_default_str();
  cluster->add_option("--seed", copt.seed, "Base seed")->capture_default_str();
  cluster->add_option("--threads", copt.threads, "Worker threads for restarts (0 = all cores)");
  cluster->add_option("--out", copt.out, std::string("Output directory (default $") + kOutDirEnv + ")");

  GenerateOptions gopt;
  auto* generate = app.add_subcommand("generate", "Write a synthetic blob-and-bridge dataset");
  generate->add_option("--config", gopt.config, "Scenario JSON")->required();
  generate->add_option("--seed", gopt.seed, "Override the scenario seed");
  generate->add_option("--out", gopt.out, std::string("Output directory (default $") + kOutDirEnv + ")");

  CalibrateOptions kopt;
  auto* calibrate = app.add_subcommand("calibrate", "Convert between m and the overlap level");
  auto* km = calibrate->add_option("--m", kopt.m, "Overlap exponent m >= 1");
  auto* kr = calibrate->add_option("--overlap", kopt.overlap, "Overlap level in [0, 1)");
  km->excludes(kr);

  std::vector<std::string> argv_store{"pokm"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (cluster->parsed()) return cmd_cluster(copt, out);
    if (generate->parsed()) return cmd_generate(gopt, out);
    return cmd_calibrate(kopt, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace pokm::cli
