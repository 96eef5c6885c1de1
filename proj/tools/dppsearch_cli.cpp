// dppsearch: draw hyperparameter configurations, score point sets, and run
// the spread/distance/optimization benchmarks.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or input error,
// 3 unsupported space/method combination. Data goes to stdout (or --out),
// diagnostics to stderr.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dppsearch/dppsearch.hpp"

namespace {

namespace fs = std::filesystem;
using namespace dppsearch;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitUnsupported = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& data) {
  if (path.empty() || path == "-") {
    std::cout << data << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << data;
}

struct SampleArgs {
  std::string space;
  long long k = 0;
  std::string method;
  std::uint64_t seed = 0;
  std::optional<double> sigma;
  std::optional<std::size_t> steps;
  std::size_t pool = 1000;
  bool rotate = true;
  std::string out;
};

int cmd_sample(const SampleArgs& a) {
  if (a.k < 1) throw InvalidArgument("--k must be at least 1");
  if (!is_sampler_name(a.method))
    throw InvalidArgument("unknown method '" + a.method + "' (valid: " + sampler_name_list() +
                          ")");
  const SearchSpace space = parse_space(read_file(a.space));
  const auto k = static_cast<std::size_t>(a.k);

  SamplerOptions opt;
  opt.seed = a.seed;
  opt.sigma = a.sigma;
  opt.steps = a.steps;
  opt.pool = a.pool;
  opt.rotate = a.rotate;
  if (opt.pool == 0) throw InvalidArgument("--pool must be at least 1");
  if (opt.steps && *opt.steps == 0) throw InvalidArgument("--steps must be at least 1");

  const SampleSet s = draw(a.method, space, k, opt);

  nlohmann::ordered_json meta;
  const nlohmann::ordered_json null(nullptr);
  meta["method"] = a.method;
  meta["k"] = k;
  meta["seed"] = a.seed;
  const bool is_dpp = a.method == "kdpp-mcmc" || a.method == "kdpp-seq";
  meta["sigma"] = is_dpp ? nlohmann::ordered_json(opt.kernel(k).sigma) : null;
  meta["steps"] = a.method == "kdpp-mcmc"
                      ? nlohmann::ordered_json(opt.steps ? *opt.steps
                                                         : McmcSettings::default_steps(k))
                      : null;
  meta["pool"] = a.method == "kdpp-seq" ? nlohmann::ordered_json(opt.pool) : null;
  meta["rotate"] = a.method == "sobol" ? nlohmann::ordered_json(opt.rotate) : null;
  meta["diagnostics"] = s.diagnostics;
  meta["version"] = kVersion;

  std::ostringstream os;
  os << nlohmann::ordered_json{{"meta", meta}}.dump() << '\n';
  for (const auto& c : s.points) os << to_json(space, c).dump() << '\n';
  write_output(a.out, os.str());
  return 0;
}

struct MetricsArgs {
  std::string points;
  std::string out;
  double dispersion_resolution = 1.0 / 64.0;
  double discrepancy_resolution = 1.0 / 256.0;
};

PointSet read_points(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::vector<double>> pts;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path + ":" + std::to_string(lineno) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidArgument(where + e.what());
    }
    if (!j.is_array() || j.empty()) throw InvalidArgument(where + "expected a list of numbers");
    std::vector<double> p;
    for (const auto& x : j) {
      if (!x.is_number()) throw InvalidArgument(where + "expected a list of numbers");
      p.push_back(x.get<double>());
    }
    pts.push_back(std::move(p));
  }
  return PointSet(std::move(pts));
}

int cmd_metrics(const MetricsArgs& a) {
  const PointSet ps = read_points(a.points);
  const MetricReport r =
      compute_report(ps, {a.dispersion_resolution, a.discrepancy_resolution});
  write_output(a.out, to_json(r).dump(2) + "\n");
  return 0;
}

struct BenchArgs {
  std::string config;
  std::string out = ".";
};

int cmd_bench(const BenchArgs& a) {
  const BenchmarkConfig cfg = parse_benchmark_config(read_file(a.config));
  const auto results = run_benchmark(cfg);
  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  const std::string stem = artifact_stem(cfg);
  write_output((dir / (stem + ".csv")).string(), to_csv(results));
  write_output((dir / (stem + ".json")).string(), to_json(cfg, results).dump(2) + "\n");

  std::ostringstream os;
  os << "sampler,k,metric,n,mean,ci95\n";
  for (const auto& s : summarize(results)) {
    if (s.metric.rfind("best_found@", 0) == 0) continue;
    os << s.sampler << ',' << s.k << ',' << s.metric << ',' << s.n << ','
       << format_double(s.mean) << ',' << format_double(s.ci95) << '\n';
  }
  std::cout << os.str() << std::flush;
  std::cerr << "wrote " << (dir / (stem + ".csv")).string() << " and "
            << (dir / (stem + ".json")).string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diverse open-loop hyperparameter search with k-DPPs", "dppsearch"};
  app.set_version_flag("--version", std::string(dppsearch::kVersion));
  app.require_subcommand(1, 1);

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Draw k configurations from a space file");
  sample->add_option("--space", sa.space, "Space-config JSON file")->required();
  sample->add_option("--k", sa.k, "Number of configurations")->required();
  sample->add_option("--method", sa.method,
                     "uniform | grid | sobol | sobol-unrotated | kdpp-mcmc | kdpp-seq")
      ->required();
  sample->add_option("--seed", sa.seed, "Random seed");
  sample->add_option("--sigma", sa.sigma, "RBF bandwidth (default sqrt(2)/k)");
  sample->add_option("--steps", sa.steps, "MCMC steps (default max(500 k ln(k+1), 5000))");
  sample->add_option("--pool", sa.pool, "Candidate pool size for kdpp-seq");
  sample->add_option("--rotate", sa.rotate, "Cranley-Patterson rotation for sobol");
  sample->add_option("--out", sa.out, "Output file (default stdout)");

  MetricsArgs ma;
  auto* metrics = app.add_subcommand("metrics", "Spread metrics of a JSON-lines point file");
  metrics->add_option("--points", ma.points, "JSON lines, one [x1, ..., xd] per line")
      ->required();
  metrics->add_option("--out", ma.out, "Output file (default stdout)");
  metrics->add_option("--dispersion-resolution", ma.dispersion_resolution,
                      "Lattice spacing for d >= 3 dispersion");
  metrics->add_option("--discrepancy-resolution", ma.discrepancy_resolution,
                      "Lattice spacing for d >= 3 star discrepancy");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Run a benchmark described by a JSON config");
  bench->add_option("--config", ba.config, "Benchmark config JSON file")->required();
  bench->add_option("--out", ba.out, "Directory for the CSV/JSON artifacts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sample->parsed()) return cmd_sample(sa);
    if (metrics->parsed()) return cmd_metrics(ma);
    if (bench->parsed()) return cmd_bench(ba);
  } catch (const UnsupportedSpace& e) {
    std::cerr << "dppsearch: unsupported: " << e.what() << '\n';
    return kExitUnsupported;
  } catch (const SpaceError& e) {
    std::cerr << "dppsearch: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "dppsearch: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "dppsearch: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
