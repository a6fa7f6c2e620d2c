// srj: command-line front end.
//
//   srj levels [--greedy [--growth g]]
//   srj scheme <M> | --level L
//   srj solve --problem ADDR --controller NAME [--tol t] [--norm n] [--max-iters k]
//             [--thresholds file] [--seed s] [--trace out.csv]
//   srj bench <spec.json> [--jobs j]
//   srj collect [--sizes a,b,c] [--points n] [--trials t] [--seed s] [--out data.csv]
//   srj fit --data data.csv [--n-set n] [--clusters out.csv] [--out thresholds.txt]
//   srj export --problem ADDR --out prefix
//
// Exit codes: 0 ok / converged, 2 solve hit max-iters, 1 usage or IO error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "srj/address.hpp"
#include "srj/csv.hpp"
#include "srj/datacollect.hpp"
#include "srj/matrix_market.hpp"
#include "srj/schemes.hpp"
#include "srj/solver.hpp"

namespace {

using namespace srj;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("SRJ_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("SRJ_SEED is not an unsigned integer: '") + env + "'");
  }
  return 0;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

// ---------------------------------------------------------------------------

int cmd_levels(bool greedy, double growth) {
  const SchemeLevelTable table = greedy ? build_level_table(kMaxLevel, growth) : pinned_level_table();
  std::cout << csv::kSchemaLine << '\n' << "level,M,slope\n";
  for (const auto& e : table.levels) std::cout << e.level << ',' << e.M << ',' << csv::real(stiffness_slope(e.M)) << '\n';
  return 0;
}

int cmd_scheme(std::optional<int> m, std::optional<int> level) {
  if (m.has_value() == level.has_value()) throw UsageError("scheme: give exactly one of M or --level");
  SrjScheme s;
  if (level) {
    if (*level < 0 || *level > kMaxLevel) throw UsageError("scheme: level must be in 0.." + std::to_string(kMaxLevel));
    s = scheme_for_level(*level);
  } else {
    if (*m < 1 || *m > 10000) throw UsageError("scheme: M must be in 1..10000");
    s = generate_srj_scheme(*m);
  }
  std::cout << csv::kSchemaLine << '\n' << "# M=" << s.M << " lambda_max=" << csv::real(lambda_max(s.M)) << '\n';
  std::vector<std::size_t> position(s.order.size());
  for (std::size_t k = 0; k < s.order.size(); ++k) position[s.order[k]] = k;
  std::cout << "index,omega,order_position\n";
  for (std::size_t j = 0; j < s.omegas.size(); ++j) {
    std::cout << j << ',' << csv::real(s.omegas[j]) << ',' << position[j] << '\n';
  }
  return 0;
}

struct SolveArgs {
  std::string problem;
  std::string controller = "heuristic";
  std::optional<double> tol;
  std::optional<std::string> norm;
  std::size_t max_iters = 1'000'000;
  std::optional<std::string> thresholds;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> trace;
};

int cmd_solve(const SolveArgs& a) {
  const ProblemInstance p = make_problem(a.problem, resolve_seed(a.seed));
  HeuristicThresholds th;
  if (a.thresholds) {
    std::ifstream in(*a.thresholds);
    if (!in) throw std::runtime_error("cannot open '" + *a.thresholds + "'");
    const Thresholds t = read_thresholds(in);
    th = {t.t_hi, t.t_lo};
  }
  StoppingRule rule;
  rule.norm = a.norm ? parse_stopping_norm(*a.norm) : p.stopping_norm;
  rule.tolerance = a.tol.value_or(default_tolerance(rule.norm));
  rule.max_iterations = a.max_iters;
  const SolveReport r = solve(p, make_controller(a.controller, p, th), rule);
  write_report_csv(std::cout, r);
  if (a.trace) {
    auto out = open_out(*a.trace);
    write_trace_csv(out, r);
  }
  return r.converged ? 0 : 2;
}

// ---------------------------------------------------------------------------

struct BenchSpec {
  std::vector<std::string> problems;  // addresses
  std::vector<std::size_t> sizes;     // parallel to problems, 0 = use unknown count
  std::vector<std::string> controllers;
  std::optional<std::string> norm;
  std::optional<double> tol;
  std::size_t max_iters = 1'000'000;
  std::size_t repetitions = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
};

BenchSpec parse_bench_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("bench spec: " + std::string(e.what()));
  }
  BenchSpec s;
  try {
    if (j.contains("family")) {
      const auto family = j.at("family").get<std::string>();
      for (auto n : j.at("sizes").get<std::vector<long long>>()) {
        if (n <= 0) throw UsageError("bench spec: sizes must be positive");
        s.problems.push_back(family + ":" + std::to_string(n));
        s.sizes.push_back(static_cast<std::size_t>(n));
      }
    }
    if (j.contains("problems")) {
      for (const auto& addr : j.at("problems").get<std::vector<std::string>>()) {
        s.problems.push_back(addr);
        s.sizes.push_back(0);
      }
    }
    s.controllers = j.at("controllers").get<std::vector<std::string>>();
    if (j.contains("norm")) s.norm = j["norm"].get<std::string>();
    if (j.contains("tol")) s.tol = j["tol"].get<double>();
    if (j.contains("max_iters")) s.max_iters = j["max_iters"].get<std::size_t>();
    if (j.contains("repetitions")) s.repetitions = j["repetitions"].get<std::size_t>();
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("output_dir")) s.output_dir = j["output_dir"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("bench spec: " + std::string(e.what()));
  }
  if (s.problems.empty()) throw UsageError("bench spec: no problems (give family+sizes or problems)");
  if (s.controllers.empty()) throw UsageError("bench spec: at least one controller is required");
  if (s.repetitions == 0) throw UsageError("bench spec: repetitions must be positive");
  return s;
}

struct BenchRow {
  std::size_t problem_index = 0;
  std::size_t controller_index = 0;
  std::size_t rep = 0;
  std::size_t size = 0;
  std::string address;
  std::string controller;
  std::size_t iterations = 0;
  bool converged = false;
  double seconds = 0.0;
  std::string status;
};

int cmd_bench(const std::string& spec_path, unsigned jobs) {
  const BenchSpec spec = parse_bench_spec(spec_path);
  const std::uint64_t seed = resolve_seed(spec.seed);
  std::vector<BenchRow> rows;
  for (std::size_t p = 0; p < spec.problems.size(); ++p) {
    for (std::size_t c = 0; c < spec.controllers.size(); ++c) {
      for (std::size_t r = 0; r < spec.repetitions; ++r) {
        BenchRow row;
        row.problem_index = p;
        row.controller_index = c;
        row.rep = r;
        row.address = spec.problems[p];
        row.controller = spec.controllers[c];
        rows.push_back(row);
      }
    }
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < rows.size();) {
      BenchRow& row = rows[k];
      try {
        const ProblemInstance prob = make_problem(row.address, derive_seed(seed, row.problem_index, row.rep));
        row.size = spec.sizes[row.problem_index] ? spec.sizes[row.problem_index] : prob.size();
        StoppingRule rule;
        rule.norm = spec.norm ? parse_stopping_norm(*spec.norm) : prob.stopping_norm;
        rule.tolerance = spec.tol.value_or(default_tolerance(rule.norm));
        rule.max_iterations = spec.max_iters;
        const SolveReport r = solve(prob, make_controller(row.controller, prob), rule);
        row.iterations = r.total_iterations;
        row.converged = r.converged;
        row.seconds = r.wall_time;
        row.status = r.converged ? "ok" : "max_iters";
      } catch (const std::exception& e) {
        row.status = "error";
        std::cerr << "bench: " << row.address << " " << row.controller << " rep " << row.rep << ": " << e.what() << '\n';
      }
    }
  };
  const unsigned n_workers = std::max(1u, jobs);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return std::tie(a.problem_index, a.controller_index, a.rep) < std::tie(b.problem_index, b.controller_index, b.rep);
  });

  std::ostringstream out;
  out << csv::kSchemaLine << '\n' << "size,problem,controller,rep,iterations,converged,seconds,status\n";
  for (const auto& r : rows) {
    out << r.size << ',' << r.address << ',' << r.controller << ',' << r.rep << ',' << r.iterations << ','
        << (r.converged ? 1 : 0) << ',' << csv::real(r.seconds) << ',' << r.status << '\n';
  }
  if (spec.output_dir) {
    std::filesystem::create_directories(*spec.output_dir);
    auto f = open_out((std::filesystem::path(*spec.output_dir) / "bench.csv").string());
    f << out.str();
  } else {
    std::cout << out.str();
  }
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_collect(const std::vector<std::size_t>& sizes, std::size_t points, std::size_t trials,
                std::optional<std::uint64_t> seed, double tol, unsigned threads, const std::optional<std::string>& out) {
  CollectOptions o;
  if (!sizes.empty()) o.sizes = sizes;
  o.min_points = points;
  o.trials_per_size = trials;
  o.seed = resolve_seed(seed);
  o.target_tol = tol;
  o.threads = threads;
  const auto pts = collect(o);
  if (out) {
    auto f = open_out(*out);
    write_points_csv(f, pts);
  } else {
    write_points_csv(std::cout, pts);
  }
  return 0;
}

int cmd_fit(const std::string& data, std::size_t n_set, double confidence, const std::string& method,
            const std::optional<std::string>& clusters_out, const std::optional<std::string>& out) {
  std::vector<DataPoint> pts;
  if (data == "-") {
    pts = read_points_csv(std::cin);
  } else {
    std::ifstream in(data);
    if (!in) throw std::runtime_error("cannot open '" + data + "'");
    pts = read_points_csv(in);
  }
  if (pts.empty()) throw std::runtime_error("fit: no data points in '" + data + "'");
  const auto clusters = aggregate(std::move(pts), n_set, confidence);
  if (clusters_out) {
    auto f = open_out(*clusters_out);
    write_clusters_csv(f, clusters);
  }
  Thresholds t;
  if (method == "strict") {
    t = fit_thresholds(clusters);
  } else {
    std::size_t wrong = 0;
    t = fit_thresholds_min_error(clusters, &wrong);
    std::cerr << "fit: " << wrong << " conclusive clusters mislabeled by the fitted cuts\n";
  }
  if (out) {
    auto f = open_out(*out);
    write_thresholds(f, t);
  } else {
    write_thresholds(std::cout, t);
  }
  return 0;
}

int cmd_export(const std::string& address, std::optional<std::uint64_t> seed, const std::string& prefix) {
  const ProblemInstance p = make_problem(address, resolve_seed(seed));
  auto a = open_out(prefix + "_A.mtx");
  write_matrix_market(a, p.A);
  auto b = open_out(prefix + "_b.mtx");
  write_matrix_market_vector(b, p.b);
  auto x = open_out(prefix + "_x0.mtx");
  write_matrix_market_vector(x, p.x0);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scheduled relaxation Jacobi toolkit"};
  app.require_subcommand(1);

  auto* levels = app.add_subcommand("levels", "Print the scheme-level ladder");
  bool greedy = false;
  double growth = 1.5;
  levels->add_flag("--greedy", greedy, "Rebuild the ladder from the slope-growth rule");
  levels->add_option("--growth", growth, "Slope growth factor for --greedy");

  auto* scheme = app.add_subcommand("scheme", "Print relaxation factors and their application position");
  std::optional<int> scheme_m, scheme_level;
  scheme->add_option("M", scheme_m, "Scheme degree");
  scheme->add_option("--level", scheme_level, "Ladder level");

  auto* solve_cmd = app.add_subcommand("solve", "Solve one problem, report CSV on stdout");
  SolveArgs sa;
  solve_cmd->add_option("--problem", sa.problem, "Problem address")->required();
  solve_cmd->add_option("--controller", sa.controller, "Controller");
  solve_cmd->add_option("--tol", sa.tol, "Tolerance (default depends on norm)");
  solve_cmd->add_option("--norm", sa.norm, "absolute_l2 | relative_l2 | solution_diff_inf");
  solve_cmd->add_option("--max-iters", sa.max_iters, "Iteration cap");
  solve_cmd->add_option("--thresholds", sa.thresholds, "key=value file with t_hi and t_lo");
  solve_cmd->add_option("--seed", sa.seed, "Seed for random problems (default SRJ_SEED or 0)");
  solve_cmd->add_option("--trace", sa.trace, "Write per-iteration residuals here");

  auto* bench = app.add_subcommand("bench", "Run a JSON-described scaling study");
  std::string bench_spec;
  unsigned jobs = 1;
  bench->add_option("spec", bench_spec, "Spec file")->required();
  bench->add_option("--jobs", jobs, "Worker threads");

  auto* collect_cmd = app.add_subcommand("collect", "Collect random-action convergence data");
  std::vector<std::size_t> sizes;
  std::size_t points = 0, trials = 1;
  std::optional<std::uint64_t> collect_seed;
  double collect_tol = 1e-8;
  unsigned collect_threads = 1;
  std::optional<std::string> collect_out;
  collect_cmd->add_option("--sizes", sizes, "Problem sizes")->delimiter(',');
  collect_cmd->add_option("--points", points, "Minimum number of data points");
  collect_cmd->add_option("--trials", trials, "Minimum trials per size");
  collect_cmd->add_option("--seed", collect_seed, "Seed (default SRJ_SEED or 0)");
  collect_cmd->add_option("--tol", collect_tol, "Per-trial residual target");
  collect_cmd->add_option("--threads", collect_threads, "Worker threads");
  collect_cmd->add_option("--out", collect_out, "Output CSV (default stdout)");

  auto* fit = app.add_subcommand("fit", "Cluster data and fit the level thresholds");
  std::string fit_data = "-";
  std::size_t n_set = 10000;
  double confidence = 0.95;
  std::string method = "strict";
  std::optional<std::string> clusters_out, fit_out;
  fit->add_option("--data", fit_data, "Data CSV from collect ('-' for stdin)");
  fit->add_option("--n-set", n_set, "Points per cluster");
  fit->add_option("--confidence", confidence, "CI coverage");
  fit->add_option("--method", method, "strict | min-error")->check(CLI::IsMember({"strict", "min-error"}));
  fit->add_option("--clusters", clusters_out, "Write cluster summaries here");
  fit->add_option("--out", fit_out, "Thresholds file (default stdout)");

  auto* exp = app.add_subcommand("export", "Write a problem as Matrix Market files");
  std::string exp_problem, exp_prefix;
  std::optional<std::uint64_t> exp_seed;
  exp->add_option("--problem", exp_problem, "Problem address")->required();
  exp->add_option("--out", exp_prefix, "Output prefix")->required();
  exp->add_option("--seed", exp_seed, "Seed for random problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*levels) return cmd_levels(greedy, growth);
    if (*scheme) return cmd_scheme(scheme_m, scheme_level);
    if (*solve_cmd) return cmd_solve(sa);
    if (*bench) return cmd_bench(bench_spec, jobs);
    if (*collect_cmd) return cmd_collect(sizes, points, trials, collect_seed, collect_tol, collect_threads, collect_out);
    if (*fit) return cmd_fit(fit_data, n_set, confidence, method, clusters_out, fit_out);
    if (*exp) return cmd_export(exp_problem, exp_seed, exp_prefix);
  } catch (const std::exception& e) {
    std::cerr << "srj: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
