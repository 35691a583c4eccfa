#include "cli.hpp"

#include "das/io.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iomanip>
#include <memory>
#include <ostream>

namespace das::cli {

using nlohmann::json;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return 1;
    case ErrorKind::Numerical: return 2;
    case ErrorKind::Io: return 3;
  }
  return 2;
}

namespace {

// Flags that override fields of a RunConfig loaded from --config (or the
// defaults). Only flags actually given on the command line are applied.
class ConfigFlags {
 public:
  explicit ConfigFlags(CLI::App* app, RunConfig base = {}) : app_(app), base_(std::move(base)) {
    app_->add_option("--config", config_path_, "JSON run config; flags override its fields");
  }

  template <typename T, typename Apply>
  CLI::Option* option(const std::string& name, T initial, const std::string& help, Apply apply) {
    auto value = std::make_shared<T>(initial);
    CLI::Option* opt = app_->add_option(name, *value, help)->capture_default_str();
    appliers_.push_back([value, opt, apply](RunConfig& cfg) {
      if (opt->count() > 0) apply(cfg, *value);
    });
    return opt;
  }

  template <typename Apply>
  CLI::Option* flag(const std::string& name, const std::string& help, Apply apply) {
    auto value = std::make_shared<bool>(false);
    CLI::Option* opt = app_->add_flag(name, *value, help);
    appliers_.push_back([value, opt, apply](RunConfig& cfg) {
      if (opt->count() > 0) apply(cfg, *value);
    });
    return opt;
  }

  RunConfig resolve() const {
    RunConfig cfg = config_path_.empty() ? base_ : config_from_json(io::read_json(config_path_));
    for (const auto& apply : appliers_) apply(cfg);
    cfg.validate();
    return cfg;
  }

 private:
  CLI::App* app_;
  RunConfig base_;
  std::string config_path_;
  std::vector<std::function<void(RunConfig&)>> appliers_;
};

void add_discovery_flags(ConfigFlags& flags) {
  const RunConfig def;
  flags.option("--k", def.params.k, "maximum tested candidate parents per node",
               [](RunConfig& c, Index v) { c.params.k = v; });
  flags.option("--alpha", def.params.alpha, "Welch test threshold (edge kept when p < alpha)",
               [](RunConfig& c, double v) { c.params.alpha = v; });
  flags.option("--prune-cutoff", def.params.prune_cutoff, "pruning keeps an edge when its p <= cutoff",
               [](RunConfig& c, double v) { c.params.prune_cutoff = v; });
  flags.option("--eta", def.params.stein.eta, "Stein ridge (n * eta on the kernel diagonal)",
               [](RunConfig& c, double v) { c.params.stein.eta = v; });
  flags.option("--degeneracy-threshold", def.params.degeneracy_threshold,
               "flag linear-looking data when the leaf variance ratio is below this",
               [](RunConfig& c, double v) { c.params.degeneracy_threshold = v; });
  flags.flag("--standardize", "scale every column to unit variance before discovery",
             [](RunConfig& c, bool v) { c.params.standardize = v; });
  flags.flag("--skip-pruning", "report the selected candidates without pruning",
             [](RunConfig& c, bool v) { c.params.skip_pruning = v; });
}

void add_generator_flags(ConfigFlags& flags) {
  const RunConfig def;
  flags.option("--graph", std::string("er"), "graph model: er or sf",
               [](RunConfig& c, const std::string& v) { c.graph = parse_graph_type(v); });
  flags.option("--density", def.density, "expected edges per node (er) or attachments per node (sf)",
               [](RunConfig& c, Index v) { c.density = v; });
  flags.option("--n", def.n, "samples per dataset", [](RunConfig& c, Index v) { c.n = v; });
  flags.option("--mode", std::string("nonlinear"), "structural functions: nonlinear or linear",
               [](RunConfig& c, const std::string& v) {
                 if (v == "nonlinear")
                   c.mode = ScmMode::Nonlinear;
                 else if (v == "linear")
                   c.mode = ScmMode::Linear;
                 else
                   throw ValidationError("unknown mode '" + v + "'");
               });
  flags.option("--sigma-lo", def.sigma_lo, "lower bound of the noise standard deviations",
               [](RunConfig& c, double v) { c.sigma_lo = v; });
  flags.option("--sigma-hi", def.sigma_hi, "upper bound of the noise standard deviations",
               [](RunConfig& c, double v) { c.sigma_hi = v; });
}

void make_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string() + ": " + ec.message());
}

int cmd_generate(const ConfigFlags& flags, const fs::path& out_dir, std::ostream& out) {
  const RunConfig cfg = flags.resolve();
  if (cfg.seeds.size() != 1) throw ValidationError("generate takes exactly one seed");
  const Problem problem = make_problem(cfg, cfg.d, cfg.seeds.front());

  make_output_dir(out_dir);
  io::write_dataset_csv(out_dir / "data.csv", problem.data);
  io::write_edge_list(out_dir / "truth.txt", problem.scm.dag);
  io::write_adjacency_csv(out_dir / "truth_adjacency.csv", problem.scm.dag);
  io::write_json(out_dir / "scm.json", io::scm_to_json(problem.scm));
  io::write_json(out_dir / "manifest.json",
                 {{"config", to_json(cfg)},
                  {"seed", cfg.seeds.front()},
                  {"generator", problem.data.meta.generator},
                  {"n", problem.data.n()},
                  {"d", problem.data.d()},
                  {"edges", problem.scm.dag.edge_count()},
                  {"files", {"data.csv", "truth.txt", "truth_adjacency.csv", "scm.json"}}});
  out << "wrote " << out_dir.string() << " (d=" << cfg.d << ", n=" << cfg.n
      << ", edges=" << problem.scm.dag.edge_count() << ")\n";
  return 0;
}

int cmd_discover(const ConfigFlags& flags, const fs::path& data_path, const fs::path& truth_path,
                 const fs::path& report_path, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = flags.resolve();
  const Dataset data = io::read_dataset_csv(data_path);
  std::optional<Dag> truth;
  if (!truth_path.empty()) truth = io::read_truth(truth_path, data.d(), data.names);

  const DiscoveryReport report = discover(data, cfg.params, truth);
  const json j = report_to_json(report, data, cfg);
  if (report_path.empty()) {
    out << j.dump(2) << '\n';
  } else {
    io::write_json(report_path, j);
    out << "edges " << (report.final_dag ? report.final_dag->edge_count() : 0);
    if (report.metrics) out << "  shd " << report.metrics->shd << "  sid "
                            << (report.metrics->sid ? std::to_string(*report.metrics->sid) : "NA")
                            << "  precision " << report.metrics->precision << "  recall " << report.metrics->recall;
    out << '\n';
  }
  if (!report.ok()) {
    err << "error in " << report.failure->stage << ": " << report.failure->message << '\n';
    return exit_code(report.failure->kind);
  }
  return 0;
}

int cmd_eval(const fs::path& truth_path, const fs::path& est_path, const fs::path& data_path, Index nodes,
             bool with_sid, std::ostream& out) {
  std::vector<std::string> names;
  if (!data_path.empty()) {
    const Dataset data = io::read_dataset_csv(data_path);
    names = data.names;
    if (nodes < 0) nodes = data.d();
  }
  const Dag truth = io::read_truth(truth_path, nodes, names);
  const Dag est = io::read_truth(est_path, truth.size(), names);
  const GraphMetrics m = evaluate(truth, est, with_sid && truth.size() <= kSidMaxNodes);
  out << metrics_to_json(m).dump(2) << '\n';
  return 0;
}

int cmd_bench(const ConfigFlags& flags, const fs::path& prefix, std::ostream& out) {
  const RunConfig cfg = flags.resolve();
  const BenchmarkTable table = run_bench(cfg);
  write_bench(prefix, table, cfg);

  out << std::fixed << std::setprecision(3);
  out << "d      seeds  SHD              SID               precision      recall         selection[s]\n";
  for (const auto& c : table.cells) {
    out << std::left << std::setw(7) << c.d << std::setw(7) << c.completed << std::setw(17)
        << (std::to_string(c.shd.mean).substr(0, 6) + " +- " + std::to_string(c.shd.std).substr(0, 5))
        << std::setw(18)
        << (c.sid ? std::to_string(c.sid->mean).substr(0, 7) + " +- " + std::to_string(c.sid->std).substr(0, 5)
                  : std::string("NA"))
        << std::setw(15) << c.precision.mean << std::setw(15) << c.recall.mean << c.selection_s.mean << '\n';
    if (c.failed > 0) out << "       (" << c.failed << " seeds failed)\n";
  }
  if (table.selection_exponent) out << "selection-time scaling exponent: " << *table.selection_exponent << '\n';
  return 0;
}

int cmd_ingest_check(const fs::path& data_path, const fs::path& truth_path, const std::string& format,
                     std::ostream& out) {
  const auto bundle = io::ingest_external(data_path, truth_path, io::parse_external_format(format));
  json edges = json::array();
  for (const auto& [from, to] : bundle.truth.edges())
    edges.push_back({bundle.data.names[static_cast<std::size_t>(from)], bundle.data.names[static_cast<std::size_t>(to)]});
  out << json{{"n", bundle.data.n()},
              {"d", bundle.data.d()},
              {"names", bundle.data.names},
              {"edge_count", bundle.truth.edge_count()},
              {"edges", edges}}
             .dump(2)
      << '\n';
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal discovery from the score Jacobian: ordering, DAS edge selection and additive pruning"};
  app.name("das");
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "sample a synthetic dataset with its ground truth");
  ConfigFlags gen_flags(gen);
  gen_flags.option("--d", RunConfig{}.d, "number of nodes", [](RunConfig& c, Index v) { c.d = v; });
  gen_flags.option("--seed", std::uint64_t{0}, "random seed", [](RunConfig& c, std::uint64_t v) { c.seeds = {v}; });
  add_generator_flags(gen_flags);
  std::string gen_out;
  gen->add_option("--out", gen_out, "output directory")->required();

  auto* disc = app.add_subcommand("discover", "run discovery on an observations CSV");
  ConfigFlags disc_flags(disc);
  add_discovery_flags(disc_flags);
  std::string disc_data, disc_truth, disc_out;
  disc->add_option("--data", disc_data, "observations CSV with a header row")->required();
  disc->add_option("--truth", disc_truth, "ground truth (edge list or adjacency CSV)");
  disc->add_option("--out", disc_out, "report path (JSON); stdout when omitted");

  auto* eval = app.add_subcommand("eval", "compare an estimated graph with the ground truth");
  std::string eval_truth, eval_est, eval_data;
  Index eval_nodes = -1;
  bool eval_no_sid = false;
  eval->add_option("--truth", eval_truth, "ground truth (edge list or adjacency CSV)")->required();
  eval->add_option("--est", eval_est, "estimated graph (edge list or adjacency CSV)")->required();
  eval->add_option("--data", eval_data, "observations CSV, used for column names and node count");
  eval->add_option("--nodes", eval_nodes, "node count for edge lists without a '# nodes' line");
  eval->add_flag("--no-sid", eval_no_sid, "skip the structural intervention distance");

  auto* bench = app.add_subcommand("bench", "multi-seed benchmark over a list of graph sizes");
  RunConfig bench_base;
  bench_base.seeds = parse_seed_list("0-9");
  ConfigFlags bench_flags(bench, bench_base);
  add_generator_flags(bench_flags);
  add_discovery_flags(bench_flags);
  bench_flags.option("--d-list", std::string("10"), "graph sizes, e.g. 10,20 or 25,50,100",
                     [](RunConfig& c, const std::string& v) { c.d_list = parse_index_list(v); });
  bench_flags.option("--seeds", std::string("0-9"), "seed list, e.g. 0-9 or 1,4,7",
                     [](RunConfig& c, const std::string& v) { c.seeds = parse_seed_list(v); });
  bench_flags.option("--workers", RunConfig{}.workers, "seeds run in parallel",
                     [](RunConfig& c, Index v) { c.workers = v; });
  std::string bench_out;
  bench->add_option("--out", bench_out, "output prefix; writes <prefix>.csv, <prefix>_seeds.csv, <prefix>.json")
      ->required();

  auto* ingest = app.add_subcommand("ingest-check", "load and validate an external dataset with its ground truth");
  std::string ingest_data, ingest_truth, ingest_format = "csv-header";
  ingest->add_option("--data", ingest_data, "observations file")->required();
  ingest->add_option("--truth", ingest_truth, "ground-truth network file")->required();
  ingest->add_option("--format", ingest_format, "csv-header or syntren-export")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) return cmd_generate(gen_flags, gen_out, out);
    if (*disc) return cmd_discover(disc_flags, disc_data, disc_truth, disc_out, out, err);
    if (*eval) return cmd_eval(eval_truth, eval_est, eval_data, eval_nodes, !eval_no_sid, out);
    if (*bench) return cmd_bench(bench_flags, bench_out, out);
    if (*ingest) return cmd_ingest_check(ingest_data, ingest_truth, ingest_format, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace das::cli
