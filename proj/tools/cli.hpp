#pragma once

#include "das/edges.hpp"
#include "das/graph.hpp"
#include "das/synth.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace das::cli {

namespace fs = std::filesystem;

enum class GraphType { Er, Sf };

std::string to_string(GraphType g);
GraphType parse_graph_type(const std::string& name);

/// Everything a command needs; round-trips through JSON so every artifact can
/// embed the configuration that produced it.
struct RunConfig {
  GraphType graph = GraphType::Er;
  Index d = 10;
  /// Expected edges per node (ER) or attachments per new node (SF).
  Index density = 1;
  Index n = 1000;
  std::vector<std::uint64_t> seeds{0};
  /// Bench only; empty means {d}.
  std::vector<Index> d_list;
  ScmMode mode = ScmMode::Nonlinear;
  double sigma_lo = 0.4;
  double sigma_hi = 0.8;
  DiscoveryParams params;
  Index workers = 1;

  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j);

/// "0-9,12" -> {0, ..., 9, 12}.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);
std::vector<Index> parse_index_list(const std::string& text);

struct Problem {
  ScmSpec scm;
  Dataset data;
};

/// Graph, SCM and sample for one (d, seed); the same seed always yields the
/// same problem, whether produced by `generate` or inside `bench`.
Problem make_problem(const RunConfig& cfg, Index d, std::uint64_t seed);

/// JSON report. Wall-clock numbers live only under "timings", so two runs on
/// the same input differ nowhere else.
nlohmann::json report_to_json(const DiscoveryReport& report, const Dataset& data, const RunConfig& cfg);

nlohmann::json metrics_to_json(const GraphMetrics& m);

struct BenchRow {
  Index d = 0;
  std::uint64_t seed = 0;
  std::optional<GraphMetrics> metrics;
  StageTimings timings;
  Index candidates = 0;
  bool degeneracy_flag = false;
  std::string error;
};

struct Summary {
  double mean = 0.0;
  double std = 0.0;
};

struct BenchCell {
  Index d = 0;
  Index completed = 0;
  Index failed = 0;
  Summary shd, precision, recall;
  std::optional<Summary> sid;
  Summary ordering_s, selection_s, pruning_s;
  Index max_candidates = 0;
};

struct BenchmarkTable {
  std::string graph;
  Index density = 0;
  std::string variant;
  std::vector<BenchRow> rows;
  std::vector<BenchCell> cells;
  /// Log-log slope of mean selection time against d; needs two distinct d.
  std::optional<double> selection_exponent;
};

/// Mean and sample standard deviation (0 for a single value).
Summary summarize(const std::vector<double>& values);

/// Least-squares slope of log(y) on log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

BenchRow run_cell(const RunConfig& cfg, Index d, std::uint64_t seed);
BenchmarkTable aggregate(const RunConfig& cfg, std::vector<BenchRow> rows);
BenchmarkTable run_bench(const RunConfig& cfg);

nlohmann::json bench_to_json(const BenchmarkTable& table, const RunConfig& cfg);
/// Writes <prefix>.csv (one line per d), <prefix>_seeds.csv and <prefix>.json.
void write_bench(const fs::path& prefix, const BenchmarkTable& table, const RunConfig& cfg);

int exit_code(ErrorKind kind);

/// Entry point of the `das` executable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace das::cli
