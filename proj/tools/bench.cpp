#include "cli.hpp"

#include "das/io.hpp"
#include "das/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace das::cli {

using nlohmann::json;

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  const Eigen::Map<const Eigen::VectorXd> v(values.data(), static_cast<Index>(values.size()));
  s.mean = stats::mean(v);
  s.std = values.size() > 1 ? std::sqrt(stats::variance(v)) : 0.0;
  return s;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("log-log fit needs at least two points");
  const auto m = static_cast<Index>(x.size());
  Eigen::VectorXd lx(m), ly(m);
  for (Index i = 0; i < m; ++i) {
    if (!(x[static_cast<std::size_t>(i)] > 0.0 && y[static_cast<std::size_t>(i)] > 0.0))
      throw ValidationError("log-log fit needs positive values");
    lx[i] = std::log(x[static_cast<std::size_t>(i)]);
    ly[i] = std::log(y[static_cast<std::size_t>(i)]);
  }
  lx.array() -= lx.mean();
  ly.array() -= ly.mean();
  const double sxx = lx.squaredNorm();
  if (!(sxx > 0.0)) throw ValidationError("log-log fit needs two distinct x values");
  return lx.dot(ly) / sxx;
}

BenchRow run_cell(const RunConfig& cfg, Index d, std::uint64_t seed) {
  BenchRow row;
  row.d = d;
  row.seed = seed;
  try {
    const Problem problem = make_problem(cfg, d, seed);
    const DiscoveryReport report = discover(problem.data, cfg.params, problem.scm.dag);
    row.timings = report.timings;
    row.degeneracy_flag = report.degeneracy_flag;
    if (report.candidates) row.candidates = report.candidates->edge_count();
    if (report.ok())
      row.metrics = report.metrics;
    else
      row.error = report.failure->stage + ": " + report.failure->message;
  } catch (const std::exception& e) {
    row.error = std::string("generation: ") + e.what();
  }
  return row;
}

BenchmarkTable aggregate(const RunConfig& cfg, std::vector<BenchRow> rows) {
  BenchmarkTable table;
  table.graph = to_string(cfg.graph);
  table.density = cfg.density;
  table.variant = cfg.params.skip_pruning ? "das-no-pruning" : "das";
  std::stable_sort(rows.begin(), rows.end(),
                   [](const BenchRow& a, const BenchRow& b) { return a.d != b.d ? a.d < b.d : a.seed < b.seed; });

  std::map<Index, std::vector<const BenchRow*>> by_d;
  for (const auto& r : rows) by_d[r.d].push_back(&r);

  std::vector<double> ds, sel;
  for (const auto& [d, group] : by_d) {
    BenchCell cell;
    cell.d = d;
    std::vector<double> shd, sid, prec, rec, t_ord, t_sel, t_prune;
    bool sid_complete = true;
    for (const BenchRow* r : group) {
      if (!r->metrics) {
        ++cell.failed;
        continue;
      }
      ++cell.completed;
      shd.push_back(static_cast<double>(r->metrics->shd));
      prec.push_back(r->metrics->precision);
      rec.push_back(r->metrics->recall);
      if (r->metrics->sid)
        sid.push_back(static_cast<double>(*r->metrics->sid));
      else
        sid_complete = false;
      t_ord.push_back(r->timings.ordering);
      t_sel.push_back(r->timings.selection);
      t_prune.push_back(r->timings.pruning);
      cell.max_candidates = std::max(cell.max_candidates, r->candidates);
    }
    cell.shd = summarize(shd);
    cell.precision = summarize(prec);
    cell.recall = summarize(rec);
    if (cell.completed > 0 && sid_complete) cell.sid = summarize(sid);
    cell.ordering_s = summarize(t_ord);
    cell.selection_s = summarize(t_sel);
    cell.pruning_s = summarize(t_prune);
    if (cell.completed > 0 && cell.selection_s.mean > 0.0) {
      ds.push_back(static_cast<double>(d));
      sel.push_back(cell.selection_s.mean);
    }
    table.cells.push_back(cell);
  }
  if (ds.size() >= 2) table.selection_exponent = loglog_slope(ds, sel);
  table.rows = std::move(rows);
  return table;
}

BenchmarkTable run_bench(const RunConfig& cfg) {
  cfg.validate();
  const std::vector<Index> d_list = cfg.d_list.empty() ? std::vector<Index>{cfg.d} : cfg.d_list;
  std::vector<std::pair<Index, std::uint64_t>> jobs;
  for (Index d : d_list)
    for (auto seed : cfg.seeds) jobs.emplace_back(d, seed);

  std::vector<BenchRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) rows[i] = run_cell(cfg, jobs[i].first, jobs[i].second);
  };
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return aggregate(cfg, std::move(rows));
}

namespace {

json summary_json(const Summary& s) { return json{{"mean", s.mean}, {"std", s.std}}; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

json bench_to_json(const BenchmarkTable& table, const RunConfig& cfg) {
  json cells = json::array();
  for (const auto& c : table.cells)
    cells.push_back({{"d", c.d},
                     {"completed", c.completed},
                     {"failed", c.failed},
                     {"shd", summary_json(c.shd)},
                     {"sid", c.sid ? summary_json(*c.sid) : json(nullptr)},
                     {"precision", summary_json(c.precision)},
                     {"recall", summary_json(c.recall)},
                     {"ordering_s", summary_json(c.ordering_s)},
                     {"selection_s", summary_json(c.selection_s)},
                     {"pruning_s", summary_json(c.pruning_s)},
                     {"max_candidates", c.max_candidates},
                     {"candidate_budget", cfg.params.k * c.d}});
  json rows = json::array();
  for (const auto& r : table.rows)
    rows.push_back({{"d", r.d},
                    {"seed", r.seed},
                    {"metrics", r.metrics ? metrics_to_json(*r.metrics) : json(nullptr)},
                    {"candidates", r.candidates},
                    {"degeneracy_flag", r.degeneracy_flag},
                    {"error", r.error.empty() ? json(nullptr) : json(r.error)},
                    {"ordering_s", r.timings.ordering},
                    {"selection_s", r.timings.selection},
                    {"pruning_s", r.timings.pruning}});
  return json{{"config", to_json(cfg)},
              {"graph", table.graph},
              {"density", table.density},
              {"variant", table.variant},
              {"cells", cells},
              {"rows", rows},
              {"selection_exponent", table.selection_exponent ? json(*table.selection_exponent) : json(nullptr)}};
}

void write_bench(const fs::path& prefix, const BenchmarkTable& table, const RunConfig& cfg) {
  const fs::path dir = prefix.parent_path();
  if (!dir.empty()) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(dir.string() + ": " + ec.message());
  }
  auto open = [](const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    return out;
  };

  const fs::path cells_path = fs::path(prefix.string() + ".csv");
  auto cells = open(cells_path);
  cells << "graph,density,variant,d,seeds,failed,shd_mean,shd_std,sid_mean,sid_std,precision_mean,precision_std,"
           "recall_mean,recall_std,ordering_s,selection_s,pruning_s,max_candidates\n";
  for (const auto& c : table.cells) {
    cells << table.graph << ',' << table.density << ',' << table.variant << ',' << c.d << ',' << c.completed << ','
          << c.failed << ',' << fmt(c.shd.mean) << ',' << fmt(c.shd.std) << ',';
    if (c.sid)
      cells << fmt(c.sid->mean) << ',' << fmt(c.sid->std) << ',';
    else
      cells << "NA,NA,";
    cells << fmt(c.precision.mean) << ',' << fmt(c.precision.std) << ',' << fmt(c.recall.mean) << ','
          << fmt(c.recall.std) << ',' << fmt(c.ordering_s.mean) << ',' << fmt(c.selection_s.mean) << ','
          << fmt(c.pruning_s.mean) << ',' << c.max_candidates << '\n';
  }
  if (!cells) throw IoError(cells_path.string() + ": write failed");

  const fs::path rows_path = fs::path(prefix.string() + "_seeds.csv");
  auto rows = open(rows_path);
  rows << "d,seed,shd,sid,precision,recall,candidates,ordering_s,selection_s,pruning_s,error\n";
  for (const auto& r : table.rows) {
    rows << r.d << ',' << r.seed << ',';
    if (r.metrics)
      rows << r.metrics->shd << ',' << (r.metrics->sid ? std::to_string(*r.metrics->sid) : "NA") << ','
           << fmt(r.metrics->precision) << ',' << fmt(r.metrics->recall) << ',';
    else
      rows << "NA,NA,NA,NA,";
    std::string error = r.error;
    std::replace(error.begin(), error.end(), ',', ';');
    rows << r.candidates << ',' << fmt(r.timings.ordering) << ',' << fmt(r.timings.selection) << ','
         << fmt(r.timings.pruning) << ',' << error << '\n';
  }
  if (!rows) throw IoError(rows_path.string() + ": write failed");

  io::write_json(fs::path(prefix.string() + ".json"), bench_to_json(table, cfg));
}

}  // namespace das::cli
