#include "cli.hpp"

#include <cmath>

namespace das::cli {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

json edge_json(Index from, Index to, const std::vector<std::string>& names) {
  return json{{"from", from},
              {"to", to},
              {"from_name", names[static_cast<std::size_t>(from)]},
              {"to_name", names[static_cast<std::size_t>(to)]}};
}

}  // namespace

json metrics_to_json(const GraphMetrics& m) {
  return json{{"shd", m.shd},
              {"sid", m.sid ? json(*m.sid) : json(nullptr)},
              {"precision", m.precision},
              {"recall", m.recall},
              {"true_positives", m.true_positives},
              {"false_positives", m.false_positives},
              {"false_negatives", m.false_negatives},
              {"reversed", m.reversed}};
}

json report_to_json(const DiscoveryReport& report, const Dataset& data, const RunConfig& cfg) {
  const auto& names = data.names;
  json j;
  j["config"] = to_json(cfg);
  j["data"] = {{"n", data.n()},
               {"d", data.d()},
               {"names", names},
               {"seed", data.meta.seed},
               {"generator", data.meta.generator},
               {"standardized", cfg.params.standardize || data.meta.standardized}};

  if (report.ordering) {
    const auto& o = *report.ordering;
    json vars = json::array();
    for (const auto& v : o.diag_variances) vars.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    j["ordering"] = {{"order", o.ordering.nodes()},
                     {"removal", o.removal},
                     {"degeneracy_ratio", number_or_null(o.degeneracy_ratio)},
                     {"degeneracy_flag", report.degeneracy_flag},
                     {"diag_variances", vars}};
  }

  if (report.candidates) {
    const auto& c = *report.candidates;
    json edges = json::array();
    for (Index from = 0; from < data.d(); ++from)
      for (Index to = 0; to < data.d(); ++to) {
        if (!c.adjacency(from, to)) continue;
        json e = edge_json(from, to, names);
        e["p_value"] = number_or_null(c.pvalues(from, to));
        e["mean_abs"] = number_or_null(c.mean_abs(to, from));
        edges.push_back(std::move(e));
      }
    j["candidates"] = {{"count", c.edge_count()},
                       {"tests", c.tests},
                       {"zero_variance_tests", c.zero_variance_tests},
                       {"untested_admissions", c.untested_admissions},
                       {"reference", c.reference},
                       {"edges", edges}};
  }

  if (report.pruned) {
    json tested = json::array();
    const auto& pv = report.pruned->pvalues;
    for (Index from = 0; from < data.d(); ++from)
      for (Index to = 0; to < data.d(); ++to) {
        if (std::isnan(pv(from, to))) continue;
        json e = edge_json(from, to, names);
        e["p_value"] = pv(from, to);
        e["kept"] = report.pruned->dag.has_edge(from, to);
        tested.push_back(std::move(e));
      }
    j["pruning"] = {{"tests", tested}};
  }

  if (report.final_dag) {
    json edges = json::array();
    for (const auto& [from, to] : report.final_dag->edges()) edges.push_back(edge_json(from, to, names));
    j["final"] = {{"edge_count", report.final_dag->edge_count()}, {"edges", edges}};
  }

  j["metrics"] = report.metrics ? metrics_to_json(*report.metrics) : json(nullptr);

  json warnings = report.warnings;
  warnings.push_back("no multiple-testing correction is applied to the per-node selection tests");
  j["warnings"] = warnings;

  if (report.failure)
    j["failure"] = {{"stage", report.failure->stage},
                    {"kind", kind_name(report.failure->kind)},
                    {"message", report.failure->message}};
  else
    j["failure"] = nullptr;

  j["timings"] = {{"ordering_s", report.timings.ordering},
                  {"selection_s", report.timings.selection},
                  {"pruning_s", report.timings.pruning}};
  return j;
}

}  // namespace das::cli
