#include "cli.hpp"

#include <charconv>
#include <set>

namespace das::cli {

using nlohmann::json;

std::string to_string(GraphType g) { return g == GraphType::Er ? "er" : "sf"; }

GraphType parse_graph_type(const std::string& name) {
  if (name == "er") return GraphType::Er;
  if (name == "sf") return GraphType::Sf;
  throw ValidationError("unknown graph type '" + name + "' (expected er or sf)");
}

void RunConfig::validate() const {
  if (d < 1) throw ValidationError("d must be >= 1");
  if (density < 0) throw ValidationError("density must be >= 0");
  if (graph == GraphType::Sf && d > 1 && (density < 1 || density >= d))
    throw ValidationError("scale-free graphs need 1 <= density < d");
  if (n < 2) throw InsufficientSamples("n must be >= 2");
  if (seeds.empty()) throw ValidationError("seed list is empty");
  for (Index v : d_list)
    if (v < 1) throw ValidationError("every d in the d-list must be >= 1");
  if (!(sigma_lo > 0.0) || sigma_hi < sigma_lo) throw ValidationError("sigma range must satisfy 0 < lo <= hi");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  params.validate();
}

json to_json(const RunConfig& cfg) {
  const auto& p = cfg.params;
  return json{
      {"graph", to_string(cfg.graph)},
      {"d", cfg.d},
      {"density", cfg.density},
      {"n", cfg.n},
      {"seeds", cfg.seeds},
      {"d_list", cfg.d_list},
      {"mode", cfg.mode == ScmMode::Linear ? "linear" : "nonlinear"},
      {"sigma_lo", cfg.sigma_lo},
      {"sigma_hi", cfg.sigma_hi},
      {"k", p.k},
      {"alpha", p.alpha},
      {"prune_cutoff", p.prune_cutoff},
      {"standardize", p.standardize},
      {"skip_pruning", p.skip_pruning},
      {"degeneracy_threshold", p.degeneracy_threshold},
      {"stein",
       {{"bandwidth", p.stein.bandwidth == SteinConfig::Bandwidth::Median ? "median" : "fixed"},
        {"fixed_bandwidth", p.stein.fixed_bandwidth},
        {"eta", p.stein.eta},
        {"chunk", p.stein.chunk}}},
      {"workers", cfg.workers},
  };
}

namespace {

template <typename T>
void take(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ValidationError("unknown config key '" + where + key + "'");
}

}  // namespace

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  reject_unknown(j,
                 {"graph", "d", "density", "n", "seeds", "d_list", "mode", "sigma_lo", "sigma_hi", "k", "alpha",
                  "prune_cutoff", "standardize", "skip_pruning", "degeneracy_threshold", "stein", "workers"},
                 "");
  RunConfig cfg;
  try {
    if (j.contains("graph")) cfg.graph = parse_graph_type(j.at("graph").get<std::string>());
    take(j, "d", cfg.d);
    take(j, "density", cfg.density);
    take(j, "n", cfg.n);
    take(j, "seeds", cfg.seeds);
    take(j, "d_list", cfg.d_list);
    if (j.contains("mode")) {
      const auto mode = j.at("mode").get<std::string>();
      if (mode == "linear")
        cfg.mode = ScmMode::Linear;
      else if (mode == "nonlinear")
        cfg.mode = ScmMode::Nonlinear;
      else
        throw ValidationError("unknown mode '" + mode + "'");
    }
    take(j, "sigma_lo", cfg.sigma_lo);
    take(j, "sigma_hi", cfg.sigma_hi);
    take(j, "k", cfg.params.k);
    take(j, "alpha", cfg.params.alpha);
    take(j, "prune_cutoff", cfg.params.prune_cutoff);
    take(j, "standardize", cfg.params.standardize);
    take(j, "skip_pruning", cfg.params.skip_pruning);
    take(j, "degeneracy_threshold", cfg.params.degeneracy_threshold);
    take(j, "workers", cfg.workers);
    if (j.contains("stein")) {
      const json& s = j.at("stein");
      reject_unknown(s, {"bandwidth", "fixed_bandwidth", "eta", "chunk"}, "stein.");
      if (s.contains("bandwidth")) {
        const auto rule = s.at("bandwidth").get<std::string>();
        if (rule == "median")
          cfg.params.stein.bandwidth = SteinConfig::Bandwidth::Median;
        else if (rule == "fixed")
          cfg.params.stein.bandwidth = SteinConfig::Bandwidth::Fixed;
        else
          throw ValidationError("unknown bandwidth rule '" + rule + "'");
      }
      take(s, "fixed_bandwidth", cfg.params.stein.fixed_bandwidth);
      take(s, "eta", cfg.params.stein.eta);
      take(s, "chunk", cfg.params.stein.chunk);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

namespace {

template <typename T>
T parse_number(std::string_view s, const std::string& text) {
  T value{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ValidationError("cannot parse '" + std::string(s) + "' in list '" + text + "'");
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (item.empty()) continue;
    const auto dash = item.find('-', 1);
    if (dash == std::string_view::npos) {
      out.push_back(parse_number<T>(item, text));
    } else {
      const T lo = parse_number<T>(item.substr(0, dash), text);
      const T hi = parse_number<T>(item.substr(dash + 1), text);
      if (hi < lo) throw ValidationError("empty range '" + std::string(item) + "'");
      for (T v = lo; v <= hi; ++v) out.push_back(v);
    }
  }
  return out;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) { return parse_list<std::uint64_t>(text); }

std::vector<Index> parse_index_list(const std::string& text) { return parse_list<Index>(text); }

Problem make_problem(const RunConfig& cfg, Index d, std::uint64_t seed) {
  Rng rng(seed);
  const Dag dag = cfg.graph == GraphType::Er ? sample_er(d, cfg.density * d, rng) : sample_sf(d, cfg.density, rng);
  ScmOptions opts;
  opts.mode = cfg.mode;
  opts.sigma_lo = cfg.sigma_lo;
  opts.sigma_hi = cfg.sigma_hi;
  ScmSpec scm = sample_scm(dag, opts, rng);
  Dataset data = draw(scm, cfg.n, rng);
  data.meta.seed = seed;
  data.meta.generator = to_string(cfg.graph) + std::to_string(cfg.density) + " d=" + std::to_string(d) + " " +
                        data.meta.generator;
  return {std::move(scm), std::move(data)};
}

}  // namespace das::cli
