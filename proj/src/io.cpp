#include "das/io.hpp"

#include "das/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace das::io {

namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = s.substr(1, s.size() - 2);
  return std::string(s);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

bool parse_index(std::string_view s, Index& out) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return false;
  out = static_cast<Index>(v);
  return true;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string location(const fs::path& path, std::size_t line, std::size_t column) {
  return path.string() + ": line " + std::to_string(line) + ", column " + std::to_string(column);
}

bool is_blank_or_comment(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

Index resolve_node(std::string_view token, const std::vector<std::string>& names, const fs::path& path,
                   std::size_t line) {
  Index idx = 0;
  if (parse_index(token, idx)) return idx;
  const std::string name = unquote(token);
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ValidationError(location(path, line, 1) + ": unknown node '" + name + "'");
  return static_cast<Index>(it - names.begin());
}

Eigen::VectorXd to_vector(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

nlohmann::json to_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

void write_dataset_csv(const fs::path& path, const Dataset& data) {
  auto out = open_out(path);
  for (std::size_t j = 0; j < data.names.size(); ++j) out << (j ? "," : "") << data.names[j];
  out << '\n';
  for (Index i = 0; i < data.n(); ++i) {
    for (Index j = 0; j < data.d(); ++j) out << (j ? "," : "") << format_double(data.values(i, j));
    out << '\n';
  }
  finish(out, path);
}

Dataset read_dataset_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> names;
  while (names.empty() && std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    for (auto field : split(line, ',')) names.push_back(unquote(field));
  }
  if (names.empty()) throw ValidationError(path.string() + ": missing header row");

  std::vector<double> values;
  Index rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != names.size())
      throw ValidationError(location(path, line_no, fields.size()) + ": expected " + std::to_string(names.size()) +
                            " fields, found " + std::to_string(fields.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = 0.0;
      if (!parse_double(fields[c], v))
        throw ValidationError(location(path, line_no, c + 1) + ": cannot parse '" + std::string(trim(fields[c])) + "'");
      if (!std::isfinite(v)) throw ValidationError(location(path, line_no, c + 1) + ": non-finite value");
      values.push_back(v);
    }
    ++rows;
  }
  const auto cols = static_cast<Index>(names.size());
  Eigen::MatrixXd m = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, cols);
  return Dataset(std::move(m), std::move(names));
}

void write_edge_list(const fs::path& path, const Dag& g) {
  auto out = open_out(path);
  out << "# nodes " << g.size() << '\n';
  for (const auto& [from, to] : g.edges()) out << from << ' ' << to << '\n';
  finish(out, path);
}

Dag read_edge_list(const fs::path& path, Index nodes, const std::vector<std::string>& names) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const auto fields = split_ws(t.substr(1));
      Index declared = 0;
      if (fields.size() == 2 && fields[0] == "nodes" && parse_index(fields[1], declared)) {
        if (nodes >= 0 && declared != nodes)
          throw DimensionMismatch(path.string() + " declares " + std::to_string(declared) + " nodes, expected " +
                                  std::to_string(nodes));
        nodes = declared;
      }
      continue;
    }
    auto fields = split_ws(t);
    if (fields.size() == 1 && t.find(',') != std::string_view::npos) fields = split(t, ',');
    if (fields.size() != 2)
      throw ValidationError(location(path, line_no, 1) + ": expected two node ids, found " +
                            std::to_string(fields.size()) + " fields");
    edges.emplace_back(resolve_node(fields[0], names, path, line_no), resolve_node(fields[1], names, path, line_no));
  }
  if (nodes < 0) {
    if (!names.empty()) {
      nodes = static_cast<Index>(names.size());
    } else {
      nodes = 0;
      for (const auto& [a, b] : edges) nodes = std::max({nodes, a + 1, b + 1});
    }
  }
  return Dag::from_edges(nodes, edges);
}

void write_adjacency_csv(const fs::path& path, const Dag& g) {
  auto out = open_out(path);
  for (Index i = 0; i < g.size(); ++i) {
    for (Index j = 0; j < g.size(); ++j) out << (j ? "," : "") << (g.has_edge(i, j) ? '1' : '0');
    out << '\n';
  }
  finish(out, path);
}

Dag read_adjacency_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<bool>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    const auto fields = split(line, ',');
    std::vector<bool> row;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = 0.0;
      if (!parse_double(fields[c], v) || (v != 0.0 && v != 1.0))
        throw ValidationError(location(path, line_no, c + 1) + ": expected 0 or 1");
      row.push_back(v == 1.0);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ValidationError(location(path, line_no, row.size()) + ": ragged adjacency row");
    rows.push_back(std::move(row));
  }
  const auto d = static_cast<Index>(rows.size());
  if (d > 0 && static_cast<Index>(rows.front().size()) != d)
    throw DimensionMismatch(path.string() + ": adjacency is " + std::to_string(d) + "x" +
                            std::to_string(rows.front().size()));
  Adjacency a(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) a(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return Dag(std::move(a));
}

Dag read_truth(const fs::path& path, Index nodes, const std::vector<std::string>& names) {
  auto in = open_in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (is_blank_or_comment(line)) continue;
    const auto fields = split(trim(line), ',');
    bool numeric = fields.size() > 2;
    for (auto f : fields) {
      double v = 0.0;
      numeric = numeric && parse_double(f, v);
    }
    if (numeric) {
      Dag g = read_adjacency_csv(path);
      if (nodes >= 0 && g.size() != nodes)
        throw DimensionMismatch(path.string() + ": truth has " + std::to_string(g.size()) + " nodes, data has " +
                                std::to_string(nodes) + " columns");
      return g;
    }
    break;
  }
  return read_edge_list(path, nodes, names);
}

nlohmann::json scm_to_json(const ScmSpec& scm) {
  nlohmann::json j;
  j["nodes"] = scm.size();
  j["mode"] = scm.mode == ScmMode::Linear ? "linear" : "nonlinear";
  j["sigmas"] = to_json(scm.sigmas);
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : scm.dag.edges()) edges.push_back({a, b});
  j["edges"] = edges;
  nlohmann::json funcs = nlohmann::json::array();
  for (std::size_t i = 0; i < scm.functions.size(); ++i) {
    const auto& f = scm.functions[i];
    nlohmann::json fj;
    fj["node"] = i;
    fj["parents"] = f.parents;
    switch (f.kind) {
      case FunctionModel::Kind::Zero: fj["kind"] = "zero"; break;
      case FunctionModel::Kind::Linear:
        fj["kind"] = "linear";
        fj["coefficients"] = to_json(f.coefficients);
        break;
      case FunctionModel::Kind::RandomFeatures: {
        fj["kind"] = "random_features";
        fj["amplitudes"] = to_json(f.amplitudes);
        fj["phases"] = to_json(f.phases);
        nlohmann::json freq = nlohmann::json::array();
        for (Index m = 0; m < f.frequencies.rows(); ++m) freq.push_back(to_json(f.frequencies.row(m).transpose()));
        fj["frequencies"] = freq;
        break;
      }
    }
    funcs.push_back(fj);
  }
  j["functions"] = funcs;
  return j;
}

ScmSpec scm_from_json(const nlohmann::json& j) {
  try {
    ScmSpec scm;
    const Index d = j.at("nodes").get<Index>();
    scm.dag = Dag::from_edges(d, j.at("edges").get<std::vector<Edge>>());
    scm.mode = j.at("mode").get<std::string>() == "linear" ? ScmMode::Linear : ScmMode::Nonlinear;
    scm.sigmas = to_vector(j.at("sigmas"));
    for (const auto& fj : j.at("functions")) {
      FunctionModel f;
      f.parents = fj.at("parents").get<std::vector<Index>>();
      const auto kind = fj.at("kind").get<std::string>();
      if (kind == "linear") {
        f.kind = FunctionModel::Kind::Linear;
        f.coefficients = to_vector(fj.at("coefficients"));
      } else if (kind == "random_features") {
        f.kind = FunctionModel::Kind::RandomFeatures;
        f.amplitudes = to_vector(fj.at("amplitudes"));
        f.phases = to_vector(fj.at("phases"));
        const auto& freq = fj.at("frequencies");
        f.frequencies.resize(static_cast<Index>(freq.size()), static_cast<Index>(f.parents.size()));
        for (std::size_t m = 0; m < freq.size(); ++m) f.frequencies.row(static_cast<Index>(m)) = to_vector(freq[m]);
      } else if (kind != "zero") {
        throw ValidationError("unknown function kind '" + kind + "'");
      }
      scm.functions.push_back(std::move(f));
    }
    scm.validate();
    return scm;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed SCM spec: ") + e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

nlohmann::json read_json(const fs::path& path) {
  auto in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

ExternalFormat parse_external_format(const std::string& name) {
  if (name == "csv-header") return ExternalFormat::CsvHeader;
  if (name == "syntren-export") return ExternalFormat::SyntrenExport;
  throw ValidationError("unknown external format '" + name + "' (expected csv-header or syntren-export)");
}

namespace {

Dataset read_syntren_matrix(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  std::size_t samples = 0;
  bool header_seen = false;
  std::vector<std::string> genes;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    const auto fields = split_ws(line);
    if (!header_seen) {
      header_seen = true;
      samples = fields.size();
      continue;
    }
    // Header may or may not carry a label for the gene-name column.
    if (rows.empty() && fields.size() == samples) --samples;
    if (fields.size() != samples + 1)
      throw ValidationError(location(path, line_no, fields.size()) + ": expected gene name plus " +
                            std::to_string(samples) + " values");
    genes.push_back(unquote(fields[0]));
    std::vector<double> values;
    for (std::size_t c = 1; c < fields.size(); ++c) {
      double v = 0.0;
      if (!parse_double(fields[c], v))
        throw ValidationError(location(path, line_no, c + 1) + ": cannot parse '" + std::string(fields[c]) + "'");
      if (!std::isfinite(v)) throw ValidationError(location(path, line_no, c + 1) + ": non-finite value");
      values.push_back(v);
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ValidationError(path.string() + ": no expression rows");
  Eigen::MatrixXd m(static_cast<Index>(samples), static_cast<Index>(genes.size()));
  for (std::size_t g = 0; g < rows.size(); ++g)
    for (std::size_t s = 0; s < samples; ++s) m(static_cast<Index>(s), static_cast<Index>(g)) = rows[g][s];
  return Dataset(std::move(m), std::move(genes), DatasetMeta{0, "syntren-export", false});
}

Dag read_syntren_network(const fs::path& path, const std::vector<std::string>& genes) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<Edge> edges;
  std::unordered_map<std::string, Index> index;
  for (std::size_t g = 0; g < genes.size(); ++g) index[genes[g]] = static_cast<Index>(g);
  auto lookup = [&](std::string_view token) {
    const auto it = index.find(unquote(token));
    if (it == index.end())
      throw ValidationError(location(path, line_no, 1) + ": gene '" + std::string(token) + "' not in observations");
    return it->second;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    const auto fields = split_ws(line);
    if (fields.size() == 3) {
      edges.emplace_back(lookup(fields[0]), lookup(fields[2]));
    } else if (fields.size() == 2) {
      edges.emplace_back(lookup(fields[0]), lookup(fields[1]));
    } else {
      throw ValidationError(location(path, line_no, 1) + ": expected 'source type target'");
    }
  }
  return Dag::from_edges(static_cast<Index>(genes.size()), edges);
}

}  // namespace

ExternalBundle ingest_external(const fs::path& observations, const fs::path& truth, ExternalFormat format) {
  if (format == ExternalFormat::SyntrenExport) {
    Dataset data = read_syntren_matrix(observations);
    Dag g = read_syntren_network(truth, data.names);
    return {std::move(data), std::move(g)};
  }
  Dataset data = read_dataset_csv(observations);
  data.meta.generator = "external:" + observations.filename().string();
  Dag g = read_truth(truth, data.d(), data.names);
  return {std::move(data), std::move(g)};
}

}  // namespace das::io
