#pragma once

#include "das/graph.hpp"
#include "das/synth.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace das::io {

namespace fs = std::filesystem;

/// Observations CSV: a header row of column names, then one row per sample.
/// Numbers are written in shortest round-trip form, so a reload reproduces
/// the matrix bit for bit.
void write_dataset_csv(const fs::path& path, const Dataset& data);
Dataset read_dataset_csv(const fs::path& path);

/// Edge list: one "i j" line per edge (0-based), preceded by a "# nodes d"
/// line. On reading, `d` is taken from that line when present, otherwise
/// from `nodes`. Endpoints may also be column names when `names` is given.
void write_edge_list(const fs::path& path, const Dag& g);
Dag read_edge_list(const fs::path& path, Index nodes = -1, const std::vector<std::string>& names = {});

/// Dense 0/1 adjacency CSV without header; row i, column j is edge i -> j.
void write_adjacency_csv(const fs::path& path, const Dag& g);
Dag read_adjacency_csv(const fs::path& path);

/// Adjacency CSV when the first data line contains a comma, edge list
/// otherwise.
Dag read_truth(const fs::path& path, Index nodes, const std::vector<std::string>& names = {});

nlohmann::json scm_to_json(const ScmSpec& scm);
ScmSpec scm_from_json(const nlohmann::json& j);

void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

enum class ExternalFormat { CsvHeader, SyntrenExport };

ExternalFormat parse_external_format(const std::string& name);

struct ExternalBundle {
  Dataset data;
  Dag truth;
};

/// Loads observations plus ground truth and checks they agree.
///
/// CsvHeader: observations CSV with header, truth as adjacency CSV or edge
/// list (indices or column names).
/// SyntrenExport: whitespace-separated expression matrix with one gene per
/// row (first field the gene name, first line the sample labels), and a
/// network file of "source <type> target" lines using gene names.
ExternalBundle ingest_external(const fs::path& observations, const fs::path& truth, ExternalFormat format);

}  // namespace das::io
