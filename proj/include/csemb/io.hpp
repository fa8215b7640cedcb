#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "csemb/sparse_matrix.hpp"

namespace csemb::io {

struct EdgeList {
  std::vector<Edge> edges;
  /// One past the largest vertex id seen.
  Index n_vertices = 0;
};

/// SNAP-style edge list: one `u v` pair per line, whitespace separated,
/// lines starting with `#` ignored. Extra columns are ignored.
EdgeList read_edge_list(std::istream& in);
EdgeList read_edge_list(const std::filesystem::path& path);

/// Matrix Market coordinate format; `real`, `integer` and `pattern` fields,
/// `general` and `symmetric` layouts.
SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market(const std::filesystem::path& path);

/// Writes `general` (or `symmetric`, lower triangle only) coordinate format.
void write_matrix_market(std::ostream& out, const SparseMatrix& m, bool symmetric = false);
void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& m,
                         bool symmetric = false);

/// One point per line, comma separated reals. Blank lines and `#` comments
/// are skipped; all points must share a dimension.
std::vector<std::vector<double>> read_points_csv(std::istream& in);
std::vector<std::vector<double>> read_points_csv(const std::filesystem::path& path);

/// Binary embedding file: the 8 byte tag "CSEMB001", then n_rows and d as
/// little-endian u64, then n_rows * d little-endian f64 values, row-major.
inline constexpr char kEmbeddingMagic[9] = "CSEMB001";

void write_embedding(std::ostream& out, const DenseBlock& block);
void write_embedding(const std::filesystem::path& path, const DenseBlock& block);
DenseBlock read_embedding(std::istream& in);
DenseBlock read_embedding(const std::filesystem::path& path);

/// Plain CSV: a header `row,c0,c1,...` followed by one row per line.
void write_embedding_csv(const std::filesystem::path& path, const DenseBlock& block);

}  // namespace csemb::io
