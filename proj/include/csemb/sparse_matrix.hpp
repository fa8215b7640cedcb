#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace csemb {

/// Sparse indices are 64-bit so graphs with more than 2^31 non-zeros fit.
using Index = std::int64_t;

/// Dense row-major block. Holds projection matrices, Legendre iterates and
/// embeddings.
class DenseBlock {
 public:
  DenseBlock() = default;
  DenseBlock(std::size_t n_rows, std::size_t n_cols, double fill = 0.0);
  DenseBlock(std::size_t n_rows, std::size_t n_cols, std::vector<double> values);

  std::size_t rows() const noexcept { return n_rows_; }
  std::size_t cols() const noexcept { return n_cols_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * n_cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_cols_ + j]; }

  std::span<double> row(std::size_t i) { return {values_.data() + i * n_cols_, n_cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * n_cols_, n_cols_};
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool all_finite() const noexcept;
  double max_abs() const noexcept;
  double frobenius_norm() const noexcept;

  /// Copy of columns [first, first + count).
  DenseBlock column_slice(std::size_t first, std::size_t count) const;
  /// Write `block` into columns [first, first + block.cols()).
  void set_columns(std::size_t first, const DenseBlock& block);
  /// Copy of rows [first, first + count).
  DenseBlock row_slice(std::size_t first, std::size_t count) const;

  friend bool operator==(const DenseBlock&, const DenseBlock&) = default;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<double> values_;
};

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Counts sparse products so complexity claims can be audited. `columns`
/// is the number of single-vector products performed; a multi-vector call
/// over a block of width g adds g.
struct SpmvCounter {
  std::atomic<std::uint64_t> calls{0};
  std::atomic<std::uint64_t> columns{0};

  void reset() noexcept {
    calls = 0;
    columns = 0;
  }
};

/// Compressed sparse row matrix. Immutable once built.
///
/// Invariants: row_offsets is non-decreasing with row_offsets[0] = 0 and
/// row_offsets[n_rows] = nnz; column indices strictly increase within a row
/// and are < n_cols; no explicit zeros are stored.
class SparseMatrix {
 public:
  SparseMatrix() : row_offsets_(1, 0) {}

  /// Validates the CSR invariants; throws InvalidInput on violation.
  SparseMatrix(Index n_rows, Index n_cols, std::vector<Index> row_offsets,
               std::vector<Index> col_indices, std::vector<double> values);

  /// Builds a canonical matrix from unordered entries. Duplicates are summed
  /// and entries that end up exactly zero are dropped.
  static SparseMatrix from_triplets(Index n_rows, Index n_cols, std::vector<Triplet> entries);

  static SparseMatrix identity(Index n);
  static SparseMatrix diagonal(std::span<const double> diag);
  static SparseMatrix from_dense(const DenseBlock& dense);

  Index rows() const noexcept { return n_rows_; }
  Index cols() const noexcept { return n_cols_; }
  Index nnz() const noexcept { return static_cast<Index>(values_.size()); }

  std::span<const Index> row_offsets() const noexcept { return row_offsets_; }
  std::span<const Index> col_indices() const noexcept { return col_indices_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Every stored value multiplied by `factor` (factor must be non-zero).
  SparseMatrix scaled(double factor) const;
  SparseMatrix transposed() const;
  bool is_symmetric() const;
  DenseBlock to_dense() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  Index n_rows_ = 0;
  Index n_cols_ = 0;
  std::vector<Index> row_offsets_;
  std::vector<Index> col_indices_;
  std::vector<double> values_;
};

/// Y = S X. Rows are accumulated in stored column order, so the result does
/// not depend on how callers split X into column groups.
DenseBlock spmv_multi(const SparseMatrix& s, const DenseBlock& x, SpmvCounter* counter = nullptr);

/// In-place variant writing into a preallocated block of the right shape.
void spmv_multi_into(const SparseMatrix& s, const DenseBlock& x, DenseBlock& y,
                     SpmvCounter* counter = nullptr);

/// Symmetric dilation [0 A^T; A 0]. Indices 0..n-1 are the columns of A,
/// indices n..n+m-1 are its rows.
SparseMatrix dilate(const SparseMatrix& a);

struct Edge {
  Index u;
  Index v;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// D^{-1/2} A D^{-1/2} of the simple undirected graph spanned by `edges`.
/// Self-loops are dropped, duplicate edges collapse, and isolated vertices
/// keep an all-zero row.
SparseMatrix normalized_adjacency(std::span<const Edge> edges, Index n);

/// Unique undirected edges (u < v) with self-loops removed, sorted.
std::vector<Edge> simple_undirected(std::span<const Edge> edges);

enum class KernelKind { gaussian, indicator };

struct KernelSpec {
  KernelKind kind = KernelKind::gaussian;
  double bandwidth = 1.0;
};

/// Gaussian entries below this are not stored.
inline constexpr double kGaussianDropTolerance = 1e-12;

/// l x l kernel matrix over `points` (each of equal dimension). Gaussian:
/// exp(-|x_p - x_q|^2 / (2 alpha^2)); indicator: 1 when |x_p - x_q| < alpha,
/// which includes the diagonal.
SparseMatrix kernel_matrix(std::span<const std::vector<double>> points, const KernelSpec& spec);

/// t(x) = scale * x + offset.
struct AffineMap {
  double scale = 1.0;
  double offset = 0.0;

  double operator()(double x) const noexcept { return scale * x + offset; }
  friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

struct RescaledMatrix {
  SparseMatrix matrix;
  /// Maps the rescaled spectrum [-1, 1] back onto [sigma_min, sigma_max].
  AffineMap to_original;
};

/// S' = 2 S / (hi - lo) - (hi + lo) / (hi - lo) I, which moves a spectrum in
/// [lo, hi] onto [-1, 1]. Diagonal entries are created as needed.
RescaledMatrix rescale_spectrum(const SparseMatrix& s, double sigma_min, double sigma_max);

}  // namespace csemb
