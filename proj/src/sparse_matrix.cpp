#include "csemb/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "csemb/error.hpp"

namespace csemb {

// ---------------------------------------------------------------------------
// DenseBlock
// ---------------------------------------------------------------------------

DenseBlock::DenseBlock(std::size_t n_rows, std::size_t n_cols, double fill)
    : n_rows_(n_rows), n_cols_(n_cols), values_(n_rows * n_cols, fill) {}

DenseBlock::DenseBlock(std::size_t n_rows, std::size_t n_cols, std::vector<double> values)
    : n_rows_(n_rows), n_cols_(n_cols), values_(std::move(values)) {
  if (values_.size() != n_rows * n_cols) {
    throw InvalidInput("DenseBlock: value count " + std::to_string(values_.size()) +
                       " does not match shape " + std::to_string(n_rows) + "x" +
                       std::to_string(n_cols));
  }
}

bool DenseBlock::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double DenseBlock::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) {
    if (std::isnan(v)) return v;
    m = std::max(m, std::abs(v));
  }
  return m;
}

double DenseBlock::frobenius_norm() const noexcept {
  double acc = 0.0;
  for (double v : values_) acc += v * v;
  return std::sqrt(acc);
}

DenseBlock DenseBlock::column_slice(std::size_t first, std::size_t count) const {
  if (first + count > n_cols_) throw InvalidInput("DenseBlock::column_slice out of range");
  DenseBlock out(n_rows_, count);
  for (std::size_t i = 0; i < n_rows_; ++i) {
    std::copy_n(values_.data() + i * n_cols_ + first, count, out.values_.data() + i * count);
  }
  return out;
}

void DenseBlock::set_columns(std::size_t first, const DenseBlock& block) {
  if (block.n_rows_ != n_rows_ || first + block.n_cols_ > n_cols_) {
    throw InvalidInput("DenseBlock::set_columns shape mismatch");
  }
  for (std::size_t i = 0; i < n_rows_; ++i) {
    std::copy_n(block.values_.data() + i * block.n_cols_, block.n_cols_,
                values_.data() + i * n_cols_ + first);
  }
}

DenseBlock DenseBlock::row_slice(std::size_t first, std::size_t count) const {
  if (first + count > n_rows_) throw InvalidInput("DenseBlock::row_slice out of range");
  auto begin = values_.begin() + static_cast<std::ptrdiff_t>(first * n_cols_);
  return DenseBlock(count, n_cols_,
                    std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(count * n_cols_)));
}

// ---------------------------------------------------------------------------
// SparseMatrix
// ---------------------------------------------------------------------------

SparseMatrix::SparseMatrix(Index n_rows, Index n_cols, std::vector<Index> row_offsets,
                           std::vector<Index> col_indices, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  if (n_rows_ < 0 || n_cols_ < 0) throw InvalidInput("SparseMatrix: negative dimension");
  if (row_offsets_.size() != static_cast<std::size_t>(n_rows_) + 1) {
    throw InvalidInput("SparseMatrix: row_offsets must have n_rows + 1 entries");
  }
  if (col_indices_.size() != values_.size()) {
    throw InvalidInput("SparseMatrix: col_indices and values differ in length");
  }
  if (row_offsets_.front() != 0 || row_offsets_.back() != nnz()) {
    throw InvalidInput("SparseMatrix: row_offsets must start at 0 and end at nnz");
  }
  for (Index i = 0; i < n_rows_; ++i) {
    const Index begin = row_offsets_[i];
    const Index end = row_offsets_[i + 1];
    if (end < begin) throw InvalidInput("SparseMatrix: row_offsets must be non-decreasing");
    for (Index k = begin; k < end; ++k) {
      const Index c = col_indices_[k];
      if (c < 0 || c >= n_cols_) throw InvalidInput("SparseMatrix: column index out of range");
      if (k > begin && c <= col_indices_[k - 1]) {
        throw InvalidInput("SparseMatrix: column indices must strictly increase within a row");
      }
      if (values_[k] == 0.0) throw InvalidInput("SparseMatrix: explicit zero stored");
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(Index n_rows, Index n_cols, std::vector<Triplet> entries) {
  if (n_rows < 0 || n_cols < 0) throw InvalidInput("SparseMatrix: negative dimension");
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols) {
      throw InvalidInput("SparseMatrix: entry (" + std::to_string(t.row) + ", " +
                         std::to_string(t.col) + ") outside " + std::to_string(n_rows) + "x" +
                         std::to_string(n_cols));
    }
  }
  // Bucket by row, then sort each row by column.
  std::vector<Index> counts(static_cast<std::size_t>(n_rows) + 1, 0);
  for (const auto& t : entries) ++counts[static_cast<std::size_t>(t.row) + 1];
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  std::vector<Triplet> bucketed(entries.size());
  {
    std::vector<Index> cursor(counts.begin(), counts.end() - 1);
    for (const auto& t : entries) bucketed[static_cast<std::size_t>(cursor[t.row]++)] = t;
  }
  entries.clear();
  entries.shrink_to_fit();

  SparseMatrix out;
  out.n_rows_ = n_rows;
  out.n_cols_ = n_cols;
  out.row_offsets_.assign(static_cast<std::size_t>(n_rows) + 1, 0);
  out.col_indices_.reserve(bucketed.size());
  out.values_.reserve(bucketed.size());
  for (Index i = 0; i < n_rows; ++i) {
    auto first = bucketed.begin() + counts[i];
    auto last = bucketed.begin() + counts[i + 1];
    std::stable_sort(first, last, [](const Triplet& a, const Triplet& b) { return a.col < b.col; });
    for (auto it = first; it != last;) {
      const Index col = it->col;
      double sum = 0.0;
      for (; it != last && it->col == col; ++it) sum += it->value;
      if (sum != 0.0) {
        out.col_indices_.push_back(col);
        out.values_.push_back(sum);
      }
    }
    out.row_offsets_[static_cast<std::size_t>(i) + 1] = static_cast<Index>(out.values_.size());
  }
  return out;
}

SparseMatrix SparseMatrix::identity(Index n) {
  std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
  return diagonal(ones);
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> diag) {
  const auto n = static_cast<Index>(diag.size());
  std::vector<Triplet> entries;
  entries.reserve(diag.size());
  for (Index i = 0; i < n; ++i) entries.push_back({i, i, diag[static_cast<std::size_t>(i)]});
  return from_triplets(n, n, std::move(entries));
}

SparseMatrix SparseMatrix::from_dense(const DenseBlock& dense) {
  std::vector<Triplet> entries;
  for (std::size_t i = 0; i < dense.rows(); ++i) {
    for (std::size_t j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) {
        entries.push_back({static_cast<Index>(i), static_cast<Index>(j), dense(i, j)});
      }
    }
  }
  return from_triplets(static_cast<Index>(dense.rows()), static_cast<Index>(dense.cols()),
                       std::move(entries));
}

SparseMatrix SparseMatrix::scaled(double factor) const {
  if (factor == 0.0 || !std::isfinite(factor)) {
    throw InvalidInput("SparseMatrix::scaled: factor must be finite and non-zero");
  }
  SparseMatrix out = *this;
  for (double& v : out.values_) v *= factor;
  // Underflow could create zeros; keep the canonical form.
  if (std::any_of(out.values_.begin(), out.values_.end(), [](double v) { return v == 0.0; })) {
    std::vector<Triplet> entries;
    for (Index i = 0; i < n_rows_; ++i) {
      for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
        entries.push_back({i, col_indices_[k], out.values_[k]});
      }
    }
    return from_triplets(n_rows_, n_cols_, std::move(entries));
  }
  return out;
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<Triplet> entries;
  entries.reserve(values_.size());
  for (Index i = 0; i < n_rows_; ++i) {
    for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      entries.push_back({col_indices_[k], i, values_[k]});
    }
  }
  return from_triplets(n_cols_, n_rows_, std::move(entries));
}

bool SparseMatrix::is_symmetric() const {
  if (n_rows_ != n_cols_) return false;
  return transposed() == *this;
}

DenseBlock SparseMatrix::to_dense() const {
  DenseBlock out(static_cast<std::size_t>(n_rows_), static_cast<std::size_t>(n_cols_));
  for (Index i = 0; i < n_rows_; ++i) {
    for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(col_indices_[k])) = values_[k];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Products
// ---------------------------------------------------------------------------

void spmv_multi_into(const SparseMatrix& s, const DenseBlock& x, DenseBlock& y,
                     SpmvCounter* counter) {
  if (static_cast<std::size_t>(s.cols()) != x.rows()) {
    throw InvalidInput("spmv_multi: matrix has " + std::to_string(s.cols()) +
                       " columns but block has " + std::to_string(x.rows()) + " rows");
  }
  if (y.rows() != static_cast<std::size_t>(s.rows()) || y.cols() != x.cols()) {
    throw InvalidInput("spmv_multi: output block has the wrong shape");
  }
  const std::size_t width = x.cols();
  const auto offsets = s.row_offsets();
  const auto cols = s.col_indices();
  const auto vals = s.values();
  const double* xin = x.values().data();
  double* yout = y.values().data();

  for (Index i = 0; i < s.rows(); ++i) {
    double* yrow = yout + static_cast<std::size_t>(i) * width;
    std::fill_n(yrow, width, 0.0);
    for (Index k = offsets[i]; k < offsets[i + 1]; ++k) {
      const double a = vals[k];
      const double* xrow = xin + static_cast<std::size_t>(cols[k]) * width;
      for (std::size_t c = 0; c < width; ++c) yrow[c] += a * xrow[c];
    }
  }
  if (counter != nullptr) {
    counter->calls.fetch_add(1, std::memory_order_relaxed);
    counter->columns.fetch_add(width, std::memory_order_relaxed);
  }
}

DenseBlock spmv_multi(const SparseMatrix& s, const DenseBlock& x, SpmvCounter* counter) {
  if (static_cast<std::size_t>(s.cols()) != x.rows()) {
    throw InvalidInput("spmv_multi: matrix has " + std::to_string(s.cols()) +
                       " columns but block has " + std::to_string(x.rows()) + " rows");
  }
  DenseBlock y(static_cast<std::size_t>(s.rows()), x.cols());
  spmv_multi_into(s, x, y, counter);
  return y;
}

// ---------------------------------------------------------------------------
// Derived matrices
// ---------------------------------------------------------------------------

SparseMatrix dilate(const SparseMatrix& a) {
  const Index m = a.rows();
  const Index n = a.cols();
  if (m == 0 || n == 0) throw InvalidInput("dilate: matrix must be non-empty");
  std::vector<Triplet> entries;
  entries.reserve(2 * static_cast<std::size_t>(a.nnz()));
  const auto offsets = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  for (Index i = 0; i < m; ++i) {
    for (Index k = offsets[i]; k < offsets[i + 1]; ++k) {
      entries.push_back({n + i, cols[k], vals[k]});  // A, bottom-left
      entries.push_back({cols[k], n + i, vals[k]});  // A^T, top-right
    }
  }
  return SparseMatrix::from_triplets(m + n, m + n, std::move(entries));
}

std::vector<Edge> simple_undirected(std::span<const Edge> edges) {
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.u == e.v) continue;
    out.push_back(e.u < e.v ? e : Edge{e.v, e.u});
  }
  std::sort(out.begin(), out.end(),
            [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SparseMatrix normalized_adjacency(std::span<const Edge> edges, Index n) {
  if (n < 0) throw InvalidInput("normalized_adjacency: negative vertex count");
  for (const auto& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n) {
      throw InvalidInput("normalized_adjacency: edge (" + std::to_string(e.u) + ", " +
                         std::to_string(e.v) + ") references a vertex outside [0, " +
                         std::to_string(n) + ")");
    }
  }
  const auto simple = simple_undirected(edges);
  std::vector<double> degree(static_cast<std::size_t>(n), 0.0);
  for (const auto& e : simple) {
    degree[static_cast<std::size_t>(e.u)] += 1.0;
    degree[static_cast<std::size_t>(e.v)] += 1.0;
  }
  std::vector<Triplet> entries;
  entries.reserve(2 * simple.size());
  for (const auto& e : simple) {
    const double w = 1.0 / std::sqrt(degree[static_cast<std::size_t>(e.u)] *
                                     degree[static_cast<std::size_t>(e.v)]);
    entries.push_back({e.u, e.v, w});
    entries.push_back({e.v, e.u, w});
  }
  return SparseMatrix::from_triplets(n, n, std::move(entries));
}

SparseMatrix kernel_matrix(std::span<const std::vector<double>> points, const KernelSpec& spec) {
  if (!(spec.bandwidth > 0.0) || !std::isfinite(spec.bandwidth)) {
    throw InvalidInput("kernel_matrix: bandwidth must be positive");
  }
  if (points.empty()) throw InvalidInput("kernel_matrix: need at least one point");
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw InvalidInput("kernel_matrix: points differ in dimension");
  }
  const auto l = static_cast<Index>(points.size());
  const double two_alpha_sq = 2.0 * spec.bandwidth * spec.bandwidth;
  std::vector<Triplet> entries;
  for (Index p = 0; p < l; ++p) {
    const auto& xp = points[static_cast<std::size_t>(p)];
    for (Index q = p; q < l; ++q) {
      const auto& xq = points[static_cast<std::size_t>(q)];
      double dist_sq = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double diff = xp[k] - xq[k];
        dist_sq += diff * diff;
      }
      double value = 0.0;
      if (spec.kind == KernelKind::gaussian) {
        value = std::exp(-dist_sq / two_alpha_sq);
        if (value < kGaussianDropTolerance) value = 0.0;
      } else {
        value = std::sqrt(dist_sq) < spec.bandwidth ? 1.0 : 0.0;
      }
      if (value == 0.0) continue;
      entries.push_back({p, q, value});
      if (q != p) entries.push_back({q, p, value});
    }
  }
  return SparseMatrix::from_triplets(l, l, std::move(entries));
}

RescaledMatrix rescale_spectrum(const SparseMatrix& s, double sigma_min, double sigma_max) {
  if (s.rows() != s.cols()) throw InvalidInput("rescale_spectrum: matrix must be square");
  if (!(sigma_max > sigma_min) || !std::isfinite(sigma_min) || !std::isfinite(sigma_max)) {
    throw InvalidInput("rescale_spectrum: need finite sigma_max > sigma_min");
  }
  const double width = sigma_max - sigma_min;
  const double scale = 2.0 / width;
  const double shift = (sigma_max + sigma_min) / width;

  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(s.nnz() + s.rows()));
  const auto offsets = s.row_offsets();
  const auto cols = s.col_indices();
  const auto vals = s.values();
  for (Index i = 0; i < s.rows(); ++i) {
    bool has_diagonal = false;
    for (Index k = offsets[i]; k < offsets[i + 1]; ++k) {
      double v = scale * vals[k];
      if (cols[k] == i) {
        v -= shift;
        has_diagonal = true;
      }
      entries.push_back({i, cols[k], v});
    }
    if (!has_diagonal && shift != 0.0) entries.push_back({i, i, -shift});
  }
  return {SparseMatrix::from_triplets(s.rows(), s.cols(), std::move(entries)),
          AffineMap{width / 2.0, (sigma_max + sigma_min) / 2.0}};
}

}  // namespace csemb
