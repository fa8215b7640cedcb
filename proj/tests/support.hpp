#pragma once

// Generators and small helpers shared by the test binaries.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "csemb/sparse_matrix.hpp"

namespace testing_support {

using csemb::DenseBlock;
using csemb::Edge;
using csemb::Index;
using csemb::SparseMatrix;
using csemb::Triplet;

inline DenseBlock random_block(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  DenseBlock out(rows, cols);
  for (double& v : out.values()) v = normal(rng);
  return out;
}

/// Symmetric matrix with roughly `density` of its entries set, values
/// uniform in [-1, 1]. Not normalized.
inline SparseMatrix random_symmetric(std::size_t n, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      if (unit(rng) >= density) continue;
      const double v = value(rng);
      t.push_back({static_cast<Index>(i), static_cast<Index>(j), v});
      if (i != j) t.push_back({static_cast<Index>(j), static_cast<Index>(i), v});
    }
  }
  return SparseMatrix::from_triplets(static_cast<Index>(n), static_cast<Index>(n), std::move(t));
}

inline DenseBlock random_symmetric_dense(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  DenseBlock out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = normal(rng);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

inline SparseMatrix random_general(std::size_t m, std::size_t n, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (unit(rng) < density) t.push_back({static_cast<Index>(i), static_cast<Index>(j), value(rng)});
    }
  }
  return SparseMatrix::from_triplets(static_cast<Index>(m), static_cast<Index>(n), std::move(t));
}

/// Planted partition graph: vertex v belongs to block v * blocks / n.
inline std::vector<Edge> sbm_edges(std::size_t n, std::size_t blocks, double p_in, double p_out,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool same = i * blocks / n == j * blocks / n;
      if (unit(rng) < (same ? p_in : p_out)) edges.push_back({static_cast<Index>(i), static_cast<Index>(j)});
    }
  }
  return edges;
}

inline std::vector<std::size_t> sbm_labels(std::size_t n, std::size_t blocks) {
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i * blocks / n;
  return labels;
}

/// ||a - b||_F / ||b||_F.
inline double relative_error(const DenseBlock& a, const DenseBlock& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a.values()[k] - b.values()[k];
    num += diff * diff;
    den += b.values()[k] * b.values()[k];
  }
  return std::sqrt(num) / std::sqrt(den);
}

}  // namespace testing_support
