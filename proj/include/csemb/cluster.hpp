#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "csemb/embed.hpp"
#include "csemb/sparse_matrix.hpp"
#include "csemb/spectral_function.hpp"

namespace csemb {

struct ClusterAssignment {
  /// Cluster id in [0, k) per row.
  std::vector<std::size_t> labels;
  std::size_t k = 0;
  /// Sum of squared distances from each row to its centroid.
  double inertia = 0.0;
  DenseBlock centroids;
  /// Inertia after every assignment step; non-increasing.
  std::vector<double> inertia_history;
  std::size_t iterations = 0;
};

/// Lloyd's algorithm from k-means++ seeding. An empty cluster is re-seeded
/// at the row farthest from its current centroid. Deterministic per seed.
ClusterAssignment kmeans(const DenseBlock& x, std::size_t k, std::size_t max_iters,
                         std::uint64_t seed);

struct ModularityScore {
  double q = 0.0;
  std::size_t m_edges = 0;
};

/// Newman modularity sum_c (e_c / m - (deg_c / 2m)^2) of the simple
/// undirected graph spanned by `edges`. Every endpoint needs a label.
ModularityScore modularity(std::span<const Edge> edges, std::span<const std::size_t> labels);

struct ClusterExperiment {
  double median_modularity = 0.0;
  /// One score per run, in run order.
  std::vector<double> scores;
  std::vector<ClusterAssignment> runs;
};

struct ClusterOptions {
  std::size_t k = 200;
  std::size_t runs = 25;
  std::size_t max_iters = 100;
  std::uint64_t seed = 0;
  /// Concurrent runs; 0 = CSEMB_THREADS / hardware. Never changes results.
  std::size_t threads = 1;
};

/// Seed of run `run` derived from the base seed.
std::uint64_t run_seed(std::uint64_t base, std::size_t run);

/// Median of a non-empty sample (mean of the middle pair for even sizes).
double median(std::vector<double> values);

/// `runs` seeded k-means instances on the rows of `x`, each scored against
/// the graph.
ClusterExperiment cluster_embedding(const DenseBlock& x, std::span<const Edge> edges,
                                    const ClusterOptions& options);

/// Normalized adjacency -> cascaded embedding (projection seeded by
/// cfg.seed) -> cluster_embedding.
ClusterExperiment cluster_experiment(std::span<const Edge> edges, Index n_vertices,
                                     const SpectralFunction& f, const EmbedConfig& cfg,
                                     const ClusterOptions& options,
                                     const ExecutionContext& ctx = {});

}  // namespace csemb
