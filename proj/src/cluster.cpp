#include "csemb/cluster.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <random>
#include <string>
#include <thread>

#include "csemb/error.hpp"

namespace csemb {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    acc += diff * diff;
  }
  return acc;
}

DenseBlock seed_centroids(const DenseBlock& x, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = x.rows();
  DenseBlock centroids(k, x.cols());
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<char> taken(n, 0);

  std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  for (std::size_t c = 0; c < k; ++c) {
    taken[pick] = 1;
    std::copy(x.row(pick).begin(), x.row(pick).end(), centroids.row(c).begin());
    if (c + 1 == k) break;

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(x.row(i), centroids.row(c)));
      if (!taken[i]) total += nearest[i];
    }
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i] || nearest[i] == 0.0) continue;
        pick = i;
        target -= nearest[i];
        if (target < 0.0) break;
      }
    } else {
      // Every remaining row duplicates a centroid.
      pick = static_cast<std::size_t>(std::find(taken.begin(), taken.end(), 0) - taken.begin());
    }
  }
  return centroids;
}

}  // namespace

ClusterAssignment kmeans(const DenseBlock& x, std::size_t k, std::size_t max_iters,
                         std::uint64_t seed) {
  const std::size_t n = x.rows();
  if (k == 0) throw InvalidInput("kmeans: k must be positive");
  if (k > n) {
    throw InvalidInput("kmeans: k = " + std::to_string(k) + " exceeds the number of rows " +
                       std::to_string(n));
  }
  if (!x.all_finite()) throw InvalidInput("kmeans: input contains non-finite values");

  std::mt19937_64 rng(seed);
  ClusterAssignment out;
  out.k = k;
  out.centroids = seed_centroids(x, k, rng);
  out.labels.assign(n, k);
  std::vector<double> dist(n, 0.0);

  for (std::size_t iter = 0; iter < std::max<std::size_t>(max_iters, 1); ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = squared_distance(x.row(i), out.centroids.row(0));
      for (std::size_t c = 1; c < k; ++c) {
        const double dc = squared_distance(x.row(i), out.centroids.row(c));
        if (dc < best_d) {
          best_d = dc;
          best = c;
        }
      }
      changed |= out.labels[i] != best;
      out.labels[i] = best;
      dist[i] = best_d;
      inertia += best_d;
    }
    out.inertia = inertia;
    out.inertia_history.push_back(inertia);
    out.iterations = iter + 1;
    if (!changed && iter > 0) break;

    DenseBlock sums(k, x.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = sums.row(out.labels[i]);
      const auto src = x.row(i);
      for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
      ++counts[out.labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
        std::copy(x.row(far).begin(), x.row(far).end(), out.centroids.row(c).begin());
        dist[far] = 0.0;
        continue;
      }
      const double inv = 1.0 / static_cast<double>(counts[c]);
      auto dst = out.centroids.row(c);
      const auto src = sums.row(c);
      for (std::size_t j = 0; j < src.size(); ++j) dst[j] = src[j] * inv;
    }
  }
  return out;
}

ModularityScore modularity(std::span<const Edge> edges, std::span<const std::size_t> labels) {
  const auto simple = simple_undirected(edges);
  if (simple.empty()) throw InvalidInput("modularity: edge set is empty");
  std::size_t n_clusters = 0;
  for (const auto& e : simple) {
    if (static_cast<std::size_t>(e.v) >= labels.size()) {
      throw InvalidInput("modularity: vertex " + std::to_string(e.v) + " has no label");
    }
  }
  for (std::size_t l : labels) n_clusters = std::max(n_clusters, l + 1);

  std::vector<double> intra(n_clusters, 0.0);
  std::vector<double> degree(n_clusters, 0.0);
  for (const auto& e : simple) {
    const std::size_t cu = labels[static_cast<std::size_t>(e.u)];
    const std::size_t cv = labels[static_cast<std::size_t>(e.v)];
    degree[cu] += 1.0;
    degree[cv] += 1.0;
    if (cu == cv) intra[cu] += 1.0;
  }
  const double m = static_cast<double>(simple.size());
  double q = 0.0;
  for (std::size_t c = 0; c < n_clusters; ++c) {
    const double a = degree[c] / (2.0 * m);
    q += intra[c] / m - a * a;
  }
  return {q, simple.size()};
}

std::uint64_t run_seed(std::uint64_t base, std::size_t run) {
  std::uint64_t z = base ^ (0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(run) + 1));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidInput("median: empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

ClusterExperiment cluster_embedding(const DenseBlock& x, std::span<const Edge> edges,
                                    const ClusterOptions& options) {
  if (options.runs == 0) throw InvalidInput("cluster_embedding: runs must be positive");
  ClusterExperiment out;
  out.runs.resize(options.runs);
  out.scores.resize(options.runs);
  std::vector<std::exception_ptr> errors(options.runs);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < options.runs; r = next++) {
      try {
        out.runs[r] = kmeans(x, options.k, options.max_iters, run_seed(options.seed, r));
        out.scores[r] = modularity(edges, out.runs[r].labels).q;
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min(resolve_threads(options.threads), options.runs);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  out.median_modularity = median(out.scores);
  return out;
}

ClusterExperiment cluster_experiment(std::span<const Edge> edges, Index n_vertices,
                                     const SpectralFunction& f, const EmbedConfig& cfg,
                                     const ClusterOptions& options, const ExecutionContext& ctx) {
  const SparseMatrix s = normalized_adjacency(edges, n_vertices);
  const auto omega = sample_projection(static_cast<std::size_t>(n_vertices), cfg.d, cfg.seed);
  const auto embedding = fast_embed_cascaded(s, f, cfg, omega, ctx);
  return cluster_embedding(embedding.values, edges, options);
}

}  // namespace csemb
