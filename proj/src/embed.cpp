#include "csemb/embed.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <string>
#include <thread>

#include "csemb/error.hpp"

namespace csemb {

namespace {

// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t i,
                                     std::uint64_t j) noexcept {
  std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ull * (stream + 1));
  h = mix64(h ^ (i + 0x632be59bd9b4e019ull));
  return mix64(h ^ (j * 0x9e3779b97f4a7c15ull + 0x85157af5ull));
}

double unit_uniform(std::uint64_t bits) noexcept {
  // 53 random bits in (0, 1).
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

constexpr std::uint64_t kStreamProjection = 0;
constexpr std::uint64_t kStreamNormStart = 1;

struct ColumnRange {
  std::size_t first;
  std::size_t count;
};

std::vector<ColumnRange> partition_columns(std::size_t d, std::size_t workers) {
  const std::size_t groups = std::max<std::size_t>(1, std::min(workers, d));
  std::vector<ColumnRange> ranges;
  std::size_t first = 0;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t count = d / groups + (g < d % groups ? 1 : 0);
    ranges.push_back({first, count});
    first += count;
  }
  return ranges;
}

}  // namespace

void EmbedConfig::validate() const {
  if (L < 1) throw InvalidInput("EmbedConfig: L must be at least 1");
  if (b < 1) throw InvalidInput("EmbedConfig: b must be at least 1");
  if (L % b != 0) {
    throw InvalidInput("EmbedConfig: cascade factor b = " + std::to_string(b) +
                       " does not divide L = " + std::to_string(L));
  }
  if (d < 1) throw InvalidInput("EmbedConfig: d must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidInput("EmbedConfig: epsilon must be in (0, 1)");
  if (!(beta > 0.0)) throw InvalidInput("EmbedConfig: beta must be positive");
  if (norm_iters < 1) throw InvalidInput("EmbedConfig: norm_iters must be at least 1");
  if (!(norm_vectors_factor > 0.0)) throw InvalidInput("EmbedConfig: norm_vectors_factor must be positive");
  if (!(norm_safety >= 1.0)) throw InvalidInput("EmbedConfig: norm_safety must be at least 1");
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CSEMB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::size_t jl_dimension(std::size_t n, double epsilon, double beta) {
  if (n < 2) throw InvalidInput("jl_dimension: n must be at least 2");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidInput("jl_dimension: epsilon must be in (0, 1)");
  if (!(beta > 0.0)) throw InvalidInput("jl_dimension: beta must be positive");
  const double denom = epsilon * epsilon / 2.0 - epsilon * epsilon * epsilon / 3.0;
  const double bound = (4.0 + 2.0 * beta) * std::log(static_cast<double>(n)) / denom;
  return static_cast<std::size_t>(std::floor(bound)) + 1;
}

std::size_t default_dimension(std::size_t n) {
  if (n < 2) return 1;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(6.0 * std::log(static_cast<double>(n)))));
}

double projection_entry(std::uint64_t seed, std::size_t i, std::size_t j, std::size_t d) {
  const double magnitude = 1.0 / std::sqrt(static_cast<double>(d));
  return (counter_hash(seed, kStreamProjection, i, j) >> 63) ? magnitude : -magnitude;
}

DenseBlock sample_projection(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw InvalidInput("sample_projection: n and d must be positive");
  DenseBlock omega(n, d);
  const double magnitude = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      omega(i, j) = (counter_hash(seed, kStreamProjection, i, j) >> 63) ? magnitude : -magnitude;
    }
  }
  return omega;
}

double estimate_spectral_norm(const SparseMatrix& s, const EmbedConfig& cfg) {
  if (s.rows() != s.cols()) throw InvalidInput("estimate_spectral_norm: matrix must be square");
  const auto n = static_cast<std::size_t>(s.rows());
  if (n == 0 || s.nnz() == 0) return 0.0;
  const auto vectors = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::ceil(cfg.norm_vectors_factor * std::log(static_cast<double>(n)))));

  // Gaussian starting vectors by Box-Muller over counter-based uniforms.
  DenseBlock x(n, vectors);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < vectors; ++c) {
      const double u1 = unit_uniform(counter_hash(cfg.seed, kStreamNormStart, i, 2 * c));
      const double u2 = unit_uniform(counter_hash(cfg.seed, kStreamNormStart, i, 2 * c + 1));
      x(i, c) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
  }
  std::vector<double> norms(vectors, 0.0);
  auto normalise = [&](DenseBlock& block) {
    std::fill(norms.begin(), norms.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < vectors; ++c) norms[c] += block(i, c) * block(i, c);
    }
    for (double& v : norms) v = std::sqrt(v);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < vectors; ++c) {
        block(i, c) = norms[c] > 0.0 ? block(i, c) / norms[c] : 0.0;
      }
    }
  };
  normalise(x);

  double best = 0.0;
  DenseBlock y(n, vectors);
  std::vector<double> quotients(vectors);
  for (std::size_t it = 0; it < cfg.norm_iters; ++it) {
    spmv_multi_into(s, x, y);
    std::fill(quotients.begin(), quotients.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < vectors; ++c) quotients[c] += x(i, c) * y(i, c);
    }
    for (double q : quotients) best = std::max(best, std::abs(q));
    normalise(y);
    std::swap(x, y);
  }
  return best * cfg.norm_safety;
}

DenseBlock apply_expansion(const SparseMatrix& s, const LegendreExpansion& expansion,
                           const DenseBlock& omega, const ExecutionContext& ctx,
                           std::size_t stage) {
  if (s.rows() != s.cols()) throw InvalidInput("apply_expansion: matrix must be square");
  if (static_cast<std::size_t>(s.cols()) != omega.rows()) {
    throw InvalidInput("apply_expansion: projection has " + std::to_string(omega.rows()) +
                       " rows, matrix has " + std::to_string(s.cols()));
  }
  const std::size_t n = omega.rows();
  const std::size_t d = omega.cols();
  const std::size_t order = expansion.order();
  const auto a = expansion.coeffs();

  const auto ranges = partition_columns(d, resolve_threads(ctx.threads));
  std::vector<std::vector<double>> peaks(ranges.size(), std::vector<double>(order + 1, 0.0));
  std::vector<std::exception_ptr> failures(ranges.size());
  std::atomic<bool> abort{false};
  DenseBlock result(n, d);

  auto run_group = [&](std::size_t g) {
    try {
      const auto [first, width] = ranges[g];
      DenseBlock curr = omega.column_slice(first, width);
      DenseBlock prev(n, width);
      DenseBlock next(n, width);
      DenseBlock acc(n, width);
      {
        auto src = curr.values();
        auto dst = acc.values();
        for (std::size_t k = 0; k < src.size(); ++k) dst[k] = a[0] * src[k];
      }
      peaks[g][0] = curr.max_abs();
      for (std::size_t r = 1; r <= order; ++r) {
        if (abort.load(std::memory_order_relaxed)) return;
        spmv_multi_into(s, curr, next, ctx.counter);
        const double inv = 1.0 / static_cast<double>(r);
        const double grow = 2.0 - inv;
        const double decay = 1.0 - inv;
        auto q_next = next.values();
        auto q_prev = prev.values();
        auto e = acc.values();
        double peak = 0.0;
        bool finite = true;
        for (std::size_t k = 0; k < q_next.size(); ++k) {
          const double q = grow * q_next[k] - decay * q_prev[k];
          q_next[k] = q;
          e[k] += a[r] * q;
          finite = finite && std::isfinite(q);
          peak = std::max(peak, std::abs(q));
        }
        peaks[g][r] = peak;
        if (!finite) {
          throw NumericFailure("Legendre recursion produced a non-finite iterate at r = " +
                               std::to_string(r) +
                               "; the spectrum of S is not inside [-1, 1], rescale it first");
        }
        // Q(r-2) <- Q(r-1), Q(r-1) <- Q(r); next becomes scratch.
        std::swap(prev, curr);
        std::swap(curr, next);
      }
      result.set_columns(first, acc);
    } catch (...) {
      failures[g] = std::current_exception();
      abort = true;
    }
  };

  if (ranges.size() == 1) {
    run_group(0);
  } else {
    std::vector<std::jthread> workers;
    workers.reserve(ranges.size());
    for (std::size_t g = 0; g < ranges.size(); ++g) workers.emplace_back(run_group, g);
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  if (ctx.on_iteration) {
    for (std::size_t r = 0; r <= order; ++r) {
      double peak = 0.0;
      for (const auto& group : peaks) peak = std::max(peak, group[r]);
      ctx.on_iteration(IterationRecord{stage, r, peak});
    }
  }
  return result;
}

EmbeddingMatrix fast_embed_eig(const SparseMatrix& s, const LegendreExpansion& expansion,
                               const DenseBlock& omega, const ExecutionContext& ctx) {
  EmbeddingMatrix out;
  out.values = apply_expansion(s, expansion, omega, ctx);
  out.config.L = expansion.order();
  out.config.b = 1;
  out.config.d = omega.cols();
  out.function = "legendre[" + std::to_string(expansion.order()) + "]";
  return out;
}

EmbeddingMatrix fast_embed_eig(const SparseMatrix& s, const SpectralFunction& f, std::size_t L,
                               const DenseBlock& omega, const ExecutionContext& ctx) {
  auto out = fast_embed_eig(s, legendre_coefficients(f, L), omega, ctx);
  out.function = f.describe();
  return out;
}

LegendreExpansion cascade_stage_expansion(const SpectralFunction& f, const EmbedConfig& cfg) {
  cfg.validate();
  const auto g = root_function(f, static_cast<int>(cfg.b));
  QuadratureSpec spec;
  spec.weight = cfg.weight;
  return legendre_coefficients(g, cfg.L / cfg.b, spec);
}

EmbeddingMatrix fast_embed_cascaded(const SparseMatrix& s, const SpectralFunction& f,
                                    const EmbedConfig& cfg, const DenseBlock& omega,
                                    const ExecutionContext& ctx) {
  const auto stage_expansion = cascade_stage_expansion(f, cfg);
  EmbeddingMatrix out;
  out.values = apply_expansion(s, stage_expansion, omega, ctx, 0);
  for (std::size_t stage = 1; stage < cfg.b; ++stage) {
    out.values = apply_expansion(s, stage_expansion, out.values, ctx, stage);
  }
  out.config = cfg;
  out.config.d = omega.cols();
  out.function = f.describe();
  return out;
}

SpectralFunction dilation_function(const SpectralFunction& f, std::size_t b) {
  return b % 2 == 0 ? even_extension(f) : odd_extension(f);
}

GeneralEmbedding fast_embed_general(const SparseMatrix& a, const SpectralFunction& f,
                                    const EmbedConfig& cfg, const ExecutionContext& ctx) {
  cfg.validate();
  const auto m = static_cast<std::size_t>(a.rows());
  const auto n = static_cast<std::size_t>(a.cols());
  const SparseMatrix s = dilate(a);
  const DenseBlock omega = sample_projection(m + n, cfg.d, cfg.seed);
  const auto all = fast_embed_cascaded(s, dilation_function(f, cfg.b), cfg, omega, ctx);

  GeneralEmbedding out;
  out.cols.values = all.values.row_slice(0, n);
  out.rows.values = all.values.row_slice(n, m);
  out.cols.config = out.rows.config = all.config;
  out.cols.function = out.rows.function = all.function;
  return out;
}

}  // namespace csemb
