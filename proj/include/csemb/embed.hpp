#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "csemb/legendre.hpp"
#include "csemb/sparse_matrix.hpp"
#include "csemb/spectral_function.hpp"

namespace csemb {

struct EmbedConfig {
  /// Total polynomial order, i.e. sparse products per projection column.
  std::size_t L = 180;
  /// Cascade factor; each of the b stages uses order L / b.
  std::size_t b = 1;
  std::size_t d = 80;
  std::uint64_t seed = 0;
  /// Johnson-Lindenstrauss distortion target and failure exponent.
  double epsilon = 0.5;
  double beta = 1.0;
  std::size_t norm_iters = 20;
  /// Power iteration uses ceil(norm_vectors_factor * ln n) start vectors.
  double norm_vectors_factor = 6.0;
  double norm_safety = 1.01;
  CoefficientWeight weight = CoefficientWeight::legendre;

  /// Throws InvalidInput unless L >= 1, b >= 1, b | L, d >= 1,
  /// 0 < epsilon < 1, beta > 0.
  void validate() const;
};

struct IterationRecord {
  std::size_t stage = 0;
  std::size_t r = 0;
  /// max |Q(r)| over the whole block.
  double max_abs = 0.0;
};

/// Execution knobs that never change results.
struct ExecutionContext {
  /// Worker count; 0 reads CSEMB_THREADS, falling back to the hardware.
  std::size_t threads = 1;
  SpmvCounter* counter = nullptr;
  /// Called once per Legendre step, in order, after the stage completes.
  std::function<void(const IterationRecord&)> on_iteration;
};

/// Resolves a requested worker count (0 = environment / hardware).
std::size_t resolve_threads(std::size_t requested);

struct EmbeddingMatrix {
  DenseBlock values;
  /// Optional vertex id per row; empty means row i is vertex i.
  std::vector<std::int64_t> row_labels;
  EmbedConfig config;
  std::string function;

  std::size_t rows() const noexcept { return values.rows(); }
  std::size_t dim() const noexcept { return values.cols(); }
};

/// Smallest integer d with d > (4 + 2 beta) ln n / (eps^2/2 - eps^3/3).
std::size_t jl_dimension(std::size_t n, double epsilon, double beta);

/// ceil(6 ln n), at least 1.
std::size_t default_dimension(std::size_t n);

/// Entry (i, j) of the projection matrix: +-1/sqrt(d), a pure function of
/// (seed, i, j).
double projection_entry(std::uint64_t seed, std::size_t i, std::size_t j, std::size_t d);

/// n x d matrix of independent +-1/sqrt(d) signs.
DenseBlock sample_projection(std::size_t n, std::size_t d, std::uint64_t seed);

/// Power iteration from ceil(norm_vectors_factor ln n) random unit vectors,
/// norm_iters steps each. Returns norm_safety times the largest Rayleigh
/// quotient magnitude seen. S must be symmetric.
double estimate_spectral_norm(const SparseMatrix& s, const EmbedConfig& cfg);

/// f~(S) Omega for the given expansion using exactly `order` sparse products
/// per column. S must be symmetric with spectrum in [-1, 1]; a non-finite
/// iterate raises NumericFailure.
DenseBlock apply_expansion(const SparseMatrix& s, const LegendreExpansion& expansion,
                           const DenseBlock& omega, const ExecutionContext& ctx = {},
                           std::size_t stage = 0);

/// Legendre-expansion embedding of f at order L.
EmbeddingMatrix fast_embed_eig(const SparseMatrix& s, const SpectralFunction& f, std::size_t L,
                               const DenseBlock& omega, const ExecutionContext& ctx = {});

EmbeddingMatrix fast_embed_eig(const SparseMatrix& s, const LegendreExpansion& expansion,
                               const DenseBlock& omega, const ExecutionContext& ctx = {});

/// Expansion of f^(1/b) at order L/b used by each cascade stage.
LegendreExpansion cascade_stage_expansion(const SpectralFunction& f, const EmbedConfig& cfg);

/// (g~_{L/b}(S))^b Omega with g = f^(1/b). Stage 1 multiplies Omega, every
/// later stage multiplies the previous stage's output.
EmbeddingMatrix fast_embed_cascaded(const SparseMatrix& s, const SpectralFunction& f,
                                    const EmbedConfig& cfg, const DenseBlock& omega,
                                    const ExecutionContext& ctx = {});

struct GeneralEmbedding {
  /// Last m rows of the dilation embedding: one row per row of A.
  EmbeddingMatrix rows;
  /// First n rows: one row per column of A.
  EmbeddingMatrix cols;
};

/// Function fed to the symmetric algorithm for the dilation of a general
/// matrix: the odd extension of f, or the even extension when b is even.
SpectralFunction dilation_function(const SpectralFunction& f, std::size_t b);

/// Embeds rows and columns of a general m x n matrix A with ||A|| <= 1 by
/// running the cascade on dilate(A) with an (m + n) x d projection drawn
/// from cfg.seed.
GeneralEmbedding fast_embed_general(const SparseMatrix& a, const SpectralFunction& f,
                                    const EmbedConfig& cfg, const ExecutionContext& ctx = {});

}  // namespace csemb
