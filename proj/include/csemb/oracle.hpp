#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "csemb/embed.hpp"
#include "csemb/sparse_matrix.hpp"
#include "csemb/spectral_function.hpp"

namespace csemb::oracle {

inline constexpr std::size_t kDefaultOracleCap = 3000;

/// Full eigendecomposition of a small symmetric matrix and the spectral
/// embedding it induces. Eigenpairs are sorted by descending eigenvalue.
struct ExactEmbedding {
  /// Column l is f(lambda_l) v_l.
  DenseBlock embedding;
  std::vector<double> eigenvalues;
  /// Column l is the unit eigenvector v_l.
  DenseBlock eigenvectors;
  /// f(lambda_l).
  std::vector<double> weights;
  /// max_l |S v_l - lambda_l v_l|.
  double max_residual = 0.0;

  std::size_t size() const noexcept { return eigenvalues.size(); }
  /// f(S) = sum_l f(lambda_l) v_l v_l^T.
  DenseBlock function_matrix() const;
  /// Only the columns with non-zero weight.
  DenseBlock compact() const;
};

/// Throws CapExceeded above `cap` rows and NumericFailure when an eigenpair
/// residual exceeds 1e-8 (relative to max(1, ||S||)).
ExactEmbedding exact_embedding(const DenseBlock& s, const SpectralFunction& f,
                               std::size_t cap = kDefaultOracleCap);

struct Correlation {
  double value = 0.0;
  /// Set when either row is zero; value is then 0.
  bool degenerate = false;
};

/// Cosine similarity between rows i and j.
Correlation normalized_correlation(const DenseBlock& x, std::size_t i, std::size_t j);

inline constexpr std::array<double, 7> kPercentileLevels{1, 5, 25, 50, 75, 95, 99};

/// Linear interpolation between order statistics (the common "linear"
/// percentile definition). `values` is sorted in place.
std::array<double, 7> percentiles(std::vector<double>& values);

struct CalibrationBin {
  double center = 0.0;
  std::size_t count = 0;
  /// Percentiles of the approximate correlation for pairs in this bin.
  std::array<double, 7> approx{};
};

struct DistortionReport {
  enum class Mode { deviation_vs_exact, calibration_curve };

  Mode mode = Mode::deviation_vs_exact;
  std::size_t pair_sample_size = 0;
  /// Pairs where either embedding had a zero row.
  std::size_t degenerate_pairs = 0;
  /// Percentiles of approx - exact correlation (both modes).
  std::array<double, 7> percentiles{};
  /// Per-pair deviations in sampling order.
  std::vector<double> deviations;
  /// Populated in calibration mode, ordered by bin centre.
  std::vector<CalibrationBin> bins;

  double fraction_within(double tolerance) const;
};

/// Pair indices sampled uniformly without replacement; every pair when
/// `n_pairs` reaches n(n-1)/2. Result is sorted.
std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t n, std::size_t n_pairs,
                                                              std::uint64_t seed);

/// Default pair budget: min(1e5, n(n-1)/2).
std::size_t default_pair_count(std::size_t n);

/// Compares normalized correlations of the same row pairs in both blocks.
/// Calibration mode additionally bins pairs by exact correlation into bins
/// of width `bin_width` centred on multiples of it.
DistortionReport distortion_percentiles(const DenseBlock& exact, const DenseBlock& approx,
                                        std::size_t n_pairs, std::uint64_t seed,
                                        DistortionReport::Mode mode =
                                            DistortionReport::Mode::deviation_vs_exact,
                                        double bin_width = 0.1);

struct AuditResult {
  double violation_rate = 0.0;
  std::size_t violations = 0;
  std::size_t checks = 0;
  /// max_l |f(lambda_l) - f~(lambda_l)| for the effective polynomial.
  double delta = 0.0;
};

/// Checks sqrt(1-eps)(|u-v| - delta sqrt 2) <= |g(u) - g(v)| <=
/// sqrt(1+eps)(|u-v| + delta sqrt 2) for every row pair over `trials`
/// fresh projections.
AuditResult distortion_bound_audit(const DenseBlock& s, const SpectralFunction& f, const EmbedConfig& cfg,
                                   std::size_t trials, std::size_t cap = kDefaultOracleCap);

/// Seed of the t-th independent trial derived from a base seed.
std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial);

}  // namespace csemb::oracle
