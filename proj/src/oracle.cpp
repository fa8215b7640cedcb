#include "csemb/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <unordered_set>

#include "csemb/error.hpp"
#include "csemb/legendre.hpp"

namespace csemb::oracle {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> view(const DenseBlock& b) {
  return {b.values().data(), static_cast<Eigen::Index>(b.rows()),
          static_cast<Eigen::Index>(b.cols())};
}

DenseBlock to_block(const Eigen::MatrixXd& m) {
  DenseBlock out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = m(i, j);
    }
  }
  return out;
}

double row_distance(const DenseBlock& x, std::size_t i, std::size_t j) {
  const auto a = x.row(i);
  const auto b = x.row(j);
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

}  // namespace

DenseBlock ExactEmbedding::function_matrix() const {
  const auto v = view(eigenvectors);
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(weights.data(),
                                                              static_cast<Eigen::Index>(weights.size()));
  const Eigen::MatrixXd f = v * w.asDiagonal() * v.transpose();
  return to_block(f);
}

DenseBlock ExactEmbedding::compact() const {
  std::vector<std::size_t> keep;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l] != 0.0) keep.push_back(l);
  }
  DenseBlock out(embedding.rows(), keep.size());
  for (std::size_t i = 0; i < embedding.rows(); ++i) {
    for (std::size_t c = 0; c < keep.size(); ++c) out(i, c) = embedding(i, keep[c]);
  }
  return out;
}

ExactEmbedding exact_embedding(const DenseBlock& s, const SpectralFunction& f, std::size_t cap) {
  if (s.rows() != s.cols()) throw InvalidInput("exact_embedding: matrix must be square");
  if (s.rows() > cap) {
    throw CapExceeded("exact_embedding: n = " + std::to_string(s.rows()) +
                      " exceeds the dense oracle cap of " + std::to_string(cap) +
                      "; the exact path is for desk-scale matrices only");
  }
  const auto n = static_cast<Eigen::Index>(s.rows());
  const Eigen::MatrixXd dense = view(s);
  if ((dense - dense.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, dense.cwiseAbs().maxCoeff())) {
    throw InvalidInput("exact_embedding: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
  if (solver.info() != Eigen::Success) throw NumericFailure("exact_embedding: eigensolver failed");

  // Eigen returns ascending order; flip to descending.
  ExactEmbedding out;
  out.eigenvalues.resize(static_cast<std::size_t>(n));
  out.weights.resize(static_cast<std::size_t>(n));
  out.eigenvectors = DenseBlock(s.rows(), s.rows());
  out.embedding = DenseBlock(s.rows(), s.rows());
  const double scale = std::max(1.0, solver.eigenvalues().cwiseAbs().maxCoeff());
  for (Eigen::Index l = 0; l < n; ++l) {
    const Eigen::Index src = n - 1 - l;
    const double lambda = solver.eigenvalues()(src);
    const Eigen::VectorXd v = solver.eigenvectors().col(src);
    const double residual = (dense * v - lambda * v).norm();
    out.max_residual = std::max(out.max_residual, residual);
    const auto col = static_cast<std::size_t>(l);
    out.eigenvalues[col] = lambda;
    out.weights[col] = f(lambda);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto row = static_cast<std::size_t>(i);
      out.eigenvectors(row, col) = v(i);
      out.embedding(row, col) = out.weights[col] * v(i);
    }
  }
  if (out.max_residual > 1e-8 * scale) {
    throw NumericFailure("exact_embedding: eigenpair residual " + std::to_string(out.max_residual) +
                         " exceeds tolerance");
  }
  return out;
}

Correlation normalized_correlation(const DenseBlock& x, std::size_t i, std::size_t j) {
  if (i >= x.rows() || j >= x.rows()) throw InvalidInput("normalized_correlation: row out of range");
  const auto a = x.row(i);
  const auto b = x.row(j);
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) return {0.0, true};
  return {dot / (std::sqrt(na) * std::sqrt(nb)), false};
}

std::array<double, 7> percentiles(std::vector<double>& values) {
  std::array<double, 7> out{};
  if (values.empty()) return out;
  std::sort(values.begin(), values.end());
  const double last = static_cast<double>(values.size() - 1);
  for (std::size_t p = 0; p < kPercentileLevels.size(); ++p) {
    const double pos = kPercentileLevels[p] / 100.0 * last;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double t = pos - static_cast<double>(lo);
    out[p] = values[lo] + t * (values[hi] - values[lo]);
  }
  return out;
}

double DistortionReport::fraction_within(double tolerance) const {
  if (deviations.empty()) return 0.0;
  const auto inside = std::count_if(deviations.begin(), deviations.end(),
                                    [&](double v) { return std::abs(v) <= tolerance; });
  return static_cast<double>(inside) / static_cast<double>(deviations.size());
}

std::size_t default_pair_count(std::size_t n) {
  const std::size_t total = n < 2 ? 0 : n * (n - 1) / 2;
  return std::min<std::size_t>(100000, total);
}

std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t n, std::size_t n_pairs,
                                                              std::uint64_t seed) {
  const std::uint64_t total = n < 2 ? 0 : static_cast<std::uint64_t>(n) * (n - 1) / 2;
  std::vector<std::uint64_t> picks;
  if (n_pairs >= total) {
    picks.resize(total);
    for (std::uint64_t k = 0; k < total; ++k) picks[k] = k;
  } else {
    // Floyd's algorithm: uniform subset without replacement.
    std::mt19937_64 rng(seed);
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(n_pairs * 2);
    for (std::uint64_t j = total - n_pairs; j < total; ++j) {
      const std::uint64_t t = std::uniform_int_distribution<std::uint64_t>(0, j)(rng);
      chosen.insert(chosen.contains(t) ? j : t);
    }
    picks.assign(chosen.begin(), chosen.end());
    std::sort(picks.begin(), picks.end());
  }
  // Pair index k enumerates (0,1), (0,2), ..., (0,n-1), (1,2), ...
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(picks.size());
  std::size_t row = 0;
  std::uint64_t row_start = 0;
  for (std::uint64_t k : picks) {
    while (k >= row_start + (n - 1 - row)) {
      row_start += n - 1 - row;
      ++row;
    }
    pairs.emplace_back(row, row + 1 + static_cast<std::size_t>(k - row_start));
  }
  return pairs;
}

DistortionReport distortion_percentiles(const DenseBlock& exact, const DenseBlock& approx,
                                        std::size_t n_pairs, std::uint64_t seed,
                                        DistortionReport::Mode mode, double bin_width) {
  if (exact.rows() != approx.rows()) {
    throw InvalidInput("distortion_percentiles: exact has " + std::to_string(exact.rows()) +
                       " rows, approx has " + std::to_string(approx.rows()));
  }
  if (!(bin_width > 0.0)) throw InvalidInput("distortion_percentiles: bin width must be positive");
  const auto pairs = sample_pairs(exact.rows(), n_pairs, seed);

  DistortionReport report;
  report.mode = mode;
  report.pair_sample_size = pairs.size();
  report.deviations.reserve(pairs.size());
  std::map<long, std::vector<double>> binned;
  for (const auto& [i, j] : pairs) {
    const auto e = normalized_correlation(exact, i, j);
    const auto a = normalized_correlation(approx, i, j);
    if (e.degenerate || a.degenerate) ++report.degenerate_pairs;
    report.deviations.push_back(a.value - e.value);
    if (mode == DistortionReport::Mode::calibration_curve) {
      binned[std::lround(e.value / bin_width)].push_back(a.value);
    }
  }
  std::vector<double> sorted = report.deviations;
  report.percentiles = percentiles(sorted);
  for (auto& [index, values] : binned) {
    CalibrationBin bin;
    bin.center = static_cast<double>(index) * bin_width;
    bin.count = values.size();
    bin.approx = percentiles(values);
    report.bins.push_back(bin);
  }
  return report;
}

std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (trial + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

AuditResult distortion_bound_audit(const DenseBlock& s, const SpectralFunction& f, const EmbedConfig& cfg,
                                   std::size_t trials, std::size_t cap) {
  cfg.validate();
  const auto exact = exact_embedding(s, f, cap);
  const auto stage = cascade_stage_expansion(f, cfg);

  AuditResult result;
  for (std::size_t l = 0; l < exact.size(); ++l) {
    // Eigenvalues of a matrix normalised to unit norm may overshoot by an ulp.
    if (std::abs(exact.eigenvalues[l]) > 1.0 + 1e-12) {
      throw InvalidInput("distortion_bound_audit: spectrum must lie in [-1, 1]");
    }
    const double lambda = std::clamp(exact.eigenvalues[l], -1.0, 1.0);
    const double effective = std::pow(expansion_eval(stage, lambda), static_cast<double>(cfg.b));
    result.delta = std::max(result.delta, std::abs(exact.weights[l] - effective));
  }

  const std::size_t n = s.rows();
  std::vector<double> exact_dist;
  exact_dist.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) exact_dist.push_back(row_distance(exact.embedding, i, j));
  }

  const SparseMatrix sparse = SparseMatrix::from_dense(s);
  const double slack = std::sqrt(2.0) * result.delta;
  const double lo_factor = std::sqrt(1.0 - cfg.epsilon);
  const double hi_factor = std::sqrt(1.0 + cfg.epsilon);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto omega = sample_projection(n, cfg.d, trial_seed(cfg.seed, t));
    const auto approx = fast_embed_cascaded(sparse, f, cfg, omega);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j, ++k) {
        const double target = exact_dist[k];
        const double got = row_distance(approx.values, i, j);
        const double lo = lo_factor * (target - slack);
        const double hi = hi_factor * (target + slack);
        const double tol = 1e-12 * std::max(1.0, target);
        if (got < lo - tol || got > hi + tol) ++result.violations;
        ++result.checks;
      }
    }
  }
  result.violation_rate =
      result.checks ? static_cast<double>(result.violations) / static_cast<double>(result.checks) : 0.0;
  return result;
}

}  // namespace csemb::oracle
