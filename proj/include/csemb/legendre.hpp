#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "csemb/spectral_function.hpp"

namespace csemb {

/// p(r, x) through the three-term recursion
///   p(r, x) = (2 - 1/r) x p(r-1, x) - (1 - 1/r) p(r-2, x),
/// p(0, x) = 1, p(1, x) = x. Throws InvalidInput for |x| > 1.
double legendre_eval(std::size_t r, double x);

/// Coefficients a(0..L) of f~_L(x) = sum_r a(r) p(r, x).
class LegendreExpansion {
 public:
  LegendreExpansion() : coeffs_{0.0} {}
  explicit LegendreExpansion(std::vector<double> coeffs);

  std::size_t order() const noexcept { return coeffs_.size() - 1; }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  double operator[](std::size_t r) const { return coeffs_[r]; }

  friend bool operator==(const LegendreExpansion&, const LegendreExpansion&) = default;

 private:
  std::vector<double> coeffs_;
};

/// Weight the least-squares fit is taken against. `chebyshev` minimises
/// the 1/sqrt(1 - x^2) weighted error and re-expresses the result in the
/// Legendre basis; it has no accuracy guarantees attached.
enum class CoefficientWeight { legendre, chebyshev };

struct QuadratureSpec {
  std::size_t nodes_per_panel = 64;
  /// Uniform panels laid over [-1, 1] before splitting at breakpoints.
  /// Zero picks a count from the expansion order.
  std::size_t base_panels = 0;
  CoefficientWeight weight = CoefficientWeight::legendre;
};

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(std::size_t n);

/// Composite Gauss-Legendre rule over [-1, 1] with panel edges at the
/// uniform cuts and at every breakpoint.
QuadratureRule composite_rule(std::span<const double> breakpoints, std::size_t order,
                              const QuadratureSpec& spec = {});

/// a(r) = (r + 1/2) * integral_{-1}^{1} p(r, x) f(x) dx, r = 0..L.
/// Throws InvalidInput if f is non-finite at a quadrature node.
LegendreExpansion legendre_coefficients(const SpectralFunction& f, std::size_t order,
                                        const QuadratureSpec& spec = {});

/// sum_r a(r) p(r, x), accumulated along the same recursion the matrix
/// iteration uses.
double expansion_eval(const LegendreExpansion& e, double x);

struct ApproximationReport {
  /// max |f - f~_L| over the probe grid.
  double delta_sup = 0.0;
  /// (1/2) integral |f - f~_L|^2 dx.
  double delta_l2 = 0.0;
  std::size_t grid_size = 0;
};

inline constexpr std::size_t kDefaultReportGrid = 10001;

/// Sup error over a uniform grid of `grid_size` points (endpoints included)
/// plus each breakpoint and its neighbours at distance 1e-9; L2 error by
/// composite quadrature.
ApproximationReport approximation_report(const SpectralFunction& f, const LegendreExpansion& e,
                                         std::size_t grid_size = kDefaultReportGrid);

}  // namespace csemb
