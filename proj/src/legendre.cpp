#include "csemb/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "csemb/error.hpp"

namespace csemb {

namespace {

void check_domain(double x) {
  if (!(std::abs(x) <= 1.0)) {
    throw InvalidInput("Legendre argument " + std::to_string(x) + " outside [-1, 1]");
  }
}

std::size_t auto_panels(std::size_t order) { return std::max<std::size_t>(2, (order + 8) / 8); }

// Panel edges over [lo, hi]: uniform cuts plus the given interior points.
std::vector<double> panel_edges(double lo, double hi, std::size_t uniform,
                                std::span<const double> extra) {
  std::vector<double> edges;
  edges.reserve(uniform + extra.size() + 1);
  for (std::size_t i = 0; i <= uniform; ++i) {
    edges.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(uniform));
  }
  edges.front() = lo;
  edges.back() = hi;
  for (double p : extra) {
    if (p > lo && p < hi) edges.push_back(p);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

QuadratureRule composite_over(std::span<const double> edges, std::size_t nodes_per_panel) {
  const QuadratureRule base = gauss_legendre(nodes_per_panel);
  QuadratureRule rule;
  rule.nodes.reserve((edges.size() - 1) * nodes_per_panel);
  rule.weights.reserve(rule.nodes.capacity());
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    const double mid = 0.5 * (edges[p + 1] + edges[p]);
    for (std::size_t k = 0; k < base.nodes.size(); ++k) {
      rule.nodes.push_back(mid + half * base.nodes[k]);
      rule.weights.push_back(half * base.weights[k]);
    }
  }
  return rule;
}

// a(r) = (r + 1/2) sum_k w_k p(r, x_k) g_k for samples g_k = g(x_k).
LegendreExpansion project(const QuadratureRule& rule, std::span<const double> samples,
                          std::size_t order) {
  std::vector<double> coeffs(order + 1, 0.0);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double x = rule.nodes[k];
    const double wg = rule.weights[k] * samples[k];
    double prev = 0.0;
    double curr = 1.0;
    coeffs[0] += wg;
    for (std::size_t r = 1; r <= order; ++r) {
      const double inv = 1.0 / static_cast<double>(r);
      const double next = (2.0 - inv) * x * curr - (1.0 - inv) * prev;
      prev = curr;
      curr = next;
      coeffs[r] += wg * curr;
    }
  }
  for (std::size_t r = 0; r <= order; ++r) coeffs[r] *= static_cast<double>(r) + 0.5;
  return LegendreExpansion(std::move(coeffs));
}

std::vector<double> sample(const SpectralFunction& f, std::span<const double> nodes) {
  std::vector<double> values(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    values[k] = f(nodes[k]);
    if (!std::isfinite(values[k])) {
      throw InvalidInput("function " + f.describe() + " is not finite at x = " +
                         std::to_string(nodes[k]));
    }
  }
  return values;
}

LegendreExpansion chebyshev_weighted(const SpectralFunction& f, std::size_t order,
                                     const QuadratureSpec& spec) {
  // Chebyshev coefficients c_k = (2/pi) int_0^pi f(cos t) cos(k t) dt, with
  // panel edges at the angles of f's breakpoints.
  const std::size_t uniform = spec.base_panels ? spec.base_panels : auto_panels(order);
  std::vector<double> angles;
  for (double p : f.breakpoints()) angles.push_back(std::acos(p));
  const auto edges = panel_edges(0.0, std::numbers::pi, uniform, angles);
  const QuadratureRule theta_rule = composite_over(edges, spec.nodes_per_panel);
  std::vector<double> cheb(order + 1, 0.0);
  for (std::size_t k = 0; k < theta_rule.nodes.size(); ++k) {
    const double t = theta_rule.nodes[k];
    const double fx = f(std::cos(t));
    if (!std::isfinite(fx)) {
      throw InvalidInput("function " + f.describe() + " is not finite at x = " +
                         std::to_string(std::cos(t)));
    }
    for (std::size_t j = 0; j <= order; ++j) {
      cheb[j] += theta_rule.weights[k] * fx * std::cos(static_cast<double>(j) * t);
    }
  }
  for (double& c : cheb) c *= 2.0 / std::numbers::pi;
  cheb[0] *= 0.5;

  // Re-express the Chebyshev series in the Legendre basis. The integrand
  // is a polynomial, so no breakpoints are needed.
  const QuadratureRule rule = composite_rule({}, order, spec);
  std::vector<double> values(rule.nodes.size());
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double x = rule.nodes[k];
    double t_prev = 1.0;
    double t_curr = x;
    double acc = cheb[0];
    if (order >= 1) acc += cheb[1] * x;
    for (std::size_t j = 2; j <= order; ++j) {
      const double t_next = 2.0 * x * t_curr - t_prev;
      t_prev = t_curr;
      t_curr = t_next;
      acc += cheb[j] * t_curr;
    }
    values[k] = acc;
  }
  return project(rule, values, order);
}

}  // namespace

double legendre_eval(std::size_t r, double x) {
  check_domain(x);
  if (r == 0) return 1.0;
  double prev = 1.0;
  double curr = x;
  for (std::size_t k = 2; k <= r; ++k) {
    const double inv = 1.0 / static_cast<double>(k);
    const double next = (2.0 - inv) * x * curr - (1.0 - inv) * prev;
    prev = curr;
    curr = next;
  }
  return curr;
}

LegendreExpansion::LegendreExpansion(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw InvalidInput("LegendreExpansion needs at least one coefficient");
  if (!std::all_of(coeffs_.begin(), coeffs_.end(), [](double c) { return std::isfinite(c); })) {
    throw InvalidInput("LegendreExpansion coefficients must be finite");
  }
}

QuadratureRule gauss_legendre(std::size_t n) {
  if (n == 0) throw InvalidInput("gauss_legendre: need at least one node");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    // Newton iteration from the standard asymptotic guess.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    {
      // Derivative at the converged node.
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule composite_rule(std::span<const double> breakpoints, std::size_t order,
                              const QuadratureSpec& spec) {
  if (spec.nodes_per_panel == 0) throw InvalidInput("quadrature needs at least one node per panel");
  const std::size_t uniform = spec.base_panels ? spec.base_panels : auto_panels(order);
  const auto edges = panel_edges(-1.0, 1.0, uniform, breakpoints);
  return composite_over(edges, spec.nodes_per_panel);
}

LegendreExpansion legendre_coefficients(const SpectralFunction& f, std::size_t order,
                                        const QuadratureSpec& spec) {
  LegendreExpansion fit;
  if (spec.weight == CoefficientWeight::chebyshev) {
    fit = chebyshev_weighted(f, order, spec);
  } else {
    const QuadratureRule rule = composite_rule(f.breakpoints(), order, spec);
    fit = project(rule, sample(f, rule.nodes), order);
  }
  if (f.symmetry() == SpectralFunction::Symmetry::none) return fit;
  // Zero the terms the symmetry rules out instead of keeping quadrature
  // noise, so e.g. an odd function maps a zero matrix to exactly zero.
  std::vector<double> coeffs(fit.coeffs().begin(), fit.coeffs().end());
  const std::size_t vanishing = f.symmetry() == SpectralFunction::Symmetry::odd ? 0 : 1;
  for (std::size_t r = vanishing; r <= order; r += 2) coeffs[r] = 0.0;
  return LegendreExpansion(std::move(coeffs));
}

double expansion_eval(const LegendreExpansion& e, double x) {
  check_domain(x);
  const auto a = e.coeffs();
  double prev = 0.0;
  double curr = 1.0;
  double acc = a[0] * curr;
  for (std::size_t r = 1; r < a.size(); ++r) {
    const double inv = 1.0 / static_cast<double>(r);
    const double next = (2.0 - inv) * x * curr - (1.0 - inv) * prev;
    prev = curr;
    curr = next;
    acc += a[r] * curr;
  }
  return acc;
}

ApproximationReport approximation_report(const SpectralFunction& f, const LegendreExpansion& e,
                                         std::size_t grid_size) {
  if (grid_size < 2) throw InvalidInput("approximation_report: grid_size must be at least 2");
  const auto breakpoints = f.breakpoints();
  std::vector<double> probes;
  probes.reserve(grid_size + 3 * breakpoints.size());
  for (std::size_t i = 0; i < grid_size; ++i) {
    probes.push_back(-1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(grid_size - 1));
  }
  probes.back() = 1.0;
  for (double p : breakpoints) {
    probes.push_back(std::max(-1.0, p - 1e-9));
    probes.push_back(p);
    probes.push_back(std::min(1.0, p + 1e-9));
  }

  ApproximationReport report;
  report.grid_size = probes.size();
  for (double x : probes) {
    report.delta_sup = std::max(report.delta_sup, std::abs(f(x) - expansion_eval(e, x)));
  }

  const QuadratureRule rule = composite_rule(breakpoints, e.order());
  double integral = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double diff = f(rule.nodes[k]) - expansion_eval(e, rule.nodes[k]);
    integral += rule.weights[k] * diff * diff;
  }
  report.delta_l2 = 0.5 * integral;
  return report;
}

}  // namespace csemb
