#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "csemb/sparse_matrix.hpp"

namespace csemb {

/// A weighting function f applied to the spectrum of a matrix.
///
/// Evaluation runs x through an optional affine map, then through the
/// symmetry wrapper (odd or even extension of the base function about 0),
/// the base function itself, and finally an optional b-th root.
class SpectralFunction {
 public:
  enum class Kind { indicator_above, commute_time, identity, constant, polynomial, tabulated };
  enum class Symmetry { none, odd, even };

  /// 1{x >= threshold}, threshold in [-1, 1].
  static SpectralFunction indicator_above(double threshold);
  /// 1 / sqrt(1 - min(x, 1 - clip)), clip in (0, 1).
  static SpectralFunction commute_time(double clip = 1e-3);
  static SpectralFunction identity();
  static SpectralFunction constant(double value);
  /// sum_k coeffs[k] x^k.
  static SpectralFunction polynomial(std::vector<double> monomial_coeffs);
  /// Piecewise-linear interpolation of (xs, ys); xs strictly increasing in
  /// [-1, 1]. Held constant beyond the first and last knot.
  static SpectralFunction tabulated(std::vector<double> xs, std::vector<double> ys);
  /// Two columns `x,y` (comma or whitespace separated), `#` comments.
  static SpectralFunction read_table(const std::filesystem::path& path);

  /// CLI grammar: `indicator:<c>`, `commute:<eta>`, `identity`,
  /// `const:<c>`, `poly:<a0>,<a1>,...`, `table:<path>`.
  static SpectralFunction parse(std::string_view text);

  double operator()(double x) const;

  Kind kind() const noexcept { return kind_; }
  Symmetry symmetry() const noexcept { return symmetry_; }
  int root_power() const noexcept { return root_; }
  const AffineMap& affine() const noexcept { return affine_; }

  /// Points in (-1, 1) where the function or its slope may jump. Panel
  /// boundaries for quadrature and extra probe points for error reports.
  std::vector<double> breakpoints() const;

  /// Round-trippable description, e.g. `indicator:0.98|odd|root=2`.
  std::string describe() const;

  /// f(t(x)); composes with any map already present.
  SpectralFunction with_affine(const AffineMap& map) const;

 private:
  friend SpectralFunction odd_extension(const SpectralFunction& f);
  friend SpectralFunction even_extension(const SpectralFunction& f);
  friend SpectralFunction root_function(const SpectralFunction& f, int b);

  SpectralFunction() = default;
  double base(double y) const;

  Kind kind_ = Kind::identity;
  double param_ = 0.0;
  std::vector<double> xs_;
  std::vector<double> ys_;
  Symmetry symmetry_ = Symmetry::none;
  int root_ = 1;
  AffineMap affine_;
};

/// f'(x) = f(x) for x >= 0 and -f(-x) for x < 0.
SpectralFunction odd_extension(const SpectralFunction& f);

/// f(|x|). Used where an odd extension cannot take an even root.
SpectralFunction even_extension(const SpectralFunction& f);

/// Pointwise b-th root. Odd b takes the real root of negative values; even
/// b requires f >= 0, checked on the report grid, and throws otherwise.
SpectralFunction root_function(const SpectralFunction& f, int b);

}  // namespace csemb
