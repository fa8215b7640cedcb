#include "csemb/spectral_function.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "csemb/error.hpp"

namespace csemb {

namespace {

double parse_real(std::string_view token, std::string_view context) {
  while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
  while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || token.empty()) {
    throw InvalidInput("function '" + std::string(context) + "': '" + std::string(token) +
                       "' is not a number");
  }
  return value;
}

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

constexpr std::string_view kValidKinds =
    "indicator:<c>, commute:<eta>, identity, const:<c>, poly:<a0>,<a1>,..., table:<path>";

}  // namespace

SpectralFunction SpectralFunction::indicator_above(double threshold) {
  if (!(threshold >= -1.0 && threshold <= 1.0)) {
    throw InvalidInput("indicator threshold must lie in [-1, 1]");
  }
  SpectralFunction f;
  f.kind_ = Kind::indicator_above;
  f.param_ = threshold;
  return f;
}

SpectralFunction SpectralFunction::commute_time(double clip) {
  if (!(clip > 0.0 && clip < 1.0)) throw InvalidInput("commute-time clip must lie in (0, 1)");
  SpectralFunction f;
  f.kind_ = Kind::commute_time;
  f.param_ = clip;
  return f;
}

SpectralFunction SpectralFunction::identity() {
  SpectralFunction f;
  f.kind_ = Kind::identity;
  return f;
}

SpectralFunction SpectralFunction::constant(double value) {
  if (!std::isfinite(value)) throw InvalidInput("constant function value must be finite");
  SpectralFunction f;
  f.kind_ = Kind::constant;
  f.param_ = value;
  return f;
}

SpectralFunction SpectralFunction::polynomial(std::vector<double> monomial_coeffs) {
  if (monomial_coeffs.empty()) throw InvalidInput("polynomial needs at least one coefficient");
  if (!std::all_of(monomial_coeffs.begin(), monomial_coeffs.end(),
                   [](double c) { return std::isfinite(c); })) {
    throw InvalidInput("polynomial coefficients must be finite");
  }
  SpectralFunction f;
  f.kind_ = Kind::polynomial;
  f.ys_ = std::move(monomial_coeffs);
  return f;
}

SpectralFunction SpectralFunction::tabulated(std::vector<double> xs, std::vector<double> ys) {
  if (xs.empty() || xs.size() != ys.size()) {
    throw InvalidInput("tabulated function needs equally many x and y values");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] >= -1.0 && xs[i] <= 1.0)) throw InvalidInput("table x values must lie in [-1, 1]");
    if (i > 0 && !(xs[i] > xs[i - 1])) throw InvalidInput("table x values must strictly increase");
    if (!std::isfinite(ys[i])) throw InvalidInput("table y values must be finite");
  }
  SpectralFunction f;
  f.kind_ = Kind::tabulated;
  f.xs_ = std::move(xs);
  f.ys_ = std::move(ys);
  return f;
}

SpectralFunction SpectralFunction::read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open function table '" + path.string() + "'");
  std::vector<double> xs;
  std::vector<double> ys;
  std::string line;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    std::string first;
    if (!(row >> first) || first.front() == '#') continue;
    std::string second;
    if (!(row >> second)) throw InvalidInput("function table row needs two columns: " + line);
    xs.push_back(parse_real(first, path.string()));
    ys.push_back(parse_real(second, path.string()));
  }
  return tabulated(std::move(xs), std::move(ys));
}

SpectralFunction SpectralFunction::parse(std::string_view text) {
  const auto colon = text.find(':');
  const auto name = text.substr(0, colon);
  const auto arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  const bool has_arg = colon != std::string_view::npos;

  if (name == "identity" && !has_arg) return identity();
  if (name == "indicator" && has_arg) return indicator_above(parse_real(arg, text));
  if (name == "commute") return commute_time(has_arg ? parse_real(arg, text) : 1e-3);
  if (name == "const" && has_arg) return constant(parse_real(arg, text));
  if (name == "poly" && has_arg) {
    std::vector<double> coeffs;
    std::size_t start = 0;
    while (true) {
      const auto comma = arg.find(',', start);
      coeffs.push_back(parse_real(arg.substr(start, comma - start), text));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return polynomial(std::move(coeffs));
  }
  if (name == "table" && has_arg && !arg.empty()) return read_table(std::string(arg));
  throw InvalidInput("unknown function '" + std::string(text) + "'; valid kinds: " +
                     std::string(kValidKinds));
}

double SpectralFunction::base(double y) const {
  switch (kind_) {
    case Kind::indicator_above:
      return y >= param_ ? 1.0 : 0.0;
    case Kind::commute_time:
      return 1.0 / std::sqrt(1.0 - std::min(y, 1.0 - param_));
    case Kind::identity:
      return y;
    case Kind::constant:
      return param_;
    case Kind::polynomial: {
      double acc = 0.0;
      for (auto it = ys_.rbegin(); it != ys_.rend(); ++it) acc = acc * y + *it;
      return acc;
    }
    case Kind::tabulated: {
      if (y <= xs_.front()) return ys_.front();
      if (y >= xs_.back()) return ys_.back();
      const auto hi = static_cast<std::size_t>(
          std::upper_bound(xs_.begin(), xs_.end(), y) - xs_.begin());
      const std::size_t lo = hi - 1;
      const double t = (y - xs_[lo]) / (xs_[hi] - xs_[lo]);
      return ys_[lo] + t * (ys_[hi] - ys_[lo]);
    }
  }
  return 0.0;
}

double SpectralFunction::operator()(double x) const {
  double v = 0.0;
  switch (symmetry_) {
    case Symmetry::none:
      v = base(affine_(x));
      break;
    case Symmetry::odd:
      v = x >= 0.0 ? base(affine_(x)) : -base(affine_(-x));
      break;
    case Symmetry::even:
      v = base(affine_(std::abs(x)));
      break;
  }
  if (root_ == 1) return v;
  if (root_ % 2 == 0 && v < 0.0) {
    throw InvalidInput("even root of a negative function value at x = " + format_real(x));
  }
  if (root_ == 2) return std::sqrt(v);
  if (root_ == 3) return std::cbrt(v);
  const double magnitude = std::pow(std::abs(v), 1.0 / root_);
  return v < 0.0 ? -magnitude : magnitude;
}

std::vector<double> SpectralFunction::breakpoints() const {
  std::vector<double> base_points;
  switch (kind_) {
    case Kind::indicator_above:
      base_points.push_back(param_);
      break;
    case Kind::commute_time:
      base_points.push_back(1.0 - param_);
      break;
    case Kind::tabulated:
      base_points = xs_;
      break;
    default:
      break;
  }
  std::vector<double> points;
  for (double y : base_points) {
    const double x = (y - affine_.offset) / affine_.scale;
    points.push_back(x);
    if (symmetry_ != Symmetry::none) points.push_back(-x);
  }
  if (symmetry_ != Symmetry::none) points.push_back(0.0);
  std::erase_if(points, [](double x) { return !(x > -1.0 && x < 1.0); });
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

std::string SpectralFunction::describe() const {
  std::string out;
  switch (kind_) {
    case Kind::indicator_above:
      out = "indicator:" + format_real(param_);
      break;
    case Kind::commute_time:
      out = "commute:" + format_real(param_);
      break;
    case Kind::identity:
      out = "identity";
      break;
    case Kind::constant:
      out = "const:" + format_real(param_);
      break;
    case Kind::polynomial:
      out = "poly:";
      for (std::size_t i = 0; i < ys_.size(); ++i) {
        out += (i ? "," : "") + format_real(ys_[i]);
      }
      break;
    case Kind::tabulated:
      out = "table[" + std::to_string(xs_.size()) + " knots]";
      break;
  }
  if (!(affine_ == AffineMap{})) {
    out += "|affine=" + format_real(affine_.scale) + "," + format_real(affine_.offset);
  }
  if (symmetry_ == Symmetry::odd) out += "|odd";
  if (symmetry_ == Symmetry::even) out += "|even";
  if (root_ != 1) out += "|root=" + std::to_string(root_);
  return out;
}

SpectralFunction SpectralFunction::with_affine(const AffineMap& map) const {
  if (symmetry_ != Symmetry::none || root_ != 1) {
    throw InvalidInput("affine maps must be applied before extensions and roots");
  }
  if (map.scale == 0.0 || !std::isfinite(map.scale) || !std::isfinite(map.offset)) {
    throw InvalidInput("affine map needs a finite non-zero scale");
  }
  SpectralFunction f = *this;
  f.affine_ = AffineMap{affine_.scale * map.scale, affine_.scale * map.offset + affine_.offset};
  return f;
}

SpectralFunction odd_extension(const SpectralFunction& f) {
  if (f.symmetry_ != SpectralFunction::Symmetry::none || f.root_ != 1) {
    throw InvalidInput("odd_extension expects a plain function");
  }
  SpectralFunction out = f;
  out.symmetry_ = SpectralFunction::Symmetry::odd;
  return out;
}

SpectralFunction even_extension(const SpectralFunction& f) {
  if (f.symmetry_ != SpectralFunction::Symmetry::none || f.root_ != 1) {
    throw InvalidInput("even_extension expects a plain function");
  }
  SpectralFunction out = f;
  out.symmetry_ = SpectralFunction::Symmetry::even;
  return out;
}

SpectralFunction root_function(const SpectralFunction& f, int b) {
  if (b < 1) throw InvalidInput("root power must be a positive integer");
  if (b == 1) return f;
  SpectralFunction out = f;
  out.root_ = f.root_ * b;
  if (out.root_ % 2 == 0) {
    // Same probe set the error report uses: uniform grid plus jump neighbours.
    constexpr int kGrid = 10001;
    std::vector<double> probes;
    probes.reserve(kGrid + 16);
    for (int i = 0; i < kGrid; ++i) probes.push_back(-1.0 + 2.0 * i / (kGrid - 1));
    for (double p : f.breakpoints()) {
      probes.push_back(std::max(-1.0, p - 1e-9));
      probes.push_back(p);
      probes.push_back(std::min(1.0, p + 1e-9));
    }
    for (double x : probes) {
      if (f(x) < 0.0) {
        throw InvalidInput("root_function: even root " + std::to_string(out.root_) +
                           " of a function that is negative at x = " + format_real(x));
      }
    }
  }
  return out;
}

}  // namespace csemb
