// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "csemb/cluster.hpp"
#include "csemb/embed.hpp"
#include "csemb/legendre.hpp"
#include "csemb/oracle.hpp"
#include "dense_oracle.hpp"
#include "support.hpp"

using namespace csemb;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

/// Eigenvalues of a symmetric matrix, descending.
std::vector<double> descending_spectrum(const SparseMatrix& s) {
  const Eigen::VectorXd ev = eigenvalues(to_eigen(s));
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.rbegin(), out.rend());
  return out;
}

/// The `k`-th and `k+1`-th largest eigenvalues' midpoint (1-based k).
double cutoff_between(const std::vector<double>& desc, std::size_t k) {
  return 0.5 * (desc[k - 1] + desc[k]);
}

std::vector<double> abs_percentiles(const std::vector<double>& deviations) {
  std::vector<double> a(deviations.size());
  std::transform(deviations.begin(), deviations.end(), a.begin(), [](double v) { return std::abs(v); });
  const auto p = oracle::percentiles(a);
  return {p.begin(), p.end()};
}

// ------------------------------------------------------------------------

Outcome a1_polynomial_exactness() {
  const auto start = Clock::now();
  auto s = random_symmetric(100, 0.05, 1);
  const double norm = spectral_norm(to_eigen(s));
  s = SparseMatrix::from_dense([&] {
    auto d = s.to_dense();
    for (double& v : d.values()) v /= norm;
    return d;
  }());
  const std::vector<double> monomial{0.3, 0.5, 0.0, -0.2};
  const auto omega = sample_projection(100, 16, 7);
  const auto approx = fast_embed_eig(s, SpectralFunction::polynomial(monomial), 3, omega);
  const Eigen::MatrixXd expected = matrix_polynomial(to_eigen(s), monomial) * to_eigen(omega);
  const double err = (to_eigen(approx.values) - expected).norm() / expected.norm();
  const double wall = seconds_since(start);
  return {err <= 1e-10 && wall < 1.0, "relative error " + num(err) + ", " + num(wall) + " s"};
}

Outcome a2_distortion_bound_audit() {
  const auto dense = random_symmetric_dense(50, 2);
  const double norm = spectral_norm(to_eigen(dense));
  DenseBlock s = dense;
  for (double& v : s.values()) v /= norm;
  const Eigen::VectorXd ev = eigenvalues(to_eigen(s));
  const double med = 0.5 * (ev(24) + ev(25));
  EmbedConfig cfg;
  cfg.L = 200;
  cfg.epsilon = 0.3;
  cfg.beta = 1.0;
  cfg.d = 2000;
  cfg.seed = 3;
  const auto r = oracle::distortion_bound_audit(s, SpectralFunction::indicator_above(med), cfg, 20);
  return {r.violation_rate <= 0.02, "violation rate " + num(r.violation_rate) + " over " +
                                        std::to_string(r.checks) + " checks, delta " + num(r.delta)};
}

struct SbmCase {
  std::size_t n;
  std::vector<Edge> edges;
  SparseMatrix s;
  std::vector<double> spectrum;
};

SbmCase make_sbm(std::size_t n, std::size_t blocks, double p_in, double p_out, std::uint64_t seed) {
  SbmCase c;
  c.n = n;
  c.edges = sbm_edges(n, blocks, p_in, p_out, seed);
  c.s = normalized_adjacency(c.edges, static_cast<Index>(n));
  c.spectrum = descending_spectrum(c.s);
  return c;
}

const SbmCase& sbm500() {
  static const SbmCase c = make_sbm(500, 10, 0.2, 0.01, 11);
  return c;
}

oracle::DistortionReport sbm_report(const SbmCase& g, const SpectralFunction& f, std::size_t L,
                                    std::size_t b, std::size_t d, oracle::DistortionReport::Mode mode) {
  const auto e = oracle::exact_embedding(g.s.to_dense(), f);
  EmbedConfig cfg;
  cfg.L = L;
  cfg.b = b;
  cfg.d = d;
  cfg.seed = 21;
  const auto approx = fast_embed_cascaded(g.s, f, cfg, sample_projection(g.n, d, cfg.seed));
  return oracle::distortion_percentiles(e.compact(), approx.values, oracle::default_pair_count(g.n), 5, mode);
}

Outcome a3_correlation_distortion() {
  const auto start = Clock::now();
  const auto& g = sbm500();
  const auto f = SpectralFunction::indicator_above(cutoff_between(g.spectrum, 50));
  const std::size_t d0 = default_dimension(g.n);
  const auto at_default = sbm_report(g, f, 180, 2, d0, oracle::DistortionReport::Mode::deviation_vs_exact);
  const double within = at_default.fraction_within(0.2);

  // Reference point: the exact f(S) projected by the same sketch, so the
  // line separates projection noise from approximation error.
  const auto e = oracle::exact_embedding(g.s.to_dense(), f);
  const Eigen::MatrixXd projected = to_eigen(e.function_matrix()) * to_eigen(sample_projection(g.n, d0, 21));
  const double within_exact_f =
      oracle::distortion_percentiles(e.compact(), from_eigen(projected), oracle::default_pair_count(g.n), 5)
          .fraction_within(0.2);

  std::vector<double> p95;
  double within_80 = 0.0;
  for (std::size_t d : {10, 20, 40, 80}) {
    const auto r = sbm_report(g, f, 180, 2, d, oracle::DistortionReport::Mode::deviation_vs_exact);
    p95.push_back(abs_percentiles(r.deviations)[5]);
    if (d == 80) within_80 = r.fraction_within(0.2);
  }
  bool monotone = true;
  for (std::size_t k = 1; k < p95.size(); ++k) monotone = monotone && p95[k] <= 1.1 * p95[k - 1];
  const double wall = seconds_since(start);
  std::string curve;
  for (double v : p95) curve += (curve.empty() ? "" : "/") + num(v);
  return {within >= 0.9 && monotone && wall < 60.0,
          "d=" + std::to_string(d0) + " within 0.2: " + num(within) + " (exact f(S) sketched: " +
              num(within_exact_f) + "; d=80: " + num(within_80) + "); p95|dev| at d=10/20/40/80: " + curve + "; " +
              num(wall) + " s"};
}

Outcome a4_cascading() {
  const auto& g = sbm500();
  const auto f = SpectralFunction::indicator_above(cutoff_between(g.spectrum, 50));
  auto bias_at_zero = [&](std::size_t b) {
    const auto r = sbm_report(g, f, 180, b, 80, oracle::DistortionReport::Mode::calibration_curve);
    for (const auto& bin : r.bins) {
      if (std::abs(bin.center) < 1e-12) return std::abs(bin.approx[3] - bin.center);
    }
    return std::nan("");
  };
  const double b1 = bias_at_zero(1);
  const double b2 = bias_at_zero(2);

  // Leakage of the approximations below the cutoff.
  const double c = 0.98;
  const auto ind = SpectralFunction::indicator_above(c);
  const auto full = legendre_coefficients(ind, 180);
  EmbedConfig cfg;
  cfg.L = 180;
  cfg.b = 2;
  const auto half = cascade_stage_expansion(ind, cfg);
  double sup_full = 0.0;
  double sup_cascade = 0.0;
  const std::size_t grid = 20001;
  for (std::size_t k = 0; k < grid; ++k) {
    const double x = -1.0 + (c - 0.08 + 1.0) * static_cast<double>(k) / static_cast<double>(grid - 1);
    sup_full = std::max(sup_full, std::abs(expansion_eval(full, x)));
    const double h = expansion_eval(half, x);
    sup_cascade = std::max(sup_cascade, h * h);
  }
  return {b2 < b1 && sup_cascade < sup_full, "bin-0 median bias b=1 " + num(b1) + ", b=2 " + num(b2) +
                                                 "; leakage sup b=1 " + num(sup_full) + ", b=2 " + num(sup_cascade)};
}

Outcome a5_dilation_spectrum() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> dim(1, 8);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = dim(rng);
    const std::size_t n = std::min<std::size_t>(dim(rng), 6);
    const auto a = random_general(m, n, 0.7, 100 + trial);
    const Eigen::VectorXd ev = eigenvalues(to_eigen(dilate(a)));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a));
    std::vector<double> expected(m + n, 0.0);
    const Eigen::VectorXd sv = svd.singularValues();
    for (Eigen::Index l = 0; l < sv.size(); ++l) {
      expected[2 * l] = sv(l);
      expected[2 * l + 1] = -sv(l);
    }
    std::sort(expected.begin(), expected.end());
    for (std::size_t k = 0; k < expected.size(); ++k) {
      worst = std::max(worst, std::abs(ev(static_cast<Eigen::Index>(k)) - expected[k]));
    }
  }
  return {worst <= 1e-8, "max eigenvalue mismatch " + num(worst)};
}

Outcome a6_clustering() {
  const auto start = Clock::now();
  const auto g = make_sbm(1000, 10, 0.05, 0.001, 17);
  const auto f = SpectralFunction::indicator_above(cutoff_between(g.spectrum, 10));
  ClusterOptions opt;
  opt.k = 10;
  opt.runs = 25;
  opt.seed = 4;
  opt.threads = 0;
  EmbedConfig cfg;
  cfg.L = 180;
  cfg.b = 2;
  cfg.d = default_dimension(g.n);
  cfg.seed = 8;
  ExecutionContext ctx;
  ctx.threads = 0;
  const auto approx = cluster_experiment(g.edges, static_cast<Index>(g.n), f, cfg, opt, ctx);
  const auto exact = cluster_embedding(oracle::exact_embedding(g.s.to_dense(), f).compact(), g.edges, opt);
  const double planted = modularity(g.edges, sbm_labels(g.n, 10)).q;
  const double wall = seconds_since(start);
  const bool pass = std::abs(approx.median_modularity - exact.median_modularity) <= 0.05 &&
                    approx.median_modularity >= 0.9 * planted && wall < 300.0;
  return {pass, "median Q compressive " + num(approx.median_modularity) + ", exact " +
                    num(exact.median_modularity) + ", planted " + num(planted) + ", d=" + std::to_string(cfg.d) +
                    ", " + num(wall) + " s"};
}

Outcome a7_complexity() {
  const std::size_t n = 100000;
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<Index> vertex(0, static_cast<Index>(n - 1));
  std::vector<Edge> edges;
  edges.reserve(5 * n);
  for (std::size_t k = 0; k < 5 * n; ++k) edges.push_back({vertex(rng), vertex(rng)});
  const auto s = normalized_adjacency(edges, static_cast<Index>(n));
  const auto f = SpectralFunction::indicator_above(0.5);

  EmbedConfig cfg;
  cfg.L = 20;
  cfg.b = 2;
  bool counts_ok = true;
  std::vector<double> times;
  std::string counts;
  for (std::size_t d : {20, 160}) {
    cfg.d = d;
    const auto omega = sample_projection(n, d, 1);
    SpmvCounter counter;
    std::vector<std::size_t> per_stage(cfg.b + 1, 0);
    ExecutionContext ctx;
    ctx.threads = 1;
    ctx.counter = &counter;
    ctx.on_iteration = [&](const IterationRecord& rec) {
      if (rec.stage < per_stage.size() && rec.r >= 1) ++per_stage[rec.stage];
    };
    // Best of three to damp scheduler noise.
    double best = INFINITY;
    for (int rep = 0; rep < 3; ++rep) {
      counter.calls = 0;
      counter.columns = 0;
      std::fill(per_stage.begin(), per_stage.end(), 0);
      const auto start = Clock::now();
      fast_embed_cascaded(s, f, cfg, omega, ctx);
      best = std::min(best, seconds_since(start));
    }
    times.push_back(best);
    std::size_t stage_products = 0;
    std::size_t stages_seen = 0;
    for (std::size_t st : per_stage) {
      if (st == 0) continue;
      ++stages_seen;
      stage_products += st;
      counts_ok = counts_ok && st == cfg.L / cfg.b;
    }
    counts_ok = counts_ok && stages_seen == cfg.b && stage_products == cfg.L && counter.calls == cfg.L &&
                counter.columns == cfg.L * d;
    counts += (counts.empty() ? "" : ", ") + std::string("d=") + std::to_string(d) + ": " +
              std::to_string(counter.calls.load()) + " products in " + std::to_string(stages_seen) + " stages";
  }
  const double ratio = times[1] / times[0];
  return {counts_ok && ratio <= 12.0, counts + "; time ratio d=160/d=20 " + num(ratio) + " (" + num(times[0]) +
                                          " s, " + num(times[1]) + " s)"};
}

Outcome a8_determinism() {
  const auto dir = fs::temp_directory_path() / "csemb_acceptance";
  fs::create_directories(dir);
  const auto graph = dir / "sbm.txt";
  {
    std::ofstream out(graph);
    for (const auto& e : sbm_edges(400, 8, 0.15, 0.01, 13)) out << e.u << ' ' << e.v << '\n';
  }
  std::vector<std::string> files;
  bool ran = true;
  for (int threads : {1, 4, 8}) {
    const auto out = dir / ("emb_" + std::to_string(threads) + ".bin");
    const std::string cmd = std::string(CSEMB_BINARY) + " --quiet embed --input " + graph.string() +
                            " --format edgelist --matrix normalized-adjacency --function indicator:0.9"
                            " --L 180 --b 2 --d 80 --seed 42 --threads " +
                            std::to_string(threads) + " --output " + out.string();
    ran = ran && std::system(cmd.c_str()) == 0;
    std::ifstream in(out, std::ios::binary);
    files.emplace_back(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  const bool same = ran && !files[0].empty() && files[0] == files[1] && files[0] == files[2];
  return {same, ran ? std::to_string(files[0].size()) + "-byte files, identical: " + (same ? "yes" : "no")
                    : "a CLI run failed"};
}

Outcome a9_norm_estimator() {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal;
  const std::size_t n = 200;
  std::size_t gapped = 0;
  std::size_t gapped_ok = 0;
  std::size_t bounded = 0;
  std::size_t total = 0;
  double worst_ratio_lo = INFINITY;
  double worst_ratio_hi = 0.0;
  std::uint64_t seed = 0;
  while (gapped < 50) {
    // Wigner matrix with a planted rank-one spike of random sign.
    Eigen::MatrixXd w(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) w(i, j) = w(j, i) = normal(rng) / std::sqrt(static_cast<double>(n));
    }
    Eigen::VectorXd v(n);
    for (std::size_t i = 0; i < n; ++i) v(i) = normal(rng);
    v.normalize();
    const double theta = (1.5 + 1.5 * std::uniform_real_distribution<double>(0.0, 1.0)(rng)) *
                         (normal(rng) < 0 ? -1.0 : 1.0);
    const Eigen::MatrixXd m = w + theta * v * v.transpose();

    Eigen::VectorXd ev = eigenvalues(m).cwiseAbs();
    std::sort(ev.data(), ev.data() + ev.size(), std::greater<>());
    const double exact = ev(0);
    const double gap = (ev(0) - ev(1)) / ev(0);

    EmbedConfig cfg;
    cfg.seed = ++seed;
    const double est = estimate_spectral_norm(SparseMatrix::from_dense(from_eigen(m)), cfg);
    ++total;
    bounded += est <= 1.01 * exact + 1e-12;
    if (gap >= 0.1) {
      ++gapped;
      const double ratio = est / exact;
      worst_ratio_lo = std::min(worst_ratio_lo, ratio);
      worst_ratio_hi = std::max(worst_ratio_hi, ratio);
      gapped_ok += ratio >= 0.99 && ratio <= 1.01;
    }
  }
  return {gapped_ok == gapped && bounded == total,
          std::to_string(gapped_ok) + "/" + std::to_string(gapped) + " gapped within [0.99, 1.01] (ratio " +
              num(worst_ratio_lo) + ".." + num(worst_ratio_hi) + "); " + std::to_string(bounded) + "/" +
              std::to_string(total) + " under the upper bound"};
}

}  // namespace

// Usage: acceptance [--known-fail ID]...
// A criterion listed with --known-fail still prints FAIL but does not set the
// exit status; any other failure does.
int main(int argc, char** argv) {
  std::set<std::string> known;
  for (int k = 1; k < argc; ++k) {
    const std::string arg = argv[k];
    if (arg == "--known-fail" && k + 1 < argc) {
      known.insert(argv[++k]);
    } else {
      std::cerr << "usage: acceptance [--known-fail ID]...\n";
      return 2;
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"A1 polynomial exactness", a1_polynomial_exactness},
      {"A2 distortion bound audit", a2_distortion_bound_audit},
      {"A3 correlation distortion", a3_correlation_distortion},
      {"A4 cascading", a4_cascading},
      {"A5 dilation spectrum", a5_dilation_spectrum},
      {"A6 downstream clustering", a6_clustering},
      {"A7 complexity scaling", a7_complexity},
      {"A8 determinism", a8_determinism},
      {"A9 norm estimator", a9_norm_estimator},
  };
  int unexpected = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const std::string id = name.substr(0, name.find(' '));
    const bool listed = known.contains(id);
    if (!o.pass && !listed) ++unexpected;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail
              << (!o.pass && listed ? " [known failure]" : "") << std::endl;
  }
  return unexpected == 0 ? 0 : 1;
}
