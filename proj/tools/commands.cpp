#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "csemb/cluster.hpp"
#include "csemb/embed.hpp"
#include "csemb/error.hpp"
#include "csemb/io.hpp"
#include "csemb/legendre.hpp"
#include "csemb/oracle.hpp"
#include "csemb/sparse_matrix.hpp"
#include "csemb/spectral_function.hpp"

namespace csemb::cli {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Log {
 public:
  Log(std::ostream& err, const bool& quiet) : err_(err), quiet_(quiet) {}

  void operator()(const std::string& line) const {
    if (!quiet_) err_ << "csemb: " << line << '\n';
  }

 private:
  std::ostream& err_;
  const bool& quiet_;
};

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  for (int i = 15; i >= 0; --i) {
    buf[i] = "0123456789abcdef"[v & 0xf];
    v >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

/// FNV-1a over the little-endian bytes of the coefficients.
std::string coefficient_digest(const LegendreExpansion& e) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (double c : e.coeffs()) {
    auto bits = std::bit_cast<std::uint64_t>(c);
    for (int k = 0; k < 8; ++k) {
      h ^= bits & 0xff;
      h *= 0x100000001b3ull;
      bits >>= 8;
    }
  }
  return hex64(h);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw ParseError("failed writing " + path.string());
}

void emit_json(const json& doc, const std::string& path, std::ostream& out) {
  const std::string text = doc.dump(2) + "\n";
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text(path, text);
  }
}

struct MatrixOptions {
  std::string input;
  std::string format = "edgelist";
  std::string matrix = "auto";
  std::string norm = "auto";
  std::string kernel = "gaussian";
  double bandwidth = 1.0;
  std::vector<double> spectrum_range;
};

void add_matrix_options(CLI::App& cmd, MatrixOptions& o, bool with_scaling) {
  cmd.add_option("--input", o.input, "Input file")->required();
  cmd.add_option("--format", o.format, "Input format")
      ->check(CLI::IsMember({"edgelist", "mtx", "points"}))
      ->capture_default_str();
  cmd.add_option("--matrix", o.matrix,
                 "Operator to embed: normalized-adjacency or raw (edgelist), raw or dilation "
                 "(mtx), kernel (points); auto picks the first for the format")
      ->check(CLI::IsMember({"auto", "normalized-adjacency", "raw", "dilation", "kernel"}))
      ->capture_default_str();
  cmd.add_option("--kernel", o.kernel, "Kernel for points input")
      ->check(CLI::IsMember({"gaussian", "indicator"}))
      ->capture_default_str();
  cmd.add_option("--bandwidth", o.bandwidth, "Kernel bandwidth")->capture_default_str();
  if (!with_scaling) return;
  cmd.add_option("--norm", o.norm,
                 "Spectral norm estimation: auto skips it for normalized adjacency and "
                 "when --spectrum-range is given")
      ->check(CLI::IsMember({"auto", "estimate", "skip"}))
      ->capture_default_str();
  cmd.add_option("--spectrum-range", o.spectrum_range,
                 "LO,HI bounds on the spectrum; the matrix is mapped onto [-1, 1] and the "
                 "function is evaluated on the original scale")
      ->expected(2)
      ->delimiter(',');
}

struct Operator {
  /// Symmetric matrix, or the general matrix A when `dilation` is set.
  SparseMatrix s;
  bool dilation = false;
  std::string matrix;
  std::vector<Edge> edges;
  std::optional<double> norm_estimate;
  double scale = 1.0;
  std::optional<AffineMap> to_original;

  /// Rows of the symmetric operator that is actually iterated.
  std::size_t operator_rows() const {
    return static_cast<std::size_t>(dilation ? s.rows() + s.cols() : s.rows());
  }
};

SparseMatrix adjacency(std::span<const Edge> edges, Index n) {
  std::vector<Triplet> t;
  for (const auto& e : simple_undirected(edges)) {
    t.push_back({e.u, e.v, 1.0});
    t.push_back({e.v, e.u, 1.0});
  }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

Operator load_operator(const MatrixOptions& o, const Log& log) {
  std::string matrix = o.matrix;
  if (matrix == "auto") {
    matrix = o.format == "edgelist" ? "normalized-adjacency" : o.format == "mtx" ? "raw" : "kernel";
  }
  const bool ok = (o.format == "edgelist" && (matrix == "normalized-adjacency" || matrix == "raw")) ||
                  (o.format == "mtx" && (matrix == "raw" || matrix == "dilation")) ||
                  (o.format == "points" && matrix == "kernel");
  if (!ok) throw UsageError("--matrix " + matrix + " is not available for --format " + o.format);

  Operator op;
  op.matrix = matrix;
  if (o.format == "edgelist") {
    auto list = io::read_edge_list(std::filesystem::path(o.input));
    op.edges = std::move(list.edges);
    op.s = matrix == "raw" ? adjacency(op.edges, list.n_vertices)
                           : normalized_adjacency(op.edges, list.n_vertices);
  } else if (o.format == "mtx") {
    op.s = io::read_matrix_market(std::filesystem::path(o.input));
    op.dilation = matrix == "dilation";
    if (!op.dilation && (op.s.rows() != op.s.cols() || !op.s.is_symmetric())) {
      throw InvalidInput(o.input + ": matrix is not symmetric; use --matrix dilation");
    }
  } else {
    if (!(o.bandwidth > 0.0)) throw UsageError("--bandwidth must be positive");
    const auto points = io::read_points_csv(std::filesystem::path(o.input));
    op.s = kernel_matrix(points, {o.kernel == "gaussian" ? KernelKind::gaussian : KernelKind::indicator,
                                  o.bandwidth});
  }
  log("loaded " + o.input + ": " + std::to_string(op.s.rows()) + "x" + std::to_string(op.s.cols()) +
      ", nnz " + std::to_string(op.s.nnz()) + ", operator " + matrix);
  return op;
}

/// Brings the operator's spectrum into [-1, 1] as requested.
void scale_operator(Operator& op, const MatrixOptions& o, const EmbedConfig& cfg, const Log& log) {
  if (!o.spectrum_range.empty()) {
    if (op.dilation) throw UsageError("--spectrum-range cannot be combined with --matrix dilation");
    if (o.norm == "estimate") throw UsageError("--norm estimate conflicts with --spectrum-range");
    const double lo = o.spectrum_range[0];
    const double hi = o.spectrum_range[1];
    if (!(lo < hi)) throw UsageError("--spectrum-range needs LO < HI");
    auto rescaled = rescale_spectrum(op.s, lo, hi);
    op.s = std::move(rescaled.matrix);
    op.to_original = rescaled.to_original;
    log("spectrum [" + fmt(lo) + ", " + fmt(hi) + "] mapped onto [-1, 1]");
    return;
  }
  const bool estimate = o.norm == "estimate" || (o.norm == "auto" && op.matrix != "normalized-adjacency");
  if (!estimate) return;
  const double norm = op.dilation ? estimate_spectral_norm(dilate(op.s), cfg) : estimate_spectral_norm(op.s, cfg);
  op.norm_estimate = norm;
  if (norm > 1.0) {
    op.scale = 1.0 / norm;
    op.s = op.s.scaled(op.scale);
  }
  log("spectral norm estimate " + fmt(norm) + (norm > 1.0 ? ", matrix scaled by " + fmt(op.scale) : ""));
}

SpectralFunction parse_function(const std::string& text, const Operator& op) {
  SpectralFunction f = [&] {
    try {
      return SpectralFunction::parse(text);
    } catch (const InvalidInput& e) {
      throw UsageError(std::string("invalid --function: ") + e.what());
    }
  }();
  return op.to_original ? f.with_affine(*op.to_original) : f;
}

struct EngineOptions {
  std::size_t L = 180;
  std::size_t b = 1;
  std::size_t d = 0;
  std::uint64_t seed = 0;
  double epsilon = 0.5;
  double beta = 1.0;
  std::size_t norm_iters = 20;
  std::string weight = "legendre";
  std::size_t threads = 0;
};

void add_engine_options(CLI::App& cmd, EngineOptions& o) {
  cmd.add_option("--L", o.L, "Total number of sparse products per column")->capture_default_str();
  cmd.add_option("--b", o.b, "Cascade factor; must divide L")->capture_default_str();
  cmd.add_option("--d", o.d, "Embedding dimension; 0 means ceil(6 ln n)")->capture_default_str();
  cmd.add_option("--seed", o.seed, "Seed for every random choice")->capture_default_str();
  cmd.add_option("--epsilon", o.epsilon, "Distortion target (metadata and JL bound)")->capture_default_str();
  cmd.add_option("--beta", o.beta, "Failure exponent (metadata and JL bound)")->capture_default_str();
  cmd.add_option("--norm-iters", o.norm_iters, "Power iterations for the norm estimate")->capture_default_str();
  cmd.add_option("--weight", o.weight, "Coefficient fit")
      ->check(CLI::IsMember({"legendre", "chebyshev"}))
      ->capture_default_str();
  cmd.add_option("--threads", o.threads, "Worker cap; 0 reads CSEMB_THREADS or uses all cores")
      ->capture_default_str();
}

EmbedConfig make_config(const EngineOptions& o, std::size_t n) {
  EmbedConfig cfg;
  cfg.L = o.L;
  cfg.b = o.b;
  cfg.seed = o.seed;
  cfg.epsilon = o.epsilon;
  cfg.beta = o.beta;
  cfg.norm_iters = o.norm_iters;
  cfg.weight = o.weight == "chebyshev" ? CoefficientWeight::chebyshev : CoefficientWeight::legendre;
  cfg.d = o.d ? o.d : default_dimension(std::max<std::size_t>(n, 1));
  if (cfg.b == 0 || cfg.L % cfg.b != 0) {
    throw ConfigError("--b " + std::to_string(cfg.b) + " must divide --L " + std::to_string(cfg.L));
  }
  try {
    cfg.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

json config_json(const EmbedConfig& cfg) {
  return {{"L", cfg.L},
          {"b", cfg.b},
          {"d", cfg.d},
          {"seed", cfg.seed},
          {"epsilon", cfg.epsilon},
          {"beta", cfg.beta},
          {"norm_iters", cfg.norm_iters},
          {"norm_vectors_factor", cfg.norm_vectors_factor},
          {"norm_safety", cfg.norm_safety},
          {"weight", cfg.weight == CoefficientWeight::chebyshev ? "chebyshev" : "legendre"}};
}

json operator_json(const Operator& op, const MatrixOptions& o) {
  json j = {{"input", o.input},
            {"format", o.format},
            {"matrix", op.matrix},
            {"rows", op.s.rows()},
            {"cols", op.s.cols()},
            {"nnz", op.s.nnz()},
            {"norm_mode", o.norm},
            {"norm_estimate", op.norm_estimate ? json(*op.norm_estimate) : json(nullptr)},
            {"scale", op.scale}};
  if (o.format == "points") {
    j["kernel"] = o.kernel;
    j["bandwidth"] = o.bandwidth;
  }
  if (op.to_original) {
    j["spectrum_range"] = o.spectrum_range;
  }
  return j;
}

ExecutionContext make_context(const EngineOptions& o, SpmvCounter* counter, const Log& log) {
  ExecutionContext ctx;
  ctx.threads = o.threads;
  ctx.counter = counter;
  ctx.on_iteration = [&log](const IterationRecord& rec) {
    std::ostringstream line;
    line << "stage " << rec.stage << " r " << rec.r << " max|Q| " << rec.max_abs;
    log(line.str());
  };
  return ctx;
}

// ---------------------------------------------------------------- embed

struct EmbedArgs {
  MatrixOptions matrix;
  EngineOptions engine;
  std::string function;
  std::string output;
  std::string output_cols;
  std::string output_csv;
  std::string metadata;
};

void cmd_embed(const EmbedArgs& a, const std::vector<std::string>& argv, const Log& log) {
  const auto start = Clock::now();
  Operator op = load_operator(a.matrix, log);
  const EmbedConfig cfg = make_config(a.engine, op.operator_rows());
  scale_operator(op, a.matrix, cfg, log);
  const SpectralFunction f = parse_function(a.function, op);
  const SpectralFunction applied = op.dilation ? dilation_function(f, cfg.b) : f;
  const auto stage_expansion = cascade_stage_expansion(applied, cfg);

  SpmvCounter counter;
  const auto ctx = make_context(a.engine, &counter, log);
  log("embedding with " + applied.describe() + ", L " + std::to_string(cfg.L) + ", b " +
      std::to_string(cfg.b) + ", d " + std::to_string(cfg.d) + ", " +
      std::to_string(resolve_threads(ctx.threads)) + " workers");

  json outputs = json::object();
  std::size_t n_rows = 0;
  if (op.dilation) {
    const auto g = fast_embed_general(op.s, f, cfg, ctx);
    const std::string cols_path = a.output_cols.empty() ? a.output + ".cols" : a.output_cols;
    io::write_embedding(std::filesystem::path(a.output), g.rows.values);
    io::write_embedding(std::filesystem::path(cols_path), g.cols.values);
    if (!a.output_csv.empty()) io::write_embedding_csv(a.output_csv, g.rows.values);
    outputs = {{"rows", a.output}, {"cols", cols_path}};
    n_rows = g.rows.rows();
  } else {
    const auto omega = sample_projection(op.operator_rows(), cfg.d, cfg.seed);
    const auto e = fast_embed_cascaded(op.s, f, cfg, omega, ctx);
    io::write_embedding(std::filesystem::path(a.output), e.values);
    if (!a.output_csv.empty()) io::write_embedding_csv(a.output_csv, e.values);
    outputs = {{"embedding", a.output}};
    n_rows = e.rows();
  }
  if (!a.output_csv.empty()) outputs["csv"] = a.output_csv;
  const double wall = std::chrono::duration<double>(Clock::now() - start).count();
  log("wrote " + std::to_string(n_rows) + "x" + std::to_string(cfg.d) + " embedding to " + a.output +
      " in " + fmt(wall) + " s");

  json meta;
  meta["command"] = "embed";
  meta["replay"] = std::vector<std::string>(argv.begin() + 1, argv.end());
  meta["working_directory"] = std::filesystem::current_path().string();
  meta["operator"] = operator_json(op, a.matrix);
  meta["function"] = {{"text", a.function}, {"applied", applied.describe()}};
  meta["config"] = config_json(cfg);
  meta["outputs"] = outputs;
  meta["n_rows"] = n_rows;
  meta["coefficients"] = {{"stage_order", stage_expansion.order()},
                          {"digest_fnv1a", coefficient_digest(stage_expansion)}};
  meta["spmv"] = {{"calls", counter.calls.load()}, {"columns", counter.columns.load()}};
  meta["threads"] = resolve_threads(ctx.threads);
  meta["wall_seconds"] = wall;
  const std::string meta_path = a.metadata.empty() ? a.output + ".json" : a.metadata;
  write_text(meta_path, meta.dump(2) + "\n");
}

// ----------------------------------------------------------------- eval

struct EvalArgs {
  MatrixOptions matrix;
  EngineOptions engine;
  std::string function;
  std::string approx;
  std::string side = "rows";
  std::size_t pairs = 0;
  std::optional<std::uint64_t> pair_seed;
  double bin_width = 0.1;
  std::size_t cap = oracle::kDefaultOracleCap;
  std::string percentiles_out;
  std::string calibration_out;
  std::string report;
};

void cmd_eval(const EvalArgs& a, std::ostream& out, const Log& log) {
  Operator op = load_operator(a.matrix, log);
  const std::size_t n = op.operator_rows();
  if (n > a.cap) {
    throw CapExceeded("operator has " + std::to_string(n) + " rows, above the exact oracle cap of " +
                      std::to_string(a.cap) + "; eval is for desk-scale matrices only");
  }
  const EmbedConfig cfg = make_config(a.engine, n);
  scale_operator(op, a.matrix, cfg, log);
  const SpectralFunction f = parse_function(a.function, op);
  const SpectralFunction applied = op.dilation ? dilation_function(f, cfg.b) : f;

  const DenseBlock dense = op.dilation ? dilate(op.s).to_dense() : op.s.to_dense();
  const auto exact = oracle::exact_embedding(dense, applied, a.cap);
  log("exact oracle: " + std::to_string(exact.size()) + " eigenpairs, max residual " +
      fmt(exact.max_residual));
  DenseBlock reference = exact.embedding;
  if (op.dilation) {
    const auto cols = static_cast<std::size_t>(op.s.cols());
    const auto rows = static_cast<std::size_t>(op.s.rows());
    reference = a.side == "rows" ? reference.row_slice(cols, rows) : reference.row_slice(0, cols);
  }
  const DenseBlock approx = io::read_embedding(std::filesystem::path(a.approx));
  if (approx.rows() != reference.rows()) {
    throw InvalidInput(a.approx + " has " + std::to_string(approx.rows()) + " rows, expected " +
                       std::to_string(reference.rows()));
  }
  const std::size_t pairs = a.pairs ? a.pairs : oracle::default_pair_count(reference.rows());
  const auto report =
      oracle::distortion_percentiles(reference, approx, pairs, a.pair_seed.value_or(cfg.seed),
                                     oracle::DistortionReport::Mode::calibration_curve, a.bin_width);

  if (!a.percentiles_out.empty()) {
    std::ostringstream csv;
    csv << "percentile,value\n";
    for (std::size_t p = 0; p < oracle::kPercentileLevels.size(); ++p) {
      csv << oracle::kPercentileLevels[p] << ',' << fmt(report.percentiles[p]) << '\n';
    }
    write_text(a.percentiles_out, csv.str());
  }
  if (!a.calibration_out.empty()) {
    std::ostringstream csv;
    csv << "bin_center,p1,p5,p25,p50,p75,p95,p99\n";
    for (const auto& bin : report.bins) {
      csv << fmt(bin.center);
      for (double v : bin.approx) csv << ',' << fmt(v);
      csv << '\n';
    }
    write_text(a.calibration_out, csv.str());
  }

  json doc;
  doc["pair_sample_size"] = report.pair_sample_size;
  doc["degenerate_pairs"] = report.degenerate_pairs;
  json pct = json::object();
  for (std::size_t p = 0; p < oracle::kPercentileLevels.size(); ++p) {
    pct[std::to_string(static_cast<int>(oracle::kPercentileLevels[p]))] = report.percentiles[p];
  }
  doc["percentiles"] = pct;
  doc["fraction_within_0.2"] = report.fraction_within(0.2);
  json bins = json::array();
  for (const auto& bin : report.bins) {
    bins.push_back({{"center", bin.center}, {"count", bin.count}, {"approx_percentiles", bin.approx}});
  }
  doc["calibration"] = bins;
  doc["operator"] = operator_json(op, a.matrix);
  doc["function"] = applied.describe();
  doc["oracle_max_residual"] = exact.max_residual;
  emit_json(doc, a.report, out);
}

// -------------------------------------------------------------- cluster

struct ClusterArgs {
  std::string input;
  EngineOptions engine;
  std::string function = "indicator:0.98";
  std::string embedding;
  std::size_t k = 200;
  std::size_t runs = 25;
  std::size_t max_iters = 100;
  std::string labels_out;
  std::string summary;
};

void cmd_cluster(const ClusterArgs& a, std::ostream& out, const Log& log) {
  const auto start = Clock::now();
  const auto list = io::read_edge_list(std::filesystem::path(a.input));
  const auto n = static_cast<std::size_t>(list.n_vertices);
  log("loaded " + a.input + ": " + std::to_string(n) + " vertices, " + std::to_string(list.edges.size()) +
      " edge lines");
  const EmbedConfig cfg = make_config(a.engine, n);
  if (a.k == 0 || a.k > n) {
    throw ConfigError("--k " + std::to_string(a.k) + " must lie in [1, " + std::to_string(n) + "]");
  }
  if (a.runs == 0) throw ConfigError("--runs must be positive");

  ClusterOptions opts;
  opts.k = a.k;
  opts.runs = a.runs;
  opts.max_iters = a.max_iters;
  opts.seed = cfg.seed;
  opts.threads = a.engine.threads;

  ClusterExperiment result;
  if (!a.embedding.empty()) {
    const auto x = io::read_embedding(std::filesystem::path(a.embedding));
    if (x.rows() != n) {
      throw InvalidInput(a.embedding + " has " + std::to_string(x.rows()) + " rows, graph has " +
                         std::to_string(n) + " vertices");
    }
    result = cluster_embedding(x, list.edges, opts);
  } else {
    Operator op;
    const SpectralFunction f = parse_function(a.function, op);
    const auto ctx = make_context(a.engine, nullptr, log);
    result = cluster_experiment(list.edges, list.n_vertices, f, cfg, opts, ctx);
  }

  // The run whose score sits at the median represents the experiment.
  std::size_t representative = 0;
  for (std::size_t r = 1; r < result.scores.size(); ++r) {
    if (std::abs(result.scores[r] - result.median_modularity) <
        std::abs(result.scores[representative] - result.median_modularity)) {
      representative = r;
    }
  }
  if (!a.labels_out.empty()) {
    std::ostringstream csv;
    csv << "vertex_id,cluster_id\n";
    const auto& labels = result.runs[representative].labels;
    for (std::size_t i = 0; i < labels.size(); ++i) csv << i << ',' << labels[i] << '\n';
    write_text(a.labels_out, csv.str());
  }
  const double wall = std::chrono::duration<double>(Clock::now() - start).count();
  log("median modularity " + fmt(result.median_modularity) + " over " + std::to_string(a.runs) + " runs");

  json doc;
  doc["median_modularity"] = result.median_modularity;
  doc["scores"] = result.scores;
  json inertia = json::array();
  for (const auto& run : result.runs) inertia.push_back(run.inertia);
  doc["inertia"] = inertia;
  doc["representative_run"] = representative;
  doc["k"] = a.k;
  doc["runs"] = a.runs;
  doc["n_vertices"] = n;
  doc["m_edges"] = simple_undirected(list.edges).size();
  doc["embedding"] = a.embedding.empty() ? json(nullptr) : json(a.embedding);
  doc["function"] = a.embedding.empty() ? json(a.function) : json(nullptr);
  doc["config"] = config_json(cfg);
  doc["wall_seconds"] = wall;
  emit_json(doc, a.summary, out);
}

// ----------------------------------------------------------------- norm

struct NormArgs {
  MatrixOptions matrix;
  std::uint64_t seed = 0;
  std::size_t norm_iters = 20;
  double vectors_factor = 6.0;
  std::string output;
};

void cmd_norm(const NormArgs& a, std::ostream& out, const Log& log) {
  const Operator op = load_operator(a.matrix, log);
  EmbedConfig cfg;
  cfg.seed = a.seed;
  cfg.norm_iters = a.norm_iters;
  cfg.norm_vectors_factor = a.vectors_factor;
  if (!(a.vectors_factor > 0.0)) throw ConfigError("--vectors-factor must be positive");
  const SparseMatrix s = op.dilation ? dilate(op.s) : op.s;
  if (s.rows() != s.cols() || !s.is_symmetric()) {
    throw InvalidInput(a.matrix.input + ": matrix is not symmetric; use --matrix dilation");
  }
  const double estimate = estimate_spectral_norm(s, cfg);
  const auto n = static_cast<std::size_t>(s.rows());
  json doc;
  doc["estimate"] = estimate;
  doc["n"] = n;
  doc["nnz"] = s.nnz();
  doc["iterations"] = cfg.norm_iters;
  doc["start_vectors"] =
      n ? std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cfg.norm_vectors_factor *
                                                                      std::log(static_cast<double>(n)))))
        : 0;
  doc["safety_factor"] = cfg.norm_safety;
  doc["seed"] = cfg.seed;
  doc["operator"] = op.matrix;
  log("spectral norm estimate " + fmt(estimate));
  emit_json(doc, a.output, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compressive spectral embeddings of sparse matrices and graphs", "csemb"};
  app.require_subcommand(1);
  // Subcommands inherit this, so --quiet works on either side of the command name.
  app.fallthrough();
  bool quiet = false;
  app.add_flag("--quiet", quiet, "Suppress log lines on stderr");
  Log log(err, quiet);

  EmbedArgs embed;
  auto* c_embed = app.add_subcommand("embed", "Compute a compressive embedding");
  add_matrix_options(*c_embed, embed.matrix, true);
  add_engine_options(*c_embed, embed.engine);
  c_embed->add_option("--function", embed.function, "Spectral weighting, e.g. indicator:0.98")->required();
  c_embed->add_option("--output", embed.output, "Binary embedding file")->required();
  c_embed->add_option("--output-cols", embed.output_cols, "Column embedding for --matrix dilation");
  c_embed->add_option("--output-csv", embed.output_csv, "Also write the embedding as CSV");
  c_embed->add_option("--metadata", embed.metadata, "Metadata JSON (default: OUTPUT.json)");

  EvalArgs eval;
  std::uint64_t pair_seed = 0;
  auto* c_eval = app.add_subcommand("eval", "Compare an embedding against the exact oracle");
  add_matrix_options(*c_eval, eval.matrix, true);
  add_engine_options(*c_eval, eval.engine);
  c_eval->add_option("--function", eval.function, "Spectral weighting used for the embedding")->required();
  c_eval->add_option("--approx", eval.approx, "Binary embedding to evaluate")->required();
  c_eval->add_option("--side", eval.side, "Which block of a dilation embedding --approx holds")
      ->check(CLI::IsMember({"rows", "cols"}))
      ->capture_default_str();
  c_eval->add_option("--pairs", eval.pairs, "Sampled row pairs; 0 means min(1e5, all)")->capture_default_str();
  auto* pair_seed_opt = c_eval->add_option("--pair-seed", pair_seed, "Pair sampling seed (default: --seed)");
  c_eval->add_option("--bin-width", eval.bin_width, "Calibration bin width")->capture_default_str();
  c_eval->add_option("--cap", eval.cap, "Largest matrix the dense oracle accepts")->capture_default_str();
  c_eval->add_option("--percentiles-out", eval.percentiles_out, "Percentile CSV");
  c_eval->add_option("--calibration-out", eval.calibration_out, "Calibration curve CSV");
  c_eval->add_option("--report", eval.report, "Report JSON (default: stdout)");

  ClusterArgs cluster;
  auto* c_cluster = app.add_subcommand("cluster", "K-means on an embedding, scored by modularity");
  c_cluster->add_option("--input", cluster.input, "Edge list")->required();
  add_engine_options(*c_cluster, cluster.engine);
  c_cluster->add_option("--function", cluster.function, "Spectral weighting")->capture_default_str();
  c_cluster->add_option("--embedding", cluster.embedding, "Cluster this embedding file instead");
  c_cluster->add_option("--k", cluster.k, "Clusters per run")->capture_default_str();
  c_cluster->add_option("--runs", cluster.runs, "Independently seeded runs")->capture_default_str();
  c_cluster->add_option("--max-iters", cluster.max_iters, "Lloyd iterations per run")->capture_default_str();
  c_cluster->add_option("--labels-out", cluster.labels_out, "Labels CSV of the median run");
  c_cluster->add_option("--summary", cluster.summary, "Summary JSON (default: stdout)");

  NormArgs norm;
  auto* c_norm = app.add_subcommand("norm", "Estimate the spectral norm");
  add_matrix_options(*c_norm, norm.matrix, false);
  c_norm->add_option("--seed", norm.seed, "Seed for the start vectors")->capture_default_str();
  c_norm->add_option("--norm-iters", norm.norm_iters, "Power iterations")->capture_default_str();
  c_norm->add_option("--vectors-factor", norm.vectors_factor, "Start vectors per ln n")->capture_default_str();
  c_norm->add_option("--output", norm.output, "JSON output (default: stdout)");

  try {
    std::vector<std::string> rest(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (*pair_seed_opt) eval.pair_seed = pair_seed;

  try {
    if (*c_embed) cmd_embed(embed, args, log);
    if (*c_eval) cmd_eval(eval, out, log);
    if (*c_cluster) cmd_cluster(cluster, out, log);
    if (*c_norm) cmd_norm(norm, out, log);
    return kOk;
  } catch (const UsageError& e) {
    err << "csemb: usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "csemb: invalid configuration: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const ParseError& e) {
    err << "csemb: input error: " << e.what() << '\n';
    return kInputError;
  } catch (const InvalidInput& e) {
    err << "csemb: input error: " << e.what() << '\n';
    return kInputError;
  } catch (const NumericFailure& e) {
    err << "csemb: numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const CapExceeded& e) {
    err << "csemb: " << e.what() << '\n';
    return kCapExceeded;
  } catch (const std::exception& e) {
    err << "csemb: error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace csemb::cli
