#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <sys/wait.h>

#include "../tools/commands.hpp"
#include "catch_amalgamated.hpp"
#include "csemb/io.hpp"
#include "support.hpp"

using namespace csemb;
using namespace testing_support;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "csemb");
  std::ostringstream out;
  std::ostringstream err;
  const int code = csemb::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / "csemb_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string write_file(const std::string& name, const std::string& text) {
  const auto p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string sbm_file(std::size_t n, std::size_t blocks, std::uint64_t seed) {
  std::ostringstream text;
  text << "# planted partition\n";
  for (const auto& e : sbm_edges(n, blocks, 0.3, 0.01, seed)) text << e.u << ' ' << e.v << '\n';
  return write_file("sbm_" + std::to_string(n) + "_" + std::to_string(seed) + ".txt", text.str());
}

std::string path(const std::string& name) { return (scratch() / name).string(); }

}  // namespace

TEST_CASE("exit codes") {
  const auto graph = sbm_file(60, 3, 1);
  CHECK(call({}).code == cli::kUsage);
  CHECK(call({"frobnicate"}).code == cli::kUsage);
  CHECK(call({"--help"}).code == cli::kOk);
  CHECK(call({"embed", "--input", graph, "--output", path("x.bin")}).code == cli::kUsage);
  CHECK(call({"embed", "--input", graph, "--function", "gaussian:2", "--output", path("x.bin")}).code ==
        cli::kUsage);
  CHECK(call({"eval", "--input", graph, "--function", "identity"}).code == cli::kUsage);
  CHECK(call({"embed", "--input", "/nonexistent/graph.txt", "--function", "identity", "--output",
              path("x.bin")})
            .code == cli::kInputError);
  CHECK(call({"embed", "--input", graph, "--function", "identity", "--L", "10", "--b", "3", "--output",
              path("x.bin")})
            .code == cli::kInvalidConfig);
  CHECK(call({"cluster", "--input", graph, "--k", "61", "--runs", "1"}).code == cli::kInvalidConfig);
  CHECK(call({"eval", "--input", graph, "--function", "identity", "--approx", path("missing.bin")}).code ==
        cli::kInputError);

  const auto garbage = write_file("garbage.txt", "1 2\nthree four\n");
  const auto r = call({"norm", "--input", garbage});
  CHECK(r.code == cli::kInputError);
  CHECK_THAT(r.err, ContainsSubstring("garbage.txt"));
}

TEST_CASE("eval refuses matrices above the cap") {
  const auto graph = sbm_file(60, 3, 2);
  REQUIRE(call({"--quiet", "embed", "--input", graph, "--function", "identity", "--L", "4", "--output",
                path("cap.bin")})
              .code == 0);
  CHECK(call({"eval", "--input", graph, "--function", "identity", "--approx", path("cap.bin"), "--cap", "50"})
            .code == cli::kCapExceeded);
}

TEST_CASE("norm examples") {
  const auto identity = write_file("identity.mtx",
                                   "%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 1\n2 2 1\n3 3 1\n");
  auto r = call({"norm", "--input", identity, "--format", "mtx", "--matrix", "raw"});
  REQUIRE(r.code == 0);
  CHECK_THAT(json::parse(r.out)["estimate"].get<double>(), WithinAbs(1.01, 1e-12));

  const auto diag = write_file("diag.mtx",
                               "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 0.3\n2 2 -0.9\n");
  r = call({"norm", "--input", diag, "--format", "mtx", "--matrix", "raw"});
  REQUIRE(r.code == 0);
  CHECK_THAT(json::parse(r.out)["estimate"].get<double>(), WithinAbs(0.909, 1e-12));

  const auto zero = write_file("zero.mtx", "%%MatrixMarket matrix coordinate real general\n4 4 0\n");
  r = call({"norm", "--input", zero, "--format", "mtx", "--matrix", "raw", "--output", path("zero.json")});
  REQUIRE(r.code == 0);
  CHECK(json::parse(slurp(path("zero.json")))["estimate"].get<double>() == 0.0);
}

TEST_CASE("embed is reproducible and replayable") {
  const auto graph = sbm_file(150, 3, 3);
  const std::vector<std::string> args{"--quiet", "embed", "--input", graph, "--function", "indicator:0.5",
                                      "--L", "40", "--b", "2", "--d", "12", "--seed", "9",
                                      "--output", path("a.bin"), "--output-csv", path("a.csv")};
  REQUIRE(call(args).code == 0);
  const auto first = slurp(path("a.bin"));
  const auto first_csv = slurp(path("a.csv"));
  REQUIRE(call(args).code == 0);
  CHECK(slurp(path("a.bin")) == first);

  auto threaded = args;
  threaded[threaded.size() - 3] = path("t.bin");
  threaded.insert(threaded.end(), {"--threads", "4"});
  threaded.back() = "4";
  REQUIRE(call(threaded).code == 0);
  CHECK(slurp(path("t.bin")) == first);

  const auto x = io::read_embedding(path("a.bin"));
  CHECK(x.rows() == 150);
  CHECK(x.cols() == 12);
  std::istringstream csv(first_csv);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(csv, line)) ++lines;
  CHECK(lines >= 150);

  const auto meta = json::parse(slurp(path("a.bin.json")));
  CHECK(meta["command"] == "embed");
  CHECK(meta["spmv"]["columns"].get<std::size_t>() == 40 * 12);
  CHECK(meta["config"]["d"] == 12);
  CHECK(meta["operator"]["matrix"] == "normalized-adjacency");
  CHECK(meta["operator"]["norm_estimate"].is_null());

  fs::remove(path("a.bin"));
  REQUIRE(call(meta["replay"].get<std::vector<std::string>>()).code == 0);
  CHECK(slurp(path("a.bin")) == first);
}

TEST_CASE("raw matrices above unit norm are rescaled") {
  std::ostringstream text;
  text << "%%MatrixMarket matrix coordinate real symmetric\n40 40 40\n";
  for (int i = 1; i <= 40; ++i) text << i << ' ' << i << ' ' << (i % 2 ? 3.0 : -1.5) << '\n';
  const auto big = write_file("big.mtx", text.str());
  REQUIRE(call({"--quiet", "embed", "--input", big, "--format", "mtx", "--matrix", "raw", "--function",
                "identity", "--L", "1", "--d", "4", "--output", path("big.bin")})
              .code == 0);
  const auto meta = json::parse(slurp(path("big.bin.json")));
  const double estimate = meta["operator"]["norm_estimate"].get<double>();
  CHECK(estimate >= 3.0);
  CHECK(estimate <= 3.03 + 1e-12);
  CHECK_THAT(meta["operator"]["scale"].get<double>(), WithinAbs(1.0 / estimate, 1e-15));
}

TEST_CASE("eval of the exact embedding against itself") {
  // With a degree-one function and L = 1 the embedding is exact up to
  // projection, so compare the projection against itself via a fixed d.
  const auto graph = sbm_file(80, 2, 4);
  REQUIRE(call({"--quiet", "embed", "--input", graph, "--function", "poly:0,1", "--L", "1", "--d", "2000",
                "--output", path("e.bin")})
              .code == 0);
  const auto r = call({"--quiet", "eval", "--input", graph, "--function", "poly:0,1", "--approx", path("e.bin"),
                       "--percentiles-out", path("p.csv"), "--calibration-out", path("c.csv")});
  REQUIRE(r.code == 0);
  const auto doc = json::parse(r.out);
  CHECK(doc["pair_sample_size"] == 80 * 79 / 2);
  CHECK(std::abs(doc["percentiles"]["50"].get<double>()) <= 0.05);
  CHECK(doc["fraction_within_0.2"].get<double>() >= 0.95);
  CHECK(slurp(path("p.csv")).rfind("percentile,value\n", 0) == 0);
  CHECK(slurp(path("c.csv")).rfind("bin_center,p1,p5,p25,p50,p75,p95,p99\n", 0) == 0);
}

TEST_CASE("cluster writes labels and a summary") {
  const auto graph = sbm_file(90, 3, 5);
  const auto r = call({"--quiet", "cluster", "--input", graph, "--function", "indicator:0.5", "--L", "30",
                       "--b", "2", "--d", "20", "--k", "3", "--runs", "3", "--labels-out", path("labels.csv")});
  REQUIRE(r.code == 0);
  const auto doc = json::parse(r.out);
  CHECK(doc["scores"].size() == 3);
  CHECK(doc["median_modularity"].get<double>() > 0.3);
  std::istringstream labels(slurp(path("labels.csv")));
  std::string line;
  std::getline(labels, line);
  CHECK(line == "vertex_id,cluster_id");
  std::size_t rows = 0;
  while (std::getline(labels, line)) ++rows;
  CHECK(rows == 90);

  // Clustering a stored embedding.
  REQUIRE(call({"--quiet", "embed", "--input", graph, "--function", "indicator:0.5", "--L", "30", "--b", "2",
                "--d", "20", "--output", path("c.bin")})
              .code == 0);
  const auto stored = call({"--quiet", "cluster", "--input", graph, "--embedding", path("c.bin"), "--k", "3",
                            "--runs", "1", "--summary", path("summary.json")});
  REQUIRE(stored.code == 0);
  CHECK(json::parse(slurp(path("summary.json")))["scores"].size() == 1);
}

TEST_CASE("dilation embeds rows and columns") {
  const auto a = random_general(7, 5, 0.6, 3);
  io::write_matrix_market(scratch() / "rect.mtx", a);
  REQUIRE(call({"--quiet", "embed", "--input", path("rect.mtx"), "--format", "mtx", "--matrix", "dilation",
                "--function", "identity", "--L", "1", "--d", "6", "--output", path("rows.bin")})
              .code == 0);
  CHECK(io::read_embedding(path("rows.bin")).rows() == 7);
  CHECK(io::read_embedding(path("rows.bin.cols")).rows() == 5);
}

TEST_CASE("the binary reports exit codes") {
  const std::string bin = CSEMB_BINARY;
  const int status = std::system((bin + " embed --quiet --input /nonexistent --function identity --output x "
                                        "2>/dev/null")
                                     .c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == cli::kInputError);
  CHECK(WEXITSTATUS(std::system((bin + " --help >/dev/null").c_str())) == 0);
}
