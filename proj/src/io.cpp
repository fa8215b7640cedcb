#include "csemb/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "csemb/error.hpp"

namespace csemb::io {

namespace {

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw ParseError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path,
                          std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw ParseError("cannot open '" + path.string() + "' for writing");
  return out;
}

// Parses a file with the stream reader, naming the file in any parse error.
template <class Reader>
auto read_named(const std::filesystem::path& path, Reader reader) {
  auto in = open_input(path);
  try {
    return reader(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view token, T& value) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

std::string at_line(std::size_t line) { return " (line " + std::to_string(line) + ")"; }

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0x00000000000000FFull) << 56) | ((v & 0x000000000000FF00ull) << 40) |
        ((v & 0x0000000000FF0000ull) << 24) | ((v & 0x00000000FF000000ull) << 8) |
        ((v & 0x000000FF00000000ull) >> 8) | ((v & 0x0000FF0000000000ull) >> 24) |
        ((v & 0x00FF000000000000ull) >> 40) | ((v & 0xFF00000000000000ull) >> 56);
  }
  return v;
}

void write_u64(std::ostream& out, std::uint64_t v) {
  const std::uint64_t le = to_little_endian(v);
  out.write(reinterpret_cast<const char*>(&le), sizeof le);
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t le = 0;
  if (!in.read(reinterpret_cast<char*>(&le), sizeof le)) {
    throw ParseError("embedding file: truncated header");
  }
  return to_little_endian(le);
}

}  // namespace

// ---------------------------------------------------------------------------
// Edge lists
// ---------------------------------------------------------------------------

EdgeList read_edge_list(std::istream& in) {
  EdgeList result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto tokens = split_whitespace(text);
    if (tokens.size() < 2) throw ParseError("edge list: expected 'u v'" + at_line(line_no));
    Index u = 0;
    Index v = 0;
    if (!parse_number(tokens[0], u) || !parse_number(tokens[1], v)) {
      throw ParseError("edge list: vertex ids must be integers" + at_line(line_no));
    }
    if (u < 0 || v < 0) throw ParseError("edge list: negative vertex id" + at_line(line_no));
    result.edges.push_back({u, v});
    result.n_vertices = std::max({result.n_vertices, u + 1, v + 1});
  }
  return result;
}

EdgeList read_edge_list(const std::filesystem::path& path) {
  return read_named(path, [](std::istream& in) { return read_edge_list(in); });
}

// ---------------------------------------------------------------------------
// Matrix Market
// ---------------------------------------------------------------------------

SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("matrix market: empty input");
  ++line_no;
  std::string lowered = line;
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const auto header = split_whitespace(lowered);
  if (header.size() < 5 || header[0] != "%%matrixmarket" || header[1] != "matrix") {
    throw ParseError("matrix market: missing '%%MatrixMarket matrix' banner");
  }
  if (header[2] != "coordinate") {
    throw ParseError("matrix market: only coordinate format is supported");
  }
  const auto field = header[3];
  const auto symmetry = header[4];
  const bool pattern = field == "pattern";
  if (!pattern && field != "real" && field != "integer" && field != "double") {
    throw ParseError("matrix market: unsupported field '" + std::string(field) + "'");
  }
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general") {
    throw ParseError("matrix market: unsupported symmetry '" + std::string(symmetry) + "'");
  }

  Index rows = -1;
  Index cols = -1;
  Index declared = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '%') continue;
    const auto tokens = split_whitespace(text);
    if (tokens.size() != 3 || !parse_number(tokens[0], rows) || !parse_number(tokens[1], cols) ||
        !parse_number(tokens[2], declared) || rows < 0 || cols < 0 || declared < 0) {
      throw ParseError("matrix market: bad size line" + at_line(line_no));
    }
    break;
  }
  if (declared < 0) throw ParseError("matrix market: missing size line");
  if (symmetric && rows != cols) throw ParseError("matrix market: symmetric matrix must be square");

  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(symmetric ? 2 * declared : declared));
  Index seen = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '%') continue;
    const auto tokens = split_whitespace(text);
    Index i = 0;
    Index j = 0;
    double v = 1.0;
    const std::size_t expected = pattern ? 2 : 3;
    if (tokens.size() < expected || !parse_number(tokens[0], i) || !parse_number(tokens[1], j) ||
        (!pattern && !parse_number(tokens[2], v))) {
      throw ParseError("matrix market: bad entry" + at_line(line_no));
    }
    if (i < 1 || j < 1 || i > rows || j > cols) {
      throw ParseError("matrix market: entry index out of range" + at_line(line_no));
    }
    entries.push_back({i - 1, j - 1, v});
    if (symmetric && i != j) entries.push_back({j - 1, i - 1, v});
    ++seen;
  }
  if (seen != declared) {
    throw ParseError("matrix market: header declares " + std::to_string(declared) +
                     " entries, found " + std::to_string(seen));
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(entries));
}

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  return read_named(path, [](std::istream& in) { return read_matrix_market(in); });
}

void write_matrix_market(std::ostream& out, const SparseMatrix& m, bool symmetric) {
  if (symmetric && !m.is_symmetric()) {
    throw InvalidInput("write_matrix_market: matrix is not symmetric");
  }
  const auto offsets = m.row_offsets();
  const auto cols = m.col_indices();
  const auto vals = m.values();
  Index count = 0;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index k = offsets[i]; k < offsets[i + 1]; ++k) {
      if (!symmetric || cols[k] <= i) ++count;
    }
  }
  out << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << '\n';
  out << m.rows() << ' ' << m.cols() << ' ' << count << '\n';
  out << std::setprecision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index k = offsets[i]; k < offsets[i + 1]; ++k) {
      if (symmetric && cols[k] > i) continue;
      out << i + 1 << ' ' << cols[k] + 1 << ' ' << vals[k] << '\n';
    }
  }
}

void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& m,
                         bool symmetric) {
  auto out = open_output(path);
  write_matrix_market(out, m, symmetric);
}

// ---------------------------------------------------------------------------
// Point clouds
// ---------------------------------------------------------------------------

std::vector<std::vector<double>> read_points_csv(std::istream& in) {
  std::vector<std::vector<double>> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    std::vector<double> point;
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t comma = text.find(',', start);
      const auto token =
          trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
      double v = 0.0;
      if (!parse_number(token, v)) throw ParseError("points csv: bad number" + at_line(line_no));
      point.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!points.empty() && point.size() != points.front().size()) {
      throw ParseError("points csv: inconsistent dimension" + at_line(line_no));
    }
    points.push_back(std::move(point));
  }
  return points;
}

std::vector<std::vector<double>> read_points_csv(const std::filesystem::path& path) {
  return read_named(path, [](std::istream& in) { return read_points_csv(in); });
}

// ---------------------------------------------------------------------------
// Embedding files
// ---------------------------------------------------------------------------

void write_embedding(std::ostream& out, const DenseBlock& block) {
  out.write(kEmbeddingMagic, 8);
  write_u64(out, block.rows());
  write_u64(out, block.cols());
  for (double v : block.values()) write_u64(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw ParseError("embedding file: write failed");
}

void write_embedding(const std::filesystem::path& path, const DenseBlock& block) {
  auto out = open_output(path, std::ios::out | std::ios::binary);
  write_embedding(out, block);
}

DenseBlock read_embedding(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), 8) || std::memcmp(magic.data(), kEmbeddingMagic, 8) != 0) {
    throw ParseError("embedding file: missing CSEMB001 tag");
  }
  const std::uint64_t rows = read_u64(in);
  const std::uint64_t cols = read_u64(in);
  if (cols != 0 && rows > (std::uint64_t{1} << 40) / cols) {
    throw ParseError("embedding file: implausible shape");
  }
  std::vector<double> values(rows * cols);
  for (auto& v : values) {
    std::uint64_t bits = 0;
    if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
      throw ParseError("embedding file: payload shorter than header declares");
    }
    v = std::bit_cast<double>(to_little_endian(bits));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("embedding file: trailing bytes after payload");
  }
  return DenseBlock(rows, cols, std::move(values));
}

DenseBlock read_embedding(const std::filesystem::path& path) {
  auto in = open_input(path, std::ios::in | std::ios::binary);
  return read_embedding(in);
}

void write_embedding_csv(const std::filesystem::path& path, const DenseBlock& block) {
  auto out = open_output(path);
  out << "row";
  for (std::size_t j = 0; j < block.cols(); ++j) out << ",c" << j;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < block.rows(); ++i) {
    out << i;
    for (double v : block.row(i)) out << ',' << v;
    out << '\n';
  }
}

}  // namespace csemb::io
