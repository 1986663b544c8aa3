#include "sdl/matrix_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

#include "sdl/errors.hpp"

namespace sdl {
namespace {

constexpr char kMagic[4] = {'S', 'D', 'L', 'M'};
constexpr std::size_t kHeaderSize = 4 + 1 + 8 + 8;

void put_u64(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

std::uint64_t get_u64(std::string_view bytes, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
  }
  return v;
}

}  // namespace

void write_matrix_binary(std::ostream& out, const DenseMatrix& m) {
  out.write(kMagic, 4);
  out.put(static_cast<char>(kMatrixFormatVersion));
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  put_u64(out, static_cast<std::uint64_t>(m.cols()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      put_u64(out, std::bit_cast<std::uint64_t>(m(i, j)));
    }
  }
}

void write_matrix_csv(std::ostream& out, const DenseMatrix& m) {
  char buf[64];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out.put(',');
      // Shortest representation that round-trips exactly.
      const auto res = std::to_chars(buf, buf + sizeof(buf), m(i, j));
      out.write(buf, res.ptr - buf);
    }
    out.put('\n');
  }
}

DenseMatrix read_matrix_binary(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ParseError("missing SDLM magic", 0);
  }
  if (bytes.size() < kHeaderSize) throw ParseError("truncated SDLM header", bytes.size());
  const auto version = static_cast<std::uint8_t>(bytes[4]);
  if (version != kMatrixFormatVersion) {
    throw ParseError("unsupported SDLM version " + std::to_string(version), 4);
  }
  const std::uint64_t rows = get_u64(bytes, 5);
  const std::uint64_t cols = get_u64(bytes, 13);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / 8;
  if (rows != 0 && cols > limit / rows) throw ParseError("SDLM dimensions overflow", 5);
  const std::uint64_t payload = rows * cols * 8;
  if (bytes.size() - kHeaderSize < payload) {
    throw ParseError("truncated SDLM payload: expected " + std::to_string(payload) + " bytes",
                     bytes.size());
  }
  if (bytes.size() - kHeaderSize > payload) {
    throw ParseError("trailing bytes after SDLM payload", kHeaderSize + payload);
  }
  DenseMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  std::size_t at = kHeaderSize;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      const double v = std::bit_cast<double>(get_u64(bytes, at));
      if (!std::isfinite(v)) throw ParseError("non-finite matrix entry", at);
      m(i, j) = v;
      at += 8;
    }
  }
  return m;
}

DenseMatrix read_matrix_csv(std::string_view text) {
  std::vector<double> values;
  Index rows = 0;
  Index cols = -1;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      pos = end + 1;
      continue;
    }
    Index count = 0;
    std::size_t field = 0;
    while (true) {
      std::size_t comma = line.find(',', field);
      if (comma == std::string_view::npos) comma = line.size();
      std::string_view token = line.substr(field, comma - field);
      std::size_t lead = 0;
      while (lead < token.size() && (token[lead] == ' ' || token[lead] == '\t')) ++lead;
      std::size_t trail = token.size();
      while (trail > lead && (token[trail - 1] == ' ' || token[trail - 1] == '\t')) --trail;
      const std::uint64_t offset = pos + field + lead;
      std::string_view num = token.substr(lead, trail - lead);
      if (!num.empty() && num.front() == '+') num.remove_prefix(1);
      double v = 0.0;
      const auto res = std::from_chars(num.data(), num.data() + num.size(), v);
      if (num.empty() || res.ec != std::errc{} || res.ptr != num.data() + num.size()) {
        throw ParseError("invalid number '" + std::string(token) + "'", offset);
      }
      if (!std::isfinite(v)) throw ParseError("non-finite matrix entry", offset);
      values.push_back(v);
      ++count;
      if (comma == line.size()) break;
      field = comma + 1;
    }
    if (cols < 0) {
      cols = count;
    } else if (count != cols) {
      throw ParseError("row " + std::to_string(rows + 1) + " has " + std::to_string(count) +
                           " fields, expected " + std::to_string(cols),
                       pos);
    }
    ++rows;
    pos = end + 1;
  }
  if (cols < 0) cols = 0;
  DenseMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  return m;
}

DenseMatrix parse_matrix(std::string_view bytes) {
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0) {
    return read_matrix_binary(bytes);
  }
  return read_matrix_csv(bytes);
}

DenseMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading " + path.string());
  try {
    return parse_matrix(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.message(), e.offset());
  }
}

void save_matrix(const std::filesystem::path& path, const DenseMatrix& m, MatrixFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  if (format == MatrixFormat::Csv) {
    write_matrix_csv(out, m);
  } else {
    write_matrix_binary(out, m);
  }
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

void save_matrix(const std::filesystem::path& path, const DenseMatrix& m) {
  save_matrix(path, m, path.extension() == ".csv" ? MatrixFormat::Csv : MatrixFormat::Binary);
}

}  // namespace sdl
