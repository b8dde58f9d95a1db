#include "hetdist/ingest.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

namespace hetdist {

namespace {

template <typename T>
T to_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool starts_numeric(std::string_view s) {
  s = trim(s);
  if (s.empty()) return false;
  const char c = s.front();
  return (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.';
}

std::string at_line(std::size_t line) { return "line " + std::to_string(line); }

bool parse_shape_header(std::string_view s, Index& rows, Index& cols) {
  s = trim(s);
  const auto comma = s.find(',');
  if (comma == std::string_view::npos) return false;
  auto field = [](std::string_view f, char key, Index& out) {
    f = trim(f);
    if (f.size() < 3 || f[0] != key || f[1] != '=') return false;
    const auto body = f.substr(2);
    auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), out);
    return ec == std::errc() && p == body.data() + body.size() && out >= 0;
  };
  return field(s.substr(0, comma), 'n', rows) && field(s.substr(comma + 1), 'm', cols);
}

DataMatrix read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());

  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  Index declared_rows = -1;
  Index declared_cols = -1;
  bool seen_content = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    if (!seen_content) {
      seen_content = true;
      if (!starts_numeric(view)) {
        parse_shape_header(view, declared_rows, declared_cols);
        continue;
      }
    }
    Index fields = 0;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = view.find(',', start);
      const std::string_view tok =
          trim(view.substr(start, comma == std::string_view::npos ? view.npos : comma - start));
      double v = 0.0;
      const char* first = tok.data();
      const char* last = tok.data() + tok.size();
      if (!tok.empty() && *first == '+') ++first;
      auto [p, ec] = std::from_chars(first, last, v);
      if (tok.empty() || ec != std::errc() || p != last) {
        throw Error(ErrorKind::ParseError, at_line(line_no) + ", column " +
                                               std::to_string(fields + 1) + ": cannot parse '" +
                                               std::string(tok) + "'");
      }
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::ParseError, at_line(line_no) + ": non-finite value");
      }
      values.push_back(v);
      ++fields;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cols < 0) {
      cols = fields;
    } else if (fields != cols) {
      throw Error(ErrorKind::DimensionMismatch, at_line(line_no) + " has " +
                                                    std::to_string(fields) + " fields, expected " +
                                                    std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw Error(ErrorKind::ParseError, path.string() + ": no data rows");
  if (declared_rows >= 0 && (declared_rows != rows || declared_cols != cols)) {
    throw Error(ErrorKind::DimensionMismatch,
                "header declares " + std::to_string(declared_rows) + "x" +
                    std::to_string(declared_cols) + ", payload is " + std::to_string(rows) + "x" +
                    std::to_string(cols));
  }
  return Eigen::Map<DataMatrix>(values.data(), rows, cols);
}

DataMatrix read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::uint64_t dims[2];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(dims))) {
    throw Error(ErrorKind::ParseError, "offset 0: truncated 16-byte header");
  }
  const std::uint64_t rows = to_little_endian(dims[0]);
  const std::uint64_t cols = to_little_endian(dims[1]);
  if (rows == 0 || cols == 0) throw Error(ErrorKind::ParseError, "offset 0: empty matrix");

  const auto size = std::filesystem::file_size(path);
  if (size != sizeof(dims) + rows * cols * sizeof(double)) {
    throw Error(ErrorKind::DimensionMismatch,
                "header declares " + std::to_string(rows) + "x" + std::to_string(cols) +
                    " but payload has " + std::to_string(size - sizeof(dims)) + " bytes");
  }
  DataMatrix out(static_cast<Index>(rows), static_cast<Index>(cols));
  in.read(reinterpret_cast<char*>(out.data()),
          static_cast<std::streamsize>(rows * cols * sizeof(double)));
  if (!in) throw Error(ErrorKind::IoError, "short read from " + path.string());
  for (Index i = 0; i < out.size(); ++i) {
    double& v = out.data()[i];
    v = to_little_endian(v);
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::ParseError,
                  "offset " + std::to_string(sizeof(dims) + i * sizeof(double)) +
                      ": non-finite value");
    }
  }
  return out;
}

}  // namespace

MatrixFormat parse_matrix_format(const std::string& name) {
  if (name == "csv" || name == "csv_dense") return MatrixFormat::CsvDense;
  if (name == "bin" || name == "binary" || name == "binary_dense") return MatrixFormat::BinaryDense;
  throw Error(ErrorKind::InvalidArgument, "unknown matrix format '" + name + "'");
}

MatrixFormat format_from_extension(const std::filesystem::path& path) {
  return path.extension() == ".bin" ? MatrixFormat::BinaryDense : MatrixFormat::CsvDense;
}

std::string format_double(double value) {
  std::array<char, 32> buf{};
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), p);
}

DataMatrix read_matrix(const std::filesystem::path& path, MatrixFormat format) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::IoError, "no such file: " + path.string());
  }
  return format == MatrixFormat::CsvDense ? read_csv(path) : read_binary(path);
}

void write_matrix(const DataMatrix& data, const std::filesystem::path& path,
                  MatrixFormat format) {
  if (format == MatrixFormat::CsvDense) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << "n=" << data.rows() << ",m=" << data.cols() << '\n';
    for (Index i = 0; i < data.rows(); ++i) {
      for (Index j = 0; j < data.cols(); ++j) {
        if (j) out << ',';
        out << format_double(data(i, j));
      }
      out << '\n';
    }
    if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
    return;
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  const std::uint64_t dims[2] = {to_little_endian(static_cast<std::uint64_t>(data.rows())),
                                 to_little_endian(static_cast<std::uint64_t>(data.cols()))};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
  } else {
    for (Index i = 0; i < data.size(); ++i) {
      const double v = to_little_endian(data.data()[i]);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace hetdist
