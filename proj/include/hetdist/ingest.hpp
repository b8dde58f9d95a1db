#pragma once

#include <filesystem>
#include <string>

#include "hetdist/error.hpp"
#include "hetdist/types.hpp"

namespace hetdist {

/// On-disk matrix layouts.
///
/// csv_dense: comma separated, '.' decimal point, '#' starts a comment line.
///   An optional first non-comment line that does not start with a number is
///   a header. A header of the form "n=<rows>,m=<cols>" declares the shape
///   and is checked against the payload; any other header (column names) is
///   skipped.
/// binary_dense: two little-endian uint64 (rows, cols) followed by rows*cols
///   little-endian float64 values in row-major order.
enum class MatrixFormat { CsvDense, BinaryDense };

MatrixFormat parse_matrix_format(const std::string& name);

/// Picks BinaryDense for a ".bin" extension and CsvDense otherwise.
MatrixFormat format_from_extension(const std::filesystem::path& path);

/// Throws ParseError (with line or byte offset), DimensionMismatch or IoError.
DataMatrix read_matrix(const std::filesystem::path& path, MatrixFormat format);

/// CSV output uses the shortest decimal form that round-trips. Throws IoError.
void write_matrix(const DataMatrix& data, const std::filesystem::path& path,
                  MatrixFormat format);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

/// Divides every row by its sum. Throws EmptyRow (with the row index) when a
/// row sum is not positive and InvalidArgument on negative counts.
template <typename Derived>
DataMatrix library_normalize(const Eigen::MatrixBase<Derived>& counts) {
  DataMatrix out = counts.template cast<double>();
  if ((out.array() < 0.0).any()) {
    throw Error(ErrorKind::InvalidArgument, "counts must be nonnegative");
  }
  for (Index i = 0; i < out.rows(); ++i) {
    const double total = out.row(i).sum();
    if (!(total > 0.0)) throw IndexedError(ErrorKind::EmptyRow, i, "row sums to zero");
    out.row(i) /= total;
  }
  return out;
}

}  // namespace hetdist
