#include "gomp/matrix_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace gomp::io {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary matrix I/O assumes a little-endian host");

std::vector<double> parse_row(const std::string& line, const std::filesystem::path& path,
                              std::size_t line_no) {
  std::vector<double> row;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) comma = line.size();
    std::string field = line.substr(pos, comma - pos);
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    if (first == std::string::npos) {
      throw ArgumentError(path.string() + ":" + std::to_string(line_no) + ": empty field");
    }
    field = field.substr(first, last - first + 1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw ArgumentError(path.string() + ":" + std::to_string(line_no) +
                          ": not a number: '" + field + "'");
    }
    row.push_back(value);
    pos = comma + 1;
  }
  return row;
}

std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    rows.push_back(parse_row(line, path, line_no));
  }
  return rows;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

Matrix read_matrix_csv(const std::filesystem::path& path) {
  const auto rows = read_csv_rows(path);
  if (rows.empty()) throw ArgumentError(path.string() + ": no data rows");
  const std::size_t cols = rows.front().size();
  Eigen::MatrixXd data(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw ArgumentError(path.string() + ": row " + std::to_string(i + 1) + " has " +
                          std::to_string(rows[i].size()) + " fields, expected " +
                          std::to_string(cols));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      data(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return Matrix(std::move(data));
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& matrix) {
  std::string out;
  for (Index i = 0; i < matrix.rows(); ++i) {
    for (Index j = 0; j < matrix.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(matrix(i, j));
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

Matrix read_matrix_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::uint32_t header[2] = {0, 0};
  if (!in.read(reinterpret_cast<char*>(header), sizeof(header))) {
    throw ArgumentError(path.string() + ": truncated header");
  }
  const auto rows = static_cast<Index>(header[0]);
  const auto cols = static_cast<Index>(header[1]);
  if (rows < 1 || cols < 1) throw ArgumentError(path.string() + ": empty matrix");
  Eigen::MatrixXd data(rows, cols);
  const auto bytes = static_cast<std::streamsize>(sizeof(double) * rows * cols);
  if (!in.read(reinterpret_cast<char*>(data.data()), bytes)) {
    throw ArgumentError(path.string() + ": expected " + std::to_string(rows * cols) +
                        " float64 values");
  }
  if (in.peek() != std::ifstream::traits_type::eof()) {
    throw ArgumentError(path.string() + ": trailing bytes after matrix data");
  }
  return Matrix(std::move(data));
}

void write_matrix_binary(const std::filesystem::path& path, const Matrix& matrix) {
  const std::uint32_t header[2] = {static_cast<std::uint32_t>(matrix.rows()),
                                   static_cast<std::uint32_t>(matrix.cols())};
  std::string out(reinterpret_cast<const char*>(header), sizeof(header));
  out.append(reinterpret_cast<const char*>(matrix.data().data()),
             sizeof(double) * static_cast<std::size_t>(matrix.rows() * matrix.cols()));
  write_file_atomic(path, out);
}

Matrix read_matrix(const std::filesystem::path& path) {
  if (path.extension() == ".bin") return read_matrix_binary(path);
  return read_matrix_csv(path);
}

Vector read_vector_csv(const std::filesystem::path& path) {
  const auto rows = read_csv_rows(path);
  if (rows.empty()) throw ArgumentError(path.string() + ": no data");
  std::vector<double> values;
  if (rows.size() == 1) {
    values = rows.front();
  } else {
    for (const auto& row : rows) {
      if (row.size() != 1) {
        throw ArgumentError(path.string() + ": vector must be one row or one column");
      }
      values.push_back(row.front());
    }
  }
  Vector out(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<Index>(i)) = values[i];
  if (!out.allFinite()) throw ArgumentError(path.string() + ": non-finite value");
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename onto " + path.string());
  }
}

}  // namespace gomp::io
