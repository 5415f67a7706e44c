#pragma once

#include <filesystem>

#include "gomp/linalg.hpp"

namespace gomp::io {

/// CSV: one matrix row per line, comma-separated decimals. Blank lines and
/// lines starting with '#' are skipped.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& matrix);

/// Binary: little-endian u32 rows, u32 cols, then rows*cols float64 values in
/// column-major order.
Matrix read_matrix_binary(const std::filesystem::path& path);
void write_matrix_binary(const std::filesystem::path& path, const Matrix& matrix);

/// Dispatches on extension: ".bin" is binary, anything else CSV.
Matrix read_matrix(const std::filesystem::path& path);

/// A vector stored either as a single CSV row or one value per line.
Vector read_vector_csv(const std::filesystem::path& path);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace gomp::io
