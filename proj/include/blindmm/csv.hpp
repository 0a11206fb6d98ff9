#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "blindmm/linalg.hpp"

namespace blindmm {

// Plain numeric CSV: no header, one matrix row per line, vectors as a single
// column. Blank lines are ignored; ragged rows and non-numeric or non-finite
// cells are Parse errors.

Matrix parse_matrix_csv(std::string_view text, std::string_view source = "<string>");
Vector parse_vector_csv(std::string_view text, std::string_view source = "<string>");

Matrix read_matrix_csv(const std::filesystem::path& path);
Vector read_vector_csv(const std::filesystem::path& path);

/// Shortest round-trip representation, one row per line.
std::string format_matrix_csv(const Matrix& a);
std::string format_vector_csv(const Vector& x);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace blindmm
