#pragma once

// Plain-text file formats: dense matrices as headerless CSV, vectors as a
// single CSV column. Parse errors carry the file name and line number.

#include "pfa/matrix.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pfa {

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);
/// Strict parse of a whole field; throws Parse naming `context` on failure.
double parse_double(std::string_view field, std::string_view context);

Matrix parse_matrix_csv(std::string_view text, std::string_view source);
std::vector<double> parse_vector_csv(std::string_view text, std::string_view source);

Matrix read_matrix_csv(const std::filesystem::path& path);
std::vector<double> read_vector_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
void write_vector_csv(const std::filesystem::path& path, std::span<const double> v);

}  // namespace pfa
