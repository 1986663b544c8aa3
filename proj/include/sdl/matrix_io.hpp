#pragma once

// Matrix file formats.
//
// Binary ("SDLM"): the 4 magic bytes "SDLM", a version byte (1), rows and
// cols as little-endian uint64, then rows*cols little-endian IEEE-754
// doubles in row-major order.
//
// CSV: one matrix row per line, comma-separated, no header.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "sdl/types.hpp"

namespace sdl {

enum class MatrixFormat { Binary, Csv };

inline constexpr std::uint8_t kMatrixFormatVersion = 1;

void write_matrix_binary(std::ostream& out, const DenseMatrix& m);
void write_matrix_csv(std::ostream& out, const DenseMatrix& m);

// Parse errors carry the byte offset of the offending input.
DenseMatrix read_matrix_binary(std::string_view bytes);
DenseMatrix read_matrix_csv(std::string_view text);

// Sniffs the magic bytes to pick the format.
DenseMatrix parse_matrix(std::string_view bytes);

// File helpers; failures to open or write raise IoError. Format on write is
// chosen from the extension (".csv" -> CSV, anything else -> binary) unless given.
DenseMatrix load_matrix(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const DenseMatrix& m);
void save_matrix(const std::filesystem::path& path, const DenseMatrix& m, MatrixFormat format);

}  // namespace sdl
