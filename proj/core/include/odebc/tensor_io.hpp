#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "odebc/tensor.hpp"

namespace odebc {

/// ODBC1 tensor file layout, all little-endian:
///   "ODBC1" | u32 rank | u32 dims[rank] | f64 values[prod(dims)]
std::vector<std::uint8_t> encode_tensor(const Tensor& t);
/// Throws IoError on a bad magic, truncated payload or trailing bytes.
Tensor decode_tensor(const std::vector<std::uint8_t>& bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

/// 8-bit binary PGM of an image tensor (first channel); values are mapped
/// affinely from [lo, hi] to [0, 255] and clamped.
void write_pgm(const std::filesystem::path& path, const Tensor& t, double lo, double hi);

/// Writes text to a file, throwing IoError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace odebc
