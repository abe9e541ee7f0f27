#pragma once

#include <filesystem>

#include "mpe/grid.hpp"

namespace mpe {

/// Writes `<base>.bin` (little-endian float64; re/im interleaved for complex
/// fields) and `<base>.json` with {dim, n, length, scalar_kind} plus the
/// optional keys origin and components.
void write_field(const std::filesystem::path& base, const Field& f);

/// Reads a field written by write_field. A missing origin reads as 0 and
/// missing components as 1.
Field read_field(const std::filesystem::path& base);

/// CSV with columns x[,y] followed by one value column per component
/// (value, or value_re,value_im for complex fields).
void write_field_csv(const std::filesystem::path& path, const Field& f);

}  // namespace mpe
