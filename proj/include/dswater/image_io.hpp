#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dswater/grid.hpp"

namespace dswater {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Binary PGM (P5), maxval 255.
void write_pgm(const std::filesystem::path& path, const Grid<std::uint8_t>& image);
Grid<std::uint8_t> read_pgm(const std::filesystem::path& path);

/// Binary PPM (P6), maxval 255.
void write_ppm(const std::filesystem::path& path, const Grid<Rgb>& image);
Grid<Rgb> read_ppm(const std::filesystem::path& path);

/// round(255 * v) with v clamped to [0, 1].
std::uint8_t unit_to_byte(double v) noexcept;

}  // namespace dswater
