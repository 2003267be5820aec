#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>

#include "wavecoder/field.hpp"

namespace wavecoder {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Binary field format, little-endian:
//   "WFLD" | u32 n | f64 dx | f64 wavelength | n*n x (f64 re, f64 im), row-major
void write_field(std::ostream& os, const ComplexField& field);
ComplexField read_field(std::istream& is);
void save_field(const std::filesystem::path& path, const ComplexField& field);
ComplexField load_field(const std::filesystem::path& path);

/// Real-valued array as a field with zero imaginary parts.
ComplexField real_to_field(const Grid& grid, const RealTensor& values);

/// 8-bit binary PGM (P5). Values are clamped to [lo, hi] and mapped to 0..255.
void save_pgm(const std::filesystem::path& path, const RealTensor& values, double lo, double hi);

/// Phase map wrapped to [0, 2 pi) and written as P5.
void save_phase_pgm(const std::filesystem::path& path, const ComplexTensor& coefficients);

}  // namespace wavecoder
