#pragma once

#include <filesystem>
#include <variant>

#include "eklab/field.hpp"

namespace eklab {

/// Binary snapshot layout (all integers and floats little-endian):
///   "EKFS" | u32 version=1 | u32 grid kind | u32 complex flag | u32 dims
///   | u64 points[dims] | f64 length[dims] | f64 spacing[dims]
///   | payload: f64 values in row-major node order, (re, im) pairs if complex.
void write_snapshot(const std::filesystem::path& path, const ScalarField& f);
void write_snapshot(const std::filesystem::path& path, const ComplexField& f);
std::variant<ScalarField, ComplexField> read_snapshot(const std::filesystem::path& path);

/// CSV with one row per node: coordinates then value columns (re, im if complex).
void write_csv(const std::filesystem::path& path, const ScalarField& f);
void write_csv(const std::filesystem::path& path, const ComplexField& f);

}  // namespace eklab
