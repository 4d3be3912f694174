#pragma once

// Text formats.
//
// Tensor file:
//     tensor N d1 ... dN
//     v1 v2 ...            (∏ d values, column-major, any whitespace)
// Factor file:
//     factors N R d1 ... dN
//     N blocks; block n holds d_n rows of R values
// Lines whose first non-blank character is '#' are ignored.

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "cphom/pipeline.hpp"

namespace cphom {

DenseTensor parse_tensor(std::istream& in);
FactorSet parse_factors(std::istream& in);
void write_tensor(std::ostream& out, const DenseTensor& t);
void write_factors(std::ostream& out, const FactorSet& f);

DenseTensor read_tensor_file(const std::string& path);
FactorSet read_factor_file(const std::string& path);
void write_tensor_file(const std::string& path, const DenseTensor& t);
void write_factor_file(const std::string& path, const FactorSet& f);

/// Fixed key set: relative_error, s_real, deltas, paths, seed, gamma_re, gamma_im, rank_used.
nlohmann::json report_to_json(const DecompositionReport& rep);
std::string report_to_text(const DecompositionReport& rep);

/// Formats with 17 significant digits so double values roundtrip exactly.
std::string format_real(double v);

} // namespace cphom
