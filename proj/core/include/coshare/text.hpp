#pragma once

#include <string>

namespace coshare {

/// Shortest decimal form that parses back to exactly the same double
/// (round-trip formatting). Keeps generated CSVs byte-stable across
/// platforms, unlike locale- or precision-dependent stream output.
std::string format_double(double value);

} // namespace coshare
