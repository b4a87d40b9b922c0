#pragma once

#include <optional>
#include <string>

namespace girderlab {

/// Physical dimension of a quantity read from a model file.
enum class UnitKind { Length, Force, Pressure, Dimensionless };

/// Converts "190.5 mm", "1806 kN", "345 MPa" style strings to SI (m, N, Pa).
/// Bare numbers are taken as SI. Returns nullopt on unknown unit or bad number.
std::optional<double> parse_quantity(const std::string& text, UnitKind kind);

/// Conversion factor to SI for a unit symbol, or nullopt if the symbol does
/// not name a unit of the requested kind.
std::optional<double> unit_factor(const std::string& symbol, UnitKind kind);

}  // namespace girderlab
