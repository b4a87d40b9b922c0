#include "girderlab/units.hpp"

#include <cstdlib>
#include <cctype>

namespace girderlab {

std::optional<double> unit_factor(const std::string& symbol, UnitKind kind) {
    switch (kind) {
        case UnitKind::Length:
            if (symbol == "m") return 1.0;
            if (symbol == "mm") return 1e-3;
            if (symbol == "cm") return 1e-2;
            if (symbol == "in") return 0.0254;
            if (symbol == "ft") return 0.3048;
            return std::nullopt;
        case UnitKind::Force:
            if (symbol == "N") return 1.0;
            if (symbol == "kN") return 1e3;
            if (symbol == "MN") return 1e6;
            if (symbol == "lbf") return 4.4482216152605;
            if (symbol == "kip") return 4448.2216152605;
            return std::nullopt;
        case UnitKind::Pressure:
            if (symbol == "Pa") return 1.0;
            if (symbol == "kPa") return 1e3;
            if (symbol == "MPa") return 1e6;
            if (symbol == "GPa") return 1e9;
            if (symbol == "psi") return 6894.757293168;
            if (symbol == "ksi") return 6.894757293168e6;
            return std::nullopt;
        case UnitKind::Dimensionless:
            if (symbol.empty()) return 1.0;
            if (symbol == "%") return 1e-2;
            return std::nullopt;
    }
    return std::nullopt;
}

std::optional<double> parse_quantity(const std::string& text, UnitKind kind) {
    const char* begin = text.c_str();
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end == begin) return std::nullopt;
    std::string rest(end);
    size_t first = rest.find_first_not_of(" \t");
    size_t last = rest.find_last_not_of(" \t");
    std::string symbol =
        (first == std::string::npos) ? std::string() : rest.substr(first, last - first + 1);
    if (symbol.empty()) return value;  // bare number: SI
    auto factor = unit_factor(symbol, kind);
    if (!factor) return std::nullopt;
    return value * *factor;
}

}  // namespace girderlab
