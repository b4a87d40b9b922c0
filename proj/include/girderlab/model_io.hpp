#pragma once

#include <filesystem>
#include <string>

#include "girderlab/damage.hpp"
#include "girderlab/model.hpp"

namespace girderlab {

struct ParseError {
    std::string message;
    int line = 0;
    int column = 0;
};

/// Loads a model description file (JSON with unit-annotated quantities).
/// The file either lists nodes/elements explicitly or names a generator with
/// parameter overrides. Throws std::runtime_error with line/column context.
BridgeModel load_model_file(const std::filesystem::path& path);

/// Loads a damage scenario file (ordered operator list with region selectors).
DamageScenario load_scenario_file(const std::filesystem::path& path);

/// Writes a model back out in the same hierarchical format (explicit form).
void save_model_file(const BridgeModel& model, const std::filesystem::path& path);

}  // namespace girderlab
