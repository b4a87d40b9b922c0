#pragma once

#include <optional>
#include <string>
#include <vector>

#include "girderlab/model.hpp"

namespace girderlab {

/// Selects elements by region tags and/or an axis-aligned box around the
/// element centroid. When both are given, the selection is the intersection.
struct RegionSelector {
    std::vector<std::string> tags;
    std::optional<Vec3d> box_min;
    std::optional<Vec3d> box_max;

    bool matches(const BridgeModel& model, const ShellElement& el) const;
};

enum class DamageKind { SectionLoss, StiffnessReduction, GeometricImperfection };

enum class ImperfectionShape { HalfSine, BucklingMode };

struct DamageOperator {
    DamageKind kind = DamageKind::SectionLoss;
    RegionSelector region;
    double fraction = 0.0;  // section loss / stiffness reduction, in (0,1)
    // geometric imperfection parameters
    ImperfectionShape shape = ImperfectionShape::HalfSine;
    Vec3d direction = Vec3d::UnitY();  // half-sine sweep direction
    double amplitude = 0.0;            // meters, max-norm of the seeded offsets
    int mode_index = 1;                // 1-based buckling mode
};

struct DamageScenario {
    std::string name = "scenario";
    std::vector<DamageOperator> operators;
};

struct DamageApplication {
    BridgeModel model;
    int affected_elements = 0;
    double affected_area = 0.0;    // plan area of affected elements
    double removed_volume = 0.0;   // steel volume removed (section loss)
    std::vector<std::string> notes;
};

/// Steel layer thicknesses multiplied by (1 - fraction) on the selected
/// elements; affected element stacks are cloned, the input stays untouched.
DamageApplication apply_section_loss(const BridgeModel& model, const RegionSelector& region,
                                     double fraction);

/// Material stiffness E multiplied by (1 - fraction) in the region; strengths
/// unchanged.
DamageApplication apply_stiffness_reduction(const BridgeModel& model,
                                            const RegionSelector& region, double fraction);

/// Stress-free nodal imperfection: half-sine lateral sweep over the selected
/// elements' nodes, or a buckling mode of the model under its load pattern,
/// scaled to the given max-norm amplitude. Offsets add to existing ones.
DamageApplication apply_geometric_imperfection(const BridgeModel& model,
                                               const DamageOperator& op);

/// Applies the scenario's operators in order.
DamageApplication apply_scenario(const BridgeModel& model, const DamageScenario& scenario);

/// Total steel volume of the model (smeared rebar counts both mesh sheets).
double steel_volume(const BridgeModel& model);
double steel_volume_in_region(const BridgeModel& model, const RegionSelector& region);

/// Order-independence check: applies every overlapping operator pair in both
/// orders and reports pairs whose composition differs.
std::vector<std::string> check_commutation(const BridgeModel& model,
                                           const DamageScenario& scenario);

/// Field-exact equality of two models (purity and determinism checks).
bool models_identical(const BridgeModel& a, const BridgeModel& b);

}  // namespace girderlab
