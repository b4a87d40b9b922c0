#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "girderlab/materials.hpp"

namespace girderlab {

using Vec2 = Eigen::Vector2d;
using Vec3d = Eigen::Vector3d;

// ============================================================================
// Model entities
// ============================================================================

struct Node {
    int id = 0;
    Vec3d position = Vec3d::Zero();
    /// Stress-free geometric imperfection, added to position when elements
    /// compute their reference geometry.
    Vec3d imperfection_offset = Vec3d::Zero();
};

enum class LayerKind { SolidSteel, SolidConcrete, SmearedRebar };

struct Layer {
    int material_id = 0;
    double thickness = 0.0;  // meters
    LayerKind kind = LayerKind::SolidSteel;
    /// Steel area ratio of a rebar mesh; the mesh runs along rebar_direction
    /// and its in-plane perpendicular, ratio rho each way.
    double rebar_ratio = 0.0;
    Vec2 rebar_direction = Vec2(1.0, 0.0);
};

struct LayerStack {
    int id = 0;
    std::vector<Layer> layers;  // bottom to top
    /// Signed distance from the element reference plane to the stack bottom.
    double reference_offset = 0.0;

    double total_thickness() const {
        double t = 0.0;
        for (const auto& l : layers) t += l.thickness;
        return t;
    }
};

struct ShellElement {
    int id = 0;
    std::array<int, 4> node_ids{};  // counterclockwise
    int layer_stack_id = 0;
    std::set<std::string> region_tags;
};

enum Dof { UX = 0, UY = 1, UZ = 2, RX = 3, RY = 4, RZ = 5 };

struct Support {
    int node_id = 0;
    std::set<int> fixed_dofs;       // subset of Dof
    double prescribed_value = 0.0;  // meters or radians
};

struct PointLoad {
    int node_id = 0;
    Vec3d force = Vec3d::Zero();  // newtons
};

struct PatchLoad {
    Vec3d center = Vec3d::Zero();
    Vec2 extent = Vec2::Zero();     // footprint sides, meters
    double resultant = 0.0;         // newtons (total over the footprint)
    Vec3d direction = -Vec3d::UnitZ();
};

struct LoadCase {
    std::vector<PointLoad> point_loads;
    std::vector<PatchLoad> patch_loads;

    double total_magnitude() const {
        double t = 0.0;
        for (const auto& p : point_loads) t += p.force.norm();
        for (const auto& p : patch_loads) t += std::abs(p.resultant);
        return t;
    }
};

/// Steel or concrete constitutive definition, keyed by material id.
struct Material {
    int id = 0;
    std::string name;
    bool is_steel = true;
    SteelLaw steel;
    ConcreteLaw concrete;
};

/// Immutable structural model. Cheap to copy element/layer tables; analysis
/// runs never mutate a model they were given.
struct BridgeModel {
    std::vector<Node> nodes;
    std::vector<ShellElement> elements;
    std::vector<LayerStack> layer_stacks;
    std::vector<Material> materials;
    std::vector<Support> supports;
    LoadCase load_case;
    double design_capacity = 0.0;  // newtons, user-supplied nominal capacity
    std::map<std::string, std::string> metadata;

    const Material* find_material(int id) const {
        for (const auto& m : materials)
            if (m.id == id) return &m;
        return nullptr;
    }
    const LayerStack* find_stack(int id) const {
        for (const auto& s : layer_stacks)
            if (s.id == id) return &s;
        return nullptr;
    }
};

// ============================================================================
// Validation
// ============================================================================

struct Diagnostic {
    std::string entity;   // e.g. "node 12", "element 3"
    std::string message;  // violated invariant
};

struct ValidateOptions {
    /// Bound on |imperfection_offset| as a fraction of the shortest attached
    /// element edge.
    double imperfection_bound_ratio = 0.1;
    /// Maximum angle between the two diagonal-split normals, degrees.
    double warp_limit_deg = 10.0;
};

/// Empty result iff every model invariant holds; diagnostics are data, never
/// exceptions.
std::vector<Diagnostic> validate_model(const BridgeModel& model,
                                       const ValidateOptions& options = {});

}  // namespace girderlab
