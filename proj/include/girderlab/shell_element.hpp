#pragma once

// 4-node layered flat shell: bilinear membrane with von Karman coupling,
// Mindlin bending, MITC4 assumed transverse shear, drilling stabilization,
// wrapped in a corotational frame for geometric nonlinearity. The local
// rotation measure is the skew-vector extraction of R^T T_a R0, exact zero
// under rigid motion; internal force is transformed through the exact
// Jacobian of the extraction, and the tangent adds the frame second-order
// term so it is the consistent derivative of the internal force.

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "girderlab/model.hpp"

namespace girderlab {

using Vec24 = Eigen::Matrix<double, 24, 1>;
using Mat24 = Eigen::Matrix<double, 24, 24>;

struct ThicknessPoint {
    double z = 0.0;       // offset from the element reference plane
    double weight = 0.0;  // integration weight (length)
    const Material* material = nullptr;
    LayerKind kind = LayerKind::SolidSteel;
    // Voigt projections of the two rebar mesh directions in the local frame
    Eigen::Vector3d rebar_q1 = Eigen::Vector3d::Zero();
    Eigen::Vector3d rebar_q2 = Eigen::Vector3d::Zero();
};

struct GaussPointData {
    double wJ = 0.0;
    Eigen::Matrix<double, 3, 24> Bm = Eigen::Matrix<double, 3, 24>::Zero();
    Eigen::Matrix<double, 3, 24> Bb = Eigen::Matrix<double, 3, 24>::Zero();
    Eigen::Matrix<double, 2, 24> Bs = Eigen::Matrix<double, 2, 24>::Zero();
    Eigen::Matrix<double, 2, 24> Gw = Eigen::Matrix<double, 2, 24>::Zero();
    /// drilling strain row: theta_z interpolation minus the membrane spin
    Eigen::Matrix<double, 1, 24> Bd = Eigen::Matrix<double, 1, 24>::Zero();
};

struct ElementData {
    int element_id = 0;
    std::array<int, 4> nodes{};
    Eigen::Matrix3d R0 = Eigen::Matrix3d::Identity();
    Vec3d centroid0 = Vec3d::Zero();
    std::array<Vec3d, 4> ref_pos{};    // position + imperfection offset
    std::array<Vec3d, 4> local_ref{};  // R0^T (ref - centroid0)
    std::array<GaussPointData, 4> gp{};
    std::vector<ThicknessPoint> tps;
    Eigen::Matrix2d shear_stiffness = Eigen::Matrix2d::Zero();
    double drill_k = 0.0;
    int state_offset = 0;
    double area = 0.0;
};

struct ElementSystem {
    std::vector<ElementData> elements;
    int total_states = 0;
};

/// Precomputes frames, local shape data, thickness quadrature and state
/// layout for every element. Throws on degenerate geometry.
ElementSystem build_element_system(const BridgeModel& model);

/// Internal force and trial states at the given global element dofs
/// (6 per node, extraction order = model node order of the element).
void element_internal_force(const ElementData& ed, const Vec24& dofs,
                            const PointState* committed, PointState* trial, Vec24& f);

/// Consistent tangent; also returns force and trial states from the same
/// evaluation when requested. `with_frame_hessian = false` drops the frame
/// second-order term (relative size of order stress/E) for cheaper Newton
/// iterations; the residual path is unaffected.
void element_tangent(const ElementData& ed, const Vec24& dofs, const PointState* committed,
                     PointState* trial, Vec24* f_out, Mat24& K, bool with_frame_hessian = true);

/// Stress-linear geometric stiffness from the membrane resultants at the
/// given state (for linearized buckling).
void element_geometric_stiffness(const ElementData& ed, const Vec24& dofs,
                                 const PointState* committed, Mat24& Kg);

/// Membrane, bending and transverse-shear resultants at each in-plane Gauss
/// point (diagnostics and event detection).
struct GpResultants {
    Eigen::Vector3d N = Eigen::Vector3d::Zero();
    Eigen::Vector3d M = Eigen::Vector3d::Zero();
    Eigen::Vector2d Q = Eigen::Vector2d::Zero();
};
void element_resultants(const ElementData& ed, const Vec24& dofs, const PointState* committed,
                        std::array<GpResultants, 4>& out);

/// Resultants of the linearized element operator at zero displacement
/// (constant-strain consistency checks).
void element_linear_resultants(const ElementData& ed, const Vec24& dofs,
                               const PointState* committed, std::array<GpResultants, 4>& out);

/// Corotated local dofs for the given global dofs (diagnostics/tests).
Vec24 element_local_dofs(const ElementData& ed, const Vec24& dofs);

}  // namespace girderlab
