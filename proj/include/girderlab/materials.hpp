#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace girderlab {

using Vec3 = Eigen::Vector3d;   // plane-stress Voigt [s11, s22, s12] / [e11, e22, g12]
using Mat3 = Eigen::Matrix3d;

// ============================================================================
// Laws
// ============================================================================

/// Von Mises plasticity with multilinear isotropic hardening, plane stress.
struct SteelLaw {
    double E = 200e9;
    double nu = 0.3;
    double yield_stress = 345e6;
    /// (equivalent plastic strain, stress) knots; first knot is (0, yield_stress).
    /// Stress must be nondecreasing. Beyond the last knot the final slope extends.
    std::vector<std::pair<double, double>> hardening;

    SteelLaw() { hardening = {{0.0, yield_stress}}; }
    SteelLaw(double E_, double nu_, double fy, std::vector<std::pair<double, double>> hard = {})
        : E(E_), nu(nu_), yield_stress(fy), hardening(std::move(hard)) {
        if (hardening.empty()) hardening = {{0.0, fy}};
    }

    double flow_stress(double eq_plastic_strain) const;
    double hardening_modulus(double eq_plastic_strain) const;
};

/// Plane-stress smeared crack / crush model for concrete. Fixed orthogonal
/// cracks with shear retention; compression bounded by a Kupfer-type biaxial
/// cap; crushing at a limit compressive strain.
struct ConcreteLaw {
    double E = 26e9;
    double nu = 0.18;
    double f_c = 31e6;             // compressive strength (positive)
    double f_t = 2.6e6;            // tensile strength
    double softening_modulus = 0;  // descending slope past cracking; 0 = brittle drop
    double shear_retention = 0.2;  // beta, scales cracked shear stiffness
    double crushing_strain = 3.0e-3;

    /// Slope such that tensile stress reaches zero at `ratio` times the
    /// cracking strain (default envelope: zero at 10x cracking strain).
    static double softening_to_zero_at(double E, double f_t, double ratio = 10.0) {
        return E / (ratio - 1.0);
    }
};

// ============================================================================
// State
// ============================================================================

/// Per-integration-point history. One struct serves both material kinds; the
/// unused half stays at its default. Crack flags and `crushed` are monotone,
/// plastic strain nondecreasing over committed steps.
struct PointState {
    // steel
    double eq_plastic_strain = 0.0;
    Vec3 plastic_strain = Vec3::Zero();
    // concrete
    uint8_t crack_flags = 0;       // bit0: first crack, bit1: orthogonal crack
    double crack_angle = 0.0;      // normal direction of first crack, radians
    double crack_strain_max[2] = {0.0, 0.0};  // envelope tracking per crack
    bool crushed = false;
    // smeared rebar (two orthogonal directions)
    double rebar_plastic[2] = {0.0, 0.0};      // signed 1D plastic strain
    double rebar_eq_plastic[2] = {0.0, 0.0};

    bool operator==(const PointState&) const = default;
};

struct UpdateResult {
    Vec3 stress = Vec3::Zero();
    Mat3 tangent = Mat3::Zero();
    PointState state;
};

// ============================================================================
// Updates (pure functions of law, committed state, total strain)
// ============================================================================

/// Plane-stress J2 return mapping with algorithmic consistent tangent.
UpdateResult steel_update(const SteelLaw& law, const PointState& state, const Vec3& strain);

/// Smeared-crack concrete update with branch-consistent tangent.
UpdateResult concrete_update(const ConcreteLaw& law, const PointState& state, const Vec3& strain);

/// Uniaxial steel fibre (used by smeared rebar layers): bilinear/multilinear
/// isotropic hardening in 1D. Returns (stress, tangent) and updates the given
/// direction slot of the state.
void rebar_update_1d(const SteelLaw& law, int direction, const PointState& committed,
                     double strain, double& stress, double& tangent, PointState& updated);

/// Plane-stress elastic stiffness for isotropic E, nu.
Mat3 plane_stress_elastic(double E, double nu);

// ============================================================================
// Trace harness
// ============================================================================

/// Drives a strain schedule through the relevant update while iterating the
/// transverse strain so the response is uniaxial stress (s22 = s12 = 0).
/// Returns the axial stress at each schedule point. States are committed
/// between points.
std::vector<double> uniaxial_trace(const SteelLaw& law, const std::vector<double>& strain_schedule);
std::vector<double> uniaxial_trace(const ConcreteLaw& law, const std::vector<double>& strain_schedule);

}  // namespace girderlab
