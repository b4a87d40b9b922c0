#pragma once

// Explicit-integration oracle for the plane-stress J2 law. Integrates the
// continuous elastoplastic rate equations with midpoint (RK2) substeps,
// exact yield-surface crossing detection, and a consistency projection per
// plastic substep. Independent of the return-mapping implementation path.

#include <cmath>
#include <algorithm>

#include "girderlab/materials.hpp"

namespace oracle {

using girderlab::Mat3;
using girderlab::SteelLaw;
using girderlab::Vec3;

struct OracleState {
    Vec3 stress = Vec3::Zero();
    double alpha = 0.0;  // equivalent plastic strain
};

inline Vec3 flow(const Vec3& s) {
    return Vec3((2.0 * s[0] - s[1]) / 3.0, (2.0 * s[1] - s[0]) / 3.0, 2.0 * s[2]);
}

inline double psi_form(const Vec3& s) {
    return (2.0 / 3.0) * (s[0] * s[0] - s[0] * s[1] + s[1] * s[1] + 3.0 * s[2] * s[2]);
}

inline double vm(const Vec3& s) { return std::sqrt(1.5 * psi_form(s)); }

struct Rates {
    Vec3 stress_rate;
    double alpha_rate;
};

inline Rates plastic_rates(const SteelLaw& law, const Mat3& C, const Vec3& s, double alpha,
                           const Vec3& eps_rate) {
    const Vec3 N = flow(s);
    const double g = std::sqrt((2.0 / 3.0) * psi_form(s));
    const double H = law.hardening_modulus(alpha);
    const double sy = law.flow_stress(alpha);
    const double num = N.dot(C * eps_rate);
    if (num <= 0.0) return {C * eps_rate, 0.0};  // elastic unloading
    const double denom = N.dot(C * N) + (2.0 / 3.0) * sy * H * g;
    const double gamma_rate = num / denom;
    return {C * (eps_rate - gamma_rate * N), gamma_rate * g};
}

// fraction s in [0,1] where vm(stress + s * ds) first reaches sy (quadratic)
inline double crossing_fraction(const Vec3& s0, const Vec3& ds, double sy) {
    // vm^2 is a quadratic polynomial in s
    auto q = [&](const Vec3& a, const Vec3& b) {
        return a[0] * b[0] - 0.5 * (a[0] * b[1] + a[1] * b[0]) + a[1] * b[1] + 3.0 * a[2] * b[2];
    };
    const double A = q(ds, ds);
    const double B = 2.0 * q(s0, ds);
    const double Cc = q(s0, s0) - sy * sy;
    if (A <= 0.0) return 1.0;
    const double disc = B * B - 4.0 * A * Cc;
    if (disc < 0.0) return 1.0;
    const double root = (-B + std::sqrt(disc)) / (2.0 * A);
    return std::clamp(root, 0.0, 1.0);
}

/// Integrate a straight strain segment from `eps0` to `eps1` in `n` substeps.
inline void integrate_segment(const SteelLaw& law, OracleState& st, const Vec3& eps0,
                              const Vec3& eps1, int n) {
    const Mat3 C = girderlab::plane_stress_elastic(law.E, law.nu);
    const Vec3 de = (eps1 - eps0) / n;
    for (int i = 0; i < n; ++i) {
        const double sy = law.flow_stress(st.alpha);
        const double f = vm(st.stress) - sy;
        const Vec3 ds_el = C * de;
        const bool loading = flow(st.stress).dot(ds_el) > 0.0;
        if (f < -1e-9 * law.yield_stress || !loading) {
            const double fs = (vm(st.stress + ds_el) > sy && loading)
                                  ? crossing_fraction(st.stress, ds_el, sy)
                                  : 1.0;
            st.stress += fs * ds_el;
            if (fs >= 1.0) continue;
            // plastic remainder of the substep
            const Vec3 de_pl = (1.0 - fs) * de;
            Rates k1 = plastic_rates(law, C, st.stress, st.alpha, de_pl);
            Rates k2 = plastic_rates(law, C, st.stress + 0.5 * k1.stress_rate,
                                     st.alpha + 0.5 * k1.alpha_rate, de_pl);
            st.stress += k2.stress_rate;
            st.alpha += k2.alpha_rate;
        } else {
            Rates k1 = plastic_rates(law, C, st.stress, st.alpha, de);
            Rates k2 = plastic_rates(law, C, st.stress + 0.5 * k1.stress_rate,
                                     st.alpha + 0.5 * k1.alpha_rate, de);
            st.stress += k2.stress_rate;
            st.alpha += k2.alpha_rate;
        }
        // consistency projection: radial in stress space onto the updated surface
        const double sy_new = law.flow_stress(st.alpha);
        const double v = vm(st.stress);
        if (v > sy_new) st.stress *= sy_new / v;
    }
}

}  // namespace oracle
