#include "girderlab/materials.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace girderlab {

namespace {
constexpr double kResidualStiffness = 1e-6;  // crushed-point tangent scale

void require_finite(const Vec3& strain) {
    if (!strain.allFinite()) throw std::invalid_argument("material update: non-finite strain");
}
}  // namespace

Mat3 plane_stress_elastic(double E, double nu) {
    Mat3 C = Mat3::Zero();
    const double f = E / (1.0 - nu * nu);
    C(0, 0) = C(1, 1) = f;
    C(0, 1) = C(1, 0) = f * nu;
    C(2, 2) = 0.5 * E / (1.0 + nu);
    return C;
}

// ============================================================================
// SteelLaw hardening curve
// ============================================================================

double SteelLaw::flow_stress(double ep) const {
    const auto& h = hardening;
    if (ep <= h.front().first) return h.front().second;
    for (size_t i = 1; i < h.size(); ++i) {
        if (ep <= h[i].first) {
            const double t = (ep - h[i - 1].first) / (h[i].first - h[i - 1].first);
            return h[i - 1].second + t * (h[i].second - h[i - 1].second);
        }
    }
    if (h.size() == 1) return h.back().second;
    const auto& a = h[h.size() - 2];
    const auto& b = h.back();
    const double slope = (b.second - a.second) / (b.first - a.first);
    return b.second + slope * (ep - b.first);
}

double SteelLaw::hardening_modulus(double ep) const {
    const auto& h = hardening;
    if (h.size() == 1) return 0.0;
    for (size_t i = 1; i < h.size(); ++i) {
        if (ep <= h[i].first)
            return (h[i].second - h[i - 1].second) / (h[i].first - h[i - 1].first);
    }
    const auto& a = h[h.size() - 2];
    const auto& b = h.back();
    return (b.second - a.second) / (b.first - a.first);
}

// ============================================================================
// Plane-stress J2 return mapping (spectral form)
// ============================================================================
//
// In the transformed basis s1=(s11+s22)/sqrt2, s2=(s11-s22)/sqrt2, s3=s12 the
// elastic operator and the yield-metric P are simultaneously diagonal, so the
// backward-Euler update reduces to a scalar equation in the plastic multiplier.

namespace {

struct HatState {
    double h1, h2, h3;  // transformed stress components
};

inline HatState to_hat(const Vec3& s) {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    return {(s[0] + s[1]) * inv_sqrt2, (s[0] - s[1]) * inv_sqrt2, s[2]};
}

inline Vec3 from_hat(const HatState& h) {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    return Vec3((h.h1 + h.h2) * inv_sqrt2, (h.h1 - h.h2) * inv_sqrt2, h.h3);
}

// quadratic form psi = s' P s with P eigenvalues (1/3, 1, 2); psi = (2/3) seq^2
inline double psi_of(const HatState& h) {
    return h.h1 * h.h1 / 3.0 + h.h2 * h.h2 + 2.0 * h.h3 * h.h3;
}

inline Vec3 flow_vector(const Vec3& s) {
    // N = P s in Voigt (engineering shear)
    return Vec3((2.0 * s[0] - s[1]) / 3.0, (2.0 * s[1] - s[0]) / 3.0, 2.0 * s[2]);
}

}  // namespace

UpdateResult steel_update(const SteelLaw& law, const PointState& state, const Vec3& strain) {
    require_finite(strain);

    const Mat3 C = plane_stress_elastic(law.E, law.nu);
    const Vec3 e_el_trial = strain - state.plastic_strain;
    const Vec3 s_trial = C * e_el_trial;

    const HatState ht = to_hat(s_trial);
    const double psi_tr = psi_of(ht);
    const double seq_tr = std::sqrt(1.5 * psi_tr);
    const double sy0 = law.flow_stress(state.eq_plastic_strain);

    UpdateResult out;
    out.state = state;
    if (seq_tr <= sy0 * (1.0 + 1e-12)) {
        out.stress = s_trial;
        out.tangent = C;
        return out;
    }

    // spectral rates: den_i = 1 + dg * c_i
    const double c1 = law.E / (3.0 * (1.0 - law.nu));
    const double c2 = law.E / (1.0 + law.nu);  // also lane 3

    auto eval = [&](double dg, HatState& h, double& psi, double& seq, double& g, double& deps,
                    double& r, double& drddg) {
        const double d1 = 1.0 + dg * c1;
        const double d2 = 1.0 + dg * c2;
        h = {ht.h1 / d1, ht.h2 / d2, ht.h3 / d2};
        psi = psi_of(h);
        const double dpsi = -2.0 * (h.h1 * h.h1 * c1 / (3.0 * d1) + h.h2 * h.h2 * c2 / d2 +
                                    2.0 * h.h3 * h.h3 * c2 / d2);
        seq = std::sqrt(1.5 * psi);
        const double dseq = 1.5 * dpsi / (2.0 * seq);
        g = std::sqrt(psi * 2.0 / 3.0);
        const double dgdx = (2.0 / 3.0) * dpsi / (2.0 * g);
        deps = dg * g;
        const double H = law.hardening_modulus(state.eq_plastic_strain + deps);
        r = seq - law.flow_stress(state.eq_plastic_strain + deps);
        drddg = dseq - H * (g + dg * dgdx);
    };

    // bracket the root, then safeguarded Newton
    double lo = 0.0, hi = (seq_tr - sy0) / (1.5 * c2);  // slightly past the perfect-plasticity root
    HatState h;
    double psi, seq, g, deps, r, dr;
    eval(hi, h, psi, seq, g, deps, r, dr);
    int expand = 0;
    while (r > 0.0 && expand++ < 100) {
        lo = hi;
        hi *= 2.0;
        eval(hi, h, psi, seq, g, deps, r, dr);
    }

    double dg = 0.5 * (lo + hi);
    const double tol = 1e-13 * std::max(law.yield_stress, seq_tr);
    for (int it = 0; it < 200; ++it) {
        eval(dg, h, psi, seq, g, deps, r, dr);
        if (std::abs(r) <= tol) break;
        if (r > 0.0)
            lo = dg;
        else
            hi = dg;
        double next = dg - r / dr;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == dg) break;
        dg = next;
    }

    const Vec3 s = from_hat(h);
    const Vec3 N = flow_vector(s);
    out.stress = s;
    out.state.plastic_strain = state.plastic_strain + dg * N;
    out.state.eq_plastic_strain = state.eq_plastic_strain + deps;

    // algorithmic tangent: Xi - (Xi N)(Xi N)^T / (N' Xi N + H g / m)
    const double d1 = 1.0 + dg * c1;
    const double d2 = 1.0 + dg * c2;
    const double x1 = (law.E / (1.0 - law.nu)) / d1;   // spectral values of Xi
    const double x2 = (law.E / (1.0 + law.nu)) / d2;
    const double x3 = (0.5 * law.E / (1.0 + law.nu)) / d2;
    Mat3 Xi;
    Xi << 0.5 * (x1 + x2), 0.5 * (x1 - x2), 0,
          0.5 * (x1 - x2), 0.5 * (x1 + x2), 0,
          0, 0, x3;
    const double H = law.hardening_modulus(out.state.eq_plastic_strain);
    const double m = 1.5 / seq - (2.0 / 3.0) * H * dg / g;
    const Vec3 XiN = Xi * N;
    double denom = N.dot(XiN);
    if (H > 0.0 && m > 0.0) denom += H * g / m;
    out.tangent = Xi - (XiN * XiN.transpose()) / denom;
    return out;
}

// ============================================================================
// Concrete smeared crack / crush
// ============================================================================

namespace {

// Voigt strain rotation to axes rotated by theta
Mat3 strain_rotation(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Mat3 T;
    T << c * c, s * s, c * s,
         s * s, c * c, -c * s,
         -2 * c * s, 2 * c * s, c * c - s * s;
    return T;
}

// Kupfer-type biaxial compression cap. a = ratio of the milder to the stronger
// compressive principal stress, in [0, 1].
double kupfer_cap(double f_c, double a) {
    return f_c * (1.0 + 3.65 * a) / ((1.0 + a) * (1.0 + a));
}

struct UniaxialBranch {
    double stress;
    double tangent;
};

// 1D normal-direction response of a cracked direction: softening envelope in
// tension with secant unload/reload, restored stiffness in compression with a
// plateau at -f_c.
UniaxialBranch cracked_normal(const ConcreteLaw& law, double eps, double& eps_max) {
    const double eps_cr = law.f_t / law.E;
    if (eps < 0.0) {
        double s = law.E * eps;
        if (s < -law.f_c) return {-law.f_c, kResidualStiffness * law.E};
        return {s, law.E};
    }
    const double new_max = std::max(eps_max, eps);
    double env;
    if (law.softening_modulus <= 0.0)
        env = (new_max > eps_cr) ? 0.0 : law.E * new_max;  // brittle drop
    else
        env = (new_max > eps_cr)
                  ? std::max(0.0, law.f_t - law.softening_modulus * (new_max - eps_cr))
                  : law.E * new_max;
    if (eps >= new_max - 1e-300) {
        eps_max = new_max;
        double tang;
        if (new_max <= eps_cr)
            tang = law.E;
        else if (law.softening_modulus <= 0.0 || env <= 0.0)
            tang = 0.0;
        else
            tang = -law.softening_modulus;
        return {env, tang};
    }
    eps_max = new_max;
    const double k = (new_max > 0.0) ? env / new_max : law.E;
    return {k * eps, k};
}

}  // namespace

UpdateResult concrete_update(const ConcreteLaw& law, const PointState& state, const Vec3& strain) {
    require_finite(strain);

    UpdateResult out;
    out.state = state;
    const Mat3 C = plane_stress_elastic(law.E, law.nu);

    if (state.crushed) {
        out.stress = kResidualStiffness * (C * strain);
        out.tangent = kResidualStiffness * C;
        return out;
    }

    const double G = 0.5 * law.E / (1.0 + law.nu);

    if (state.crack_flags == 0) {
        const Vec3 s_tr = C * strain;
        // principal trial stresses
        const double sm = 0.5 * (s_tr[0] + s_tr[1]);
        const double sd = 0.5 * (s_tr[0] - s_tr[1]);
        const double R = std::sqrt(sd * sd + s_tr[2] * s_tr[2]);
        const double s1 = sm + R, s2 = sm - R;
        const double theta1 = 0.5 * std::atan2(2.0 * s_tr[2], s_tr[0] - s_tr[1]);

        if (s1 > law.f_t) {
            // fix first crack normal to the major principal direction
            out.state.crack_flags = 1;
            out.state.crack_angle = theta1;
            out.state.crack_strain_max[0] = law.f_t / law.E;
            // fall through to the cracked branch below with the new state
        } else {
            // principal strains for the crush check
            const double em = 0.5 * (strain[0] + strain[1]);
            const double ed = 0.5 * (strain[0] - strain[1]);
            const double Re = std::sqrt(ed * ed + 0.25 * strain[2] * strain[2]);
            const double e2 = em - Re;
            if (e2 < -law.crushing_strain) {
                out.state.crushed = true;
                out.stress = kResidualStiffness * (C * strain);
                out.tangent = kResidualStiffness * C;
                return out;
            }
            if (s2 < 0.0) {
                const double a = (s1 < 0.0) ? std::clamp(s1 / s2, 0.0, 1.0) : 0.0;
                const double cap = kupfer_cap(law.f_c, a);
                if (s2 < -cap) {
                    // plateau at the biaxial cap, in the trial principal frame
                    const double p1 = (s1 < -cap) ? -cap : s1;
                    const double p2 = -cap;
                    const Mat3 T = strain_rotation(theta1);
                    Vec3 sp(p1, p2, 0.0);
                    out.stress = T.transpose() * sp;
                    // branch tangent in the principal frame
                    Mat3 Cp = Mat3::Zero();
                    Cp(0, 0) = (s1 < -cap) ? kResidualStiffness * law.E : law.E;
                    Cp(1, 1) = kResidualStiffness * law.E;
                    Cp(2, 2) = G;
                    out.tangent = T.transpose() * Cp * T;
                    return out;
                }
            }
            out.stress = s_tr;
            out.tangent = C;
            return out;
        }
    }

    // cracked evaluation in the fixed crack frame
    const double theta = out.state.crack_angle;
    const Mat3 T = strain_rotation(theta);
    const Vec3 el = T * strain;  // [eps_n, eps_t, gamma_nt]

    // absorbing crush check on crack-frame strains
    if (std::min(el[0], el[1]) < -law.crushing_strain) {
        out.state.crushed = true;
        out.stress = kResidualStiffness * (C * strain);
        out.tangent = kResidualStiffness * C;
        return out;
    }

    UniaxialBranch bn = cracked_normal(law, el[0], out.state.crack_strain_max[0]);

    UniaxialBranch bt;
    if (out.state.crack_flags & 2) {
        bt = cracked_normal(law, el[1], out.state.crack_strain_max[1]);
    } else {
        const double st = law.E * el[1];
        if (st > law.f_t) {
            out.state.crack_flags |= 2;
            out.state.crack_strain_max[1] = law.f_t / law.E;
            bt = cracked_normal(law, el[1], out.state.crack_strain_max[1]);
        } else if (st < -law.f_c) {
            bt = {-law.f_c, kResidualStiffness * law.E};
        } else {
            bt = {st, law.E};
        }
    }

    Vec3 sl(bn.stress, bt.stress, law.shear_retention * G * el[2]);
    Mat3 Cl = Mat3::Zero();
    Cl(0, 0) = bn.tangent;
    Cl(1, 1) = bt.tangent;
    Cl(2, 2) = law.shear_retention * G;

    out.stress = T.transpose() * sl;
    out.tangent = T.transpose() * Cl * T;
    return out;
}

// ============================================================================
// Uniaxial rebar fibre
// ============================================================================

void rebar_update_1d(const SteelLaw& law, int direction, const PointState& committed,
                     double strain, double& stress, double& tangent, PointState& updated) {
    const double ep = committed.rebar_plastic[direction];
    const double alpha = committed.rebar_eq_plastic[direction];
    const double s_tr = law.E * (strain - ep);
    const double sy = law.flow_stress(alpha);
    if (std::abs(s_tr) <= sy * (1.0 + 1e-12)) {
        stress = s_tr;
        tangent = law.E;
        return;
    }
    // scalar return: |s_tr| - E dg = sy(alpha + dg)
    double dg = (std::abs(s_tr) - sy) / law.E;
    for (int it = 0; it < 100; ++it) {
        const double H = law.hardening_modulus(alpha + dg);
        const double r = std::abs(s_tr) - law.E * dg - law.flow_stress(alpha + dg);
        if (std::abs(r) <= 1e-13 * law.yield_stress) break;
        dg += r / (law.E + H);
    }
    const double sign = (s_tr >= 0.0) ? 1.0 : -1.0;
    stress = sign * law.flow_stress(alpha + dg);
    const double H = law.hardening_modulus(alpha + dg);
    tangent = law.E * H / (law.E + H);
    updated.rebar_plastic[direction] = ep + sign * dg;
    updated.rebar_eq_plastic[direction] = alpha + dg;
}

// ============================================================================
// Uniaxial-stress trace harness
// ============================================================================

namespace {

template <typename Law>
std::vector<double> trace_impl(const Law& law, const std::vector<double>& schedule) {
    std::vector<double> out;
    out.reserve(schedule.size());
    PointState committed;
    double e22 = 0.0;
    for (double e11 : schedule) {
        UpdateResult r;
        for (int it = 0; it < 60; ++it) {
            if constexpr (std::is_same_v<Law, SteelLaw>)
                r = steel_update(law, committed, Vec3(e11, e22, 0.0));
            else
                r = concrete_update(law, committed, Vec3(e11, e22, 0.0));
            if (std::abs(r.stress[1]) <= 1e-9 * std::max(1.0, std::abs(r.stress[0]))) break;
            double k = r.tangent(1, 1);
            if (std::abs(k) < 1e-12 * law.E) k = law.E;
            e22 -= r.stress[1] / k;
        }
        committed = r.state;
        out.push_back(r.stress[0]);
    }
    return out;
}

}  // namespace

std::vector<double> uniaxial_trace(const SteelLaw& law, const std::vector<double>& schedule) {
    return trace_impl(law, schedule);
}

std::vector<double> uniaxial_trace(const ConcreteLaw& law, const std::vector<double>& schedule) {
    return trace_impl(law, schedule);
}

}  // namespace girderlab
