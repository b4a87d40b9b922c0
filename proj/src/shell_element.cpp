#include "girderlab/shell_element.hpp"

#include <cmath>
#include <stdexcept>

#include "girderlab/duals.hpp"

namespace girderlab {

namespace {

inline double value_of(double x) { return x; }
template <int N>
inline double value_of(const Dual<N>& x) {
    return x.v;
}
template <int N>
inline double value_of(const Dual2<N>& x) {
    return x.v;
}

// Rodrigues map with a series branch near zero (both branches smooth).
template <typename S>
void rodrigues(const S w[3], S T[3][3]) {
    const S t2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    S A, B;
    if (value_of(t2) < 1e-8) {
        A = S(1.0) - t2 * (1.0 / 6.0) + t2 * t2 * (1.0 / 120.0);
        B = S(0.5) - t2 * (1.0 / 24.0) + t2 * t2 * (1.0 / 720.0);
    } else {
        const S th = sqrt(t2);
        A = sin(th) / th;
        B = (S(1.0) - cos(th)) / t2;
    }
    // T = I + A*skew(w) + B*(w w^T - t2 I)
    T[0][0] = S(1.0) + B * (w[0] * w[0] - t2);
    T[1][1] = S(1.0) + B * (w[1] * w[1] - t2);
    T[2][2] = S(1.0) + B * (w[2] * w[2] - t2);
    T[0][1] = -A * w[2] + B * w[0] * w[1];
    T[1][0] = A * w[2] + B * w[0] * w[1];
    T[0][2] = A * w[1] + B * w[0] * w[2];
    T[2][0] = -A * w[1] + B * w[0] * w[2];
    T[1][2] = -A * w[0] + B * w[1] * w[2];
    T[2][1] = A * w[0] + B * w[1] * w[2];
}

// corotational frame rows e1,e2,e3 from four deformed corner positions
template <typename S>
void build_frame(const TV3<S> p[4], TV3<S> e[3], double* n_norm2 = nullptr) {
    const TV3<S> d1 = p[2] - p[0];
    const TV3<S> d2 = p[3] - p[1];
    const TV3<S> n = cross(d1, d2);
    if (n_norm2) *n_norm2 = value_of(dot(n, n));
    e[2] = normalized(n);
    const TV3<S> m{S(0.5) * (p[1].x + p[2].x - p[0].x - p[3].x),
                   S(0.5) * (p[1].y + p[2].y - p[0].y - p[3].y),
                   S(0.5) * (p[1].z + p[2].z - p[0].z - p[3].z)};
    const S mn = dot(m, e[2]);
    const TV3<S> t{m.x - mn * e[2].x, m.y - mn * e[2].y, m.z - mn * e[2].z};
    e[0] = normalized(t);
    e[1] = cross(e[2], e[0]);
}

/// Local dofs (and with dual scalars their derivatives) from global dofs.
/// Order per node: [u1, u2, u3 (local), theta1..3 (skew-vector extraction)].
template <typename S>
void extract_local(const ElementData& ed, const S d[24], S vloc[24], S R_out[3][3]) {
    TV3<S> p[4];
    for (int a = 0; a < 4; ++a)
        p[a] = TV3<S>{S(ed.ref_pos[a][0]) + d[6 * a + 0], S(ed.ref_pos[a][1]) + d[6 * a + 1],
                      S(ed.ref_pos[a][2]) + d[6 * a + 2]};

    TV3<S> e[3];
    double n2 = 0.0;
    build_frame(p, e, &n2);
    if (!(n2 > 1e-32)) throw std::runtime_error("degenerate (zero-area) corotated element");

    TV3<S> c{S(0.25) * (p[0].x + p[1].x + p[2].x + p[3].x),
             S(0.25) * (p[0].y + p[1].y + p[2].y + p[3].y),
             S(0.25) * (p[0].z + p[1].z + p[2].z + p[3].z)};

    for (int a = 0; a < 4; ++a) {
        const TV3<S> r{p[a].x - c.x, p[a].y - c.y, p[a].z - c.z};
        vloc[6 * a + 0] = dot(e[0], r) - S(ed.local_ref[a][0]);
        vloc[6 * a + 1] = dot(e[1], r) - S(ed.local_ref[a][1]);
        vloc[6 * a + 2] = dot(e[2], r) - S(ed.local_ref[a][2]);

        // nodal triad, then M = R^T T R0 and theta_local = axial(skew(M))
        S T[3][3];
        const S w[3] = {d[6 * a + 3], d[6 * a + 4], d[6 * a + 5]};
        rodrigues(w, T);
        S B[3][3];  // B = T * R0
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                B[i][j] = T[i][0] * ed.R0(0, j) + T[i][1] * ed.R0(1, j) + T[i][2] * ed.R0(2, j);
        S M[3][3];
        for (int i = 0; i < 3; ++i) {
            const TV3<S>& ei = e[i];
            for (int j = 0; j < 3; ++j)
                M[i][j] = ei.x * B[0][j] + ei.y * B[1][j] + ei.z * B[2][j];
        }
        vloc[6 * a + 3] = S(0.5) * (M[2][1] - M[1][2]);
        vloc[6 * a + 4] = S(0.5) * (M[0][2] - M[2][0]);
        vloc[6 * a + 5] = S(0.5) * (M[1][0] - M[0][1]);
    }
    if (R_out) {
        for (int j = 0; j < 3; ++j) {
            R_out[0][j] = (j == 0) ? e[0].x : (j == 1 ? e[1].x : e[2].x);
            R_out[1][j] = (j == 0) ? e[0].y : (j == 1 ? e[1].y : e[2].y);
            R_out[2][j] = (j == 0) ? e[0].z : (j == 1 ? e[1].z : e[2].z);
        }
    }
}

// ----------------------------------------------------------------------------
// Local layered element
// ----------------------------------------------------------------------------

struct LocalResult {
    Vec24 f = Vec24::Zero();
    Mat24 K = Mat24::Zero();
    std::array<GpResultants, 4> res{};
};

/// Evaluates the local element at local dofs v. Material states are read
/// from `committed` and written to `trial` (both sized 4 * tps.size()).
/// `linear_kinematics` drops the membrane-bending coupling terms.
void local_eval(const ElementData& ed, const Vec24& v, const PointState* committed,
                PointState* trial, bool want_K, bool want_geo_only, LocalResult& out,
                bool linear_kinematics = false) {
    const int ntp = (int)ed.tps.size();
    for (int g = 0; g < 4; ++g) {
        const GaussPointData& gd = ed.gp[g];
        Eigen::Vector3d em = gd.Bm * v;
        const double wx = linear_kinematics ? 0.0 : gd.Gw.row(0).dot(v);
        const double wy = linear_kinematics ? 0.0 : gd.Gw.row(1).dot(v);
        em[0] += 0.5 * wx * wx;
        em[1] += 0.5 * wy * wy;
        em[2] += wx * wy;
        const Eigen::Vector3d kappa = gd.Bb * v;
        const Eigen::Vector2d gamma = gd.Bs * v;

        Eigen::Vector3d N = Eigen::Vector3d::Zero(), M = Eigen::Vector3d::Zero();
        Mat3 A = Mat3::Zero(), Bc = Mat3::Zero(), D = Mat3::Zero();
        for (int t = 0; t < ntp; ++t) {
            const ThicknessPoint& tp = ed.tps[t];
            const int si = g * ntp + t;
            const Vec3 strain = em + tp.z * kappa;
            Vec3 sig;
            Mat3 C;
            if (tp.kind == LayerKind::SolidSteel) {
                auto r = steel_update(tp.material->steel, committed[si], strain);
                sig = r.stress;
                C = r.tangent;
                if (trial) trial[si] = r.state;
            } else if (tp.kind == LayerKind::SolidConcrete) {
                auto r = concrete_update(tp.material->concrete, committed[si], strain);
                sig = r.stress;
                C = r.tangent;
                if (trial) trial[si] = r.state;
            } else {
                PointState upd = committed[si];
                double s1, k1, s2, k2;
                rebar_update_1d(tp.material->steel, 0, committed[si], tp.rebar_q1.dot(strain), s1,
                                k1, upd);
                rebar_update_1d(tp.material->steel, 1, committed[si], tp.rebar_q2.dot(strain), s2,
                                k2, upd);
                sig = s1 * tp.rebar_q1 + s2 * tp.rebar_q2;
                C = k1 * (tp.rebar_q1 * tp.rebar_q1.transpose()) +
                    k2 * (tp.rebar_q2 * tp.rebar_q2.transpose());
                if (trial) trial[si] = upd;
            }
            N += tp.weight * sig;
            M += (tp.weight * tp.z) * sig;
            if (want_K || want_geo_only) {
                A += tp.weight * C;
                Bc += (tp.weight * tp.z) * C;
                D += (tp.weight * tp.z * tp.z) * C;
            }
        }
        out.res[g].N = N;
        out.res[g].M = M;
        out.res[g].Q = ed.shear_stiffness * gamma;

        if (want_geo_only) {
            // sigma-linear in-element part; the frame-transport part is added
            // by the caller from the local force
            const auto& gx = gd.Gw.row(0);
            const auto& gy = gd.Gw.row(1);
            out.K.noalias() += gd.wJ * (N[0] * gx.transpose() * gx + N[1] * gy.transpose() * gy +
                                        N[2] * (gx.transpose() * gy + gy.transpose() * gx));
        }

        Eigen::Matrix<double, 3, 24> Bmeff = gd.Bm;
        Bmeff.row(0) += wx * gd.Gw.row(0);
        Bmeff.row(1) += wy * gd.Gw.row(1);
        Bmeff.row(2) += wx * gd.Gw.row(1) + wy * gd.Gw.row(0);

        out.f.noalias() += gd.wJ * (Bmeff.transpose() * N + gd.Bb.transpose() * M +
                                    gd.Bs.transpose() * (ed.shear_stiffness * gamma));
        if (want_K) {
            Eigen::Matrix<double, 6, 24> B6;
            B6.topRows<3>() = Bmeff;
            B6.bottomRows<3>() = gd.Bb;
            Eigen::Matrix<double, 6, 6> C6;
            C6.topLeftCorner<3, 3>() = A;
            C6.topRightCorner<3, 3>() = Bc;
            C6.bottomLeftCorner<3, 3>() = Bc;
            C6.bottomRightCorner<3, 3>() = D;
            out.K.noalias() += gd.wJ * (B6.transpose() * (C6 * B6)) +
                               gd.wJ * (gd.Bs.transpose() * (ed.shear_stiffness * gd.Bs));
            const auto& gx = gd.Gw.row(0);
            const auto& gy = gd.Gw.row(1);
            out.K.noalias() += gd.wJ * (N[0] * gx.transpose() * gx + N[1] * gy.transpose() * gy +
                                        N[2] * (gx.transpose() * gy + gy.transpose() * gx));
        }
    }
    for (int g = 0; g < 4; ++g) {
        const GaussPointData& gd = ed.gp[g];
        const double d_spin = gd.Bd.row(0).dot(v);
        out.f.noalias() += (ed.gp[g].wJ * ed.drill_k * d_spin) * gd.Bd.transpose();
        if (want_K)
            out.K.noalias() += (ed.gp[g].wJ * ed.drill_k) * (gd.Bd.transpose() * gd.Bd);
    }
}

// ----------------------------------------------------------------------------
// Frame second-order term
// ----------------------------------------------------------------------------
//
// K_frame = Hessian_d of psi(d) = f_local . v_local(d) with f_local frozen.
// Split by structure: the translational part and the rotation extraction's
// R-dependence reduce to one scalar of the 12 nodal positions evaluated with
// second-order duals; the nodal-rotation blocks come from small Rodrigues
// differentiations; the mixed block is bilinear and assembled from first
// derivatives.

using D12 = Dual2<12>;
using Du3 = Dual<3>;
using D3 = Dual2<3>;

void add_frame_hessian(const ElementData& ed, const double d[24], const Vec24& floc, Mat24& K,
                       const Dual<24> R_dual[3][3]) {
    // nodal triads and weight matrices from the frozen local moments
    double Tn[4][3][3];
    Eigen::Matrix3d Wn[4];
    for (int a = 0; a < 4; ++a) {
        const double w[3] = {d[6 * a + 3], d[6 * a + 4], d[6 * a + 5]};
        rodrigues(w, Tn[a]);
        const double f1 = floc[6 * a + 3], f2 = floc[6 * a + 4], f3 = floc[6 * a + 5];
        Eigen::Matrix3d W = Eigen::Matrix3d::Zero();
        W(2, 1) = 0.5 * f1;
        W(1, 2) = -0.5 * f1;
        W(0, 2) = 0.5 * f2;
        W(2, 0) = -0.5 * f2;
        W(1, 0) = 0.5 * f3;
        W(0, 1) = -0.5 * f3;
        Wn[a] = W;
    }

    // --- scalar Phi(p): translational work + <R, C_a> rotation-extraction work
    Eigen::Matrix3d C_a[4];
    for (int a = 0; a < 4; ++a) {
        Eigen::Matrix3d Tm;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) Tm(i, j) = Tn[a][i][j];
        C_a[a] = Tm * ed.R0 * Wn[a].transpose();
    }

    TV3<D12> p[4];
    for (int a = 0; a < 4; ++a) {
        p[a].x = D12::seeded(ed.ref_pos[a][0] + d[6 * a + 0], 3 * a + 0);
        p[a].y = D12::seeded(ed.ref_pos[a][1] + d[6 * a + 1], 3 * a + 1);
        p[a].z = D12::seeded(ed.ref_pos[a][2] + d[6 * a + 2], 3 * a + 2);
    }
    TV3<D12> e[3];
    build_frame(p, e);
    TV3<D12> c{0.25 * (p[0].x + p[1].x + p[2].x + p[3].x),
               0.25 * (p[0].y + p[1].y + p[2].y + p[3].y),
               0.25 * (p[0].z + p[1].z + p[2].z + p[3].z)};
    D12 phi(0.0);
    for (int a = 0; a < 4; ++a) {
        const TV3<D12> r{p[a].x - c.x, p[a].y - c.y, p[a].z - c.z};
        phi += floc[6 * a + 0] * dot(e[0], r) + floc[6 * a + 1] * dot(e[1], r) +
               floc[6 * a + 2] * dot(e[2], r);
        // <R, C_a> with R columns e1,e2,e3: sum_j e_j . C_a.col(j)
        for (int j = 0; j < 3; ++j) {
            const TV3<D12>& ej = e[j];
            phi += ej.x * C_a[a](0, j) + ej.y * C_a[a](1, j) + ej.z * C_a[a](2, j);
        }
    }
    for (int i = 0; i < 12; ++i) {
        const int gi = 6 * (i / 3) + (i % 3);
        for (int j = 0; j < 12; ++j) K(gi, 6 * (j / 3) + (j % 3)) += phi.h[i * 12 + j];
    }

    // --- per-node rotation blocks and mixed blocks
    for (int a = 0; a < 4; ++a) {
        if (Wn[a].norm() == 0.0) continue;
        // G = R W_a R0^T (frozen R values)
        Eigen::Matrix3d R;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) R(i, j) = R_dual[i][j].v;
        const Eigen::Matrix3d G = R * Wn[a] * ed.R0.transpose();

        // H_ww: Hessian of <T(w), G>
        D3 w3[3];
        for (int k = 0; k < 3; ++k) w3[k] = D3::seeded(d[6 * a + 3 + k], k);
        D3 T3[3][3];
        rodrigues(w3, T3);
        D3 val(0.0);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) val += T3[i][j] * G(i, j);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) K(6 * a + 3 + i, 6 * a + 3 + j) += val.h[i * 3 + j];

        // H_pw: <dT/dw_k, dR/dp_i W_a R0^T>
        Du3 wd[3];
        for (int k = 0; k < 3; ++k) wd[k] = Du3::seeded(d[6 * a + 3 + k], k);
        Du3 Td[3][3];
        rodrigues(wd, Td);
        const Eigen::Matrix3d WA = ed.R0 * Wn[a].transpose();  // so Z_k = dT_k * (R0 W^T)
        for (int k = 0; k < 3; ++k) {
            Eigen::Matrix3d dT;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) dT(i, j) = Td[i][j].g[k];
            const Eigen::Matrix3d Z = dT * WA;
            // H[p_i][w_k] = sum_mn dR_mn/dp_i * Z(m, n)
            for (int b = 0; b < 4; ++b)
                for (int comp = 0; comp < 3; ++comp) {
                    const int lane = 6 * b + comp;
                    double acc = 0.0;
                    for (int m = 0; m < 3; ++m)
                        for (int n = 0; n < 3; ++n) acc += R_dual[m][n].g[lane] * Z(m, n);
                    K(6 * b + comp, 6 * a + 3 + k) += acc;
                    K(6 * a + 3 + k, 6 * b + comp) += acc;
                }
        }
    }
}

}  // namespace

// ----------------------------------------------------------------------------
// Build
// ----------------------------------------------------------------------------

ElementSystem build_element_system(const BridgeModel& model) {
    ElementSystem sys;
    sys.elements.reserve(model.elements.size());
    int state_cursor = 0;

    for (const auto& el : model.elements) {
        ElementData ed;
        ed.element_id = el.id;
        ed.nodes = el.node_ids;
        for (int a = 0; a < 4; ++a) {
            const Node& n = model.nodes.at(el.node_ids[a]);
            ed.ref_pos[a] = n.position + n.imperfection_offset;
        }

        TV3<double> p[4];
        for (int a = 0; a < 4; ++a) p[a] = {ed.ref_pos[a][0], ed.ref_pos[a][1], ed.ref_pos[a][2]};
        TV3<double> e[3];
        double n2 = 0.0;
        build_frame(p, e, &n2);
        if (!(n2 > 1e-32))
            throw std::runtime_error("element " + std::to_string(el.id) + ": degenerate geometry");
        ed.R0.col(0) = Vec3d(e[0].x, e[0].y, e[0].z);
        ed.R0.col(1) = Vec3d(e[1].x, e[1].y, e[1].z);
        ed.R0.col(2) = Vec3d(e[2].x, e[2].y, e[2].z);
        ed.centroid0 = 0.25 * (ed.ref_pos[0] + ed.ref_pos[1] + ed.ref_pos[2] + ed.ref_pos[3]);
        double xl[4], yl[4];
        for (int a = 0; a < 4; ++a) {
            ed.local_ref[a] = ed.R0.transpose() * (ed.ref_pos[a] - ed.centroid0);
            xl[a] = ed.local_ref[a][0];
            yl[a] = ed.local_ref[a][1];
        }

        // thickness quadrature from the layer stack
        const LayerStack* stack = model.find_stack(el.layer_stack_id);
        if (!stack) throw std::runtime_error("element references unknown layer stack");
        double zc = stack->reference_offset;
        for (const Layer& layer : stack->layers) {
            const Material* mat = model.find_material(layer.material_id);
            if (!mat) throw std::runtime_error("layer references unknown material");
            const double zm = zc + 0.5 * layer.thickness;
            if (layer.kind == LayerKind::SmearedRebar) {
                ThicknessPoint tp;
                tp.z = zm;
                tp.weight = layer.thickness;
                tp.material = mat;
                tp.kind = layer.kind;
                // mesh directions projected into the local frame
                const Vec3d dg(layer.rebar_direction[0], layer.rebar_direction[1], 0.0);
                double lx = ed.R0.col(0).dot(dg), ly = ed.R0.col(1).dot(dg);
                const double ln = std::hypot(lx, ly);
                if (ln < 1e-12) {
                    lx = 1.0;
                    ly = 0.0;
                } else {
                    lx /= ln;
                    ly /= ln;
                }
                tp.rebar_q1 = Eigen::Vector3d(lx * lx, ly * ly, lx * ly);
                tp.rebar_q2 = Eigen::Vector3d(ly * ly, lx * lx, -lx * ly);
                ed.tps.push_back(tp);
            } else {
                const double hg = 0.5 * layer.thickness / std::sqrt(3.0);
                for (double zq : {zm - hg, zm + hg}) {
                    ThicknessPoint tp;
                    tp.z = zq;
                    tp.weight = 0.5 * layer.thickness;
                    tp.material = mat;
                    tp.kind = layer.kind;
                    ed.tps.push_back(tp);
                }
            }
            zc += layer.thickness;
        }

        // elastic transverse shear; drilling spring scaled to the membrane
        // stiffness (a bending-based scale leaves thin flange strips in
        // assemblies nearly free to spin and wrecks Newton convergence)
        double Gt = 0.0;
        for (const Layer& layer : stack->layers) {
            const Material* mat = model.find_material(layer.material_id);
            if (layer.kind == LayerKind::SmearedRebar) continue;
            const double E = mat->is_steel ? mat->steel.E : mat->concrete.E;
            const double nu = mat->is_steel ? mat->steel.nu : mat->concrete.nu;
            const double G = 0.5 * E / (1.0 + nu);
            ed.shear_stiffness += (5.0 / 6.0) * G * layer.thickness * Eigen::Matrix2d::Identity();
            Gt += G * layer.thickness;
        }
        ed.drill_k = 0.0;  // set after the area is known

        // in-plane Gauss data and MITC4 tying rows
        static const double gp_xi[4] = {-1, 1, 1, -1};
        static const double gp_eta[4] = {-1, -1, 1, 1};
        auto shape = [&](double xi, double eta, double N[4], double dNxi[4], double dNeta[4]) {
            for (int a = 0; a < 4; ++a) {
                N[a] = 0.25 * (1 + xi * gp_xi[a]) * (1 + eta * gp_eta[a]);
                dNxi[a] = 0.25 * gp_xi[a] * (1 + eta * gp_eta[a]);
                dNeta[a] = 0.25 * gp_eta[a] * (1 + xi * gp_xi[a]);
            }
        };
        auto jacobian = [&](const double dNxi[4], const double dNeta[4], Eigen::Matrix2d& J) {
            J.setZero();
            for (int a = 0; a < 4; ++a) {
                J(0, 0) += dNxi[a] * xl[a];
                J(0, 1) += dNxi[a] * yl[a];
                J(1, 0) += dNeta[a] * xl[a];
                J(1, 1) += dNeta[a] * yl[a];
            }
        };

        // tying rows at A(0,-1), C(0,1) for gamma_xi; D(-1,0), B(1,0) for gamma_eta
        Eigen::Matrix<double, 1, 24> row_xi_A = Eigen::Matrix<double, 1, 24>::Zero(),
                                     row_xi_C = row_xi_A, row_eta_D = row_xi_A,
                                     row_eta_B = row_xi_A;
        auto tying_row = [&](double xi, double eta, bool xi_dir,
                             Eigen::Matrix<double, 1, 24>& row) {
            double N[4], dNxi[4], dNeta[4];
            shape(xi, eta, N, dNxi, dNeta);
            Eigen::Matrix2d J;
            jacobian(dNxi, dNeta, J);
            const double xd = xi_dir ? J(0, 0) : J(1, 0);
            const double yd = xi_dir ? J(0, 1) : J(1, 1);
            for (int a = 0; a < 4; ++a) {
                row(0, 6 * a + 2) = xi_dir ? dNxi[a] : dNeta[a];  // w
                row(0, 6 * a + 4) = xd * N[a];                    // psi_x = theta_y
                row(0, 6 * a + 3) = -yd * N[a];                   // psi_y = -theta_x
            }
        };
        tying_row(0, -1, true, row_xi_A);
        tying_row(0, 1, true, row_xi_C);
        tying_row(-1, 0, false, row_eta_D);
        tying_row(1, 0, false, row_eta_B);

        const double q = 1.0 / std::sqrt(3.0);
        const double gxi[4] = {-q, q, q, -q};
        const double geta[4] = {-q, -q, q, q};
        ed.area = 0.0;
        for (int g = 0; g < 4; ++g) {
            double N[4], dNxi[4], dNeta[4];
            shape(gxi[g], geta[g], N, dNxi, dNeta);
            Eigen::Matrix2d J;
            jacobian(dNxi, dNeta, J);
            const double detJ = J.determinant();
            if (!(detJ > 0.0))
                throw std::runtime_error("element " + std::to_string(el.id) +
                                         ": non-positive Jacobian");
            const Eigen::Matrix2d Jinv = J.inverse();
            GaussPointData& gd = ed.gp[g];
            gd.wJ = detJ;
            ed.area += detJ;
            double dNx[4], dNy[4];
            for (int a = 0; a < 4; ++a) {
                dNx[a] = Jinv(0, 0) * dNxi[a] + Jinv(0, 1) * dNeta[a];
                dNy[a] = Jinv(1, 0) * dNxi[a] + Jinv(1, 1) * dNeta[a];
            }
            for (int a = 0; a < 4; ++a) {
                gd.Bm(0, 6 * a + 0) = dNx[a];
                gd.Bm(1, 6 * a + 1) = dNy[a];
                gd.Bm(2, 6 * a + 0) = dNy[a];
                gd.Bm(2, 6 * a + 1) = dNx[a];
                gd.Bb(0, 6 * a + 4) = dNx[a];   // kxx from psi_x = theta_y
                gd.Bb(1, 6 * a + 3) = -dNy[a];  // kyy from psi_y = -theta_x
                gd.Bb(2, 6 * a + 4) = dNy[a];
                gd.Bb(2, 6 * a + 3) = -dNx[a];
                gd.Gw(0, 6 * a + 2) = dNx[a];
                gd.Gw(1, 6 * a + 2) = dNy[a];
                gd.Bd(0, 6 * a + 5) = N[a];          // theta_z
                gd.Bd(0, 6 * a + 0) = 0.5 * dNy[a];  // - spin of the membrane field
                gd.Bd(0, 6 * a + 1) = -0.5 * dNx[a];
            }
            Eigen::Matrix<double, 2, 24> nat;
            nat.row(0) = 0.5 * (1.0 - geta[g]) * row_xi_A + 0.5 * (1.0 + geta[g]) * row_xi_C;
            nat.row(1) = 0.5 * (1.0 - gxi[g]) * row_eta_D + 0.5 * (1.0 + gxi[g]) * row_eta_B;
            gd.Bs = Jinv * nat;
        }

        ed.drill_k = 1e-4 * Gt;  // per-area penalty density on (theta_z - spin)
        if (ed.drill_k == 0.0) ed.drill_k = 1.0;
        ed.state_offset = state_cursor;
        state_cursor += 4 * (int)ed.tps.size();
        sys.elements.push_back(std::move(ed));
    }
    sys.total_states = state_cursor;
    return sys;
}

// ----------------------------------------------------------------------------
// Public element operations
// ----------------------------------------------------------------------------

void element_internal_force(const ElementData& ed, const Vec24& dofs,
                            const PointState* committed, PointState* trial, Vec24& f) {
    if (!dofs.allFinite()) throw std::invalid_argument("non-finite element displacements");
    Dual<24> d[24];
    for (int i = 0; i < 24; ++i) d[i] = Dual<24>::seeded(dofs[i], i);
    Dual<24> vloc[24];
    Dual<24> R[3][3];
    extract_local(ed, d, vloc, R);

    Vec24 v;
    for (int i = 0; i < 24; ++i) v[i] = vloc[i].v;
    LocalResult lr;
    local_eval(ed, v, committed, trial, false, false, lr);

    // f = T^T f_local with T = d v_local / d dofs
    f.setZero();
    for (int r = 0; r < 24; ++r) {
        const double fr = lr.f[r];
        if (fr == 0.0) continue;
        for (int c = 0; c < 24; ++c) f[c] += vloc[r].g[c] * fr;
    }
}

void element_tangent(const ElementData& ed, const Vec24& dofs, const PointState* committed,
                     PointState* trial, Vec24* f_out, Mat24& K, bool with_frame_hessian) {
    if (!dofs.allFinite()) throw std::invalid_argument("non-finite element displacements");
    Dual<24> d[24];
    for (int i = 0; i < 24; ++i) d[i] = Dual<24>::seeded(dofs[i], i);
    Dual<24> vloc[24];
    Dual<24> R[3][3];
    extract_local(ed, d, vloc, R);

    Vec24 v;
    for (int i = 0; i < 24; ++i) v[i] = vloc[i].v;
    LocalResult lr;
    local_eval(ed, v, committed, trial, true, false, lr);

    Mat24 T;
    for (int r = 0; r < 24; ++r)
        for (int c = 0; c < 24; ++c) T(r, c) = vloc[r].g[c];

    K.noalias() = T.transpose() * lr.K * T;
    if (with_frame_hessian && lr.f.norm() > 0.0) {
        double draw[24];
        for (int i = 0; i < 24; ++i) draw[i] = dofs[i];
        add_frame_hessian(ed, draw, lr.f, K, R);
    }
    K = 0.5 * (K + K.transpose());

    if (f_out) {
        f_out->setZero();
        for (int r = 0; r < 24; ++r) {
            const double fr = lr.f[r];
            if (fr == 0.0) continue;
            for (int c = 0; c < 24; ++c) (*f_out)[c] += vloc[r].g[c] * fr;
        }
    }
}

void element_geometric_stiffness(const ElementData& ed, const Vec24& dofs,
                                 const PointState* committed, Mat24& Kg) {
    Dual<24> d[24];
    for (int i = 0; i < 24; ++i) d[i] = Dual<24>::seeded(dofs[i], i);
    Dual<24> vloc[24];
    Dual<24> R[3][3];
    extract_local(ed, d, vloc, R);

    Vec24 v;
    for (int i = 0; i < 24; ++i) v[i] = vloc[i].v;
    LocalResult lr;
    local_eval(ed, v, committed, nullptr, false, true, lr);

    Mat24 T;
    for (int r = 0; r < 24; ++r)
        for (int c = 0; c < 24; ++c) T(r, c) = vloc[r].g[c];
    // in-element part plus the frame-transport part carried by the local force
    Kg.noalias() = T.transpose() * lr.K * T;
    if (lr.f.norm() > 0.0) {
        double draw[24];
        for (int i = 0; i < 24; ++i) draw[i] = dofs[i];
        add_frame_hessian(ed, draw, lr.f, Kg, R);
    }
    Kg = 0.5 * (Kg + Kg.transpose());
}

void element_linear_resultants(const ElementData& ed, const Vec24& dofs,
                               const PointState* committed, std::array<GpResultants, 4>& out) {
    // linearized extraction at zero displacement, then linear kinematics
    Dual<24> d[24];
    for (int i = 0; i < 24; ++i) d[i] = Dual<24>::seeded(0.0, i);
    Dual<24> vloc[24];
    extract_local(ed, d, vloc, (Dual<24>(*)[3])nullptr);
    Vec24 v = Vec24::Zero();
    for (int r = 0; r < 24; ++r)
        for (int c = 0; c < 24; ++c) v[r] += vloc[r].g[c] * dofs[c];
    LocalResult lr;
    local_eval(ed, v, committed, nullptr, false, false, lr, true);
    out = lr.res;
}

Vec24 element_local_dofs(const ElementData& ed, const Vec24& dofs) {
    double draw[24];
    for (int i = 0; i < 24; ++i) draw[i] = dofs[i];
    double vloc[24];
    extract_local(ed, draw, vloc, (double(*)[3])nullptr);
    Vec24 v;
    for (int i = 0; i < 24; ++i) v[i] = vloc[i];
    return v;
}

void element_resultants(const ElementData& ed, const Vec24& dofs, const PointState* committed,
                        std::array<GpResultants, 4>& out) {
    double draw[24];
    for (int i = 0; i < 24; ++i) draw[i] = dofs[i];
    double vloc[24];
    extract_local(ed, draw, vloc, (double(*)[3])nullptr);
    Vec24 v;
    for (int i = 0; i < 24; ++i) v[i] = vloc[i];
    LocalResult lr;
    local_eval(ed, v, committed, nullptr, false, false, lr);
    out = lr.res;
}

}  // namespace girderlab
