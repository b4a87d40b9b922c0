#include "girderlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace girderlab {

namespace {

DofMap build_dof_map(const BridgeModel& model,
                     const std::vector<std::pair<int, double>>& extra) {
    DofMap dm;
    const int n = 6 * (int)model.nodes.size();
    dm.eq.assign(n, 0);
    dm.prescribed.assign(n, 0.0);
    for (const auto& s : model.supports)
        for (int d : s.fixed_dofs) {
            dm.eq[6 * s.node_id + d] = -1;
            dm.prescribed[6 * s.node_id + d] = s.prescribed_value;
        }
    for (const auto& [g, v] : extra) {
        dm.eq[g] = -1;
        dm.prescribed[g] = v;
    }
    int cursor = 0;
    for (int i = 0; i < n; ++i)
        if (dm.eq[i] == 0)
            dm.eq[i] = cursor++;
        else
            dm.eq[i] = -1;
    dm.n_free = cursor;
    return dm;
}

// inverse bilinear map: global (x, y) -> natural (xi, eta) of a quad
bool invert_bilinear(const double xs[4], const double ys[4], double x, double y, double& xi,
                     double& eta) {
    xi = eta = 0.0;
    for (int it = 0; it < 30; ++it) {
        double N[4], dNxi[4], dNeta[4];
        static const double xin[4] = {-1, 1, 1, -1};
        static const double etn[4] = {-1, -1, 1, 1};
        for (int a = 0; a < 4; ++a) {
            N[a] = 0.25 * (1 + xi * xin[a]) * (1 + eta * etn[a]);
            dNxi[a] = 0.25 * xin[a] * (1 + eta * etn[a]);
            dNeta[a] = 0.25 * etn[a] * (1 + xi * xin[a]);
        }
        double fx = -x, fy = -y, j00 = 0, j01 = 0, j10 = 0, j11 = 0;
        for (int a = 0; a < 4; ++a) {
            fx += N[a] * xs[a];
            fy += N[a] * ys[a];
            j00 += dNxi[a] * xs[a];
            j01 += dNeta[a] * xs[a];
            j10 += dNxi[a] * ys[a];
            j11 += dNeta[a] * ys[a];
        }
        const double det = j00 * j11 - j01 * j10;
        if (std::abs(det) < 1e-20) return false;
        const double dxi = (-fx * j11 + fy * j01) / det;
        const double deta = (fx * j10 - fy * j00) / det;
        xi += dxi;
        eta += deta;
        if (std::abs(dxi) + std::abs(deta) < 1e-14) return true;
    }
    return false;
}

}  // namespace

Structure::Structure(const BridgeModel& model,
                     const std::vector<std::pair<int, double>>& extra_prescribed,
                     int control_gdof)
    : model_(&model),
      esys_(build_element_system(model)),
      dofmap_(build_dof_map(model, extra_prescribed)),
      control_gdof_(control_gdof) {
    build_pattern();
    build_load_pattern();
}

void Structure::build_pattern() {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(esys_.elements.size() * 200);
    for (const auto& ed : esys_.elements) {
        for (int a = 0; a < 4; ++a)
            for (int i = 0; i < 6; ++i) {
                const int gi = dofmap_.eq[6 * ed.nodes[a] + i];
                if (gi < 0) continue;
                for (int b = 0; b < 4; ++b)
                    for (int j = 0; j < 6; ++j) {
                        const int gj = dofmap_.eq[6 * ed.nodes[b] + j];
                        if (gj >= 0) trips.emplace_back(gi, gj, 0.0);
                    }
            }
    }
    pattern_matrix_.resize(dofmap_.n_free, dofmap_.n_free);
    pattern_matrix_.setFromTriplets(trips.begin(), trips.end());
    pattern_matrix_.makeCompressed();

    // per-element flat value-slot lookup into the CSC arrays
    scatter_.assign(esys_.elements.size() * 576, -1);
    const int* outer = pattern_matrix_.outerIndexPtr();
    const int* inner = pattern_matrix_.innerIndexPtr();
    for (size_t e = 0; e < esys_.elements.size(); ++e) {
        const auto& ed = esys_.elements[e];
        for (int r = 0; r < 24; ++r) {
            const int gi = dofmap_.eq[6 * ed.nodes[r / 6] + r % 6];
            if (gi < 0) continue;
            for (int c = 0; c < 24; ++c) {
                const int gj = dofmap_.eq[6 * ed.nodes[c / 6] + c % 6];
                if (gj < 0) continue;
                // column-major: find row gi within column gj
                const int lo = outer[gj], hi = outer[gj + 1];
                const int* it = std::lower_bound(inner + lo, inner + hi, gi);
                scatter_[e * 576 + r * 24 + c] = (int)(it - inner);
            }
        }
    }
}

void Structure::build_load_pattern() {
    const int n = 6 * (int)model_->nodes.size();
    pattern_full_ = Eigen::VectorXd::Zero(n);
    for (const auto& pl : model_->load_case.point_loads)
        for (int k = 0; k < 3; ++k) pattern_full_[6 * pl.node_id + k] += pl.force[k];

    // patch loads: consistent bilinear distribution, 2x2 quadrature per
    // covered element over the overlap rectangle in plan
    std::vector<const ShellElement*> candidates;
    bool has_deck = false;
    for (const auto& el : model_->elements)
        if (el.region_tags.count("deck")) has_deck = true;
    for (const auto& el : model_->elements)
        if (!has_deck || el.region_tags.count("deck")) candidates.push_back(&el);

    for (const auto& patch : model_->load_case.patch_loads) {
        const double px0 = patch.center[0] - 0.5 * patch.extent[0];
        const double px1 = patch.center[0] + 0.5 * patch.extent[0];
        const double py0 = patch.center[1] - 0.5 * patch.extent[1];
        const double py1 = patch.center[1] + 0.5 * patch.extent[1];
        const double pressure = patch.resultant / (patch.extent[0] * patch.extent[1]);
        for (const ShellElement* el : candidates) {
            double xs[4], ys[4];
            double ex0 = 1e300, ex1 = -1e300, ey0 = 1e300, ey1 = -1e300;
            for (int a = 0; a < 4; ++a) {
                const auto& p = model_->nodes[el->node_ids[a]].position;
                xs[a] = p[0];
                ys[a] = p[1];
                ex0 = std::min(ex0, xs[a]);
                ex1 = std::max(ex1, xs[a]);
                ey0 = std::min(ey0, ys[a]);
                ey1 = std::max(ey1, ys[a]);
            }
            const double ox0 = std::max(px0, ex0), ox1 = std::min(px1, ex1);
            const double oy0 = std::max(py0, ey0), oy1 = std::min(py1, ey1);
            if (ox1 - ox0 <= 1e-12 || oy1 - oy0 <= 1e-12) continue;
            const double q = 1.0 / std::sqrt(3.0);
            for (double gx : {-q, q})
                for (double gy : {-q, q}) {
                    const double xg = 0.5 * (ox0 + ox1) + 0.5 * gx * (ox1 - ox0);
                    const double yg = 0.5 * (oy0 + oy1) + 0.5 * gy * (oy1 - oy0);
                    double xi, eta;
                    if (!invert_bilinear(xs, ys, xg, yg, xi, eta)) continue;
                    if (xi < -1.0 - 1e-9 || xi > 1.0 + 1e-9 || eta < -1.0 - 1e-9 ||
                        eta > 1.0 + 1e-9)
                        continue;
                    const double dA = 0.25 * (ox1 - ox0) * (oy1 - oy0);
                    static const double xin[4] = {-1, 1, 1, -1};
                    static const double etn[4] = {-1, -1, 1, 1};
                    for (int a = 0; a < 4; ++a) {
                        const double N = 0.25 * (1 + xi * xin[a]) * (1 + eta * etn[a]);
                        for (int k = 0; k < 3; ++k)
                            pattern_full_[6 * el->node_ids[a] + k] +=
                                N * pressure * dA * patch.direction[k];
                    }
                }
        }
    }

    pattern_free_ = Eigen::VectorXd::Zero(dofmap_.n_free);
    for (int g = 0; g < n; ++g)
        if (dofmap_.eq[g] >= 0) pattern_free_[dofmap_.eq[g]] = pattern_full_[g];
    pattern_control_ = (control_gdof_ >= 0) ? pattern_full_[control_gdof_] : 0.0;
    pattern_total_ = model_->load_case.total_magnitude();
}

Eigen::VectorXd Structure::expand(const Eigen::VectorXd& u_free) const {
    const int n = 6 * (int)model_->nodes.size();
    Eigen::VectorXd full(n);
    for (int g = 0; g < n; ++g)
        full[g] = dofmap_.eq[g] >= 0 ? u_free[dofmap_.eq[g]] : dofmap_.prescribed[g];
    return full;
}

void Structure::assemble_force(const Eigen::VectorXd& u_full,
                               const std::vector<PointState>& committed,
                               std::vector<PointState>* trial, Eigen::VectorXd& f_free,
                               double* f_control) const {
    f_free.setZero(dofmap_.n_free);
    double fc = 0.0;
    Vec24 d, f;
    for (const auto& ed : esys_.elements) {
        for (int a = 0; a < 4; ++a)
            for (int k = 0; k < 6; ++k) d[6 * a + k] = u_full[6 * ed.nodes[a] + k];
        element_internal_force(ed, d, committed.data() + ed.state_offset,
                               trial ? trial->data() + ed.state_offset : nullptr, f);
        for (int r = 0; r < 24; ++r) {
            const int g = 6 * ed.nodes[r / 6] + r % 6;
            if (dofmap_.eq[g] >= 0) f_free[dofmap_.eq[g]] += f[r];
            if (g == control_gdof_) fc += f[r];
        }
    }
    if (f_control) *f_control = fc;
}

void Structure::assemble_tangent(const Eigen::VectorXd& u_full,
                                 const std::vector<PointState>& committed,
                                 std::vector<PointState>* trial, SparseMat& K,
                                 Eigen::VectorXd& f_free, double* f_control,
                                 Eigen::VectorXd* control_row, double* control_diag,
                                 bool exact_element_tangents) const {
    if (K.rows() != dofmap_.n_free) K = pattern_matrix_;
    std::fill(K.valuePtr(), K.valuePtr() + K.nonZeros(), 0.0);
    f_free.setZero(dofmap_.n_free);
    double fc = 0.0, cdiag = 0.0;
    if (control_row) control_row->setZero(dofmap_.n_free);

    Vec24 d, f;
    Mat24 Ke;
    for (size_t e = 0; e < esys_.elements.size(); ++e) {
        const auto& ed = esys_.elements[e];
        for (int a = 0; a < 4; ++a)
            for (int k = 0; k < 6; ++k) d[6 * a + k] = u_full[6 * ed.nodes[a] + k];
        element_tangent(ed, d, committed.data() + ed.state_offset,
                        trial ? trial->data() + ed.state_offset : nullptr, &f, Ke,
                        exact_element_tangents);
        double* vals = K.valuePtr();
        const int* slots = scatter_.data() + e * 576;
        for (int r = 0; r < 24; ++r) {
            const int g = 6 * ed.nodes[r / 6] + r % 6;
            const bool is_ctrl = (g == control_gdof_);
            if (dofmap_.eq[g] >= 0) f_free[dofmap_.eq[g]] += f[r];
            if (is_ctrl) fc += f[r];
            for (int c = 0; c < 24; ++c) {
                const int slot = slots[r * 24 + c];
                if (slot >= 0) vals[slot] += Ke(r, c);
                if (is_ctrl) {
                    const int gc = 6 * ed.nodes[c / 6] + c % 6;
                    if (dofmap_.eq[gc] >= 0 && control_row)
                        (*control_row)[dofmap_.eq[gc]] += Ke(r, c);
                    if (gc == control_gdof_) cdiag += Ke(r, c);
                }
            }
        }
    }
    if (f_control) *f_control = fc;
    if (control_diag) *control_diag = cdiag;
}

void Structure::assemble_geometric(const Eigen::VectorXd& u_full,
                                   const std::vector<PointState>& committed,
                                   SparseMat& Kg) const {
    if (Kg.rows() != dofmap_.n_free) Kg = pattern_matrix_;
    std::fill(Kg.valuePtr(), Kg.valuePtr() + Kg.nonZeros(), 0.0);
    Vec24 d;
    Mat24 Ke;
    for (size_t e = 0; e < esys_.elements.size(); ++e) {
        const auto& ed = esys_.elements[e];
        for (int a = 0; a < 4; ++a)
            for (int k = 0; k < 6; ++k) d[6 * a + k] = u_full[6 * ed.nodes[a] + k];
        element_geometric_stiffness(ed, d, committed.data() + ed.state_offset, Ke);
        double* vals = Kg.valuePtr();
        const int* slots = scatter_.data() + e * 576;
        for (int r = 0; r < 24; ++r)
            for (int c = 0; c < 24; ++c) {
                const int slot = slots[r * 24 + c];
                if (slot >= 0) vals[slot] += Ke(r, c);
            }
    }
}

std::optional<Eigen::VectorXd> solve_linear(const SparseMat& K, const Eigen::VectorXd& f,
                                            const DofMap* dofmap, SolveDiagnostics* diag) {
    Eigen::SimplicialLDLT<SparseMat> ldlt;
    ldlt.compute(K);
    auto report = [&](const std::string& msg, int pivot) {
        if (!diag) return;
        diag->ok = false;
        diag->message = msg;
        diag->offending_gdof = -1;
        if (pivot >= 0 && dofmap) {
            // permuted pivot index back to the original equation, then to (node, dof)
            const int orig = ldlt.permutationPinv().indices()[pivot];
            for (size_t g = 0; g < dofmap->eq.size(); ++g)
                if (dofmap->eq[g] == orig) {
                    diag->offending_gdof = (int)g;
                    break;
                }
        }
    };
    if (ldlt.info() != Eigen::Success) {
        report("factorization failed", -1);
        return std::nullopt;
    }
    const auto& D = ldlt.vectorD();
    double dmax = 0.0;
    for (int i = 0; i < D.size(); ++i) dmax = std::max(dmax, std::abs(D[i]));
    int bad = -1;
    for (int i = 0; i < D.size(); ++i)
        if (!(D[i] > 1e-14 * dmax)) {
            bad = i;
            break;
        }
    if (bad >= 0) {
        report(D[bad] <= 0.0 ? "indefinite or singular stiffness (nonpositive pivot)"
                             : "near-singular stiffness (vanishing pivot)",
               bad);
        return std::nullopt;
    }
    if (diag) diag->ok = true;
    Eigen::VectorXd u = ldlt.solve(f);
    // one round of iterative refinement keeps the round-trip residual tight
    for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd r = f - K * u;
        if (r.norm() <= 1e-13 * std::max(1.0, f.norm())) break;
        u += ldlt.solve(r);
    }
    return u;
}

BucklingResult buckling_modes(const SparseMat& K, const SparseMat& Kg, int n_modes, double tol,
                              int max_iter) {
    BucklingResult out;
    if (n_modes <= 0) return out;
    const int n = (int)K.rows();
    Eigen::SimplicialLDLT<SparseMat> ldlt;
    ldlt.compute(K);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("buckling: stiffness factorization failed");

    std::vector<Eigen::VectorXd> found;       // K-orthonormalized eigenvectors
    std::vector<double> found_lambda;

    auto k_dot = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return a.dot(K * b);
    };

    const int want_total = std::min(n_modes + 6, n);  // keep deflating past negatives
    for (int mode = 0; mode < want_total && (int)out.lambdas.size() < n_modes; ++mode) {
        // deterministic start vector
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = std::sin(0.7 * (i + 1) + mode);
        for (const auto& phi : found) v -= phi * k_dot(phi, v);
        double nv = std::sqrt(std::max(k_dot(v, v), 1e-300));
        v /= nv;

        double lambda = 0.0, res = 1e300;
        int it = 0;
        for (; it < max_iter; ++it) {
            Eigen::VectorXd w = ldlt.solve(-(Kg * v));
            for (const auto& phi : found) w -= phi * k_dot(phi, w);
            const double nw = std::sqrt(std::max(k_dot(w, w), 1e-300));
            if (nw < 1e-140) break;  // Kg annihilates the deflated subspace
            w /= nw;
            // Rayleigh quotient: K phi = -lambda Kg phi
            const double num = w.dot(K * w);
            const double den = w.dot(Kg * w);
            lambda = -num / den;
            const Eigen::VectorXd r = K * w + lambda * (Kg * w);
            res = r.norm() / (K * w).norm();
            v = w;
            if (res <= tol) break;
            // once roughly located, polish with shifted inverse iterations
            if (res <= 1e-4 && it > 4) {
                for (int polish = 0; polish < 6 && res > tol; ++polish) {
                    SparseMat A = K + (lambda * (1.0 + 1e-8)) * Kg;
                    Eigen::SimplicialLDLT<SparseMat> shifted;
                    shifted.compute(A);
                    if (shifted.info() != Eigen::Success) break;
                    Eigen::VectorXd w2 = shifted.solve(Kg * v);
                    for (const auto& phi : found) w2 -= phi * k_dot(phi, w2);
                    const double n2 = std::sqrt(std::max(k_dot(w2, w2), 1e-300));
                    if (n2 < 1e-140) break;
                    w2 /= n2;
                    lambda = -w2.dot(K * w2) / w2.dot(Kg * w2);
                    res = (K * w2 + lambda * (Kg * w2)).norm() / (K * w2).norm();
                    v = w2;
                }
                if (res <= tol) break;
            }
        }
        if (res > tol) {
            if (!out.lambdas.empty()) break;  // ran out of resolvable modes
            throw std::runtime_error("buckling: inverse iteration did not converge, residual " +
                                     std::to_string(res));
        }
        found.push_back(v);
        found_lambda.push_back(lambda);
        if (lambda > 0.0) {
            Eigen::VectorXd phi = v / v.cwiseAbs().maxCoeff();
            out.lambdas.push_back(lambda);
            out.modes.push_back(phi);
            out.residuals.push_back(res);
        }
    }
    // ascending by magnitude (all positive here)
    std::vector<size_t> idx(out.lambdas.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return out.lambdas[a] < out.lambdas[b]; });
    BucklingResult sorted;
    for (size_t i : idx) {
        sorted.lambdas.push_back(out.lambdas[i]);
        sorted.modes.push_back(out.modes[i]);
        sorted.residuals.push_back(out.residuals[i]);
    }
    return sorted;
}

}  // namespace girderlab
