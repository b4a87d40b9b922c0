#include "girderlab/driver.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <map>
#include <sstream>
#include <cstdio>
#include <stdexcept>

namespace girderlab {

std::string event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::FirstCrack: return "first_crack";
        case EventKind::FirstYield: return "first_yield";
        case EventKind::PlasticHinge: return "plastic_hinge";
        case EventKind::PeakLoad: return "peak_load";
        case EventKind::PunchingShearOnset: return "punching_shear_onset";
        case EventKind::Termination: return "termination";
    }
    return "?";
}

// ============================================================================
// EventDetector
// ============================================================================

EventDetector::EventDetector(const BridgeModel& model, const ElementSystem& esys,
                             double hinge_fraction)
    : model_(&model), esys_(&esys), hinge_fraction_(hinge_fraction) {
    total_pattern_ = model.load_case.total_magnitude();

    auto has_girder_tag = [](const ShellElement& el) {
        for (const auto& t : el.region_tags)
            if (t.rfind("girder", 0) == 0) return true;
        return false;
    };

    // girder steel exists -> yield detection prefers it
    for (size_t e = 0; e < esys.elements.size(); ++e) {
        const ShellElement& el = model.elements[e];
        const ElementData& ed = esys.elements[e];
        const bool girder = has_girder_tag(el);
        const int ntp = (int)ed.tps.size();
        for (int g = 0; g < 4; ++g)
            for (int t = 0; t < ntp; ++t) {
                const int si = ed.state_offset + g * ntp + t;
                std::ostringstream loc;
                loc << "element " << el.id << " gp " << g << " z " << ed.tps[t].z;
                if (ed.tps[t].kind == LayerKind::SolidConcrete) {
                    concrete_states_.push_back(si);
                } else if (ed.tps[t].kind == LayerKind::SolidSteel) {
                    if (girder) steel_prefers_girders_ = true;
                    (girder ? steel_states_ : rebar_states_).emplace_back(si, loc.str());
                } else {
                    rebar_states_.emplace_back(si, loc.str());
                }
            }
    }
    if (!steel_prefers_girders_) steel_states_ = rebar_states_;

    // plastic-hinge stations: girder steel points grouped by girder tag and
    // longitudinal column of the element centroid
    std::map<std::pair<std::string, long long>, Station> stations;
    for (size_t e = 0; e < esys.elements.size(); ++e) {
        const ShellElement& el = model.elements[e];
        std::string gtag;
        for (const auto& t : el.region_tags)
            if (t.rfind("girder", 0) == 0 && t.find('.') != std::string::npos &&
                (t.find(".web") != std::string::npos ||
                 t.find(".top_flange") != std::string::npos ||
                 t.find(".bottom_flange") != std::string::npos))
                gtag = t.substr(0, t.find('.'));
        if (gtag.empty()) continue;
        const ElementData& ed = esys.elements[e];
        const double cx = 0.25 * (ed.ref_pos[0][0] + ed.ref_pos[1][0] + ed.ref_pos[2][0] +
                                  ed.ref_pos[3][0]);
        const long long key = (long long)std::llround(cx * 1e6);
        Station& st = stations[{gtag, key}];
        if (st.label.empty()) {
            std::ostringstream lbl;
            lbl << gtag << " x=" << cx;
            st.label = lbl.str();
        }
        const int ntp = (int)ed.tps.size();
        for (int g = 0; g < 4; ++g)
            for (int t = 0; t < ntp; ++t)
                if (ed.tps[t].kind == LayerKind::SolidSteel)
                    st.state_indices.push_back(ed.state_offset + g * ntp + t);
    }
    for (auto& [key, st] : stations) stations_.push_back(std::move(st));

    // punching capacity of deck patches: 0.33 sqrt(fc[MPa]) MPa over the
    // control perimeter at d/2 from the patch edges
    for (size_t pi = 0; pi < model.load_case.patch_loads.size(); ++pi) {
        const PatchLoad& patch = model.load_case.patch_loads[pi];
        const LayerStack* deck_stack = nullptr;
        for (size_t e = 0; e < model.elements.size(); ++e) {
            const ShellElement& el = model.elements[e];
            if (!el.region_tags.count("deck")) continue;
            const ElementData& ed = esys.elements[e];
            const double cx = 0.25 * (ed.ref_pos[0][0] + ed.ref_pos[1][0] + ed.ref_pos[2][0] +
                                      ed.ref_pos[3][0]);
            const double cy = 0.25 * (ed.ref_pos[0][1] + ed.ref_pos[1][1] + ed.ref_pos[2][1] +
                                      ed.ref_pos[3][1]);
            if (std::abs(cx - patch.center[0]) < patch.extent[0] &&
                std::abs(cy - patch.center[1]) < patch.extent[1]) {
                deck_stack = model.find_stack(el.layer_stack_id);
                break;
            }
        }
        if (!deck_stack) continue;
        double fc = 0.0, z_top = deck_stack->reference_offset, z_rebar_low = 1e300;
        double zc = deck_stack->reference_offset;
        for (const Layer& l : deck_stack->layers) {
            const Material* mat = model.find_material(l.material_id);
            if (l.kind == LayerKind::SolidConcrete && mat) fc = mat->concrete.f_c;
            if (l.kind == LayerKind::SmearedRebar)
                z_rebar_low = std::min(z_rebar_low, zc + 0.5 * l.thickness);
            zc += l.thickness;
        }
        z_top = zc;  // top of the stack
        if (fc <= 0.0) continue;
        const double d_eff =
            (z_rebar_low < 1e299) ? (z_top - z_rebar_low) : 0.8 * deck_stack->total_thickness();
        const double b0 =
            2.0 * (patch.extent[0] + d_eff) + 2.0 * (patch.extent[1] + d_eff);
        PunchingCheck pc;
        pc.capacity = 0.33 * std::sqrt(fc / 1e6) * 1e6 * b0 * d_eff;
        pc.share = std::abs(patch.resultant);
        std::ostringstream lbl;
        lbl << "patch " << pi << " at x=" << patch.center[0] << " y=" << patch.center[1];
        pc.label = lbl.str();
        punching_.push_back(pc);
    }
}

std::vector<BehavioralEvent> EventDetector::scan(int step, double load, double displacement,
                                                 const std::vector<PointState>& states) {
    std::vector<BehavioralEvent> out;
    auto fire = [&](EventKind k, const std::string& loc) {
        if (fired_[(int)k]) return;
        fired_[(int)k] = true;
        out.push_back({k, step, load, displacement, loc});
    };

    if (!fired_[(int)EventKind::FirstCrack]) {
        for (int si : concrete_states_)
            if (states[si].crack_flags != 0) {
                std::ostringstream loc;
                loc << "state " << si;
                fire(EventKind::FirstCrack, loc.str());
                break;
            }
    }
    if (!fired_[(int)EventKind::FirstYield]) {
        for (const auto& [si, loc] : steel_states_) {
            if (states[si].eq_plastic_strain > 0.0 || states[si].rebar_eq_plastic[0] > 0.0 ||
                states[si].rebar_eq_plastic[1] > 0.0) {
                fire(EventKind::FirstYield, loc);
                break;
            }
        }
    }
    if (!fired_[(int)EventKind::PlasticHinge]) {
        for (const auto& st : stations_) {
            if (st.state_indices.empty()) continue;
            int plastic = 0;
            for (int si : st.state_indices)
                if (states[si].eq_plastic_strain > 0.0) ++plastic;
            if (plastic >= hinge_fraction_ * (double)st.state_indices.size()) {
                fire(EventKind::PlasticHinge, st.label);
                break;
            }
        }
    }
    if (!fired_[(int)EventKind::PunchingShearOnset] && total_pattern_ > 0.0) {
        const double mu = load / total_pattern_;
        for (const auto& pc : punching_) {
            if (mu * pc.share > pc.capacity) {
                fire(EventKind::PunchingShearOnset, pc.label);
                break;
            }
        }
    }
    // peak tracking: the event fires on the first descending committed step
    if (load > peak_load_) {
        peak_load_ = load;
        peak_step_ = step;
        peak_disp_ = displacement;
    } else if (!fired_[(int)EventKind::PeakLoad] && step > peak_step_) {
        BehavioralEvent e{EventKind::PeakLoad, peak_step_, peak_load_, peak_disp_, "peak"};
        fired_[(int)EventKind::PeakLoad] = true;
        out.push_back(e);
    }
    return out;
}

// ============================================================================
// Pushover driver
// ============================================================================

namespace {

inline int dofmapless_n(const Eigen::VectorXd& v) { return (int)v.size(); }

int resolve_control_node(const BridgeModel& model, const ControlSpec& control) {
    if (control.control_node >= 0) return control.control_node;
    auto it = model.metadata.find("control_node");
    if (it != model.metadata.end()) return std::stoi(it->second);
    throw std::invalid_argument("control node not given and model carries no control_node hint");
}

}  // namespace

ResponseHistory run_analysis(const BridgeModel& model, const ControlSpec& control,
                             const RunOptions& options) {
    const int cnode = resolve_control_node(model, control);
    const int cgdof = 6 * cnode + control.control_dof;

    Structure st(model, {{cgdof, 0.0}}, cgdof);
    const int n_free = st.dofs().n_free;
    const double pattern_total = st.pattern_total();
    if (!(pattern_total > 0.0)) throw std::invalid_argument("model has no load pattern");

    EventDetector detector(model, st.elements(), control.plastic_hinge_fraction);

    ResponseHistory hist;
    std::vector<PointState> committed(st.elements().total_states);
    std::vector<PointState> trial(st.elements().total_states);
    Eigen::VectorXd u_free = Eigen::VectorXd::Zero(n_free);
    double mu = 0.0;

    Eigen::VectorXd u_committed = u_free;
    double mu_committed = mu;

    SparseMat K;
    Eigen::VectorXd f_int(n_free), control_row(n_free);
    const Eigen::VectorXd& F = st.pattern();
    const double F_c = st.pattern_control();
    const double f_scale = std::sqrt(F.squaredNorm() + F_c * F_c);

    double delta = 0.0;
    double step_factor = 1.0;
    int successes_in_a_row = 0;
    int step_index = 0;

    while (step_index < control.max_steps) {
        const double d_step = control.step * step_factor;
        const double delta_target = delta + d_step;
        st.set_prescribed(cgdof, control.direction * delta_target);

        bool converged = false;
        std::string fail_detail;
        double last_du_rel = 1e300;
        double best_res = 1e300;
        double prev_res_rel = 0.0;
        // crack/crush flags found during this step's iterations are kept for
        // the remaining iterations; this damps branch flip-flop without
        // touching the committed plasticity or envelope memory
        std::vector<PointState> merged = committed;
        for (int it = 0; it <= control.max_newton_iter; ++it) {
            try {
                const Eigen::VectorXd u_full = st.expand(u_free);
                double f_c = 0.0, c_diag = 0.0;
                st.assemble_tangent(u_full, merged, &trial, K, f_int, &f_c, &control_row,
                                    &c_diag, false);
                const bool iterate_sane = prev_res_rel < 1e3 || it == 0;
                for (size_t si = 0; iterate_sane && si < merged.size(); ++si) {
                    PointState& ms = merged[si];
                    const PointState& ts = trial[si];
                    if (ts.crack_flags & ~ms.crack_flags) {
                        if (ms.crack_flags == 0) ms.crack_angle = ts.crack_angle;
                        ms.crack_flags |= ts.crack_flags;
                    }
                    ms.crack_strain_max[0] = std::max(ms.crack_strain_max[0],
                                                      ts.crack_strain_max[0]);
                    ms.crack_strain_max[1] = std::max(ms.crack_strain_max[1],
                                                      ts.crack_strain_max[1]);
                    ms.crushed = ms.crushed || ts.crushed;
                }
                const Eigen::VectorXd r = f_int - mu * F;
                const double r_c = f_c - mu * F_c;
                const double res_ref = std::max(std::abs(mu) * f_scale, 1e-9 * f_scale);
                double res_rel = std::sqrt(r.squaredNorm() + r_c * r_c) / res_ref;
                // internal forces carry roundoff of order eps * stiffness *
                // coordinate scale; below that floor the residual is noise
                double kdiag = 0.0;
                for (int d = 0; d < K.rows(); ++d)
                    kdiag = std::max(kdiag, std::abs(K.coeff(d, d)));
                const double res_floor =
                    1e-13 * kdiag * std::max(d_step, u_free.cwiseAbs().maxCoeff());
                if (std::sqrt(r.squaredNorm() + r_c * r_c) <= res_floor)
                    res_rel = 0.0;
                best_res = std::min(best_res, res_rel);
                prev_res_rel = res_rel;
                if (it >= 3 && res_rel > 100.0 * best_res && res_rel > 1.0) {
                    fail_detail = "newton divergence";
                    break;  // abort the attempt early, halving will retry
                }
                // convergence is judged before solving so the trial states
                // match the displacement being committed
                if (it > 0 && res_rel <= control.residual_tol &&
                    last_du_rel <= control.disp_tol) {
                    converged = true;
                    break;
                }
                if (it == control.max_newton_iter) break;
                Eigen::SimplicialLDLT<SparseMat> ldlt;
                ldlt.compute(K);
                if (ldlt.info() != Eigen::Success) {
                    fail_detail = "tangent factorization failed";
                    break;
                }
                const Eigen::VectorXd a = ldlt.solve(-r);
                const Eigen::VectorXd b = ldlt.solve(F);
                const double denom = control_row.dot(b) - F_c;
                if (std::abs(denom) < 1e-300) {
                    fail_detail = "singular displacement-control pivot";
                    break;
                }
                const double dmu = (-r_c - control_row.dot(a)) / denom;
                const Eigen::VectorXd du = a + dmu * b;
                // backtracking line search on the residual norm keeps the
                // iterate inside the basin when membrane coupling is strong
                const double res0 = std::sqrt(r.squaredNorm() + r_c * r_c);
                double alpha = 1.0;
                Eigen::VectorXd f_probe(dofmapless_n(u_free));
                for (int ls = 0; ls < 5; ++ls) {
                    const Eigen::VectorXd u_try = u_free + alpha * du;
                    const double mu_try = mu + alpha * dmu;
                    double fc_try = 0.0;
                    st.assemble_force(st.expand(u_try), merged, nullptr, f_probe, &fc_try);
                    const double rc_try = fc_try - mu_try * F_c;
                    const double res_try =
                        std::sqrt((f_probe - mu_try * F).squaredNorm() + rc_try * rc_try);
                    if (res_try <= std::max(0.9 * res0, 1e-14 * res0) || alpha <= 1.0 / 16.0)
                        break;
                    alpha *= 0.5;
                }
                u_free += alpha * du;
                mu += alpha * dmu;
                if (!u_free.allFinite() || !std::isfinite(mu)) {
                    fail_detail = "diverged to non-finite state";
                    break;
                }
                last_du_rel = (alpha * du).norm() / std::max(u_free.norm(), d_step);
            } catch (const std::exception& ex) {
                fail_detail = ex.what();
                break;
            }
        }

        if (options.trace)
            std::fprintf(stderr, "[step %d] factor %.4f %s (%s)\n", step_index + 1, step_factor,
                         converged ? "ok" : "FAIL", fail_detail.c_str());
        if (!converged) {
            // restore and halve
            u_free = u_committed;
            mu = mu_committed;
            successes_in_a_row = 0;
            if (step_factor > control.min_step_factor * (1.0 + 1e-12)) {
                step_factor = std::max(0.5 * step_factor, control.min_step_factor);
                continue;
            }
            if (hist.steps.empty())
                throw std::runtime_error(
                    "non-convergence at first step (modeling error): " + fail_detail);
            hist.termination = TerminationCause::Nonconvergence;
            hist.termination_detail =
                fail_detail.empty() ? "newton iteration limit at minimum step" : fail_detail;
            break;
        }

        // commit
        committed = trial;
        u_committed = u_free;
        mu_committed = mu;
        delta = delta_target;
        ++step_index;
        const double load = mu * pattern_total;
        hist.steps.push_back({load, delta, true});

        if (options.check_equilibrium) {
            const Eigen::VectorXd r = f_int - mu * F;
            if (r.norm() > 10.0 * control.residual_tol *
                               std::max(std::abs(mu) * f_scale, 1e-9 * f_scale))
                throw std::logic_error("committed step violates equilibrium");
        }

        auto events = detector.scan(step_index, load, delta, committed);
        hist.events.insert(hist.events.end(), events.begin(), events.end());

        // grow the step back after a few consecutive successes
        ++successes_in_a_row;
        if (step_factor < 1.0 && successes_in_a_row >= 3) {
            step_factor = std::min(1.0, 2.0 * step_factor);
            successes_in_a_row = 0;
        }

        // termination on post-peak drop
        if (detector.peak_load() > 0.0 && load < control.peak_drop_fraction * detector.peak_load() &&
            step_index > detector.peak_step()) {
            hist.termination = TerminationCause::PeakDrop;
            std::ostringstream det;
            det << "load fell below " << control.peak_drop_fraction << " of peak "
                << detector.peak_load();
            hist.termination_detail = det.str();
            break;
        }
    }

    if (hist.termination_detail.empty()) {
        hist.termination = TerminationCause::MaxSteps;
        hist.termination_detail = "reached maximum step count";
    }
    if (!hist.steps.empty()) {
        const auto& last = hist.steps.back();
        hist.events.push_back({EventKind::Termination, (int)hist.steps.size(), last.load,
                               last.displacement, hist.termination_detail});
    }
    return hist;
}

}  // namespace girderlab
