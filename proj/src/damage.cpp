#include "girderlab/damage.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "girderlab/solver.hpp"

namespace girderlab {

bool RegionSelector::matches(const BridgeModel& model, const ShellElement& el) const {
    if (!tags.empty()) {
        bool any = false;
        for (const auto& t : tags)
            if (el.region_tags.count(t)) {
                any = true;
                break;
            }
        if (!any) return false;
    }
    if (box_min || box_max) {
        Vec3d c = Vec3d::Zero();
        for (int nid : el.node_ids) c += model.nodes[nid].position;
        c *= 0.25;
        for (int k = 0; k < 3; ++k) {
            if (box_min && c[k] < (*box_min)[k]) return false;
            if (box_max && c[k] > (*box_max)[k]) return false;
        }
    }
    return true;
}

namespace {

std::vector<int> select_elements(const BridgeModel& model, const RegionSelector& region) {
    std::vector<int> out;
    for (size_t e = 0; e < model.elements.size(); ++e)
        if (region.matches(model, model.elements[e])) out.push_back((int)e);
    return out;
}

double element_plan_area(const BridgeModel& m, const ShellElement& el) {
    const Vec3d p0 = m.nodes[el.node_ids[0]].position;
    const Vec3d p1 = m.nodes[el.node_ids[1]].position;
    const Vec3d p2 = m.nodes[el.node_ids[2]].position;
    const Vec3d p3 = m.nodes[el.node_ids[3]].position;
    return 0.5 * ((p2 - p0).cross(p3 - p1)).norm();
}

int next_stack_id(const BridgeModel& m) {
    int id = 0;
    for (const auto& s : m.layer_stacks) id = std::max(id, s.id + 1);
    return id;
}

int next_material_id(const BridgeModel& m) {
    int id = 0;
    for (const auto& mat : m.materials) id = std::max(id, mat.id + 1);
    return id;
}

double stack_steel_thickness(const LayerStack& st) {
    double t = 0.0;
    for (const auto& l : st.layers) {
        if (l.kind == LayerKind::SolidSteel) t += l.thickness;
        if (l.kind == LayerKind::SmearedRebar) t += 2.0 * l.thickness;
    }
    return t;
}

}  // namespace

double steel_volume(const BridgeModel& model) {
    double v = 0.0;
    for (const auto& el : model.elements) {
        const LayerStack* st = model.find_stack(el.layer_stack_id);
        if (st) v += element_plan_area(model, el) * stack_steel_thickness(*st);
    }
    return v;
}

double steel_volume_in_region(const BridgeModel& model, const RegionSelector& region) {
    double v = 0.0;
    for (int e : select_elements(model, region)) {
        const ShellElement& el = model.elements[e];
        const LayerStack* st = model.find_stack(el.layer_stack_id);
        if (st) v += element_plan_area(model, el) * stack_steel_thickness(*st);
    }
    return v;
}

DamageApplication apply_section_loss(const BridgeModel& model, const RegionSelector& region,
                                     double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("section loss fraction must lie in (0, 1)");
    DamageApplication out;
    out.model = model;
    const auto selected = select_elements(model, region);
    if (selected.empty()) {
        out.notes.push_back("section loss region selected no elements");
        return out;
    }

    bool any_steel = false;
    for (int e : selected) {
        const LayerStack* st = model.find_stack(model.elements[e].layer_stack_id);
        if (st && stack_steel_thickness(*st) > 0.0) any_steel = true;
    }
    if (!any_steel)
        throw std::invalid_argument("section loss region selects concrete-only elements");

    // one thinned clone per distinct source stack
    std::map<int, int> clone_of;
    int id_cursor = next_stack_id(out.model);
    for (int e : selected) {
        ShellElement& el = out.model.elements[e];
        auto it = clone_of.find(el.layer_stack_id);
        if (it == clone_of.end()) {
            LayerStack clone = *out.model.find_stack(el.layer_stack_id);
            clone.id = id_cursor++;
            for (auto& l : clone.layers)
                if (l.kind != LayerKind::SolidConcrete) l.thickness *= (1.0 - fraction);
            out.model.layer_stacks.push_back(clone);
            it = clone_of.emplace(el.layer_stack_id, clone.id).first;
        }
        const double area = element_plan_area(model, el);
        const LayerStack* orig = model.find_stack(el.layer_stack_id);
        out.affected_area += area;
        out.removed_volume += area * stack_steel_thickness(*orig) * fraction;
        el.layer_stack_id = it->second;
        ++out.affected_elements;
    }
    return out;
}

DamageApplication apply_stiffness_reduction(const BridgeModel& model,
                                            const RegionSelector& region, double fraction) {
    if (fraction >= 1.0)
        throw std::invalid_argument("stiffness reduction fraction must be below 1");
    if (fraction < 0.0) throw std::invalid_argument("stiffness reduction fraction negative");
    DamageApplication out;
    out.model = model;
    const auto selected = select_elements(model, region);
    if (selected.empty()) {
        out.notes.push_back("stiffness reduction region selected no elements");
        return out;
    }
    if (fraction == 0.0) {
        out.notes.push_back("zero reduction: model unchanged");
        return out;
    }

    std::map<int, int> mat_clone;   // source material -> softened material
    std::map<int, int> stack_clone; // source stack -> stack with softened materials
    int mat_cursor = next_material_id(out.model);
    int stack_cursor = next_stack_id(out.model);
    for (int e : selected) {
        ShellElement& el = out.model.elements[e];
        auto it = stack_clone.find(el.layer_stack_id);
        if (it == stack_clone.end()) {
            LayerStack clone = *out.model.find_stack(el.layer_stack_id);
            clone.id = stack_cursor++;
            for (auto& l : clone.layers) {
                auto mit = mat_clone.find(l.material_id);
                if (mit == mat_clone.end()) {
                    Material soft = *out.model.find_material(l.material_id);
                    soft.id = mat_cursor++;
                    soft.name += "_softened";
                    soft.steel.E *= (1.0 - fraction);
                    soft.concrete.E *= (1.0 - fraction);
                    out.model.materials.push_back(soft);
                    mit = mat_clone.emplace(l.material_id, soft.id).first;
                }
                l.material_id = mit->second;
            }
            out.model.layer_stacks.push_back(clone);
            it = stack_clone.emplace(el.layer_stack_id, clone.id).first;
        }
        out.affected_area += element_plan_area(model, el);
        el.layer_stack_id = it->second;
        ++out.affected_elements;
    }
    return out;
}

DamageApplication apply_geometric_imperfection(const BridgeModel& model,
                                               const DamageOperator& op) {
    if (!(op.amplitude > 0.0)) throw std::invalid_argument("imperfection amplitude must be > 0");
    DamageApplication out;
    out.model = model;
    const auto selected = select_elements(model, op.region);
    if (selected.empty() && op.shape == ImperfectionShape::HalfSine) {
        out.notes.push_back("imperfection region selected no elements");
        return out;
    }

    if (op.shape == ImperfectionShape::HalfSine) {
        std::set<int> nodes;
        double x0 = 1e300, x1 = -1e300;
        for (int e : selected)
            for (int nid : model.elements[e].node_ids) {
                nodes.insert(nid);
                x0 = std::min(x0, model.nodes[nid].position[0]);
                x1 = std::max(x1, model.nodes[nid].position[0]);
            }
        const Vec3d dir = op.direction.normalized();
        const double span = std::max(x1 - x0, 1e-12);
        for (int nid : nodes) {
            const double x = model.nodes[nid].position[0];
            const double w = std::sin(M_PI * (x - x0) / span);
            out.model.nodes[nid].imperfection_offset += op.amplitude * w * dir;
        }
        out.affected_elements = (int)selected.size();
        return out;
    }

    // buckling-mode seed under the model's own load pattern
    Structure st(model);
    std::vector<PointState> states(st.elements().total_states);
    SparseMat K;
    Eigen::VectorXd fint;
    const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(6 * model.nodes.size());
    st.assemble_tangent(u0, states, nullptr, K, fint);
    SolveDiagnostics diag;
    auto u = solve_linear(K, st.pattern(), &st.dofs(), &diag);
    if (!u) throw std::runtime_error("imperfection: reference solve failed: " + diag.message);
    SparseMat Kg;
    st.assemble_geometric(st.expand(*u), states, Kg);
    auto modes = buckling_modes(K, Kg, op.mode_index);
    if ((int)modes.lambdas.size() < op.mode_index)
        throw std::runtime_error("imperfection: requested buckling mode not found");
    const Eigen::VectorXd phi = st.expand(modes.modes[op.mode_index - 1]);
    double max_t = 0.0;
    for (size_t n = 0; n < model.nodes.size(); ++n)
        for (int k = 0; k < 3; ++k) max_t = std::max(max_t, std::abs(phi[6 * n + k]));
    if (max_t <= 0.0) throw std::runtime_error("imperfection: mode has no translation content");
    const double scale = op.amplitude / max_t;
    for (size_t n = 0; n < model.nodes.size(); ++n)
        for (int k = 0; k < 3; ++k)
            out.model.nodes[n].imperfection_offset[k] += scale * phi[6 * n + k];
    out.affected_elements = (int)model.elements.size();
    return out;
}

DamageApplication apply_scenario(const BridgeModel& model, const DamageScenario& scenario) {
    DamageApplication acc;
    acc.model = model;
    for (const auto& op : scenario.operators) {
        DamageApplication step;
        switch (op.kind) {
            case DamageKind::SectionLoss:
                step = apply_section_loss(acc.model, op.region, op.fraction);
                break;
            case DamageKind::StiffnessReduction:
                step = apply_stiffness_reduction(acc.model, op.region, op.fraction);
                break;
            case DamageKind::GeometricImperfection:
                step = apply_geometric_imperfection(acc.model, op);
                break;
        }
        acc.model = std::move(step.model);
        acc.affected_elements += step.affected_elements;
        acc.affected_area += step.affected_area;
        acc.removed_volume += step.removed_volume;
        for (auto& n : step.notes) acc.notes.push_back(std::move(n));
    }
    return acc;
}

// ----------------------------------------------------------------------------

namespace {

bool layers_equal(const Layer& a, const Layer& b) {
    return a.material_id == b.material_id && a.thickness == b.thickness && a.kind == b.kind &&
           a.rebar_ratio == b.rebar_ratio && a.rebar_direction == b.rebar_direction;
}

}  // namespace

bool models_identical(const BridgeModel& a, const BridgeModel& b) {
    if (a.nodes.size() != b.nodes.size() || a.elements.size() != b.elements.size() ||
        a.layer_stacks.size() != b.layer_stacks.size() || a.materials.size() != b.materials.size())
        return false;
    for (size_t i = 0; i < a.nodes.size(); ++i) {
        if (a.nodes[i].id != b.nodes[i].id || a.nodes[i].position != b.nodes[i].position ||
            a.nodes[i].imperfection_offset != b.nodes[i].imperfection_offset)
            return false;
    }
    for (size_t i = 0; i < a.elements.size(); ++i) {
        if (a.elements[i].node_ids != b.elements[i].node_ids ||
            a.elements[i].layer_stack_id != b.elements[i].layer_stack_id ||
            a.elements[i].region_tags != b.elements[i].region_tags)
            return false;
    }
    for (size_t i = 0; i < a.layer_stacks.size(); ++i) {
        const auto& sa = a.layer_stacks[i];
        const auto& sb = b.layer_stacks[i];
        if (sa.id != sb.id || sa.reference_offset != sb.reference_offset ||
            sa.layers.size() != sb.layers.size())
            return false;
        for (size_t l = 0; l < sa.layers.size(); ++l)
            if (!layers_equal(sa.layers[l], sb.layers[l])) return false;
    }
    for (size_t i = 0; i < a.materials.size(); ++i) {
        const auto& ma = a.materials[i];
        const auto& mb = b.materials[i];
        if (ma.id != mb.id || ma.is_steel != mb.is_steel || ma.steel.E != mb.steel.E ||
            ma.steel.yield_stress != mb.steel.yield_stress ||
            ma.steel.hardening != mb.steel.hardening || ma.concrete.E != mb.concrete.E ||
            ma.concrete.f_c != mb.concrete.f_c || ma.concrete.f_t != mb.concrete.f_t)
            return false;
    }
    return a.design_capacity == b.design_capacity;
}

std::vector<std::string> check_commutation(const BridgeModel& model,
                                           const DamageScenario& scenario) {
    std::vector<std::string> issues;
    const auto& ops = scenario.operators;
    for (size_t i = 0; i < ops.size(); ++i)
        for (size_t j = i + 1; j < ops.size(); ++j) {
            // overlap of the selected element sets
            auto si = select_elements(model, ops[i].region);
            auto sj = select_elements(model, ops[j].region);
            std::vector<int> inter;
            std::set_intersection(si.begin(), si.end(), sj.begin(), sj.end(),
                                  std::back_inserter(inter));
            if (inter.empty()) continue;
            DamageScenario ij, ji;
            ij.operators = {ops[i], ops[j]};
            ji.operators = {ops[j], ops[i]};
            const BridgeModel mij = apply_scenario(model, ij).model;
            const BridgeModel mji = apply_scenario(model, ji).model;
            // compare physical content element-wise (ids may differ by order)
            bool same = true;
            for (size_t e = 0; e < model.elements.size() && same; ++e) {
                const LayerStack* sa = mij.find_stack(mij.elements[e].layer_stack_id);
                const LayerStack* sb = mji.find_stack(mji.elements[e].layer_stack_id);
                if (sa->layers.size() != sb->layers.size()) {
                    same = false;
                    break;
                }
                auto close = [](double x, double y) {
                    return std::abs(x - y) <= 1e-14 * std::max(std::abs(x), std::abs(y));
                };
                for (size_t l = 0; l < sa->layers.size(); ++l) {
                    if (!close(sa->layers[l].thickness, sb->layers[l].thickness)) same = false;
                    const Material* ma = mij.find_material(sa->layers[l].material_id);
                    const Material* mb = mji.find_material(sb->layers[l].material_id);
                    if (!close(ma->steel.E, mb->steel.E) ||
                        !close(ma->concrete.E, mb->concrete.E))
                        same = false;
                }
            }
            for (size_t n = 0; n < model.nodes.size() && same; ++n)
                if (mij.nodes[n].imperfection_offset != mji.nodes[n].imperfection_offset)
                    same = false;
            if (!same)
                issues.push_back("operators " + std::to_string(i) + " and " + std::to_string(j) +
                                 " do not commute on their overlap");
        }
    return issues;
}

}  // namespace girderlab
