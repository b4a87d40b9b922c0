#include <Eigen/Dense>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "girderlab/model.hpp"

namespace girderlab {

namespace {

void diag(std::vector<Diagnostic>& out, std::string entity, std::string message) {
    out.push_back({std::move(entity), std::move(message)});
}

}  // namespace

std::vector<Diagnostic> validate_model(const BridgeModel& model, const ValidateOptions& opt) {
    std::vector<Diagnostic> out;

    // node ids unique and dense from 0
    std::unordered_map<int, const Node*> by_id;
    for (const auto& n : model.nodes) {
        if (by_id.count(n.id))
            diag(out, "node " + std::to_string(n.id), "duplicate node id");
        else
            by_id[n.id] = &n;
        if (!n.position.allFinite() || !n.imperfection_offset.allFinite())
            diag(out, "node " + std::to_string(n.id), "non-finite coordinates");
    }
    for (size_t i = 0; i < model.nodes.size(); ++i)
        if (!by_id.count((int)i)) {
            diag(out, "nodes", "node ids not dense from 0 (missing id " + std::to_string(i) + ")");
            break;
        }

    // layer stacks
    std::unordered_set<int> stack_ids, material_ids;
    for (const auto& m : model.materials) {
        if (!material_ids.insert(m.id).second)
            diag(out, "material " + std::to_string(m.id), "duplicate material id");
    }
    for (const auto& s : model.layer_stacks) {
        if (!stack_ids.insert(s.id).second)
            diag(out, "layer_stack " + std::to_string(s.id), "duplicate layer stack id");
        if (s.layers.empty())
            diag(out, "layer_stack " + std::to_string(s.id), "stack has no layers");
        for (size_t li = 0; li < s.layers.size(); ++li) {
            const Layer& l = s.layers[li];
            const std::string ent =
                "layer_stack " + std::to_string(s.id) + " layer " + std::to_string(li);
            if (!(l.thickness > 0.0)) diag(out, ent, "layer thickness must be > 0");
            if (!material_ids.count(l.material_id))
                diag(out, ent, "unknown material id " + std::to_string(l.material_id));
            if (l.kind == LayerKind::SmearedRebar) {
                if (!(l.rebar_ratio > 0.0 && l.rebar_ratio < 0.1))
                    diag(out, ent, "rebar ratio out of (0, 0.1)");
                if (std::abs(l.rebar_direction.norm() - 1.0) > 1e-9)
                    diag(out, ent, "rebar direction not a unit vector");
            }
        }
    }

    // elements: node refs, distinctness, warp, corner winding, tags, stack ref
    std::unordered_map<int, double> shortest_edge;  // node id -> shortest attached edge
    for (const auto& e : model.elements) {
        const std::string ent = "element " + std::to_string(e.id);
        bool refs_ok = true;
        for (int nid : e.node_ids)
            if (!by_id.count(nid)) {
                diag(out, ent, "unknown node id " + std::to_string(nid));
                refs_ok = false;
            }
        std::unordered_set<int> uniq(e.node_ids.begin(), e.node_ids.end());
        if (uniq.size() != 4) diag(out, ent, "element nodes not distinct");
        if (e.region_tags.empty()) diag(out, ent, "element has no region tags");
        if (!stack_ids.count(e.layer_stack_id))
            diag(out, ent, "unknown layer stack id " + std::to_string(e.layer_stack_id));
        if (!refs_ok || uniq.size() != 4) continue;

        Vec3d p[4];
        for (int k = 0; k < 4; ++k) {
            const Node& n = *by_id.at(e.node_ids[k]);
            p[k] = n.position + n.imperfection_offset;
        }
        for (int k = 0; k < 4; ++k) {
            const double len = (p[(k + 1) % 4] - p[k]).norm();
            for (int kk : {k, (k + 1) % 4}) {
                auto it = shortest_edge.find(e.node_ids[kk]);
                if (it == shortest_edge.end() || len < it->second)
                    shortest_edge[e.node_ids[kk]] = len;
            }
        }
        // warp: angle between the two diagonal-split normals
        const Vec3d n1 = (p[1] - p[0]).cross(p[2] - p[0]);
        const Vec3d n2 = (p[2] - p[0]).cross(p[3] - p[0]);
        if (n1.norm() < 1e-16 || n2.norm() < 1e-16) {
            diag(out, ent, "degenerate (zero-area) triangle split");
        } else {
            const double cosang =
                std::clamp(n1.normalized().dot(n2.normalized()), -1.0, 1.0);
            if (std::acos(cosang) * 180.0 / M_PI > opt.warp_limit_deg)
                diag(out, ent, "warp exceeds limit between diagonal normals");
            // corner turning direction must not flip (self-intersection guard)
            const Vec3d nref = (n1 + n2).normalized();
            for (int k = 0; k < 4; ++k) {
                const Vec3d a = p[(k + 1) % 4] - p[k];
                const Vec3d b = p[(k + 3) % 4] - p[k];
                if (a.cross(b).dot(nref) <= 0.0) {
                    diag(out, ent, "self-intersecting or non-convex quadrilateral");
                    break;
                }
            }
        }
    }

    // imperfection bound relative to shortest attached edge
    for (const auto& n : model.nodes) {
        const double mag = n.imperfection_offset.norm();
        if (mag == 0.0) continue;
        auto it = shortest_edge.find(n.id);
        if (it != shortest_edge.end() && mag > opt.imperfection_bound_ratio * it->second)
            diag(out, "node " + std::to_string(n.id),
                 "imperfection offset exceeds bound relative to shortest attached edge");
    }

    // supports
    for (const auto& s : model.supports) {
        const std::string ent = "support at node " + std::to_string(s.node_id);
        if (!by_id.count(s.node_id)) diag(out, ent, "unknown node id");
        if (s.fixed_dofs.empty()) diag(out, ent, "support fixes no dofs");
        for (int d : s.fixed_dofs)
            if (d < 0 || d > 5) diag(out, ent, "dof index out of range");
    }

    // load case
    for (const auto& pl : model.load_case.point_loads)
        if (!by_id.count(pl.node_id))
            diag(out, "point load", "unknown node id " + std::to_string(pl.node_id));
    for (const auto& p : model.load_case.patch_loads)
        if (!(p.extent[0] > 0.0 && p.extent[1] > 0.0))
            diag(out, "patch load", "patch extent components must be > 0");
    {
        const double total = model.load_case.total_magnitude();
        if (!(total > 0.0) || !std::isfinite(total))
            diag(out, "load case", "total applied load must be finite and nonzero");
    }

    if (!(model.design_capacity > 0.0))
        diag(out, "model", "design capacity must be > 0");

    // rigid-body restraint: rank of the 6 rigid modes evaluated at the
    // constrained dofs must be 6
    {
        std::vector<Eigen::Matrix<double, 6, 1>> rows;
        for (const auto& s : model.supports) {
            auto it = by_id.find(s.node_id);
            if (it == by_id.end()) continue;
            const Vec3d x = it->second->position;
            for (int d : s.fixed_dofs) {
                Eigen::Matrix<double, 6, 1> row = Eigen::Matrix<double, 6, 1>::Zero();
                if (d < 3) {
                    row[d] = 1.0;  // translations
                    // rotation mode k gives displacement e_k x x
                    for (int k = 0; k < 3; ++k) {
                        Vec3d ek = Vec3d::Zero();
                        ek[k] = 1.0;
                        row[3 + k] = ek.cross(x)[d];
                    }
                } else {
                    row[3 + (d - 3)] = 1.0;
                }
                rows.push_back(row);
            }
        }
        Eigen::MatrixXd A(rows.size(), 6);
        for (size_t i = 0; i < rows.size(); ++i) A.row(i) = rows[i].transpose();
        const long rank =
            rows.empty() ? 0
                         : Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(A).setThreshold(1e-10).rank();
        if (rank < 6)
            diag(out, "supports",
                 "insufficient restraint against rigid-body motion (rank " +
                     std::to_string(rank) + " of 6)");
    }

    return out;
}

}  // namespace girderlab
