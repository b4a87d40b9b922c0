#pragma once

// small model builders shared by the solver / driver test suites

#include "girderlab/model.hpp"

namespace testmodels {

using namespace girderlab;

inline BridgeModel plate_model(double L, double W, double t, int nx, int ny, double E = 200e9,
                               double nu = 0.0, double fy = 345e6) {
    BridgeModel m;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            m.nodes.push_back({j * (nx + 1) + i, Vec3d(L * i / nx, W * j / ny, 0.0),
                               Vec3d::Zero()});
    Material steel;
    steel.id = 0;
    steel.name = "steel";
    steel.is_steel = true;
    steel.steel = SteelLaw(E, nu, fy, {{0.0, fy}, {1.0, fy + 2e9}});
    m.materials.push_back(steel);
    LayerStack st;
    st.id = 0;
    st.layers.push_back({0, t, LayerKind::SolidSteel, 0.0, Vec2(1, 0)});
    st.reference_offset = -t / 2.0;
    m.layer_stacks.push_back(st);
    int eid = 0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            ShellElement el;
            el.id = eid++;
            el.node_ids = {j * (nx + 1) + i, j * (nx + 1) + i + 1, (j + 1) * (nx + 1) + i + 1,
                           (j + 1) * (nx + 1) + i};
            el.layer_stack_id = 0;
            el.region_tags = {"plate"};
            m.elements.push_back(el);
        }
    m.design_capacity = 1.0;
    return m;
}

inline void fix_node(BridgeModel& m, int node, std::set<int> dofs) {
    m.supports.push_back({node, std::move(dofs), 0.0});
}

}  // namespace testmodels
