#include "girderlab/model_io.hpp"

#include <fstream>
#include <json.hpp>

#include "girderlab/generators.hpp"
#include "girderlab/units.hpp"

namespace girderlab {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

double quantity(const json& j, UnitKind kind, const std::string& what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        auto v = parse_quantity(j.get<std::string>(), kind);
        if (!v) fail(what + ": cannot parse quantity '" + j.get<std::string>() + "'");
        return *v;
    }
    fail(what + ": expected a number or unit-annotated string");
}

double quantity_or(const json& j, const char* key, UnitKind kind, double fallback) {
    if (!j.contains(key)) return fallback;
    return quantity(j.at(key), kind, key);
}

Vec3d vec3_quantity(const json& j, UnitKind kind, const std::string& what) {
    if (!j.is_array() || j.size() != 3) fail(what + ": expected a 3-vector");
    return Vec3d(quantity(j[0], kind, what), quantity(j[1], kind, what),
                 quantity(j[2], kind, what));
}

int dof_index(const std::string& name) {
    if (name == "ux") return UX;
    if (name == "uy") return UY;
    if (name == "uz") return UZ;
    if (name == "rx") return RX;
    if (name == "ry") return RY;
    if (name == "rz") return RZ;
    fail("unknown dof name '" + name + "'");
}

Material parse_material(const json& j) {
    Material m;
    m.id = j.at("id").get<int>();
    m.name = j.value("name", std::string("material_") + std::to_string(m.id));
    const std::string type = j.at("type").get<std::string>();
    if (type == "steel") {
        m.is_steel = true;
        m.steel.E = quantity(j.at("E"), UnitKind::Pressure, "E");
        m.steel.nu = j.value("nu", 0.3);
        m.steel.yield_stress = quantity(j.at("yield_stress"), UnitKind::Pressure, "yield_stress");
        m.steel.hardening = {{0.0, m.steel.yield_stress}};
        if (j.contains("hardening")) {
            m.steel.hardening.clear();
            for (const auto& knot : j.at("hardening"))
                m.steel.hardening.emplace_back(
                    knot.at(0).get<double>(),
                    quantity(knot.at(1), UnitKind::Pressure, "hardening stress"));
        }
    } else if (type == "concrete") {
        m.is_steel = false;
        m.concrete.E = quantity(j.at("E"), UnitKind::Pressure, "E");
        m.concrete.nu = j.value("nu", 0.18);
        m.concrete.f_c = quantity(j.at("f_c"), UnitKind::Pressure, "f_c");
        m.concrete.f_t = quantity(j.at("f_t"), UnitKind::Pressure, "f_t");
        m.concrete.softening_modulus =
            j.contains("softening_modulus")
                ? quantity(j.at("softening_modulus"), UnitKind::Pressure, "softening_modulus")
                : ConcreteLaw::softening_to_zero_at(m.concrete.E, m.concrete.f_t);
        m.concrete.shear_retention = j.value("shear_retention", 0.2);
        m.concrete.crushing_strain = j.value("crushing_strain", 3.0e-3);
    } else {
        fail("material type must be 'steel' or 'concrete'");
    }
    return m;
}

LayerKind parse_layer_kind(const std::string& s) {
    if (s == "solid-steel") return LayerKind::SolidSteel;
    if (s == "solid-concrete") return LayerKind::SolidConcrete;
    if (s == "smeared-rebar") return LayerKind::SmearedRebar;
    fail("unknown layer kind '" + s + "'");
}

BridgeModel from_generator(const json& g) {
    const std::string kind = g.at("kind").get<std::string>();
    if (kind == "slab") {
        SlabParams p;
        p.side = quantity_or(g, "side", UnitKind::Length, p.side);
        p.thickness = quantity_or(g, "thickness", UnitKind::Length, p.thickness);
        p.rebar_ratio = g.value("rebar_ratio", p.rebar_ratio);
        p.rebar_depth = quantity_or(g, "rebar_depth", UnitKind::Length, p.rebar_depth);
        p.mesh_n = g.value("mesh_n", p.mesh_n);
        p.total_load = quantity_or(g, "total_load", UnitKind::Force, p.total_load);
        p.design_capacity = quantity_or(g, "design_capacity", UnitKind::Force, p.design_capacity);
        p.Ec = quantity_or(g, "Ec", UnitKind::Pressure, p.Ec);
        p.f_c = quantity_or(g, "f_c", UnitKind::Pressure, p.f_c);
        p.f_t = quantity_or(g, "f_t", UnitKind::Pressure, p.f_t);
        p.Es = quantity_or(g, "Es", UnitKind::Pressure, p.Es);
        p.fy = quantity_or(g, "fy", UnitKind::Pressure, p.fy);
        return generate_slab_model(p);
    }
    if (kind == "bridge") {
        BridgeParams p;
        p.span = quantity_or(g, "span", UnitKind::Length, p.span);
        p.width = quantity_or(g, "width", UnitKind::Length, p.width);
        p.deck_thickness = quantity_or(g, "deck_thickness", UnitKind::Length, p.deck_thickness);
        p.girder_spacing = quantity_or(g, "girder_spacing", UnitKind::Length, p.girder_spacing);
        p.n_girders = g.value("n_girders", p.n_girders);
        p.n_span = g.value("n_span", p.n_span);
        p.n_web = g.value("n_web", p.n_web);
        p.n_deck_bay = g.value("n_deck_bay", p.n_deck_bay);
        p.n_overhang = g.value("n_overhang", p.n_overhang);
        p.rebar_ratio = g.value("rebar_ratio", p.rebar_ratio);
        p.design_capacity = quantity_or(g, "design_capacity", UnitKind::Force, p.design_capacity);
        p.truck_total = quantity_or(g, "truck_total", UnitKind::Force, p.truck_total);
        p.axle_spacing = quantity_or(g, "axle_spacing", UnitKind::Length, p.axle_spacing);
        if (g.contains("section")) {
            const json& s = g.at("section");
            auto& sec = p.section;
            sec.web_height = quantity_or(s, "web_height", UnitKind::Length, sec.web_height);
            sec.web_thickness =
                quantity_or(s, "web_thickness", UnitKind::Length, sec.web_thickness);
            sec.top_flange_width =
                quantity_or(s, "top_flange_width", UnitKind::Length, sec.top_flange_width);
            sec.top_flange_thickness = quantity_or(s, "top_flange_thickness", UnitKind::Length,
                                                   sec.top_flange_thickness);
            sec.bottom_flange_width =
                quantity_or(s, "bottom_flange_width", UnitKind::Length, sec.bottom_flange_width);
            sec.bottom_flange_thickness = quantity_or(
                s, "bottom_flange_thickness", UnitKind::Length, sec.bottom_flange_thickness);
            sec.stiffener_width =
                quantity_or(s, "stiffener_width", UnitKind::Length, sec.stiffener_width);
            sec.stiffener_thickness = quantity_or(s, "stiffener_thickness", UnitKind::Length,
                                                  sec.stiffener_thickness);
        }
        p.Ec = quantity_or(g, "Ec", UnitKind::Pressure, p.Ec);
        p.f_c = quantity_or(g, "f_c", UnitKind::Pressure, p.f_c);
        p.f_t = quantity_or(g, "f_t", UnitKind::Pressure, p.f_t);
        p.Es = quantity_or(g, "Es", UnitKind::Pressure, p.Es);
        p.fy = quantity_or(g, "fy", UnitKind::Pressure, p.fy);
        p.fy_rebar = quantity_or(g, "fy_rebar", UnitKind::Pressure, p.fy_rebar);
        return generate_bridge_model(p);
    }
    if (kind == "plate_girder") {
        PlateGirderParams p;
        p.span = quantity_or(g, "span", UnitKind::Length, p.span);
        p.n_span = g.value("n_span", p.n_span);
        p.n_web = g.value("n_web", p.n_web);
        p.patch_length = quantity_or(g, "patch_length", UnitKind::Length, p.patch_length);
        p.load_total = quantity_or(g, "load_total", UnitKind::Force, p.load_total);
        p.design_capacity = quantity_or(g, "design_capacity", UnitKind::Force, p.design_capacity);
        p.Es = quantity_or(g, "Es", UnitKind::Pressure, p.Es);
        p.fy = quantity_or(g, "fy", UnitKind::Pressure, p.fy);
        if (g.contains("section")) {
            const json& s = g.at("section");
            auto& sec = p.section;
            sec.web_height = quantity_or(s, "web_height", UnitKind::Length, sec.web_height);
            sec.web_thickness =
                quantity_or(s, "web_thickness", UnitKind::Length, sec.web_thickness);
            sec.top_flange_width =
                quantity_or(s, "top_flange_width", UnitKind::Length, sec.top_flange_width);
            sec.top_flange_thickness = quantity_or(s, "top_flange_thickness", UnitKind::Length,
                                                   sec.top_flange_thickness);
            sec.bottom_flange_width =
                quantity_or(s, "bottom_flange_width", UnitKind::Length, sec.bottom_flange_width);
            sec.bottom_flange_thickness = quantity_or(
                s, "bottom_flange_thickness", UnitKind::Length, sec.bottom_flange_thickness);
            sec.stiffener_width =
                quantity_or(s, "stiffener_width", UnitKind::Length, sec.stiffener_width);
            sec.stiffener_thickness = quantity_or(s, "stiffener_thickness", UnitKind::Length,
                                                  sec.stiffener_thickness);
        }
        return generate_plate_girder_model(p);
    }
    if (kind == "beam_end") {
        BeamEndParams p;
        p.length = quantity_or(g, "length", UnitKind::Length, p.length);
        p.depth = quantity_or(g, "depth", UnitKind::Length, p.depth);
        p.flange_width = quantity_or(g, "flange_width", UnitKind::Length, p.flange_width);
        p.flange_thickness =
            quantity_or(g, "flange_thickness", UnitKind::Length, p.flange_thickness);
        p.web_thickness = quantity_or(g, "web_thickness", UnitKind::Length, p.web_thickness);
        p.n_len = g.value("n_len", p.n_len);
        p.n_web = g.value("n_web", p.n_web);
        p.damage_height = quantity_or(g, "damage_height", UnitKind::Length, p.damage_height);
        p.damage_flange_width =
            quantity_or(g, "damage_flange_width", UnitKind::Length, p.damage_flange_width);
        p.load_total = quantity_or(g, "load_total", UnitKind::Force, p.load_total);
        p.design_capacity = quantity_or(g, "design_capacity", UnitKind::Force, p.design_capacity);
        p.Es = quantity_or(g, "Es", UnitKind::Pressure, p.Es);
        p.fy = quantity_or(g, "fy", UnitKind::Pressure, p.fy);
        return generate_beam_end_model(p);
    }
    fail("unknown generator kind '" + kind + "'");
}

json parse_with_location(std::ifstream& in, const std::filesystem::path& path) {
    try {
        return json::parse(in);
    } catch (const json::parse_error& ex) {
        // translate the byte offset into line/column
        std::ifstream again(path);
        std::string text((std::istreambuf_iterator<char>(again)),
                         std::istreambuf_iterator<char>());
        int line = 1, col = 1;
        for (size_t i = 0; i < std::min(text.size(), (size_t)ex.byte); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        fail(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
             ex.what());
    }
}

}  // namespace

BridgeModel load_model_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open model file " + path.string());
    const json j = parse_with_location(in, path);

    if (j.contains("generator")) {
        BridgeModel m = from_generator(j.at("generator"));
        if (j.contains("design_capacity"))
            m.design_capacity =
                quantity(j.at("design_capacity"), UnitKind::Force, "design_capacity");
        if (j.contains("name")) m.metadata["name"] = j.at("name").get<std::string>();
        if (j.contains("control_node"))
            m.metadata["control_node"] = std::to_string(j.at("control_node").get<int>());
        return m;
    }

    BridgeModel m;
    for (const auto& mj : j.value("materials", json::array())) m.materials.push_back(parse_material(mj));
    for (const auto& sj : j.value("layer_stacks", json::array())) {
        LayerStack st;
        st.id = sj.at("id").get<int>();
        st.reference_offset = quantity_or(sj, "reference_offset", UnitKind::Length, 0.0);
        for (const auto& lj : sj.at("layers")) {
            Layer l;
            l.material_id = lj.at("material").get<int>();
            l.thickness = quantity(lj.at("thickness"), UnitKind::Length, "layer thickness");
            l.kind = parse_layer_kind(lj.at("kind").get<std::string>());
            if (l.kind == LayerKind::SmearedRebar) {
                l.rebar_ratio = lj.at("rebar_ratio").get<double>();
                if (lj.contains("rebar_direction"))
                    l.rebar_direction = Vec2(lj.at("rebar_direction").at(0).get<double>(),
                                             lj.at("rebar_direction").at(1).get<double>());
            }
            st.layers.push_back(l);
        }
        m.layer_stacks.push_back(st);
    }
    for (const auto& nj : j.value("nodes", json::array())) {
        Node n;
        n.id = nj.at("id").get<int>();
        n.position = vec3_quantity(nj.at("position"), UnitKind::Length, "node position");
        if (nj.contains("imperfection_offset"))
            n.imperfection_offset =
                vec3_quantity(nj.at("imperfection_offset"), UnitKind::Length, "offset");
        m.nodes.push_back(n);
    }
    for (const auto& ej : j.value("elements", json::array())) {
        ShellElement el;
        el.id = ej.at("id").get<int>();
        const auto& nn = ej.at("nodes");
        for (int k = 0; k < 4; ++k) el.node_ids[k] = nn.at(k).get<int>();
        el.layer_stack_id = ej.at("layer_stack").get<int>();
        for (const auto& t : ej.value("region_tags", json::array()))
            el.region_tags.insert(t.get<std::string>());
        m.elements.push_back(el);
    }
    for (const auto& sj : j.value("supports", json::array())) {
        Support s;
        s.node_id = sj.at("node").get<int>();
        for (const auto& d : sj.at("fixed_dofs")) s.fixed_dofs.insert(dof_index(d.get<std::string>()));
        s.prescribed_value = quantity_or(sj, "prescribed_value", UnitKind::Length, 0.0);
        m.supports.push_back(s);
    }
    if (j.contains("loads")) {
        const json& lj = j.at("loads");
        for (const auto& pj : lj.value("point_loads", json::array())) {
            PointLoad p;
            p.node_id = pj.at("node").get<int>();
            p.force = vec3_quantity(pj.at("force"), UnitKind::Force, "point load");
            m.load_case.point_loads.push_back(p);
        }
        for (const auto& pj : lj.value("patch_loads", json::array())) {
            PatchLoad p;
            p.center = vec3_quantity(pj.at("center"), UnitKind::Length, "patch center");
            p.extent = Vec2(quantity(pj.at("extent").at(0), UnitKind::Length, "patch extent"),
                            quantity(pj.at("extent").at(1), UnitKind::Length, "patch extent"));
            p.resultant = quantity(pj.at("resultant"), UnitKind::Force, "patch resultant");
            if (pj.contains("direction"))
                p.direction = vec3_quantity(pj.at("direction"), UnitKind::Dimensionless,
                                            "patch direction")
                                  .normalized();
            m.load_case.patch_loads.push_back(p);
        }
    }
    if (j.contains("design_capacity"))
        m.design_capacity = quantity(j.at("design_capacity"), UnitKind::Force, "design_capacity");
    if (j.contains("control_node"))
        m.metadata["control_node"] = std::to_string(j.at("control_node").get<int>());
    if (j.contains("name")) m.metadata["name"] = j.at("name").get<std::string>();
    return m;
}

DamageScenario load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open scenario file " + path.string());
    const json j = parse_with_location(in, path);
    DamageScenario sc;
    sc.name = j.value("name", path.stem().string());
    for (const auto& oj : j.at("operators")) {
        DamageOperator op;
        const std::string kind = oj.at("kind").get<std::string>();
        if (kind == "section_loss")
            op.kind = DamageKind::SectionLoss;
        else if (kind == "stiffness_reduction")
            op.kind = DamageKind::StiffnessReduction;
        else if (kind == "geometric_imperfection")
            op.kind = DamageKind::GeometricImperfection;
        else
            fail("unknown damage operator kind '" + kind + "'");
        if (oj.contains("region")) {
            const json& rj = oj.at("region");
            for (const auto& t : rj.value("tags", json::array()))
                op.region.tags.push_back(t.get<std::string>());
            if (rj.contains("box")) {
                op.region.box_min =
                    vec3_quantity(rj.at("box").at("min"), UnitKind::Length, "box min");
                op.region.box_max =
                    vec3_quantity(rj.at("box").at("max"), UnitKind::Length, "box max");
            }
        }
        op.fraction = oj.value("fraction", 0.0);
        if (oj.contains("shape")) {
            const std::string shape = oj.at("shape").get<std::string>();
            if (shape == "half_sine")
                op.shape = ImperfectionShape::HalfSine;
            else if (shape == "buckling_mode")
                op.shape = ImperfectionShape::BucklingMode;
            else
                fail("unknown imperfection shape '" + shape + "'");
        }
        if (oj.contains("direction"))
            op.direction =
                vec3_quantity(oj.at("direction"), UnitKind::Dimensionless, "direction");
        op.amplitude = quantity_or(oj, "amplitude", UnitKind::Length, 0.0);
        op.mode_index = oj.value("mode_index", 1);
        sc.operators.push_back(op);
    }
    return sc;
}

void save_model_file(const BridgeModel& m, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    if (auto it = m.metadata.find("name"); it != m.metadata.end()) j["name"] = it->second;
    j["design_capacity"] = m.design_capacity;
    if (auto it = m.metadata.find("control_node"); it != m.metadata.end())
        j["control_node"] = std::stoi(it->second);
    for (const auto& mat : m.materials) {
        nlohmann::ordered_json mj;
        mj["id"] = mat.id;
        mj["name"] = mat.name;
        if (mat.is_steel) {
            mj["type"] = "steel";
            mj["E"] = mat.steel.E;
            mj["nu"] = mat.steel.nu;
            mj["yield_stress"] = mat.steel.yield_stress;
            nlohmann::ordered_json hj = nlohmann::ordered_json::array();
            for (const auto& [ep, s] : mat.steel.hardening) hj.push_back({ep, s});
            mj["hardening"] = hj;
        } else {
            mj["type"] = "concrete";
            mj["E"] = mat.concrete.E;
            mj["nu"] = mat.concrete.nu;
            mj["f_c"] = mat.concrete.f_c;
            mj["f_t"] = mat.concrete.f_t;
            mj["softening_modulus"] = mat.concrete.softening_modulus;
            mj["shear_retention"] = mat.concrete.shear_retention;
            mj["crushing_strain"] = mat.concrete.crushing_strain;
        }
        j["materials"].push_back(mj);
    }
    for (const auto& st : m.layer_stacks) {
        nlohmann::ordered_json sj;
        sj["id"] = st.id;
        sj["reference_offset"] = st.reference_offset;
        for (const auto& l : st.layers) {
            nlohmann::ordered_json lj;
            lj["material"] = l.material_id;
            lj["thickness"] = l.thickness;
            lj["kind"] = l.kind == LayerKind::SolidSteel
                             ? "solid-steel"
                             : (l.kind == LayerKind::SolidConcrete ? "solid-concrete"
                                                                   : "smeared-rebar");
            if (l.kind == LayerKind::SmearedRebar) {
                lj["rebar_ratio"] = l.rebar_ratio;
                lj["rebar_direction"] = {l.rebar_direction[0], l.rebar_direction[1]};
            }
            sj["layers"].push_back(lj);
        }
        j["layer_stacks"].push_back(sj);
    }
    for (const auto& n : m.nodes) {
        nlohmann::ordered_json nj;
        nj["id"] = n.id;
        nj["position"] = {n.position[0], n.position[1], n.position[2]};
        if (n.imperfection_offset.norm() > 0.0)
            nj["imperfection_offset"] = {n.imperfection_offset[0], n.imperfection_offset[1],
                                         n.imperfection_offset[2]};
        j["nodes"].push_back(nj);
    }
    for (const auto& el : m.elements) {
        nlohmann::ordered_json ej;
        ej["id"] = el.id;
        ej["nodes"] = {el.node_ids[0], el.node_ids[1], el.node_ids[2], el.node_ids[3]};
        ej["layer_stack"] = el.layer_stack_id;
        ej["region_tags"] = el.region_tags;
        j["elements"].push_back(ej);
    }
    static const char* dof_names[6] = {"ux", "uy", "uz", "rx", "ry", "rz"};
    for (const auto& s : m.supports) {
        nlohmann::ordered_json sj;
        sj["node"] = s.node_id;
        for (int d : s.fixed_dofs) sj["fixed_dofs"].push_back(dof_names[d]);
        if (s.prescribed_value != 0.0) sj["prescribed_value"] = s.prescribed_value;
        j["supports"].push_back(sj);
    }
    for (const auto& p : m.load_case.point_loads) {
        nlohmann::ordered_json pj;
        pj["node"] = p.node_id;
        pj["force"] = {p.force[0], p.force[1], p.force[2]};
        j["loads"]["point_loads"].push_back(pj);
    }
    for (const auto& p : m.load_case.patch_loads) {
        nlohmann::ordered_json pj;
        pj["center"] = {p.center[0], p.center[1], p.center[2]};
        pj["extent"] = {p.extent[0], p.extent[1]};
        pj["resultant"] = p.resultant;
        pj["direction"] = {p.direction[0], p.direction[1], p.direction[2]};
        j["loads"]["patch_loads"].push_back(pj);
    }
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

}  // namespace girderlab
