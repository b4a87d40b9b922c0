#include "girderlab/generators.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace girderlab {

namespace {

/// Deduplicating node factory; coordinates quantized to 0.1 um so shared
/// lines between sub-assemblies meet exactly and deterministically.
class MeshBuilder {
public:
    explicit MeshBuilder(BridgeModel& m) : m_(&m) {}

    int node(const Vec3d& p) {
        const auto key = std::make_tuple((long long)std::llround(p[0] * 1e7),
                                         (long long)std::llround(p[1] * 1e7),
                                         (long long)std::llround(p[2] * 1e7));
        auto it = ids_.find(key);
        if (it != ids_.end()) return it->second;
        const int id = (int)m_->nodes.size();
        m_->nodes.push_back({id, p, Vec3d::Zero()});
        ids_.emplace(key, id);
        return id;
    }

    int quad(int n0, int n1, int n2, int n3, int stack, std::set<std::string> tags) {
        ShellElement el;
        el.id = (int)m_->elements.size();
        el.node_ids = {n0, n1, n2, n3};
        el.layer_stack_id = stack;
        el.region_tags = std::move(tags);
        m_->elements.push_back(el);
        return el.id;
    }

    /// Rectangular patch of quads over sorted coordinate lines, mapped into
    /// 3D by `place(a, b) -> point`. Winding follows (a, b) right-handed.
    template <typename Place>
    void grid(const std::vector<double>& as, const std::vector<double>& bs, int stack,
              const std::set<std::string>& tags, Place place) {
        for (size_t j = 0; j + 1 < bs.size(); ++j)
            for (size_t i = 0; i + 1 < as.size(); ++i) {
                const int n0 = node(place(as[i], bs[j]));
                const int n1 = node(place(as[i + 1], bs[j]));
                const int n2 = node(place(as[i + 1], bs[j + 1]));
                const int n3 = node(place(as[i], bs[j + 1]));
                quad(n0, n1, n2, n3, stack, tags);
            }
    }

private:
    BridgeModel* m_;
    std::map<std::tuple<long long, long long, long long>, int> ids_;
};

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(n + 1);
    for (int i = 0; i <= n; ++i) out[i] = a + (b - a) * i / n;
    return out;
}

Material steel_material(int id, const std::string& name, double E, double fy,
                        double hardening_modulus = 2e9) {
    Material m;
    m.id = id;
    m.name = name;
    m.is_steel = true;
    m.steel = SteelLaw(E, 0.3, fy, {{0.0, fy}, {1.0, fy + hardening_modulus}});
    return m;
}

Material concrete_material(int id, const std::string& name, double E, double nu, double fc,
                           double ft) {
    Material m;
    m.id = id;
    m.name = name;
    m.is_steel = false;
    m.concrete.E = E;
    m.concrete.nu = nu;
    m.concrete.f_c = fc;
    m.concrete.f_t = ft;
    m.concrete.softening_modulus = ConcreteLaw::softening_to_zero_at(E, ft);
    m.concrete.shear_retention = 0.2;
    m.concrete.crushing_strain = 3.0e-3;
    return m;
}

/// Concrete slab stack with smeared mats. `mats` holds (depth of mat center
/// from stack bottom, mesh direction). Equivalent steel thickness per mesh
/// direction is ratio * slab thickness.
LayerStack slab_stack(int id, double thickness, int conc_mat, int rebar_mat, double rebar_ratio,
                      const std::vector<std::pair<double, Vec2>>& mats, double reference_offset) {
    LayerStack st;
    st.id = id;
    st.reference_offset = reference_offset;
    const double te = rebar_ratio * thickness;
    double cursor = 0.0;
    auto add_concrete = [&](double from, double to, int splits) {
        const double h = (to - from) / splits;
        for (int i = 0; i < splits; ++i)
            st.layers.push_back({conc_mat, h, LayerKind::SolidConcrete, 0.0, Vec2(1, 0)});
    };
    for (const auto& [zc, dir] : mats) {
        const double z0 = zc - 0.5 * te;
        if (z0 > cursor + 1e-12) add_concrete(cursor, z0, 2);
        Layer rl;
        rl.material_id = rebar_mat;
        rl.thickness = te;
        rl.kind = LayerKind::SmearedRebar;
        rl.rebar_ratio = rebar_ratio;
        rl.rebar_direction = dir;
        st.layers.push_back(rl);
        cursor = zc + 0.5 * te;
    }
    if (cursor < thickness - 1e-12) add_concrete(cursor, thickness, 2);
    return st;
}

LayerStack steel_stack(int id, double thickness, int mat, double reference_offset) {
    LayerStack st;
    st.id = id;
    st.reference_offset = reference_offset;
    st.layers.push_back({mat, thickness, LayerKind::SolidSteel, 0.0, Vec2(1, 0)});
    return st;
}

}  // namespace

// ============================================================================
// Quarter slab
// ============================================================================

BridgeModel generate_slab_model(const SlabParams& p) {
    if (!(p.side > 0 && p.thickness > 0 && p.rebar_depth > 0 && p.rebar_depth < p.thickness))
        throw std::invalid_argument("slab: nonpositive or inconsistent dimensions");
    if (p.mesh_n < 2) throw std::invalid_argument("slab: mesh_n must be >= 2");

    BridgeModel m;
    m.materials.push_back(concrete_material(0, "slab_concrete", p.Ec, p.nu_c, p.f_c, p.f_t));
    m.materials.push_back(steel_material(1, "rebar", p.Es, p.fy));
    const double z_mesh = p.thickness - p.rebar_depth;  // from stack bottom
    m.layer_stacks.push_back(slab_stack(0, p.thickness, 0, 1, p.rebar_ratio,
                                        {{z_mesh, Vec2(1, 0)}}, -0.5 * p.thickness));

    MeshBuilder b(m);
    const double a = 0.5 * p.side;  // quarter side
    const auto xs = linspace(0.0, a, p.mesh_n);
    b.grid(xs, xs, 0, {"deck", "slab"},
           [&](double x, double y) { return Vec3d(x, y, 0.0); });

    const int npr = p.mesh_n + 1;
    for (int k = 0; k <= p.mesh_n; ++k) {
        m.supports.push_back({k * npr + 0, {UX, RY, RZ}, 0.0});  // symmetry plane x = 0
        m.supports.push_back({k, {UY, RX, RZ}, 0.0});            // symmetry plane y = 0
    }
    m.supports.push_back({p.mesh_n * npr + p.mesh_n, {UZ}, 0.0});  // corner

    m.load_case.point_loads.push_back({0, Vec3d(0, 0, -p.total_load / 4.0)});
    m.design_capacity = p.design_capacity;
    m.metadata["control_node"] = "0";
    m.metadata["name"] = "corner-supported two-way slab (quarter model)";
    return m;
}

// ============================================================================
// Girder assembly pieces (shared by the bridge, plate girder and beam end)
// ============================================================================

namespace {

struct GirderStacks {
    int web = 0, top_flange = 0, bottom_flange = 0, stiffener = 0;
};

/// Builds web, flanges and bearing stiffeners of one girder along x.
/// The interface line (top of top flange) lies at z = 0 on y = yg.
void build_girder(MeshBuilder& b, const std::vector<double>& xs, double yg,
                  const GirderSection& sec, const GirderStacks& stacks, int n_web,
                  const std::string& tag, double span, bool stiffeners) {
    const double depth = sec.top_flange_thickness + sec.web_height +
                         0.5 * sec.bottom_flange_thickness;
    const auto zs = linspace(0.0, -depth, n_web);

    b.grid(xs, zs, stacks.web, {"girder", tag, "girder.web", tag + ".web"},
           [&](double x, double z) { return Vec3d(x, yg, z); });

    for (int side : {-1, 1}) {
        const std::vector<double> ys_top = {yg, yg + side * 0.5 * sec.top_flange_width};
        b.grid(xs, ys_top, stacks.top_flange,
               {"girder", tag, "girder.top_flange", tag + ".top_flange"},
               [&](double x, double y) { return Vec3d(x, y, 0.0); });
        const std::vector<double> ys_bot = {yg, yg + side * 0.5 * sec.bottom_flange_width};
        b.grid(xs, ys_bot, stacks.bottom_flange,
               {"girder", tag, "girder.bottom_flange", tag + ".bottom_flange"},
               [&](double x, double y) { return Vec3d(x, y, -depth); });
    }

    if (stiffeners) {
        for (double xe : {0.0, span}) {
            const std::string end_tag = (xe == 0.0) ? "end_region.west" : "end_region.east";
            for (int side : {-1, 1}) {
                const std::vector<double> ys = {yg, yg + side * sec.stiffener_width};
                b.grid(ys, zs, stacks.stiffener,
                       {"girder", tag, "girder.stiffener", tag + ".stiffener", end_tag},
                       [&](double y, double z) { return Vec3d(xe, y, z); });
            }
        }
    }
}

}  // namespace

// ============================================================================
// Composite bridge
// ============================================================================

BridgeModel generate_bridge_model(const BridgeParams& p) {
    if (p.n_girders < 2) throw std::invalid_argument("bridge: need at least 2 girders");
    if (p.girder_spacing * (p.n_girders - 1) > p.width)
        throw std::invalid_argument("bridge: girders do not fit within the deck width");

    BridgeModel m;
    m.materials.push_back(concrete_material(0, "deck_concrete", p.Ec, p.nu_c, p.f_c, p.f_t));
    m.materials.push_back(steel_material(1, "girder_steel", p.Es, p.fy));
    m.materials.push_back(steel_material(2, "rebar", p.Es, p.fy_rebar));

    // deck stack sits on the interface plane (z = 0), mats bottom and top
    m.layer_stacks.push_back(slab_stack(
        0, p.deck_thickness, 0, 2, p.rebar_ratio,
        {{p.cover_bottom, Vec2(1, 0)}, {p.deck_thickness - p.cover_top, Vec2(1, 0)}}, 0.0));
    const GirderSection& s = p.section;
    m.layer_stacks.push_back(steel_stack(1, s.web_thickness, 1, -0.5 * s.web_thickness));
    m.layer_stacks.push_back(
        steel_stack(2, s.top_flange_thickness, 1, -s.top_flange_thickness));
    m.layer_stacks.push_back(
        steel_stack(3, s.bottom_flange_thickness, 1, -0.5 * s.bottom_flange_thickness));
    m.layer_stacks.push_back(
        steel_stack(4, s.stiffener_thickness, 1, -0.5 * s.stiffener_thickness));

    MeshBuilder b(m);
    const auto xs = linspace(0.0, p.span, p.n_span);

    // transverse deck lines: overhangs and girder bays
    std::vector<double> girder_y(p.n_girders);
    for (int g = 0; g < p.n_girders; ++g)
        girder_y[g] = (g - 0.5 * (p.n_girders - 1)) * p.girder_spacing;
    std::vector<double> ys;
    const double edge = 0.5 * p.width;
    for (int i = 0; i <= p.n_overhang; ++i)
        ys.push_back(-edge + (girder_y.front() + edge) * i / p.n_overhang);
    for (int g = 0; g + 1 < p.n_girders; ++g)
        for (int i = 1; i <= p.n_deck_bay; ++i)
            ys.push_back(girder_y[g] + (girder_y[g + 1] - girder_y[g]) * i / p.n_deck_bay);
    for (int i = 1; i <= p.n_overhang; ++i)
        ys.push_back(girder_y.back() + (edge - girder_y.back()) * i / p.n_overhang);

    b.grid(xs, ys, 0, {"deck"}, [&](double x, double y) { return Vec3d(x, y, 0.0); });

    GirderStacks gs{1, 2, 3, 4};
    for (int g = 0; g < p.n_girders; ++g)
        build_girder(b, xs, girder_y[g], s, gs, p.n_web, "girder" + std::to_string(g), p.span,
                     true);

    // hinge / roller at the bottom-flange girder lines
    const double depth =
        s.top_flange_thickness + s.web_height + 0.5 * s.bottom_flange_thickness;
    for (int g = 0; g < p.n_girders; ++g) {
        const int nh = b.node(Vec3d(0.0, girder_y[g], -depth));
        const int nr = b.node(Vec3d(p.span, girder_y[g], -depth));
        m.supports.push_back({nh, {UX, UY, UZ}, 0.0});
        m.supports.push_back({nr, {UY, UZ}, 0.0});
    }

    // two side-by-side trucks: four wheel lines at two axle positions
    const double per_patch = p.truck_total / (2.0 * p.wheel_y.size());
    for (double dx : {-0.5 * p.axle_spacing, 0.5 * p.axle_spacing})
        for (double wy : p.wheel_y) {
            PatchLoad patch;
            patch.center = Vec3d(0.5 * p.span + dx, wy, 0.0);
            patch.extent = p.wheel_print;
            patch.resultant = per_patch;
            patch.direction = -Vec3d::UnitZ();
            m.load_case.patch_loads.push_back(patch);
        }

    m.design_capacity = p.design_capacity;
    const int interior = p.n_girders / 2;
    const int control =
        b.node(Vec3d(0.5 * p.span, girder_y[interior], -depth));
    m.metadata["control_node"] = std::to_string(control);
    m.metadata["name"] = "composite multi-girder bridge";
    m.metadata["note"] =
        "girder plate sizes and material strengths are engineering approximations";
    return m;
}

// ============================================================================
// Plate girder under patch load
// ============================================================================

BridgeModel generate_plate_girder_model(const PlateGirderParams& p) {
    BridgeModel m;
    m.materials.push_back(steel_material(0, "girder_steel", p.Es, p.fy));
    const GirderSection& s = p.section;
    m.layer_stacks.push_back(steel_stack(0, s.web_thickness, 0, -0.5 * s.web_thickness));
    m.layer_stacks.push_back(steel_stack(1, s.top_flange_thickness, 0,
                                         -s.top_flange_thickness));
    m.layer_stacks.push_back(
        steel_stack(2, s.bottom_flange_thickness, 0, -0.5 * s.bottom_flange_thickness));
    m.layer_stacks.push_back(
        steel_stack(3, s.stiffener_thickness, 0, -0.5 * s.stiffener_thickness));

    MeshBuilder b(m);
    const auto xs = linspace(0.0, p.span, p.n_span);
    build_girder(b, xs, 0.0, s, GirderStacks{0, 1, 2, 3}, p.n_web, "girder0", p.span, true);

    const double depth =
        s.top_flange_thickness + s.web_height + 0.5 * s.bottom_flange_thickness;
    const int nh = b.node(Vec3d(0.0, 0.0, -depth));
    const int nr = b.node(Vec3d(p.span, 0.0, -depth));
    m.supports.push_back({nh, {UX, UY, UZ}, 0.0});
    m.supports.push_back({nr, {UY, UZ}, 0.0});
    // hold the top flange laterally at the supports (fork bearings)
    m.supports.push_back({b.node(Vec3d(0.0, 0.0, 0.0)), {UY}, 0.0});
    m.supports.push_back({b.node(Vec3d(p.span, 0.0, 0.0)), {UY}, 0.0});

    PatchLoad patch;
    patch.center = Vec3d(0.5 * p.span, 0.0, 0.0);
    patch.extent = Vec2(p.patch_length, s.top_flange_width);
    patch.resultant = p.load_total;
    patch.direction = -Vec3d::UnitZ();
    m.load_case.patch_loads.push_back(patch);

    m.design_capacity = p.design_capacity;
    m.metadata["control_node"] = std::to_string(b.node(Vec3d(0.5 * p.span, 0.0, 0.0)));
    m.metadata["name"] = "plate girder under top-flange patch load";
    return m;
}

// ============================================================================
// Beam-end bearing stub
// ============================================================================

BridgeModel generate_beam_end_model(const BeamEndParams& p) {
    BridgeModel m;
    m.materials.push_back(steel_material(0, "beam_steel", p.Es, p.fy));

    GirderSection s;
    s.web_height = p.depth - 2.0 * p.flange_thickness;
    s.web_thickness = p.web_thickness;
    s.top_flange_width = p.flange_width;
    s.top_flange_thickness = p.flange_thickness;
    s.bottom_flange_width = p.flange_width;
    s.bottom_flange_thickness = p.flange_thickness;

    m.layer_stacks.push_back(steel_stack(0, s.web_thickness, 0, -0.5 * s.web_thickness));
    m.layer_stacks.push_back(steel_stack(1, s.top_flange_thickness, 0,
                                         -s.top_flange_thickness));
    m.layer_stacks.push_back(
        steel_stack(2, s.bottom_flange_thickness, 0, -0.5 * s.bottom_flange_thickness));

    MeshBuilder b(m);
    const auto xs = linspace(0.0, p.length, p.n_len);
    const double depth = s.top_flange_thickness + s.web_height + 0.5 * s.bottom_flange_thickness;

    // web rows with an exact boundary at the damage band height
    std::vector<double> zs;
    {
        const double z_dmg = -depth + p.damage_height;
        auto upper = linspace(0.0, z_dmg, std::max(2, p.n_web - 1));
        zs = upper;
        zs.push_back(-depth);
    }
    // web: elements below the band carry the damage tag
    for (size_t j = 0; j + 1 < zs.size(); ++j)
        for (size_t i = 0; i + 1 < xs.size(); ++i) {
            std::set<std::string> tags = {"girder", "girder0", "girder.web", "girder0.web"};
            if (j + 2 == zs.size()) tags.insert("end_region.web_damage");
            const int n0 = b.node(Vec3d(xs[i], 0, zs[j]));
            const int n1 = b.node(Vec3d(xs[i + 1], 0, zs[j]));
            const int n2 = b.node(Vec3d(xs[i + 1], 0, zs[j + 1]));
            const int n3 = b.node(Vec3d(xs[i], 0, zs[j + 1]));
            b.quad(n0, n1, n2, n3, 0, tags);
        }

    for (int side : {-1, 1}) {
        const std::vector<double> ys_top = {0.0, side * 0.5 * p.flange_width};
        b.grid(xs, ys_top, 1, {"girder", "girder0", "girder.top_flange", "girder0.top_flange"},
               [&](double x, double y) { return Vec3d(x, y, 0.0); });
        // bottom flange: damage band beside the web, then the outer strip
        const std::vector<double> ys_bot = {0.0, side * p.damage_flange_width,
                                            side * 0.5 * p.flange_width};
        for (size_t k = 0; k + 1 < ys_bot.size(); ++k) {
            std::set<std::string> tags = {"girder", "girder0", "girder.bottom_flange",
                                          "girder0.bottom_flange"};
            if (k == 0) tags.insert("end_region.flange_damage");
            const std::vector<double> pairy = {ys_bot[k], ys_bot[k + 1]};
            b.grid(xs, pairy, 2, tags,
                   [&](double x, double y) { return Vec3d(x, y, -depth); });
        }
    }

    // bearing: bottom flange fully restrained
    for (const auto& nd : m.nodes)
        if (std::abs(nd.position[2] + depth) < 1e-9)
            m.supports.push_back({nd.id, {UX, UY, UZ}, 0.0});
    // loading plate holds the top flange laterally
    for (const auto& nd : m.nodes)
        if (std::abs(nd.position[2]) < 1e-9 && std::abs(nd.position[1]) < 1e-9)
            m.supports.push_back({nd.id, {UY}, 0.0});

    PatchLoad patch;
    patch.center = Vec3d(0.5 * p.length, 0.0, 0.0);
    patch.extent = Vec2(p.length, p.flange_width);
    patch.resultant = p.load_total;
    patch.direction = -Vec3d::UnitZ();
    m.load_case.patch_loads.push_back(patch);

    m.design_capacity = p.design_capacity;
    m.metadata["control_node"] = std::to_string(b.node(Vec3d(0.5 * p.length, 0.0, 0.0)));
    m.metadata["name"] = "wide-flange beam end bearing stub";
    return m;
}

}  // namespace girderlab
