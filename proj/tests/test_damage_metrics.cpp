#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "girderlab/damage.hpp"
#include "girderlab/generators.hpp"
#include "girderlab/metrics.hpp"

using namespace girderlab;

namespace {

ResponseHistory synthetic_history(double ultimate, double delta_y, double delta_u,
                                  int peak_at = -1) {
    ResponseHistory h;
    const int n = 20;
    for (int i = 1; i <= n; ++i) {
        const double frac = double(i) / n;
        double load;
        if (peak_at > 0)
            load = (i <= peak_at) ? ultimate * i / peak_at
                                  : ultimate * (1.0 - 0.02 * (i - peak_at));
        else
            load = ultimate * frac;
        h.steps.push_back({load, delta_u * frac, true});
    }
    h.events.push_back({EventKind::FirstYield, n / 2, ultimate / 2, delta_y, ""});
    h.events.push_back(
        {EventKind::Termination, n, h.steps.back().load, delta_u, "max steps"});
    return h;
}

}  // namespace

// ----------------------------------------------------------------------------
// performance metrics
// ----------------------------------------------------------------------------

TEST_CASE("ultimate capacity is the maximum, not the last, load") {
    auto h = synthetic_history(100.0, 0.1, 1.0, 12);
    CHECK(ultimate_capacity(h) == doctest::Approx(100.0));
    CHECK(h.steps.back().load < 100.0);
    auto mono = synthetic_history(100.0, 0.1, 1.0);
    CHECK(ultimate_capacity(mono) == 100.0);
    ResponseHistory empty;
    CHECK_THROWS(ultimate_capacity(empty));
}

TEST_CASE("reserve capacity: exact identities from the benchmark table") {
    CHECK(reserve_capacity(5235e3, 1806e3) == 3429e3);
    CHECK(reserve_capacity(4049e3, 1806e3) == 2243e3);
    CHECK(reserve_capacity(1806e3, 1806e3) == 0.0);
}

TEST_CASE("ductility: ratio of termination to first-yield displacement") {
    auto h = synthetic_history(100.0, 0.1, 0.358);
    CHECK(ductility(h) == doctest::Approx(3.58));
    auto h2 = synthetic_history(100.0, 0.25, 0.25);
    CHECK(ductility(h2) == doctest::Approx(1.0));
    // scaling invariance of the displacement axis
    auto h3 = synthetic_history(100.0, 0.3, 3.0 * 0.358);
    CHECK(ductility(h3) == doctest::Approx(ductility(synthetic_history(50.0, 0.1, 0.358))));
    ResponseHistory no_yield;
    no_yield.steps.push_back({1.0, 1.0, true});
    CHECK_THROWS(ductility(no_yield));
}

TEST_CASE("reduction: both conventions against the benchmark percentages") {
    // damaged-denominator reproduces the published reductions
    CHECK(reduction(3429, 2829, ReductionConvention::DamagedDenominator) ==
          doctest::Approx(21.2).epsilon(0.0025));
    CHECK(reduction(3429, 3023, ReductionConvention::DamagedDenominator) ==
          doctest::Approx(13.4).epsilon(0.0025));
    CHECK(reduction(3429, 2243, ReductionConvention::DamagedDenominator) ==
          doctest::Approx(52.9).epsilon(0.0025));
    // the intact-denominator alternative gives distinctly different values
    CHECK(reduction(3429, 2829, ReductionConvention::IntactDenominator) ==
          doctest::Approx(17.5).epsilon(0.01));
    CHECK(reduction(3429, 2243, ReductionConvention::IntactDenominator) ==
          doctest::Approx(34.6).epsilon(0.01));
    // identities
    CHECK(reduction(5.0, 5.0, ReductionConvention::DamagedDenominator) == 0.0);
    CHECK(reduction(5.0, 5.0, ReductionConvention::IntactDenominator) == 0.0);
    // strictly increasing as the damaged value decreases
    double prev_d = -1.0, prev_i = -1.0;
    for (double xd : {3.0, 2.5, 2.0, 1.5}) {
        const double rd = reduction(3.0, xd, ReductionConvention::DamagedDenominator);
        const double ri = reduction(3.0, xd, ReductionConvention::IntactDenominator);
        CHECK(rd > prev_d);
        CHECK(ri > prev_i);
        prev_d = rd;
        prev_i = ri;
    }
    CHECK_THROWS(reduction(-1.0, 2.0, ReductionConvention::DamagedDenominator));
}

TEST_CASE("build_report: full benchmark table recovered from synthetic histories") {
    const double D = 1806e3;
    auto intact = synthetic_history(5235e3, 0.1, 0.358);
    struct Row {
        const char* name;
        double ultimate;
        double delta_u;  // consistent with the published ductility
        double reserve;
        double red_redundancy;
        double red_ductility;
    };
    // displacement pairs chosen to reproduce the published ductility ratios
    // note: the published corrosion row prints reserve 2829 although
    // 4636 - 1806 = 2830; the exact identity governs here and the
    // percentage band absorbs the source's rounding
    const Row rows[] = {
        {"corrosion", 4636e3, 0.1 * 3.58 / 1.767, 2830e3, 21.2, 76.7},
        {"impact", 4829e3, 0.1 * 3.58 / 1.001, 3023e3, 13.4, 0.1},
        {"fire", 4049e3, 0.1 * 3.58 / 1.037, 2243e3, 52.9, 3.7},
    };
    for (const auto& row : rows) {
        auto damaged = synthetic_history(row.ultimate, 0.1, row.delta_u);
        auto rep = build_report(intact, &damaged, D, ReductionConvention::DamagedDenominator,
                                row.name);
        CHECK(rep.ultimate_capacity == row.ultimate);
        CHECK(rep.reserve_capacity == row.reserve);  // exact, R = U - D
        REQUIRE(rep.redundancy_reduction_pct.has_value());
        CHECK(std::abs(*rep.redundancy_reduction_pct - row.red_redundancy) <= 0.05);
        REQUIRE(rep.ductility_reduction_pct.has_value());
        CHECK(std::abs(*rep.ductility_reduction_pct - row.red_ductility) <= 0.15);
    }
    // intact-only report has no reduction fields
    auto solo = build_report(intact, nullptr, D);
    CHECK(!solo.redundancy_reduction_pct.has_value());
    CHECK(!solo.ductility_reduction_pct.has_value());
    CHECK(solo.reserve_capacity == 3429e3);
}

// ----------------------------------------------------------------------------
// damage operators
// ----------------------------------------------------------------------------

TEST_CASE("section loss: thickness arithmetic and volume bookkeeping") {
    BridgeParams bp;
    bp.n_span = 6;
    bp.n_web = 2;
    bp.n_deck_bay = 2;
    auto m = generate_bridge_model(bp);

    RegionSelector webs;
    webs.tags = {"girder.web"};
    const double v_region = steel_volume_in_region(m, webs);
    const double v_total = steel_volume(m);

    auto app = apply_section_loss(m, webs, 0.4);
    CHECK(app.affected_elements > 0);
    // web thickness 10 mm -> 6 mm
    for (const auto& el : app.model.elements) {
        if (!el.region_tags.count("girder.web")) continue;
        const LayerStack* st = app.model.find_stack(el.layer_stack_id);
        CHECK(st->layers[0].thickness == doctest::Approx(0.006).epsilon(1e-12));
    }
    // removed volume exact to 1e-12 relative
    CHECK(app.removed_volume == doctest::Approx(0.4 * v_region).epsilon(1e-12));
    CHECK(steel_volume(app.model) ==
          doctest::Approx(v_total - 0.4 * v_region).epsilon(1e-12));
    // purity: source untouched, reapplication identical
    CHECK(models_identical(m, generate_bridge_model(bp)));
    auto app2 = apply_section_loss(m, webs, 0.4);
    CHECK(models_identical(app.model, app2.model));
}

TEST_CASE("section loss rejects concrete-only regions and bad fractions") {
    SlabParams sp;
    sp.mesh_n = 2;
    auto m = generate_slab_model(sp);
    RegionSelector deck;
    deck.tags = {"deck"};
    // the slab stack carries a rebar mesh, so pick only the concrete: use a
    // model stripped of rebar layers
    for (auto& st : m.layer_stacks)
        st.layers.erase(std::remove_if(st.layers.begin(), st.layers.end(),
                                       [](const Layer& l) {
                                           return l.kind == LayerKind::SmearedRebar;
                                       }),
                        st.layers.end());
    CHECK_THROWS(apply_section_loss(m, deck, 0.4));
    auto bridge = generate_bridge_model();
    RegionSelector webs;
    webs.tags = {"girder.web"};
    CHECK_THROWS(apply_section_loss(bridge, webs, 1.4));
}

TEST_CASE("stiffness reduction: E scaling, locality, identity at zero") {
    BridgeParams bp;
    bp.n_span = 6;
    bp.n_web = 2;
    bp.n_deck_bay = 2;
    auto m = generate_bridge_model(bp);
    RegionSelector mid;
    mid.tags = {"girder"};
    mid.box_min = Vec3d(0.4 * bp.span, -100, -100);
    mid.box_max = Vec3d(0.6 * bp.span, 100, 100);

    auto app = apply_stiffness_reduction(m, mid, 0.25);
    CHECK(app.affected_elements > 0);
    int softened = 0;
    for (size_t e = 0; e < app.model.elements.size(); ++e) {
        const auto& el = app.model.elements[e];
        const LayerStack* st = app.model.find_stack(el.layer_stack_id);
        const Material* mat = app.model.find_material(st->layers[0].material_id);
        const bool in_region = mid.matches(app.model, el);
        if (in_region && el.region_tags.count("girder")) {
            CHECK(mat->steel.E == doctest::Approx(0.75 * 200e9).epsilon(1e-12));
            // strengths untouched
            CHECK(mat->steel.yield_stress == 345e6);
            ++softened;
        }
    }
    CHECK(softened > 0);
    // elements outside the region still reference the original materials
    for (size_t e = 0; e < app.model.elements.size(); ++e) {
        const auto& el = app.model.elements[e];
        if (!mid.matches(app.model, el) && el.region_tags.count("girder")) {
            const LayerStack* st = app.model.find_stack(el.layer_stack_id);
            CHECK(app.model.find_material(st->layers[0].material_id)->steel.E == 200e9);
        }
    }

    auto id_app = apply_stiffness_reduction(m, mid, 0.0);
    CHECK(models_identical(id_app.model, m));
    CHECK_THROWS(apply_stiffness_reduction(m, mid, 1.0));
}

TEST_CASE("half-sine imperfection: profile and exact amplitude scaling") {
    BridgeParams bp;
    bp.n_span = 8;
    bp.n_web = 2;
    bp.n_deck_bay = 2;
    auto m = generate_bridge_model(bp);
    DamageOperator op;
    op.kind = DamageKind::GeometricImperfection;
    op.shape = ImperfectionShape::HalfSine;
    op.region.tags = {"girder2"};
    op.direction = Vec3d::UnitY();
    op.amplitude = bp.span / 500.0;

    auto app = apply_geometric_imperfection(m, op);
    double max_off = 0.0;
    for (const auto& nd : app.model.nodes) max_off = std::max(max_off, nd.imperfection_offset.norm());
    CHECK(max_off == doctest::Approx(op.amplitude).epsilon(1e-9));
    // ends of the swept girder stay in place
    for (const auto& nd : app.model.nodes)
        if (std::abs(nd.position[0]) < 1e-9 || std::abs(nd.position[0] - bp.span) < 1e-9)
            CHECK(nd.imperfection_offset.norm() <= 1e-12);

    DamageOperator op2 = op;
    op2.amplitude = 2.0 * op.amplitude;
    auto app2 = apply_geometric_imperfection(m, op2);
    for (size_t n = 0; n < m.nodes.size(); ++n)
        CHECK((app2.model.nodes[n].imperfection_offset -
               2.0 * app.model.nodes[n].imperfection_offset)
                  .norm() <= 1e-15);
}

TEST_CASE("buckling-mode imperfection seeds the requested amplitude") {
    PlateGirderParams p;
    p.n_span = 10;
    p.n_web = 4;
    auto m = generate_plate_girder_model(p);
    DamageOperator op;
    op.kind = DamageKind::GeometricImperfection;
    op.shape = ImperfectionShape::BucklingMode;
    op.mode_index = 1;
    op.amplitude = p.section.web_thickness / 2.0;
    auto app = apply_geometric_imperfection(m, op);
    double max_off = 0.0;
    for (const auto& nd : app.model.nodes)
        for (int k = 0; k < 3; ++k)
            max_off = std::max(max_off, std::abs(nd.imperfection_offset[k]));
    CHECK(max_off == doctest::Approx(op.amplitude).epsilon(1e-9));
    CHECK(validate_model(app.model).empty());
}

TEST_CASE("scenario operators commute on overlaps") {
    BridgeParams bp;
    bp.n_span = 6;
    bp.n_web = 2;
    bp.n_deck_bay = 2;
    auto m = generate_bridge_model(bp);
    DamageScenario sc;
    DamageOperator a;
    a.kind = DamageKind::SectionLoss;
    a.region.tags = {"girder.web"};
    a.fraction = 0.4;
    DamageOperator b;
    b.kind = DamageKind::SectionLoss;
    b.region.tags = {"girder0.web"};
    b.fraction = 0.2;
    DamageOperator c;
    c.kind = DamageKind::StiffnessReduction;
    c.region.tags = {"girder.web"};
    c.fraction = 0.25;
    sc.operators = {a, b, c};
    CHECK(check_commutation(m, sc).empty());
    // compounding is multiplicative on the overlap
    auto app = apply_scenario(m, sc);
    for (const auto& el : app.model.elements) {
        if (!el.region_tags.count("girder0.web")) continue;
        const LayerStack* st = app.model.find_stack(el.layer_stack_id);
        CHECK(st->layers[0].thickness == doctest::Approx(0.010 * 0.6 * 0.8).epsilon(1e-12));
    }
}
