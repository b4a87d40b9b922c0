#pragma once

#include "girderlab/model.hpp"

namespace girderlab {

// Parametric benchmark geometries. Plate sizes and material strengths that the
// source test reports do not publish are reasonable engineering defaults and
// stay configurable through these structs and the model files.

struct SlabParams {
    double side = 0.9144;        // full slab side
    double thickness = 0.0445;
    double rebar_ratio = 0.0085;
    double rebar_depth = 0.0333;  // mesh depth below the top surface
    int mesh_n = 8;               // elements per quarter-slab side
    double total_load = 60e3;     // reference pattern total (full slab)
    double design_capacity = 13.3e3;
    double Ec = 28.6e9, nu_c = 0.15, f_c = 37.9e6, f_t = 3.2e6;
    double Es = 200e9, fy = 345e6;
};

/// Quarter-symmetric corner-supported two-way slab with a central point load.
BridgeModel generate_slab_model(const SlabParams& p = {});

struct GirderSection {
    double web_height = 1.32;
    double web_thickness = 0.010;
    double top_flange_width = 0.30;
    double top_flange_thickness = 0.020;
    double bottom_flange_width = 0.40;
    double bottom_flange_thickness = 0.025;
    double stiffener_width = 0.15;
    double stiffener_thickness = 0.012;
};

struct BridgeParams {
    double span = 21.34;
    double width = 7.92;
    double deck_thickness = 0.1905;
    double girder_spacing = 3.05;
    int n_girders = 3;
    GirderSection section;
    // mesh densities
    int n_span = 20;
    int n_web = 4;
    int n_deck_bay = 3;
    int n_overhang = 1;
    // deck reinforcement: two mats, mesh ratio each way
    double rebar_ratio = 0.006;
    double cover_bottom = 0.04;
    double cover_top = 0.05;
    // materials
    double Ec = 26e9, nu_c = 0.18, f_c = 31e6, f_t = 2.75e6;
    double Es = 200e9, fy = 345e6, fy_rebar = 414e6;
    // loading: two side-by-side trucks, heavy axles about midspan
    double truck_total = 1.0e6;    // reference pattern resultant
    double axle_spacing = 4.27;
    std::vector<double> wheel_y = {-2.44, -0.61, 0.61, 2.44};
    Vec2 wheel_print = Vec2(0.2, 0.5);  // (along span, transverse)
    double design_capacity = 1.806e6;
};

/// Composite multi-girder bridge: layered deck on plate-girder assemblies,
/// full composite action through shared interface nodes with eccentric
/// layer stacks.
BridgeModel generate_bridge_model(const BridgeParams& p = {});

struct PlateGirderParams {
    double span = 2.0;
    GirderSection section{1.0, 0.006, 0.25, 0.015, 0.25, 0.015, 0.12, 0.012};
    int n_span = 16;
    int n_web = 8;
    double patch_length = 0.25;
    double load_total = 1.0e6;
    double Es = 210e9, fy = 350e6;
    double design_capacity = 0.3e6;
};

/// Simply supported plate girder under a top-flange patch load at midspan.
BridgeModel generate_plate_girder_model(const PlateGirderParams& p = {});

struct BeamEndParams {
    double length = 0.61;
    double depth = 0.476;          // section depth
    double flange_width = 0.284;
    double flange_thickness = 0.0239;
    double web_thickness = 0.015;
    int n_len = 8;
    int n_web = 8;
    double damage_height = 0.0381;        // lower-web band
    double damage_flange_width = 0.0381;  // bottom-flange band beside the web
    double load_total = 1.0e6;
    double Es = 200e9, fy = 345e6;
    double design_capacity = 0.5e6;
};

/// Bearing-region stub of a wide-flange beam: bottom flange fully restrained,
/// uniform load through the top flange, top flange held laterally.
BridgeModel generate_beam_end_model(const BeamEndParams& p = {});

}  // namespace girderlab
