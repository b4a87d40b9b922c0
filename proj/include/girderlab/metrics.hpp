#pragma once

#include <optional>
#include <string>

#include "girderlab/driver.hpp"

namespace girderlab {

/// Denominator convention for damage-induced reduction percentages.
enum class ReductionConvention { IntactDenominator, DamagedDenominator };

std::string convention_name(ReductionConvention c);

struct StageBoundaries {
    // loads at the ends of the behavioral stages, newtons (0 when the
    // transition never occurred)
    double elastic_end = 0.0;        // first cracking
    double cracking_end = 0.0;       // first yield
    double yielding_end = 0.0;       // plastic hinge
    double failure = 0.0;            // termination
};

struct PerformanceReport {
    std::string scenario = "intact";
    double design_capacity = 0.0;    // D
    double ultimate_capacity = 0.0;  // U
    double reserve_capacity = 0.0;   // R = U - D, exact
    double delta_u = 0.0;            // control displacement at termination
    double delta_y = 0.0;            // control displacement at first yield
    double ductility = 0.0;          // delta_u / delta_y
    // present only for damaged scenarios compared against an intact run
    std::optional<double> redundancy_reduction_pct;
    std::optional<double> ductility_reduction_pct;
    ReductionConvention convention = ReductionConvention::DamagedDenominator;
    StageBoundaries stages;
    std::string termination_detail;
};

/// Max load over the committed steps.
double ultimate_capacity(const ResponseHistory& history);

/// R = U - D (exact identity, no tolerance).
double reserve_capacity(double ultimate, double design);

/// Delta_u at termination over delta_y at first yield; throws without a
/// first-yield event.
double ductility(const ResponseHistory& history);

/// Reduction percentage of a damaged value against the intact one.
///   intact denominator:  100 (Xi - Xd) / Xi
///   damaged denominator: 100 (Xi - Xd) / Xd
double reduction(double intact_value, double damaged_value, ReductionConvention convention);

/// Assembles the report; `damaged` may be null for an intact-only report.
PerformanceReport build_report(const ResponseHistory& intact, const ResponseHistory* damaged,
                               double design_capacity,
                               ReductionConvention convention = ReductionConvention::DamagedDenominator,
                               const std::string& scenario_name = "intact");

}  // namespace girderlab
