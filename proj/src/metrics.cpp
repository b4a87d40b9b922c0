#include "girderlab/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace girderlab {

std::string convention_name(ReductionConvention c) {
    return c == ReductionConvention::IntactDenominator ? "intact" : "damaged";
}

double ultimate_capacity(const ResponseHistory& history) {
    if (history.steps.empty()) throw std::invalid_argument("ultimate_capacity: empty history");
    double u = history.steps.front().load;
    for (const auto& s : history.steps) u = std::max(u, s.load);
    return u;
}

double reserve_capacity(double ultimate, double design) { return ultimate - design; }

double ductility(const ResponseHistory& history) {
    const BehavioralEvent* yield = history.find(EventKind::FirstYield);
    if (!yield) throw std::invalid_argument("ductility: no first-yield event in history");
    if (history.steps.empty()) throw std::invalid_argument("ductility: empty history");
    const double delta_u = history.steps.back().displacement;
    return delta_u / yield->displacement;
}

double reduction(double intact_value, double damaged_value, ReductionConvention convention) {
    if (!(intact_value > 0.0) || !(damaged_value > 0.0))
        throw std::invalid_argument("reduction: values must be positive");
    const double den =
        convention == ReductionConvention::IntactDenominator ? intact_value : damaged_value;
    return 100.0 * (intact_value - damaged_value) / den;
}

namespace {

StageBoundaries stage_boundaries(const ResponseHistory& h) {
    StageBoundaries st;
    if (const auto* e = h.find(EventKind::FirstCrack)) st.elastic_end = e->load;
    if (const auto* e = h.find(EventKind::FirstYield)) st.cracking_end = e->load;
    if (const auto* e = h.find(EventKind::PlasticHinge)) st.yielding_end = e->load;
    if (!h.steps.empty()) st.failure = h.steps.back().load;
    return st;
}

}  // namespace

PerformanceReport build_report(const ResponseHistory& intact, const ResponseHistory* damaged,
                               double design_capacity, ReductionConvention convention,
                               const std::string& scenario_name) {
    const ResponseHistory& subject = damaged ? *damaged : intact;
    PerformanceReport r;
    r.scenario = damaged ? scenario_name : "intact";
    r.design_capacity = design_capacity;
    r.ultimate_capacity = ultimate_capacity(subject);
    r.reserve_capacity = reserve_capacity(r.ultimate_capacity, design_capacity);
    r.convention = convention;
    r.stages = stage_boundaries(subject);
    r.termination_detail = subject.termination_detail;
    if (!subject.steps.empty()) r.delta_u = subject.steps.back().displacement;
    if (const auto* e = subject.find(EventKind::FirstYield)) {
        r.delta_y = e->displacement;
        r.ductility = ductility(subject);
    }

    if (damaged) {
        const double Ui = ultimate_capacity(intact);
        const double Ri = reserve_capacity(Ui, design_capacity);
        r.redundancy_reduction_pct = reduction(Ri, r.reserve_capacity, convention);
        if (intact.find(EventKind::FirstYield) && damaged->find(EventKind::FirstYield))
            r.ductility_reduction_pct =
                reduction(ductility(intact), r.ductility, convention);
    }
    return r;
}

}  // namespace girderlab
