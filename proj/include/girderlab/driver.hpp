#pragma once

#include <string>
#include <vector>

#include "girderlab/model.hpp"
#include "girderlab/solver.hpp"

namespace girderlab {

/// Displacement-controlled continuation settings. The control displacement is
/// prescribed at one dof and the load factor on the model load pattern is
/// recovered as the extra unknown (bordered Newton).
struct ControlSpec {
    int control_node = -1;  // -1: take "control_node" from model metadata
    int control_dof = UZ;
    double direction = -1.0;  // sign of the prescribed motion
    double step = 0.003;      // meters per step
    int max_steps = 150;
    double residual_tol = 1e-6;
    double disp_tol = 1e-8;
    int max_newton_iter = 25;
    double min_step_factor = 1.0 / 64.0;
    double peak_drop_fraction = 0.8;     // stop once load falls below this of peak
    double plastic_hinge_fraction = 0.9; // through-thickness plastification threshold
};

enum class EventKind {
    FirstCrack,
    FirstYield,
    PlasticHinge,
    PeakLoad,
    PunchingShearOnset,
    Termination
};

std::string event_kind_name(EventKind k);

struct BehavioralEvent {
    EventKind kind;
    int step = 0;            // committed step index (1-based)
    double load = 0.0;       // newtons
    double displacement = 0.0;
    std::string location;
};

enum class TerminationCause { MaxSteps, PeakDrop, Nonconvergence };

struct ResponseStep {
    double load = 0.0;          // total applied load, newtons
    double displacement = 0.0;  // control displacement, meters
    bool converged = true;
};

struct ResponseHistory {
    std::vector<ResponseStep> steps;  // committed steps, displacement increasing
    std::vector<BehavioralEvent> events;
    TerminationCause termination = TerminationCause::MaxSteps;
    std::string termination_detail;

    const BehavioralEvent* find(EventKind k) const {
        for (const auto& e : events)
            if (e.kind == k) return &e;
        return nullptr;
    }
};

/// Scans committed material states for behavioral transitions. One detector
/// instance accompanies one analysis run; events fire at most once.
class EventDetector {
public:
    EventDetector(const BridgeModel& model, const ElementSystem& esys, double hinge_fraction);

    /// Events newly detected at this committed step.
    std::vector<BehavioralEvent> scan(int step, double load, double displacement,
                                      const std::vector<PointState>& states);

    double peak_load() const { return peak_load_; }
    int peak_step() const { return peak_step_; }

private:
    struct Station {
        std::string label;
        std::vector<int> state_indices;  // steel thickness points at one girder x-column
    };
    struct PunchingCheck {
        double capacity = 0.0;
        double share = 0.0;  // patch resultant at unit load factor
        std::string label;
    };
    const BridgeModel* model_;
    const ElementSystem* esys_;
    double hinge_fraction_;
    std::vector<int> concrete_states_;
    std::vector<std::pair<int, std::string>> steel_states_;  // (state index, location)
    std::vector<std::pair<int, std::string>> rebar_states_;
    bool steel_prefers_girders_ = false;
    std::vector<Station> stations_;
    std::vector<PunchingCheck> punching_;
    double total_pattern_ = 0.0;

    bool fired_[6] = {false, false, false, false, false, false};
    double peak_load_ = 0.0;
    int peak_step_ = 0;
    double peak_disp_ = 0.0;
};

struct RunOptions {
    /// Verify equilibrium of each committed step (testing aid).
    bool check_equilibrium = false;
    /// Per-attempt diagnostics to stderr.
    bool trace = false;
};

/// Displacement-controlled Newton-Raphson pushover of the given (possibly
/// damaged) model. Throws on first-step non-convergence (modeling error);
/// mid-path divergence is recorded as a termination event.
ResponseHistory run_analysis(const BridgeModel& model, const ControlSpec& control,
                             const RunOptions& options = {});

}  // namespace girderlab
