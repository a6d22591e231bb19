#pragma once

#include "metro/topology.hpp"

#include <vector>

namespace metro {

struct DwellOutcome {
    double dwell = 0.0;
    double extension = 0.0;  // dwell beyond the nominal dwell, >= 0
    bool saturated = false;  // max_dwell was the active bound
};

// Demand-dependent dwell: passengers accumulated over `accumulation_interval`
// at rate lambda are exchanged at rate alpha, clamped to [min_dwell, max_dwell].
// Throws NegativeInterval.
DwellOutcome dwell_time(const PlatformParams& platform, double accumulation_interval,
                        double nominal_dwell);
DwellOutcome dwell_time(const PlatformParams& platform, double accumulation_interval);

// Steady dwell at the reference headway.
double nominal_dwell(const PlatformParams& platform, double reference_headway);

struct RunOutcome {
    double run_time = 0.0;
    double applied = 0.0;   // nominal_run_time - run_time
    double residual = 0.0;  // extension left for the next segment
};

// Shortens the run by as much of the upstream extension as the segment's
// margin allows.
RunOutcome controlled_run_time(const Segment& segment, double upstream_extension);

struct ControlParams {
    double reference_headway = 0.0;
    bool compensation = true;
    std::vector<double> nominal_dwell;  // per segment, 0 without a platform
    std::vector<double> margin;         // per segment
};

ControlParams make_controls(const LineTopology& topology, double reference_headway,
                            bool compensation = true);

// Position of one train in one segment. `schedule` is the departure the train
// would make from the segment if it had kept the nominal dwell and run times
// since its last platform; departing later than that is the extension the
// run-time control works off downstream.
struct Passage {
    double arrival = 0.0;
    double ready = 0.0;
    double schedule = 0.0;
};

// Train entering `segment` after departing its upstream segment at
// `upstream_departure` with the given schedule. `previous_departure` is the
// last departure from `segment` (0 when there was none).
Passage enter_segment(const Segment& segment, const ControlParams& controls,
                      double upstream_departure, double upstream_schedule,
                      double previous_departure);

// Train initially standing at the head of `segment` at time `offset`.
Passage initial_passage(const Segment& segment, const ControlParams& controls, double offset);

}  // namespace metro
