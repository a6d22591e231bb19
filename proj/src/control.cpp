#include "metro/control.hpp"

#include "metro/error.hpp"

#include <algorithm>
#include <string>

namespace metro {

DwellOutcome dwell_time(const PlatformParams& platform, double accumulation_interval,
                        double nominal) {
    if (accumulation_interval < 0.0)
        throw Error(ErrorCode::NegativeInterval,
                    "accumulation interval " + std::to_string(accumulation_interval) + " s");
    const double demanded = platform.demand_ratio() * accumulation_interval;
    DwellOutcome out;
    out.saturated = demanded >= platform.max_dwell && platform.max_dwell > platform.min_dwell;
    out.dwell = std::clamp(demanded, platform.min_dwell, platform.max_dwell);
    out.extension = std::max(0.0, out.dwell - nominal);
    return out;
}

DwellOutcome dwell_time(const PlatformParams& platform, double accumulation_interval) {
    return dwell_time(platform, accumulation_interval, platform.min_dwell);
}

double nominal_dwell(const PlatformParams& platform, double reference_headway) {
    return std::clamp(platform.demand_ratio() * reference_headway, platform.min_dwell,
                      platform.max_dwell);
}

RunOutcome controlled_run_time(const Segment& segment, double upstream_extension) {
    RunOutcome out;
    const double extension = std::max(0.0, upstream_extension);
    out.applied = std::min(extension, segment.margin());
    out.run_time = std::max(segment.min_run_time, segment.nominal_run_time - out.applied);
    out.residual = extension - out.applied;
    return out;
}

ControlParams make_controls(const LineTopology& topology, double reference_headway,
                            bool compensation) {
    if (reference_headway < 0.0)
        throw Error(ErrorCode::InvalidParameter, "controls.reference_headway: must be >= 0");
    ControlParams c;
    c.reference_headway = reference_headway;
    c.compensation = compensation;
    for (const Segment& s : topology.segments()) {
        c.nominal_dwell.push_back(s.platform ? nominal_dwell(*s.platform, reference_headway) : 0.0);
        c.margin.push_back(s.margin());
    }
    return c;
}

namespace {

Passage stop(const Segment& segment, const ControlParams& controls, double arrival,
             double interval, double schedule) {
    Passage p{arrival, arrival, schedule};
    if (segment.platform) {
        const double nominal = controls.nominal_dwell[static_cast<std::size_t>(segment.id)];
        p.ready = arrival + dwell_time(*segment.platform, interval, nominal).dwell;
        p.schedule = arrival + nominal;
    }
    return p;
}

}  // namespace

Passage enter_segment(const Segment& segment, const ControlParams& controls,
                      double upstream_departure, double upstream_schedule,
                      double previous_departure) {
    double run = segment.nominal_run_time;
    if (controls.compensation) {
        const double late = std::max(0.0, upstream_departure - upstream_schedule);
        run = controlled_run_time(segment, late).run_time;
    }
    const double arrival = upstream_departure + run;
    return stop(segment, controls, arrival, arrival - previous_departure,
                upstream_schedule + segment.nominal_run_time);
}

Passage initial_passage(const Segment& segment, const ControlParams& controls, double offset) {
    return stop(segment, controls, offset, std::max(0.0, offset), offset);
}

}  // namespace metro
