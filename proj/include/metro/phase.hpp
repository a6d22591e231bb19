#pragma once

#include "metro/control.hpp"
#include "metro/dynamics.hpp"
#include "metro/topology.hpp"

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace metro {

struct GrowthRateEstimate {
    double h0 = 0.0;  // central headway, s
    double h1 = 0.0;  // branch 1 headway, s
    double h2 = 0.0;  // branch 2 headway, s
    double period = 0.0;  // time per alternation period, s
    double f0 = 0.0;      // central frequency, trains/s
    bool converged = false;
    double residual = 0.0;  // max deviation of per-segment period estimates, s

    double f0_per_hour() const { return f0 * 3600.0; }
};

// Per-segment time per count over the counts kept after dropping the first
// `transient_fraction`. An exactly periodic tail is measured exactly,
// otherwise by least squares. Empty table: f0 = 0, converged.
// Throws InsufficientData.
GrowthRateEstimate growth_rate(const DepartureTable& table, double transient_fraction = 0.3,
                               double tolerance = 1e-6);

// Per-segment slopes (s per count) used by growth_rate.
std::vector<double> segment_slopes(const DepartureTable& table, double transient_fraction);

// Change of the period (s) per second of run time added on every segment of
// one branch; the limiting circuit responds, a circuit with slack does not.
struct CircuitProbe {
    double branch1 = 0.0;
    double branch2 = 0.0;
};

// Constraints met walking back from the last two convergence departures along the
// chain of active constraints, restricted to the steady window.
struct BindingCensus {
    // [part][binding]: arcs whose departing segment lies in the part.
    std::array<std::array<int, 4>, 3> arcs{};
    int distinct_segments = 0;  // away from the ends of the walks
    int length = 0;
    // Mean hold at each branch tail over the steady window, s.
    double tail_hold1 = 0.0;
    double tail_hold2 = 0.0;
    std::optional<CircuitProbe> probe;  // decides the free-flow side when present

    int count(Part p, Binding b) const {
        return arcs[static_cast<std::size_t>(p)][static_cast<std::size_t>(b)];
    }
    int total(Binding b) const;
};

BindingCensus binding_census(const DepartureTable& table, const LineTopology& topology,
                             double transient_fraction = 0.3);

enum class PhaseLabel { Ia, Ib, IIa, IIb, IIIa, IIIb, IVa, IVb };

std::string_view to_string(PhaseLabel label);
std::optional<PhaseLabel> parse_phase(std::string_view text);
inline constexpr std::array<PhaseLabel, 8> kAllPhases{PhaseLabel::Ia,   PhaseLabel::Ib,  PhaseLabel::IIa,
                                                      PhaseLabel::IIb,  PhaseLabel::IIIa, PhaseLabel::IIIb,
                                                      PhaseLabel::IVa,  PhaseLabel::IVb};

struct ClassifyOptions {
    double dominance = 0.9;  // share of arcs for a constraint family to dominate
    double tie_share = 0.1;   // probes within this share of the larger one tie
    double tie_hold = 0.05;   // without a probe: tail holds within this share of the period tie
    int local_segments = 3;  // a walk on at most this many segments is a bottleneck
};

struct Classification {
    PhaseLabel label = PhaseLabel::IVa;
    bool on_boundary = false;  // both branch circuits critical
};

// Phase from the census. Suffix a marks the side where branch 2 holds the
// surplus: in free flow the branch-1 circuit limits the period (probe, else
// holds), otherwise branch-2 trains wait longer at the convergence. Ties
// between the circuits are flagged on_boundary and take the side of dm.
// Throws Unclassifiable.
Classification classify_phase(const GrowthRateEstimate& estimate, const BindingCensus& census,
                              int m, int dm, const LineTopology& topology,
                              const ClassifyOptions& options = {});

struct PhasePoint {
    int m = 0;
    int dm = 0;
    GrowthRateEstimate estimate;
    std::optional<PhaseLabel> label;
    bool on_boundary = false;
    bool deadlock = false;
    std::string error;  // per-point failure, empty on success
};

struct Polyline {
    std::vector<std::pair<double, double>> points;  // (m, dm)
    double slope = 0.0;
    double intercept = 0.0;
    std::optional<double> r_squared;
};

struct PhaseDiagram {
    std::vector<PhasePoint> points;  // ordered by m, then dm
    const PhasePoint* find(int m, int dm) const;
};

struct SweepOptions {
    long periods = 500;
    double transient_fraction = 0.3;
    int parallel = 1;
    SeedRule rule = SeedRule::EvenSpacing;
    Branch tie_branch = Branch::One;
    ClassifyOptions classify;
    double probe_run_time = 1.0;  // s added per branch segment; 0 disables probing
};

CircuitProbe probe_circuits(const LineTopology& topology, const ControlParams& controls,
                            const TrainConfiguration& config, const SweepOptions& options,
                            double base_period);

// One simulation per feasible (m, dm); infeasible pairs are left out.
PhaseDiagram sweep(const LineTopology& topology, const ControlParams& controls,
                   const std::vector<int>& m_values, const std::vector<int>& dm_values,
                   const SweepOptions& options = {});

PhasePoint analyze_point(const LineTopology& topology, const ControlParams& controls,
                         const TrainConfiguration& config, const SweepOptions& options);

struct Boundaries {
    Polyline ag;  // between Ia and Ib
    Polyline jd;  // between IIIa and IIIb
};

// Throws MissingRegion.
Boundaries extract_boundaries(const PhaseDiagram& diagram);

struct ScenarioDiff {
    std::map<std::pair<int, int>, double> frequency_delta;  // variant - base, trains/hour
    std::map<std::pair<int, int>, std::pair<PhaseLabel, PhaseLabel>> label_changes;
    std::optional<double> ag_displacement;  // max |shift| in dm over common m
    std::optional<double> jd_displacement;
    bool ag_moved = false;  // displacement >= one grid cell
    bool jd_moved = false;
};

// Throws GridMismatch.
ScenarioDiff compare_scenarios(const PhaseDiagram& base, const PhaseDiagram& variant);

// CSV: m,dm,f0_tph,h0_s,phase,converged
void write_phase_csv(std::ostream& out, const PhaseDiagram& diagram);
// CSV: name,m,dm
void write_boundaries_csv(std::ostream& out, const Boundaries& boundaries);

}  // namespace metro
