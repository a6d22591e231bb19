#pragma once

#include "metro/control.hpp"
#include "metro/topology.hpp"

#include <deque>
#include <iosfwd>
#include <optional>
#include <vector>

namespace metro {

// Which constraint fixed a departure.
enum class Binding : unsigned char {
    Initial,   // initially present train, ready before any safety constraint
    Forward,   // arrival (run) plus dwell
    Backward,  // safe separation behind the train ahead, inside a part
    Junction,  // safe separation across the convergence or divergence
};

// The k-th departure (k >= 1) from a segment.
struct CountRef {
    int segment = -1;
    long count = 0;
};

struct DepartureRecord {
    double arrival = 0.0;
    double departure = 0.0;
    double schedule = 0.0;
    Binding binding = Binding::Initial;
    CountRef source;  // constraint that achieved the max; segment -1 for Initial
    double hold = 0.0;  // time held by safe separation after being ready
};

// Departures per segment, index k-1 holds the k-th departure. Central
// segments see two departures per alternation period, branch segments one.
struct DepartureTable {
    std::vector<Part> parts;
    std::vector<std::vector<DepartureRecord>> rows;
    long periods = 0;

    bool empty() const;
    long counts(int segment) const { return static_cast<long>(rows[static_cast<std::size_t>(segment)].size()); }
    const DepartureRecord& at(int segment, long k) const;
    double departure(int segment, long k) const { return at(segment, k).departure; }
};

// Departure counts of the segment per alternation period.
int counts_per_period(const LineTopology& topology, int segment);

// Index arithmetic of the k-indexed recursion, derived from the initial
// occupancy and the alternation at the junction.
class CountIndexing {
public:
    CountIndexing(const LineTopology& topology, const TrainConfiguration& config);

    // Departure of the upstream segment that delivers the train making the
    // k-th departure from `segment`; nullopt for an initially present train.
    std::optional<CountRef> upstream(int segment, long k) const;
    // Departure from the downstream segment that must precede the k-th
    // departure from `segment` by the safe separation; nullopt if none.
    std::optional<CountRef> downstream(int segment, long k) const;

    bool occupied(int segment) const { return occupied_[static_cast<std::size_t>(segment)]; }
    Branch convergence_first() const { return conv_first_; }
    Branch divergence_first() const { return div_first_; }

private:
    const LineTopology* topo_;
    std::vector<bool> occupied_;
    Branch conv_first_;
    Branch div_first_;
};

// Rolling state of the k-indexed recursion. One step advances every segment
// by one alternation period.
class EngineState {
public:
    EngineState(LineTopology topology, TrainConfiguration config, ControlParams controls,
                int window_periods = 4);

    const LineTopology& topology() const { return topology_; }
    const TrainConfiguration& configuration() const { return config_; }
    const ControlParams& controls() const { return controls_; }
    long period() const { return period_; }
    int window_periods() const { return window_; }

    // Throws WindowTooShort when k has left the window.
    const DepartureRecord& record(int segment, long k) const;
    bool has(int segment, long k) const;
    long computed(int segment) const;  // highest count computed so far

    // Junction parity: branch the next converging (diverging) train belongs to.
    Branch next_converging() const;
    Branch next_diverging() const;

    // Advances one period in place; returns the number of records added.
    void advance();

private:
    struct History {
        long base = 1;  // count of front()
        std::deque<DepartureRecord> recent;
    };

    DepartureRecord evaluate(int segment, long k) const;
    void trim();

    LineTopology topology_;
    TrainConfiguration config_;
    ControlParams controls_;
    CountIndexing index_;
    int window_;
    long period_ = 0;
    std::vector<History> history_;
};

// Pure form of EngineState::advance.
EngineState step(EngineState state);

// Runs `periods` alternation periods of the k-indexed recursion. m = 0 gives
// an empty table. Throws DeadlockError.
DepartureTable simulate(const LineTopology& topology, const TrainConfiguration& config,
                        const ControlParams& controls, long periods);

// Independent event-queue simulation of individual trains; same output shape.
DepartureTable entity_oracle_simulate(const LineTopology& topology,
                                      const TrainConfiguration& config,
                                      const ControlParams& controls, long periods);

// CSV: segment_id,part,k,arrival_s,departure_s
void write_departures_csv(std::ostream& out, const DepartureTable& table);

}  // namespace metro
