#include "metro/dynamics.hpp"

#include "metro/error.hpp"

#include <algorithm>
#include <optional>
#include <queue>
#include <string>

namespace metro {

namespace {

struct Train {
    int segment = -1;
    Branch home = Branch::One;
    Passage passage;
    bool scheduled = false;
};

struct SegmentState {
    int occupant = -1;
    std::optional<double> last_departure;
};

struct Event {
    double time;
    long seq;
    int train;

    bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
};

class TrainSimulation {
public:
    TrainSimulation(const LineTopology& topology, const TrainConfiguration& config,
                    const ControlParams& controls, long periods)
        : topo_(topology), controls_(controls), segs_(static_cast<std::size_t>(topology.size())),
          turn_(config.first_branch) {
        table_.rows.resize(static_cast<std::size_t>(topology.size()));
        for (const Segment& s : topology.segments()) table_.parts.push_back(s.part);
        table_.periods = periods;
        for (int j = 0; j < topology.size(); ++j)
            target_.push_back(periods * counts_per_period(topology, j));

        // Trains standing in the central part are taken to have converged in
        // alternation just before the first convergence at t = 0, the one
        // nearest the convergence last.
        Branch central_home = other(config.first_branch);
        for (int j = topology.part_begin(Part::Central); j < topology.part_end(Part::Central); ++j) {
            if (!config.occupancy[static_cast<std::size_t>(j)]) continue;
            add_train(j, central_home, config.offset(j));
            central_home = other(central_home);
        }
        for (Branch b : {Branch::One, Branch::Two})
            for (int j = topology.part_begin(part_of(b)); j < topology.part_end(part_of(b)); ++j)
                if (config.occupancy[static_cast<std::size_t>(j)]) add_train(j, b, config.offset(j));
    }

    DepartureTable run() {
        if (trains_.empty()) {
            table_.periods = 0;
            return table_;
        }
        for (std::size_t i = 0; i < trains_.size(); ++i) try_depart(static_cast<int>(i));

        long budget = 16;
        for (long t : target_) budget += 8 * t;
        while (!done()) {
            if (queue_.empty() || --budget < 0) throw deadlock();
            const Event ev = queue_.top();
            queue_.pop();
            depart(ev.train, ev.time);
        }
        for (std::size_t j = 0; j < table_.rows.size(); ++j)
            table_.rows[j].resize(static_cast<std::size_t>(target_[j]));
        return table_;
    }

private:
    void add_train(int segment, Branch home, double offset) {
        Train t;
        t.segment = segment;
        t.home = home;
        t.passage = initial_passage(topo_.segment(segment), controls_, offset);
        segs_[static_cast<std::size_t>(segment)].occupant = static_cast<int>(trains_.size());
        trains_.push_back(t);
    }

    int next_segment(const Train& t) const {
        return topo_.successor(t.segment, t.home == Branch::One ? 0 : 1);
    }

    // Segment whose occupant keeps `t` from leaving, or -1.
    int blocker(const Train& t) const {
        const int next = next_segment(t);
        if (topo_.is_branch_tail(t.segment) && turn_ != t.home)
            return topo_.branch_tail(turn_);
        if (segs_[static_cast<std::size_t>(next)].occupant >= 0) return next;
        return -1;
    }

    void try_depart(int id) {
        Train& t = trains_[static_cast<std::size_t>(id)];
        if (t.scheduled || blocker(t) >= 0) return;
        const int next = next_segment(t);
        double when = t.passage.ready;
        if (const auto& last = segs_[static_cast<std::size_t>(next)].last_departure)
            when = std::max(when, *last + topo_.segment(next).safe_separation_time);
        t.scheduled = true;
        queue_.push(Event{when, seq_++, id});
    }

    void depart(int id, double time) {
        Train& t = trains_[static_cast<std::size_t>(id)];
        const int from = t.segment;
        const int next = next_segment(t);
        SegmentState& here = segs_[static_cast<std::size_t>(from)];
        table_.rows[static_cast<std::size_t>(from)].push_back(
            DepartureRecord{t.passage.arrival, time, t.passage.schedule, Binding::Forward, {},
                            time - t.passage.ready});
        here.occupant = -1;
        here.last_departure = time;
        if (topo_.is_branch_tail(from)) turn_ = other(turn_);

        SegmentState& there = segs_[static_cast<std::size_t>(next)];
        t.passage = enter_segment(topo_.segment(next), controls_, time, t.passage.schedule,
                                  there.last_departure.value_or(0.0));
        t.segment = next;
        t.scheduled = false;
        there.occupant = id;
        try_depart(id);

        // Whoever was waiting for the segment just left.
        if (from == topo_.convergence_id()) {
            wake(topo_.branch_tail(turn_));
            wake(topo_.branch_tail(other(turn_)));
        } else if (topo_.is_branch_head(from)) {
            wake(topo_.divergence_id());
        } else {
            wake(topo_.predecessor(from));
        }
    }

    void wake(int segment) {
        const int occ = segs_[static_cast<std::size_t>(segment)].occupant;
        if (occ >= 0) try_depart(occ);
    }

    bool done() const {
        for (std::size_t j = 0; j < target_.size(); ++j)
            if (static_cast<long>(table_.rows[j].size()) < target_[j]) return false;
        return true;
    }

    DeadlockError deadlock() const {
        // Follow who-waits-for-whom from the first train until a segment repeats.
        std::vector<int> seen;
        int seg = trains_.front().segment;
        while (seg >= 0 && std::find(seen.begin(), seen.end(), seg) == seen.end()) {
            seen.push_back(seg);
            const int occ = segs_[static_cast<std::size_t>(seg)].occupant;
            seg = occ >= 0 ? blocker(trains_[static_cast<std::size_t>(occ)]) : -1;
        }
        std::vector<int> cycle;
        if (seg >= 0) cycle.assign(std::find(seen.begin(), seen.end(), seg), seen.end());
        std::string where;
        for (int s : cycle) where += (where.empty() ? "" : " -> ") + std::to_string(s);
        return DeadlockError(cycle, "trains wait on each other over segments " +
                                        (where.empty() ? std::string("(none)") : where));
    }

    const LineTopology& topo_;
    const ControlParams& controls_;
    std::vector<SegmentState> segs_;
    std::vector<Train> trains_;
    std::vector<long> target_;
    Branch turn_;
    DepartureTable table_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    long seq_ = 0;
};

}  // namespace

DepartureTable entity_oracle_simulate(const LineTopology& topology,
                                      const TrainConfiguration& config,
                                      const ControlParams& controls, long periods) {
    if (periods < 1) throw Error(ErrorCode::InvalidParameter, "counts: must be >= 1");
    return TrainSimulation(topology, config, controls, periods).run();
}

}  // namespace metro
