#include "metro/dynamics.hpp"
#include "metro/error.hpp"
#include "metro/maxplus.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace metro {

namespace {

// Reference period, large enough that every count it reaches is >= 1.
constexpr long kPeriod = 8;

struct Arc {
    int from;
    int to;
    double weight;
    int delay;  // periods between the two departures, 0 or 1
};

}  // namespace

AssembledSystem assemble_system(const LineTopology& topology, const TrainConfiguration& config) {
    for (const Segment& s : topology.segments())
        if (s.platform && s.platform->arrival_rate != 0.0)
            throw Error(ErrorCode::DemandNotZero,
                        std::string(to_string(s.part)) + " segment " + std::to_string(s.id) +
                            ": lambda must be 0 for the max-plus system");
    if (config.total() == 0)
        throw Error(ErrorCode::EmptySystem, "no trains on the line; the system has no cycle");

    // One state per departure within a period.
    std::vector<int> first_state;
    std::vector<StateLabel> states;
    for (int j = 0; j < topology.size(); ++j) {
        first_state.push_back(static_cast<int>(states.size()));
        for (int p = 0; p < counts_per_period(topology, j); ++p) states.push_back({j, p});
    }
    const int n = static_cast<int>(states.size());

    const CountIndexing index(topology, config);
    auto locate = [&](const CountRef& ref, int& state) {
        const int per = counts_per_period(topology, ref.segment);
        const long period = (ref.count + per - 1) / per;
        state = first_state[static_cast<std::size_t>(ref.segment)] +
                static_cast<int>(ref.count - per * (period - 1) - 1);
        const long delay = kPeriod - period;
        if (delay < 0 || delay > 1)
            throw Error(ErrorCode::InvalidParameter,
                        "recursion reaches " + std::to_string(delay) + " periods back");
        return static_cast<int>(delay);
    };

    std::vector<Arc> arcs;
    for (int s = 0; s < n; ++s) {
        const StateLabel lab = states[static_cast<std::size_t>(s)];
        const Segment& seg = topology.segment(lab.segment);
        const int per = counts_per_period(topology, lab.segment);
        const long k = per * (kPeriod - 1) + lab.phase + 1;
        if (const auto up = index.upstream(lab.segment, k)) {
            int from = 0;
            const int delay = locate(*up, from);
            const double dwell = seg.platform ? seg.platform->min_dwell : 0.0;
            arcs.push_back({from, s, seg.nominal_run_time + dwell, delay});
        }
        if (const auto down = index.downstream(lab.segment, k)) {
            int from = 0;
            const int delay = locate(*down, from);
            arcs.push_back({from, s, topology.segment(down->segment).safe_separation_time, delay});
        }
    }

    // Order the same-period arcs; a cycle among them is a circular wait.
    std::vector<std::vector<std::pair<int, double>>> same(static_cast<std::size_t>(n));
    std::vector<int> indegree(static_cast<std::size_t>(n), 0);
    for (const Arc& a : arcs)
        if (a.delay == 0) {
            same[static_cast<std::size_t>(a.from)].emplace_back(a.to, a.weight);
            ++indegree[static_cast<std::size_t>(a.to)];
        }
    std::vector<int> order;
    for (int s = 0; s < n; ++s)
        if (indegree[static_cast<std::size_t>(s)] == 0) order.push_back(s);
    for (std::size_t i = 0; i < order.size(); ++i)
        for (const auto& [to, w] : same[static_cast<std::size_t>(order[i])])
            if (--indegree[static_cast<std::size_t>(to)] == 0) order.push_back(to);
    if (static_cast<int>(order.size()) < n) {
        std::vector<int> cycle;
        for (int s = 0; s < n; ++s)
            if (indegree[static_cast<std::size_t>(s)] > 0) {
                const int seg = states[static_cast<std::size_t>(s)].segment;
                if (std::find(cycle.begin(), cycle.end(), seg) == cycle.end()) cycle.push_back(seg);
            }
        throw DeadlockError(cycle, "same-period constraints form a cycle; no train can move");
    }

    // x(K) = A0 x(K) (+) A1 x(K-1)  =>  x(K) = A0* A1 x(K-1).
    constexpr double eps = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> full(static_cast<std::size_t>(n));
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (int src = 0; src < n; ++src) {
        std::vector<double> y(static_cast<std::size_t>(n), eps);
        for (const Arc& a : arcs)
            if (a.delay == 1 && a.from == src) {
                auto& v = y[static_cast<std::size_t>(a.to)];
                v = std::max(v, a.weight);
                used[static_cast<std::size_t>(src)] = true;
            }
        for (int s : order)
            if (y[static_cast<std::size_t>(s)] != eps)
                for (const auto& [to, w] : same[static_cast<std::size_t>(s)])
                    y[static_cast<std::size_t>(to)] = std::max(y[static_cast<std::size_t>(to)],
                                                               y[static_cast<std::size_t>(s)] + w);
        full[static_cast<std::size_t>(src)] = std::move(y);
    }

    // Only states read by the next period carry the dynamics.
    std::vector<int> keep;
    std::vector<int> slot(static_cast<std::size_t>(n), -1);
    for (int s = 0; s < n; ++s)
        if (used[static_cast<std::size_t>(s)]) {
            slot[static_cast<std::size_t>(s)] = static_cast<int>(keep.size());
            keep.push_back(s);
        }
    if (keep.empty()) throw Error(ErrorCode::EmptySystem, "no constraint spans two periods");
    AssembledSystem sys;
    sys.matrix = MaxPlusMatrix(static_cast<int>(keep.size()));
    for (int src : keep)
        for (int dst : keep) {
            const double w = full[static_cast<std::size_t>(src)][static_cast<std::size_t>(dst)];
            if (w != eps) sys.matrix.set(slot[static_cast<std::size_t>(dst)], slot[static_cast<std::size_t>(src)], w);
        }
    for (int s : keep) sys.states.push_back(states[static_cast<std::size_t>(s)]);
    return sys;
}

MaxPlusMatrix assemble_matrix(const LineTopology& topology, const TrainConfiguration& config) {
    return assemble_system(topology, config).matrix;
}

}  // namespace metro
