#pragma once

#include "metro/control.hpp"
#include "metro/dynamics.hpp"
#include "metro/maxplus.hpp"
#include "metro/topology.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace testing {

inline metro::SegmentSpec plain(double run = 60, double min_run = 45, double sep = 30) {
    metro::SegmentSpec s;
    s.run_time = run;
    s.min_run_time = min_run;
    s.safe_separation = sep;
    return s;
}

inline metro::SegmentSpec station(double lambda, double min_dwell = 20, double max_dwell = 60) {
    metro::SegmentSpec s = plain();
    s.platform = metro::PlatformParams{lambda, 1.0, min_dwell, max_dwell};
    return s;
}

// Desk instance: 4 central segments per direction with platforms on the
// 2nd and 3rd of each direction, 2 segments per branch with one platform.
inline metro::LineDescription t9_description(double lambda = 0.0) {
    metro::LineDescription d;
    for (int i = 0; i < 8; ++i) {
        const bool platform = i == 1 || i == 2 || i == 5 || i == 6;
        d.central.push_back(platform ? station(lambda) : plain());
    }
    d.branch1 = {station(lambda), plain()};
    d.branch2 = {station(lambda), plain()};
    return d;
}

inline metro::LineTopology t9(double lambda = 0.0) { return metro::build_line(t9_description(lambda)); }

// Random line with at most 16 segments and a random feasible occupancy.
struct RandomInstance {
    metro::LineTopology topology;
    metro::TrainConfiguration config;
};

inline RandomInstance random_instance(std::mt19937& rng, bool demand) {
    std::uniform_int_distribution<int> central_n(2, 8), branch_n(1, 4);
    std::uniform_real_distribution<double> run(20, 90), frac(0.5, 1.0), sep(5, 40), dwell(5, 30),
        ratio(0.02, 0.3);
    std::bernoulli_distribution coin(0.5);

    metro::LineDescription d;
    for (metro::Part p : {metro::Part::Central, metro::Part::Branch1, metro::Part::Branch2}) {
        const int n = p == metro::Part::Central ? central_n(rng) : branch_n(rng);
        std::uniform_int_distribution<int> pick(0, n - 1);
        const int forced = pick(rng);
        for (int i = 0; i < n; ++i) {
            metro::SegmentSpec s;
            s.run_time = std::round(run(rng));
            s.min_run_time = std::round(s.run_time * frac(rng));
            s.safe_separation = std::round(sep(rng));
            if (i == forced || coin(rng)) {
                const double lo = std::round(dwell(rng));
                s.platform = metro::PlatformParams{demand ? ratio(rng) : 0.0, 1.0, lo, lo + std::round(dwell(rng))};
            }
            d.part(p).push_back(s);
        }
    }
    metro::LineTopology topo = metro::build_line(d);
    std::vector<bool> occ(static_cast<std::size_t>(topo.size()));
    std::uniform_int_distribution<int> m_dist(1, topo.size() - 1);
    const int m = m_dist(rng);
    for (int placed = 0; placed < m;) {
        std::uniform_int_distribution<int> at(0, topo.size() - 1);
        const auto j = static_cast<std::size_t>(at(rng));
        if (!occ[j]) {
            occ[j] = true;
            ++placed;
        }
    }
    metro::TrainConfiguration cfg =
        metro::make_configuration(topo, occ, coin(rng) ? metro::Branch::One : metro::Branch::Two);
    return {std::move(topo), std::move(cfg)};
}

// Random strongly connected matrix: a Hamiltonian cycle plus random arcs.
inline metro::MaxPlusMatrix random_strongly_connected(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> w(-50.0, 100.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    metro::MaxPlusMatrix a(n);
    for (int i = 0; i < n; ++i)
        a.set(order[static_cast<std::size_t>((i + 1) % n)], order[static_cast<std::size_t>(i)], w(rng));
    const double density = 3.0 / n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (u(rng) < density) a.accumulate(i, j, w(rng));
    return a;
}

inline bool tables_equal(const metro::DepartureTable& a, const metro::DepartureTable& b, double tol = 0.0) {
    if (a.rows.size() != b.rows.size()) return false;
    for (std::size_t j = 0; j < a.rows.size(); ++j) {
        if (a.rows[j].size() != b.rows[j].size()) return false;
        for (std::size_t i = 0; i < a.rows[j].size(); ++i) {
            if (std::abs(a.rows[j][i].departure - b.rows[j][i].departure) > tol) return false;
            if (std::abs(a.rows[j][i].arrival - b.rows[j][i].arrival) > tol) return false;
        }
    }
    return true;
}

}  // namespace testing
