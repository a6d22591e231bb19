#include "metro/phase.hpp"

#include "metro/error.hpp"
#include "metro/format.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

namespace metro {

const PhasePoint* PhaseDiagram::find(int m, int dm) const {
    auto it = std::lower_bound(points.begin(), points.end(), std::pair{m, dm},
                               [](const PhasePoint& p, const std::pair<int, int>& key) {
                                   return std::pair{p.m, p.dm} < key;
                               });
    if (it == points.end() || it->m != m || it->dm != dm) return nullptr;
    return &*it;
}

CircuitProbe probe_circuits(const LineTopology& topology, const ControlParams& controls,
                            const TrainConfiguration& config, const SweepOptions& options,
                            double base_period) {
    auto period_with = [&](Part part) {
        LineDescription d = topology.description();
        for (SegmentSpec& s : d.part(part)) {
            s.run_time += options.probe_run_time;
            s.min_run_time += options.probe_run_time;
        }
        const DepartureTable t = simulate(build_line(d), config, controls, options.periods);
        return growth_rate(t, options.transient_fraction).period;
    };
    const double scale = 1.0 / options.probe_run_time;
    return {(period_with(Part::Branch1) - base_period) * scale,
            (period_with(Part::Branch2) - base_period) * scale};
}

PhasePoint analyze_point(const LineTopology& topology, const ControlParams& controls,
                         const TrainConfiguration& config, const SweepOptions& options) {
    PhasePoint pt;
    pt.m = config.total();
    pt.dm = config.imbalance(topology);
    DepartureTable table;
    try {
        table = simulate(topology, config, controls, options.periods);
    } catch (const DeadlockError&) {
        pt.deadlock = true;
        pt.estimate.converged = true;
        pt.label = PhaseLabel::IVa;
        return pt;
    } catch (const Error& e) {
        pt.error = e.what();
        return pt;
    }
    try {
        pt.estimate = growth_rate(table, options.transient_fraction);
        BindingCensus census = binding_census(table, topology, options.transient_fraction);
        if (options.probe_run_time > 0.0 && pt.estimate.f0 > 0.0) {
            try {
                census.probe = probe_circuits(topology, controls, config, options, pt.estimate.period);
            } catch (const DeadlockError&) {
                // Side falls back to the convergence holds.
            }
        }
        const Classification c =
            classify_phase(pt.estimate, census, pt.m, pt.dm, topology, options.classify);
        pt.label = c.label;
        pt.on_boundary = c.on_boundary;
    } catch (const Error& e) {
        pt.error = e.what();
    }
    return pt;
}

PhaseDiagram sweep(const LineTopology& topology, const ControlParams& controls,
                   const std::vector<int>& m_values, const std::vector<int>& dm_values,
                   const SweepOptions& options) {
    std::vector<std::pair<int, int>> grid;
    for (int m : m_values)
        for (int dm : dm_values) grid.emplace_back(m, dm);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<std::optional<PhasePoint>> slots(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            const auto [m, dm] = grid[i];
            TrainConfiguration cfg;
            try {
                cfg = seed_trains(topology, m, dm, options.rule, options.tie_branch);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::InfeasibleSeed) continue;
                PhasePoint failed;
                failed.m = m;
                failed.dm = dm;
                failed.error = e.what();
                slots[i] = std::move(failed);
                continue;
            }
            slots[i] = analyze_point(topology, controls, cfg, options);
        }
    };
    const int threads = std::max(1, options.parallel);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    PhaseDiagram diagram;
    for (auto& s : slots)
        if (s) diagram.points.push_back(std::move(*s));
    return diagram;
}

namespace {

void fit_line(Polyline& line) {
    const auto& pts = line.points;
    if (pts.size() < 2) {
        if (!pts.empty()) line.intercept = pts.front().second;
        return;
    }
    const double n = static_cast<double>(pts.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx == 0.0) return;
    line.slope = sxy / sxx;
    line.intercept = my - line.slope * mx;
    line.r_squared = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
}

// Per m column: mean dm of tie points, otherwise midpoints of grid edges
// joining the two labels.
std::optional<Polyline> boundary(const PhaseDiagram& d, PhaseLabel a, PhaseLabel b) {
    bool has_a = false, has_b = false;
    for (const PhasePoint& p : d.points) {
        has_a |= p.label == a;
        has_b |= p.label == b;
    }
    if (!has_a || !has_b) return std::nullopt;

    Polyline line;
    std::size_t i = 0;
    while (i < d.points.size()) {
        const int m = d.points[i].m;
        std::vector<const PhasePoint*> column;
        for (; i < d.points.size() && d.points[i].m == m; ++i)
            if (d.points[i].label == a || d.points[i].label == b) column.push_back(&d.points[i]);

        double tie_sum = 0.0, edge_sum = 0.0;
        int ties = 0, edges = 0;
        for (std::size_t c = 0; c < column.size(); ++c) {
            if (column[c]->on_boundary) {
                tie_sum += column[c]->dm;
                ++ties;
            }
            if (c + 1 < column.size() && column[c]->label != column[c + 1]->label) {
                edge_sum += 0.5 * (column[c]->dm + column[c + 1]->dm);
                ++edges;
            }
        }
        if (ties > 0)
            line.points.emplace_back(m, tie_sum / ties);
        else if (edges > 0)
            line.points.emplace_back(m, edge_sum / edges);
    }
    fit_line(line);
    return line;
}

std::optional<double> displacement(const std::optional<Polyline>& x, const std::optional<Polyline>& y) {
    if (!x || !y) return std::nullopt;
    std::optional<double> worst;
    for (const auto& [m, dm] : x->points)
        for (const auto& [m2, dm2] : y->points)
            if (m == m2) worst = std::max(worst.value_or(0.0), std::abs(dm2 - dm));
    return worst;
}

}  // namespace

Boundaries extract_boundaries(const PhaseDiagram& diagram) {
    auto ag = boundary(diagram, PhaseLabel::Ia, PhaseLabel::Ib);
    if (!ag) throw Error(ErrorCode::MissingRegion, "diagram lacks Ia or Ib; no [AG] boundary");
    auto jd = boundary(diagram, PhaseLabel::IIIa, PhaseLabel::IIIb);
    if (!jd) throw Error(ErrorCode::MissingRegion, "diagram lacks IIIa or IIIb; no [JD] boundary");
    return {std::move(*ag), std::move(*jd)};
}

ScenarioDiff compare_scenarios(const PhaseDiagram& base, const PhaseDiagram& variant) {
    if (base.points.size() != variant.points.size())
        throw Error(ErrorCode::GridMismatch, "diagrams have " + std::to_string(base.points.size()) +
                                                 " and " + std::to_string(variant.points.size()) +
                                                 " points");
    ScenarioDiff diff;
    int cell = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < base.points.size(); ++i) {
        const PhasePoint& p = base.points[i];
        const PhasePoint& q = variant.points[i];
        if (p.m != q.m || p.dm != q.dm)
            throw Error(ErrorCode::GridMismatch, "point (" + std::to_string(p.m) + ", " +
                                                     std::to_string(p.dm) + ") has no counterpart");
        diff.frequency_delta[{p.m, p.dm}] = q.estimate.f0_per_hour() - p.estimate.f0_per_hour();
        if (p.label && q.label && *p.label != *q.label)
            diff.label_changes[{p.m, p.dm}] = {*p.label, *q.label};
        if (i > 0 && base.points[i - 1].m == p.m) cell = std::min(cell, p.dm - base.points[i - 1].dm);
    }
    if (cell == std::numeric_limits<int>::max()) cell = 1;

    diff.ag_displacement = displacement(boundary(base, PhaseLabel::Ia, PhaseLabel::Ib),
                                        boundary(variant, PhaseLabel::Ia, PhaseLabel::Ib));
    diff.jd_displacement = displacement(boundary(base, PhaseLabel::IIIa, PhaseLabel::IIIb),
                                        boundary(variant, PhaseLabel::IIIa, PhaseLabel::IIIb));
    diff.ag_moved = diff.ag_displacement && *diff.ag_displacement >= cell;
    diff.jd_moved = diff.jd_displacement && *diff.jd_displacement >= cell;
    return diff;
}

void write_phase_csv(std::ostream& out, const PhaseDiagram& diagram) {
    out << "m,dm,f0_tph,h0_s,phase,converged\n";
    for (const PhasePoint& p : diagram.points) {
        const double h0 = p.estimate.f0 > 0.0 ? p.estimate.h0 : std::numeric_limits<double>::infinity();
        std::string label = p.label ? std::string(to_string(*p.label)) : "unclassifiable";
        if (p.label && p.on_boundary) label += "*";
        out << p.m << ',' << p.dm << ',' << format_number(p.estimate.f0_per_hour()) << ','
            << format_number(h0) << ',' << label << ',' << (p.estimate.converged ? 1 : 0) << '\n';
    }
}

void write_boundaries_csv(std::ostream& out, const Boundaries& b) {
    out << "name,m,dm\n";
    for (const auto& [m, dm] : b.ag.points) out << "AG," << format_number(m) << ',' << format_number(dm) << '\n';
    for (const auto& [m, dm] : b.jd.points) out << "JD," << format_number(m) << ',' << format_number(dm) << '\n';
}

}  // namespace metro
