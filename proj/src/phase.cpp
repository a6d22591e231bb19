#include "metro/phase.hpp"

#include "metro/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

namespace metro {

namespace {

std::size_t first_kept(std::size_t n, double transient_fraction) {
    return static_cast<std::size_t>(std::floor(transient_fraction * static_cast<double>(n)));
}

// Eventual period p of the increments: x[i+p] - x[i] constant over the tail.
std::optional<double> periodic_slope(const std::vector<double>& x) {
    const std::size_t n = x.size();
    const std::size_t max_p = std::min<std::size_t>(64, n / 3);
    for (std::size_t p = 1; p <= max_p; ++p) {
        const double inc = x[p] - x[0];
        bool ok = true;
        for (std::size_t i = 1; i + p < n && ok; ++i) {
            const double d = x[i + p] - x[i];
            ok = std::abs(d - inc) <= 1e-8 + 1e-12 * std::abs(x[i + p]);
        }
        if (!ok) continue;
        const std::size_t span = (n - 1) / p * p;
        return (x[span] - x[0]) / static_cast<double>(span);
    }
    return std::nullopt;
}

double least_squares_slope(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    const double mk = (n - 1.0) / 2.0;
    const double my = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dk = static_cast<double>(i) - mk;
        sxy += dk * (x[i] - my);
        sxx += dk * dk;
    }
    return sxy / sxx;
}

double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<double> segment_slopes(const DepartureTable& table, double transient_fraction) {
    if (!(transient_fraction >= 0.0 && transient_fraction < 1.0))
        throw Error(ErrorCode::InvalidParameter, "transient: must lie in [0, 1)");
    std::vector<double> slopes;
    for (std::size_t j = 0; j < table.rows.size(); ++j) {
        const auto& row = table.rows[j];
        const std::size_t start = first_kept(row.size(), transient_fraction);
        if (row.size() < start + 3)
            throw Error(ErrorCode::InsufficientData,
                        "segment " + std::to_string(j) + " keeps " +
                            std::to_string(row.size() - std::min(start, row.size())) +
                            " departures after the transient cut; at least 3 are needed");
        std::vector<double> x;
        x.reserve(row.size() - start);
        for (std::size_t i = start; i < row.size(); ++i) x.push_back(row[i].departure);
        slopes.push_back(periodic_slope(x).value_or(least_squares_slope(x)));
    }
    return slopes;
}

GrowthRateEstimate growth_rate(const DepartureTable& table, double transient_fraction,
                               double tolerance) {
    GrowthRateEstimate est;
    if (table.empty()) {
        est.converged = true;
        return est;
    }
    const std::vector<double> slopes = segment_slopes(table, transient_fraction);
    std::vector<double> per_part[3];
    std::vector<double> periods;
    for (std::size_t j = 0; j < slopes.size(); ++j) {
        const Part p = table.parts[j];
        per_part[static_cast<int>(p)].push_back(slopes[j]);
        periods.push_back(slopes[j] * (p == Part::Central ? 2.0 : 1.0));
    }
    est.h0 = mean(per_part[0]);
    est.h1 = mean(per_part[1]);
    est.h2 = mean(per_part[2]);
    est.period = mean(periods);
    est.f0 = est.h0 > 0.0 ? 1.0 / est.h0 : 0.0;
    for (double p : periods) est.residual = std::max(est.residual, std::abs(p - est.period));
    est.converged = est.residual <= tolerance * est.period;
    return est;
}

int BindingCensus::total(Binding b) const {
    int n = 0;
    for (const auto& part : arcs) n += part[static_cast<std::size_t>(b)];
    return n;
}

BindingCensus binding_census(const DepartureTable& table, const LineTopology& topology,
                             double transient_fraction) {
    BindingCensus census;
    if (table.empty()) return census;

    // Counts before the cut belong to the transient.
    auto cut = [&](int j) {
        return static_cast<long>(first_kept(table.rows[static_cast<std::size_t>(j)].size(),
                                            transient_fraction));
    };

    // One walk per branch circuit: the last two convergence departures come
    // from different branches.
    std::set<int> segments;
    const int c0 = topology.convergence_id();
    for (long start = table.counts(c0); start > std::max(0L, table.counts(c0) - 2); --start) {
        std::vector<std::pair<int, Binding>> walk;
        int j = c0;
        long k = start;
        while (k > cut(j)) {
            const DepartureRecord& r = table.at(j, k);
            if (r.binding == Binding::Initial || r.source.segment < 0) break;
            walk.emplace_back(j, r.binding);
            j = r.source.segment;
            k = r.source.count;
        }
        // The ends of a walk may lie off the critical circuit.
        const std::size_t lo = walk.size() / 4;
        const std::size_t hi = walk.size() - walk.size() / 4;
        for (std::size_t i = lo; i < hi; ++i) {
            const auto [seg, b] = walk[i];
            ++census.arcs[static_cast<std::size_t>(topology.segment(seg).part)]
                         [static_cast<std::size_t>(b)];
            segments.insert(seg);
        }
        census.length += static_cast<int>(hi - lo);
    }
    census.distinct_segments = static_cast<int>(segments.size());

    auto mean_hold = [&](int j) {
        double sum = 0.0;
        long n = 0;
        for (long k = cut(j) + 1; k <= table.counts(j); ++k, ++n) sum += table.at(j, k).hold;
        return n > 0 ? sum / static_cast<double>(n) : 0.0;
    };
    census.tail_hold1 = mean_hold(topology.branch_tail(Branch::One));
    census.tail_hold2 = mean_hold(topology.branch_tail(Branch::Two));
    return census;
}

std::string_view to_string(PhaseLabel label) {
    switch (label) {
        case PhaseLabel::Ia: return "Ia";
        case PhaseLabel::Ib: return "Ib";
        case PhaseLabel::IIa: return "IIa";
        case PhaseLabel::IIb: return "IIb";
        case PhaseLabel::IIIa: return "IIIa";
        case PhaseLabel::IIIb: return "IIIb";
        case PhaseLabel::IVa: return "IVa";
        case PhaseLabel::IVb: return "IVb";
    }
    return "?";
}

std::optional<PhaseLabel> parse_phase(std::string_view text) {
    for (PhaseLabel l : kAllPhases)
        if (to_string(l) == text) return l;
    return std::nullopt;
}

Classification classify_phase(const GrowthRateEstimate& estimate, const BindingCensus& census,
                              int m, int dm, const LineTopology& topology,
                              const ClassifyOptions& options) {
    (void)topology;
    if (estimate.f0 == 0.0 || m == 0) return {PhaseLabel::IVa, false};
    if (census.length == 0)
        throw Error(ErrorCode::Unclassifiable, "no steady constraint chain at m=" + std::to_string(m) +
                                                   ", dm=" + std::to_string(dm));

    const int fwd = census.total(Binding::Forward);
    const int back = census.total(Binding::Backward);
    const int junction = census.total(Binding::Junction);
    const auto F = [&](Part p) { return census.count(p, Binding::Forward); };
    const auto B = [&](Part p) {
        return census.count(p, Binding::Backward) + census.count(p, Binding::Junction);
    };

    // Bottleneck: the critical chain shuttles between a few neighbouring
    // segments through both run and safety constraints.
    if (census.distinct_segments <= options.local_segments && fwd > 0 && back + junction > 0)
        return {PhaseLabel::IVb, false};

    // Free flow: the limiting circuit is the one whose run times set the
    // period. Congestion: trains of the circuit with spare room wait at the
    // convergence for the other circuit's trains.
    const auto side = [&](PhaseLabel a, PhaseLabel b, bool use_probe) {
        double gap = census.tail_hold2 - census.tail_hold1;
        bool tie = std::abs(gap) <= options.tie_hold * estimate.period;
        if (use_probe && census.probe) {
            gap = census.probe->branch1 - census.probe->branch2;
            const double hi = std::max(std::abs(census.probe->branch1), std::abs(census.probe->branch2));
            tie = std::abs(gap) <= options.tie_share * hi;
        }
        if (tie) return Classification{dm < 0 ? b : a, true};
        return Classification{gap > 0.0 ? a : b, false};
    };

    // Junction waits separate the two circuits and do not count against
    // free flow.
    const double within = static_cast<double>(fwd + back);
    if (within > 0.0 && fwd >= options.dominance * within)
        return side(PhaseLabel::Ia, PhaseLabel::Ib, true);
    if (within > 0.0 && back >= options.dominance * within)
        return side(PhaseLabel::IIIa, PhaseLabel::IIIb, false);

    const auto forward_bound = [&](Part p) {
        const int n = F(p) + B(p);
        return n > 0 && F(p) >= options.dominance * n;
    };
    const auto safety_bound = [&](Part p) {
        const int n = F(p) + B(p);
        return n > 0 && B(p) >= options.dominance * n;
    };
    if (forward_bound(Part::Branch1) && safety_bound(Part::Branch2)) return {PhaseLabel::IIa, false};
    if (forward_bound(Part::Branch2) && safety_bound(Part::Branch1)) return {PhaseLabel::IIb, false};

    throw Error(ErrorCode::Unclassifiable,
                "mixed constraint census at m=" + std::to_string(m) + ", dm=" + std::to_string(dm) +
                    ": forward " + std::to_string(fwd) + ", backward " + std::to_string(back) +
                    ", junction " + std::to_string(junction));
}

}  // namespace metro
