#include "metro/topology.hpp"

#include "metro/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <string>

namespace metro {

std::string_view to_string(Part part) {
    switch (part) {
    case Part::Central: return "central";
    case Part::Branch1: return "branch1";
    case Part::Branch2: return "branch2";
    }
    return "?";
}

std::string_view to_string(Direction direction) {
    return direction == Direction::Outbound ? "outbound" : "inbound";
}

const std::vector<SegmentSpec>& LineDescription::part(Part p) const {
    switch (p) {
    case Part::Central: return central;
    case Part::Branch1: return branch1;
    case Part::Branch2: return branch2;
    }
    return central;
}

std::vector<SegmentSpec>& LineDescription::part(Part p) {
    return const_cast<std::vector<SegmentSpec>&>(std::as_const(*this).part(p));
}

namespace {

constexpr std::array<Part, 3> kParts{Part::Central, Part::Branch1, Part::Branch2};

std::string field(Part p, std::size_t index, std::string_view name) {
    return std::string(to_string(p)) + "[" + std::to_string(index) + "]." + std::string(name);
}

void check_platform(const PlatformParams& pf, Part p, std::size_t i) {
    auto bad = [&](std::string_view name, const std::string& why) {
        throw Error(ErrorCode::InvalidParameter, field(p, i, name) + ": " + why);
    };
    if (!(pf.arrival_rate >= 0.0) || !std::isfinite(pf.arrival_rate))
        bad("platform.lambda", "must be finite and >= 0");
    if (!(pf.exchange_rate > 0.0) || !std::isfinite(pf.exchange_rate))
        bad("platform.alpha", "must be finite and > 0");
    if (!(pf.min_dwell >= 0.0)) bad("platform.min_dwell", "must be >= 0");
    if (!(pf.max_dwell >= pf.min_dwell) || !std::isfinite(pf.max_dwell))
        bad("platform.max_dwell", "must be finite and >= min_dwell");
    if (pf.arrival_rate >= pf.exchange_rate)
        throw Error(ErrorCode::SaturatedPlatform,
                    field(p, i, "platform") + ": lambda/alpha = " +
                        std::to_string(pf.demand_ratio()) + " must be < 1");
}

void place_evenly(std::vector<bool>& occ, int begin, int n, int trains, bool packed) {
    for (int i = 0; i < trains; ++i) {
        int pos = packed ? n - trains + i : static_cast<int>((static_cast<long>(i) * n) / trains);
        occ[static_cast<std::size_t>(begin + pos)] = true;
    }
}

}  // namespace

LineTopology build_line(const LineDescription& config) {
    LineTopology topo;
    int id = 0;
    for (Part p : kParts) {
        const auto& specs = config.part(p);
        topo.begin_[static_cast<int>(p)] = id;
        if (specs.empty())
            throw Error(ErrorCode::EmptyPart, std::string(to_string(p)) + ": part has no segments");
        bool has_platform = false;
        const std::size_t outbound = (specs.size() + 1) / 2;
        for (std::size_t i = 0; i < specs.size(); ++i) {
            const SegmentSpec& s = specs[i];
            if (!(s.run_time > 0.0) || !std::isfinite(s.run_time))
                throw Error(ErrorCode::NonPositiveRunTime, field(p, i, "run_time") + ": must be > 0");
            if (!(s.min_run_time > 0.0))
                throw Error(ErrorCode::NonPositiveRunTime,
                            field(p, i, "min_run_time") + ": must be > 0");
            if (s.min_run_time > s.run_time)
                throw Error(ErrorCode::MarginViolation,
                            field(p, i, "min_run_time") + ": exceeds run_time");
            if (!(s.safe_separation >= 0.0) || !std::isfinite(s.safe_separation))
                throw Error(ErrorCode::InvalidParameter,
                            field(p, i, "safe_separation") + ": must be finite and >= 0");
            if (s.platform) {
                check_platform(*s.platform, p, i);
                has_platform = true;
            }
            Segment seg;
            seg.id = id++;
            seg.part = p;
            seg.direction = s.direction.value_or(i < outbound ? Direction::Outbound : Direction::Inbound);
            seg.nominal_run_time = s.run_time;
            seg.min_run_time = s.min_run_time;
            seg.safe_separation_time = s.safe_separation;
            seg.platform = s.platform;
            topo.segments_.push_back(seg);
        }
        if (!has_platform)
            throw Error(ErrorCode::MissingPlatform, std::string(to_string(p)) + ": part has no platform");
    }
    topo.begin_[3] = id;
    return topo;
}

int LineTopology::successor(int id, int parity) const {
    if (id == divergence_id()) return branch_head(parity == 0 ? Branch::One : Branch::Two);
    if (is_branch_tail(id)) return convergence_id();
    return id + 1;
}

int LineTopology::predecessor(int id, int parity) const {
    if (id == convergence_id()) return branch_tail(parity == 0 ? Branch::One : Branch::Two);
    if (is_branch_head(id)) return divergence_id();
    return id - 1;
}

bool LineTopology::is_branch_tail(int id) const {
    return id == branch_tail(Branch::One) || id == branch_tail(Branch::Two);
}

bool LineTopology::is_branch_head(int id) const {
    return id == branch_head(Branch::One) || id == branch_head(Branch::Two);
}

std::optional<Branch> LineTopology::branch_of(int id) const {
    switch (segment(id).part) {
    case Part::Branch1: return Branch::One;
    case Part::Branch2: return Branch::Two;
    default: return std::nullopt;
    }
}

LineDescription LineTopology::description() const {
    LineDescription desc;
    for (const Segment& s : segments_)
        desc.part(s.part).push_back(SegmentSpec{s.direction, s.nominal_run_time, s.min_run_time,
                                                s.safe_separation_time, s.platform});
    return desc;
}

LineTopology LineTopology::mirrored() const {
    LineDescription desc = description();
    std::swap(desc.branch1, desc.branch2);
    return build_line(desc);
}

LineTopology scale_demand(const LineTopology& topology, double central, double branch1,
                          double branch2) {
    LineDescription desc = topology.description();
    const std::array<double, 3> factor{central, branch1, branch2};
    for (Part p : kParts)
        for (SegmentSpec& s : desc.part(p))
            if (s.platform) s.platform->arrival_rate *= factor[static_cast<std::size_t>(p)];
    return build_line(desc);
}

LineTopology without_margins(const LineTopology& topology) {
    LineDescription desc = topology.description();
    for (Part p : kParts)
        for (SegmentSpec& s : desc.part(p)) s.min_run_time = s.run_time;
    return build_line(desc);
}

int capacity(const LineTopology& topology) { return topology.size(); }

int TrainConfiguration::total() const {
    return static_cast<int>(std::count(occupancy.begin(), occupancy.end(), true));
}

int TrainConfiguration::count(const LineTopology& topology, Part part) const {
    int n = 0;
    for (int j = topology.part_begin(part); j < topology.part_end(part); ++j)
        n += occupancy[static_cast<std::size_t>(j)] ? 1 : 0;
    return n;
}

int TrainConfiguration::imbalance(const LineTopology& topology) const {
    return count(topology, Part::Branch2) - count(topology, Part::Branch1);
}

double TrainConfiguration::offset(int id) const {
    return initial_offsets.empty() ? 0.0 : initial_offsets[static_cast<std::size_t>(id)];
}

TrainConfiguration make_configuration(const LineTopology& topology, std::vector<bool> occupancy,
                                      Branch first_branch) {
    if (static_cast<int>(occupancy.size()) != topology.size())
        throw Error(ErrorCode::InfeasibleSeed, "occupancy length " + std::to_string(occupancy.size()) +
                                                   " differs from segment count " +
                                                   std::to_string(topology.size()));
    TrainConfiguration cfg;
    cfg.occupancy = std::move(occupancy);
    cfg.first_branch = first_branch;
    return cfg;
}

TrainConfiguration seed_trains(const LineTopology& topology, int m, int dm, SeedRule rule,
                               Branch tie_branch) {
    const int cap = capacity(topology);
    const int nc = topology.part_size(Part::Central);
    const int n1 = topology.part_size(Part::Branch1);
    const int n2 = topology.part_size(Part::Branch2);
    auto infeasible = [&](const std::string& why) {
        return Error(ErrorCode::InfeasibleSeed,
                     "(m=" + std::to_string(m) + ", dm=" + std::to_string(dm) + "): " + why);
    };
    if (m < 0 || m > cap) throw infeasible("m outside [0, " + std::to_string(cap) + "]");

    const double share = static_cast<double>(m) * nc / cap;
    int best = -1;
    double best_key = std::numeric_limits<double>::infinity();
    for (int c = 0; c <= std::min(nc, m); ++c) {
        const int mb = m - c;
        if ((mb - dm) % 2 != 0) continue;
        const int m1 = (mb - dm) / 2;
        const int m2 = (mb + dm) / 2;
        if (m1 < 0 || m2 < 0 || m1 > n1 || m2 > n2) continue;
        // Packed takes the smallest central allotment; even spacing the one
        // closest to the central share of the line, ties to the smaller.
        double key = rule == SeedRule::Packed ? c : std::abs(c - share);
        if (key < best_key) {
            best_key = key;
            best = c;
        }
    }
    if (best < 0) throw infeasible("no central allotment realizes the branch imbalance");

    const int mb = m - best;
    std::vector<bool> occ(static_cast<std::size_t>(cap), false);
    const bool packed = rule == SeedRule::Packed;
    place_evenly(occ, topology.part_begin(Part::Central), nc, best, packed);
    place_evenly(occ, topology.part_begin(Part::Branch1), n1, (mb - dm) / 2, packed);
    place_evenly(occ, topology.part_begin(Part::Branch2), n2, (mb + dm) / 2, packed);
    const Branch first = dm > 0 ? Branch::Two : dm < 0 ? Branch::One : tie_branch;
    return make_configuration(topology, std::move(occ), first);
}

}  // namespace metro
