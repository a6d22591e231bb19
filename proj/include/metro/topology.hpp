#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace metro {

enum class Part { Central = 0, Branch1 = 1, Branch2 = 2 };
enum class Direction { Outbound, Inbound };
enum class Branch { One = 1, Two = 2 };

std::string_view to_string(Part part);
std::string_view to_string(Direction direction);

inline Branch other(Branch b) { return b == Branch::One ? Branch::Two : Branch::One; }
inline Part part_of(Branch b) { return b == Branch::One ? Part::Branch1 : Part::Branch2; }

struct PlatformParams {
    double arrival_rate = 0.0;   // lambda, passengers/s
    double exchange_rate = 1.0;  // alpha, passengers/s
    double min_dwell = 0.0;
    double max_dwell = 0.0;

    double demand_ratio() const { return arrival_rate / exchange_rate; }
};

struct Segment {
    int id = 0;
    Part part = Part::Central;
    Direction direction = Direction::Outbound;
    double nominal_run_time = 0.0;
    double min_run_time = 0.0;
    double safe_separation_time = 0.0;
    std::optional<PlatformParams> platform;

    double margin() const { return nominal_run_time - min_run_time; }
};

// One segment as written in a line description. Direction is optional; when
// absent the first half of a part (rounded up) is outbound.
struct SegmentSpec {
    std::optional<Direction> direction;
    double run_time = 0.0;
    double min_run_time = 0.0;
    double safe_separation = 0.0;
    std::optional<PlatformParams> platform;
};

// Segments of each part in travel order. Outbound runs away from the
// junction; the central part starts right after the convergence and ends at
// the divergence, each branch starts after the divergence and ends at the
// convergence. Terminus turnaround time belongs in the terminus segment's
// run times.
struct LineDescription {
    std::vector<SegmentSpec> central;
    std::vector<SegmentSpec> branch1;
    std::vector<SegmentSpec> branch2;

    const std::vector<SegmentSpec>& part(Part p) const;
    std::vector<SegmentSpec>& part(Part p);
};

class LineTopology {
public:
    const std::vector<Segment>& segments() const { return segments_; }
    const Segment& segment(int id) const { return segments_.at(static_cast<std::size_t>(id)); }
    int size() const { return static_cast<int>(segments_.size()); }

    // First and one-past-last segment id of a part.
    int part_begin(Part p) const { return begin_[static_cast<int>(p)]; }
    int part_end(Part p) const { return begin_[static_cast<int>(p) + 1]; }
    int part_size(Part p) const { return part_end(p) - part_begin(p); }

    // First central segment, fed alternately by the two branch tails.
    int convergence_id() const { return part_begin(Part::Central); }
    // Last central segment, feeding the two branch heads alternately.
    int divergence_id() const { return part_end(Part::Central) - 1; }
    int branch_head(Branch b) const { return part_begin(part_of(b)); }
    int branch_tail(Branch b) const { return part_end(part_of(b)) - 1; }

    // Parity selects the branch at the junction (0 -> branch 1, 1 -> branch 2)
    // and is ignored elsewhere.
    int successor(int id, int parity = 0) const;
    int predecessor(int id, int parity = 0) const;
    int successor_count(int id) const { return id == divergence_id() ? 2 : 1; }
    int predecessor_count(int id) const { return id == convergence_id() ? 2 : 1; }

    bool is_branch_tail(int id) const;
    bool is_branch_head(int id) const;
    std::optional<Branch> branch_of(int id) const;

    // Same line with the two branches exchanged.
    LineTopology mirrored() const;

    LineDescription description() const;

private:
    friend LineTopology build_line(const LineDescription&);

    std::vector<Segment> segments_;
    std::array<int, 4> begin_{};
};

// Validates the description and wires the junction. Throws metro::Error.
LineTopology build_line(const LineDescription& config);

// Copy of the line with every arrival rate of a part multiplied by the
// part's factor (central, branch 1, branch 2). Revalidates lambda < alpha.
LineTopology scale_demand(const LineTopology& topology, double central, double branch1,
                          double branch2);

// Copy with min_run_time raised to nominal_run_time on every segment.
LineTopology without_margins(const LineTopology& topology);

// Maximum number of trains: one per segment.
int capacity(const LineTopology& topology);

struct TrainConfiguration {
    std::vector<bool> occupancy;
    Branch first_branch = Branch::One;
    // Time at which each initially present train stands ready at the head of
    // its segment (before dwelling). Empty means all zero.
    std::vector<double> initial_offsets;

    int total() const;
    int count(const LineTopology& topology, Part part) const;
    int imbalance(const LineTopology& topology) const;  // m2 - m1
    double offset(int id) const;
};

enum class SeedRule {
    EvenSpacing,  // central allotment near proportional share, trains spread within each part
    Packed,       // fewest central trains, trains packed toward the end of each part
};

// Places m trains with (branch 2 count) - (branch 1 count) == dm. The first
// converging train comes from the branch holding more trains, from
// `tie_branch` when dm == 0. Throws InfeasibleSeed when no placement exists.
TrainConfiguration seed_trains(const LineTopology& topology, int m, int dm,
                               SeedRule rule = SeedRule::EvenSpacing,
                               Branch tie_branch = Branch::One);

// Checks the occupancy vector against the topology (length, m bounds).
TrainConfiguration make_configuration(const LineTopology& topology, std::vector<bool> occupancy,
                                      Branch first_branch = Branch::One);

}  // namespace metro
