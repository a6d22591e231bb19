#pragma once

#include "metro/topology.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace metro {

// Square matrix over the (max, +) semiring. Absent entries are epsilon
// (-infinity); (A x)_i = max_j A_ij + x_j, so A_ij is an arc j -> i.
class MaxPlusMatrix {
public:
    explicit MaxPlusMatrix(int n);

    int size() const { return n_; }
    std::optional<double> at(int row, int col) const;
    // Stores a finite weight; non-finite weights are rejected.
    void set(int row, int col, double weight);
    // A_ij <- max(A_ij, weight).
    void accumulate(int row, int col, double weight);
    const std::map<std::pair<int, int>, double>& entries() const { return entries_; }

    static MaxPlusMatrix identity(int n);

    bool operator==(const MaxPlusMatrix& other) const = default;

private:
    int n_;
    std::map<std::pair<int, int>, double> entries_;
};

MaxPlusMatrix mp_multiply(const MaxPlusMatrix& a, const MaxPlusMatrix& b);
// A x for a dense vector; nullopt entries are epsilon.
std::vector<std::optional<double>> mp_apply(const MaxPlusMatrix& a,
                                            const std::vector<std::optional<double>>& x);

bool strongly_connected(const MaxPlusMatrix& a);

struct CycleTimeResult {
    double growth_rate = 0.0;
    std::vector<int> critical_cycle;  // nodes in arc order, first not repeated
};

double cycle_mean(const MaxPlusMatrix& a, const std::vector<int>& cycle);

// Maximum cycle mean by Karp's algorithm. Throws NotStronglyConnected.
CycleTimeResult cycle_time(const MaxPlusMatrix& a);
// Same quantity by Howard policy iteration.
CycleTimeResult howard_cycle_time(const MaxPlusMatrix& a);

struct StateLabel {
    int segment;
    int phase;  // departure within the alternation period (0 or 1 on the central part)
};

struct AssembledSystem {
    MaxPlusMatrix matrix{1};
    std::vector<StateLabel> states;
};

// First-order max-plus system over one alternation period for the
// constant-time dynamics (no demand, dwell = min_dwell, nominal run times).
// Its cycle time is the asymptotic time per period; central headway is half
// of it. Throws DemandNotZero, EmptySystem (m = 0), DeadlockError.
AssembledSystem assemble_system(const LineTopology& topology, const TrainConfiguration& config);
MaxPlusMatrix assemble_matrix(const LineTopology& topology, const TrainConfiguration& config);

// Triplet CSV "row,col,weight_s" preceded by a "# size N" line.
void write_triplets(std::ostream& out, const MaxPlusMatrix& a);
MaxPlusMatrix read_triplets(std::istream& in);

}  // namespace metro
