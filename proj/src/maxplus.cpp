#include "metro/maxplus.hpp"

#include "metro/error.hpp"
#include "metro/format.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace metro {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Incoming arcs per node: in[i] = {(j, A_ij)}.
std::vector<std::vector<std::pair<int, double>>> in_arcs(const MaxPlusMatrix& a) {
    std::vector<std::vector<std::pair<int, double>>> in(static_cast<std::size_t>(a.size()));
    for (const auto& [rc, w] : a.entries()) in[static_cast<std::size_t>(rc.first)].emplace_back(rc.second, w);
    return in;
}

void require_strongly_connected(const MaxPlusMatrix& a) {
    if (!strongly_connected(a))
        throw Error(ErrorCode::NotStronglyConnected,
                    "precedence graph of the " + std::to_string(a.size()) + "x" +
                        std::to_string(a.size()) + " matrix is not strongly connected");
}

}  // namespace

MaxPlusMatrix::MaxPlusMatrix(int n) : n_(n) {
    if (n < 1) throw Error(ErrorCode::DimensionMismatch, "matrix dimension must be >= 1");
}

std::optional<double> MaxPlusMatrix::at(int row, int col) const {
    auto it = entries_.find({row, col});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void MaxPlusMatrix::set(int row, int col, double weight) {
    if (row < 0 || col < 0 || row >= n_ || col >= n_)
        throw Error(ErrorCode::DimensionMismatch, "entry (" + std::to_string(row) + ", " +
                                                      std::to_string(col) + ") outside matrix");
    if (!std::isfinite(weight))
        throw Error(ErrorCode::InvalidParameter, "max-plus entries are finite; leave epsilon absent");
    entries_[{row, col}] = weight;
}

void MaxPlusMatrix::accumulate(int row, int col, double weight) {
    auto it = entries_.find({row, col});
    if (it == entries_.end())
        set(row, col, weight);
    else
        it->second = std::max(it->second, weight);
}

MaxPlusMatrix MaxPlusMatrix::identity(int n) {
    MaxPlusMatrix id(n);
    for (int i = 0; i < n; ++i) id.set(i, i, 0.0);
    return id;
}

MaxPlusMatrix mp_multiply(const MaxPlusMatrix& a, const MaxPlusMatrix& b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::DimensionMismatch,
                    std::to_string(a.size()) + "x" + std::to_string(a.size()) + " times " +
                        std::to_string(b.size()) + "x" + std::to_string(b.size()));
    // Rows of b indexed by their row for the inner product.
    std::vector<std::vector<std::pair<int, double>>> brow(static_cast<std::size_t>(b.size()));
    for (const auto& [rc, w] : b.entries()) brow[static_cast<std::size_t>(rc.first)].emplace_back(rc.second, w);
    MaxPlusMatrix c(a.size());
    for (const auto& [rc, wa] : a.entries())
        for (const auto& [col, wb] : brow[static_cast<std::size_t>(rc.second)])
            c.accumulate(rc.first, col, wa + wb);
    return c;
}

std::vector<std::optional<double>> mp_apply(const MaxPlusMatrix& a,
                                            const std::vector<std::optional<double>>& x) {
    if (static_cast<int>(x.size()) != a.size())
        throw Error(ErrorCode::DimensionMismatch, "vector length differs from matrix size");
    std::vector<std::optional<double>> y(x.size());
    for (const auto& [rc, w] : a.entries()) {
        const auto& xj = x[static_cast<std::size_t>(rc.second)];
        if (!xj) continue;
        auto& yi = y[static_cast<std::size_t>(rc.first)];
        yi = yi ? std::max(*yi, w + *xj) : w + *xj;
    }
    return y;
}

bool strongly_connected(const MaxPlusMatrix& a) {
    const int n = a.size();
    std::vector<std::vector<int>> fwd(static_cast<std::size_t>(n)), bwd(static_cast<std::size_t>(n));
    for (const auto& [rc, w] : a.entries()) {
        fwd[static_cast<std::size_t>(rc.second)].push_back(rc.first);
        bwd[static_cast<std::size_t>(rc.first)].push_back(rc.second);
    }
    auto reaches_all = [n](const std::vector<std::vector<int>>& adj) {
        std::vector<bool> seen(static_cast<std::size_t>(n), false);
        std::vector<int> stack{0};
        seen[0] = true;
        int count = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int u : adj[static_cast<std::size_t>(v)])
                if (!seen[static_cast<std::size_t>(u)]) {
                    seen[static_cast<std::size_t>(u)] = true;
                    ++count;
                    stack.push_back(u);
                }
        }
        return count == n;
    };
    return reaches_all(fwd) && reaches_all(bwd);
}

double cycle_mean(const MaxPlusMatrix& a, const std::vector<int>& cycle) {
    if (cycle.empty()) throw Error(ErrorCode::InvalidParameter, "empty cycle");
    double total = 0.0;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        const int from = cycle[i];
        const int to = cycle[(i + 1) % cycle.size()];
        const auto w = a.at(to, from);
        if (!w) throw Error(ErrorCode::InvalidParameter, "cycle uses an epsilon arc");
        total += *w;
    }
    return total / static_cast<double>(cycle.size());
}

CycleTimeResult cycle_time(const MaxPlusMatrix& a) {
    require_strongly_connected(a);
    const int n = a.size();
    const auto in = in_arcs(a);
    // best[k][v]: heaviest walk of k arcs from node 0 to v; pred for the walk.
    std::vector<std::vector<double>> best(static_cast<std::size_t>(n + 1),
                                          std::vector<double>(static_cast<std::size_t>(n), kNegInf));
    std::vector<std::vector<int>> pred(static_cast<std::size_t>(n + 1),
                                       std::vector<int>(static_cast<std::size_t>(n), -1));
    best[0][0] = 0.0;
    for (int k = 1; k <= n; ++k)
        for (int v = 0; v < n; ++v)
            for (const auto& [u, w] : in[static_cast<std::size_t>(v)]) {
                const double prev = best[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(u)];
                if (prev == kNegInf) continue;
                if (prev + w > best[static_cast<std::size_t>(k)][static_cast<std::size_t>(v)]) {
                    best[static_cast<std::size_t>(k)][static_cast<std::size_t>(v)] = prev + w;
                    pred[static_cast<std::size_t>(k)][static_cast<std::size_t>(v)] = u;
                }
            }

    double lambda = kNegInf;
    int argv = -1;
    for (int v = 0; v < n; ++v) {
        const double dn = best[static_cast<std::size_t>(n)][static_cast<std::size_t>(v)];
        if (dn == kNegInf) continue;
        double worst = std::numeric_limits<double>::infinity();
        for (int k = 0; k < n; ++k) {
            const double dk = best[static_cast<std::size_t>(k)][static_cast<std::size_t>(v)];
            if (dk == kNegInf) continue;
            worst = std::min(worst, (dn - dk) / (n - k));
        }
        if (worst > lambda) {
            lambda = worst;
            argv = v;
        }
    }

    // The n-arc walk ending at argv holds a critical cycle; take the best
    // cycle closed along the walk.
    std::vector<int> walk(static_cast<std::size_t>(n + 1));
    walk[static_cast<std::size_t>(n)] = argv;
    for (int k = n; k > 0; --k)
        walk[static_cast<std::size_t>(k - 1)] =
            pred[static_cast<std::size_t>(k)][static_cast<std::size_t>(walk[static_cast<std::size_t>(k)])];
    CycleTimeResult result;
    result.growth_rate = lambda;
    double best_mean = kNegInf;
    std::vector<int> last_seen(static_cast<std::size_t>(n), -1);
    for (int k = 0; k <= n; ++k) {
        const int v = walk[static_cast<std::size_t>(k)];
        const int prev = last_seen[static_cast<std::size_t>(v)];
        if (prev >= 0) {
            std::vector<int> cyc(walk.begin() + prev, walk.begin() + k);
            const double mean = cycle_mean(a, cyc);
            if (mean > best_mean) {
                best_mean = mean;
                result.critical_cycle = cyc;
            }
        }
        last_seen[static_cast<std::size_t>(v)] = k;
    }
    return result;
}

CycleTimeResult howard_cycle_time(const MaxPlusMatrix& a) {
    require_strongly_connected(a);
    const std::size_t n = static_cast<std::size_t>(a.size());
    const auto in = in_arcs(a);
    constexpr double eps = 1e-12;

    // policy[i]: the j whose arc j -> i node i follows.
    std::vector<int> policy(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& arcs = in[i];
        policy[i] = std::max_element(arcs.begin(), arcs.end(), [](const auto& x, const auto& y) {
                        return x.second < y.second;
                    })->first;
    }
    auto weight = [&](std::size_t i, int j) { return *a.at(static_cast<int>(i), j); };

    std::vector<double> eta(n), value(n);
    for (int iter = 0; iter < 10000; ++iter) {
        // Value determination on the functional graph i -> policy[i].
        std::vector<int> state(n, 0);  // 0 new, 1 on stack, 2 done
        for (std::size_t start = 0; start < n; ++start) {
            if (state[start] != 0) continue;
            std::vector<std::size_t> path;
            std::size_t v = start;
            while (state[v] == 0) {
                state[v] = 1;
                path.push_back(v);
                v = static_cast<std::size_t>(policy[v]);
            }
            std::size_t resolved = path.size();
            if (state[v] == 1) {
                // New cycle starting at v.
                const auto pos = static_cast<std::size_t>(std::find(path.begin(), path.end(), v) - path.begin());
                double total = 0.0;
                for (std::size_t k = pos; k < path.size(); ++k) total += weight(path[k], policy[path[k]]);
                const double mean = total / static_cast<double>(path.size() - pos);
                // Anchor the smallest node of the cycle at value 0.
                std::size_t anchor = pos;
                for (std::size_t k = pos; k < path.size(); ++k)
                    if (path[k] < path[anchor]) anchor = k;
                const std::size_t len = path.size() - pos;
                eta[path[anchor]] = mean;
                value[path[anchor]] = 0.0;
                state[path[anchor]] = 2;
                // Walk backwards around the cycle from the anchor.
                for (std::size_t step = 1; step < len; ++step) {
                    const std::size_t k = pos + (anchor - pos + len - step) % len;
                    const std::size_t node = path[k];
                    const auto next = static_cast<std::size_t>(policy[node]);
                    eta[node] = mean;
                    value[node] = weight(node, policy[node]) - mean + value[next];
                    state[node] = 2;
                }
                resolved = pos;
            }
            for (std::size_t k = resolved; k-- > 0;) {
                const std::size_t node = path[k];
                const auto next = static_cast<std::size_t>(policy[node]);
                eta[node] = eta[next];
                value[node] = weight(node, policy[node]) - eta[next] + value[next];
                state[node] = 2;
            }
        }

        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = policy[i];
            for (const auto& [j, w] : in[i])
                if (eta[static_cast<std::size_t>(j)] > eta[static_cast<std::size_t>(best)] + eps) best = j;
            if (best != policy[i]) {
                policy[i] = best;
                changed = true;
            }
        }
        if (!changed) {
            for (std::size_t i = 0; i < n; ++i) {
                int best = policy[i];
                double best_val = weight(i, best) - eta[i] + value[static_cast<std::size_t>(best)];
                for (const auto& [j, w] : in[i]) {
                    if (std::abs(eta[static_cast<std::size_t>(j)] - eta[i]) > eps) continue;
                    const double val = w - eta[i] + value[static_cast<std::size_t>(j)];
                    if (val > best_val + 1e-9 * std::max(1.0, std::abs(best_val))) {
                        best_val = val;
                        best = j;
                    }
                }
                if (best != policy[i]) {
                    policy[i] = best;
                    changed = true;
                }
            }
        }
        if (!changed) break;
    }

    CycleTimeResult result;
    const auto top = static_cast<std::size_t>(std::max_element(eta.begin(), eta.end()) - eta.begin());
    result.growth_rate = eta[top];
    // Follow the policy from the best node into its cycle; arcs run
    // policy[i] -> i, so reverse the visiting order.
    std::vector<int> seen;
    int v = static_cast<int>(top);
    while (std::find(seen.begin(), seen.end(), v) == seen.end()) {
        seen.push_back(v);
        v = policy[static_cast<std::size_t>(v)];
    }
    std::vector<int> cyc(std::find(seen.begin(), seen.end(), v), seen.end());
    std::reverse(cyc.begin(), cyc.end());
    result.critical_cycle = cyc;
    return result;
}

void write_triplets(std::ostream& out, const MaxPlusMatrix& a) {
    out << "# size " << a.size() << "\nrow,col,weight_s\n";
    for (const auto& [rc, w] : a.entries())
        out << rc.first << ',' << rc.second << ',' << format_number(w) << '\n';
}

MaxPlusMatrix read_triplets(std::istream& in) {
    std::string line;
    int size = -1;
    struct Triplet {
        int row, col;
        double w;
    };
    std::vector<Triplet> triplets;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.rfind("# size", 0) == 0) {
            size = std::stoi(line.substr(6));
            continue;
        }
        if (line[0] == '#' || line.rfind("row", 0) == 0) continue;
        std::istringstream ss(line);
        Triplet t{};
        char c1 = 0, c2 = 0;
        if (!(ss >> t.row >> c1 >> t.col >> c2 >> t.w) || c1 != ',' || c2 != ',')
            throw Error(ErrorCode::ConfigParse, "triplet line " + std::to_string(line_no) + ": '" + line + "'");
        triplets.push_back(t);
    }
    if (size < 0)
        for (const auto& t : triplets) size = std::max({size, t.row + 1, t.col + 1});
    MaxPlusMatrix a(std::max(size, 1));
    for (const auto& t : triplets) a.accumulate(t.row, t.col, t.w);
    return a;
}

}  // namespace metro
