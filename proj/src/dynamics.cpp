#include "metro/dynamics.hpp"

#include "metro/error.hpp"
#include "metro/format.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <string>

namespace metro {

bool DepartureTable::empty() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.empty(); });
}

const DepartureRecord& DepartureTable::at(int segment, long k) const {
    return rows.at(static_cast<std::size_t>(segment)).at(static_cast<std::size_t>(k - 1));
}

int counts_per_period(const LineTopology& topology, int segment) {
    return topology.segment(segment).part == Part::Central ? 2 : 1;
}

CountIndexing::CountIndexing(const LineTopology& topology, const TrainConfiguration& config)
    : topo_(&topology), occupied_(config.occupancy), conv_first_(config.first_branch) {
    // Trains already in the central part pass the divergence before any train
    // that converges later; the divergence order continues the convergence
    // order so every train returns to its own branch.
    const int central = config.count(topology, Part::Central);
    div_first_ = central % 2 == 0 ? conv_first_ : other(conv_first_);
}

namespace {

// n-th train (n >= 1) in an alternating sequence starting with `first`.
Branch alternating(Branch first, long n) { return n % 2 == 1 ? first : other(first); }

// Position in the alternating sequence of the i-th train of branch b.
long sequence_index(Branch first, Branch b, long i) { return b == first ? 2 * i - 1 : 2 * i; }

}  // namespace

std::optional<CountRef> CountIndexing::upstream(int j, long k) const {
    const long entry = k - (occupied(j) ? 1 : 0);
    if (entry < 1) return std::nullopt;
    const LineTopology& t = *topo_;
    if (j == t.convergence_id()) {
        const Branch b = alternating(conv_first_, entry);
        return CountRef{t.branch_tail(b), (entry + 1) / 2};
    }
    if (t.is_branch_head(j)) {
        const Branch b = *t.branch_of(j);
        return CountRef{t.divergence_id(), sequence_index(div_first_, b, entry)};
    }
    return CountRef{j - 1, entry};
}

std::optional<CountRef> CountIndexing::downstream(int j, long k) const {
    const LineTopology& t = *topo_;
    int next = j + 1;
    long entry = k;
    if (j == t.divergence_id()) {
        next = t.branch_head(alternating(div_first_, k));
        entry = (k + 1) / 2;
    } else if (t.is_branch_tail(j)) {
        next = t.convergence_id();
        entry = sequence_index(conv_first_, *t.branch_of(j), k);
    }
    const long needed = entry + (occupied(next) ? 1 : 0) - 1;
    if (needed < 1) return std::nullopt;
    return CountRef{next, needed};
}

EngineState::EngineState(LineTopology topology, TrainConfiguration config, ControlParams controls,
                         int window_periods)
    : topology_(std::move(topology)),
      config_(std::move(config)),
      controls_(std::move(controls)),
      index_(topology_, config_),
      window_(window_periods),
      history_(static_cast<std::size_t>(topology_.size())) {
    if (window_ < 2)
        throw Error(ErrorCode::WindowTooShort,
                    "window of " + std::to_string(window_) + " periods; the recursion reaches one "
                    "period back, so at least 2 are needed");
    if (static_cast<int>(config_.occupancy.size()) != topology_.size())
        throw Error(ErrorCode::InfeasibleSeed, "occupancy does not match the topology");
}

bool EngineState::has(int segment, long k) const {
    const History& h = history_[static_cast<std::size_t>(segment)];
    return k >= h.base && k < h.base + static_cast<long>(h.recent.size());
}

long EngineState::computed(int segment) const {
    const History& h = history_[static_cast<std::size_t>(segment)];
    return h.base + static_cast<long>(h.recent.size()) - 1;
}

const DepartureRecord& EngineState::record(int segment, long k) const {
    if (!has(segment, k))
        throw Error(ErrorCode::WindowTooShort,
                    "count " + std::to_string(k) + " of segment " + std::to_string(segment) +
                        " is outside the window");
    const History& h = history_[static_cast<std::size_t>(segment)];
    return h.recent[static_cast<std::size_t>(k - h.base)];
}

Branch EngineState::next_converging() const {
    // Entries into the convergence segment so far.
    const int c0 = topology_.convergence_id();
    const long entries = computed(c0) - (index_.occupied(c0) ? 1 : 0);
    return alternating(index_.convergence_first(), std::max(0L, entries) + 1);
}

Branch EngineState::next_diverging() const {
    return alternating(index_.divergence_first(), computed(topology_.divergence_id()) + 1);
}

DepartureRecord EngineState::evaluate(int j, long k) const {
    const Segment& seg = topology_.segment(j);
    DepartureRecord rec;
    Passage p;
    const auto up = index_.upstream(j, k);
    if (up) {
        const DepartureRecord& u = record(up->segment, up->count);
        const double previous = k > 1 ? record(j, k - 1).departure : 0.0;
        p = enter_segment(seg, controls_, u.departure, u.schedule, previous);
    } else {
        p = initial_passage(seg, controls_, config_.offset(j));
    }
    rec.arrival = p.arrival;
    rec.schedule = p.schedule;
    rec.departure = p.ready;
    rec.binding = up ? Binding::Forward : Binding::Initial;
    if (up) rec.source = *up;

    if (const auto down = index_.downstream(j, k)) {
        const double safe = record(down->segment, down->count).departure +
                            topology_.segment(down->segment).safe_separation_time;
        if (safe > rec.departure) {
            rec.departure = safe;
            const bool crosses = j == topology_.divergence_id() || topology_.is_branch_tail(j);
            rec.binding = crosses ? Binding::Junction : Binding::Backward;
            rec.source = *down;
        }
    }
    rec.hold = rec.departure - p.ready;
    return rec;
}

void EngineState::advance() {
    if (config_.total() == 0) {
        ++period_;
        return;
    }
    const long target_period = period_ + 1;
    struct Pending {
        int segment;
        long count;
    };
    std::vector<Pending> pending;
    for (int j = 0; j < topology_.size(); ++j) {
        const int per = counts_per_period(topology_, j);
        for (long k = computed(j) + 1; k <= target_period * per; ++k) pending.push_back({j, k});
    }

    auto ready = [&](const Pending& p) {
        // Counts of one segment are produced in order.
        if (p.count != computed(p.segment) + 1) return false;
        const auto up = index_.upstream(p.segment, p.count);
        if (up && up->count > computed(up->segment)) return false;
        const auto down = index_.downstream(p.segment, p.count);
        if (down && down->count > computed(down->segment)) return false;
        return true;
    };

    while (!pending.empty()) {
        bool progress = false;
        for (auto it = pending.begin(); it != pending.end();) {
            if (ready(*it)) {
                DepartureRecord rec = evaluate(it->segment, it->count);
                history_[static_cast<std::size_t>(it->segment)].recent.push_back(rec);
                it = pending.erase(it);
                progress = true;
            } else {
                ++it;
            }
        }
        if (progress) continue;

        // Every pending count waits on another pending count: follow the
        // waits until one repeats.
        std::vector<int> chain;
        std::vector<std::pair<int, long>> seen;
        std::pair<int, long> cur{pending.front().segment, pending.front().count};
        while (std::find(seen.begin(), seen.end(), cur) == seen.end()) {
            seen.push_back(cur);
            const auto [j, k] = cur;
            if (k != computed(j) + 1) {
                cur = {j, computed(j) + 1};
                continue;
            }
            const auto up = index_.upstream(j, k);
            if (up && up->count > computed(up->segment))
                cur = {up->segment, computed(up->segment) + 1};
            else if (const auto down = index_.downstream(j, k))
                cur = {down->segment, computed(down->segment) + 1};
        }
        const auto start = std::find(seen.begin(), seen.end(), cur);
        std::string where;
        for (auto it = start; it != seen.end(); ++it) {
            if (chain.empty() || chain.back() != it->first) chain.push_back(it->first);
            where += (where.empty() ? "" : " -> ") + std::to_string(it->first);
        }
        throw DeadlockError(chain, "no departure possible in period " +
                                       std::to_string(target_period) + "; circular wait over segments " +
                                       where);
    }
    period_ = target_period;
    trim();
}

void EngineState::trim() {
    for (int j = 0; j < topology_.size(); ++j) {
        History& h = history_[static_cast<std::size_t>(j)];
        const long keep = static_cast<long>(window_) * counts_per_period(topology_, j);
        while (static_cast<long>(h.recent.size()) > keep) {
            h.recent.pop_front();
            ++h.base;
        }
    }
}

EngineState step(EngineState state) {
    state.advance();
    return state;
}

DepartureTable simulate(const LineTopology& topology, const TrainConfiguration& config,
                        const ControlParams& controls, long periods) {
    if (periods < 1) throw Error(ErrorCode::InvalidParameter, "counts: must be >= 1");
    DepartureTable table;
    for (const Segment& s : topology.segments()) table.parts.push_back(s.part);
    table.rows.resize(static_cast<std::size_t>(topology.size()));
    if (config.total() == 0) return table;

    EngineState state(topology, config, controls);
    for (long p = 0; p < periods; ++p) {
        state.advance();
        for (int j = 0; j < topology.size(); ++j) {
            auto& row = table.rows[static_cast<std::size_t>(j)];
            for (long k = static_cast<long>(row.size()) + 1; k <= state.computed(j); ++k)
                row.push_back(state.record(j, k));
        }
    }
    table.periods = periods;
    return table;
}

void write_departures_csv(std::ostream& out, const DepartureTable& table) {
    out << "segment_id,part,k,arrival_s,departure_s\n";
    for (std::size_t j = 0; j < table.rows.size(); ++j) {
        for (std::size_t i = 0; i < table.rows[j].size(); ++i) {
            const DepartureRecord& r = table.rows[j][i];
            out << j << ',' << to_string(table.parts[j]) << ',' << (i + 1) << ','
                << format_number(r.arrival) << ',' << format_number(r.departure) << '\n';
        }
    }
}

}  // namespace metro
