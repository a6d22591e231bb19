// One line per acceptance criterion; exit status 1 if any fails.

#include "metro/cli.hpp"
#include "metro/dynamics.hpp"
#include "metro/error.hpp"
#include "metro/maxplus.hpp"
#include "metro/phase.hpp"
#include "metro/scenario.hpp"

#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

using namespace metro;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = METRO_FIXTURES;

constexpr long kCounts = 500;
constexpr double kTransient = 0.3;
constexpr double kCycleTol = 1e-6;     // s per count
constexpr double kHowardTol = 1e-9;
constexpr double kHeadwayTol = 1e-4;   // relative
constexpr double kOffsetTol = 1e-6;    // relative
constexpr double kMonotoneTol = 1e-6;  // relative
constexpr double kRuntimeLimit = 10.0; // s

int failures = 0;

void report(int n, bool ok, const std::string& what, const std::string& detail) {
    std::printf("[%s] %d %s (%s)\n", ok ? "PASS" : "FAIL", n, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

struct Fixture {
    ScenarioConfig config;
    LineTopology topology;
    ControlParams controls;
    PhaseDiagram diagram;
};

PhaseDiagram run_sweep(const ScenarioConfig& cfg, const LineTopology& topo) {
    return sweep(topo, cfg.controls(topo), cfg.m_values, cfg.dm_values, cfg.run);
}

Fixture load_fixture() {
    ScenarioConfig cfg = load_scenario(kFixtures + "/t9.json");
    cfg.run.periods = kCounts;
    cfg.run.transient_fraction = kTransient;
    LineTopology topo = cfg.topology();
    ControlParams ctl = cfg.controls(topo);
    PhaseDiagram d = run_sweep(cfg, topo);
    return {std::move(cfg), std::move(topo), std::move(ctl), std::move(d)};
}

// Simulation, event oracle and max-plus cycle time on one configuration.
struct OracleOutcome {
    bool deadlock = false;
    bool consistent = true;
    double entity = 0.0;
    double cycle = 0.0;
};

OracleOutcome oracle_compare(const LineTopology& topo, const TrainConfiguration& cfg) {
    const ControlParams c = make_controls(topo, 300, false);
    OracleOutcome o;
    int dead = 0;
    DepartureTable a, b;
    std::optional<double> karp;
    try {
        a = simulate(topo, cfg, c, kCounts);
    } catch (const DeadlockError&) {
        ++dead;
    }
    try {
        b = entity_oracle_simulate(topo, cfg, c, kCounts);
    } catch (const DeadlockError&) {
        ++dead;
    }
    try {
        karp = cycle_time(assemble_matrix(topo, cfg)).growth_rate;
    } catch (const DeadlockError&) {
        ++dead;
    } catch (const Error&) {
        o.consistent = false;
    }
    if (dead > 0) {
        o.deadlock = true;
        o.consistent = o.consistent && dead == 3;
        return o;
    }
    if (!karp) return o;
    for (std::size_t j = 0; j < a.rows.size(); ++j) {
        if (a.rows[j].size() != b.rows[j].size()) {
            o.consistent = false;
            return o;
        }
        for (std::size_t i = 0; i < a.rows[j].size(); ++i)
            o.entity = std::max(o.entity, std::abs(a.rows[j][i].departure - b.rows[j][i].departure));
    }
    const GrowthRateEstimate e = growth_rate(a, kTransient);
    // the cycle time covers one alternation period, two central counts
    o.cycle = std::abs(e.h0 - *karp / 2.0);
    return o;
}

void criterion1() {
    const auto start = std::chrono::steady_clock::now();
    int compared = 0, deadlocks = 0, inconsistent = 0, random_ok = 0;
    double entity = 0.0, cycle = 0.0;
    auto account = [&](const OracleOutcome& o) {
        if (!o.consistent) ++inconsistent;
        if (o.deadlock) {
            ++deadlocks;
            return false;
        }
        ++compared;
        entity = std::max(entity, o.entity);
        cycle = std::max(cycle, o.cycle);
        return true;
    };

    std::mt19937 rng(1);
    for (int attempt = 0; attempt < 200 && random_ok < 25; ++attempt) {
        const testing::RandomInstance inst = testing::random_instance(rng, false);
        if (account(oracle_compare(inst.topology, inst.config))) ++random_ok;
    }
    const LineTopology t9 = testing::t9();
    for (int m = 0; m <= capacity(t9); ++m) {
        for (int dm = -capacity(t9); dm <= capacity(t9); ++dm) {
            TrainConfiguration cfg;
            try {
                cfg = seed_trains(t9, m, dm);
            } catch (const Error&) {
                continue;
            }
            if (m > 0) account(oracle_compare(t9, cfg));
        }
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = random_ok >= 20 && inconsistent == 0 && entity == 0.0 && cycle <= kCycleTol &&
                    seconds < kRuntimeLimit;
    report(1, ok, "simulation = event oracle exactly, = max-plus cycle time",
           std::to_string(random_ok) + " random + desk line, " + std::to_string(compared) + " compared, " +
               std::to_string(deadlocks) + " deadlocked, " + std::to_string(inconsistent) +
               " inconsistent, max |d - d_entity| " + num(entity) + " s, max |h0 - cycle/2| " + num(cycle) +
               " s, " + num(seconds) + " s total");
}

void criterion2() {
    std::mt19937 rng(2);
    std::uniform_int_distribution<int> size(1, 50);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const MaxPlusMatrix a = testing::random_strongly_connected(rng, size(rng));
        worst = std::max(worst, std::abs(cycle_time(a).growth_rate - howard_cycle_time(a).growth_rate));
    }
    report(2, worst <= kHowardTol, "Karp = Howard on 100 random strongly connected matrices",
           "max difference " + num(worst));
}

void criterion3(const Fixture& f) {
    int checked = 0;
    double worst = 0.0;
    for (const PhasePoint& p : f.diagram.points) {
        if (!p.estimate.converged || p.estimate.f0 == 0.0) continue;
        const double h = 2.0 * p.estimate.h0;
        worst = std::max({worst, std::abs(p.estimate.h1 - h) / h, std::abs(p.estimate.h2 - h) / h});
        ++checked;
    }
    report(3, checked > 0 && worst <= kHeadwayTol, "branch headways equal 2 h0 at converged points",
           std::to_string(checked) + " points, max relative error " + num(worst));
}

void criterion4(const Fixture& f) {
    bool ok = true;
    std::string detail;
    for (int m : {0, capacity(f.topology)}) {
        int seen = 0;
        for (const PhasePoint& p : f.diagram.points) {
            if (p.m != m) continue;
            ++seen;
            ok = ok && p.estimate.f0 == 0.0;
            detail += "f0(" + std::to_string(m) + "," + std::to_string(p.dm) + ")=" + num(p.estimate.f0) + " ";
        }
        ok = ok && seen > 0;
    }
    detail.pop_back();
    report(4, ok, "no flow on an empty or full line", detail);
}

void criterion5(const Fixture& f) {
    std::set<PhaseLabel> labels;
    for (const PhasePoint& p : f.diagram.points)
        if (p.label) labels.insert(*p.label);
    std::string names;
    for (PhaseLabel l : labels) names += std::string(names.empty() ? "" : " ") + std::string(to_string(l));
    report(5, labels.size() == kAllPhases.size(), "fixture sweep shows all eight phases", names);
}

void criterion6(const Fixture& f) {
    ScenarioConfig all = f.config;
    all.demand = {1.5, 1.5, 1.5};
    const ScenarioDiff uniform = compare_scenarios(f.diagram, run_sweep(all, all.topology()));
    ScenarioConfig skew = f.config;
    skew.demand = {1.5, 1.0, 1.5};
    const ScenarioDiff shifted = compare_scenarios(f.diagram, run_sweep(skew, skew.topology()));
    const bool ok = uniform.jd_displacement && *uniform.jd_displacement <= 1.0 && shifted.ag_displacement &&
                    *shifted.ag_displacement >= 1.0;
    auto show = [](const std::optional<double>& x) { return x ? num(*x) : std::string("none"); };
    report(6, ok, "[JD] stays under uniform demand x1.5, [AG] moves under branch 2 + central x1.5",
           "JD shift " + show(uniform.jd_displacement) + " cells, AG shift " + show(shifted.ag_displacement) +
               " cells");
}

void criterion7(const Fixture& f) {
    // Margins of 35 s cover the largest possible dwell extension here
    // (max dwell 60 s against a nominal 30 s).
    LineDescription d = f.topology.description();
    for (Part p : {Part::Central, Part::Branch1, Part::Branch2})
        for (SegmentSpec& s : d.part(p)) s.min_run_time = s.run_time - 35.0;
    const LineTopology topo = build_line(d);
    const ControlParams ctl = f.config.controls(topo);
    double min_margin = std::numeric_limits<double>::infinity();
    for (const Segment& s : topo.segments()) min_margin = std::min(min_margin, s.margin());

    std::mt19937 rng(7);
    int points = 0;
    double worst = 0.0, extension = 0.0;
    for (const PhasePoint& p : f.diagram.points) {
        if (p.deadlock || p.m == 0) continue;
        TrainConfiguration cfg = seed_trains(topo, p.m, p.dm, f.config.run.rule, f.config.run.tie_branch);
        DepartureTable base;
        try {
            base = simulate(topo, cfg, ctl, kCounts);
        } catch (const DeadlockError&) {
            continue;
        }
        for (std::size_t j = 0; j < base.rows.size(); ++j) {
            if (!topo.segment(static_cast<int>(j)).platform) continue;
            for (const DepartureRecord& r : base.rows[j])
                extension = std::max(extension, r.departure - r.hold - r.arrival - ctl.nominal_dwell[j]);
        }
        std::bernoulli_distribution sign(0.5);
        cfg.initial_offsets.assign(static_cast<std::size_t>(topo.size()), 0.0);
        for (double& o : cfg.initial_offsets) o = sign(rng) ? 10.0 : -10.0;
        const double a = growth_rate(base, kTransient).period;
        const double b = growth_rate(simulate(topo, cfg, ctl, kCounts), kTransient).period;
        worst = std::max(worst, std::abs(a - b) / a);
        ++points;
    }
    const bool ok = points > 0 && extension <= min_margin && worst <= kOffsetTol;
    report(7, ok, "growth rate independent of initial offsets of +-10 s",
           std::to_string(points) + " points, min margin " + num(min_margin) + " s, max dwell extension " +
               num(extension) + " s, max relative difference " + num(worst));
}

void criterion8(const Fixture& f) {
    auto is = [](const PhasePoint& p, PhaseLabel a, PhaseLabel b) { return p.label == a || p.label == b; };
    int free_pairs = 0, congested_pairs = 0, violations = 0;
    for (const PhasePoint& p : f.diagram.points) {
        const PhasePoint* q = f.diagram.find(p.m + 1, p.dm);
        if (!q) continue;
        const double fp = p.estimate.f0, fq = q->estimate.f0;
        if (is(p, PhaseLabel::Ia, PhaseLabel::Ib) && is(*q, PhaseLabel::Ia, PhaseLabel::Ib)) {
            ++free_pairs;
            if (fq < fp * (1.0 - kMonotoneTol)) ++violations;
        }
        if (is(p, PhaseLabel::IIIa, PhaseLabel::IIIb) && is(*q, PhaseLabel::IIIa, PhaseLabel::IIIb)) {
            ++congested_pairs;
            if (fq > fp * (1.0 + kMonotoneTol)) ++violations;
        }
    }

    int demand_pairs = 0, demand_violations = 0;
    const PhaseDiagram* previous = &f.diagram;
    std::vector<PhaseDiagram> diagrams;
    diagrams.reserve(3);
    for (double scale : {1.25, 1.5, 2.0}) {
        ScenarioConfig c = f.config;
        c.demand = {scale, scale, scale};
        diagrams.push_back(run_sweep(c, c.topology()));
        for (const PhasePoint& q : diagrams.back().points) {
            const PhasePoint* p = previous->find(q.m, q.dm);
            if (!p || p->deadlock || q.deadlock) continue;
            ++demand_pairs;
            if (q.estimate.f0 > p->estimate.f0 * (1.0 + kMonotoneTol)) ++demand_violations;
        }
        previous = &diagrams.back();
    }
    const bool ok = free_pairs > 0 && congested_pairs > 0 && violations == 0 && demand_violations == 0;
    report(8, ok, "f0 rises with m in free flow, falls with m in congestion, falls with demand",
           std::to_string(free_pairs) + " free-flow and " + std::to_string(congested_pairs) +
               " congested m steps, " + std::to_string(violations) + " violations; " +
               std::to_string(demand_pairs) + " demand steps, " + std::to_string(demand_violations) +
               " violations");
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void criterion9() {
    const fs::path root = fs::temp_directory_path() / "metro_acceptance";
    fs::remove_all(root);
    const std::string cfg = kFixtures + "/t9.json";
    const std::vector<std::pair<std::string, std::string>> runs{
        {"simulate", "departures.csv"}, {"sweep", "phase_diagram.csv"}, {"boundaries", "boundaries.csv"},
        {"compare", "scenario_diff.csv"}};
    bool ok = true;
    std::string detail;
    for (const auto& [cmd, file] : runs) {
        std::string first;
        for (int rep = 0; rep < 3; ++rep) {
            const fs::path out = root / (cmd + std::to_string(rep));
            std::ostringstream o, e;
            const int code = run_cli({"metro", cmd, "--config", cfg, "--out", out.string()}, o, e);
            const std::string text = slurp(out / file);
            ok = ok && code == 0 && !text.empty();
            if (rep == 0)
                first = text;
            else
                ok = ok && text == first;
        }
        detail += (detail.empty() ? "" : ", ") + file + " " + std::to_string(first.size()) + " bytes";
    }
    fs::remove_all(root);
    report(9, ok, "repeated CLI runs write byte-identical files", detail);
}

}  // namespace

int main() {
    try {
        criterion1();
        criterion2();
        const Fixture f = load_fixture();
        criterion3(f);
        criterion4(f);
        criterion5(f);
        criterion6(f);
        criterion7(f);
        criterion8(f);
        criterion9();
    } catch (const std::exception& e) {
        std::printf("[FAIL] aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
