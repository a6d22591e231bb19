#include "metro/cli.hpp"

#include "metro/dynamics.hpp"
#include "metro/error.hpp"
#include "metro/format.hpp"
#include "metro/maxplus.hpp"
#include "metro/phase.hpp"
#include "metro/scenario.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

namespace metro {

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string config;
    std::string out = ".";
    std::string against;
    std::optional<long> counts;
    std::optional<double> transient;
    std::optional<int> parallel;
};

std::ofstream open_output(const Options& o, const std::string& name) {
    std::error_code ec;
    fs::create_directories(o.out, ec);
    if (ec) throw Error(ErrorCode::Io, o.out + ": " + ec.message());
    const fs::path path = fs::path(o.out) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, path.string() + ": cannot open for writing");
    return f;
}

void close_output(std::ofstream& f, const std::string& name) {
    f.close();
    if (!f) throw Error(ErrorCode::Io, name + ": write failed");
}

ScenarioConfig load(const Options& o, const std::string& path) {
    ScenarioConfig cfg = load_scenario(path);
    if (o.counts) {
        if (*o.counts < 1) throw Error(ErrorCode::ConfigParse, "--counts: must be >= 1");
        cfg.run.periods = *o.counts;
    }
    if (o.transient) {
        if (*o.transient < 0.0 || *o.transient >= 1.0)
            throw Error(ErrorCode::ConfigParse, "--transient: must lie in [0, 1)");
        cfg.run.transient_fraction = *o.transient;
    }
    if (o.parallel) {
        if (*o.parallel < 1) throw Error(ErrorCode::ConfigParse, "--parallel: must be >= 1");
        cfg.run.parallel = *o.parallel;
    }
    return cfg;
}

std::string label_text(const PhasePoint& p) {
    return p.label ? std::string(to_string(*p.label)) : "unclassifiable";
}

int cmd_validate(const Options& o, std::ostream& out) {
    const ScenarioConfig cfg = load(o, o.config);
    const LineTopology topo = cfg.topology();
    int platforms = 0;
    for (const Segment& s : topo.segments()) platforms += s.platform ? 1 : 0;
    out << "segments " << topo.size() << " (central " << topo.part_size(Part::Central) << ", branch1 "
        << topo.part_size(Part::Branch1) << ", branch2 " << topo.part_size(Part::Branch2) << ")\n";
    out << "platforms " << platforms << "\n";
    out << "capacity " << capacity(topo) << "\n";
    out << "sweep m " << cfg.m_values.front() << ".." << cfg.m_values.back() << ", dm "
        << cfg.dm_values.front() << ".." << cfg.dm_values.back() << "\n";
    if (cfg.variant_demand) cfg.variant_topology();
    if (const auto c = cfg.configuration(topo))
        out << "simulate m " << c->total() << ", dm " << c->imbalance(topo) << "\n";
    return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
    const ScenarioConfig cfg = load(o, o.config);
    const LineTopology topo = cfg.topology();
    const auto config = cfg.configuration(topo);
    if (!config) throw Error(ErrorCode::ConfigParse, "simulate: missing (needs m/dm or occupancy)");
    const DepartureTable table = simulate(topo, *config, cfg.controls(topo), cfg.run.periods);
    auto f = open_output(o, "departures.csv");
    write_departures_csv(f, table);
    close_output(f, "departures.csv");
    const GrowthRateEstimate est = growth_rate(table, cfg.run.transient_fraction);
    out << "h0_s " << format_number(est.h0) << "\n";
    out << "f0_tph " << format_number(est.f0_per_hour()) << "\n";
    out << "converged " << (est.converged ? 1 : 0) << "\n";
    return kExitOk;
}

PhaseDiagram run_sweep(const ScenarioConfig& cfg, const LineTopology& topo) {
    return sweep(topo, cfg.controls(topo), cfg.m_values, cfg.dm_values, cfg.run);
}

int cmd_sweep(const Options& o, std::ostream& out) {
    const ScenarioConfig cfg = load(o, o.config);
    const PhaseDiagram d = run_sweep(cfg, cfg.topology());
    auto f = open_output(o, "phase_diagram.csv");
    write_phase_csv(f, d);
    close_output(f, "phase_diagram.csv");
    std::map<std::string, int> counts;
    for (const PhasePoint& p : d.points) ++counts[label_text(p)];
    out << "points " << d.points.size() << "\n";
    for (const auto& [label, n] : counts) out << label << " " << n << "\n";
    return kExitOk;
}

void print_fit(std::ostream& out, const std::string& name, const Polyline& line) {
    out << name << " points " << line.points.size() << " slope " << format_number(line.slope)
        << " intercept " << format_number(line.intercept) << " r2 "
        << (line.r_squared ? format_number(*line.r_squared) : "nan") << "\n";
}

int cmd_boundaries(const Options& o, std::ostream& out) {
    const ScenarioConfig cfg = load(o, o.config);
    const Boundaries b = extract_boundaries(run_sweep(cfg, cfg.topology()));
    auto f = open_output(o, "boundaries.csv");
    write_boundaries_csv(f, b);
    close_output(f, "boundaries.csv");
    print_fit(out, "AG", b.ag);
    print_fit(out, "JD", b.jd);
    return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
    const ScenarioConfig base = load(o, o.config);
    const PhaseDiagram d0 = run_sweep(base, base.topology());
    PhaseDiagram d1;
    if (!o.against.empty()) {
        const ScenarioConfig other = load(o, o.against);
        d1 = run_sweep(other, other.topology());
    } else {
        d1 = run_sweep(base, base.variant_topology());
    }
    const ScenarioDiff diff = compare_scenarios(d0, d1);
    auto f = open_output(o, "scenario_diff.csv");
    f << "m,dm,delta_f0_tph,base_phase,variant_phase\n";
    for (std::size_t i = 0; i < d0.points.size(); ++i) {
        const PhasePoint& p = d0.points[i];
        f << p.m << ',' << p.dm << ',' << format_number(diff.frequency_delta.at({p.m, p.dm})) << ','
          << label_text(p) << ',' << label_text(d1.points[i]) << '\n';
    }
    close_output(f, "scenario_diff.csv");
    auto shift = [](const std::optional<double>& x) { return x ? format_number(*x) : std::string("nan"); };
    out << "AG displacement " << shift(diff.ag_displacement) << " moved " << (diff.ag_moved ? 1 : 0) << "\n";
    out << "JD displacement " << shift(diff.jd_displacement) << " moved " << (diff.jd_moved ? 1 : 0) << "\n";
    out << "label changes " << diff.label_changes.size() << "\n";
    return kExitOk;
}

struct OracleRow {
    int m = 0;
    int dm = 0;
    std::string status = "ok";
    double entity = 0.0;  // max |departure difference|, s
    double period = 0.0;
    double cycle = 0.0;
    double karp_howard = 0.0;
};

OracleRow oracle_point(const LineTopology& topo, const ControlParams& ctl, const TrainConfiguration& c,
                       const SweepOptions& run) {
    OracleRow row;
    row.m = c.total();
    row.dm = c.imbalance(topo);
    if (row.m == 0) {
        row.status = "empty";
        return row;
    }
    int deadlocks = 0;
    DepartureTable a, b;
    std::optional<CycleTimeResult> karp, howard;
    try {
        a = simulate(topo, c, ctl, run.periods);
    } catch (const DeadlockError&) {
        ++deadlocks;
    }
    try {
        b = entity_oracle_simulate(topo, c, ctl, run.periods);
    } catch (const DeadlockError&) {
        ++deadlocks;
    }
    try {
        const MaxPlusMatrix mat = assemble_matrix(topo, c);
        karp = cycle_time(mat);
        howard = howard_cycle_time(mat);
    } catch (const DeadlockError&) {
        ++deadlocks;
    }
    if (deadlocks == 3) {
        row.status = "deadlock";
        return row;
    }
    if (deadlocks > 0) {
        row.status = "mismatch";
        return row;
    }
    for (std::size_t j = 0; j < a.rows.size(); ++j) {
        if (a.rows[j].size() != b.rows[j].size()) {
            row.status = "mismatch";
            row.entity = std::numeric_limits<double>::infinity();
            break;
        }
        for (std::size_t i = 0; i < a.rows[j].size(); ++i)
            row.entity = std::max(row.entity, std::abs(a.rows[j][i].departure - b.rows[j][i].departure));
    }
    row.period = growth_rate(a, run.transient_fraction).period;
    row.cycle = karp->growth_rate;
    row.karp_howard = std::abs(karp->growth_rate - howard->growth_rate);
    return row;
}

int cmd_oracle_check(const Options& o, std::ostream& out) {
    const ScenarioConfig cfg = load(o, o.config);
    const LineTopology topo = scale_demand(cfg.topology(), 0.0, 0.0, 0.0);
    const ControlParams ctl = make_controls(topo, cfg.reference_headway, false);

    std::vector<TrainConfiguration> configs;
    if (auto c = cfg.configuration(topo)) {
        configs.push_back(*c);
    } else {
        for (int m : cfg.m_values)
            for (int dm : cfg.dm_values) {
                try {
                    configs.push_back(seed_trains(topo, m, dm, cfg.run.rule, cfg.run.tie_branch));
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::InfeasibleSeed) throw;
                }
            }
    }

    auto f = open_output(o, "oracle_check.csv");
    f << "m,dm,status,entity_max_abs_s,period_s,cycle_time_s,karp_howard_abs_s\n";
    double worst_entity = 0.0, worst_cycle = 0.0, worst_kh = 0.0;
    bool mismatch = false;
    for (const TrainConfiguration& c : configs) {
        const OracleRow r = oracle_point(topo, ctl, c, cfg.run);
        f << r.m << ',' << r.dm << ',' << r.status << ',' << format_number(r.entity) << ','
          << format_number(r.period) << ',' << format_number(r.cycle) << ',' << format_number(r.karp_howard)
          << '\n';
        mismatch |= r.status == "mismatch";
        worst_entity = std::max(worst_entity, r.entity);
        worst_cycle = std::max(worst_cycle, std::abs(r.period - r.cycle));
        worst_kh = std::max(worst_kh, r.karp_howard);
    }
    close_output(f, "oracle_check.csv");
    out << "points " << configs.size() << "\n";
    out << "simulate vs entity max_abs_s " << format_number(worst_entity) << "\n";
    out << "simulate vs cycle_time max_abs_s " << format_number(worst_cycle) << "\n";
    out << "karp vs howard max_abs_s " << format_number(worst_kh) << "\n";
    const bool ok = !mismatch && worst_entity == 0.0 && worst_cycle < 1e-6 && worst_kh < 1e-9;
    out << (ok ? "agreement" : "DISAGREEMENT") << "\n";
    return ok ? kExitOk : kExitCheckFailed;
}

int exit_code(ErrorCode code) {
    switch (code) {
    case ErrorCode::ConfigParse:
    case ErrorCode::NonPositiveRunTime:
    case ErrorCode::MarginViolation:
    case ErrorCode::SaturatedPlatform:
    case ErrorCode::EmptyPart:
    case ErrorCode::MissingPlatform:
    case ErrorCode::InvalidParameter: return kExitConfig;
    case ErrorCode::Io: return kExitIo;
    case ErrorCode::InfeasibleSeed: return kExitInfeasible;
    default: return kExitRuntime;
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Metro line with a junction: simulation, max-plus oracle and traffic phases",
                 args.empty() ? "metro" : args.front()};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Scenario JSON")->required();
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--counts", o.counts, "Alternation periods to simulate");
        sub->add_option("--transient", o.transient, "Fraction of counts discarded as transient");
        sub->add_option("--parallel", o.parallel, "Sweep worker threads");
        return sub;
    };
    using Handler = int (*)(const Options&, std::ostream&);
    std::vector<std::pair<CLI::App*, Handler>> commands{
        {common(app.add_subcommand("validate", "Check a config and summarize the line")), cmd_validate},
        {common(app.add_subcommand("simulate", "Departure table of one configuration")), cmd_simulate},
        {common(app.add_subcommand("sweep", "Phase diagram over the (m, dm) grid")), cmd_sweep},
        {common(app.add_subcommand("boundaries", "[AG] and [JD] phase boundaries")), cmd_boundaries},
        {common(app.add_subcommand("compare", "Diff of two demand scenarios")), cmd_compare},
        {common(app.add_subcommand("oracle-check", "Simulation vs event oracle vs max-plus")),
         cmd_oracle_check},
    };
    commands[4].first->add_option("--against", o.against, "Variant scenario (default: the config's variant)");

    std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rest.begin(), rest.end());
    try {
        app.parse(rest);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        for (const auto& [sub, handler] : commands)
            if (sub->parsed()) return handler(o, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace metro
