#include "metro/scenario.hpp"

#include "metro/error.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

namespace metro {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw Error(ErrorCode::ConfigParse, path + ": " + why);
}

void only_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        bool known = false;
        for (std::string_view k : keys) known |= key == k;
        if (!known) fail(path.empty() ? key : path + "." + key, "unknown key");
    }
}

std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "must be finite");
    return x;
}

int integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
}

bool boolean(const json& v, const std::string& path) {
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
}

void read_number(const json& obj, const std::string& path, std::string_view key, double& out) {
    if (obj.contains(key)) out = number(obj.at(key), join(path, key));
}

Branch branch(const json& v, const std::string& path) {
    const int b = integer(v, path);
    if (b != 1 && b != 2) fail(path, "must be 1 or 2");
    return b == 1 ? Branch::One : Branch::Two;
}

PlatformParams read_platform(const json& v, const std::string& path, PlatformParams pf) {
    only_keys(v, path, {"lambda", "alpha", "min_dwell", "max_dwell"});
    read_number(v, path, "lambda", pf.arrival_rate);
    read_number(v, path, "alpha", pf.exchange_rate);
    read_number(v, path, "min_dwell", pf.min_dwell);
    read_number(v, path, "max_dwell", pf.max_dwell);
    return pf;
}

SegmentSpec read_segment(const json& v, const std::string& path, SegmentSpec spec,
                         const PlatformParams& platform_defaults) {
    only_keys(v, path, {"run_time", "min_run_time", "safe_separation", "direction", "platform"});
    read_number(v, path, "run_time", spec.run_time);
    read_number(v, path, "min_run_time", spec.min_run_time);
    read_number(v, path, "safe_separation", spec.safe_separation);
    if (v.contains("direction")) {
        const json& d = v.at("direction");
        if (d == "outbound")
            spec.direction = Direction::Outbound;
        else if (d == "inbound")
            spec.direction = Direction::Inbound;
        else
            fail(join(path, "direction"), "expected \"outbound\" or \"inbound\"");
    }
    if (v.contains("platform")) {
        const json& p = v.at("platform");
        const std::string at = join(path, "platform");
        if (p.is_boolean()) {
            if (p.get<bool>()) spec.platform = platform_defaults;
        } else {
            spec.platform = read_platform(p, at, platform_defaults);
        }
    }
    return spec;
}

LineDescription read_line(const json& v) {
    const std::string path = "line";
    only_keys(v, path, {"segment_defaults", "platform_defaults", "central", "branch1", "branch2"});
    SegmentSpec seg_defaults;
    PlatformParams pf_defaults;
    if (v.contains("platform_defaults"))
        pf_defaults = read_platform(v.at("platform_defaults"), "line.platform_defaults", pf_defaults);
    if (v.contains("segment_defaults")) {
        const json& d = v.at("segment_defaults");
        only_keys(d, "line.segment_defaults", {"run_time", "min_run_time", "safe_separation"});
        seg_defaults = read_segment(d, "line.segment_defaults", seg_defaults, pf_defaults);
    }
    LineDescription line;
    for (Part p : {Part::Central, Part::Branch1, Part::Branch2}) {
        const std::string name(to_string(p));
        const std::string at = join(path, name);
        if (!v.contains(name)) fail(at, "missing");
        const json& arr = v.at(name);
        if (!arr.is_array()) fail(at, "expected an array of segments");
        for (std::size_t i = 0; i < arr.size(); ++i)
            line.part(p).push_back(
                read_segment(arr[i], at + "[" + std::to_string(i) + "]", seg_defaults, pf_defaults));
    }
    return line;
}

DemandScale read_scale(const json& v, const std::string& path) {
    only_keys(v, path, {"central", "branch1", "branch2"});
    DemandScale s;
    read_number(v, path, "central", s.central);
    read_number(v, path, "branch1", s.branch1);
    read_number(v, path, "branch2", s.branch2);
    for (auto [key, x] : {std::pair{"central", s.central}, {"branch1", s.branch1}, {"branch2", s.branch2}})
        if (x < 0.0) fail(join(path, key), "must be >= 0");
    return s;
}

std::vector<int> read_range(const json& v, const std::string& path) {
    std::vector<int> out;
    if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i)
            out.push_back(integer(v[i], path + "[" + std::to_string(i) + "]"));
    } else {
        only_keys(v, path, {"min", "max"});
        if (!v.contains("min") || !v.contains("max")) fail(path, "needs min and max");
        const int lo = integer(v.at("min"), join(path, "min"));
        const int hi = integer(v.at("max"), join(path, "max"));
        for (int x = lo; x <= hi; ++x) out.push_back(x);
    }
    if (out.empty()) fail(path, "range is empty");
    return out;
}

void read_run(const json& v, SweepOptions& run) {
    const std::string path = "run";
    only_keys(v, path, {"counts", "transient", "parallel", "seed_rule", "tie_branch", "probe_run_time"});
    if (v.contains("counts")) {
        const int k = integer(v.at("counts"), "run.counts");
        if (k < 1) fail("run.counts", "must be >= 1");
        run.periods = k;
    }
    if (v.contains("transient")) {
        run.transient_fraction = number(v.at("transient"), "run.transient");
        if (run.transient_fraction < 0.0 || run.transient_fraction >= 1.0)
            fail("run.transient", "must lie in [0, 1)");
    }
    if (v.contains("parallel")) {
        run.parallel = integer(v.at("parallel"), "run.parallel");
        if (run.parallel < 1) fail("run.parallel", "must be >= 1");
    }
    if (v.contains("seed_rule")) {
        const json& r = v.at("seed_rule");
        if (r == "even_spacing")
            run.rule = SeedRule::EvenSpacing;
        else if (r == "packed")
            run.rule = SeedRule::Packed;
        else
            fail("run.seed_rule", "expected \"even_spacing\" or \"packed\"");
    }
    if (v.contains("tie_branch")) run.tie_branch = branch(v.at("tie_branch"), "run.tie_branch");
    if (v.contains("probe_run_time")) {
        run.probe_run_time = number(v.at("probe_run_time"), "run.probe_run_time");
        if (run.probe_run_time < 0.0) fail("run.probe_run_time", "must be >= 0");
    }
}

void read_simulate(const json& v, ScenarioConfig& cfg) {
    const std::string path = "simulate";
    only_keys(v, path, {"m", "dm", "occupancy", "first_branch", "initial_offsets"});
    if (v.contains("m")) cfg.sim_m = integer(v.at("m"), "simulate.m");
    if (v.contains("dm")) cfg.sim_dm = integer(v.at("dm"), "simulate.dm");
    if (v.contains("occupancy")) {
        const json& occ = v.at("occupancy");
        if (!occ.is_array()) fail("simulate.occupancy", "expected an array of 0/1");
        for (std::size_t i = 0; i < occ.size(); ++i) {
            const int b = integer(occ[i], "simulate.occupancy[" + std::to_string(i) + "]");
            if (b != 0 && b != 1) fail("simulate.occupancy[" + std::to_string(i) + "]", "must be 0 or 1");
            cfg.occupancy.push_back(b == 1);
        }
    }
    if (v.contains("first_branch")) cfg.first_branch = branch(v.at("first_branch"), "simulate.first_branch");
    if (v.contains("initial_offsets")) {
        const json& off = v.at("initial_offsets");
        if (!off.is_array()) fail("simulate.initial_offsets", "expected an array of numbers");
        for (std::size_t i = 0; i < off.size(); ++i)
            cfg.initial_offsets.push_back(number(off[i], "simulate.initial_offsets[" + std::to_string(i) + "]"));
    }
    if (!cfg.occupancy.empty() && (cfg.sim_m || cfg.sim_dm))
        fail(path, "give either m/dm or occupancy, not both");
    if (cfg.sim_m.has_value() != cfg.sim_dm.has_value()) fail(path, "m and dm go together");
}

LineTopology build_scaled(const LineDescription& line, const DemandScale& s, const std::string& scale_path) {
    LineTopology base;
    try {
        base = build_line(line);
    } catch (const Error& e) {
        throw Error(e.code(), "line." + e.detail());
    }
    try {
        return scale_demand(base, s.central, s.branch1, s.branch2);
    } catch (const Error& e) {
        throw Error(e.code(), scale_path + ": " + e.detail());
    }
}

}  // namespace

LineTopology ScenarioConfig::topology() const { return build_scaled(line, demand, "demand_scale"); }

LineTopology ScenarioConfig::variant_topology() const {
    if (!variant_demand) throw Error(ErrorCode::ConfigParse, "variant.demand_scale: missing");
    return build_scaled(line, *variant_demand, "variant.demand_scale");
}

ControlParams ScenarioConfig::controls(const LineTopology& topology) const {
    return make_controls(topology, reference_headway, compensation);
}

std::optional<TrainConfiguration> ScenarioConfig::configuration(const LineTopology& topology) const {
    TrainConfiguration c;
    if (!occupancy.empty()) {
        c = make_configuration(topology, occupancy, first_branch);
    } else if (sim_m) {
        c = seed_trains(topology, *sim_m, *sim_dm, run.rule, run.tie_branch);
    } else {
        return std::nullopt;
    }
    if (!initial_offsets.empty()) {
        if (initial_offsets.size() != c.occupancy.size())
            throw Error(ErrorCode::ConfigParse, "simulate.initial_offsets: expected " +
                                                    std::to_string(c.occupancy.size()) + " entries");
        c.initial_offsets = initial_offsets;
    }
    return c;
}

ScenarioConfig parse_scenario(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        fail("(document)", std::string("malformed JSON: ") + e.what());
    }
    only_keys(doc, "", {"line", "demand_scale", "variant", "controls", "sweep", "run", "simulate"});
    if (!doc.contains("line")) fail("line", "missing");

    ScenarioConfig cfg;
    cfg.line = read_line(doc.at("line"));
    if (doc.contains("demand_scale")) cfg.demand = read_scale(doc.at("demand_scale"), "demand_scale");
    if (doc.contains("variant")) {
        const json& v = doc.at("variant");
        only_keys(v, "variant", {"demand_scale"});
        if (!v.contains("demand_scale")) fail("variant.demand_scale", "missing");
        cfg.variant_demand = read_scale(v.at("demand_scale"), "variant.demand_scale");
    }
    if (doc.contains("controls")) {
        const json& c = doc.at("controls");
        only_keys(c, "controls", {"reference_headway", "compensation"});
        read_number(c, "controls", "reference_headway", cfg.reference_headway);
        if (cfg.reference_headway <= 0.0) fail("controls.reference_headway", "must be > 0");
        if (c.contains("compensation")) cfg.compensation = boolean(c.at("compensation"), "controls.compensation");
    }
    if (doc.contains("run")) read_run(doc.at("run"), cfg.run);
    if (doc.contains("simulate")) read_simulate(doc.at("simulate"), cfg);

    // Validates the line before ranges default to its size.
    const LineTopology topo = cfg.topology();
    if (doc.contains("sweep")) {
        const json& s = doc.at("sweep");
        only_keys(s, "sweep", {"m", "dm"});
        if (s.contains("m")) cfg.m_values = read_range(s.at("m"), "sweep.m");
        if (s.contains("dm")) cfg.dm_values = read_range(s.at("dm"), "sweep.dm");
    }
    if (cfg.m_values.empty())
        for (int m = 0; m <= capacity(topo); ++m) cfg.m_values.push_back(m);
    if (cfg.dm_values.empty()) {
        const int span = topo.part_size(Part::Branch1) + topo.part_size(Part::Branch2);
        for (int dm = -span; dm <= span; ++dm) cfg.dm_values.push_back(dm);
    }
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, path.string() + ": cannot open config");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

}  // namespace metro
