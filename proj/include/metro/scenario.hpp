#pragma once

#include "metro/control.hpp"
#include "metro/phase.hpp"
#include "metro/topology.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace metro {

// Multipliers on every arrival rate of a part.
struct DemandScale {
    double central = 1.0;
    double branch1 = 1.0;
    double branch2 = 1.0;
};

struct ScenarioConfig {
    LineDescription line;
    DemandScale demand;
    std::optional<DemandScale> variant_demand;  // second scenario for compare

    double reference_headway = 300.0;
    bool compensation = true;

    std::vector<int> m_values;
    std::vector<int> dm_values;
    SweepOptions run;

    // Single run for simulate / oracle-check: either (m, dm) or an explicit
    // occupancy.
    std::optional<int> sim_m;
    std::optional<int> sim_dm;
    std::vector<bool> occupancy;
    Branch first_branch = Branch::One;
    std::vector<double> initial_offsets;

    // Line with the demand scale applied. Errors name the config path.
    LineTopology topology() const;
    LineTopology variant_topology() const;
    ControlParams controls(const LineTopology& topology) const;
    // Configuration of the single run, if the config defines one.
    std::optional<TrainConfiguration> configuration(const LineTopology& topology) const;
};

// Parses the JSON scenario; every error names the offending path.
// Throws ConfigParse.
ScenarioConfig parse_scenario(std::string_view text);
// Throws Io, ConfigParse.
ScenarioConfig load_scenario(const std::filesystem::path& path);

}  // namespace metro
