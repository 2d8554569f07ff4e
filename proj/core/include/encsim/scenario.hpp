#pragma once

#include <string>
#include <utility>
#include <vector>

#include "encsim/config.hpp"

namespace encsim {

// One named experiment's machine-readable results. `report_json` is the
// canonical report; `tables` are auxiliary CSV files (histograms, table
// scenarios) keyed by file name.
struct ScenarioOutput {
    std::string scenario;
    std::uint64_t seed = 0;
    std::string report_json;
    std::string report_csv;
    std::vector<std::pair<std::string, std::string>> tables;
};

const std::vector<std::string>& scenario_names();
bool is_scenario(const std::string& name);

// Runs one scenario end to end (baseline + attacked run, recovery,
// scoring). Scenario knobs come from cfg.extra ("scenario.*" keys).
ScenarioOutput run_named_scenario(const std::string& name, const SimConfig& cfg,
                                  std::uint64_t seed);

}  // namespace encsim
