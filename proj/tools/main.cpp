#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "encsim/config.hpp"
#include "encsim/scenario.hpp"

namespace fs = std::filesystem;

namespace {

int write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "encsim: cannot write " << path << "\n";
        return 1;
    }
    out << contents;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic simulator of enclave memory side channels"};

    std::string scenario;
    std::string config_path;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::string format = "json";
    bool preset_testbed = false;
    bool list = false;

    app.add_option("--scenario", scenario, "Scenario name (see --list)");
    app.add_option("--config", config_path,
                   "Config file (key=value text or JSON); defaults to $ENCSIM_CONFIG");
    app.add_option("--seed", seed, "Run seed (reports are byte-identical per seed)");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--format", format, "Report format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    app.add_flag("--preset", preset_testbed, "Load the testbed machine preset");
    app.add_flag("--list", list, "List scenario names and exit");

    CLI11_PARSE(app, argc, argv);

    if (list) {
        for (const auto& name : encsim::scenario_names()) std::cout << name << "\n";
        return 0;
    }
    if (scenario.empty()) {
        std::cerr << "encsim: --scenario is required (try --list)\n";
        return 2;
    }
    if (!encsim::is_scenario(scenario)) {
        std::cerr << "encsim: unknown scenario '" << scenario << "'\n";
        return 3;
    }

    encsim::SimConfig cfg;
    try {
        if (preset_testbed) cfg = encsim::SimConfig::testbed();
        if (config_path.empty()) {
            if (const char* env = std::getenv("ENCSIM_CONFIG")) config_path = env;
        }
        if (!config_path.empty()) cfg = encsim::load_config_file(config_path);
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "encsim: config error: " << e.what() << "\n";
        return 4;
    }

    try {
        const encsim::ScenarioOutput out = encsim::run_named_scenario(scenario, cfg, seed);
        fs::create_directories(out_dir);
        int rc = 0;
        if (format == "json")
            rc |= write_file(fs::path(out_dir) / (scenario + "-report.json"), out.report_json);
        else
            rc |= write_file(fs::path(out_dir) / (scenario + "-report.csv"), out.report_csv);
        for (const auto& [name, contents] : out.tables)
            rc |= write_file(fs::path(out_dir) / name, contents);
        if (rc == 0)
            std::cout << scenario << ": reports written to " << out_dir << "\n";
        return rc;
    } catch (const std::exception& e) {
        std::cerr << "encsim: " << e.what() << "\n";
        return 5;
    }
}
