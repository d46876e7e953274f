// thermoflow: one subcommand per scenario.
//   thermoflow <scenario> --config run.json --out DIR [--seed N] [--threads N]
// Exit codes: 0 ok, 1 numerical failure (partial artifacts kept), 2 invalid
// configuration (nothing written), 3 a scenario check failed.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "thermoflow/runner.hpp"

namespace tc = thermoflow::cli;

int main(int argc, char** argv) {
    CLI::App app{"thermostat flow experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tc::tool_version);

    struct Flags {
        std::string config, out;
        std::optional<std::uint64_t> seed;
        int threads = 1;
    };
    std::map<std::string, Flags> flags;
    for (const auto& name : tc::scenario_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " scenario");
        auto& f = flags[name];
        sub->add_option("--config", f.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", f.out, "output directory")->required();
        sub->add_option("--seed", f.seed, "overrides the config seed");
        sub->add_option("--threads", f.threads, "worker threads")->check(CLI::Range(1, 256));
    }
    CLI11_PARSE(app, argc, argv);

    const std::string scenario = app.get_subcommands().front()->get_name();
    const Flags& f = flags[scenario];
    tc::RunConfig rc;
    try {
        const std::filesystem::path cfg_path(f.config);
        std::string text = tc::read_text(cfg_path);
        rc = tc::load_config(text, scenario, cfg_path.parent_path().empty() ? "." : cfg_path.parent_path());
        if (f.seed) {
            rc.seed = *f.seed;
            rc.resolved["seed"] = *f.seed;
        }
    } catch (const tc::ConfigError& e) {
        std::cerr << f.config << ": " << e.what() << "\n";
        return 2;
    }

    const auto res = tc::execute(rc, f.threads);
    try {
        tc::write_artifacts(f.out, res.artifacts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cout << res.summary.dump(2) << "\n";
    if (res.status == 1) std::cerr << "run failed; partial artifacts in " << f.out << "\n";
    if (res.status == 3) std::cerr << "scenario checks failed; see " << f.out << "/summary.json\n";
    return res.status;
}
