#include <iostream>

#include "CLI11.hpp"

#include "commands.hpp"

using namespace bimembrane::cli;

namespace {

struct CommonOptions {
    std::string config;
    std::string preset;
    std::vector<std::string> sets;
    std::string out;
    int threads = -1;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "JSON run configuration");
        app->add_option("--preset", preset, "Named preset (see `preset list`)");
        app->add_option("--set", sets, "Override a config key, e.g. --set params.lambda_u=0.6")->take_all();
        app->add_option("--out", out, "Output directory (fallback: $BIMEMBRANE_OUT)");
        app->add_option("--threads", threads, "Worker threads; 0 = sequential deterministic sweeps")
            ->check(CLI::NonNegativeNumber);
    }

    ConfigSources sources() const {
        ConfigSources s;
        if (!config.empty()) s.path = config;
        if (!preset.empty()) s.preset = preset;
        s.sets = sets;
        if (!out.empty()) s.out = out;
        if (threads >= 0) s.threads = threads;
        return s;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical lab for the constrained two-phase Bernoulli free-boundary problem"};
    app.require_subcommand(1);

    CommonOptions solve_opts, diag_opts, flat_opts, freq_opts, lin_opts;
    std::string diag_fields, flat_fields, freq_fields;

    CLI::App* solve = app.add_subcommand("solve", "Minimize the two-phase energy; writes u.grid, v.grid, summary.json");
    solve_opts.attach(solve);

    CLI::App* diagnose = app.add_subcommand("diagnose", "Free-boundary, flatness and frequency diagnostics");
    diag_opts.attach(diagnose);
    diagnose->add_option("--fields", diag_fields, "Directory holding u.grid and v.grid (default: output dir)");

    CLI::App* flatness = app.add_subcommand("flatness", "Flatness decay trace only");
    flat_opts.attach(flatness);
    flatness->add_option("--fields", flat_fields, "Directory holding u.grid and v.grid (default: output dir)");

    CLI::App* frequency = app.add_subcommand("frequency", "Truncated frequency trace only");
    freq_opts.attach(frequency);
    frequency->add_option("--fields", freq_fields, "Directory holding u.grid and v.grid (default: output dir)");

    CLI::App* linearized = app.add_subcommand("linearized", "Thin-limit membrane problems and refinement study");
    lin_opts.attach(linearized);

    CLI::App* preset = app.add_subcommand("preset", "Inspect the embedded presets");
    preset->require_subcommand(1);
    CLI::App* preset_list = preset->add_subcommand("list", "List preset names");
    std::string show_name;
    CLI::App* preset_show = preset->add_subcommand("show", "Print the resolved config of a preset");
    preset_show->add_option("name", show_name, "Preset name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    auto optional_dir = [](const std::string& s) { return s.empty() ? std::optional<std::string>{} : s; };
    try {
        if (*solve) return cmd_solve(resolve_config(solve_opts.sources()));
        if (*diagnose) {
            return cmd_diagnose(resolve_config(diag_opts.sources()), optional_dir(diag_fields), Scope::All);
        }
        if (*flatness) {
            return cmd_diagnose(resolve_config(flat_opts.sources()), optional_dir(flat_fields), Scope::Flatness);
        }
        if (*frequency) {
            return cmd_diagnose(resolve_config(freq_opts.sources()), optional_dir(freq_fields), Scope::Frequency);
        }
        if (*linearized) return cmd_linearized(resolve_config(lin_opts.sources()));
        if (*preset_list) return cmd_preset_list(std::cout);
        if (*preset_show) return cmd_preset_show(show_name, std::cout);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
