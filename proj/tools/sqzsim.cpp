// sqzsim: command-line front end for the squeezed-light simulation library.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sqzlab/sqzlab.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_invalid = 1;
constexpr int exit_acceptance = 2;

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    double scale = 1.0;
    bool quiet = false;
};

sqz::ScenarioConfig effective_config(const Globals& g) {
    sqz::ScenarioConfig c = g.config_path.empty() ? sqz::ScenarioConfig{} : sqz::load_config(g.config_path);
    if (g.seed) c.seed = *g.seed;
    if (g.scale != 1.0) sqz::apply_scale(c, g.scale);
    sqz::validate(c);
    return c;
}

void emit(const Globals& g, const sqz::CommandOutput& out) {
    for (const auto& f : out.files) {
        const auto path = std::filesystem::path(g.out_dir) / f.name;
        sqz::write_text(path, f.content);
        if (!g.quiet) std::cout << "wrote " << path.string() << "\n";
    }
    if (!g.quiet) std::cout << out.summary.dump(2) << "\n";
}

double parse_target(const std::string& text) {
    if (text == "0") return 0.0;
    if (text == "pi") return std::numbers::pi;
    throw sqz::Error(sqz::ErrorKind::config, "--target must be 0 or pi, got '" + text + "'");
}

std::set<int> parse_only(const std::string& text) {
    std::set<int> ids;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        int id = 0;
        try {
            id = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || id < 1 || id > sqz::acceptance_count)
            throw sqz::Error(sqz::ErrorKind::config, "--only expects check numbers 1-" +
                                                         std::to_string(sqz::acceptance_count) + ", got '" + item + "'");
        ids.insert(id);
    }
    return ids;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Squeezed-light source simulator: phase sweeps, spectra, zero-span traces, locks and fits"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("sqzsim ") + sqz::tool_version);

    Globals g;
    std::uint64_t seed_value = 0;
    app.add_option("--config", g.config_path, "JSON scenario configuration (defaults apply to missing fields)")
        ->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed_value, "root seed, overrides the configuration");
    app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
    app.add_option("--scale", g.scale, "multiplies run durations and average counts")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_flag("--quiet", g.quiet, "suppress console output");

    auto* sweep = app.add_subcommand("sweep-phase", "zero-span sweep of the LO phase at the analysis frequency");
    auto* spec = app.add_subcommand("spectrum", "stitched noise spectra of the SQL, squeezed and anti-squeezed quadratures");
    auto* zs = app.add_subcommand("zero-span", "RMS-averaged zero-span traces at one center frequency");
    double center = 70.0;
    zs->add_option("--center", center, "center frequency, Hz")->check(CLI::PositiveNumber)->capture_default_str();
    auto* lock = app.add_subcommand("lock-demo", "single-photon pump-phase lock with count-rate trace");
    std::string target = "0";
    lock->add_option("--target", target, "lock point: 0 or pi")->capture_default_str();
    auto* fit = app.add_subcommand("fit", "jitter and operating-point fits from a CSV of squeezing pairs");
    std::string input;
    fit->add_option("input", input, "CSV rows: label,squeezing_db,anti_squeezing_db[,frequency_hz]")
        ->required()
        ->check(CLI::ExistingFile);
    auto* stab = app.add_subcommand("stability", "long squeezing hold at a fixed analysis frequency");
    auto* val = app.add_subcommand("validate", "run the acceptance checks");
    std::string tolerance_path, only;
    val->add_option("--tolerances", tolerance_path, "JSON overrides for acceptance tolerances")
        ->check(CLI::ExistingFile);
    val->add_option("--only", only, "comma-separated check numbers");
    auto* show = app.add_subcommand("show-config", "print the effective configuration as JSON");
    for (auto* sub : {sweep, spec, zs, lock, fit, stab, val, show}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_invalid;
    }
    if (seed_opt->count() > 0) g.seed = seed_value;

    try {
        const auto config = effective_config(g);
        if (*show) {
            std::cout << sqz::to_json(config).dump(2) << "\n";
        } else if (*sweep) {
            emit(g, sqz::cmd_sweep_phase(config));
        } else if (*spec) {
            emit(g, sqz::cmd_spectrum(config));
        } else if (*zs) {
            emit(g, sqz::cmd_zero_span(config, center));
        } else if (*lock) {
            emit(g, sqz::cmd_lock_demo(config, parse_target(target)));
        } else if (*fit) {
            emit(g, sqz::cmd_fit(config, sqz::read_text(input), input));
        } else if (*stab) {
            emit(g, sqz::cmd_stability(config));
        } else if (*val) {
            const auto tol = tolerance_path.empty() ? sqz::Tolerances{} : sqz::load_tolerances(tolerance_path);
            const auto ids = parse_only(only);
            const auto results = sqz::run_acceptance(config, tol, ids, [&](const sqz::CheckResult& r) {
                if (!g.quiet) std::cout << sqz::format_check(r) << std::endl;
            });
            const auto report = sqz::acceptance_json(results);
            const auto path = std::filesystem::path(g.out_dir) / "validate.json";
            sqz::write_text(path, sqz::format_json(report, sqz::make_meta("validate", config)));
            if (!g.quiet) std::cout << (report["passed"].get<bool>() ? "all checks passed" : "acceptance FAILED") << "\n";
            return report["passed"].get<bool>() ? exit_ok : exit_acceptance;
        }
    } catch (const sqz::Error& e) {
        std::cerr << "sqzsim: " << sqz::to_string(e.kind()) << ": " << e.what() << "\n";
        return exit_invalid;
    } catch (const std::exception& e) {
        std::cerr << "sqzsim: " << e.what() << "\n";
        return exit_invalid;
    }
    return exit_ok;
}
