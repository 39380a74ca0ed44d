// shl_cli: run named scenarios, list them, or check a config file.
#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "shl/harness.hpp"

namespace {

struct Flags {
    std::string config, seed, samples, out, format, scenario, zeta, ell, domain, grid, t_list;
};

void add_flags(CLI::App* s, Flags& f) {
    s->add_option("--config", f.config, "config file (key = value with [section] headers)");
    s->add_option("--seed", f.seed, "master seed (u64); falls back to SHL_SEED");
    s->add_option("--samples", f.samples, "Monte Carlo samples");
    s->add_option("--out", f.out, "output directory");
    s->add_option("--format", f.format, "csv or json");
    s->add_option("--scenario", f.scenario, "scenario name");
    s->add_option("--zeta", f.zeta, "field variance");
    s->add_option("--ell", f.ell, "correlation length");
    s->add_option("--domain", f.domain, "interval, ball, ring or all");
    s->add_option("--grid", f.grid, "noise grid nodes");
    s->add_option("--t-list", f.t_list, "comma-separated times");
}

shl::RunConfig build_config(const CLI::App* s, const Flags& f) {
    shl::RunConfig c = s->count("--config") ? shl::load_config(f.config) : shl::RunConfig{};
    const std::pair<const char*, const char*> map[] = {
        {"--seed", "run.seed"},       {"--samples", "run.samples"}, {"--out", "run.out"},
        {"--format", "run.format"},   {"--scenario", "run.scenario"}, {"--zeta", "kernel.zeta"},
        {"--ell", "kernel.ell"},      {"--domain", "domain.kind"},  {"--grid", "solver.grid"},
        {"--t-list", "solver.t_list"}};
    const std::string* values[] = {&f.seed, &f.samples, &f.out, &f.format, &f.scenario,
                                   &f.zeta, &f.ell,     &f.domain, &f.grid, &f.t_list};
    for (std::size_t i = 0; i < std::size(map); ++i)
        if (s->count(map[i].first)) shl::set_key(c, map[i].second, *values[i]);
    if (!c.seed_set)
        if (const char* env = std::getenv("SHL_SEED")) {
            try {
                shl::set_key(c, "run.seed", env);
            } catch (const shl::ConfigError& e) {
                throw shl::ConfigError("SHL_SEED", std::string("SHL_SEED: ") + e.what());
            }
        }
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic heat equation experiments"};
    app.require_subcommand(1);
    Flags run_flags, val_flags;
    bool as_json = false;
    CLI::App* run = app.add_subcommand("run", "run a scenario and write outputs plus manifest.json");
    CLI::App* list = app.add_subcommand("list", "list scenarios");
    CLI::App* val = app.add_subcommand("validate-config", "parse and validate a config without running");
    add_flags(run, run_flags);
    add_flags(val, val_flags);
    list->add_flag("--json", as_json, "machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help();
        return shl::exit_config;
    }

    if (list->parsed()) {
        if (as_json) std::cout << shl::list_scenarios_json().dump(2) << "\n";
        else std::cout << shl::list_scenarios_text();
        return shl::exit_pass;
    }

    const bool running = run->parsed();
    shl::RunConfig cfg;
    try {
        cfg = build_config(running ? run : val, running ? run_flags : val_flags);
        shl::validate(cfg);
    } catch (const shl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return shl::exit_config;
    }
    if (!running) {
        std::cout << "config ok: " << shl::config_echo(cfg).dump() << "\n";
        return shl::exit_pass;
    }

    const shl::RunResult r = shl::run_scenario(cfg);
    for (const auto& c : r.checks) std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "\n";
    if (!r.error.empty()) std::cerr << "error: " << r.error << "\n";
    if (!r.manifest.empty()) std::cout << "manifest: " << r.manifest.string() << "\n";
    return r.exit_code;
}
