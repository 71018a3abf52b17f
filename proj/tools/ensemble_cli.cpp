// Command-line front end: simulate, compare, verify-axioms, list-scenarios.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ensemble/cli.hpp"

namespace {

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string format;
};

void add_common(CLI::App* cmd, Options& o, bool needs_config) {
    auto* c = cmd->add_option("--config", o.config, "run configuration (key = value)");
    if (needs_config) c->required();
    cmd->add_option("--out", o.out, "output directory, overrides output.dir");
    cmd->add_option("--seed", o.seed, "random seed, overrides seed");
    cmd->add_option("--format", o.format, "snapshot format")->check(CLI::IsMember({"csv", "bin"}));
}

int execute(ens::Mode mode, const Options& o) {
    std::string text;
    if (!o.config.empty()) {
        std::ifstream is(o.config);
        if (!is) {
            std::cerr << "error: cannot read config '" << o.config << "'\n";
            return ens::exit_config;
        }
        std::ostringstream ss;
        ss << is.rdbuf();
        text = ss.str();
    }
    ens::RunConfig cfg;
    try {
        cfg = ens::parse_config(text, mode);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ens::exit_config;
    }
    if (!o.out.empty()) cfg.output_dir = o.out;
    if (o.seed) cfg.seed = *o.seed;
    if (!o.format.empty()) cfg.format = o.format == "bin" ? ens::SnapshotFormat::binary : ens::SnapshotFormat::csv;
    return ens::run(cfg);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ensemble Hamiltonian simulator"};
    app.require_subcommand(1);

    Options sim, cmp, ax;
    auto* s = app.add_subcommand("simulate", "evolve a scenario and write its trajectory");
    add_common(s, sim, true);
    auto* c = app.add_subcommand("compare", "run hydrodynamic and reference solvers side by side");
    add_common(c, cmp, true);
    auto* a = app.add_subcommand("verify-axioms", "run the axiom suite and its controls");
    add_common(a, ax, false);
    app.add_subcommand("list-scenarios", "print the preset scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ens::exit_config;
    }
    if (s->parsed()) return execute(ens::Mode::simulate, sim);
    if (c->parsed()) return execute(ens::Mode::compare, cmp);
    if (a->parsed()) return execute(ens::Mode::verify_axioms, ax);
    return ens::list_scenarios(std::cout);
}
