// sns <verb> --config <path> --out <dir> [--workers N] [--seed S]
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 bad config or usage,
// 3 integration aborted or other runtime failure.

#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "sns.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Stochastic Navier-Stokes Galerkin toolkit"};
    app.require_subcommand(1, 1);
    std::string config, out;
    std::optional<std::size_t> workers;
    std::optional<std::uint64_t> seed;
    for (const auto& verb : sns::io::verbs()) {
        auto* sub = app.add_subcommand(verb);
        sub->add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory")->required();
        sub->add_option("--workers", workers, "worker threads; SNS_WORKERS overrides");
        sub->add_option("--seed", seed, "overrides ensemble.seed");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    const std::string verb = app.get_subcommands().front()->get_name();

    sns::io::RunConfig cfg;
    try {
        cfg = sns::io::load_config(config);
        sns::io::apply_overrides(cfg, seed, workers);
    } catch (const sns::io::ConfigError& e) {
        std::cerr << "config error:\n" << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    try {
        const auto r = sns::io::run_command(verb, cfg, out);
        const auto& checks = r.summary["results"];
        if (checks.contains("checks"))
            for (const auto& c : checks["checks"])
                std::cout << (c["pass"].get<bool>() ? "ok   " : "FAIL ") << c["name"].get<std::string>() << "  "
                          << c["value"].dump() << " <= " << c["bound"].dump() << '\n';
        std::cout << verb << ": " << (r.pass ? "pass" : "FAIL") << "  (" << out << "/summary.json)\n";
        return r.pass ? 0 : 1;
    } catch (const sns::IntegrationAborted& e) {
        std::cerr << "aborted: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << '\n';
        return 3;
    }
}
