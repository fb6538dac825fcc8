#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "bandclt/commands.hpp"
#include "bandclt/error.hpp"
#include "bandclt/spectral.hpp"

int main(int argc, char** argv) {
    using bandclt::cli::Invocation;

    try {
        bandclt::ensure_blas_ok(argv);
    } catch (const bandclt::Error& e) {
        std::cerr << bandclt::cli::error_json(bandclt::to_string(e.kind()), e.what()) << "\n";
        return 1;
    }

    CLI::App app{"Band random matrix linear-statistic experiments"};
    app.set_version_flag("--version", bandclt::cli::kToolVersion);
    app.require_subcommand(1);

    const std::map<std::string, std::string> about = {
        {"simulate", "variance of the normalized linear statistic over replicates"},
        {"analytic-var", "limiting variance from the kernel and fourth-cumulant terms"},
        {"moments", "gamma_k and C_{l,m} tables in exact rationals"},
        {"gamma", "gamma_k by closed form and by quadrature"},
        {"bilinear", "empirical <f, g>_n against its limit"},
        {"empirical-a", "empirical A_n(t) against its limit"},
        {"sweep", "simulate over a list of band radii"},
        {"band-norm", "operator norm of banded random orthogonal matrices"},
        {"resolvent", "largest off-diagonal mean resolvent entry"},
        {"clt-check", "simulate plus normality diagnostics against a calibrated KS threshold"},
    };
    Invocation inv;
    for (const auto& name : bandclt::cli::subcommands()) {
        CLI::App* sub = app.add_subcommand(name, about.at(name));
        sub->add_option("--config", inv.config_path, "JSON configuration file");
        sub->add_option("--out", inv.out, "output directory (overrides config)");
        sub->add_option("--seed", inv.seed, "master seed (overrides config)");
        sub->add_option("--workers", inv.workers, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--reps", inv.reps, "replicates")->check(CLI::PositiveNumber);
        sub->add_option("--max-order", inv.max_order, "largest k for gamma and moment tables");
        sub->callback([&inv, name] { inv.subcommand = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << bandclt::cli::error_json("usage", e.what()) << "\n";
        return 2;
    }
    return bandclt::cli::dispatch(inv, std::cerr);
}
