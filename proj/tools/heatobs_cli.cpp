#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "heatobs/runner.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw heatobs::InputError("cannot open field file: " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void write_report(const heatobs::RunResult& res, const std::string& out) {
    std::ostringstream os;
    os << res.header << "\n";
    for (const auto& row : res.rows) os << row << "\n";
    if (out.empty()) {
        std::cout << os.str();
    } else {
        std::ofstream f(out);
        if (!f) throw heatobs::InputError("cannot write output file: " + out);
        f << os.str();
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"heat-equation sampling/observability experiment runner"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file; flags override");

    heatobs::ExperimentConfig cfg;
    std::string field_path, out, table_path = "data/calibration.json";
    std::vector<std::string> bound_ids;

    app.add_option("--dim", cfg.d, "space dimension (1..3)")->check(CLI::Range(1, 3));
    app.add_option("--T", cfg.T, "final time list");
    app.add_option("--N", cfg.N, "sampling density list");
    app.add_option("--eps", cfg.eps, "perturbation / target epsilon list");
    app.add_option("--r", cfg.r, "window radius list");
    app.add_option("--s", cfg.s, "Sobolev order list");
    app.add_option("--k", cfg.k, "moment weight order");
    app.add_option("--tau", cfg.tau, "impulse time");
    app.add_option("--field", field_path, "mixture spec file (dim line, then terms)");
    app.add_option("--rule", cfg.rule, "perturbation rule: alternating|radial|pseudorandom");
    app.add_option("--growth", cfg.growth, "window growth class: constant|linear");
    app.add_option("--tol", cfg.tol, "quadrature tolerance");
    app.add_option("--seed", cfg.seed, "seed for pseudorandom rules");
    app.add_option("--jobs", cfg.jobs, "worker threads for sweep points");
    app.add_option("--out", out, "output CSV path (default stdout)");
    app.add_option("--table", table_path, "calibration table path");

    // flags live on the parent app; let subcommands hand them back up
    for (const char* name :
         {"observe", "window", "counterexample", "control", "hs", "shannon"})
        app.add_subcommand(name)->fallthrough();
    auto* cal = app.add_subcommand("calibrate");
    cal->fallthrough();
    cal->add_option("--bounds", bound_ids,
                    "bound ids to refit (default: all known ids)");

    CLI11_PARSE(app, argc, argv);
    cfg.subcommand = app.get_subcommands().front()->get_name();
    if (cfg.jobs < 1) cfg.jobs = std::max(1u, std::thread::hardware_concurrency());

    try {
        if (!field_path.empty()) cfg.field_text = slurp(field_path);
        auto table = heatobs::CalibrationTable::load(table_path);

        if (cfg.subcommand == "calibrate") {
            auto ids = cal->count("--bounds") ? bound_ids : heatobs::calibration_ids();
            auto updated = heatobs::run_calibration(table, ids);
            updated.save(table_path);
            std::cout << "calibration table written to " << table_path << " ("
                      << updated.constants.size() << " constants, fingerprint "
                      << updated.fingerprint << ")\n";
            return 0;
        }

        auto res = heatobs::run_experiment(cfg, table);
        write_report(res, out);
        if (res.failures > 0) {
            std::cerr << res.failures << " asserted inequality failure(s) beyond certificate\n";
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
