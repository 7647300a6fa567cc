#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lowdim/error.hpp"
#include "lowdim/io.hpp"
#include "lowdim/scenario.hpp"
#include "lowdim/spectral_oracle.hpp"

namespace {

int report_error(const lowdim::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lowdim: heat equations on unions of segments and discs in R^3"};
    app.set_help_flag("--help", "print this help");
    app.require_subcommand(1);
    app.fallthrough();

    lowdim::RunOverrides o;
    std::optional<std::string> out_dir;
    app.add_option("--h", o.h, "mesh size");
    app.add_option("--dt", o.dt, "time step");
    app.add_option("--T", o.T, "final time");
    app.add_option("--theta", o.theta, "theta in [1/2, 1]");
    app.add_option("--tol", o.tol, "solver tolerance");
    app.add_option("--out-dir", out_dir, "directory for CSV/VTK outputs");
    app.add_option("--seed", o.seed, "random seed");

    std::string path;
    auto add_file_command = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("scenario", path, "scenario JSON file")->required();
        return sub;
    };
    auto* validate = add_file_command("validate", "check geometry and report junctions and kernel classes");
    auto* mesh = add_file_command("mesh", "build the mesh and report its quality");
    auto* stationary = add_file_command("solve-stationary", "solve the stationary problem");
    auto* parabolic = add_file_command("run-parabolic", "run the theta-scheme");
    auto* poincare = add_file_command("poincare", "per-class Poincare constants");
    auto* scenario = add_file_command("scenario", "run a scenario as declared");
    bool canonical = false;
    scenario->add_flag("--canonical", canonical, "print the canonical scenario JSON and exit");

    auto* spectrum = app.add_subcommand("spectrum", "disc Neumann eigenvalue table as CSV");
    int n_max = 5, k_max = 5;
    spectrum->add_option("--n-max", n_max, "largest Bessel order (<= 20)");
    spectrum->add_option("--k-max", k_max, "roots per order (<= 20)");

    CLI11_PARSE(app, argc, argv);
    if (out_dir) o.out_dir = *out_dir;

    try {
        if (spectrum->parsed()) {
            const std::string csv = lowdim::spectrum_csv(n_max, k_max);
            if (o.out_dir) lowdim::write_text(*o.out_dir / "spectrum.csv", csv);
            std::cout << csv;
            return 0;
        }
        const lowdim::Scenario s = lowdim::load_scenario(path);
        if (canonical) {
            std::cout << lowdim::serialize_scenario(s);
            return 0;
        }
        lowdim::RunReport report;
        if (mesh->parsed()) {
            report = lowdim::run_mesh(s, o);
        } else {
            if (validate->parsed()) o.kind = "validate";
            if (stationary->parsed()) o.kind = "stationary";
            if (parabolic->parsed()) o.kind = "parabolic";
            if (poincare->parsed()) o.kind = "poincare";
            report = lowdim::run_scenario(s, o);
        }
        std::cout << report.summary_json;
        return report.passed ? 0 : 1;
    } catch (const lowdim::Error& e) {
        return report_error(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
