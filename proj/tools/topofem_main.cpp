#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "topofem/config.hpp"
#include "topofem/errors.hpp"
#include "topofem/stepper.hpp"
#include "topofem/verify.hpp"
#include "topofem/vtk_io.hpp"

namespace {

using namespace topofem;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        if (!token.empty()) out.push_back(std::stoi(token));
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        if (!token.empty()) out.push_back(std::stod(token));
    }
    return out;
}

std::function<double(const Vec2&)> named_profile(const std::string& name) {
    if (name == "one") return [](const Vec2&) { return 1.0; };
    if (name == "linear") return [](const Vec2& x) { return x.x() + x.y() + 1.0; };
    if (name == "quad") return [](const Vec2& x) { return 1.0 + x.x() * x.x(); };
    throw ConfigError("unknown profile '" + name + "' (use one|linear|quad)");
}

void add_run_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--scenario", cfg.scenario, "scenario name");
    cmd->add_option("--method", cfg.method, "bdf1 | bdf2");
    cmd->add_option("--order", cfg.fe_order, "FE order m (1 or 2)");
    cmd->add_option("--lx", cfg.L_x, "spatial refinement level");
    cmd->add_option("--lt", cfg.L_t, "time refinement level (-1: method coupling)");
    cmd->add_option("--c-gamma", cfg.c_gamma, "ghost penalty constant");
    cmd->add_option("--quad-depth", cfg.quad_depth, "cut quadrature subdivision depth (0: auto)");
    cmd->add_option("--solver-tol", cfg.solver_tol, "CG relative residual");
    cmd->add_option("--safety", cfg.delta_safety, "delta safety factor");
    cmd->add_option("--T", cfg.T, "final time");
    cmd->add_option("--dt0", cfg.dt0, "base time step (dt = dt0 * 2^-L_t)");
    cmd->add_option("--h0", cfg.h0, "base mesh size");
    cmd->add_option("--vmax-slices", cfg.vmax_slices, "time slices for the velocity bound");
    cmd->set_config("--config", "", "flat key=value config file");
}

void apply_scenario_bulk(RunConfig& cfg, const Scenario& scenario) {
    // adopt the scenario's suggested bulk unless the config overrides it
    const RunConfig defaults;
    const bool untouched =
        cfg.bulk_x_lo == defaults.bulk_x_lo && cfg.bulk_x_hi == defaults.bulk_x_hi &&
        cfg.bulk_y_lo == defaults.bulk_y_lo && cfg.bulk_y_hi == defaults.bulk_y_hi;
    if (untouched) {
        cfg.bulk_x_lo = scenario.bulk.x_lo;
        cfg.bulk_x_hi = scenario.bulk.x_hi;
        cfg.bulk_y_lo = scenario.bulk.y_lo;
        cfg.bulk_y_hi = scenario.bulk.y_hi;
    }
}

int cmd_converge(RunConfig cfg, const std::string& levels_text) {
    const std::vector<int> levels = parse_int_list(levels_text);
    if (levels.empty()) throw ConfigError("converge: --levels must be a nonempty list");
    const Scenario scenario = scenario_by_name(cfg.scenario);
    apply_scenario_bulk(cfg, scenario);

    std::vector<ConvergenceRecord> records;
    for (int lx : levels) {
        RunConfig level_cfg = cfg;
        level_cfg.L_x = lx;
        StepperConfig sc = level_cfg.stepper_config();
        const ManufacturedProblem problem = paper_solution_problem(scenario.field);
        const RunResult result = run(problem, sc, scenario.critical_t);
        records.push_back(result.record);
        std::printf("Lx=%d Lt=%d h=%.5g dt=%.5g  linf_l2=%.6e  l2_h1=%.6e\n", lx, sc.levels_t,
                    result.record.h, result.record.dt, result.record.err_linf_l2,
                    result.record.err_l2_h1);
        if (result.singular_step >= 0)
            std::printf("  step %d crossed the critical time t_c=%.6g\n", result.singular_step,
                        *scenario.critical_t);
        std::fflush(stdout);
        if (!cfg.out_ledger.empty())
            write_ledger_csv(cfg.out_ledger + ".L" + std::to_string(lx) + ".csv", result.ledger);
    }
    attach_eoc(records);
    write_convergence_csv(cfg.out_csv, records, scenario.note);

    std::printf("\n%-4s %-4s %-12s %-12s %-13s %-13s %-8s %-8s\n", "Lx", "Lt", "h", "dt",
                "err_linf_l2", "err_l2_h1", "eoc_l2", "eoc_h1");
    for (const auto& r : records) {
        std::printf("%-4d %-4d %-12.5g %-12.5g %-13.6e %-13.6e ", r.L_x, r.L_t, r.h, r.dt,
                    r.err_linf_l2, r.err_l2_h1);
        if (r.eoc_l2) std::printf("%-8.3f ", *r.eoc_l2);
        else std::printf("%-8s ", "-");
        if (r.eoc_h1) std::printf("%-8.3f\n", *r.eoc_h1);
        else std::printf("%-8s\n", "-");
    }
    if (!scenario.note.empty()) std::printf("note: %s\n", scenario.note.c_str());
    std::printf("wrote %s\n", cfg.out_csv.c_str());
    return 0;
}

int cmd_classify(const std::string& name, const std::string& box_text) {
    Scenario scenario = scenario_by_name(name);
    if (!box_text.empty()) {
        const auto v = parse_double_list(box_text);
        if (v.size() != 6)
            throw ConfigError("classify: --box expects x_lo,x_hi,y_lo,y_hi,t_lo,t_hi");
        scenario.classify_box = {{v[0], v[1], v[2], v[3]}, v[4], v[5]};
    }
    const ScenarioClassification result = classify_scenario(scenario);
    if (result.lipschitz_flagged) {
        std::printf("%s\n", lipschitz_json_line(scenario.name).c_str());
    } else {
        for (const auto& report : result.reports)
            std::printf("%s\n", report_json_line(scenario.name, report).c_str());
    }
    if (!scenario.note.empty()) std::fprintf(stderr, "note: %s\n", scenario.note.c_str());
    return 0;
}

int cmd_transport(const std::string& name, double t0, double dt, const std::string& profile,
                  int resolution) {
    const Scenario scenario = scenario_by_name(name);
    const auto u = named_profile(profile);
    const TransportCheck check =
        transport_identity_check(scenario.field, scenario.bulk, u, t0, dt, resolution);
    std::printf("scenario=%s t0=%.6g dt=%.6g u=%s resolution=%d\n", name.c_str(), t0, dt,
                profile.c_str(), resolution);
    std::printf("lhs=%.10e rhs=%.10e rel_err=%.4e\n", check.lhs, check.rhs, check.rel_err);
    return 0;
}

int cmd_blowup(const std::string& name, int decades, int per_decade,
               const std::string& out_path) {
    const Scenario scenario = scenario_by_name(name);
    if (!scenario.critical_t)
        throw ConfigError("blowup-demo: scenario has no known critical time");
    std::vector<double> dts;
    for (int i = 0; i <= decades * per_decade; ++i)
        dts.push_back(1e-2 * std::pow(10.0, -static_cast<double>(i) / per_decade));
    const BlowupResult result =
        blowup_demo(scenario.field, scenario.bulk, *scenario.critical_t, dts);
    std::printf("%-12s %-16s %-16s\n", "dt", "dmeas/dt", "sup_V_Gamma");
    for (size_t i = 0; i < result.dts.size(); ++i)
        std::printf("%-12.4e %-16.8e %-16.8e\n", result.dts[i], result.quotients[i],
                    result.sup_velocity[i]);
    std::printf("loglog slope of dmeas/dt: %.4f\n", result.slope);
    std::printf("loglog slope of sup velocity: %.4f\n", result.sup_velocity_slope);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        char line[160];
        std::snprintf(line, sizeof(line), "# slope=%.6f sup_velocity_slope=%.6f\n",
                      result.slope, result.sup_velocity_slope);
        out << line << "dt,dmeas_dt,sup_v_gamma\n";
        for (size_t i = 0; i < result.dts.size(); ++i) {
            std::snprintf(line, sizeof(line), "%.12e,%.12e,%.12e\n", result.dts[i],
                          result.quotients[i], result.sup_velocity[i]);
            out << line;
        }
        std::printf("wrote %s\n", out_path.c_str());
    }
    return 0;
}

int cmd_snapshot(RunConfig cfg, const std::string& times_text) {
    const std::vector<double> times = parse_double_list(times_text);
    if (times.empty()) throw ConfigError("snapshot: --times must be a nonempty list");
    const Scenario scenario = scenario_by_name(cfg.scenario);
    apply_scenario_bulk(cfg, scenario);
    StepperConfig sc = cfg.stepper_config();
    const double t_max = *std::max_element(times.begin(), times.end());
    sc.T = t_max;

    const BackgroundMesh mesh = build_background(sc.bulk, sc.h0, sc.levels_x);
    const ManufacturedProblem problem = paper_solution_problem(scenario.field);
    const EvolutionConstants constants =
        estimate_v_max_plus(problem.field, sc.bulk, 0.0, sc.T, sc.vmax_slices, 2, 3);
    double delta = choose_delta(constants, sc.dt(), sc.delta_safety);
    if (sc.method == Method::BDF2) delta *= 2.0;

    Stepper stepper(mesh, problem, sc, delta);
    stepper.initialize(0.0);
    std::vector<int> target_steps;
    for (double t : times)
        target_steps.push_back(static_cast<int>(std::llround(t / sc.dt())));
    const int n_steps = static_cast<int>(std::llround(sc.T / sc.dt()));

    auto dump = [&](int n) {
        char path[512];
        std::snprintf(path, sizeof(path), "%s_%05d.vtk", cfg.snapshot_prefix.c_str(), n);
        std::vector<double> point_u(mesh.vertices.size(), 0.0);
        for (size_t v = 0; v < mesh.vertices.size(); ++v) {
            const int d = stepper.space().vertex_dof[v];
            if (d >= 0) point_u[v] = stepper.solution()[d];
        }
        write_mesh_vtk(path, mesh, stepper.quadrature().active->tags(mesh), &point_u);
        std::printf("wrote %s (t=%.6g)\n", path, stepper.time());
        std::snprintf(path, sizeof(path), "%s_%05d_interface.vtk", cfg.snapshot_prefix.c_str(), n);
        write_polyline_vtk(path, extract_interface_segments(mesh, *stepper.quadrature().active,
                                                            problem.field, stepper.time(),
                                                            sc.depth()));
        std::printf("wrote %s\n", path);
    };

    if (std::count(target_steps.begin(), target_steps.end(), 0)) dump(0);
    for (int n = 1; n <= n_steps; ++n) {
        stepper.advance();
        if (std::count(target_steps.begin(), target_steps.end(), n)) dump(n);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unfitted FEM for the heat equation on evolving level-set domains "
                 "with topological changes"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string levels_text = "1,2,3";
    std::string times_text;
    std::string box_text;
    std::string profile = "one";
    double t0 = 0.0, dt = 0.1;
    int resolution = 32;
    int decades = 3, per_decade = 2;

    auto* converge = app.add_subcommand("converge", "EOC study over spatial levels");
    add_run_options(converge, cfg);
    converge->add_option("--levels", levels_text, "comma list of L_x values");
    converge->add_option("--out", cfg.out_csv, "output CSV path");
    converge->add_option("--ledger", cfg.out_ledger, "per-level ledger CSV prefix");

    auto* classify = app.add_subcommand("classify", "critical point report as JSON");
    classify->add_option("--scenario", cfg.scenario, "scenario name");
    classify->add_option("--box", box_text, "x_lo,x_hi,y_lo,y_hi,t_lo,t_hi search box");

    auto* transport = app.add_subcommand("transport-check", "Reynolds identity check");
    transport->add_option("--scenario", cfg.scenario, "scenario name");
    transport->add_option("--t0", t0, "interval start");
    transport->add_option("--dt", dt, "interval length");
    transport->add_option("--u", profile, "test function (one|linear|quad)");
    transport->add_option("--resolution", resolution, "time slices / reconstruction depth");

    auto* blowup = app.add_subcommand("blowup-demo", "measure-change quotient near t_c");
    std::string blowup_out;
    blowup->add_option("--scenario", cfg.scenario, "scenario name")->default_val("paper_merging");
    blowup->add_option("--decades", decades, "dt decades below 1e-2");
    blowup->add_option("--per-decade", per_decade, "samples per decade");
    blowup->add_option("--out", blowup_out, "table CSV path");

    auto* snapshot = app.add_subcommand("snapshot", "VTK dumps of mesh tags and solution");
    add_run_options(snapshot, cfg);
    snapshot->add_option("--times", times_text, "comma list of output times")->required();
    snapshot->add_option("--prefix", cfg.snapshot_prefix, "output file prefix");

    try {
        app.parse(argc, argv);
        cfg.scenario = cfg.scenario.empty() ? "paper_splitting" : cfg.scenario;
        if (converge->parsed()) return cmd_converge(cfg, levels_text);
        if (classify->parsed()) return cmd_classify(cfg.scenario, box_text);
        if (transport->parsed()) return cmd_transport(cfg.scenario, t0, dt, profile, resolution);
        if (blowup->parsed()) return cmd_blowup(cfg.scenario, decades, per_decade, blowup_out);
        if (snapshot->parsed()) return cmd_snapshot(cfg, times_text);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const InvalidRect& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    }
    return 0;
}
