#include "topofem/config.hpp"

#include <cstdio>
#include <map>
#include <sstream>

#include "topofem/errors.hpp"

namespace topofem {

int RunConfig::effective_L_t(int L_x_value) const {
    if (L_t >= 0) return L_t;
    return method == "bdf1" ? 2 * L_x_value : L_x_value;
}

StepperConfig RunConfig::stepper_config() const {
    validate();
    StepperConfig c;
    c.method = method == "bdf1" ? Method::BDF1 : Method::BDF2;
    c.fe_order = fe_order;
    c.levels_x = L_x;
    c.levels_t = effective_L_t(L_x);
    c.bulk = {bulk_x_lo, bulk_x_hi, bulk_y_lo, bulk_y_hi};
    c.h0 = h0;
    c.T = T;
    c.dt0 = dt0;
    c.c_gamma = c_gamma;
    c.quad_depth = quad_depth;
    c.solver_tol = solver_tol;
    c.delta_safety = delta_safety;
    c.vmax_slices = vmax_slices;
    c.snapshot_every = snapshot_every;
    c.snapshot_prefix = snapshot_prefix;
    return c;
}

void RunConfig::validate() const {
    if (method != "bdf1" && method != "bdf2") throw ConfigError("method must be bdf1 or bdf2");
    if (fe_order != 1 && fe_order != 2) throw ConfigError("fe_order must be 1 or 2");
    if (L_x < 0) throw ConfigError("L_x must be nonnegative");
    if (c_gamma <= 0) throw ConfigError("c_gamma must be positive");
    if (solver_tol <= 0) throw ConfigError("solver_tol must be positive");
    if (bulk_x_hi <= bulk_x_lo || bulk_y_hi <= bulk_y_lo)
        throw ConfigError("degenerate bulk rectangle");
    if (h0 <= 0 || dt0 <= 0 || T < 0) throw ConfigError("h0, dt0 must be positive, T >= 0");
}

namespace {
std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
} // namespace

std::string RunConfig::to_text() const {
    std::ostringstream out;
    out << "scenario=" << scenario << "\n";
    out << "method=" << method << "\n";
    out << "fe_order=" << fe_order << "\n";
    out << "L_x=" << L_x << "\n";
    out << "L_t=" << L_t << "\n";
    out << "c_gamma=" << num(c_gamma) << "\n";
    out << "quad_depth=" << quad_depth << "\n";
    out << "solver_tol=" << num(solver_tol) << "\n";
    out << "delta_safety=" << num(delta_safety) << "\n";
    out << "bulk_x_lo=" << num(bulk_x_lo) << "\n";
    out << "bulk_x_hi=" << num(bulk_x_hi) << "\n";
    out << "bulk_y_lo=" << num(bulk_y_lo) << "\n";
    out << "bulk_y_hi=" << num(bulk_y_hi) << "\n";
    out << "h0=" << num(h0) << "\n";
    out << "T=" << num(T) << "\n";
    out << "dt0=" << num(dt0) << "\n";
    out << "vmax_slices=" << vmax_slices << "\n";
    out << "snapshot_every=" << snapshot_every << "\n";
    out << "out_csv=" << out_csv << "\n";
    out << "out_ledger=" << out_ledger << "\n";
    out << "snapshot_prefix=" << snapshot_prefix << "\n";
    return out.str();
}

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        try {
            if (key == "scenario") cfg.scenario = value;
            else if (key == "method") cfg.method = value;
            else if (key == "fe_order") cfg.fe_order = std::stoi(value);
            else if (key == "L_x") cfg.L_x = std::stoi(value);
            else if (key == "L_t") cfg.L_t = std::stoi(value);
            else if (key == "c_gamma") cfg.c_gamma = std::stod(value);
            else if (key == "quad_depth") cfg.quad_depth = std::stoi(value);
            else if (key == "solver_tol") cfg.solver_tol = std::stod(value);
            else if (key == "delta_safety") cfg.delta_safety = std::stod(value);
            else if (key == "bulk_x_lo") cfg.bulk_x_lo = std::stod(value);
            else if (key == "bulk_x_hi") cfg.bulk_x_hi = std::stod(value);
            else if (key == "bulk_y_lo") cfg.bulk_y_lo = std::stod(value);
            else if (key == "bulk_y_hi") cfg.bulk_y_hi = std::stod(value);
            else if (key == "h0") cfg.h0 = std::stod(value);
            else if (key == "T") cfg.T = std::stod(value);
            else if (key == "dt0") cfg.dt0 = std::stod(value);
            else if (key == "vmax_slices") cfg.vmax_slices = std::stoi(value);
            else if (key == "snapshot_every") cfg.snapshot_every = std::stoi(value);
            else if (key == "out_csv") cfg.out_csv = value;
            else if (key == "out_ledger") cfg.out_ledger = value;
            else if (key == "snapshot_prefix") cfg.snapshot_prefix = value;
            else throw ConfigError("unknown config key: " + key);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("config line " + std::to_string(lineno) + ": bad value for " + key);
        }
    }
    return cfg;
}

} // namespace topofem
