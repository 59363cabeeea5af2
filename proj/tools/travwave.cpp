// Command-line front end: one subcommand per run, CSV/JSON artifacts, a
// one-line summary on stdout. Exit codes: 0 success, 1 solver failure, 2 usage.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "acceptance.hpp"
#include "json.hpp"
#include "travwave/control.hpp"
#include "travwave/error.hpp"
#include "travwave/model.hpp"
#include "travwave/model2.hpp"
#include "travwave/pde.hpp"
#include "travwave/pmp.hpp"
#include "travwave/profile.hpp"
#include "travwave/speed.hpp"

using namespace travwave;
using nlohmann::json;

namespace {

// Shortest round-trip decimal, always with a decimal point or exponent.
std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, end);
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class Csv {
public:
    Csv(const std::string& path, const std::vector<std::string>& columns) {
        if (path.empty()) return;
        out_.open(path);
        if (!out_) throw Error(ErrorKind::config, "cannot write " + path);
        for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
        out_ << '\n';
    }
    void row(const std::vector<double>& values) {
        if (!out_.is_open()) return;
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << num(values[i]);
        out_ << '\n';
    }
    // Row whose trailing cells may be empty.
    void row(const std::vector<std::optional<double>>& values) {
        if (!out_.is_open()) return;
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << (values[i] ? num(*values[i]) : "");
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

// Flat config: one `key = value` per line, '#' starts a comment, keys are
// long flag names without the dashes.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot read " + path);
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int number = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
    };
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
            throw CLI::ValidationError("--config", path + ":" + std::to_string(number) + ": expected key = value");
        entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return entries;
}

// Applies config entries to options the command line left unset.
void apply_config(CLI::App& cmd, const std::string& path) {
    for (const auto& [key, value] : read_config(path)) {
        CLI::Option* opt = cmd.get_option_no_throw("--" + key);
        if (!opt || key == "config") throw CLI::ValidationError("--config", "unknown key '" + key + "' for " + cmd.get_name());
        if (opt->count() > 0) continue;
        if (opt->get_type_size() == 0) {
            if (value != "true" && value != "false")
                throw CLI::ValidationError("--config", "key '" + key + "' takes true or false");
            if (value == "true") opt->add_result("true");
        } else {
            opt->add_result(value);
        }
        opt->run_callback();
    }
}

json config_echo(const CLI::App& cmd) {
    json j = json::object();
    for (const CLI::Option* opt : cmd.get_options()) {
        const std::string name = opt->get_lnames().empty() ? opt->get_name() : opt->get_lnames().front();
        if (name == "help" || name.empty()) continue;
        if (opt->count() > 0) j[name] = opt->get_type_size() == 0 ? json(true) : json(opt->as<std::string>());
        else if (!opt->get_default_str().empty()) j[name] = opt->get_default_str();
    }
    return j;
}

struct Common {
    std::string config;
    std::string out;
    std::string json_path;
    std::string model = "weed";
    std::optional<double> ustar;
    std::optional<double> rate;
    double kappa3 = 1.0;
};

void add_common(CLI::App& cmd, Common& c, bool with_model = true) {
    cmd.add_option("--config", c.config, "flat key = value file; flags override it");
    cmd.add_option("--out", c.out, "CSV output path");
    cmd.add_option("--json", c.json_path, "JSON summary path");
    if (!with_model) return;
    cmd.add_option("--model", c.model, "weed or logistic")->check(CLI::IsMember({"weed", "logistic"}));
    cmd.add_option("--ustar", c.ustar, "weed threshold u*");
    cmd.add_option("--rate", c.rate, "weed growth rate");
    cmd.add_option("--kappa3", c.kappa3, "logistic growth rate");
}

ModelSpec build_model(const Common& c, double ustar_default = 1.0 / 3.0, double rate_default = 1.0) {
    if (c.model == "logistic") return make_logistic_model(c.kappa3);
    return make_weed_model(c.ustar.value_or(ustar_default), c.rate.value_or(rate_default));
}

void write_json(const Common& c, const CLI::App& cmd, const std::string& command, json results) {
    if (c.json_path.empty()) return;
    std::ofstream out(c.json_path);
    if (!out) throw Error(ErrorKind::config, "cannot write " + c.json_path);
    out << json{{"command", command}, {"config", config_echo(cmd)}, {"results", std::move(results)}}.dump(2) << '\n';
}

void write_phase(const std::string& path, const PhaseTrajectory& t, bool with_y) {
    std::vector<std::string> cols{"u", "p", "beta"};
    if (with_y) cols.push_back("y");
    Csv csv(path, cols);
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::vector<double> row{t.u[i], t.p[i], t.beta.empty() ? 0.0 : t.beta[i]};
        if (with_y) row.push_back(t.y.empty() ? 0.0 : t.y[i]);
        csv.row(row);
    }
}

void write_profile(const std::string& path, const SpatialProfile& sp) {
    Csv csv(path, {"x", "u", "p", "alpha", "theta"});
    for (std::size_t i = 0; i < sp.size(); ++i) {
        std::optional<double> th;
        if (!sp.theta.empty()) th = sp.theta[i];
        csv.row(std::vector<std::optional<double>>{sp.x[i], sp.u[i], sp.p[i], sp.alpha[i], th});
    }
}

std::string phi_table_text(const std::vector<std::pair<double, double>>& table) {
    std::ostringstream os;
    os << "u1,phi\n";
    for (const auto& [u1, phi] : table) os << num(u1) << "," << num(phi) << "\n";
    return os.str();
}

// Scalar profile at speed c: the optimal one above the natural speed, the
// uncontrolled front at it.
SpatialProfile scalar_profile(const ModelSpec& spec, double c) {
    return reconstruct_x(optimal_profile(spec, c).trajectory, spec);
}

struct PdeOptions {
    double c = 0.0;
    std::string frame = "comoving";
    std::string initial = "profile";
    bool no_control = false;
    double T = 50.0;
    double lo = -60.0, hi = 60.0, dx = 0.05, dt = 0.0, snapshot = 0.5;
    int stride = 1;
    double kappa1 = 1.0;
    double k1 = 1.0, k2 = 1.0, d = 1.0;
};

void write_snapshots(const std::string& path, const EvolutionRecord& r, int stride) {
    const bool has_v = !r.snapshots.front().v.empty();
    const bool has_theta = !r.snapshots.front().theta.empty();
    std::vector<std::string> cols{"t", "x", "u"};
    if (has_v) cols.push_back("v");
    if (has_theta) cols.push_back("theta");
    Csv csv(path, cols);
    for (const auto& s : r.snapshots)
        for (std::size_t i = 0; i < r.x.size(); i += static_cast<std::size_t>(stride)) {
            std::vector<double> row{s.t, r.x[i], s.u[i]};
            if (has_v) row.push_back(s.v[i]);
            if (has_theta) row.push_back(s.theta[i]);
            csv.row(row);
        }
}

json record_summary(const EvolutionRecord& r) {
    json j{{"frame_speed", r.frame_speed},
           {"dt", r.dt},
           {"steps", r.steps},
           {"drift_u", r.drift_u},
           {"drift_v", r.drift_v},
           {"drift_theta", r.drift_theta},
           {"field_min", r.field_min},
           {"field_max", r.field_max},
           {"max_v_minus_u", r.max_v_minus_u},
           {"max_theta_decrease", r.max_theta_decrease},
           {"cost_alpha", r.cost_alpha},
           {"cost_theta", r.cost_theta}};
    try {
        const auto fit = front_speed(r);
        j["speed"] = fit.speed;
        j["speed_std_error"] = fit.std_error;
        j["speed_points"] = fit.points;
    } catch (const Error& e) {
        j["speed"] = nullptr;
        j["speed_error"] = e.what();
    }
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Traveling-wave control of invasive species: profiles, optimal effort, host models and PDE checks"};
    app.require_subcommand(1);

    Common common;
    std::string command;

    // speed
    auto* speed_cmd = app.add_subcommand("speed", "natural speed c* and the uncontrolled heteroclinic (u,p,beta)");
    add_common(*speed_cmd, common);

    // construct
    double c = 0.0;
    std::optional<double> c_prime;
    double factor = 0.1;
    auto* construct_cmd = app.add_subcommand("construct", "finite-cost concatenated control (u,p,beta)");
    add_common(*construct_cmd, common);
    construct_cmd->add_option("--c", c, "target speed (required)");
    construct_cmd->add_option("--cprime", c_prime, "intermediate speed c'");
    construct_cmd->add_option("--factor", factor, "substitute reaction: f above u* scaled by this factor")
        ->capture_default_str();

    // optimal
    double tol = 1e-10;
    auto* optimal_cmd = app.add_subcommand("optimal", "minimum-effort profile at speed c (u,p,beta,y)");
    add_common(*optimal_cmd, common);
    optimal_cmd->add_option("--c", c, "target speed (required)");
    optimal_cmd->add_option("--tol", tol, "bisection tolerance on u1")->capture_default_str();

    // effort
    std::optional<double> c_min;
    double c_max = 0.0;
    int n_rows = 11;
    auto* effort_cmd = app.add_subcommand("effort", "effort curve E(c) on a uniform grid (c,E)");
    add_common(*effort_cmd, common);
    effort_cmd->add_option("--cmin", c_min, "smallest speed (default c*)");
    effort_cmd->add_option("--cmax", c_max, "largest speed")->capture_default_str();
    effort_cmd->add_option("--n", n_rows, "number of speeds")->check(CLI::Range(1, 100000))->capture_default_str();

    // profile
    std::optional<double> kappa1_opt;
    auto* profile_cmd = app.add_subcommand("profile", "spatial profile (x,u,p,alpha,theta) of the optimal front");
    add_common(*profile_cmd, common);
    profile_cmd->add_option("--c", c, "target speed (required)");
    profile_cmd->add_option("--kappa1", kappa1_opt, "attach the tree profile with this infection rate");

    // model1
    double kappa1 = 1.0;
    auto* model1_cmd = app.add_subcommand("model1", "tree infection profile Theta of the optimal front");
    add_common(*model1_cmd, common);
    model1_cmd->add_option("--c", c, "target speed (required)");
    model1_cmd->add_option("--kappa1", kappa1, "infection rate")->capture_default_str();

    // model2
    Model2Params q;
    std::optional<double> c2;
    auto* model2_cmd = app.add_subcommand("model2", "infected-host model: spectrum, threshold, profile, spiral demo");
    model2_cmd->require_subcommand(1);
    auto add_q = [&](CLI::App& cmd) {
        cmd.add_option("--k1", q.kappa1, "kappa1")->capture_default_str();
        cmd.add_option("--k2", q.kappa2, "kappa2")->capture_default_str();
        cmd.add_option("--d", q.d, "death rate d")->capture_default_str();
    };
    auto* m2_spectrum = model2_cmd->add_subcommand("spectrum", "roots of the characteristic polynomial (k,re,im)");
    add_common(*m2_spectrum, common, false);
    add_q(*m2_spectrum);
    m2_spectrum->add_option("--c", c2, "speed (default -0.9)");
    auto* m2_csharp = model2_cmd->add_subcommand("csharp", "threshold speed c#");
    add_common(*m2_csharp, common, false);
    add_q(*m2_csharp);
    auto* m2_profile = model2_cmd->add_subcommand("profile", "(V, Theta) for a controlled scalar front (x,u,v,theta)");
    add_common(*m2_profile, common);
    add_q(*m2_profile);
    m2_profile->add_option("--c", c2, "speed (default -0.9)");
    auto* m2_demo = model2_cmd->add_subcommand("demo", "spiral near the zero state (x,v,w,theta,angle)");
    add_common(*m2_demo, common, false);
    add_q(*m2_demo);
    m2_demo->add_option("--c", c2, "speed (default -0.9)");

    // pde
    PdeOptions po;
    auto* pde_cmd = app.add_subcommand("pde", "method-of-lines evolution; snapshots (t,x,u[,v,theta])");
    pde_cmd->require_subcommand(1);
    auto add_pde = [&](CLI::App& cmd) {
        add_common(cmd, common);
        cmd.add_option("--c", c2, "profile and control speed (default -0.1, Model 2: -0.9)");
        cmd.add_option("--frame", po.frame, "lab or comoving")
            ->check(CLI::IsMember({"lab", "comoving"}))
            ->capture_default_str();
        cmd.add_option("--T", po.T, "final time")->capture_default_str();
        cmd.add_option("--lo", po.lo, "left end")->capture_default_str();
        cmd.add_option("--hi", po.hi, "right end")->capture_default_str();
        cmd.add_option("--dx", po.dx, "grid spacing")->capture_default_str();
        cmd.add_option("--dt", po.dt, "time step, 0 for 0.4 dx^2")->capture_default_str();
        cmd.add_option("--snapshot", po.snapshot, "snapshot interval")->capture_default_str();
        cmd.add_option("--stride", po.stride, "write every n-th node")->check(CLI::PositiveNumber)->capture_default_str();
        cmd.add_flag("--no-control", po.no_control, "evolve without the profile's control");
    };
    auto* pde_scalar = pde_cmd->add_subcommand("scalar", "u_t = u_xx + f(u, alpha)");
    add_pde(*pde_scalar);
    pde_scalar->add_option("--initial", po.initial, "profile or step")
        ->check(CLI::IsMember({"profile", "step"}))
        ->capture_default_str();
    auto* pde_model1 = pde_cmd->add_subcommand("model1", "scalar equation with tree damage theta");
    add_pde(*pde_model1);
    pde_model1->add_option("--kappa1", po.kappa1, "infection rate")->capture_default_str();
    auto* pde_model2 = pde_cmd->add_subcommand("model2", "weeds, infected hosts and damage");
    add_pde(*pde_model2);
    add_q(*pde_model2);

    // verify
    std::vector<int> criteria;
    auto* verify_cmd = app.add_subcommand("verify", "run the acceptance criteria");
    verify_cmd->add_option("criteria", criteria, "criterion ids (default all)")
        ->check(CLI::Range(1, acceptance::criterion_count()));
    verify_cmd->add_option("--json", common.json_path, "JSON summary path");

    CLI::App* active = nullptr;
    try {
        app.parse(argc, argv);
        for (CLI::App* sub = &app; sub;) {
            auto subs = sub->get_subcommands();
            if (subs.empty()) break;
            active = subs.front();
            command += (command.empty() ? "" : " ") + active->get_name();
            sub = active;
        }
        if (!common.config.empty()) apply_config(*active, common.config);
        for (CLI::App* cmd : {construct_cmd, optimal_cmd, profile_cmd, model1_cmd})
            if (active == cmd && cmd->get_option("--c")->count() == 0) throw CLI::RequiredError("--c");
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (active == speed_cmd) {
            const auto spec = build_model(common);
            const double cs = natural_speed(spec);
            write_phase(common.out, heteroclinic(spec, cs), false);
            write_json(common, *active, command, {{"c_star", cs}});
            std::cout << "c* = " << num(cs) << "\n";
        } else if (active == construct_cmd) {
            const auto spec = build_model(common);
            const auto k = finite_cost_control(spec, c, c_prime, scaled_substitute(spec, factor));
            write_phase(common.out, k.trajectory, false);
            write_json(common, *active, command,
                       {{"c", k.c},
                        {"c_prime", k.c_prime},
                        {"c_hat", k.c_hat},
                        {"c_star", k.c_star},
                        {"u1", k.u1},
                        {"u2", k.u2},
                        {"u2_tilde", k.u2_tilde},
                        {"delta", k.delta},
                        {"cost", jnum(k.cost)}});
            std::cout << "construct c = " << num(k.c) << " c' = " << num(k.c_prime) << " cost = " << num(k.cost) << "\n";
        } else if (active == optimal_cmd) {
            const auto spec = build_model(common);
            const double cs = natural_speed(spec);
            if (c < cs - 1e-9) {
                std::cerr << "error: no_solution: no profile at c = " << num(c) << " below the natural speed "
                          << num(cs) << "; the shooting function has no root:\n"
                          << phi_table_text(phi_scan(spec, c));
                return 1;
            }
            OptimalProfile opt;
            try {
                opt = optimal_profile(spec, c, tol);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::no_solution) throw;
                std::cerr << "error: " << e.what() << "\n" << phi_table_text(phi_scan(spec, c));
                return 1;
            }
            write_phase(common.out, opt.trajectory, true);
            const auto res = pmp_residual(opt, spec);
            write_json(common, *active, command,
                       {{"c", opt.c},
                        {"c_star", opt.c_star},
                        {"u1", opt.u1},
                        {"u2", opt.u2},
                        {"cost", opt.cost},
                        {"converged", opt.diagnostics.converged},
                        {"trivial", opt.diagnostics.trivial},
                        {"roots", opt.diagnostics.roots},
                        {"adjoint_residual", res.adjoint},
                        {"boundary_residual", res.boundary}});
            std::cout << "optimal c = " << num(opt.c) << " u1 = " << num(opt.u1) << " u2 = " << num(opt.u2)
                      << " E = " << num(opt.cost) << "\n";
            if (!opt.diagnostics.converged && !opt.diagnostics.trivial) {
                std::cerr << "error: nonconvergence: shooting did not converge\n";
                return 1;
            }
        } else if (active == effort_cmd) {
            const auto spec = build_model(common);
            const double lo = c_min ? *c_min : natural_speed(spec);
            std::vector<double> grid;
            for (int i = 0; i < n_rows; ++i)
                grid.push_back(n_rows == 1 ? lo : lo + (c_max - lo) * i / (n_rows - 1));
            const auto rows = effort_curve(spec, grid);
            Csv csv(common.out, {"c", "E"});
            json jr = json::array();
            int failed = 0;
            for (const auto& r : rows) {
                csv.row(std::vector<double>{r.c, r.effort});
                jr.push_back({{"c", r.c}, {"E", jnum(r.effort)}, {"ok", r.ok}, {"message", r.message}});
                if (!r.ok) {
                    ++failed;
                    std::cerr << "row c = " << num(r.c) << ": " << r.message << "\n";
                }
            }
            write_json(common, *active, command, {{"rows", jr}});
            std::cout << "effort " << rows.size() << " rows on [" << num(grid.front()) << ", " << num(grid.back())
                      << "], E(max) = " << num(rows.back().effort) << ", " << failed << " failed\n";
            if (failed) return 1;
        } else if (active == profile_cmd || active == model1_cmd) {
            const auto spec = build_model(common);
            auto sp = scalar_profile(spec, c);
            const std::optional<double> k = active == model1_cmd ? std::optional<double>(kappa1) : kappa1_opt;
            if (k) sp = theta_model1(sp, *k, c);
            write_profile(common.out, sp);
            json jr{{"c", sp.c}, {"nodes", sp.size()}, {"x_min", sp.x.front()}, {"x_max", sp.x.back()}};
            if (k) jr["theta_left"] = sp.theta.front(), jr["theta_right"] = sp.theta.back();
            write_json(common, *active, command, jr);
            std::cout << command << " c = " << num(sp.c) << " nodes = " << sp.size();
            if (k) std::cout << " theta(ends) = " << num(sp.theta.front()) << ", " << num(sp.theta.back());
            std::cout << "\n";
        } else if (active == m2_csharp) {
            const double cs = c_sharp(q);
            write_json(common, *active, command, {{"c_sharp", cs}, {"lambda_min", lambda_min(cs, q)}});
            std::cout << num(cs) << "\n";
        } else if (active == m2_spectrum) {
            const double cc = c2.value_or(-0.9);
            const auto sp = spectrum(cc, q);
            Csv csv(common.out, {"k", "re", "im"});
            json roots = json::array();
            for (int i = 0; i < 3; ++i) {
                csv.row(std::vector<double>{static_cast<double>(i + 1), sp.roots[i].real(), sp.roots[i].imag()});
                roots.push_back({sp.roots[i].real(), sp.roots[i].imag()});
            }
            write_json(common, *active, command,
                       {{"c", cc},
                        {"classification", to_string(sp.classification)},
                        {"lambda1", sp.lambda1},
                        {"a", sp.a},
                        {"b", sp.b},
                        {"lambda_min", sp.lambda_min},
                        {"c_sharp", sp.c_sharp},
                        {"roots", roots}});
            std::cout << "spectrum c = " << num(cc) << " " << to_string(sp.classification) << " lambda1 = " << num(sp.lambda1)
                      << " a = " << num(sp.a) << " b = " << num(sp.b) << "\n";
        } else if (active == m2_profile) {
            const double cc = c2.value_or(-0.9);
            const auto spec = build_model(common, 1.0 / 6.0, 6.0);
            const auto sp = scalar_profile(spec, cc);
            const auto sol = solve_vtheta(sp, spec, q, cc);
            const auto& P = sol.path;
            Csv csv(common.out, {"x", "u", "v", "theta"});
            for (std::size_t i = 0; i < P.size(); ++i) csv.row(std::vector<double>{P.x[i], P.u[i], P.v[i], P.theta[i]});
            write_json(common, *active, command,
                       {{"c", cc},
                        {"iterations", sol.iterations},
                        {"residual_v", sol.residual_v},
                        {"residual_theta", sol.residual_theta},
                        {"lower_margin", sol.lower_margin},
                        {"upper_margin", sol.upper_margin},
                        {"v_right", P.v.back()},
                        {"v_star", q.v_star()},
                        {"eps", sol.lower.eps},
                        {"x0", sol.lower.x0},
                        {"x1", sol.lower.x1}});
            std::cout << "model2 profile c = " << num(cc) << " iterations = " << sol.iterations
                      << " V(right) = " << num(P.v.back()) << " V* = " << num(q.v_star()) << "\n";
        } else if (active == m2_demo) {
            const double cc = c2.value_or(-0.9);
            const auto rep = case2_demo(q, cc);
            Csv csv(common.out, {"x", "v", "w", "theta", "angle"});
            for (std::size_t i = 0; i < rep.x.size(); ++i)
                csv.row(std::vector<double>{rep.x[i], rep.v[i], rep.w[i], rep.theta[i], rep.angle[i]});
            write_json(common, *active, command,
                       {{"c", cc},
                        {"period", rep.period},
                        {"violated", rep.violated},
                        {"violation_x", rep.violation_x},
                        {"component", rep.component},
                        {"within_periods", rep.within_periods},
                        {"windings", rep.windings},
                        {"rotation_rate", rep.rotation_rate}});
            std::cout << "model2 demo c = " << num(cc) << " period = " << num(rep.period);
            if (rep.violated) std::cout << " " << rep.component << " < 0 at x = " << num(rep.violation_x);
            else std::cout << " no sign violation";
            std::cout << "\n";
        } else if (active == pde_scalar || active == pde_model1 || active == pde_model2) {
            const bool m2 = active == pde_model2;
            const double cc = c2.value_or(m2 ? -0.9 : -0.1);
            const auto spec = m2 ? build_model(common, 1.0 / 6.0, 6.0) : build_model(common);
            Grid g;
            g.lo = po.lo;
            g.hi = po.hi;
            g.dx = po.dx;
            g.dt = po.dt;
            g.snapshot_interval = po.snapshot;
            g.frame_speed = po.frame == "comoving" ? cc : 0.0;
            EvolutionRecord rec;
            if (active == pde_scalar && po.initial == "step") {
                GridState s;
                for (double x : g.nodes()) s.u.push_back(x < 0.0 ? 0.0 : 1.0);
                rec = evolve_scalar(spec, s, {}, po.T, g);
            } else {
                const auto sp = scalar_profile(spec, cc);
                if (active == pde_scalar) {
                    const auto control = po.no_control ? MovingControl{} : effort_control(sp, spec, cc);
                    rec = evolve_scalar(spec, sample_profile(sp, g), control, po.T, g);
                } else if (active == pde_model1) {
                    const auto control = po.no_control ? MovingControl{} : effort_control(sp, spec, cc);
                    rec = evolve_model1(spec, sample_tree(sp, po.kappa1, cc, g), control, po.kappa1, po.T, g);
                } else {
                    const auto sol = solve_vtheta(sp, spec, q, cc);
                    const auto control = po.no_control ? MovingControl{} : removal_control(sp, cc);
                    rec = evolve_model2(spec, sample_triple(sol.path, g), control, q, po.T, g);
                }
            }
            write_snapshots(common.out, rec, po.stride);
            const auto summary = record_summary(rec);
            write_json(common, *active, command, summary);
            std::cout << command << " T = " << num(po.T) << " frame = " << po.frame << " drift u = " << num(rec.drift_u);
            if (m2) std::cout << " v = " << num(rec.drift_v);
            if (active != pde_scalar) std::cout << " theta = " << num(rec.drift_theta);
            if (!summary["speed"].is_null()) std::cout << " speed = " << num(summary["speed"].get<double>());
            std::cout << "\n";
        } else if (active == verify_cmd) {
            int failed = 0;
            json jr = json::array();
            acceptance::run(criteria, [&](const acceptance::CriterionResult& r) {
                std::cout << r.line() << std::endl;
                if (!r.passed) ++failed;
                json checks = json::array();
                for (const auto& l : r.checks) checks.push_back({{"check", l.what}, {"ok", l.ok}, {"detail", l.detail}});
                jr.push_back({{"id", r.id},
                              {"title", r.title},
                              {"passed", r.passed},
                              {"seconds", r.seconds},
                              {"budget", r.budget},
                              {"checks", checks}});
            });
            write_json(common, *active, command, {{"criteria", jr}, {"failed", failed}});
            std::cout << failed << " criteria failed\n";
            if (failed) return 1;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
