// tandem: command-line front end.
//
// Exit status: 0 success, 2 invalid input, 3 a checked property failed,
// 4 value iteration ran out of iterations, 1 anything else.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "tandem/config.hpp"
#include "tandem/dp.hpp"
#include "tandem/hamiltonian.hpp"
#include "tandem/roots.hpp"
#include "tandem/sim.hpp"
#include "tandem/value.hpp"
#include "tandem/viscosity.hpp"

namespace {

using json = nlohmann::json;
using namespace tandem;

constexpr int kSchemaVersion = 1;

enum Exit { kOk = 0, kOther = 1, kInvalid = 2, kAssertion = 3, kIterationLimit = 4 };

struct AssertionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double v) {
    std::ostringstream out;
    out << std::setprecision(12) << v;
    return out.str();
}

// Rounds to 12 significant digits so JSON output is as stable as the CSV.
double round12(double v) {
    if (!std::isfinite(v)) {
        return v;
    }
    return std::stod(num(v));
}

json round12(const Vector& v) {
    json a = json::array();
    for (double x : v) {
        a.push_back(round12(x));
    }
    return a;
}

json one_based(const IndexSet& s) {
    json a = json::array();
    for (std::size_t i : s) {
        a.push_back(i + 1);
    }
    return a;
}

std::string join_one_based(const IndexSet& s) {
    std::string out;
    for (std::size_t k = 0; k < s.size(); ++k) {
        out += (k ? ";" : "") + std::to_string(s[k] + 1);
    }
    return out;
}

Vector parse_vector(const std::string& text, const char* field) {
    Vector out;
    std::istringstream in(text);
    std::string cell;
    while (std::getline(in, cell, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (used != cell.size()) {
                throw std::invalid_argument(cell);
            }
        } catch (const std::exception&) {
            throw ValidationError(field, "not a number: '" + cell + "'");
        }
    }
    return out;
}

std::vector<std::size_t> parse_counts(const std::string& text, const char* field) {
    std::vector<std::size_t> out;
    for (double v : parse_vector(text, field)) {
        if (!(v >= 1.0) || v != std::floor(v)) {
            throw ValidationError(field, "expected positive integers");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::string csv_header(std::size_t J, const std::string& prefix, const std::string& rest) {
    std::string h;
    for (std::size_t i = 0; i < J; ++i) {
        h += prefix + std::to_string(i + 1) + ",";
    }
    return h + rest;
}

std::string csv_point(const Vector& x) {
    std::string s;
    for (double v : x) {
        s += num(v) + ",";
    }
    return s;
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) {
                throw ValidationError("out", "cannot write " + path);
            }
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

void emit_json(Output& out, json doc) {
    doc["schema_version"] = kSchemaVersion;
    out.stream() << doc.dump(2) << "\n";
}

struct Options {
    std::string config_path;
    std::string out_path;
    std::string at;
    std::string p;
    std::size_t resolution = 0;
    std::size_t n = 0;
    std::size_t paths = 0;
    std::uint64_t seed = 0;
    double tol = 0.0;
    std::size_t samples = 10000;
    bool warm = false;
    bool is = false;
    std::string table_path;
    std::string n_list = "1,2,4,8";
    std::string policy = "serve-all";
};

RunConfig load_config(const Options& o) {
    if (o.config_path.empty()) {
        throw ValidationError("config", "--config is required");
    }
    return parse_config(read_text_file(o.config_path));
}

template <typename T>
T pick(T flag, const std::optional<T>& from_config, T fallback) {
    if (flag != T{}) {
        return flag;
    }
    return from_config ? *from_config : fallback;
}

Vector point_or_origin(const Options& o, const NetworkParams& params) {
    if (o.at.empty()) {
        return Vector(params.J, 0.0);
    }
    Vector x = parse_vector(o.at, "at");
    check_dimension(x, params.J, "at");
    return x;
}

int cmd_roots(const Options& o) {
    const RunConfig cfg = load_config(o);
    Output out(o.out_path);
    out.stream() << "i,mu_i,beta_i,residual\n";
    bool ok = true;
    for (std::size_t i = 0; i < cfg.params.J; ++i) {
        const RootResult r = beta_root(cfg.params.lambda, cfg.params.mu[i], cfg.params.c);
        const double residual = std::abs(characteristic(cfg.params.lambda, cfg.params.mu[i], cfg.params.c, r.beta));
        ok = ok && residual <= root_tolerance(cfg.params.lambda, cfg.params.mu[i], cfg.params.c);
        out.stream() << i + 1 << "," << num(cfg.params.mu[i]) << "," << num(r.beta) << "," << num(residual) << "\n";
    }
    if (!ok) {
        throw AssertionFailure("root residual above tolerance");
    }
    return kOk;
}

int cmd_value(const Options& o) {
    const RunConfig cfg = load_config(o);
    if (o.at.empty()) {
        throw ValidationError("at", "--at is required");
    }
    const Vector x = point_or_origin(o, cfg.params);
    const ExplicitSolution sol(cfg.params);
    const ValueBreakdown v = sol.value(x);
    json doc;
    doc["x"] = round12(x);
    doc["V"] = round12(v.value);
    doc["terms"] = round12(v.terms);
    doc["argmin"] = one_based(v.argmin);
    doc["A_of_x"] = one_based(sol.a_of_x(x));
    doc["bottleneck"] = v.bottleneck + 1;
    doc["class"] = to_string(classify(x, cfg.params));
    Output out(o.out_path);
    emit_json(out, doc);
    return kOk;
}

int cmd_bottleneck_map(const Options& o) {
    const RunConfig cfg = load_config(o);
    const std::size_t R = pick(o.resolution, cfg.resolution, std::size_t{21});
    const ExplicitSolution sol(cfg.params);
    Output out(o.out_path);
    out.stream() << csv_header(cfg.params.J, "x", "V,argmin,A_of_x") << "\n";
    for (const RegionRow& row : region_map(sol, R)) {
        out.stream() << csv_point(row.x) << num(row.value) << "," << join_one_based(row.argmin) << ","
                     << join_one_based(row.a_of_x) << "\n";
    }
    return kOk;
}

int cmd_hamiltonian(const Options& o) {
    const RunConfig cfg = load_config(o);
    if (o.p.empty()) {
        throw ValidationError("p", "--p is required");
    }
    const Vector p = parse_vector(o.p, "p");
    check_dimension(p, cfg.params.J, "p");
    const RateVector m = optimal_rates(p, cfg.params);
    const std::vector<Forcing> forcing = optimal_controls(p, cfg.params);

    json doc;
    doc["p"] = round12(p);
    doc["H"] = round12(hamiltonian(p, cfg.params));
    doc["optimal_rates"] = {{"lambda_bar", round12(m.lambda_bar)}, {"mu_bar", round12(m.mu_bar)}};
    json controls = json::array();
    ControlVector u(cfg.params.J);
    for (std::size_t i = 0; i < forcing.size(); ++i) {
        controls.push_back(to_string(forcing[i]));
        u[i] = forcing[i] == Forcing::idle ? 0.0 : 1.0;
    }
    doc["forced_controls"] = controls;
    const RelationCheck prod = check_product_relation(p, cfg.params);
    doc["product_relation"] = {{"residual", round12(prod.residual)}, {"tolerance", round12(prod.tolerance)}, {"ok", prod.ok}};
    try {
        const RelationCheck sum = check_sum_relation(u, p, cfg.params);
        doc["sum_relation"] = {{"residual", round12(sum.residual)}, {"tolerance", round12(sum.tolerance)}, {"ok", sum.ok}};
    } catch (const PreconditionError&) {
        doc["sum_relation"] = nullptr;  // only meaningful where H(p,u) = 0
    }
    Output out(o.out_path);
    emit_json(out, doc);
    return kOk;
}

int cmd_check_pde(const Options& o) {
    const RunConfig cfg = load_config(o);
    CheckOptions opts;
    opts.tol = pick(o.tol, cfg.tol, 1e-9);
    opts.seed = pick(o.seed, cfg.seed, opts.seed);
    opts.samples = o.samples;
    const std::size_t R = pick(o.resolution, cfg.resolution, std::size_t{21});
    const PdeScanSummary s = pde_scan(ExplicitSolution(cfg.params), R, opts);
    json doc;
    doc["resolution"] = R;
    doc["points"] = s.points;
    doc["interior_points"] = s.interior_points;
    doc["boundary_plus_points"] = s.boundary_plus_points;
    doc["boundary_c_points"] = s.boundary_c_points;
    doc["boundary_o_points"] = s.boundary_o_points;
    doc["extremes_checked"] = s.extremes_checked;
    doc["superdiff_samples"] = s.superdiff_samples;
    doc["relaxed_samples"] = s.relaxed_samples;
    doc["relaxed_empty"] = s.relaxed_empty;
    doc["subdiff_samples"] = s.subdiff_samples;
    doc["max_residual_interior"] = round12(s.max_residual_interior);
    doc["max_h_violation"] = round12(s.max_h_violation);
    doc["min_extreme_h"] = round12(s.min_extreme_h);
    doc["boundary_o_max_abs_V"] = round12(s.boundary_o_max_abs_V);
    doc["pass"] = s.pass;
    doc["failures"] = s.failures;
    Output out(o.out_path);
    emit_json(out, doc);
    return s.pass ? kOk : kAssertion;
}

int cmd_solve_dp(const Options& o) {
    const RunConfig cfg = load_config(o);
    DPOptions opts;
    opts.tol = pick(o.tol, cfg.tol, 1e-10);
    opts.warm_start = o.warm;
    const std::size_t n = pick(o.n, cfg.n, std::size_t{8});
    const Vector x = point_or_origin(o, cfg.params);
    const DPResult r = solve(cfg.params, n, opts);

    json doc;
    doc["n"] = n;
    doc["warm_start"] = o.warm;
    doc["Vn_at"] = {{"x", round12(x)}, {"value", round12(r.Vn_at(x))}};
    doc["V_at"] = round12(ExplicitSolution(cfg.params)(x));
    doc["states"] = r.lattice.size();
    doc["iterations"] = r.iterations;
    doc["final_delta"] = round12(r.final_delta);
    doc["converged"] = r.converged;
    Output out(o.out_path);
    emit_json(out, doc);

    if (!o.table_path.empty()) {
        std::ofstream table(o.table_path, std::ios::binary);
        if (!table) {
            throw ValidationError("table", "cannot write " + o.table_path);
        }
        table << csv_header(cfg.params.J, "x", "W,Vn");
        for (std::size_t i = 0; i < cfg.params.J; ++i) {
            table << ",u" << i + 1;
        }
        table << "\n";
        for (std::size_t idx = 0; idx < r.lattice.size(); ++idx) {
            table << csv_point(r.lattice.point(idx)) << num(r.W[idx]) << "," << num(r.Vn[idx]);
            for (std::size_t i = 0; i < cfg.params.J; ++i) {
                table << "," << ((r.policy[idx] >> i) & 1u);
            }
            table << "\n";
        }
    }
    return r.converged ? kOk : kIterationLimit;
}

int cmd_convergence(const Options& o) {
    const RunConfig cfg = load_config(o);
    DPOptions opts;
    opts.tol = pick(o.tol, cfg.tol, 1e-10);
    const Vector x = point_or_origin(o, cfg.params);
    const auto rows = convergence_study(cfg.params, parse_counts(o.n_list, "n-list"), x, opts);
    Output out(o.out_path);
    out.stream() << "n," << csv_header(cfg.params.J, "x", "Vn,V,gap,iterations") << "\n";
    for (const ConvergenceRow& row : rows) {
        out.stream() << row.n << "," << csv_point(row.x0_n) << num(row.Vn) << "," << num(row.V) << ","
                     << num(row.gap) << "," << row.iterations << "\n";
    }
    return kOk;
}

PolicySpec parse_policy(const std::string& text) {
    if (text == "serve-all") {
        return PolicySpec::serve_all();
    }
    if (text == "bottleneck" || text == "bottleneck-only") {
        return PolicySpec::bottleneck();
    }
    if (text == "idle-all") {
        return PolicySpec::idle_all();
    }
    if (text.rfind("custom@", 0) == 0) {
        return PolicySpec::custom(read_text_file(text.substr(7)));
    }
    throw ValidationError("policy", "expected serve-all, bottleneck or custom@FILE, got '" + text + "'");
}

int cmd_simulate(const Options& o) {
    const RunConfig cfg = load_config(o);
    const std::size_t n = pick(o.n, cfg.n, std::size_t{4});
    const std::size_t paths = pick(o.paths, cfg.paths, std::size_t{100000});
    const std::uint64_t seed = pick(o.seed, cfg.seed, std::uint64_t{1});
    const Vector x = point_or_origin(o, cfg.params);
    const PolicySpec spec = parse_policy(o.policy);
    const Estimate e = o.is ? is_estimate(cfg.params, n, spec, x, paths, seed)
                            : mc_estimate(cfg.params, n, spec, x, paths, seed);
    json doc;
    doc["n"] = n;
    doc["policy"] = policy_name(spec);
    doc["importance_sampling"] = o.is;
    doc["x0"] = round12(x);
    doc["mean"] = round12(e.mean);
    doc["stderr"] = round12(e.std_error);
    doc["n_traj"] = e.n_traj;
    doc["v_hat"] = round12(e.v_hat);
    doc["exit_face_counts"] = {{"boundary-o", e.exits_o}, {"boundary-c", e.exits_c}};
    Output out(o.out_path);
    emit_json(out, doc);
    return kOk;
}

int cmd_compare(const Options& o) {
    const RunConfig cfg = load_config(o);
    const std::size_t n = pick(o.n, cfg.n, std::size_t{8});
    const std::size_t paths = pick(o.paths, cfg.paths, std::size_t{100000});
    const std::uint64_t seed = pick(o.seed, cfg.seed, std::uint64_t{1});
    const Vector x = point_or_origin(o, cfg.params);
    const PolicyComparison cmp = policy_comparison(cfg.params, n, x, paths, seed);
    json rows = json::array();
    for (const PolicyRow& row : cmp.rows) {
        rows.push_back({{"policy", row.name},
                        {"mean", round12(row.estimate.mean)},
                        {"stderr", round12(row.estimate.std_error)},
                        {"v_hat", round12(row.estimate.v_hat)},
                        {"v_lo", round12(row.v_lo)},
                        {"v_hi", round12(row.v_hi)},
                        {"exit_face_counts", {{"boundary-o", row.estimate.exits_o}, {"boundary-c", row.estimate.exits_c}}}});
    }
    json doc;
    doc["n"] = n;
    doc["x0"] = round12(x);
    doc["rows"] = rows;
    doc["bottleneck_at_x0"] = cmp.bottleneck_at_x0 + 1;
    doc["gap_serve_all_vs_bottleneck_only"] = round12(cmp.gap_bottleneck);
    doc["gap_serve_all_vs_idle_bottleneck"] = round12(cmp.gap_idle_bottleneck);
    Output out(o.out_path);
    emit_json(out, doc);
    return kOk;
}

int cmd_regions_single_server(const Options& o) {
    if (o.config_path.empty()) {
        throw ValidationError("config", "--config is required");
    }
    const SingleServerParams params = parse_single_server_config(read_text_file(o.config_path));
    const std::size_t R = o.resolution ? o.resolution : 21;
    std::cerr << "warning: " << kSingleServerWarning << "\n";
    Output out(o.out_path);
    out.stream() << csv_header(params.J(), "x", "V,priority") << "\n";
    for (const RegionRow& row : single_server_region_map(params, R)) {
        out.stream() << csv_point(row.x) << num(row.value) << "," << join_one_based(row.argmin) << "\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Risk-sensitive overflow control of tandem queues"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--config", o.config_path, "Instance JSON file");
    app.add_option("--out", o.out_path, "Write output here instead of stdout");

    auto* roots = app.add_subcommand("roots", "Characteristic exponents (CSV: i,mu_i,beta_i,residual)");
    auto* value = app.add_subcommand("value", "Value function and bottleneck at a point (JSON)");
    value->add_option("--at", o.at, "x1,...,xJ")->required();
    auto* bmap = app.add_subcommand("bottleneck-map", "V, argmin and A(x) over a grid (CSV)");
    bmap->add_option("--resolution", o.resolution, "Points per axis (default 21)");
    auto* ham = app.add_subcommand("hamiltonian", "H(p), optimal rates, forced controls (JSON)");
    ham->add_option("--p", o.p, "p1,...,pJ")->required();
    auto* pde = app.add_subcommand("check-pde", "Viscosity-solution checks over a grid (JSON)");
    pde->add_option("--resolution", o.resolution, "Points per axis (default 21)");
    pde->add_option("--tol", o.tol, "Inequality tolerance (default 1e-9)");
    pde->add_option("--seed", o.seed, "Sampling seed");
    pde->add_option("--samples", o.samples, "Random elements per point (default 10000)");
    auto* dp = app.add_subcommand("solve-dp", "Value iteration on the scaled lattice (JSON)");
    dp->add_option("--n", o.n, "Scale (default 8)");
    dp->add_flag("--warm", o.warm, "Start from exp(-n V)");
    dp->add_option("--tol", o.tol, "Sup-norm accuracy (default 1e-10)");
    dp->add_option("--at", o.at, "Report V^n here (default origin)");
    dp->add_option("--table", o.table_path, "Full table CSV: x1..xJ,W,Vn,u1..uJ");
    auto* conv = app.add_subcommand("convergence", "V^n versus V at a point (CSV)");
    conv->add_option("--n-list", o.n_list, "Comma-separated scales (default 1,2,4,8)");
    conv->add_option("--at", o.at, "x0 (default origin)");
    conv->add_option("--tol", o.tol, "Sup-norm accuracy (default 1e-10)");
    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimate of E exp(-n c sigma) (JSON)");
    sim->add_option("--n", o.n, "Scale (default 4)");
    sim->add_option("--policy", o.policy, "serve-all | bottleneck | custom@FILE");
    sim->add_option("--paths", o.paths, "Trajectories (default 100000)");
    sim->add_option("--seed", o.seed, "Master seed (default 1)");
    sim->add_option("--at", o.at, "x0 (default origin)");
    sim->add_flag("--is", o.is, "Importance sampling with the bottleneck tilt");
    auto* cmp = app.add_subcommand("compare-policies", "Serve-all, bottleneck-only and idling variants (JSON)");
    cmp->add_option("--n", o.n, "Scale (default 8)");
    cmp->add_option("--paths", o.paths, "Trajectories per policy (default 100000)");
    cmp->add_option("--seed", o.seed, "Master seed (default 1)");
    cmp->add_option("--at", o.at, "x0 (default origin)");
    auto* single = app.add_subcommand("regions-single-server", "Priority map of the multiclass single server (CSV)");
    single->add_option("--resolution", o.resolution, "Points per axis (default 21)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalid;
    }

    try {
        if (*roots) return cmd_roots(o);
        if (*value) return cmd_value(o);
        if (*bmap) return cmd_bottleneck_map(o);
        if (*ham) return cmd_hamiltonian(o);
        if (*pde) return cmd_check_pde(o);
        if (*dp) return cmd_solve_dp(o);
        if (*conv) return cmd_convergence(o);
        if (*sim) return cmd_simulate(o);
        if (*cmp) return cmd_compare(o);
        if (*single) return cmd_regions_single_server(o);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const AssertionFailure& e) {
        std::cerr << "assertion failed: " << e.what() << "\n";
        return kAssertion;
    } catch (const IterationLimitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIterationLimit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
    return kOther;
}
