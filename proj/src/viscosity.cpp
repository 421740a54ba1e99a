#include "tandem/viscosity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "tandem/hamiltonian.hpp"
#include "tandem/parallel.hpp"
#include "tandem/random.hpp"

namespace tandem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum Salt : std::uint64_t { kSaltSuper = 1, kSaltRelaxed = 2, kSaltSub = 3 };

std::string describe(const Vector& v) {
    std::ostringstream out;
    out.precision(12);
    out << '(';
    for (std::size_t i = 0; i < v.size(); ++i) {
        out << (i ? ", " : "") << v[i];
    }
    out << ')';
    return out.str();
}

void fail(CheckReport& report, const std::string& what) {
    if (report.pass) {
        report.violation = what;
    }
    report.pass = false;
}

// Uniform weights on the simplex over `support` (exponential spacings).
void draw_nu(std::mt19937_64& rng, const IndexSet& support, Vector& nu) {
    std::fill(nu.begin(), nu.end(), 0.0);
    if (support.size() == 1) {
        nu[support.front()] = 1.0;
        return;
    }
    std::exponential_distribution<double> exp1(1.0);
    double total = 0.0;
    for (std::size_t k : support) {
        nu[k] = exp1(rng);
        total += nu[k];
    }
    for (std::size_t k : support) {
        nu[k] /= total;
    }
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * std::generate_canonical<double, 53>(rng);
}

// Sign-constrained coordinates sit exactly on their face (0) a quarter of
// the time, so lower-dimensional polytopes still get accepted samples.
double face_or_uniform(std::mt19937_64& rng, double lo, double hi) {
    if (lo <= 0.0 && 0.0 <= hi && std::generate_canonical<double, 53>(rng) < 0.25) {
        return 0.0;
    }
    return uniform(rng, lo, hi);
}

// Whether some delta meets the strict constraints for weights nu: take B and
// O coordinates at 0 and I coordinates at their largest admissible value.
bool strict_set_nonempty(const ActiveSets& sets, const Vector& nu, const Vector& betas, double margin) {
    double next = 0.0;
    for (std::size_t i = betas.size(); i-- > 0;) {
        if (!sets.is_empty(i)) {
            next = 0.0;
            continue;
        }
        next = nu[i] * betas[i] + next - margin;
        if (next < 0.0) {
            return false;
        }
    }
    return true;
}

// max_{i in I} gamma_i . p, or -inf when I is empty.
double max_gamma_on_empty(const Vector& p, const ActiveSets& sets) {
    double m = -kInf;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (sets.is_empty(i)) {
            m = std::max(m, gamma_dot(p, i));
        }
    }
    return m;
}

double min_gamma_on_empty(const Vector& p, const ActiveSets& sets) {
    double m = kInf;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (sets.is_empty(i)) {
            m = std::min(m, gamma_dot(p, i));
        }
    }
    return m;
}

bool has_free_delta(const ActiveSets& sets) {
    for (Coord c : sets.coord) {
        if (c != Coord::open) {
            return true;
        }
    }
    return false;
}

void superdiff_element_into(const Vector& nu, const Vector& delta, const Vector& betas, Vector& p) {
    double tail = 0.0;
    for (std::size_t i = betas.size(); i-- > 0;) {
        tail += nu[i] * betas[i];
        p[i] = -tail + delta[i];
    }
}

}  // namespace

std::vector<ExtremePoint> superdiff_extremes(const Vector& x, const ExplicitSolution& solution) {
    const ActiveSets sets = active_sets(x, solution.params(), /*require_domain=*/true);
    const IndexSet allowed = solution.a_of_x(sets);
    const auto J = static_cast<std::ptrdiff_t>(solution.J());
    std::vector<ExtremePoint> out;
    for (std::size_t k : allowed) {
        const auto kk = static_cast<std::ptrdiff_t>(k);
        std::ptrdiff_t s = -1;
        for (std::ptrdiff_t j = kk; j >= 0; --j) {
            if (!sets.is_empty(static_cast<std::size_t>(j))) {
                s = j;
                break;
            }
        }
        std::ptrdiff_t t = J;
        for (std::ptrdiff_t j = kk + 1; j < J; ++j) {
            if (!sets.is_full(static_cast<std::size_t>(j))) {
                t = j;
                break;
            }
        }
        const double beta = solution.beta(k);
        for (std::ptrdiff_t r = s; r <= t - 1; ++r) {
            ExtremePoint e;
            e.k = k;
            e.r = r;
            e.s = s;
            e.t = t;
            e.delta.assign(solution.J(), 0.0);
            for (std::ptrdiff_t i = 0; i < J; ++i) {
                e.delta[static_cast<std::size_t>(i)] = beta * ((i > r ? 1.0 : 0.0) - (i > kk ? 1.0 : 0.0));
            }
            out.push_back(std::move(e));
        }
    }
    return out;
}

double h_value(std::size_t k, std::ptrdiff_t r, const ExplicitSolution& solution) {
    const NetworkParams& params = solution.params();
    if (k >= params.J || r < kArrivalTerm || r >= static_cast<std::ptrdiff_t>(params.J)) {
        throw std::out_of_range("h_value: index out of range");
    }
    if (r == kArrivalTerm) {
        return params.c;
    }
    const double beta = solution.beta(k);
    return params.c + params.lambda * (1.0 - std::exp(beta)) +
           params.mu[static_cast<std::size_t>(r)] * (1.0 - std::exp(-beta));
}

double h_concave(const Vector& nu, const Vector& delta, const ExplicitSolution& solution) {
    const NetworkParams& params = solution.params();
    const Vector& betas = solution.betas();
    const std::size_t J = params.J;
    double weighted = 0.0;
    for (std::size_t i = 0; i < J; ++i) {
        weighted += nu[i] * betas[i];
    }
    double h = params.c + params.lambda * (1.0 - std::exp(weighted - delta[0]));
    for (std::size_t i = 0; i < J; ++i) {
        const double next = i + 1 < J ? delta[i + 1] : 0.0;
        h += params.mu[i] * (1.0 - std::exp(-nu[i] * betas[i] + delta[i] - next));
    }
    return h;
}

Vector superdiff_element(const Vector& nu, const Vector& delta, const ExplicitSolution& solution) {
    check_dimension(nu, solution.J(), "nu");
    check_dimension(delta, solution.J(), "delta");
    Vector p(solution.J());
    superdiff_element_into(nu, delta, solution.betas(), p);
    return p;
}

CheckReport check_superdifferential(const Vector& x, const ExplicitSolution& solution, const CheckOptions& options) {
    const NetworkParams& params = solution.params();
    const std::size_t J = params.J;
    const Vector& betas = solution.betas();
    const ActiveSets sets = active_sets(x, params, /*require_domain=*/true);
    const IndexSet allowed = solution.a_of_x(sets);

    CheckReport report;
    report.min_h = kInf;
    report.max_h = -kInf;
    report.min_extreme_h = kInf;

    Vector nu(J, 0.0);
    Vector p(J, 0.0);
    for (const ExtremePoint& e : superdiff_extremes(x, solution)) {
        ++report.extremes;
        const double h = h_value(e.k, e.r, solution);
        std::fill(nu.begin(), nu.end(), 0.0);
        nu[e.k] = 1.0;
        superdiff_element_into(nu, e.delta, betas, p);
        const double H = hamiltonian(p, params);
        report.max_mismatch = std::max(report.max_mismatch, std::abs(h - H));
        report.min_extreme_h = std::min(report.min_extreme_h, h);
        report.min_h = std::min(report.min_h, h);
        report.max_h = std::max(report.max_h, h);
        report.max_violation = std::max(report.max_violation, -h);

        std::ostringstream where;
        where << "extreme (k=" << e.k + 1 << ", r=" << e.r + 1 << ") h=" << h;
        const double mu_k = params.mu[e.k];
        if (h < -options.extreme_tol) {
            fail(report, where.str() + " is negative");
        }
        if (e.r == kArrivalTerm && h != params.c) {
            fail(report, where.str() + " differs from c");
        }
        if (e.r == static_cast<std::ptrdiff_t>(e.k) && std::abs(h) > 1e-10) {
            fail(report, where.str() + " does not vanish");
        }
        if (e.r >= 0 && e.r != static_cast<std::ptrdiff_t>(e.k)) {
            const double mu_r = params.mu[static_cast<std::size_t>(e.r)];
            if (e.r < static_cast<std::ptrdiff_t>(e.k) && !(mu_k <= mu_r)) {
                fail(report, where.str() + ": r < k requires mu_k <= mu_r");
            }
            if (e.r > static_cast<std::ptrdiff_t>(e.k) && !(mu_k < mu_r)) {
                fail(report, where.str() + ": k < r requires mu_k < mu_r");
            }
            if (mu_r != mu_k && !(h > 0.0)) {
                fail(report, where.str() + " should be strictly positive");
            }
        }
        if (std::max(H, max_gamma_on_empty(p, sets)) < -options.tol) {
            fail(report, where.str() + " violates the superdifferential inequality");
        }
        if (std::abs(h - H) > options.tol) {
            fail(report, where.str() + " disagrees with H(p)=" + std::to_string(H));
        }
    }

    const bool singleton = allowed.size() == 1 && !has_free_delta(sets);
    const std::size_t target = singleton ? 1 : options.samples;
    const std::size_t max_attempts = 1000 * std::max<std::size_t>(target, 1);
    std::mt19937_64 rng = make_stream(options.seed, options.stream, kSaltSuper);
    Vector delta(J, 0.0);
    Vector head(J + 1, 0.0);  // head[i] = sum_{j<i} nu_j beta_j
    const double inflation = std::max(1.0, options.box_inflation);

    while (report.samples < target && report.attempts < max_attempts) {
        ++report.attempts;
        draw_nu(rng, allowed, nu);
        for (std::size_t i = 0; i < J; ++i) {
            head[i + 1] = head[i] + nu[i] * betas[i];
        }
        const double total = head[J];
        const double pad = (inflation - 1.0) * total;

        bool feasible = true;
        delta[0] = sets.is_empty(0) ? face_or_uniform(rng, 0.0, inflation * total) : 0.0;
        for (std::size_t i = 1; i < J && feasible; ++i) {
            if (sets.is_open(i)) {
                delta[i] = 0.0;
                continue;
            }
            double lo = delta[0] - head[i] - pad;
            double hi = total - head[i] + pad;
            if (sets.is_empty(i)) {
                lo = std::max(lo, 0.0);
            } else {
                hi = std::min(hi, 0.0);
            }
            if (lo > hi) {
                feasible = false;
                break;
            }
            delta[i] = face_or_uniform(rng, lo, hi);
        }
        for (std::size_t i = 0; i < J && feasible; ++i) {
            const double next = i + 1 < J ? delta[i + 1] : 0.0;
            if (-nu[i] * betas[i] + delta[i] - next > 0.0) {
                feasible = false;
            }
        }
        if (!feasible) {
            continue;
        }
        ++report.samples;

        for (std::size_t i = 0; i < J; ++i) {
            const double slack = 1e-12 * (1.0 + total);
            if (delta[i] < delta[0] - head[i] - slack || delta[i] > total - head[i] + slack) {
                fail(report, "sample delta=" + describe(delta) + " escapes the bounding box");
            }
        }
        const double h = h_concave(nu, delta, solution);
        superdiff_element_into(nu, delta, betas, p);
        const double H = hamiltonian(p, params);
        ++report.active;
        report.max_mismatch = std::max(report.max_mismatch, std::abs(h - H));
        report.min_h = std::min(report.min_h, h);
        report.max_h = std::max(report.max_h, h);
        report.max_violation = std::max(report.max_violation, -h);
        if (h < -options.tol) {
            fail(report, "sample nu=" + describe(nu) + " delta=" + describe(delta) + " has h < 0");
        }
        if (h < report.min_extreme_h - 1e-9) {
            fail(report, "sample nu=" + describe(nu) + " delta=" + describe(delta) +
                             " falls below every extreme point");
        }
        if (std::abs(h - H) > options.tol) {
            fail(report, "sample nu=" + describe(nu) + " delta=" + describe(delta) + " h differs from H(p)");
        }
        if (std::max(H, max_gamma_on_empty(p, sets)) < -options.tol) {
            fail(report, "sample p=" + describe(p) + " violates the superdifferential inequality");
        }
    }
    if (report.samples < target) {
        fail(report, "rejection sampler accepted only " + std::to_string(report.samples) + " of " +
                         std::to_string(target) + " samples");
    }
    report.max_violation = std::max(report.max_violation, 0.0);
    return report;
}

CheckReport check_superdiff_relaxed(const Vector& x, const ExplicitSolution& solution, const CheckOptions& options) {
    const NetworkParams& params = solution.params();
    const std::size_t J = params.J;
    const Vector& betas = solution.betas();
    const ActiveSets sets = active_sets(x, params, /*require_domain=*/true);
    const IndexSet allowed = solution.a_of_x(sets);

    CheckReport report;
    report.min_h = kInf;
    report.max_h = -kInf;

    double scale = 0.0;
    for (double b : betas) {
        scale += b;
    }
    const double range = 2.0 * scale;

    Vector nu(J, 0.0);
    for (std::size_t k : allowed) {
        nu[k] = 1.0 / static_cast<double>(allowed.size());
    }
    if (!strict_set_nonempty(sets, nu, betas, options.strict_margin)) {
        report.skipped = true;
        report.note = "no element satisfies the strict constraints on I(x)";
        report.min_h = report.max_h = 0.0;
        return report;
    }

    const bool singleton = allowed.size() == 1 && !has_free_delta(sets);
    const std::size_t target = singleton ? 1 : options.samples;
    const std::size_t max_attempts = 1000 * std::max<std::size_t>(target, 1);
    std::mt19937_64 rng = make_stream(options.seed, options.stream, kSaltRelaxed);
    Vector delta(J, 0.0);
    Vector p(J, 0.0);

    while (report.samples < target && report.attempts < max_attempts) {
        ++report.attempts;
        draw_nu(rng, allowed, nu);
        bool feasible = true;
        double next = 0.0;
        for (std::size_t i = J; i-- > 0;) {
            switch (sets.coord[i]) {
                case Coord::open:
                    delta[i] = 0.0;
                    break;
                case Coord::full:
                    delta[i] = uniform(rng, -range, 0.0);
                    break;
                case Coord::empty: {
                    const double upper = nu[i] * betas[i] + next - options.strict_margin;
                    if (upper < 0.0) {
                        feasible = false;
                    } else {
                        delta[i] = uniform(rng, 0.0, upper);
                    }
                    break;
                }
            }
            if (!feasible) {
                break;
            }
            next = delta[i];
        }
        if (!feasible) {
            continue;
        }
        superdiff_element_into(nu, delta, betas, p);
        if (max_gamma_on_empty(p, sets) > -options.strict_margin) {
            continue;
        }
        ++report.samples;
        ++report.active;
        const double H = hamiltonian(p, params);
        report.min_h = std::min(report.min_h, H);
        report.max_h = std::max(report.max_h, H);
        report.max_violation = std::max(report.max_violation, -H);
        if (H < -options.tol) {
            fail(report, "sample p=" + describe(p) + " has H(p)=" + std::to_string(H));
        }
    }
    if (report.samples < target) {
        fail(report, "sampler accepted only " + std::to_string(report.samples) + " of " +
                         std::to_string(target) + " samples");
    }
    report.max_violation = std::max(report.max_violation, 0.0);
    return report;
}

CheckReport check_subdifferential(const Vector& x, const ExplicitSolution& solution, const CheckOptions& options) {
    const NetworkParams& params = solution.params();
    const std::size_t J = params.J;
    const ActiveSets sets = active_sets(x, params, /*require_domain=*/true);
    if (sets.any_full()) {
        throw ValidationError("x", "subdifferential check needs B(x) empty; point lies on the blockable face");
    }

    CheckReport report;
    report.min_h = kInf;
    report.max_h = -kInf;

    const ValueBreakdown v = solution.value(x);
    if (v.argmin.size() != 1) {
        report.skipped = true;
        report.note = "minimizer not unique: subdifferential is empty";
        return report;
    }
    const std::size_t k = v.argmin.front();
    const IndexSet empty = sets.empty_set();

    double scale = 0.0;
    for (double b : solution.betas()) {
        scale += b;
    }
    const double range = 2.0 * scale;

    const std::size_t target = empty.empty() ? 1 : options.samples;
    std::mt19937_64 rng = make_stream(options.seed, options.stream, kSaltSub);
    const Vector base = solution.b(k);
    Vector p(J, 0.0);
    for (std::size_t s = 0; s < target; ++s) {
        ++report.attempts;
        for (std::size_t i = 0; i < J; ++i) {
            p[i] = -base[i];
        }
        if (s > 0) {
            for (std::size_t i : empty) {
                p[i] += uniform(rng, -range, 0.0);
            }
        }
        ++report.samples;
        const double H = hamiltonian(p, params);
        const double min_gamma = min_gamma_on_empty(p, sets);
        const double checked = std::min(H, min_gamma);
        report.max_violation = std::max(report.max_violation, checked);
        if (checked > options.tol) {
            fail(report, "sample p=" + describe(p) + " violates the subdifferential inequality");
        }
        if (min_gamma > 0.0) {
            ++report.active;
            report.min_h = std::min(report.min_h, H);
            report.max_h = std::max(report.max_h, H);
        }
    }
    report.max_violation = std::max(report.max_violation, 0.0);
    return report;
}

namespace {

struct PointResult {
    BoundaryClass tag = BoundaryClass::outside;
    bool consistent = true;
    CheckReport super;
    CheckReport relaxed;
    CheckReport sub;
    bool sub_run = false;
    bool sub_skipped_full = false;
    double abs_value_o = 0.0;
    double residual = -1.0;
};

}  // namespace

PdeScanSummary pde_scan(const ExplicitSolution& solution, std::size_t resolution, const CheckOptions& options) {
    if (resolution < 3) {
        throw ValidationError("resolution", "pde scan needs at least 3 points per axis");
    }
    const NetworkParams& params = solution.params();
    const std::vector<Vector> grid = closed_grid(params.z, resolution);
    std::vector<PointResult> results(grid.size());

    parallel_for(grid.size(), [&](std::size_t idx) {
        const Vector& x = grid[idx];
        PointResult& out = results[idx];
        out.tag = classify(x, params);
        if (out.tag == BoundaryClass::boundary_o) {
            out.abs_value_o = std::abs(solution(x));
            return;
        }
        const ActiveSets sets = active_sets(x, params, /*require_domain=*/true);
        bool any_empty = false;
        bool any_full = false;
        for (std::size_t i = 0; i < params.J; ++i) {
            any_empty = any_empty || sets.is_empty(i);
            any_full = any_full || sets.is_full(i);
        }
        switch (out.tag) {
            case BoundaryClass::interior:
                out.consistent = !any_empty && !any_full;
                break;
            case BoundaryClass::boundary_c:
                out.consistent = any_full;
                break;
            case BoundaryClass::boundary_plus:
                out.consistent = any_empty && !any_full;
                break;
            default:
                out.consistent = false;
        }
        CheckOptions local = options;
        local.stream = idx;
        out.super = check_superdifferential(x, solution, local);
        out.relaxed = check_superdiff_relaxed(x, solution, local);
        if (any_full) {
            out.sub_skipped_full = true;
        } else {
            out.sub = check_subdifferential(x, solution, local);
            out.sub_run = true;
        }
        if (out.tag == BoundaryClass::interior) {
            if (const auto grad = solution.gradient(x)) {
                out.residual = std::abs(hamiltonian(*grad, params));
            }
        }
    });

    PdeScanSummary summary;
    summary.points = grid.size();
    summary.min_extreme_h = kInf;
    auto record = [&summary](const std::string& msg) {
        summary.pass = false;
        if (summary.failures.size() < 20) {
            summary.failures.push_back(msg);
        }
    };
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        const PointResult& r = results[idx];
        const std::string at = "x=" + describe(grid[idx]) + ": ";
        switch (r.tag) {
            case BoundaryClass::interior:
                ++summary.interior_points;
                break;
            case BoundaryClass::boundary_plus:
                ++summary.boundary_plus_points;
                break;
            case BoundaryClass::boundary_c:
                ++summary.boundary_c_points;
                break;
            case BoundaryClass::boundary_o:
                ++summary.boundary_o_points;
                break;
            case BoundaryClass::outside:
                record(at + "grid point classified outside");
                break;
        }
        if (r.tag == BoundaryClass::boundary_o) {
            summary.boundary_o_max_abs_V = std::max(summary.boundary_o_max_abs_V, r.abs_value_o);
            if (r.abs_value_o > 1e-12) {
                record(at + "V does not vanish on the overflow face");
            }
            continue;
        }
        if (!r.consistent) {
            record(at + "classification disagrees with the face sets");
        }
        summary.extremes_checked += r.super.extremes;
        summary.superdiff_samples += r.super.samples;
        summary.relaxed_samples += r.relaxed.samples;
        summary.relaxed_empty += r.relaxed.skipped ? 1 : 0;
        summary.min_extreme_h = std::min(summary.min_extreme_h, r.super.min_extreme_h);
        summary.max_h_violation =
            std::max({summary.max_h_violation, r.super.max_violation, r.relaxed.max_violation});
        if (!r.super.pass) {
            record(at + r.super.violation);
        }
        if (!r.relaxed.pass) {
            record(at + r.relaxed.violation);
        }
        if (r.sub_skipped_full) {
            ++summary.subdiff_skipped_full;
        }
        if (r.sub_run) {
            if (r.sub.skipped) {
                ++summary.subdiff_empty;
            } else {
                summary.subdiff_samples += r.sub.samples;
                summary.max_h_violation = std::max(summary.max_h_violation, r.sub.max_violation);
                if (!r.sub.pass) {
                    record(at + r.sub.violation);
                }
            }
        }
        if (r.residual >= 0.0) {
            summary.max_residual_interior = std::max(summary.max_residual_interior, r.residual);
            if (r.residual > options.tol) {
                record(at + "H(DV) residual " + std::to_string(r.residual));
            }
        }
    }
    if (summary.min_extreme_h == kInf) {
        summary.min_extreme_h = 0.0;
    }
    return summary;
}

}  // namespace tandem
