#include "tandem/dp.hpp"

#include <algorithm>
#include <cmath>

#include "tandem/parallel.hpp"
#include "tandem/value.hpp"

namespace tandem {

namespace {

// n * z as an integer when it is one (up to rounding), else nullopt.
std::optional<std::size_t> integral_scale(double nz) {
    const double k = std::round(nz);
    if (std::abs(nz - k) <= 1e-9 * std::max(1.0, nz)) {
        return static_cast<std::size_t>(k);
    }
    return std::nullopt;
}

ControlMask full_mask(std::size_t J) { return static_cast<ControlMask>((std::uint64_t{1} << J) - 1); }

struct SweepStats {
    double abs_delta = 0.0;
    double rel_delta = 0.0;
};

SweepStats sup_change(const Vector& before, const Vector& after) {
    SweepStats s;
    for (std::size_t i = 0; i < before.size(); ++i) {
        const double d = std::abs(after[i] - before[i]);
        s.abs_delta = std::max(s.abs_delta, d);
        s.rel_delta = std::max(s.rel_delta, after[i] > 0.0 ? d / after[i] : d);
    }
    return s;
}

}  // namespace

Lattice::Lattice(const NetworkParams& params, std::size_t n) : n_(n), z_(params.z) {
    params.validate();
    if (n == 0) {
        throw ValidationError("n", "scale must be a positive integer");
    }
    const std::size_t J = params.J;
    dims_.resize(J);
    for (std::size_t i = 0; i < J; ++i) {
        const double nz = static_cast<double>(n) * params.z[i];
        const auto k = integral_scale(nz);
        if (i == 0) {
            dims_[i] = k ? *k : static_cast<std::size_t>(std::ceil(nz));
        } else {
            dims_[i] = (k ? *k : static_cast<std::size_t>(std::floor(nz))) + 1;
        }
        if (dims_[i] == 0) {
            throw ValidationError("z", "buffer too small for the lattice");
        }
    }
    strides_.assign(J, 1);
    for (std::size_t i = J; i-- > 0;) {
        strides_[i] = size_;
        size_ *= dims_[i];
    }
}

std::size_t Lattice::index(const std::vector<std::size_t>& coords) const {
    if (coords.size() != J()) {
        throw ValidationError("x", "lattice point has the wrong dimension");
    }
    std::size_t idx = 0;
    for (std::size_t i = 0; i < J(); ++i) {
        if (coords[i] >= dims_[i]) {
            throw ValidationError("x", "lattice coordinate out of range");
        }
        idx += coords[i] * strides_[i];
    }
    return idx;
}

std::vector<std::size_t> Lattice::coords(std::size_t idx) const {
    if (idx >= size_) {
        throw ValidationError("x", "lattice index out of range");
    }
    std::vector<std::size_t> out(J());
    for (std::size_t i = 0; i < J(); ++i) {
        out[i] = coord(idx, i);
    }
    return out;
}

Vector Lattice::point(std::size_t idx) const {
    const auto c = coords(idx);
    Vector x(J());
    for (std::size_t i = 0; i < J(); ++i) {
        x[i] = std::min(static_cast<double>(c[i]) / static_cast<double>(n_), z_[i]);
    }
    return x;
}

std::optional<std::size_t> Lattice::nearest(const Vector& x) const {
    check_dimension(x, J(), "x");
    std::vector<std::size_t> c(J());
    for (std::size_t i = 0; i < J(); ++i) {
        const double k = std::round(std::max(0.0, x[i]) * static_cast<double>(n_));
        if (i == 0 && k >= static_cast<double>(dims_[0])) {
            return std::nullopt;
        }
        c[i] = std::min(static_cast<std::size_t>(k), dims_[i] - 1);
    }
    return index(c);
}

std::vector<Edge> transitions(const Lattice& lattice, std::size_t idx, ControlMask u, const NetworkParams& params) {
    if (idx >= lattice.size()) {
        throw ValidationError("x", "invalid lattice point");
    }
    const std::size_t J = lattice.J();
    std::vector<Edge> out;
    Edge arrival;
    arrival.rate = params.lambda;
    arrival.event = -1;
    if (lattice.coord(idx, 0) + 1 < lattice.dims()[0]) {
        arrival.target = idx + lattice.stride(0);
    }
    out.push_back(arrival);
    for (std::size_t i = 0; i < J; ++i) {
        if (!((u >> i) & 1u) || lattice.coord(idx, i) == 0) {
            continue;
        }
        Edge e;
        e.rate = params.mu[i];
        e.event = static_cast<std::ptrdiff_t>(i);
        if (i + 1 == J) {
            e.target = idx - lattice.stride(i);
        } else if (lattice.coord(idx, i + 1) + 1 < lattice.dims()[i + 1]) {
            e.target = idx - lattice.stride(i) + lattice.stride(i + 1);
        }
        out.push_back(e);
    }
    return out;
}

JumpTable::JumpTable(const NetworkParams& p, std::size_t n) : lattice(p, n), params(p) {
    const std::size_t J = params.J;
    arrival.assign(lattice.size(), kExit);
    service.assign(lattice.size() * J, kNoEdge);
    for (std::size_t idx = 0; idx < lattice.size(); ++idx) {
        for (const Edge& e : transitions(lattice, idx, full_mask(J), params)) {
            const std::size_t t = e.target ? *e.target : kExit;
            if (e.event < 0) {
                arrival[idx] = t;
            } else {
                service[idx * J + static_cast<std::size_t>(e.event)] = t;
            }
        }
    }
}

double bellman_ratio(const JumpTable& table, const Vector& W, std::size_t idx, ControlMask u) {
    const NetworkParams& params = table.params;
    const std::size_t J = params.J;
    const std::size_t a = table.arrival[idx];
    double num = params.lambda * (a == kExit ? 1.0 : W[a]);
    double den = params.c + params.lambda;
    for (std::size_t i = 0; i < J; ++i) {
        const std::size_t t = table.service[idx * J + i];
        if (!((u >> i) & 1u) || t == kNoEdge) {
            continue;
        }
        num += params.mu[i] * (t == kExit ? 1.0 : W[t]);
        den += params.mu[i];
    }
    return num / den;
}

void bellman_update(const JumpTable& table, const Vector& W, Vector& out, PolicyTable* policy) {
    const std::size_t size = table.lattice.size();
    if (W.size() != size) {
        throw ValidationError("W", "table size does not match the lattice");
    }
    out.resize(size);
    if (policy) {
        policy->resize(size);
    }
    const ControlMask top = full_mask(table.params.J);
    parallel_for(size, [&](std::size_t idx) {
        ControlMask best_u = top;
        double best = bellman_ratio(table, W, idx, top);
        for (ControlMask u = top; u-- > 0;) {
            const double r = bellman_ratio(table, W, idx, u);
            if (r < best) {
                best = r;
                best_u = u;
            }
        }
        out[idx] = best;
        if (policy) {
            (*policy)[idx] = best_u;
        }
    });
}

double contraction_factor(const NetworkParams& params) {
    double rates = params.lambda;
    for (double m : params.mu) {
        rates += m;
    }
    return rates / (params.c + rates);
}

double DPResult::Vn_at(const Vector& x) const {
    const auto idx = lattice.nearest(x);
    return idx ? Vn[*idx] : 0.0;
}

namespace {

double stop_threshold(const NetworkParams& params, double tol) {
    if (!(tol > 0.0)) {
        throw ValidationError("tol", "must be positive");
    }
    const double rho = contraction_factor(params);
    return tol * (1.0 - rho) / rho;
}

Vector initial_table(const JumpTable& table, bool warm) {
    Vector W(table.lattice.size(), 1.0);
    if (warm) {
        const ExplicitSolution solution(table.params);
        const double n = static_cast<double>(table.lattice.n());
        for (std::size_t idx = 0; idx < W.size(); ++idx) {
            W[idx] = std::exp(-n * solution(table.lattice.point(idx)));
        }
    }
    return W;
}

}  // namespace

DPResult solve(const NetworkParams& params, std::size_t n, const DPOptions& options) {
    const JumpTable table(params, n);
    const double threshold = stop_threshold(params, options.tol);
    Vector W = initial_table(table, options.warm_start);
    Vector next;
    PolicyTable policy;

    DPResult result{table.lattice, {}, {}, {}, 0, 0.0, 0.0, false};
    while (result.iterations < options.max_iter) {
        bellman_update(table, W, next, &policy);
        ++result.iterations;
        const SweepStats s = sup_change(W, next);
        W.swap(next);
        result.final_delta = s.abs_delta;
        result.final_rel_delta = s.rel_delta;
        if (s.rel_delta <= threshold) {
            result.converged = true;
            break;
        }
    }
    result.W = std::move(W);
    result.Vn.resize(result.W.size());
    for (std::size_t i = 0; i < result.W.size(); ++i) {
        result.Vn[i] = -std::log(result.W[i]) / static_cast<double>(n);
    }
    result.policy = std::move(policy);
    return result;
}

PolicyEvaluation evaluate_policy(const NetworkParams& params, std::size_t n, const PolicyTable& policy,
                                 const DPOptions& options) {
    const JumpTable table(params, n);
    if (policy.size() != table.lattice.size()) {
        throw ValidationError("policy", "table size does not match the lattice");
    }
    const double threshold = stop_threshold(params, options.tol);
    Vector W = initial_table(table, options.warm_start);
    Vector next(W.size());
    PolicyEvaluation out;
    while (out.iterations < options.max_iter) {
        parallel_for(W.size(), [&](std::size_t idx) { next[idx] = bellman_ratio(table, W, idx, policy[idx]); });
        ++out.iterations;
        const SweepStats s = sup_change(W, next);
        W.swap(next);
        out.final_delta = s.abs_delta;
        if (s.rel_delta <= threshold) {
            out.converged = true;
            break;
        }
    }
    out.W = std::move(W);
    return out;
}

std::vector<ConvergenceRow> convergence_study(const NetworkParams& params, const std::vector<std::size_t>& n_list,
                                              const Vector& x0, const DPOptions& options) {
    check_dimension(x0, params.J, "x0");
    const ExplicitSolution solution(params);
    const double V = solution(x0);
    std::vector<ConvergenceRow> rows;
    for (std::size_t n : n_list) {
        ConvergenceRow row;
        row.n = n;
        row.V = V;
        const Lattice lattice(params, n);
        const auto idx = lattice.nearest(x0);
        if (!idx) {
            row.x0_n = x0;
            row.Vn = 0.0;
        } else {
            const DPResult r = solve(params, n, options);
            row.x0_n = lattice.point(*idx);
            row.Vn = r.Vn[*idx];
            row.iterations = r.iterations;
            if (!r.converged) {
                throw IterationLimitError("value iteration hit the iteration limit at n=" + std::to_string(n));
            }
        }
        row.gap = std::abs(row.Vn - row.V);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace tandem
