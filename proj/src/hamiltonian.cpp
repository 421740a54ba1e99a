#include "tandem/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tandem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_controls(const ControlVector& u, std::size_t J) {
    check_dimension(u, J, "u");
    for (double ui : u) {
        if (!(ui >= 0.0 && ui <= 1.0)) {
            throw ValidationError("u", "service intensities must lie in [0,1]");
        }
    }
}

}  // namespace

double ell(double x) {
    if (x < 0.0) {
        return kInf;
    }
    if (x == 0.0) {
        return 1.0;
    }
    return x * std::log(x) - x + 1.0;
}

Vector drift(const ControlVector& u, const RateVector& m) {
    const std::size_t J = m.mu_bar.size();
    check_dimension(u, J, "u");
    Vector v(J, 0.0);
    v[0] = m.lambda_bar;
    for (std::size_t i = 0; i < J; ++i) {
        const double flow = u[i] * m.mu_bar[i];
        v[i] -= flow;
        if (i + 1 < J) {
            v[i + 1] += flow;
        }
    }
    return v;
}

double running_cost(const ControlVector& u, const RateVector& m, const NetworkParams& params) {
    check_dimension(u, params.J, "u");
    check_dimension(m.mu_bar, params.J, "mu_bar");
    bool infinite = m.lambda_bar < 0.0;
    double cost = params.lambda * ell(m.lambda_bar / params.lambda);
    for (std::size_t i = 0; i < params.J; ++i) {
        if (m.mu_bar[i] < 0.0) {
            infinite = true;
            continue;
        }
        cost += u[i] * params.mu[i] * ell(m.mu_bar[i] / params.mu[i]);
    }
    return infinite ? kInf : cost;
}

double hamiltonian(const Vector& p, const ControlVector& u, const RateVector& m, const NetworkParams& params) {
    check_dimension(p, params.J, "p");
    const double rho = running_cost(u, m, params);
    if (rho == kInf) {
        return kInf;
    }
    const Vector v = drift(u, m);
    double dot = 0.0;
    for (std::size_t i = 0; i < params.J; ++i) {
        dot += p[i] * v[i];
    }
    return params.c + dot + rho;
}

double hamiltonian(const Vector& p, const ControlVector& u, const NetworkParams& params) {
    check_dimension(p, params.J, "p");
    check_controls(u, params.J);
    double h = params.c + params.lambda * (1.0 - std::exp(-p[0]));
    for (std::size_t i = 0; i < params.J; ++i) {
        h += u[i] * params.mu[i] * (1.0 - std::exp(gamma_dot(p, i)));
    }
    return h;
}

double hamiltonian(const Vector& p, const NetworkParams& params) {
    check_dimension(p, params.J, "p");
    double h = params.c + params.lambda * (1.0 - std::exp(-p[0]));
    for (std::size_t i = 0; i < params.J; ++i) {
        h += std::max(0.0, params.mu[i] * (1.0 - std::exp(gamma_dot(p, i))));
    }
    return h;
}

RateVector nominal_rates(const NetworkParams& params) { return RateVector{params.lambda, params.mu}; }

RateVector optimal_rates(const Vector& p, const NetworkParams& params) {
    check_dimension(p, params.J, "p");
    RateVector m;
    m.lambda_bar = params.lambda * std::exp(-p[0]);
    m.mu_bar.resize(params.J);
    for (std::size_t i = 0; i < params.J; ++i) {
        m.mu_bar[i] = params.mu[i] * std::exp(gamma_dot(p, i));
    }
    return m;
}

const char* to_string(Forcing f) {
    switch (f) {
        case Forcing::serve:
            return "serve";
        case Forcing::idle:
            return "idle";
        case Forcing::free:
            return "free";
    }
    return "unknown";
}

std::vector<Forcing> optimal_controls(const Vector& p, const NetworkParams& params) {
    check_dimension(p, params.J, "p");
    std::vector<Forcing> out(params.J, Forcing::free);
    for (std::size_t i = 0; i < params.J; ++i) {
        const double gain = params.mu[i] * (1.0 - std::exp(gamma_dot(p, i)));
        if (gain > 1e-12) {
            out[i] = Forcing::serve;
        } else if (gain < -1e-12) {
            out[i] = Forcing::idle;
        }
    }
    return out;
}

RelationCheck check_sum_relation(const ControlVector& u, const Vector& p, const NetworkParams& params) {
    const double h = hamiltonian(p, u, params);
    if (std::abs(h) > 1e-9) {
        throw PreconditionError("check_sum_relation: H(p,u) = " + std::to_string(h) + " is not zero");
    }
    const RateVector m = optimal_rates(p, params);
    RelationCheck out;
    out.lhs = m.lambda_bar;
    out.rhs = params.c + params.lambda;
    double mu_total = 0.0;
    for (std::size_t i = 0; i < params.J; ++i) {
        out.lhs += u[i] * m.mu_bar[i];
        out.rhs += u[i] * params.mu[i];
        mu_total += params.mu[i];
    }
    out.residual = std::abs(out.lhs - out.rhs);
    out.tolerance = 1e-9 * (params.c + params.lambda + mu_total);
    out.ok = out.residual <= out.tolerance;
    return out;
}

RelationCheck check_product_relation(const Vector& p, const NetworkParams& params) {
    const RateVector m = optimal_rates(p, params);
    RelationCheck out;
    out.lhs = m.lambda_bar;
    out.rhs = params.lambda;
    for (std::size_t i = 0; i < params.J; ++i) {
        out.lhs *= m.mu_bar[i];
        out.rhs *= params.mu[i];
    }
    out.residual = std::abs(out.lhs - out.rhs);
    out.tolerance = 1e-9 * out.rhs;
    out.ok = out.residual <= out.tolerance;
    return out;
}

std::vector<ControlVector> control_samples(std::size_t J) {
    std::vector<ControlVector> out;
    const std::size_t vertices = std::size_t{1} << J;
    for (std::size_t mask = 0; mask < vertices; ++mask) {
        ControlVector u(J);
        for (std::size_t i = 0; i < J; ++i) {
            u[i] = (mask >> i) & 1u ? 1.0 : 0.0;
        }
        out.push_back(u);
    }
    for (std::size_t mask = 0; mask < vertices; ++mask) {
        for (std::size_t free = 0; free < J; ++free) {
            if ((mask >> free) & 1u) {
                continue;
            }
            ControlVector u(J);
            for (std::size_t i = 0; i < J; ++i) {
                u[i] = (mask >> i) & 1u ? 1.0 : 0.0;
            }
            u[free] = 0.5;
            out.push_back(u);
        }
    }
    return out;
}

IsaacsReport isaacs_check(const Vector& p, const NetworkParams& params, const IsaacsGrid& grid) {
    check_dimension(p, params.J, "p");
    if (grid.points_per_axis < 2) {
        throw ValidationError("points_per_axis", "need at least 2 points");
    }
    const std::size_t J = params.J;
    const std::size_t P = grid.points_per_axis;
    const RateVector centre = optimal_rates(p, params);

    Vector factors(P);
    for (std::size_t k = 0; k < P; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(P - 1);
        factors[k] = std::exp(grid.log_half_width * (2.0 * t - 1.0));
    }
    if (P % 2 == 1) {
        factors[P / 2] = 1.0;
    }

    const std::vector<ControlVector> controls = control_samples(J);
    std::vector<double> inf_over_m(controls.size(), kInf);
    double inf_sup = kInf;

    std::size_t total = 1;
    for (std::size_t a = 0; a <= J; ++a) {
        total *= P;
    }
    std::vector<std::size_t> idx(J + 1, 0);
    RateVector m{0.0, Vector(J)};
    for (std::size_t n = 0; n < total; ++n) {
        m.lambda_bar = centre.lambda_bar * factors[idx[0]];
        for (std::size_t i = 0; i < J; ++i) {
            m.mu_bar[i] = centre.mu_bar[i] * factors[idx[i + 1]];
        }
        double sup_u = -kInf;
        for (std::size_t k = 0; k < controls.size(); ++k) {
            const double h = hamiltonian(p, controls[k], m, params);
            sup_u = std::max(sup_u, h);
            inf_over_m[k] = std::min(inf_over_m[k], h);
        }
        inf_sup = std::min(inf_sup, sup_u);
        for (std::size_t a = 0; a <= J; ++a) {
            if (++idx[a] < P) {
                break;
            }
            idx[a] = 0;
        }
    }

    IsaacsReport out;
    out.sup_inf = *std::max_element(inf_over_m.begin(), inf_over_m.end());
    out.inf_sup = inf_sup;
    out.gap = std::abs(out.inf_sup - out.sup_inf);
    out.bound = 0.05 * (1.0 + std::abs(hamiltonian(p, params)));
    out.ok = out.gap <= out.bound;
    return out;
}

}  // namespace tandem
