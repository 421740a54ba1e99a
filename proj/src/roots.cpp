#include "tandem/roots.hpp"

#include <cmath>
#include <string>

namespace tandem {

double characteristic(double lambda, double mu, double c, double beta) {
    return c + lambda * (1.0 - std::exp(beta)) + mu * (1.0 - std::exp(-beta));
}

double root_tolerance(double lambda, double mu, double c) { return 1e-12 * (c + lambda + mu); }

namespace {

void require_positive(double value, const char* field) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ValidationError(field, "must be positive and finite");
    }
}

// The characteristic function is concave with value c at 0, so it is positive
// on (0, beta) and negative beyond.
double bisect(double lambda, double mu, double c) {
    double lo = 1e-12;
    double hi = 50.0;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) {
            break;
        }
        if (characteristic(lambda, mu, c, mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

RootResult beta_root(double lambda, double mu, double c) {
    require_positive(lambda, "lambda");
    require_positive(mu, "mu");
    require_positive(c, "c");

    const double b = c + lambda + mu;
    const double disc = b * b - 4.0 * lambda * mu;
    const double y = (b + std::sqrt(disc)) / (2.0 * lambda);
    double beta = std::log(y);

    const double slope = -lambda * std::exp(beta) + mu * std::exp(-beta);
    if (slope != 0.0) {
        const double refined = beta - characteristic(lambda, mu, c, beta) / slope;
        if (refined > 0.0 && std::abs(characteristic(lambda, mu, c, refined)) <=
                                 std::abs(characteristic(lambda, mu, c, beta))) {
            beta = refined;
        }
    }

    RootResult out{beta, characteristic(lambda, mu, c, beta)};
    if (std::abs(out.residual) <= root_tolerance(lambda, mu, c) && beta > 0.0) {
        return out;
    }
    out.beta = bisect(lambda, mu, c);
    out.residual = characteristic(lambda, mu, c, out.beta);
    if (!(out.beta > 0.0) || std::abs(out.residual) > root_tolerance(lambda, mu, c)) {
        throw std::runtime_error("beta_root: residual " + std::to_string(out.residual) +
                                 " above tolerance");
    }
    return out;
}

RootResult alpha_root(double lambda_i, double mu_i, double c) { return beta_root(lambda_i, mu_i, c); }

Vector betas(const NetworkParams& params) {
    Vector out(params.J);
    for (std::size_t i = 0; i < params.J; ++i) {
        out[i] = beta_root(params.lambda, params.mu[i], params.c).beta;
    }
    return out;
}

Vector b_vector(std::size_t i, const NetworkParams& params) {
    if (i >= params.J) {
        throw std::out_of_range("b_vector: station index " + std::to_string(i) + " out of range");
    }
    const double beta = beta_root(params.lambda, params.mu[i], params.c).beta;
    Vector b(params.J, 0.0);
    for (std::size_t j = 0; j <= i; ++j) {
        b[j] = beta;
    }
    return b;
}

}  // namespace tandem
