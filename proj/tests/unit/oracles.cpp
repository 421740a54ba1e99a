#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace oracle {

double characteristic(double lambda, double mu, double c, double b) {
    return c + lambda * (1.0 - std::exp(b)) + mu * (1.0 - std::exp(-b));
}

double beta(double lambda, double mu, double c) {
    double lo = 0.0;
    double hi = 1.0;
    while (characteristic(lambda, mu, c, hi) > 0.0) {
        hi *= 2.0;
    }
    for (int it = 0; it < 400 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) {
            break;
        }
        (characteristic(lambda, mu, c, mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

std::vector<double> terms(const tandem::NetworkParams& params, const std::vector<double>& x) {
    std::vector<double> t(params.J);
    for (std::size_t i = 0; i < params.J; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k <= i; ++k) {
            s += params.z[k] - x[k];
        }
        t[i] = beta(params.lambda, params.mu[i], params.c) * s;
    }
    return t;
}

}  // namespace

double value(const tandem::NetworkParams& params, const std::vector<double>& x) {
    const auto t = terms(params, x);
    return *std::min_element(t.begin(), t.end());
}

std::vector<std::size_t> argmin(const tandem::NetworkParams& params, const std::vector<double>& x) {
    const auto t = terms(params, x);
    const double v = *std::min_element(t.begin(), t.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] - v <= 1e-12 * (1.0 + std::abs(v))) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<double> dp_single_station(double lambda, double mu, double c, double z, int n) {
    const int N = static_cast<int>(std::lround(n * z));
    // a_k W_{k-1} + d_k W_k + e_k W_{k+1} = r_k
    std::vector<double> a(N, 0.0), d(N, 0.0), e(N, 0.0), r(N, 0.0);
    for (int k = 0; k < N; ++k) {
        d[k] = c + lambda + (k > 0 ? mu : 0.0);
        if (k > 0) {
            a[k] = -mu;
        }
        if (k + 1 < N) {
            e[k] = -lambda;
        } else {
            r[k] = lambda;
        }
    }
    for (int k = 1; k < N; ++k) {
        const double m = a[k] / d[k - 1];
        d[k] -= m * e[k - 1];
        r[k] -= m * r[k - 1];
    }
    std::vector<double> W(N);
    for (int k = N - 1; k >= 0; --k) {
        W[k] = (r[k] - (k + 1 < N ? e[k] * W[k + 1] : 0.0)) / d[k];
    }
    return W;
}

std::vector<std::vector<int>> lattice_states(const tandem::NetworkParams& params, int n) {
    const std::size_t J = params.J;
    std::vector<int> dims(J);
    for (std::size_t i = 0; i < J; ++i) {
        const int k = static_cast<int>(std::lround(n * params.z[i]));
        dims[i] = i == 0 ? k : k + 1;
    }
    std::vector<std::vector<int>> out;
    std::vector<int> c(J, 0);
    std::function<void(std::size_t)> rec = [&](std::size_t axis) {
        if (axis == J) {
            out.push_back(c);
            return;
        }
        for (int v = 0; v < dims[axis]; ++v) {
            c[axis] = v;
            rec(axis + 1);
        }
    };
    rec(0);
    return out;
}

namespace {

std::vector<double> gauss_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
    const std::size_t m = b.size();
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < m; ++r) {
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) {
                piv = r;
            }
        }
        std::swap(A[col], A[piv]);
        std::swap(b[col], b[piv]);
        for (std::size_t r = col + 1; r < m; ++r) {
            const double f = A[r][col] / A[col][col];
            if (f == 0.0) {
                continue;
            }
            for (std::size_t k = col; k < m; ++k) {
                A[r][k] -= f * A[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(m);
    for (std::size_t r = m; r-- > 0;) {
        double s = b[r];
        for (std::size_t k = r + 1; k < m; ++k) {
            s -= A[r][k] * x[k];
        }
        x[r] = s / A[r][r];
    }
    return x;
}

struct Model {
    std::vector<std::vector<int>> states;
    std::map<std::vector<int>, std::size_t> index;
    std::vector<int> dims;
};

Model build(const tandem::NetworkParams& params, int n) {
    Model m;
    m.states = lattice_states(params, n);
    for (std::size_t k = 0; k < m.states.size(); ++k) {
        m.index[m.states[k]] = k;
    }
    return m;
}

// -1 = exit, else state index.
long long neighbour(const Model& m, const std::vector<int>& s, int event) {
    std::vector<int> t = s;
    if (event < 0) {
        t[0] += 1;
    } else {
        t[event] -= 1;
        if (event + 1 < static_cast<int>(s.size())) {
            t[event + 1] += 1;
        }
    }
    const auto it = m.index.find(t);
    return it == m.index.end() ? -1 : static_cast<long long>(it->second);
}

// Row of (c + lambda + sum u mu) W - lambda W' - sum u mu W'' = exit mass.
void fill_row(const tandem::NetworkParams& params, const Model& m, std::size_t k, const std::vector<int>& u,
              std::vector<double>& row, double& rhs) {
    const auto& s = m.states[k];
    std::fill(row.begin(), row.end(), 0.0);
    rhs = 0.0;
    double diag = params.c + params.lambda;
    const long long a = neighbour(m, s, -1);
    if (a < 0) {
        rhs += params.lambda;
    } else {
        row[static_cast<std::size_t>(a)] -= params.lambda;
    }
    for (std::size_t i = 0; i < params.J; ++i) {
        if (!u[i] || s[i] == 0) {
            continue;
        }
        diag += params.mu[i];
        const long long t = neighbour(m, s, static_cast<int>(i));
        if (t < 0) {
            rhs += params.mu[i];
        } else {
            row[static_cast<std::size_t>(t)] -= params.mu[i];
        }
    }
    row[k] += diag;
}

}  // namespace

std::vector<double> evaluate(const tandem::NetworkParams& params, int n,
                             const std::function<std::vector<int>(std::size_t)>& policy) {
    const Model m = build(params, n);
    const std::size_t S = m.states.size();
    std::vector<std::vector<double>> A(S, std::vector<double>(S));
    std::vector<double> b(S);
    for (std::size_t k = 0; k < S; ++k) {
        fill_row(params, m, k, policy(k), A[k], b[k]);
    }
    return gauss_solve(A, b);
}

std::vector<double> optimal(const tandem::NetworkParams& params, int n) {
    const Model m = build(params, n);
    const std::size_t S = m.states.size();
    const std::size_t J = params.J;
    std::vector<std::vector<int>> pol(S, std::vector<int>(J, 1));
    std::vector<double> W;
    for (int round = 0; round < 200; ++round) {
        W = evaluate(params, n, [&](std::size_t k) { return pol[k]; });
        bool changed = false;
        for (std::size_t k = 0; k < S; ++k) {
            const auto& s = m.states[k];
            auto ratio = [&](const std::vector<int>& u) {
                const long long a = neighbour(m, s, -1);
                double num = params.lambda * (a < 0 ? 1.0 : W[static_cast<std::size_t>(a)]);
                double den = params.c + params.lambda;
                for (std::size_t i = 0; i < J; ++i) {
                    if (!u[i] || s[i] == 0) {
                        continue;
                    }
                    const long long t = neighbour(m, s, static_cast<int>(i));
                    num += params.mu[i] * (t < 0 ? 1.0 : W[static_cast<std::size_t>(t)]);
                    den += params.mu[i];
                }
                return num / den;
            };
            double best = ratio(pol[k]);
            for (unsigned mask = 0; mask < (1u << J); ++mask) {
                std::vector<int> u(J);
                for (std::size_t i = 0; i < J; ++i) {
                    u[i] = (mask >> i) & 1u;
                }
                const double r = ratio(u);
                if (r < best * (1.0 - 1e-12)) {
                    best = r;
                    pol[k] = u;
                    changed = true;
                }
            }
        }
        if (!changed) {
            return W;
        }
    }
    throw std::runtime_error("policy iteration did not settle");
}

}  // namespace oracle
