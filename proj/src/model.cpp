#include "tandem/model.hpp"

#include <cmath>

namespace tandem {

void NetworkParams::validate() const {
    if (J < 1) {
        throw ValidationError("J", "must be at least 1");
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw ValidationError("lambda", "arrival rate must be positive and finite");
    }
    if (mu.size() != J) {
        throw ValidationError("mu", "expected " + std::to_string(J) + " service rates, got " +
                                        std::to_string(mu.size()));
    }
    if (z.size() != J) {
        throw ValidationError("z", "expected " + std::to_string(J) + " buffer sizes, got " +
                                       std::to_string(z.size()));
    }
    for (double m : mu) {
        if (!(m > 0.0) || !std::isfinite(m)) {
            throw ValidationError("mu", "service rates must be positive and finite");
        }
    }
    for (double b : z) {
        if (!(b > 0.0) || !std::isfinite(b)) {
            throw ValidationError("z", "buffer sizes must be positive and finite");
        }
    }
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw ValidationError("c", "risk parameter must be positive and finite");
    }
}

NetworkParams NetworkParams::make(double lambda, Vector mu, Vector z, double c) {
    NetworkParams p;
    p.J = mu.size();
    p.lambda = lambda;
    p.mu = std::move(mu);
    p.z = std::move(z);
    p.c = c;
    p.validate();
    return p;
}

const char* to_string(BoundaryClass tag) {
    switch (tag) {
        case BoundaryClass::interior:
            return "interior";
        case BoundaryClass::boundary_plus:
            return "boundary-plus";
        case BoundaryClass::boundary_c:
            return "boundary-c";
        case BoundaryClass::boundary_o:
            return "boundary-o";
        case BoundaryClass::outside:
            return "outside";
    }
    return "unknown";
}

namespace {

IndexSet collect(const std::vector<Coord>& coord, Coord tag) {
    IndexSet out;
    for (std::size_t i = 0; i < coord.size(); ++i) {
        if (coord[i] == tag) {
            out.push_back(i);
        }
    }
    return out;
}

}  // namespace

IndexSet ActiveSets::empty_set() const { return collect(coord, Coord::empty); }
IndexSet ActiveSets::full_set() const { return collect(coord, Coord::full); }
IndexSet ActiveSets::open_set() const { return collect(coord, Coord::open); }

bool ActiveSets::any_full() const {
    for (Coord t : coord) {
        if (t == Coord::full) {
            return true;
        }
    }
    return false;
}

std::vector<int> gamma(std::size_t i, std::size_t J) {
    if (i >= J) {
        throw std::out_of_range("gamma: station index " + std::to_string(i) + " out of range for J=" +
                                std::to_string(J));
    }
    std::vector<int> g(J, 0);
    g[i] = 1;
    if (i + 1 < J) {
        g[i + 1] = -1;
    }
    return g;
}

void check_dimension(const Vector& x, std::size_t J, const char* field) {
    if (x.size() != J) {
        throw ValidationError(field, "expected " + std::to_string(J) + " coordinates, got " +
                                         std::to_string(x.size()));
    }
}

bool in_closure(const Vector& x, const NetworkParams& params) {
    check_dimension(x, params.J);
    for (std::size_t i = 0; i < params.J; ++i) {
        if (!(x[i] >= 0.0) || !(x[i] <= params.z[i])) {
            return false;
        }
    }
    return true;
}

bool in_domain(const Vector& x, const NetworkParams& params) {
    return in_closure(x, params) && x[0] < params.z[0];
}

BoundaryClass classify(const Vector& x, const NetworkParams& params) {
    if (!in_closure(x, params)) {
        return BoundaryClass::outside;
    }
    if (x[0] == params.z[0]) {
        return BoundaryClass::boundary_o;
    }
    bool some_full = false;
    bool some_empty = false;
    for (std::size_t i = 0; i < params.J; ++i) {
        if (i > 0 && x[i] == params.z[i]) {
            some_full = true;
        }
        if (x[i] == 0.0) {
            some_empty = true;
        }
    }
    if (some_full) {
        return BoundaryClass::boundary_c;
    }
    if (some_empty) {
        return BoundaryClass::boundary_plus;
    }
    return BoundaryClass::interior;
}

ActiveSets active_sets(const Vector& x, const NetworkParams& params, bool require_domain) {
    if (!in_closure(x, params)) {
        throw ValidationError("x", "point lies outside the buffer rectangle");
    }
    if (require_domain && x[0] == params.z[0]) {
        throw ValidationError("x", "x_1 = z_1 lies on the overflow face, outside G");
    }
    ActiveSets sets;
    sets.coord.resize(params.J, Coord::open);
    for (std::size_t i = 0; i < params.J; ++i) {
        if (x[i] == 0.0) {
            sets.coord[i] = Coord::empty;
        } else if (x[i] == params.z[i]) {
            sets.coord[i] = Coord::full;
        }
    }
    return sets;
}

std::vector<Vector> closed_grid(const Vector& z, std::size_t resolution) {
    if (resolution < 2) {
        throw ValidationError("resolution", "need at least 2 points per axis");
    }
    const std::size_t J = z.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < J; ++i) {
        total *= resolution;
    }
    const double last = static_cast<double>(resolution - 1);
    std::vector<Vector> points;
    points.reserve(total);
    std::vector<std::size_t> k(J, 0);
    for (std::size_t n = 0; n < total; ++n) {
        Vector x(J);
        for (std::size_t i = 0; i < J; ++i) {
            x[i] = k[i] + 1 == resolution ? z[i] : z[i] * static_cast<double>(k[i]) / last;
        }
        points.push_back(std::move(x));
        for (std::size_t i = 0; i < J; ++i) {
            if (++k[i] < resolution) {
                break;
            }
            k[i] = 0;
        }
    }
    return points;
}

}  // namespace tandem
