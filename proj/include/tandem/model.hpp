// Tandem network instance, the buffer rectangle and its boundary faces.
//
// Station indices are 0-based throughout the library. Textual outputs
// (CSV/JSON emitted by the CLI) print them 1-based.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tandem {

using Vector = std::vector<double>;
using IndexSet = std::vector<std::size_t>;

/// Raised when an instance or a point fails validation. `field()` names the
/// offending input ("mu", "z", "x", ...).
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// J stations in series, Poisson arrivals to station 1, exponential service,
/// buffers z and risk parameter c. Routing is fixed: i -> i+1, last -> out.
struct NetworkParams {
    std::size_t J = 0;
    double lambda = 0.0;
    Vector mu;
    Vector z;
    double c = 0.0;

    /// Throws ValidationError naming the first offending field.
    void validate() const;

    static NetworkParams make(double lambda, Vector mu, Vector z, double c);
};

enum class BoundaryClass { interior, boundary_plus, boundary_c, boundary_o, outside };

const char* to_string(BoundaryClass tag);

/// Per-coordinate face membership: empty (x_i = 0, the set I), full
/// (x_i = z_i, the set B) or open (neither, the set O).
enum class Coord { empty, full, open };

struct ActiveSets {
    std::vector<Coord> coord;

    IndexSet empty_set() const;  // I(x)
    IndexSet full_set() const;   // B(x)
    IndexSet open_set() const;   // O(x)
    bool is_empty(std::size_t i) const { return coord[i] == Coord::empty; }
    bool is_full(std::size_t i) const { return coord[i] == Coord::full; }
    bool is_open(std::size_t i) const { return coord[i] == Coord::open; }
    bool any_full() const;
};

/// Routing direction of station i: gamma_i = e_i - e_{i+1}, gamma_{J-1} = e_{J-1}.
/// Service at i moves the state by -gamma_i.
std::vector<int> gamma(std::size_t i, std::size_t J);

/// gamma_i . p without materializing gamma_i.
inline double gamma_dot(const Vector& p, std::size_t i) {
    return i + 1 < p.size() ? p[i] - p[i + 1] : p[i];
}

/// Exact classification; coordinates are compared with ==.
BoundaryClass classify(const Vector& x, const NetworkParams& params);

/// x in the closed rectangle [0,z].
bool in_closure(const Vector& x, const NetworkParams& params);
/// x in G: closed rectangle with x_1 < z_1.
bool in_domain(const Vector& x, const NetworkParams& params);

/// I, B, O by exact equality. With `require_domain` the point must lie in G
/// (x_1 = z_1 is rejected); otherwise any point of the closed rectangle.
ActiveSets active_sets(const Vector& x, const NetworkParams& params, bool require_domain = true);

/// Uniform grid of the closed rectangle with `resolution` points per axis.
/// Endpoints are exactly 0 and z_i so face membership stays exact.
std::vector<Vector> closed_grid(const Vector& z, std::size_t resolution);

void check_dimension(const Vector& x, std::size_t J, const char* field = "x");

}  // namespace tandem
