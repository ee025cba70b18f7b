#pragma once

#include <cmath>
#include <optional>
#include <sstream>

#include "hetcycle/errors.hpp"

namespace hetcycle {

/// One-dimensional affine map x |-> slope*x + intercept. This is the whole
/// algebra the central quotient dynamics runs on.
struct AffineMap1D {
    double slope = 1.0;
    double intercept = 0.0;

    static AffineMap1D identity() { return {1.0, 0.0}; }
    static AffineMap1D scaling(double s) { return {s, 0.0}; }

    double operator()(double x) const { return slope * x + intercept; }

    bool is_identity(double tol = 0.0) const {
        return std::abs(slope - 1.0) <= tol && std::abs(intercept) <= tol;
    }

    AffineMap1D inverse() const {
        if (slope == 0.0) throw DegenerateError("AffineMap1D::inverse: slope is zero");
        return {1.0 / slope, -intercept / slope};
    }
};

/// Composition f after g: x |-> f(g(x)).
inline AffineMap1D compose(const AffineMap1D& f, const AffineMap1D& g) {
    return {f.slope * g.slope, f.slope * g.intercept + f.intercept};
}

inline AffineMap1D operator*(const AffineMap1D& f, const AffineMap1D& g) { return compose(f, g); }

/// Fixed point of an affine map with |slope| != 1 is intercept/(1-slope);
/// a slope-1 map has either none (translation) or a line of fixed points.
inline double fixed_point(const AffineMap1D& f, double tol = 1e-14) {
    if (std::abs(f.slope - 1.0) <= tol) {
        if (std::abs(f.intercept) <= tol)
            throw EveryPointFixedError("fixed_point: identity map, every point is fixed");
        std::ostringstream os;
        os << "fixed_point: translation by " << f.intercept << " has no fixed point";
        throw NoFixedPointError(os.str());
    }
    return f.intercept / (1.0 - f.slope);
}

inline std::optional<double> try_fixed_point(const AffineMap1D& f, double tol = 1e-14) {
    if (std::abs(f.slope - 1.0) <= tol) return std::nullopt;
    return f.intercept / (1.0 - f.slope);
}

}  // namespace hetcycle
