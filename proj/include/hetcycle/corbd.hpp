#pragma once

#include <cmath>
#include <sstream>

#include "hetcycle/cycle_data.hpp"
#include "hetcycle/errors.hpp"

namespace hetcycle {

enum class Orientation { preserving, reversing };

inline const char* to_string(Orientation o) {
    return o == Orientation::preserving ? "preserving" : "reversing";
}

/// Simultaneous closing of the (k,p) and (k-2,q) words with one nu.
/// Preserving: beta_bar^p*(lambda^{k-2} - lambda^k + xi) = 1 with xi = beta_bar^{-q}.
/// Reversing:  beta_bar^q*(lambda^{k-2} - lambda^k + xi) = 1 with xi = beta_bar^{-p}.
struct CorbdSolution {
    long k = 0;
    long p = 0;
    long q = 0;
    double beta_bar = 0.0;
    double xi_offset = 0.0;  // beta_bar^{-q} (preserving) or beta_bar^{-p} (reversing)
    double nu_k = 0.0;       // lambda^{k-2} + xi (preserving), -lambda^k + xi (reversing)
    Orientation orientation = Orientation::preserving;
    double residual_1 = 0.0;  // root equation
    double residual_2 = 0.0;  // xi definition equation
};

namespace detail {

// g(b) = c*b^e1 + b^{e1-e2} on b > 1 with c > 0, e2 > e1 >= 1: decreasing then
// increasing, so the larger root of g = 1 is bracketed by [argmin, b_hi].
struct CorbdEquation {
    double c;  // lambda^{k-2} - lambda^k
    double e1; // exponent of the closing power
    double e2; // exponent defining xi
    double operator()(double b) const { return c * std::pow(b, e1) + std::pow(b, e1 - e2); }
    double minimizer() const { return std::pow((e2 - e1) / (e1 * c), 1.0 / e2); }
};

inline double solve_corbd_root(const CorbdEquation& g, double b_hi) {
    double lo = g.minimizer();
    if (!(lo > 1.0)) lo = 1.0 + 1e-9;
    if (lo >= b_hi || g(lo) - 1.0 > 0.0 || g(b_hi) - 1.0 < 0.0) {
        std::ostringstream os;
        os << "corbd_solve: no root of the closing equation in (" << lo << ", " << b_hi << "]";
        throw NoRootError(os.str());
    }
    // bisection to machine width on the monotone flank, then a secant polish
    double hi = b_hi;
    for (int it = 0; it < 300 && hi - lo > 1e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = g(mid) - 1.0;
        if (fm == 0.0) return mid;
        (fm < 0.0 ? lo : hi) = mid;
    }
    const double flo = g(lo) - 1.0;
    const double fhi = g(hi) - 1.0;
    if (fhi != flo) {
        const double s = lo - flo * (hi - lo) / (fhi - flo);
        if (s >= lo && s <= hi && std::abs(g(s) - 1.0) <= std::min(std::abs(flo), std::abs(fhi)))
            return s;
    }
    return std::abs(flo) < std::abs(fhi) ? lo : hi;
}

}  // namespace detail

inline CorbdSolution corbd_solve(const CycleCentralData& d, long k, long p, long q,
                                 Orientation orientation, double beta_max = 64.0) {
    if (k < 4 || k % 2 != 0)
        throw SpecViolationError("corbd_solve: k must be an even integer >= 4");
    if (p < 1 || q < 1) throw SpecViolationError("corbd_solve: p and q must be >= 1");
    if (orientation == Orientation::preserving && !(q > p))
        throw SpecViolationError("corbd_solve: preserving orientation requires q > p");
    if (orientation == Orientation::reversing && !(p > q))
        throw SpecViolationError("corbd_solve: reversing orientation requires p > q");

    const double lk2 = std::pow(d.lambda, static_cast<double>(k - 2));
    const double lk = std::pow(d.lambda, static_cast<double>(k));
    const double c = lk2 - lk;
    if (!(c > 1e-300)) throw DegenerateError("corbd_solve: lambda^{k-2} - lambda^k vanishes");

    detail::CorbdEquation g;
    g.c = c;
    if (orientation == Orientation::preserving) {
        g.e1 = static_cast<double>(p);
        g.e2 = static_cast<double>(q);
    } else {
        g.e1 = static_cast<double>(q);
        g.e2 = static_cast<double>(p);
    }

    CorbdSolution s;
    s.k = k;
    s.p = p;
    s.q = q;
    s.orientation = orientation;
    s.beta_bar = detail::solve_corbd_root(g, beta_max);
    const double log_xi = -g.e2 * std::log(s.beta_bar);
    s.xi_offset = std::exp(log_xi);
    s.nu_k = orientation == Orientation::preserving ? lk2 + s.xi_offset : -lk + s.xi_offset;
    s.residual_1 = std::abs(std::pow(s.beta_bar, g.e1) * (c + s.xi_offset) - 1.0);
    // evaluated in log space so large exponents cannot overflow the power
    s.residual_2 = std::abs(std::expm1(g.e2 * std::log(s.beta_bar) + log_xi));
    return s;
}

/// |beta_bar^m lambda^l| through the closing equation:
/// preserving (l=k, m=p):   (1 - beta_bar^m xi) lambda^2/(1-lambda^2),
/// reversing  (l=k-2, m=q): (1 - beta_bar^m xi)/(1-lambda^2).
inline double multiplier_closed_form(double lambda, double beta_bar, double xi_offset, long m,
                                     Orientation orientation) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw SpecViolationError("multiplier_closed_form: lambda must lie in (0,1)");
    const double bmxi = std::pow(beta_bar, static_cast<double>(m)) * xi_offset;
    if (bmxi >= 1.0) {
        std::ostringstream os;
        os << "multiplier_closed_form: out of regime, beta_bar^m*xi = " << bmxi << " >= 1";
        throw DegenerateError(os.str());
    }
    const double l2 = lambda * lambda;
    const double base = (1.0 - bmxi) / (1.0 - l2);
    return orientation == Orientation::preserving ? base * l2 : base;
}

/// Uniform multiplier bound: Theta = 2*max(V, 1/V) where V is the xi = 0
/// closed form. Any solution with beta_bar^m*xi <= 1/2 has its multiplier
/// inside (1/Theta, Theta); the factor 2 is the safety margin convention.
inline double theta_bound(const CycleCentralData& d, Orientation orientation) {
    const double v = multiplier_closed_form(d.lambda, 2.0, 0.0, 1, orientation);
    return 2.0 * std::max(v, 1.0 / v);
}

}  // namespace hetcycle
