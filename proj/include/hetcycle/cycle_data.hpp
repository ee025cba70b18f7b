#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "hetcycle/affine.hpp"
#include "hetcycle/errors.hpp"

namespace hetcycle {

/// Central-quotient parameters of a simple cycle between saddles A and B.
/// lambda and beta are the per-period central multipliers of A and B,
/// tau the sign of the linear central component of the A->B transition.
struct CycleCentralData {
    double lambda = 0.95;  // in (0,1)
    double beta = 1.2;     // > 1
    int tau = +1;          // +1 or -1
    int pi_a = 1;          // period of A
    int pi_b = 1;          // period of B
    int t_ab = 2;          // transition time A -> B
    int t_ba = 2;          // transition time B -> A

    double log_lambda() const { return std::log(lambda); }
    double log_beta() const { return std::log(beta); }
    /// Central exponent of the A orbit, log(lambda)/pi_a (negative).
    double chi_a() const { return log_lambda() / pi_a; }
    /// Central exponent of the B orbit, log(beta)/pi_b (positive).
    double chi_b() const { return log_beta() / pi_b; }

    /// strict_regime additionally demands lambda in (0.9, 1), the band the
    /// tower constants are calibrated for.
    void validate(bool strict_regime = false) const {
        auto fail = [](const std::string& msg) { throw SpecViolationError("CycleCentralData: " + msg); };
        if (!(lambda > 0.0 && lambda < 1.0)) fail("lambda must lie in (0,1)");
        if (!(beta > 1.0)) fail("beta must exceed 1");
        if (tau != 1 && tau != -1) fail("tau must be +1 or -1");
        if (pi_a < 1 || pi_b < 1) fail("pi_a and pi_b must be positive");
        if (t_ab < 1 || t_ba < 1) fail("t_ab and t_ba must be positive");
        if (strict_regime && !(lambda > 0.9)) fail("strict regime requires lambda in (0.9, 1)");
    }
};

/// Solution of the closing equation beta^m * (-tau*lambda^l + nu) = 1.
struct NuSolution {
    long l = 0;
    long m = 0;
    double nu = 0.0;          // beta^{-m} + tau*lambda^l
    double nu_offset = 0.0;   // beta^{-m}; nu - tau*lambda^l held exactly
    double multiplier = 0.0;  // signed central multiplier -tau*beta^m*lambda^l
    long period = 0;          // m*pi_b + l*pi_a + t_ab + t_ba

    /// |beta^m*(-tau*lambda^l + nu) - 1|. The subtraction nu - tau*lambda^l
    /// equals nu_offset exactly by construction; evaluating through the
    /// stored offset avoids the catastrophic cancellation the naive form
    /// suffers when beta^{-m} drops below one ulp of lambda^l.
    double closing_residual(const CycleCentralData& d) const {
        return std::abs(std::pow(d.beta, static_cast<double>(m)) * nu_offset - 1.0);
    }
};

/// Return map of the l,m word: mult(beta^m) o (tau x + nu) o mult(lambda^l) o (-x).
inline AffineMap1D return_map(const CycleCentralData& d, double nu, long l, long m) {
    const double bm = std::pow(d.beta, static_cast<double>(m));
    const double ll = std::pow(d.lambda, static_cast<double>(l));
    AffineMap1D f = AffineMap1D::scaling(bm);
    f = f * AffineMap1D{static_cast<double>(d.tau), nu};
    f = f * AffineMap1D::scaling(ll);
    f = f * AffineMap1D::scaling(-1.0);
    return f;
}

/// The unique nu making 1 a fixed point of the return map: nu = beta^{-m} + tau*lambda^l.
inline NuSolution nu_for_fixed_point(const CycleCentralData& d, long l, long m) {
    if (l < 0 || m < 0) throw SpecViolationError("nu_for_fixed_point: l and m must be >= 0");
    NuSolution s;
    s.l = l;
    s.m = m;
    s.nu_offset = std::pow(d.beta, static_cast<double>(-m));
    const double ll = std::pow(d.lambda, static_cast<double>(l));
    s.nu = s.nu_offset + d.tau * ll;
    s.multiplier = -d.tau * std::pow(d.beta, static_cast<double>(m)) * ll;
    s.period = m * d.pi_b + l * d.pi_a + d.t_ab + d.t_ba;
    return s;
}

}  // namespace hetcycle
