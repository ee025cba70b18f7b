#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "hetcycle/cycle_data.hpp"

namespace hetcycle {

/// Strict scalar comparison with its raw sides kept, so callers can apply
/// their own slack. holds is exactly lhs < rhs in double precision.
struct InequalityReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
    std::string context;

    static InequalityReport strict_less(std::string name, double lhs, double rhs,
                                        std::string context) {
        InequalityReport r;
        r.name = std::move(name);
        r.lhs = lhs;
        r.rhs = rhs;
        r.holds = lhs < rhs;
        r.context = std::move(context);
        return r;
    }
};

/// Per-step rescale factor (1+eps)*|multiplier|^{-1/period}; applying it along
/// one period moves the absolute multiplier to (1+eps)^period.
inline double franks_rescale_factor(double multiplier, long period, double eps) {
    if (multiplier == 0.0) throw SpecViolationError("franks_rescale_factor: zero multiplier");
    if (period < 1) throw SpecViolationError("franks_rescale_factor: period must be >= 1");
    if (eps < 0.0) throw SpecViolationError("franks_rescale_factor: eps must be >= 0");
    return (1.0 + eps) * std::pow(std::abs(multiplier), -1.0 / static_cast<double>(period));
}

/// Central translation budget t_k = (-lambda*zeta_c - lambda^2)/k, chosen so
/// that lambda^k*zeta_c + k*lambda^{k-1}*t_k = -lambda^{k+1} exactly.
inline double biaccumulation_alignment(double lambda, double zeta_c, long k) {
    if (k < 1) throw SpecViolationError("biaccumulation_alignment: k must be >= 1");
    return (-lambda * zeta_c - lambda * lambda) / static_cast<double>(k);
}

/// The scalar gate inequalities for one inductive step: parent has central
/// exponent chi_parent over period pi_b (per-period log multiplier
/// chi_parent*pi_b), the child word repeats it m times with an l-long A-run
/// and t transition steps.
inline std::vector<InequalityReport> section6_checks(const CycleCentralData& d, double C,
                                                     double chi_parent, long l, long m, long t) {
    if (!(chi_parent > 0.0))
        throw SpecViolationError("section6_checks: chi_parent must be positive");
    std::ostringstream ctx;
    ctx << "lambda=" << d.lambda << " pi_a=" << d.pi_a << " pi_b=" << d.pi_b << " C=" << C
        << " chi_parent=" << chi_parent << " l=" << l << " m=" << m << " t=" << t;
    const std::string context = ctx.str();

    std::vector<InequalityReport> out;
    const double abs_chi_a = std::abs(d.chi_a());
    out.push_back(InequalityReport::strict_less("central_budget_constant", 16.0 / abs_chi_a, C,
                                                context));

    const double log_mult_parent = chi_parent * static_cast<double>(d.pi_b);
    const double period = static_cast<double>(m * d.pi_b + l * d.pi_a + t);
    const double chi_child =
        (static_cast<double>(m) * log_mult_parent + static_cast<double>(l) * d.log_lambda()) /
        period;
    out.push_back(
        InequalityReport::strict_less("child_exponent_positive", 0.0, chi_child, context));
    out.push_back(InequalityReport::strict_less("child_exponent_half_parent", chi_child,
                                                0.5 * chi_parent, context));

    const double fraction = static_cast<double>(m * d.pi_b) / period;
    out.push_back(InequalityReport::strict_less("shadow_fraction", 1.0 - C * chi_parent, fraction,
                                                context));

    // l_k bound with transition constant T; central transition components are
    // isometries here, so T = 1 and the first term drops out.
    const double T = 1.0;
    const double log_sqrt_lambda = 0.5 * d.log_lambda();
    const double l_bound = -std::log(T) / log_sqrt_lambda -
                           static_cast<double>(m) * 2.0 * log_mult_parent / log_sqrt_lambda;
    out.push_back(
        InequalityReport::strict_less("a_run_length_bound", static_cast<double>(l), l_bound,
                                      context));
    return out;
}

}  // namespace hetcycle
