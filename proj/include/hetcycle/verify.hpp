#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "hetcycle/measure.hpp"
#include "hetcycle/tower.hpp"

namespace hetcycle {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    std::vector<double> r_values;
    std::vector<KappaProduct> kappa_products;  // from each level index
    std::vector<ErgodicityCheckReport> ergodicity;
    ExponentTrace trace;
    bool passed = true;

    void add(std::string name, bool ok, std::string detail) {
        passed = passed && ok;
        checks.push_back({std::move(name), ok, std::move(detail)});
    }
    const CheckResult* first_failure() const {
        for (const auto& c : checks)
            if (!c.passed) return &c;
        return nullptr;
    }
};

/// The certified battery over a built tower: monotone periods, the
/// good-approximation fractions, the gamma/gap chain, exponent halving, the
/// r_n/d_n chain, kappa products, support counting and the ergodicity
/// criterion over the dictionary.
inline VerificationReport verify_tower(const Tower& tower, const std::vector<double>& eps_list,
                                       int support_n_max, long subsample_threshold) {
    const CycleSystem& sys = tower.system();
    const TowerConfig& cfg = tower.config();
    const auto& lvls = tower.levels();
    VerificationReport rep;
    if (lvls.empty()) {
        rep.add("tower_nonempty", true, "empty tower: nothing to verify");
        return rep;
    }

    // condition 1: the model carries an invariant central direction field by
    // construction (every branch map is block diagonal)
    rep.add("condition_1_direction_field", true, "invariant central line bundle by construction");

    {  // condition 2 / Z4: strictly growing periods
        bool ok = lvls.front().orbit.period > tower.b_orbit().period;
        std::ostringstream os;
        os << tower.b_orbit().period;
        for (const auto& lv : lvls) os << " < " << lv.orbit.period;
        for (size_t i = 1; i < lvls.size(); ++i)
            ok = ok && lvls[i].orbit.period > lvls[i - 1].orbit.period;
        rep.add("condition_2_growing_periods", ok, os.str());
    }

    {  // condition 3 / Z6: kappa of each certificate against the parent target
        bool ok = true;
        std::ostringstream os;
        for (size_t i = 1; i < lvls.size(); ++i) {
            const auto& cert = lvls[i].approach;
            const bool this_ok = cert.kappa_ok && cert.gamma_bound_ok && cert.fibers_equal &&
                                 cert.kappa >= lvls[i - 1].kappa;
            ok = ok && this_ok;
            os << "level " << lvls[i].n << ": kappa " << cert.kappa << " vs target "
               << lvls[i - 1].kappa << (this_ok ? " ok; " : " FAIL; ");
        }
        if (lvls.size() == 1) os << "single level: only the vacuous base certificate";
        rep.add("condition_3_good_approximation", ok, os.str());
    }

    {  // condition 4 / Z7: gamma below the gap ceiling at every level
        bool ok = true;
        std::ostringstream os;
        for (const auto& lv : lvls) {
            const double ceiling = tower.ceiling(lv.n);
            const bool this_ok = lv.gamma < ceiling;
            ok = ok && this_ok;
            os << "gamma_" << lv.n << " = " << lv.gamma << " vs ceiling " << ceiling
               << (this_ok ? " ok; " : " FAIL; ");
        }
        rep.add("condition_4_gamma_gap_bound", ok, os.str());
    }

    {  // condition 5 / Z8: exponent halving and the cumulative decay
        bool ok = true;
        std::ostringstream os;
        for (size_t i = 1; i < lvls.size(); ++i) {
            const bool this_ok = lvls[i].chi < cfg.halving_ratio * lvls[i - 1].chi;
            ok = ok && this_ok;
            os << "chi_" << lvls[i].n << "/chi_" << lvls[i - 1].n << " = "
               << lvls[i].chi / lvls[i - 1].chi << (this_ok ? " ok; " : " FAIL; ");
        }
        for (size_t i = 0; i < lvls.size(); ++i) {
            const double bound =
                lvls.front().chi * std::pow(cfg.halving_ratio, static_cast<double>(i));
            if (!(lvls[i].chi <= bound)) {
                ok = false;
                os << "chi_" << lvls[i].n << " above chi_1*ratio^" << i << "; ";
            }
        }
        rep.add("condition_5_exponent_decay", ok, os.str());
    }

    try {  // r_n < d_n/3 chain
        rep.r_values = r_sequence(tower);
        std::ostringstream os;
        for (size_t i = 0; i < lvls.size(); ++i)
            os << "r_" << lvls[i].n << " = " << rep.r_values[i] << " < d/3 = " << lvls[i].d / 3.0
               << "; ";
        rep.add("ball_radius_chain", true, os.str());
    } catch (const BoundViolatedError& e) {
        rep.add("ball_radius_chain", false, e.what());
    }

    try {  // kappa products from every index
        std::ostringstream os;
        for (const auto& lv : lvls) {
            rep.kappa_products.push_back(kappa_product(tower, lv.n));
            os << "from " << lv.n << ": " << rep.kappa_products.back().combined << "; ";
        }
        rep.add("kappa_products_positive", true, os.str());
    } catch (const NonPositiveError& e) {
        rep.add("kappa_products_positive", false, e.what());
    }

    {  // support bounds by direct counting
        bool ok = true;
        std::ostringstream os;
        const int top = lvls.back().n;
        for (int n = 1; n <= std::min(support_n_max, top - 1); ++n) {
            for (int m = n + 1; m <= top; ++m) {
                try {
                    const SupportBound sb = support_bound(tower, n, m);
                    os << "(" << n << "," << m << "): min mass " << sb.min_measure << " >= "
                       << sb.measure_lower_bound << "; ";
                } catch (const Error& e) {
                    ok = false;
                    os << "(" << n << "," << m << "): " << e.what() << "; ";
                }
            }
        }
        rep.add("support_mass_counting", ok, os.str());
    }

    {  // exponent consistency of the measures
        rep.trace = exponent_trace(tower);
        bool ok = true;
        double maxerr = 0.0;
        for (size_t i = 0; i < lvls.size(); ++i) {
            const double err = std::abs(rep.trace.values[i].second - lvls[i].chi);
            maxerr = std::max(maxerr, err);
            ok = ok && err < 1e-12;
        }
        std::ostringstream os;
        os << "max |integral - analytic| = " << maxerr;
        rep.add("measure_exponent_consistency", ok, os.str());
    }

    {  // ergodicity criterion over the dictionary
        bool ok = true;
        std::ostringstream os;
        const auto dict = default_dictionary(sys);
        for (double eps : eps_list) {
            for (const auto& phi : dict) {
                try {
                    auto r = check_ergodicity_criterion(tower, phi, eps, subsample_threshold);
                    ok = ok && r.passed;
                    os << phi.id << "@" << eps << (r.passed ? " ok(N=" : " FAIL(N=") << r.N
                       << "); ";
                    rep.ergodicity.push_back(std::move(r));
                } catch (const NoSuchNError& e) {
                    ok = false;
                    os << phi.id << "@" << eps << " no admissible N (" << e.what() << "); ";
                } catch (const Error& e) {
                    ok = false;
                    os << phi.id << "@" << eps << " aborted (" << e.what() << "); ";
                }
            }
        }
        rep.add("ergodicity_criterion", ok, os.str());
    }

    return rep;
}

}  // namespace hetcycle
