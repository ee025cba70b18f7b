#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hetcycle/tower.hpp"

namespace hetcycle {

/// Uniform atomic probability measure on a periodic orbit.
struct PeriodicMeasure {
    const PeriodicOrbit* orbit = nullptr;
};

/// A test observable with a declared Lipschitz constant (in the ambient
/// metric) and a global oscillation cap. Indicators need no smoothing here:
/// distinct charts are at least chart_separation apart, so a per-chart
/// constant function is Lipschitz with constant jump/separation.
struct TestFunction {
    std::string id;
    double lipschitz = 0.0;
    double oscillation = 0.0;
    std::function<double(const CycleSystem&, const AmbientPoint&)> eval;
};

inline std::vector<TestFunction> default_dictionary(const CycleSystem& sys) {
    const auto& c = sys.central();
    const double box = 1.0 + sys.spec().overflow_tolerance;
    std::vector<TestFunction> dict;
    dict.push_back({"one", 0.0, 0.0,
                    [](const CycleSystem&, const AmbientPoint&) { return 1.0; }});
    dict.push_back({"central",
                    std::sqrt(static_cast<double>(sys.dim())) / sys.spec().chart_radius, 2.0 * box,
                    [](const CycleSystem&, const AmbientPoint& p) { return p.x_c; }});
    dict.push_back({"a_phase", 1.0 / sys.spec().chart_separation, 1.0,
                    [](const CycleSystem&, const AmbientPoint& p) {
                        return p.chart.role == ChartRole::a_phase ? 1.0 : 0.0;
                    }});
    dict.push_back({"b_phase", 1.0 / sys.spec().chart_separation, 1.0,
                    [](const CycleSystem&, const AmbientPoint& p) {
                        return p.chart.role == ChartRole::b_phase ? 1.0 : 0.0;
                    }});
    const double dlog_a = c.log_lambda() / c.pi_a;
    const double dlog_b = c.log_beta() / c.pi_b;
    // the largest jump is between an A chart and a B chart, one separation apart
    dict.push_back({"central_log_derivative",
                    (dlog_b - dlog_a) / sys.spec().chart_separation,
                    dlog_b - dlog_a,
                    [dlog_a, dlog_b](const CycleSystem&, const AmbientPoint& p) {
                        switch (p.chart.role) {
                            case ChartRole::a_phase: return dlog_a;
                            case ChartRole::b_phase: return dlog_b;
                            default: return 0.0;
                        }
                    }});
    return dict;
}

namespace detail {

inline double kahan_mean(const std::vector<double>& vals) {
    double sum = 0.0, comp = 0.0;
    for (double v : vals) {
        const double y = v - comp;
        const double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    return sum / static_cast<double>(vals.size());
}

}  // namespace detail

/// Streaming average of phi over the orbit, compensated accumulation.
inline double integrate(const CycleSystem& sys, const PeriodicMeasure& mu,
                        const TestFunction& phi) {
    OrbitStream st(sys, *mu.orbit);
    double sum = 0.0, comp = 0.0;
    for (long t = 0; t < mu.orbit->period; ++t) {
        const double v = phi.eval(sys, st.point());
        const double y = v - comp;
        const double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        st.advance();
    }
    return sum / static_cast<double>(mu.orbit->period);
}

/// Average of phi over n consecutive iterates starting at orbit index start.
inline double n_measure_integral(const CycleSystem& sys, const PeriodicOrbit& orbit, long start,
                                 long n, const TestFunction& phi) {
    if (n < 1) throw SpecViolationError("n_measure_integral: n must be >= 1");
    OrbitStream st(sys, orbit, start % orbit.period);
    double sum = 0.0, comp = 0.0;
    for (long t = 0; t < n; ++t) {
        const double v = phi.eval(sys, st.point());
        const double y = v - comp;
        const double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        st.advance();
    }
    return sum / static_cast<double>(n);
}

/// omega_delta(phi) bound: lipschitz*delta capped at the global oscillation.
inline double modulus_of_continuity(const TestFunction& phi, double delta) {
    if (delta < 0.0) throw SpecViolationError("modulus_of_continuity: delta must be >= 0");
    return std::min(phi.lipschitz * delta, phi.oscillation);
}

/// Central Lyapunov exponent of the measure: the integral of the log central
/// derivative cocycle.
inline double central_exponent_of_measure(const CycleSystem& sys, const PeriodicMeasure& mu) {
    const auto dict = default_dictionary(sys);
    return integrate(sys, mu, dict.back());  // central_log_derivative
}

/// Largest discrepancy of integrals over a test dictionary.
inline double weak_star_gap(const CycleSystem& sys, const PeriodicMeasure& a,
                            const PeriodicMeasure& b, const std::vector<TestFunction>& dict) {
    if (dict.empty()) throw SpecViolationError("weak_star_gap: empty dictionary");
    double gap = 0.0;
    for (const auto& phi : dict)
        gap = std::max(gap, std::abs(integrate(sys, a, phi) - integrate(sys, b, phi)));
    return gap;
}

struct ChosenN {
    int N = 0;
    double delta = 0.0;
    double kappa_margin = 0.0;  // kappa product at N minus (1 - eps)
    double r_margin = 0.0;      // delta minus r_N
};

/// Smallest level index N with r_N below the continuity budget of phi at eps
/// and the kappa product from N above 1 - eps.
inline ChosenN choose_N(const Tower& tower, const TestFunction& phi, double eps) {
    if (!(eps > 0.0)) throw SpecViolationError("choose_N: eps must be positive");
    const auto& lvls = tower.levels();
    if (lvls.empty()) throw NoSuchNError("choose_N: empty tower", 1);
    double delta;
    if (phi.oscillation < eps || phi.lipschitz == 0.0) {
        delta = std::numeric_limits<double>::infinity();
    } else {
        delta = eps / phi.lipschitz * (1.0 - 1e-12);
    }
    const auto r = r_sequence(tower);
    for (size_t i = 0; i < lvls.size(); ++i) {
        if (!(r[i] < delta)) continue;
        const auto kp = kappa_product(tower, lvls[i].n);
        if (kp.combined > 1.0 - eps) {
            ChosenN out;
            out.N = lvls[i].n;
            out.delta = delta;
            out.kappa_margin = kp.combined - (1.0 - eps);
            out.r_margin = delta - r[i];
            return out;
        }
    }
    // depth estimate: C*chi_1*ratio^{k-1} summed from N must drop below ~eps/2
    const double C = tower.config().C;
    const double r0 = tower.config().halving_ratio;
    const double chi1 = lvls.front().chi;
    int est = 1;
    while (est < 200 && 2.0 * C * chi1 * std::pow(r0, est - 1) > eps) ++est;
    std::ostringstream os;
    os << "choose_N: no admissible N in the built tower for eps = " << eps
       << "; estimated required depth " << est + 1;
    throw NoSuchNError(os.str(), est + 1);
}

struct PairDeviation {
    int n = 0, m = 0;
    double max_deviation = 0.0;
    double good_fraction = 0.0;
    bool subsampled = false;
    double analytic_bound = 0.0;
};

struct ErgodicityCheckReport {
    std::string phi;
    double eps = 0.0;
    int N = 0;
    double delta = 0.0;
    std::vector<PairDeviation> pairs;
    bool passed = false;
};

namespace detail {

/// Membership of each point of level `idx` (1-based) in the set with defined
/// total projection down to level N.
inline std::vector<char> projection_members(const Tower& tower, int level, int N) {
    const auto& lvls = tower.levels();
    std::vector<char> cur(static_cast<size_t>(lvls[static_cast<size_t>(N - 1)].orbit.period), 1);
    for (int k = N + 1; k <= level; ++k) {
        const TowerLevel& lv = lvls[static_cast<size_t>(k - 1)];
        const long pp = lv.orbit.shadow->parent_period;
        const long reps = lv.orbit.shadow->reps;
        std::vector<char> nxt(static_cast<size_t>(lv.orbit.period), 0);
        for (long t = 0; t < reps * pp; ++t) {
            const long block = t / pp;
            if (lv.approach.block_included[static_cast<size_t>(block)] &&
                cur[static_cast<size_t>(t % pp)])
                nxt[static_cast<size_t>(t)] = 1;
        }
        cur = std::move(nxt);
    }
    return cur;
}

}  // namespace detail

/// The two finite conditions of the ergodicity criterion, phrased over the
/// built tower: for every pair N <= n < m <= top, the points of X_m with a
/// defined total projection form a fraction above 1 - eps, and on each of
/// them the n-window average of phi deviates from the X_n integral by less
/// than eps. Periods above subsample_threshold are checked on a deterministic
/// stride plus the Lipschitz bound covering unsampled points.
inline ErgodicityCheckReport check_ergodicity_criterion(const Tower& tower,
                                                        const TestFunction& phi, double eps,
                                                        long subsample_threshold = 100000) {
    const CycleSystem& sys = tower.system();
    const auto& lvls = tower.levels();
    const ChosenN cn = choose_N(tower, phi, eps);
    if (lvls.back().n < cn.N + 1)
        throw NoSuchNError("check_ergodicity_criterion: tower has no levels above N", cn.N + 1);

    ErgodicityCheckReport rep;
    rep.phi = phi.id;
    rep.eps = eps;
    rep.N = cn.N;
    rep.delta = cn.delta;
    rep.passed = true;

    const auto rseq = r_sequence(tower);
    for (int m = cn.N + 1; m <= lvls.back().n; ++m) {
        const TowerLevel& lm = lvls[static_cast<size_t>(m - 1)];
        const auto members = detail::projection_members(tower, m, cn.N);
        long member_count = 0;
        for (char b : members) member_count += b;
        const double fraction =
            static_cast<double>(member_count) / static_cast<double>(lm.orbit.period);

        // phi along one period of X_m plus the longest window needed
        long max_window = 0;
        for (int n = cn.N; n < m; ++n)
            max_window = std::max(max_window, lvls[static_cast<size_t>(n - 1)].orbit.period);
        std::vector<double> prefix(static_cast<size_t>(lm.orbit.period + max_window) + 1, 0.0);
        {
            OrbitStream st(sys, lm.orbit);
            double comp = 0.0;
            for (long t = 0; t < lm.orbit.period + max_window; ++t) {
                const double v = phi.eval(sys, st.point());
                const double y = v - comp;
                const double s = prefix[static_cast<size_t>(t)] + y;
                comp = (s - prefix[static_cast<size_t>(t)]) - y;
                prefix[static_cast<size_t>(t) + 1] = s;
                st.advance();
            }
        }

        const bool subsample = lm.orbit.period > subsample_threshold;
        const long stride = subsample ? std::max<long>(1, lm.orbit.period / subsample_threshold)
                                      : 1;
        for (int n = cn.N; n < m; ++n) {
            const TowerLevel& ln = lvls[static_cast<size_t>(n - 1)];
            const double mu_n = integrate(sys, PeriodicMeasure{&ln.orbit},
                                          phi);
            const long w = ln.orbit.period;
            PairDeviation pd;
            pd.n = n;
            pd.m = m;
            pd.good_fraction = fraction;
            pd.subsampled = subsample;
            pd.analytic_bound =
                subsample ? modulus_of_continuity(phi, rseq[static_cast<size_t>(n - 1)]) : 0.0;
            double maxdev = 0.0;
            for (long t = 0; t < lm.orbit.period; t += stride) {
                if (!members[static_cast<size_t>(t)]) continue;
                const double avg = (prefix[static_cast<size_t>(t + w)] -
                                    prefix[static_cast<size_t>(t)]) /
                                   static_cast<double>(w);
                maxdev = std::max(maxdev, std::abs(avg - mu_n));
            }
            pd.max_deviation = std::max(maxdev, pd.analytic_bound);
            const bool ok = fraction > 1.0 - eps && pd.max_deviation < eps;
            rep.passed = rep.passed && ok;
            rep.pairs.push_back(pd);
        }
    }
    return rep;
}

struct ExponentTrace {
    std::vector<std::pair<int, double>> values;  // (level, chi of the measure)
    double decay_ratio = 0.0;                    // largest consecutive ratio
    double extrapolated_limit = 0.0;             // 0 under certified geometric decay
};

inline ExponentTrace exponent_trace(const Tower& tower) {
    const CycleSystem& sys = tower.system();
    ExponentTrace tr;
    double prev = 0.0;
    for (const auto& lv : tower.levels()) {
        const double chi = central_exponent_of_measure(sys, PeriodicMeasure{&lv.orbit});
        tr.values.emplace_back(lv.n, chi);
        if (prev > 0.0) tr.decay_ratio = std::max(tr.decay_ratio, chi / prev);
        prev = chi;
    }
    tr.extrapolated_limit = (tr.decay_ratio < 1.0) ? 0.0 : prev;
    return tr;
}

}  // namespace hetcycle
