#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hetcycle/inequalities.hpp"
#include "hetcycle/orbit.hpp"

namespace hetcycle {

/// Tunables of the inductive construction.
struct TowerConfig {
    double C = 320.0;           // approximation-fraction constant
    double halving_ratio = 0.5; // exponent decay target per level
    int max_levels = 4;
    long m_max = 200000;        // child search bounds per level
    long l_max = 5000;
    // Level-1 lattice bounds. The seed A-run length caps every later level's
    // minimal prefix slope (lambda^l), which in turn scales the orbit gaps;
    // keeping it moderate preserves representable entry offsets deep in the
    // tower.
    long seed_m_max = 64;
    long seed_l_max = 64;
    double seed_chi_safety = 0.95;  // seed exponent stays below safety/C
    // Levels >= chi_cap_from_level additionally keep C*chi_n within a geometric
    // budget so the finite product of approximation fractions from a usable
    // index stays above 1 - eps_budget.
    double eps_budget = 0.05;
    int chi_cap_from_level = 3;
    double exit_safety = 4.0;   // headroom factor for the exit offset
    long period_cap = 1000000;
    bool minimize_child_period = false;
    double closure_tol = 1e-9;
    bool require_strict_regime = true;

    void validate(const CycleCentralData& d) const {
        auto fail = [](const std::string& msg) { throw ConfigValidationError("tower: " + msg); };
        const double bound = 16.0 / std::abs(d.chi_a());
        if (!(C > bound)) {
            std::ostringstream os;
            os << "C = " << C << " violates the central budget constant bound C > 16/|chi^c(A)| = "
               << bound;
            fail(os.str());
        }
        if (!(halving_ratio > 0.0 && halving_ratio < 1.0))
            fail("halving_ratio must lie in (0,1)");
        if (max_levels < 0) fail("levels must be >= 0");
        if (m_max < 1 || l_max < 1 || seed_m_max < 1 || seed_l_max < 1)
            fail("search bounds must be positive");
        if (!(seed_chi_safety > 0.0 && seed_chi_safety <= 1.0))
            fail("seed_chi_safety must lie in (0,1]");
        if (!(eps_budget > 0.0 && eps_budget < 1.0)) fail("eps_budget must lie in (0,1)");
        if (!(exit_safety > 1.0)) fail("exit_safety must exceed 1");
        if (period_cap < 1) fail("period_cap must be positive");
    }
};

/// Outcome of checking that a child orbit is a (gamma, kappa)-good
/// approximation of its parent: Gamma is assembled from whole parent
/// repetitions, every point of which stays gamma-close to the parent orbit
/// for one full parent period, so projection fibers are equal by
/// construction.
struct GoodApproxCertificate {
    double gamma = 0.0;         // radius the certificate was checked at
    double kappa_target = 0.0;  // 1 - C*chi(parent)
    double kappa = 0.0;         // measured fraction #Gamma / child period
    double gamma_measured = 0.0;
    long included_blocks = 0;
    long total_blocks = 0;
    long fiber_count = 0;  // equals included_blocks
    bool gamma_bound_ok = false;
    bool kappa_ok = false;
    bool fibers_equal = true;
    std::vector<char> block_included;  // per repetition
};

/// Check the shadowing of `parent` by the repetition segment of `child` at
/// radius gamma. Streaming, O(child period) time.
inline GoodApproxCertificate verify_good_approx(const CycleSystem& sys, const PeriodicOrbit& child,
                                                const PeriodicOrbit& parent, double gamma,
                                                double kappa_target) {
    if (!child.shadow)
        throw SpecViolationError("verify_good_approx: child carries no shadow structure");
    const ShadowInfo sh = *child.shadow;
    if (sh.parent_period != parent.period)
        throw SpecViolationError("verify_good_approx: shadow structure does not match parent");
    const long P = parent.period;
    const long reps = sh.reps;

    GoodApproxCertificate cert;
    cert.gamma = gamma;
    cert.kappa_target = kappa_target;
    cert.total_blocks = reps;
    cert.block_included.assign(static_cast<size_t>(reps), 0);

    std::vector<AmbientPoint> ppts = orbit_points(sys, parent, 0, P);

    // deviations over the shadow segment plus one extra parent period so
    // every point's full forward window is covered
    const long n_dev = reps * P + P - 1;
    std::vector<double> dev(static_cast<size_t>(n_dev));
    {
        OrbitStream st(sys, child, sh.start % child.period);
        for (long k = 0; k < n_dev; ++k) {
            dev[static_cast<size_t>(k)] = sys.distance(st.point(), ppts[static_cast<size_t>(k % P)]);
            st.advance();
        }
    }
    // dirty prefix counts
    std::vector<long> dirty(static_cast<size_t>(n_dev) + 1, 0);
    for (long k = 0; k < n_dev; ++k)
        dirty[static_cast<size_t>(k) + 1] =
            dirty[static_cast<size_t>(k)] + (dev[static_cast<size_t>(k)] < gamma ? 0 : 1);

    double measured = 0.0;
    long included = 0;
    for (long i = 0; i < reps; ++i) {
        const long lo = i * P;
        const long hi = std::min(n_dev, lo + 2 * P - 1);  // windows of every block point
        if (dirty[static_cast<size_t>(hi)] - dirty[static_cast<size_t>(lo)] == 0) {
            cert.block_included[static_cast<size_t>(i)] = 1;
            ++included;
            for (long k = lo; k < hi; ++k)
                measured = std::max(measured, dev[static_cast<size_t>(k)]);
        }
    }
    cert.included_blocks = included;
    cert.fiber_count = included;
    cert.gamma_measured = measured;
    cert.kappa = static_cast<double>(included * P) / static_cast<double>(child.period);
    cert.gamma_bound_ok = included > 0 && measured < gamma;
    cert.kappa_ok = gamma > 0.0 && cert.kappa >= kappa_target;
    return cert;
}

struct TowerLevel {
    int n = 0;
    PeriodicOrbit orbit;
    long l = 0, m = 0;
    double chi = 0.0;
    double kappa = 0.0;          // 1 - C*chi, the fraction the next level must reach
    double d = 0.0;              // minimal orbit gap
    double gamma = 0.0;          // radius at which level n+1 approximates this level
    bool gamma_final = false;    // provisional until the next level exists
    double gamma_ceiling = 0.0;  // min_{i<=n} d_i / (3*2^n)
    GoodApproxCertificate approach;  // certificate of this level against its parent
    std::vector<InequalityReport> gates;
};

class Tower {
  public:
    // the tower owns a copy of the system so it stays self-contained
    Tower(const CycleSystem& sys, TowerConfig cfg) : sys_(sys), cfg_(std::move(cfg)) {
        cfg_.validate(sys_.central());
        b_orbit_ = realize_orbit(sys_, ItineraryWord::saddle_b(sys_.central()));
    }

    const CycleSystem& system() const { return sys_; }
    const TowerConfig& config() const { return cfg_; }
    const PeriodicOrbit& b_orbit() const { return b_orbit_; }
    const std::vector<TowerLevel>& levels() const { return levels_; }
    std::vector<TowerLevel>& levels_mutable() { return levels_; }
    bool empty() const { return levels_.empty(); }
    const TowerLevel& top() const {
        if (levels_.empty()) throw RejectedError("Tower: no levels built");
        return levels_.back();
    }

    double min_gap_up_to(int n) const {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& lv : levels_)
            if (lv.n <= n) d = std::min(d, lv.d);
        return d;
    }

    double ceiling(int n) const { return min_gap_up_to(n) / (3.0 * std::pow(2.0, n)); }

    void push_level(TowerLevel lv) { levels_.push_back(std::move(lv)); }

  private:
    CycleSystem sys_;
    TowerConfig cfg_;
    PeriodicOrbit b_orbit_;
    std::vector<TowerLevel> levels_;
};

/// Build the level-1 orbit for given (l, m): the word Tba a^l Tab(nu) b^m with
/// nu closing it through central coordinate 1.
inline PeriodicOrbit build_seed_orbit(const CycleSystem& sys, long l, long m,
                                      double closure_tol = 1e-9) {
    if (l < 1 || m < 1) throw SpecViolationError("build_seed_orbit: need l, m >= 1");
    const auto& c = sys.central();
    const NuSolution nu = nu_for_fixed_point(c, l, m);
    std::vector<Token> toks{TokenTba{}, TokenA{l}, TokenTab{nu.nu}, TokenB{m}};
    PeriodicOrbit orb = realize_orbit(sys, ItineraryWord::make(std::move(toks), c), 1e-12,
                                      closure_tol);
    orb.shadow = ShadowInfo{c.pi_b, m, c.t_ba + l * c.pi_a + c.t_ab};
    orb.meta_l = l;
    orb.meta_m = m;
    orb.meta_nu = nu.nu;
    orb.meta_exit_offset = 1.0;
    return orb;
}

/// Deterministic level-1 search: the admissible lattice point of largest
/// central exponent (safety-capped below 1/C), smallest period then smallest
/// m on ties.
inline std::pair<long, long> search_seed(const CycleSystem& sys, const TowerConfig& cfg) {
    const auto& c = sys.central();
    const double cap = std::min(0.5 * c.chi_b(), cfg.seed_chi_safety / cfg.C);
    double best_chi = 0.0;
    long best_l = 0, best_m = 0, best_p = 0;
    for (long m = 1; m <= cfg.seed_m_max; ++m) {
        for (long l = 1; l <= cfg.seed_l_max; ++l) {
            const long period = m * c.pi_b + l * c.pi_a + c.t_ab + c.t_ba;
            if (period > cfg.period_cap) break;
            const double g = m * c.log_beta() + l * c.log_lambda();
            if (g <= 0.0) break;  // larger l only shrinks g
            const double chi = g / static_cast<double>(period);
            if (!(chi < cap)) continue;
            const bool better = chi > best_chi || (chi == best_chi && period < best_p) ||
                                (chi == best_chi && period == best_p && m < best_m);
            if (better) {
                best_chi = chi;
                best_l = l;
                best_m = m;
                best_p = period;
            }
        }
    }
    if (best_m == 0)
        throw InfeasibleError("search_seed: no admissible (l, m) below the exponent caps");
    return {best_l, best_m};
}

/// Start the tower from a realized first orbit. Gates: expanding central
/// multiplier, exponent below half the B exponent, exponent below 1/C.
inline Tower init_tower(const CycleSystem& sys, const TowerConfig& cfg,
                        const PeriodicOrbit& first_orbit) {
    Tower tower(sys, cfg);
    const auto& c = sys.central();
    auto reject = [](const std::string& msg) { throw RejectedError("init_tower: " + msg); };
    if (!(std::abs(first_orbit.sigma) > 1.0))
        reject("|sigma| > 1 fails: the first orbit must have expanding central multiplier");
    if (!(first_orbit.chi < 0.5 * c.chi_b())) {
        std::ostringstream os;
        os << "chi_1 < chi^c(B)/2 fails: " << first_orbit.chi << " >= " << 0.5 * c.chi_b();
        reject(os.str());
    }
    if (!(first_orbit.chi < 1.0 / cfg.C)) {
        std::ostringstream os;
        os << "chi_1 < 1/C fails: " << first_orbit.chi << " >= " << 1.0 / cfg.C;
        reject(os.str());
    }
    if (!first_orbit.shadow || first_orbit.shadow->parent_period != c.pi_b)
        reject("first orbit carries no shadow structure against the B orbit");

    TowerLevel lv;
    lv.n = 1;
    lv.orbit = first_orbit;
    lv.l = first_orbit.meta_l;
    lv.m = first_orbit.meta_m;
    lv.chi = first_orbit.chi;
    lv.kappa = 1.0 - cfg.C * lv.chi;
    lv.d = min_orbit_gap(sys, first_orbit).value;
    lv.gamma_ceiling = lv.d / 6.0;
    lv.gamma = 0.5 * lv.gamma_ceiling;  // provisional until level 2 exists
    lv.gamma_final = false;

    // level-0 certificate against the orbit of B; the fraction condition at
    // this depth is vacuous (1 - C*chi^c(B) < 0 at any admissible C)
    const double gamma0 = 3.0 * sys.spec().chart_radius;
    lv.approach =
        verify_good_approx(sys, first_orbit, tower.b_orbit(), gamma0, 1.0 - cfg.C * c.chi_b());
    lv.gates = section6_checks(c, cfg.C, c.chi_b(), lv.l, lv.m, c.t_ab + c.t_ba);
    tower.push_level(std::move(lv));
    return tower;
}

struct ExtendDiagnostic {
    long l = 0, m = 0;
    std::string failed;
    double margin = 0.0;
};

namespace detail {

inline double chi_cap_for_level(const TowerConfig& cfg, int level, double chi_parent) {
    double cap = cfg.halving_ratio * chi_parent;
    if (level >= cfg.chi_cap_from_level) {
        const double budget =
            cfg.eps_budget * std::pow(2.0, cfg.max_levels - level) / (4.0 * cfg.C);
        cap = std::min(cap, budget);
    }
    return cap;
}

}  // namespace detail

/// Search (l, m) for the next level: expanding index, exponent decay, the
/// approximation fraction against 1 - C*chi(parent), and an admissible gamma
/// window below the gap ceiling. Lexicographic in m then l; first admissible
/// wins unless minimize_child_period is set.
inline TowerLevel extend(Tower& tower) {
    const CycleSystem& sys = tower.system();
    const TowerConfig& cfg = tower.config();
    if (tower.empty()) throw RejectedError("extend: tower has no levels");
    TowerLevel& parent_lv = tower.levels_mutable().back();
    const PeriodicOrbit& parent = parent_lv.orbit;
    const int n = parent_lv.n;
    const int child_n = n + 1;
    const auto& c = sys.central();

    const double g_parent = std::log(std::abs(parent.sigma));
    const double chi_cap = detail::chi_cap_for_level(cfg, child_n, parent_lv.chi);
    const double kappa_target = parent_lv.kappa;
    const double ceiling = tower.ceiling(n);
    if (!(ceiling > 0.0))
        throw InfeasibleError("extend: gamma ceiling is not positive (degenerate orbit gap)");
    const double exit_offset = std::min(
        0.9, ceiling / sys.metric_scale() / (cfg.exit_safety * parent.max_abs_prefix_slope));
    const long t_extra = c.t_ab + c.t_ba;
    const double abs_log_lambda = -c.log_lambda();

    std::optional<TowerLevel> found;
    ExtendDiagnostic best;
    best.failed = "no candidate examined";
    auto note = [&](long l, long m, const std::string& what, double margin) {
        if (best.failed == "no candidate examined" || margin < best.margin) {
            best = {l, m, what, margin};
        }
    };

    for (long m = 1; m <= cfg.m_max; ++m) {
        const long base_period = m * parent.period + t_extra;
        if (base_period > cfg.period_cap) break;
        // entry offset of the candidate child; below the representable
        // resolution near central 1 the repetition boundaries collapse onto
        // one double, and deeper m only sinks further
        if (exit_offset * std::exp(-static_cast<double>(m) * g_parent) < 1e-12) {
            note(0, m, "entry offset below representable resolution", 0.0);
            break;
        }
        // best possible fraction at this m loses one repetition to the
        // boundary; if even that cannot reach the target, move on
        const double frac_max =
            static_cast<double>((m - 1) * parent.period) / static_cast<double>(base_period);
        if (frac_max < kappa_target) {
            note(0, m, "approximation fraction unreachable", kappa_target - frac_max);
            continue;
        }
        // l range from the exponent window 0 < chi <= chi_cap
        const double num = m * g_parent;
        long l_lo = static_cast<long>(std::ceil((num - chi_cap * static_cast<double>(base_period)) /
                                                (abs_log_lambda + chi_cap * c.pi_a)));
        l_lo = std::max<long>(0, l_lo);
        for (long l = l_lo; l <= cfg.l_max; ++l) {
            const long period = base_period + l * c.pi_a;
            if (period > cfg.period_cap) break;
            const double g_child = num - l * abs_log_lambda;
            if (g_child <= 0.0) break;  // larger l only shrinks it
            const double chi_child = g_child / static_cast<double>(period);
            if (!(chi_child < cfg.halving_ratio * parent_lv.chi)) {
                note(l, m, "exponent halving",
                     chi_child - cfg.halving_ratio * parent_lv.chi);
                continue;
            }
            if (!(chi_child <= chi_cap)) {
                note(l, m, "exponent budget cap", chi_child - chi_cap);
                continue;
            }
            const double frac_k1 =
                static_cast<double>((m - 1) * parent.period) / static_cast<double>(period);
            if (frac_k1 < kappa_target) {
                note(l, m, "approximation fraction (analytic)", kappa_target - frac_k1);
                continue;
            }

            ChildCycle ch = child_cycle(sys, parent, l, m, exit_offset);
            PeriodicOrbit child = realize_child(sys, parent, ch, cfg.closure_tol);
            const double d_child = min_orbit_gap(sys, child).value;
            if (!(d_child > 0.0)) {
                note(l, m, "child orbit has coincident points", 0.0);
                continue;
            }
            const double trial_gamma = ceiling * (1.0 - 1e-12);
            GoodApproxCertificate cert =
                verify_good_approx(sys, child, parent, trial_gamma, kappa_target);
            if (!cert.kappa_ok) {
                note(l, m, "approximation fraction (certificate)", kappa_target - cert.kappa);
                continue;
            }
            if (!cert.gamma_bound_ok) {
                note(l, m, "gamma window empty", cert.gamma_measured - trial_gamma);
                continue;
            }
            // final gamma strictly between the measured deviation and the
            // ceiling keeps the same Gamma and maximizes two-sided slack
            const double gamma_n = cert.gamma_measured > 0.0
                                       ? std::sqrt(cert.gamma_measured * ceiling)
                                       : 0.5 * ceiling;
            GoodApproxCertificate cert_final =
                verify_good_approx(sys, child, parent, gamma_n, kappa_target);
            if (cert_final.included_blocks != cert.included_blocks || !cert_final.kappa_ok ||
                !cert_final.gamma_bound_ok) {
                note(l, m, "gamma refinement changed the certificate", 0.0);
                continue;
            }

            TowerLevel lv;
            lv.n = child_n;
            lv.orbit = std::move(child);
            lv.l = l;
            lv.m = m;
            lv.chi = lv.orbit.chi;
            lv.kappa = 1.0 - cfg.C * lv.chi;
            lv.d = d_child;
            lv.approach = std::move(cert_final);
            {
                CycleCentralData eff = c;  // parent-equivalent data for the gate reports
                eff.pi_b = static_cast<int>(std::min<long>(parent.period,
                                                           std::numeric_limits<int>::max()));
                eff.beta = std::abs(parent.sigma);
                lv.gates = section6_checks(eff, cfg.C, parent_lv.chi, l, m, t_extra);
            }
            lv.gamma_ceiling =
                std::min(tower.min_gap_up_to(n), d_child) / (3.0 * std::pow(2.0, child_n));
            lv.gamma = 0.5 * lv.gamma_ceiling;
            lv.gamma_final = false;
            if (!found || (cfg.minimize_child_period && lv.orbit.period < found->orbit.period)) {
                found = std::move(lv);
            }
            if (!cfg.minimize_child_period) break;
        }
        if (found && !cfg.minimize_child_period) break;
    }
    if (!found) {
        std::ostringstream os;
        os << "extend: no admissible (l, m) up to m_max = " << cfg.m_max << ", l_max = "
           << cfg.l_max << "; best candidate (l=" << best.l << ", m=" << best.m << ") failed '"
           << best.failed << "' by " << best.margin;
        throw InfeasibleError(os.str());
    }
    // the parent's gamma becomes final; the child carries a provisional one
    parent_lv.gamma = found->approach.gamma;
    parent_lv.gamma_final = true;
    tower.push_level(std::move(*found));
    return tower.levels().back();
}

struct KappaProduct {
    double product = 1.0;     // built levels from from_n to top
    double tail_bound = 1.0;  // geometric majorant for the unbuilt tail
    double combined = 1.0;
};

/// Product of the per-level fractions kappa_k = 1 - C*chi_k from from_n, with
/// a convergent lower bound for the infinite tail, evaluated in log space.
inline KappaProduct kappa_product(const Tower& tower, int from_n) {
    const auto& lvls = tower.levels();
    if (lvls.empty()) throw RejectedError("kappa_product: empty tower");
    const double C = tower.config().C;
    const double r = tower.config().halving_ratio;
    KappaProduct out;
    double log_sum = 0.0;
    for (const auto& lv : lvls) {
        if (lv.n < from_n) continue;
        if (!(lv.kappa > 0.0))
            throw NonPositiveError("kappa_product: kappa <= 0 at level " + std::to_string(lv.n));
        log_sum += std::log1p(-C * lv.chi);
    }
    out.product = std::exp(log_sum);
    // geometric majorant for the unbuilt tail, anchored at the deepest built
    // level: every further level must satisfy the halving condition against
    // it, so chi_k <= chi_top * r^{k-top} for k > top
    const int top = lvls.back().n;
    const double chi_top = lvls.back().chi;
    double log_tail = 0.0;
    for (int k = top + 1; k < top + 4000; ++k) {
        const double term = C * chi_top * std::pow(r, k - top);
        if (!(term < 1.0))
            throw NonPositiveError("kappa_product: tail term reaches 1 at level " +
                                   std::to_string(k));
        log_tail += std::log1p(-term);
        if (term < 1e-18) break;
    }
    out.tail_bound = std::exp(log_tail);
    out.combined = out.product * out.tail_bound;
    return out;
}

/// r_n = sum of gamma_k over built levels k >= n plus the geometric tail
/// bound; every r_n must stay below d_n/3 so the closed r_n-balls around
/// distinct orbit points are disjoint.
inline std::vector<double> r_sequence(const Tower& tower) {
    const auto& lvls = tower.levels();
    if (lvls.empty()) throw RejectedError("r_sequence: empty tower");
    const int top = lvls.back().n;
    const double tail = tower.min_gap_up_to(top) / (3.0 * std::pow(2.0, top));
    std::vector<double> r(lvls.size(), 0.0);
    double acc = tail;
    for (size_t i = lvls.size(); i-- > 0;) {
        acc += lvls[i].gamma;
        r[i] = acc;
    }
    for (size_t i = 0; i < lvls.size(); ++i) {
        if (!(r[i] < lvls[i].d / 3.0)) {
            std::ostringstream os;
            os << "r_sequence: r_" << lvls[i].n << " = " << r[i] << " is not below d_"
               << lvls[i].n << "/3 = " << lvls[i].d / 3.0;
            throw BoundViolatedError(os.str());
        }
    }
    return r;
}

struct SupportBound {
    long ball_count = 0;
    double measure_lower_bound = 0.0;
    long min_count = std::numeric_limits<long>::max();
    double min_measure = 0.0;
    double radius = 0.0;
};

/// Count the mass the level-m measure puts on the disjoint closed r_n-balls
/// around the level-n orbit: every ball must carry at least
/// (prod_{k=n}^{m-1} kappa_k)/period_n.
inline SupportBound support_bound(const Tower& tower, int n, int m) {
    const auto& lvls = tower.levels();
    if (lvls.empty() || n < 1 || m <= n || m > lvls.back().n)
        throw SpecViolationError("support_bound: need 1 <= n < m <= top");
    const CycleSystem& sys = tower.system();
    const auto r = r_sequence(tower);
    const TowerLevel& ln = lvls[static_cast<size_t>(n - 1)];
    const TowerLevel& lm = lvls[static_cast<size_t>(m - 1)];
    const double radius = r[static_cast<size_t>(n - 1)];
    if (!(2.0 * radius < ln.d)) {
        std::ostringstream os;
        os << "support_bound: closed r_" << n << "-balls of radius " << radius
           << " are not pairwise disjoint against gap " << ln.d;
        throw DisjointnessError(os.str());
    }

    double kprod = 1.0;
    for (int k = n; k < m; ++k) kprod *= lvls[static_cast<size_t>(k - 1)].kappa;
    SupportBound out;
    out.ball_count = ln.orbit.period;
    out.radius = radius;
    out.measure_lower_bound = kprod / static_cast<double>(ln.orbit.period);

    // bucket the centers per chart, sorted by central coordinate
    auto centers = orbit_points(sys, ln.orbit, 0, ln.orbit.period);
    std::vector<long> counts(centers.size(), 0);
    struct Entry {
        double c;
        size_t idx;
    };
    std::map<detail::ChartKey, std::vector<Entry>> index;
    for (size_t i = 0; i < centers.size(); ++i)
        index[{centers[i].chart.role, centers[i].chart.index}].push_back({centers[i].x_c, i});
    for (auto& [key, v] : index)
        std::sort(v.begin(), v.end(), [](const Entry& a, const Entry& b) { return a.c < b.c; });

    const double c_window = radius / sys.metric_scale();
    OrbitStream st(sys, lm.orbit);
    for (long t = 0; t < lm.orbit.period; ++t) {
        const AmbientPoint& p = st.point();
        auto it = index.find({p.chart.role, p.chart.index});
        if (it != index.end()) {
            const auto& v = it->second;
            auto lo = std::lower_bound(v.begin(), v.end(), p.x_c - c_window,
                                       [](const Entry& e, double x) { return e.c < x; });
            for (auto e = lo; e != v.end() && e->c <= p.x_c + c_window; ++e) {
                if (sys.distance(p, centers[e->idx]) <= radius) {
                    ++counts[e->idx];
                    break;  // balls are disjoint
                }
            }
        }
        st.advance();
    }
    for (size_t i = 0; i < counts.size(); ++i) out.min_count = std::min(out.min_count, counts[i]);
    out.min_measure = static_cast<double>(out.min_count) / static_cast<double>(lm.orbit.period);
    for (size_t i = 0; i < counts.size(); ++i) {
        const double mass = static_cast<double>(counts[i]) / static_cast<double>(lm.orbit.period);
        if (mass < out.measure_lower_bound) {
            std::ostringstream os;
            os << "support_bound: ball " << i << " around level-" << n << " carries mass " << mass
               << " below the bound " << out.measure_lower_bound << " (levels " << n << " -> "
               << m << ")";
            throw CountingShortfallError(os.str());
        }
    }
    return out;
}

}  // namespace hetcycle
