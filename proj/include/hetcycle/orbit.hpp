#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

#include "hetcycle/model.hpp"
#include "hetcycle/word.hpp"

namespace hetcycle {

/// Shadow structure of a word built as m repetitions of a parent word plus a
/// closing excursion: child positions [start, start + reps*parent_period)
/// follow the parent word step for step.
struct ShadowInfo {
    long parent_period = 0;
    long reps = 0;
    long start = 0;
};

struct PeriodicOrbit {
    WordPtr word;
    AmbientPoint base;
    long period = 0;
    AffineMap1D central_return;  // composed central map over one period
    double sigma = 0.0;          // signed central multiplier = central_return.slope
    double chi = 0.0;            // ln|sigma| / period
    double max_abs_prefix_slope = 1.0;
    double min_abs_prefix_slope = 1.0;
    std::optional<ShadowInfo> shadow;
    // construction metadata when built through child_cycle
    long meta_l = 0, meta_m = 0;
    double meta_nu = 0.0, meta_exit_offset = 0.0;

    // strong unstable track, materialized only when the model has unstable
    // offsets (the coordinate is solved backward; forward iteration of an
    // expanding affine recursion is numerically useless)
    std::shared_ptr<const std::vector<double>> u_track;
};

namespace detail {

struct StrongRecursion {
    double rate = 0.5;
    // composes x -> rate*x + offset_t over a step sequence
    double fold_offset_forward(const CycleSystem& sys, const ItineraryWord& w, bool stable) {
        WordCursor cur(sys, std::make_shared<const ItineraryWord>(w));
        double off = 0.0;
        for (long t = 0; t < w.period(); ++t) {
            const BranchMap b = cur.next();
            off = rate * off + (stable ? b.s_offset : b.u_offset);
        }
        return off;
    }
};

}  // namespace detail

/// Solve the unique orbit of a closed word: the central coordinate is the
/// fixed point of the composed affine return map, the strong stable block is
/// solved by forward contraction, the strong unstable block backward.
inline PeriodicOrbit realize_orbit(const CycleSystem& sys, WordPtr word,
                                   double degenerate_tol = 1e-12, double closure_tol = 1e-9) {
    PeriodicOrbit orb;
    orb.word = word;
    orb.period = word->period();

    WordCursor cur(sys, word);
    AffineMap1D ret = AffineMap1D::identity();
    double max_slope = 1.0, min_slope = 1.0;
    double s_off = 0.0;
    bool any_u_offset = false;
    for (long t = 0; t < orb.period; ++t) {
        const BranchMap b = cur.next();
        ret = b.central * ret;
        max_slope = std::max(max_slope, std::abs(ret.slope));
        min_slope = std::min(min_slope, std::abs(ret.slope));
        s_off = sys.spec().rho_s * s_off + b.s_offset;
        if (b.u_offset != 0.0) any_u_offset = true;
    }
    orb.central_return = ret;
    orb.sigma = ret.slope;
    orb.max_abs_prefix_slope = max_slope;
    orb.min_abs_prefix_slope = min_slope;
    if (std::abs(std::abs(ret.slope) - 1.0) <= degenerate_tol) {
        std::ostringstream os;
        os << "realize_orbit: |central slope| = " << std::abs(ret.slope)
           << " is 1 within tolerance for word " << word->describe();
        throw DegenerateWordError(os.str());
    }
    orb.chi = std::log(std::abs(orb.sigma)) / static_cast<double>(orb.period);

    const double P = static_cast<double>(orb.period);
    const double s_slope = std::exp(P * std::log(sys.spec().rho_s));  // underflows to 0 safely
    const double s_base = s_off / (1.0 - s_slope);

    // backward recursion for u: u_t = (u_{t+1} - o_t)/rho_u
    double u_base = 0.0;
    std::shared_ptr<std::vector<double>> utrack;
    if (any_u_offset) {
        std::vector<double> offs(static_cast<size_t>(orb.period));
        WordCursor c2(sys, word);
        for (long t = 0; t < orb.period; ++t) offs[static_cast<size_t>(t)] = c2.next().u_offset;
        const double inv = 1.0 / sys.spec().rho_u;
        double boff = 0.0;  // offset of the backward composition over one period
        for (long t = orb.period - 1; t >= 0; --t) boff = inv * (boff - offs[static_cast<size_t>(t)]);
        const double bslope = std::exp(-P * std::log(sys.spec().rho_u));
        u_base = boff / (1.0 - bslope);
        // materialize the whole track backward from the base
        utrack = std::make_shared<std::vector<double>>(static_cast<size_t>(orb.period));
        double u = u_base;  // value at t = period == t = 0
        for (long t = orb.period - 1; t >= 0; --t) {
            u = inv * (u - offs[static_cast<size_t>(t)]);
            // careful: iterating backward from the base uses u_{t} = (u_{t+1}-o_t)/rho_u
            (*utrack)[static_cast<size_t>(t)] = u;
        }
        // the t=0 entry must close back to the fixed point
        (*utrack)[0] = u_base;
        orb.u_track = utrack;
    }

    orb.base = sys.make_point(word->start_chart(), fixed_point(ret));
    std::fill(orb.base.x_s.begin(), orb.base.x_s.end(), s_base);
    std::fill(orb.base.x_u.begin(), orb.base.x_u.end(), u_base);

    // closure check: walk one period and compare against the base
    {
        WordCursor c3(sys, word);
        double c = orb.base.x_c, s = s_base;
        for (long t = 0; t < orb.period; ++t) {
            const BranchMap b = c3.next();
            c = b.central(c);
            s = sys.spec().rho_s * s + b.s_offset;
        }
        const double err = std::max(std::abs(c - orb.base.x_c), std::abs(s - s_base));
        if (err > closure_tol) {
            std::ostringstream os;
            os << "realize_orbit: closure error " << err << " exceeds " << closure_tol;
            throw DegenerateWordError(os.str());
        }
    }
    return orb;
}

/// Forward point stream over a realized orbit. Central and strong stable
/// coordinates advance forward; the strong unstable one reads the backward
/// solved track when offsets are present and is identically zero otherwise.
class OrbitStream {
  public:
    OrbitStream(const CycleSystem& sys, const PeriodicOrbit& orb, long from = 0)
        : sys_(&sys), orb_(&orb), cur_(sys, orb.word) {
        point_ = orb.base;
        pos_ = 0;
        for (long t = 0; t < from; ++t) advance();
    }

    long position() const { return pos_; }
    const AmbientPoint& point() const { return point_; }

    /// Branch taken at the current position (also advances).
    BranchMap advance() {
        const BranchMap b = cur_.next();
        point_ = sys_->apply(b, point_);
        pos_ = (pos_ + 1) % orb_->period;
        if (orb_->u_track) {
            const double u = (*orb_->u_track)[static_cast<size_t>(pos_)];
            std::fill(point_.x_u.begin(), point_.x_u.end(), u);
        }
        if (pos_ == 0) point_ = orb_->base;  // re-anchor at the period seam
        return b;
    }

  private:
    const CycleSystem* sys_;
    const PeriodicOrbit* orb_;
    WordCursor cur_;
    AmbientPoint point_;
    long pos_ = 0;
};

/// Collect count points starting at index `from`.
inline std::vector<AmbientPoint> orbit_points(const CycleSystem& sys, const PeriodicOrbit& orb,
                                              long from, long count) {
    if (from < 0 || from >= orb.period)
        throw SpecViolationError("orbit_points: from outside [0, period)");
    std::vector<AmbientPoint> out;
    out.reserve(static_cast<size_t>(count));
    OrbitStream st(sys, orb, from);
    for (long i = 0; i < count; ++i) {
        out.push_back(st.point());
        st.advance();
    }
    return out;
}

/// Streaming Birkhoff average of the log central derivative over one period,
/// with compensated accumulation so period-1e6 sums stay well under 1e-12.
inline double central_exponent(const CycleSystem& sys, const PeriodicOrbit& orb) {
    WordCursor cur(sys, orb.word);
    double sum = 0.0, comp = 0.0;
    for (long t = 0; t < orb.period; ++t) {
        const double v = cur.next().central_log_derivative;
        const double y = v - comp;
        const double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    return sum / static_cast<double>(orb.period);
}

struct GapResult {
    double value = std::numeric_limits<double>::infinity();
    bool is_lower_bound = false;
};

namespace detail {

struct ChartKey {
    ChartRole role;
    int index;
    bool operator<(const ChartKey& o) const {
        if (role != o.role) return role < o.role;
        return index < o.index;
    }
};

struct FlatPoint {
    double c, s, u;
};

inline std::map<ChartKey, std::vector<FlatPoint>> bucket_points(const CycleSystem& sys,
                                                                const PeriodicOrbit& orb) {
    std::map<ChartKey, std::vector<FlatPoint>> buckets;
    OrbitStream st(sys, orb);
    for (long t = 0; t < orb.period; ++t) {
        const AmbientPoint& p = st.point();
        buckets[{p.chart.role, p.chart.index}].push_back(
            {p.x_c, p.x_s.empty() ? 0.0 : p.x_s[0], p.x_u.empty() ? 0.0 : p.x_u[0]});
        st.advance();
    }
    return buckets;
}

}  // namespace detail

/// Minimal pairwise distance over the orbit. Exact mode sorts each chart by
/// the central coordinate and sweeps with the metric lower bound as window;
/// the lower-bound mode keeps only the central sweep and flags the result.
inline GapResult min_orbit_gap(const CycleSystem& sys, const PeriodicOrbit& orb,
                               bool lower_bound_mode = false) {
    GapResult res;
    if (orb.period <= 1) return res;  // single point: +infinity by convention
    auto buckets = detail::bucket_points(sys, orb);
    const double scale = sys.metric_scale();
    const double sd = static_cast<double>(sys.spec().s_dim);
    const double ud = static_cast<double>(sys.spec().u_dim);
    double best = std::numeric_limits<double>::infinity();
    if (buckets.size() > 1) best = sys.spec().chart_separation;
    for (auto& [key, pts] : buckets) {
        std::sort(pts.begin(), pts.end(),
                  [](const detail::FlatPoint& a, const detail::FlatPoint& b) { return a.c < b.c; });
        for (size_t i = 0; i + 1 < pts.size(); ++i) {
            for (size_t j = i + 1; j < pts.size(); ++j) {
                const double dc = pts[j].c - pts[i].c;
                if (scale * dc >= best) break;  // sorted: no closer pair beyond
                double dist;
                if (lower_bound_mode) {
                    dist = scale * dc;
                } else {
                    const double ds = pts[j].s - pts[i].s;
                    const double du = pts[j].u - pts[i].u;
                    dist = scale * std::sqrt(sd * ds * ds + dc * dc + ud * du * du);
                }
                best = std::min(best, dist);
            }
        }
    }
    res.value = best;
    res.is_lower_bound = lower_bound_mode;
    return res;
}

/// Brute force O(P^2) oracle; intended for small periods and tests.
inline double min_orbit_gap_brute(const CycleSystem& sys, const PeriodicOrbit& orb) {
    if (orb.period <= 1) return std::numeric_limits<double>::infinity();
    auto pts = orbit_points(sys, orb, 0, orb.period);
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j)
            best = std::min(best, sys.distance(pts[i], pts[j]));
    return best;
}

/// Specification of an inductive child: m whole parent repetitions, then an
/// excursion Tba a^l Tab(nu'). nu' closes the word so the child enters the
/// parent neighborhood at central offset exit_offset*sigma_parent^{-m} and
/// leaves it at offset exit_offset. exit_offset = 0 reproduces the idealized
/// exactly-anchored child (whose repetitions coincide pointwise); the tower
/// always passes a positive value.
struct ChildCycle {
    double nu_prime = 0.0;
    WordPtr word;
    long l = 0, m = 0;
    double exit_offset = 0.0;
};

inline ChildCycle child_cycle(const CycleSystem& sys, const PeriodicOrbit& parent, long l, long m,
                              double exit_offset = 0.0) {
    if (l < 0 || m < 1) throw SpecViolationError("child_cycle: need l >= 0 and m >= 1");
    if (!(std::abs(parent.sigma) > 1.0))
        throw ParentNotAnchoredError("child_cycle: parent central multiplier must exceed 1");
    const auto& c = sys.central();
    const ChartId base_chart = parent.base.chart;
    const double c_p = parent.base.x_c;  // parent's central fixed point
    const bool at_b_saddle = base_chart.role == ChartRole::b_phase && std::abs(c_p) <= 1e-9;
    // deeper parents sit a tuned exit offset below 1, never far from it
    const bool anchored = base_chart.role == ChartRole::ba_step && base_chart.index == 0 &&
                          std::abs(c_p - 1.0) <= 0.125;
    if (!at_b_saddle && !anchored)
        throw ParentNotAnchoredError(
            "child_cycle: parent base must sit in the B-side departure chart near central 1 "
            "(or be the B saddle at central 0)");

    // signed sigma^{-m}
    const double mag = std::exp(-static_cast<double>(m) * std::log(std::abs(parent.sigma)));
    const double sgn = (parent.sigma < 0.0 && (m % 2)) ? -1.0 : 1.0;
    const double sigma_neg_m = sgn * mag;
    const double lam_l = std::pow(c.lambda, static_cast<double>(l));

    double x0, xm;
    if (at_b_saddle) {
        // exit through the heteroclinic point at central 1
        x0 = c_p + sigma_neg_m;
        xm = c_p + 1.0;
    } else {
        x0 = c_p - exit_offset * sigma_neg_m;
        xm = c_p - exit_offset;
    }
    ChildCycle out;
    out.nu_prime = x0 + c.tau * lam_l * xm;
    out.l = l;
    out.m = m;
    out.exit_offset = at_b_saddle ? 1.0 : exit_offset;

    std::vector<Token> toks;
    toks.push_back(TokenSub{parent.word, m});
    toks.push_back(TokenTba{});
    if (l > 0) toks.push_back(TokenA{l});
    toks.push_back(TokenTab{out.nu_prime});
    out.word = ItineraryWord::make(std::move(toks), c);
    return out;
}

/// Realize a child produced by child_cycle, wiring up the shadow metadata.
inline PeriodicOrbit realize_child(const CycleSystem& sys, const PeriodicOrbit& parent,
                                   const ChildCycle& ch, double closure_tol = 1e-9) {
    PeriodicOrbit orb = realize_orbit(sys, ch.word, 1e-12, closure_tol);
    orb.shadow = ShadowInfo{parent.period, ch.m, 0};
    orb.meta_l = ch.l;
    orb.meta_m = ch.m;
    orb.meta_nu = ch.nu_prime;
    orb.meta_exit_offset = ch.exit_offset;
    return orb;
}

}  // namespace hetcycle
