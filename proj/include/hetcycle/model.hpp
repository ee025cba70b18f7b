#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "hetcycle/affine.hpp"
#include "hetcycle/cycle_data.hpp"
#include "hetcycle/errors.hpp"

namespace hetcycle {

enum class ChartRole : uint8_t { a_phase, b_phase, ab_step, ba_step };

inline const char* to_string(ChartRole r) {
    switch (r) {
        case ChartRole::a_phase: return "A";
        case ChartRole::b_phase: return "B";
        case ChartRole::ab_step: return "ab";
        case ChartRole::ba_step: return "ba";
    }
    return "?";
}

/// One box of the chart atlas: a saddle phase or a transition corridor step.
struct ChartId {
    ChartRole role = ChartRole::b_phase;
    int index = 0;

    friend bool operator==(const ChartId&, const ChartId&) = default;

    std::string name() const {
        std::ostringstream os;
        os << to_string(role) << index;
        return os.str();
    }
};

/// Point in normalized chart coordinates: strong stable block x_s, central
/// x_c, strong unstable block x_u, each inside [-1,1] boxes up to the
/// configured overflow tolerance.
struct AmbientPoint {
    ChartId chart;
    std::vector<double> x_s;
    double x_c = 0.0;
    std::vector<double> x_u;
};

/// Full geometric data of the piecewise-affine model.
struct CycleSpec {
    CycleCentralData central;
    int s_dim = 1;
    int u_dim = 1;
    double rho_s = 0.475;  // per-step strong stable rate, < lambda^{1/pi_a}
    double rho_u = 2.4;    // per-step strong unstable rate, > beta^{1/pi_b}
    double chart_radius = 1e-3;
    double chart_separation = 1.0;
    double overflow_tolerance = 1.0;
    // Affine offsets injected in strong coordinates by the final entry step of
    // each transition (one scalar applied to every strong coordinate).
    double offset_ab_s = 0.0;
    double offset_ab_u = 0.0;
    double offset_ba_s = 0.0;
    double offset_ba_u = 0.0;

    void validate(bool strict_regime = false) const {
        central.validate(strict_regime);
        auto fail = [](const std::string& msg) { throw SpecViolationError("CycleSpec: " + msg); };
        if (s_dim < 0 || u_dim < 0) fail("s_dim and u_dim must be non-negative");
        if (!(rho_s > 0.0 && rho_s < 1.0)) fail("rho_s must lie in (0,1)");
        if (!(rho_u > 1.0)) fail("rho_u must exceed 1");
        if (!(chart_radius > 0.0)) fail("chart_radius must be positive");
        if (!(chart_separation > 2.0 * chart_radius))
            fail("chart_separation must exceed twice chart_radius");
        const double lam_step = std::pow(central.lambda, 1.0 / central.pi_a);
        const double beta_step = std::pow(central.beta, 1.0 / central.pi_b);
        if (!(rho_s < lam_step)) {
            std::ostringstream os;
            os << "domination fails: rho_s = " << rho_s << " must be < lambda^{1/pi_a} = "
               << lam_step;
            fail(os.str());
        }
        if (!(beta_step < rho_u)) {
            std::ostringstream os;
            os << "domination fails: rho_u = " << rho_u << " must be > beta^{1/pi_b} = "
               << beta_step;
            fail(os.str());
        }
        if (!(overflow_tolerance >= 0.0)) fail("overflow_tolerance must be >= 0");
    }
};

/// One step of the skew-product dynamics between two charts: strong stable
/// contraction, affine central component, strong unstable expansion.
struct BranchMap {
    ChartId source;
    ChartId target;
    AffineMap1D central;      // central component of this step
    double s_offset = 0.0;    // added to every strong stable coordinate
    double u_offset = 0.0;    // added to every strong unstable coordinate
    double central_log_derivative = 0.0;  // ln|central.slope|
};

/// Immutable chart atlas plus branch lookup. Branch selection between the
/// saddle loop and the corridor exit is word-driven; the system only knows
/// the affine data of every admissible step.
class CycleSystem {
  public:
    explicit CycleSystem(CycleSpec spec, bool strict_regime = false) : spec_(std::move(spec)) {
        spec_.validate(strict_regime);
        lam_step_ = std::pow(spec_.central.lambda, 1.0 / spec_.central.pi_a);
        beta_step_ = std::pow(spec_.central.beta, 1.0 / spec_.central.pi_b);
        charts_.reserve(chart_count());
        for (int j = 0; j < spec_.central.pi_a; ++j) charts_.push_back({ChartRole::a_phase, j});
        for (int j = 0; j < spec_.central.pi_b; ++j) charts_.push_back({ChartRole::b_phase, j});
        for (int j = 0; j < spec_.central.t_ab; ++j) charts_.push_back({ChartRole::ab_step, j});
        for (int j = 0; j < spec_.central.t_ba; ++j) charts_.push_back({ChartRole::ba_step, j});
    }

    const CycleSpec& spec() const { return spec_; }
    const CycleCentralData& central() const { return spec_.central; }
    int chart_count() const {
        const auto& c = spec_.central;
        return c.pi_a + c.pi_b + c.t_ab + c.t_ba;
    }
    const std::vector<ChartId>& charts() const { return charts_; }
    int dim() const { return spec_.s_dim + 1 + spec_.u_dim; }
    double metric_scale() const { return spec_.chart_radius / std::sqrt(static_cast<double>(dim())); }

    double lambda_step() const { return lam_step_; }
    double beta_step() const { return beta_step_; }

    /// The branch from `source` toward `target`; nu parametrizes the central
    /// intercept of the corridor step entering the B side. Throws NoBranchError
    /// for pairs the atlas does not connect.
    BranchMap branch(const ChartId& source, const ChartId& target, double nu = 0.0) const {
        const auto& c = spec_.central;
        BranchMap b;
        b.source = source;
        b.target = target;
        switch (source.role) {
            case ChartRole::a_phase: {
                const bool last_phase = source.index == c.pi_a - 1;
                const bool to_next_phase =
                    target.role == ChartRole::a_phase && target.index == (source.index + 1) % c.pi_a;
                const bool to_corridor = last_phase && target.role == ChartRole::ab_step &&
                                         target.index == 0;
                if (!to_next_phase && !to_corridor) break;
                b.central = AffineMap1D::scaling(lam_step_);
                b.central_log_derivative = std::log(lam_step_);
                return b;
            }
            case ChartRole::b_phase: {
                const bool last_phase = source.index == c.pi_b - 1;
                const bool to_next_phase =
                    target.role == ChartRole::b_phase && target.index == (source.index + 1) % c.pi_b;
                const bool to_corridor = last_phase && target.role == ChartRole::ba_step &&
                                         target.index == 0;
                if (!to_next_phase && !to_corridor) break;
                b.central = AffineMap1D::scaling(beta_step_);
                b.central_log_derivative = std::log(beta_step_);
                return b;
            }
            case ChartRole::ab_step: {
                const bool interior = source.index + 1 < c.t_ab &&
                                      target.role == ChartRole::ab_step &&
                                      target.index == source.index + 1;
                const bool entry = source.index == c.t_ab - 1 &&
                                   ((target.role == ChartRole::b_phase && target.index == 0) ||
                                    (target.role == ChartRole::ba_step && target.index == 0));
                if (interior) {
                    b.central = AffineMap1D::identity();
                    return b;
                }
                if (entry) {
                    b.central = AffineMap1D{static_cast<double>(c.tau), nu};
                    b.s_offset = spec_.offset_ab_s;
                    b.u_offset = spec_.offset_ab_u;
                    return b;
                }
                break;
            }
            case ChartRole::ba_step: {
                const bool interior = source.index + 1 < c.t_ba &&
                                      target.role == ChartRole::ba_step &&
                                      target.index == source.index + 1;
                const bool entry = source.index == c.t_ba - 1 &&
                                   ((target.role == ChartRole::a_phase && target.index == 0) ||
                                    (target.role == ChartRole::ab_step && target.index == 0));
                if (interior) {
                    b.central = AffineMap1D::identity();
                    return b;
                }
                if (entry) {
                    b.central = AffineMap1D{-1.0, 0.0};
                    b.s_offset = spec_.offset_ba_s;
                    b.u_offset = spec_.offset_ba_u;
                    return b;
                }
                break;
            }
        }
        throw NoBranchError("CycleSystem::branch: no branch " + source.name() + " -> " +
                            target.name());
    }

    /// Default continuation for bare stepping: saddle charts loop, corridors
    /// advance. The corridor step entering the B side needs nu.
    ChartId default_target(const ChartId& source) const {
        const auto& c = spec_.central;
        switch (source.role) {
            case ChartRole::a_phase: return {ChartRole::a_phase, (source.index + 1) % c.pi_a};
            case ChartRole::b_phase: return {ChartRole::b_phase, (source.index + 1) % c.pi_b};
            case ChartRole::ab_step:
                return source.index + 1 < c.t_ab ? ChartId{ChartRole::ab_step, source.index + 1}
                                                 : ChartId{ChartRole::b_phase, 0};
            case ChartRole::ba_step:
                return source.index + 1 < c.t_ba ? ChartId{ChartRole::ba_step, source.index + 1}
                                                 : ChartId{ChartRole::a_phase, 0};
        }
        throw NoBranchError("CycleSystem::default_target: unknown chart role");
    }

    AmbientPoint apply(const BranchMap& b, const AmbientPoint& p) const {
        AmbientPoint q;
        q.chart = b.target;
        q.x_s.resize(p.x_s.size());
        for (size_t i = 0; i < p.x_s.size(); ++i) q.x_s[i] = spec_.rho_s * p.x_s[i] + b.s_offset;
        q.x_c = b.central(p.x_c);
        q.x_u.resize(p.x_u.size());
        for (size_t i = 0; i < p.x_u.size(); ++i) q.x_u[i] = spec_.rho_u * p.x_u[i] + b.u_offset;
        return q;
    }

    /// Bare step along the default branch (nu required when the step enters
    /// the B side through the ab corridor).
    AmbientPoint step(const AmbientPoint& p, double nu = 0.0) const {
        return apply(branch(p.chart, default_target(p.chart), nu), p);
    }

    bool in_box(const AmbientPoint& p) const {
        const double lim = 1.0 + spec_.overflow_tolerance;
        if (std::abs(p.x_c) > lim) return false;
        for (double v : p.x_s)
            if (std::abs(v) > lim) return false;
        for (double v : p.x_u)
            if (std::abs(v) > lim) return false;
        return true;
    }

    /// Within one chart: chart_radius * Euclidean norm / sqrt(dim), so any two
    /// points of a chart are within 2*chart_radius. Across charts: separation.
    double distance(const AmbientPoint& p, const AmbientPoint& q) const {
        if (!(p.chart == q.chart)) return separation(p.chart, q.chart);
        double sq = 0.0;
        for (size_t i = 0; i < p.x_s.size(); ++i) {
            const double d = p.x_s[i] - q.x_s[i];
            sq += d * d;
        }
        const double dc = p.x_c - q.x_c;
        sq += dc * dc;
        for (size_t i = 0; i < p.x_u.size(); ++i) {
            const double d = p.x_u[i] - q.x_u[i];
            sq += d * d;
        }
        return metric_scale() * std::sqrt(sq);
    }

    double separation(const ChartId& a, const ChartId& b) const {
        return a == b ? 0.0 : spec_.chart_separation;
    }

    AmbientPoint make_point(ChartId chart, double x_c) const {
        AmbientPoint p;
        p.chart = chart;
        p.x_s.assign(static_cast<size_t>(spec_.s_dim), 0.0);
        p.x_c = x_c;
        p.x_u.assign(static_cast<size_t>(spec_.u_dim), 0.0);
        return p;
    }

  private:
    CycleSpec spec_;
    std::vector<ChartId> charts_;
    double lam_step_ = 0.0;
    double beta_step_ = 0.0;
};

inline CycleSystem build_model(const CycleSpec& spec, bool strict_regime = false) {
    return CycleSystem(spec, strict_regime);
}

}  // namespace hetcycle
