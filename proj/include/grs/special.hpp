#pragma once

// The reduced system for lambda = q = 0 and H' = 0. With
//
//   gamma = -f' + 2m F'/F,   ds = gamma dt,
//   X2 = sqrt(2m) F'/(gamma F),   Y1 = 1/gamma,   Y2 = sqrt(2m)/(gamma F),
//
// the soliton equations become the polynomial system
//
//   X2' = X2 (X2^2 - 1) + k Y2^2 / sqrt(2m)
//   Y1' = Y1 X2^2
//   Y2' = Y2 (X2^2 - X2 / sqrt(2m))
//
// so Y1 = Y1(s0) exp(int X2^2) and Y2/Y1 = sqrt(2m)/F = (Y2/Y1)(s0) exp(-int X2 / sqrt(2m)).

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "grs/error.hpp"
#include "grs/integrator.hpp"
#include "grs/model.hpp"

namespace grs {

struct DerivSpecial {
    double dx2 = 0.0, dy1 = 0.0, dy2 = 0.0;
};

inline DerivSpecial rhs_special(int m, double k, const SpecialState& st) {
    const double root = std::sqrt(2.0 * m);
    const double x2 = st.x2;
    return {x2 * (x2 * x2 - 1.0) + k * st.y2 * st.y2 / root, st.y1 * x2 * x2,
            st.y2 * (x2 * x2 - x2 / root)};
}

inline void rhs_special(int m, double k, double s, std::span<const double> y, std::span<double> dy) {
    const DerivSpecial d = rhs_special(m, k, special_state(s, y));
    dy[layout::kX2] = d.dx2;
    dy[layout::kY1] = d.dy1;
    dy[layout::kY2] = d.dy2;
}

struct SpecialPoint {
    SpecialState state;
    double gamma = 0.0;
};

/// Maps a t-state with lambda = q = 0 and H' = 0 to (X2, Y1, Y2). Y1 and Y2
/// carry the sign of 1/gamma. The returned s is 0.
inline SpecialPoint from_t(const AnsatzParams& p, const StateT& st) {
    if (p.lambda != 0.0) throw Error(ErrorCode::Invalid, "needs lambda = 0", "lambda");
    if (p.q != 0) throw Error(ErrorCode::Invalid, "needs q = 0", "q");
    if (st.dH != 0.0) throw Error(ErrorCode::Invalid, "needs H' = 0", "dH");
    if (st.F == 0.0) throw Error(ErrorCode::SingularState, "F vanishes", "F");
    const double m2 = 2.0 * p.m;
    const double gamma = -st.df + m2 * st.dF / st.F;
    if (gamma == 0.0) throw Error(ErrorCode::GammaZero, "gamma = -f' + trL vanishes");
    const double root = std::sqrt(m2);
    SpecialPoint out;
    out.gamma = gamma;
    out.state = SpecialState{0.0, root * st.dF / (gamma * st.F), 1.0 / gamma, root / (gamma * st.F)};
    return out;
}

/// Integrates the reduced system carrying int X2^2 and int X2 from `initial.s`.
inline Trajectory integrate_special(int m, double k, const SpecialState& initial, double s_end,
                                    const IntegratorConfig& cfg, std::vector<EventSpec> events = {}) {
    const AnsatzParams p = validate(AnsatzParams::make(0.0, m, 0, k));
    const std::array<Integrand, 2> quads{
        Integrand{"int_x2_sq",
                  [](double, std::span<const double> y) { return y[layout::kX2] * y[layout::kX2]; },
                  0.0},
        Integrand{"int_x2", [](double, std::span<const double> y) { return y[layout::kX2]; }, 0.0}};
    const std::vector<double> y0 = to_vector(initial);
    Trajectory traj = integrate(
        [m, k](double s, std::span<const double> y, std::span<double> dy) {
            rhs_special(m, k, s, y, dy);
        },
        y0, Span{initial.s, s_end}, cfg, events, quads);
    traj.retag(p, Formulation::Special);
    return traj;
}

// ---------------------------------------------------------------------------
// Closed forms along an integrated trajectory

inline double y1_closed_form(double y1_start, double integral_x2_sq) {
    return y1_start * std::exp(integral_x2_sq);
}

inline double ratio_closed_form(int m, double ratio_start, double integral_x2) {
    return ratio_start * std::exp(-integral_x2 / std::sqrt(2.0 * m));
}

/// F recovered from Y2/Y1 = sqrt(2m)/F.
inline double implied_F(int m, double ratio) { return std::sqrt(2.0 * m) / ratio; }

inline std::vector<double> y1_closed_form(const Trajectory& traj) {
    if (traj.empty()) return {};
    const double y1_start = traj.front().y[layout::kY1];
    std::vector<double> out;
    out.reserve(traj.size());
    for (const auto& s : traj.samples()) out.push_back(y1_closed_form(y1_start, s.y.at(layout::kIntX2Sq)));
    return out;
}

inline std::vector<double> ratio_closed_form(const Trajectory& traj) {
    if (traj.empty()) return {};
    const int m = traj.params().m;
    const double r0 = traj.front().y[layout::kY2] / traj.front().y[layout::kY1];
    std::vector<double> out;
    out.reserve(traj.size());
    for (const auto& s : traj.samples()) out.push_back(ratio_closed_form(m, r0, s.y.at(layout::kIntX2)));
    return out;
}

/// Integrated Y2/Y1 at every sample.
inline std::vector<double> ratio_integrated(const Trajectory& traj) {
    std::vector<double> out;
    out.reserve(traj.size());
    for (const auto& s : traj.samples()) out.push_back(s.y[layout::kY2] / s.y[layout::kY1]);
    return out;
}

struct ClosedFormErrors {
    double y1 = 0.0;     ///< max relative error of the Y1 closed form
    double ratio = 0.0;  ///< max relative error of the Y2/Y1 closed form
    std::size_t samples = 0;
};

/// Closed forms versus integrated values on the samples lying at least
/// `margin` before the end of the run.
inline ClosedFormErrors closed_form_errors(const Trajectory& traj, double margin) {
    ClosedFormErrors out;
    if (traj.empty()) return out;
    const double cutoff = traj.back().x - margin;
    const std::vector<double> y1c = y1_closed_form(traj);
    const std::vector<double> rc = ratio_closed_form(traj);
    const std::vector<double> ri = ratio_integrated(traj);
    for (std::size_t i = 0; i < traj.size() && traj[i].x <= cutoff; ++i) {
        const double y1 = traj[i].y[layout::kY1];
        out.y1 = std::max(out.y1, std::abs(y1c[i] - y1) / std::abs(y1));
        out.ratio = std::max(out.ratio, std::abs(rc[i] - ri[i]) / std::abs(ri[i]));
        ++out.samples;
    }
    return out;
}

/// +1 if non-decreasing, -1 if non-increasing (each within `slack`), else 0.
inline int monotone_direction(std::span<const double> v, double slack = 0.0) {
    bool up = true, down = true;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] < v[i - 1] - slack) up = false;
        if (v[i] > v[i - 1] + slack) down = false;
    }
    if (up && !down) return 1;
    if (down && !up) return -1;
    return up ? 1 : 0;
}

// ---------------------------------------------------------------------------
// Explicit blow-up bounds

/// Upper bound on the blow-up time of Y2 when X2(s0) > 1 (and k >= 0).
inline double y2_blowup_bound(double x2_0, double s0) {
    if (!(x2_0 > 1.0)) throw Error(ErrorCode::HypothesisViolated, "needs X2(s0) > 1", "x2");
    return s0 + 1.0 / ((x2_0 - 1.0) * x2_0);
}

/// Upper bound on the singular time when X2(s0) < -1 (and k <= 0).
inline double ratio_blowup_bound(double x2_0, double s0) {
    if (!(x2_0 < -1.0)) throw Error(ErrorCode::HypothesisViolated, "needs X2(s0) < -1", "x2");
    return s0 + 1.0 / ((x2_0 + 1.0) * x2_0);
}

/// Comparison lower bound for X2 when X2(s0) > 1, valid on
/// [s0, y2_blowup_bound(x2_0, s0)).
inline double x2_comparison_bound(double x2_0, double s0, double s) {
    if (!(x2_0 > 1.0)) throw Error(ErrorCode::HypothesisViolated, "needs X2(s0) > 1", "x2");
    const double end = y2_blowup_bound(x2_0, s0);
    if (s < s0 || s >= end)
        throw Error(ErrorCode::OutOfInterval, "s outside [s0, s0 + 1/((X2(s0)-1) X2(s0)))", "s");
    return x2_0 / (1.0 - (s - s0) * (x2_0 - 1.0) * x2_0);
}

// ---------------------------------------------------------------------------
// Blow-up detection

enum class BlowupRegime {
    Y2Growth,      ///< X2(s0) > 1, Y2(s0) > 0, k in {0, 1}: Y2 blows up
    RatioGrowth,   ///< X2(s0) < -1, Y1(s0), Y2(s0) > 0, k in {-1, 0}: F vanishes
};

/// Classifies the initial data or throws HypothesisViolated naming every
/// failed inequality.
inline BlowupRegime blowup_regime(double k, const SpecialState& st) {
    std::vector<std::string> failed;
    if (st.x2 > 1.0) {
        if (!(st.y2 > 0.0)) failed.push_back("Y2(s0) > 0");
        if (k != 0.0 && k != 1.0) failed.push_back("k in {0, 1}");
        if (failed.empty()) return BlowupRegime::Y2Growth;
    } else if (st.x2 < -1.0) {
        if (!(st.y2 > 0.0)) failed.push_back("Y2(s0) > 0");
        if (!(st.y1 > 0.0)) failed.push_back("Y1(s0) > 0");
        if (k != 0.0 && k != -1.0) failed.push_back("k in {-1, 0}");
        if (failed.empty()) return BlowupRegime::RatioGrowth;
    } else {
        failed.push_back("X2(s0) > 1 or X2(s0) < -1");
    }
    std::string msg = "failed:";
    for (const auto& f : failed) msg += " [" + f + "]";
    throw Error(ErrorCode::HypothesisViolated, msg, "initial");
}

/// Integrator settings for runs into a singularity: the step floor sits a
/// few ulps above the resolution of s near O(0.1) so the run is pushed as
/// far toward s* as doubles allow.
inline IntegratorConfig blowup_integrator_config() {
    IntegratorConfig cfg;
    cfg.hmin = 1e-16;
    cfg.h0 = 1e-4;
    return cfg;
}

struct BlowupReport {
    BlowupRegime regime = BlowupRegime::Y2Growth;
    double bound = 0.0;
    std::string component;  ///< "Y2" or "-X2", the quantity whose crossings are extrapolated
    std::vector<double> crossings;
    BlowupEstimate estimate;
    double terminal = 0.0;  ///< last integrated abscissa
    bool within_bound = false;  ///< terminal <= bound and estimate <= bound
    Trajectory traj;
};

/// Integrates past the applicable bound, recording threshold crossings of the
/// diverging quantity (Y2 for Y2Growth, -X2 for RatioGrowth) at 1e4 ... 1e8.
/// The run ends at the 1e8 crossing or at step underflow, and the termination
/// is refined to BLOWUP with the extrapolated time and bracket.
inline BlowupReport detect_blowup(int m, double k, const SpecialState& initial,
                                  const IntegratorConfig& cfg = blowup_integrator_config()) {
    BlowupReport rep;
    rep.regime = blowup_regime(k, initial);
    std::size_t component;
    ScalarFn watched;
    if (rep.regime == BlowupRegime::Y2Growth) {
        rep.bound = y2_blowup_bound(initial.x2, initial.s);
        rep.component = "Y2";
        component = layout::kY2;
        watched = [](double, std::span<const double> y) { return y[layout::kY2]; };
    } else {
        rep.bound = ratio_blowup_bound(initial.x2, initial.s);
        rep.component = "-X2";
        component = layout::kX2;
        watched = [](double, std::span<const double> y) { return -y[layout::kX2]; };
    }
    const double horizon = rep.bound + std::max(1.0, rep.bound - initial.s);
    const std::string prefix = rep.component;
    rep.traj = integrate_special(m, k, initial, horizon, cfg, threshold_ladder(prefix, watched));

    rep.crossings = crossing_times(rep.traj, prefix + ">");
    rep.terminal = rep.traj.back().x;
    const Termination& raw = rep.traj.termination();
    if (raw.kind != Termination::Kind::Horizon) {
        rep.estimate = extrapolate_blowup(rep.crossings, rep.terminal);
        Termination term = raw;
        term.kind = Termination::Kind::Blowup;
        term.component = component;
        term.estimate = rep.estimate.estimate;
        term.bracket = std::make_pair(rep.estimate.last_crossing, rep.estimate.estimate);
        rep.traj.refine_termination(term);
        rep.within_bound = rep.terminal <= rep.bound && rep.estimate.estimate <= rep.bound;
    } else {
        rep.estimate.estimate = std::numeric_limits<double>::infinity();
        rep.estimate.last_crossing = rep.terminal;
        rep.within_bound = false;
    }
    return rep;
}

/// The reduced system in the rescaled time d(tau) = (1 + X2^2) ds, with s as
/// an extra state component. Solutions exist for all tau and s(tau) tends to
/// the singular time, so thresholds far beyond double resolution in s remain
/// reachable. State layout: X2, Y1, Y2, s.
inline Trajectory integrate_special_rescaled(int m, double k, const SpecialState& initial,
                                             double tau_end, const IntegratorConfig& cfg,
                                             std::vector<EventSpec> events = {}) {
    const AnsatzParams p = validate(AnsatzParams::make(0.0, m, 0, k));
    const std::vector<double> y0{initial.x2, initial.y1, initial.y2, initial.s};
    Trajectory traj = integrate(
        [m, k](double, std::span<const double> y, std::span<double> dy) {
            const DerivSpecial d = rhs_special(m, k, SpecialState{y[3], y[0], y[1], y[2]});
            const double w = 1.0 / (1.0 + y[0] * y[0]);
            dy[0] = d.dx2 * w;
            dy[1] = d.dy1 * w;
            dy[2] = d.dy2 * w;
            dy[3] = w;
        },
        y0, Span{0.0, tau_end}, cfg, std::move(events));
    traj.retag(p, Formulation::Raw);
    return traj;
}

/// Number of samples with s in [s0, bound) where X2 falls below the
/// comparison bound by more than `slack` (relative).
inline std::size_t comparison_violations(const Trajectory& traj, double slack = 1e-12) {
    if (traj.empty()) return 0;
    const double x2_0 = traj.front().y[layout::kX2];
    const double s0 = traj.front().x;
    const double end = y2_blowup_bound(x2_0, s0);
    std::size_t count = 0;
    for (const auto& smp : traj.samples()) {
        if (smp.x >= end) break;
        const double lower = x2_comparison_bound(x2_0, s0, smp.x);
        if (smp.y[layout::kX2] < lower * (1.0 - slack)) ++count;
    }
    return count;
}

}  // namespace grs
