#pragma once

// Soliton system of the ansatz in geodesic arclength t:
//
//   lambda = -H''/H - 2m F''/F + f''                                          (a)
//   lambda = 2m q^2 H^2/F^4 - H''/H - 2m H'F'/(HF) + f' H'/H                  (b)
//   lambda = k/F^2 - 2 q^2 H^2/F^4 - F''/F - (2m-1)(F'/F)^2 - H'F'/(FH) + f'F'/F  (c)
//
// (b) and (c) are solved for H'' and F''; (a) then gives f''.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "grs/error.hpp"
#include "grs/integrator.hpp"
#include "grs/model.hpp"

namespace grs {

struct DerivT {
    double dH = 0.0, ddH = 0.0, dF = 0.0, ddF = 0.0, df = 0.0, ddf = 0.0;
};

inline DerivT rhs_t(const AnsatzParams& p, const StateT& st) {
    if (st.H == 0.0) throw Error(ErrorCode::SingularState, "H vanishes", "H");
    if (st.F == 0.0) throw Error(ErrorCode::SingularState, "F vanishes", "F");
    const double m2 = 2.0 * p.m;
    const double q2 = static_cast<double>(p.q * p.q);
    const double uH = st.dH / st.H;  // H'/H
    const double uF = st.dF / st.F;  // F'/F
    const double twist = q2 * st.H * st.H / (st.F * st.F * st.F * st.F);

    const double ddH_over_H = m2 * twist - m2 * uH * uF + st.df * uH - p.lambda;
    const double ddF_over_F = p.k / (st.F * st.F) - 2.0 * twist - (m2 - 1.0) * uF * uF -
                              uH * uF + st.df * uF - p.lambda;
    DerivT d;
    d.dH = st.dH;
    d.ddH = st.H * ddH_over_H;
    d.dF = st.dF;
    d.ddF = st.F * ddF_over_F;
    d.df = st.df;
    d.ddf = p.lambda + ddH_over_H + m2 * ddF_over_F;
    return d;
}

/// Vector-field form over the layout::kTBase base components.
inline void rhs_t(const AnsatzParams& p, double t, std::span<const double> y, std::span<double> dy) {
    const DerivT d = rhs_t(p, state_t(t, y));
    dy[layout::kH] = d.dH;
    dy[layout::kDH] = d.ddH;
    dy[layout::kF] = d.dF;
    dy[layout::kDF] = d.ddF;
    dy[layout::kf] = d.df;
    dy[layout::kDf] = d.ddf;
}

struct Residual3 {
    double a = 0.0, b = 0.0, c = 0.0;
    double max_abs() const { return std::max({std::abs(a), std::abs(b), std::abs(c)}); }
};

/// Equations (a)-(c) above moved to one side; zero iff the jet solves the system.
inline Residual3 residual_t(const AnsatzParams& p, double H, double dH, double ddH, double F,
                            double dF, double ddF, double df, double ddf) {
    if (H == 0.0) throw Error(ErrorCode::SingularState, "H vanishes", "H");
    if (F == 0.0) throw Error(ErrorCode::SingularState, "F vanishes", "F");
    const double m2 = 2.0 * p.m;
    const double q2 = static_cast<double>(p.q * p.q);
    const double twist = q2 * H * H / (F * F * F * F);
    Residual3 r;
    r.a = -ddH / H - m2 * ddF / F + ddf - p.lambda;
    r.b = m2 * twist - ddH / H - m2 * dH * dF / (H * F) + df * dH / H - p.lambda;
    r.c = p.k / (F * F) - 2.0 * twist - ddF / F - (m2 - 1.0) * (dF / F) * (dF / F) -
          dH * dF / (F * H) + df * dF / F - p.lambda;
    return r;
}

/// Curvature scalars and first integrals; f'' comes from the field, so this is
/// a pure function of the state.
inline Diagnostics monitors(const AnsatzParams& p, const StateT& st) {
    const DerivT d = rhs_t(p, st);
    const double uH = st.dH / st.H;
    const double uF = st.dF / st.F;
    Diagnostics out;
    out.trL = uH + 2.0 * p.m * uF;
    out.trL2 = uH * uH + 2.0 * p.m * uF * uF;
    out.S = p.lambda * p.dim_total - d.ddf - st.df * out.trL;
    out.C = d.ddf + out.trL * st.df - st.df * st.df + 2.0 * p.lambda * st.f;
    out.C1 = out.S + st.df * st.df - 2.0 * p.lambda * st.f;
    return out;
}

// ---------------------------------------------------------------------------
// Singular-orbit step-off

struct ShootingConfig {
    double eps = 1e-3;  ///< offset from the collapsed orbit t = 0
    double h1 = 1.0;    ///< H'(0)
    double F0 = 1.0;    ///< F(0)
    double f2 = 0.0;    ///< f''(0) / 2
    double f0 = 0.0;    ///< f(0)
    double horizon = 50.0;
};

/// Taylor data of the parity expansion
///   H = h1 t + h3 t^3,  F = F0 + F2 t^2,  f = f0 + f2 t^2.
struct StepOffCoefficients {
    double F2 = 0.0;
    double h3 = 0.0;
};

inline void check_shooting(const ShootingConfig& shoot) {
    if (!(shoot.F0 > 0.0)) throw Error(ErrorCode::Invalid, "F0 must be positive", "F0");
    if (!(shoot.h1 > 0.0)) throw Error(ErrorCode::Invalid, "h1 must be positive", "h1");
    if (!(shoot.eps > 0.0)) throw Error(ErrorCode::Invalid, "eps must be positive", "eps");
    if (!(shoot.horizon > shoot.eps))
        throw Error(ErrorCode::Invalid, "horizon must exceed eps", "horizon");
}

inline StepOffCoefficients step_off_coefficients(const AnsatzParams& p, const ShootingConfig& shoot) {
    check_shooting(shoot);
    StepOffCoefficients c;
    // t -> 0 limit of (c): 2 F2/F0 = k/F0^2 - 2 F2/F0 - lambda
    c.F2 = (p.k - p.lambda * shoot.F0 * shoot.F0) / (4.0 * shoot.F0);
    // t -> 0 limit of (a); (b) gives the same relation
    c.h3 = shoot.h1 * (-p.lambda - 4.0 * p.m * c.F2 / shoot.F0 + 2.0 * shoot.f2) / 6.0;
    return c;
}

/// The f''(0)/2 that removes the cubic term of H.
inline double f2_for_vanishing_cubic(const AnsatzParams& p, double F0) {
    const double F2 = (p.k - p.lambda * F0 * F0) / (4.0 * F0);
    return 0.5 * p.lambda + 2.0 * p.m * F2 / F0;
}

inline StateT step_off(const AnsatzParams& p, const ShootingConfig& shoot) {
    const StepOffCoefficients c = step_off_coefficients(p, shoot);
    const double t = shoot.eps;
    StateT st;
    st.t = t;
    st.H = shoot.h1 * t + c.h3 * t * t * t;
    st.dH = shoot.h1 + 3.0 * c.h3 * t * t;
    st.F = shoot.F0 + c.F2 * t * t;
    st.dF = 2.0 * c.F2 * t;
    st.f = shoot.f0 + shoot.f2 * t * t;
    st.df = 2.0 * shoot.f2 * t;
    return st;
}

/// residual_t of the truncated expansion at t = eps; O(eps^2).
inline Residual3 step_off_residual(const AnsatzParams& p, const ShootingConfig& shoot) {
    const StepOffCoefficients c = step_off_coefficients(p, shoot);
    const StateT st = step_off(p, shoot);
    return residual_t(p, st.H, st.dH, 6.0 * c.h3 * st.t, st.F, st.dF, 2.0 * c.F2, st.df,
                      2.0 * shoot.f2);
}

/// H-arclength s = int_0^t H accumulated by the expansion up to t = eps.
inline double step_off_arclength(const AnsatzParams& p, const ShootingConfig& shoot) {
    const StepOffCoefficients c = step_off_coefficients(p, shoot);
    const double t = shoot.eps;
    return 0.5 * shoot.h1 * t * t + 0.25 * c.h3 * t * t * t * t;
}

// ---------------------------------------------------------------------------
// Integration in t

inline void attach_diagnostics(Trajectory& traj) {
    const AnsatzParams& p = traj.params();
    for (auto& s : traj.mutable_samples()) {
        const StateT st = state_t(s.x, s.y);
        if (st.H == 0.0 || st.F == 0.0) continue;
        s.diag = monitors(p, st);
    }
}

/// Integrates the t-system from `initial` up to `t_end`. The state carries the
/// H-arclength as its quadrature column, starting from `s_initial`. Crossing
/// H = 0 or F = 0 stops the run with a VANISHING termination.
inline Trajectory integrate_t(const AnsatzParams& params, const StateT& initial, double t_end,
                              const IntegratorConfig& cfg, std::vector<EventSpec> events = {},
                              double s_initial = 0.0) {
    const AnsatzParams p = validate(params);
    if (initial.H == 0.0) throw Error(ErrorCode::SingularState, "H vanishes", "H");
    if (initial.F == 0.0) throw Error(ErrorCode::SingularState, "F vanishes", "F");
    events.push_back(EventSpec{"H_vanishes",
                               [](double, std::span<const double> y) { return y[layout::kH]; },
                               Trigger::FallsBelow, 0.0, EventAction::Stop});
    events.push_back(EventSpec{"F_vanishes",
                               [](double, std::span<const double> y) { return y[layout::kF]; },
                               Trigger::FallsBelow, 0.0, EventAction::Stop});
    const Integrand arclength{"s", [](double, std::span<const double> y) { return y[layout::kH]; },
                              s_initial};
    const std::vector<double> y0 = to_vector(initial);
    Trajectory traj = integrate(
        [&p](double t, std::span<const double> y, std::span<double> dy) { rhs_t(p, t, y, dy); },
        y0, Span{initial.t, t_end}, cfg, events, std::span<const Integrand>(&arclength, 1));
    traj.retag(p, Formulation::T);

    const Termination& term = traj.termination();
    if (term.kind == Termination::Kind::Event &&
        (term.event == "H_vanishes" || term.event == "F_vanishes")) {
        Termination refined = term;
        refined.kind = Termination::Kind::Vanishing;
        refined.component = term.event == "H_vanishes" ? layout::kH : layout::kF;
        traj.refine_termination(refined);
    }
    attach_diagnostics(traj);
    return traj;
}

/// Step-off from the collapsed orbit followed by integration up to the horizon.
inline Trajectory shoot(const AnsatzParams& params, const ShootingConfig& shoot_cfg,
                        const IntegratorConfig& cfg, std::vector<EventSpec> events = {}) {
    const StateT st = step_off(params, shoot_cfg);
    return integrate_t(params, st, shoot_cfg.horizon, cfg, std::move(events),
                       step_off_arclength(params, shoot_cfg));
}

// ---------------------------------------------------------------------------
// Trajectory-level checks

/// Strict sign changes of `values`; a sign only registers once |v| > band.
inline int sign_changes(std::span<const double> values, double band) {
    int committed = 0, count = 0;
    for (double v : values) {
        int sgn = 0;
        if (v > band)
            sgn = 1;
        else if (v < -band)
            sgn = -1;
        if (sgn == 0) continue;
        if (committed != 0 && sgn != committed) ++count;
        committed = sgn;
    }
    return count;
}

struct DriftStats {
    double initial = 0.0;
    double max_drift = 0.0;
    /// max drift / (1 + |initial|)
    double relative() const { return max_drift / (1.0 + std::abs(initial)); }
};

inline DriftStats drift(const Trajectory& traj, double Diagnostics::*member) {
    DriftStats out;
    bool first = true;
    for (const auto& s : traj.samples()) {
        if (!s.diag) continue;
        const double v = (*s.diag).*member;
        if (first) {
            out.initial = v;
            first = false;
        }
        out.max_drift = std::max(out.max_drift, std::abs(v - out.initial));
    }
    if (first) throw Error(ErrorCode::EmptyTrajectory, "no diagnosed samples");
    return out;
}

struct QualitativeOptions {
    double hysteresis = 1e-11;  ///< sign-change band, 10 atol at the default tolerance
    double t_min = -std::numeric_limits<double>::infinity();  ///< trL bound applies for t > t_min
    double trl_slack = 1e-11;
    double s_slack = 1e-8;

    static QualitativeOptions for_config(const IntegratorConfig& cfg) {
        QualitativeOptions o;
        o.hysteresis = 10.0 * cfg.atol;
        o.trl_slack = o.hysteresis;
        return o;
    }
};

struct QualitativeReport {
    int dH_sign_changes = 0;
    int dF_sign_changes = 0;  ///< extremum count of F
    int ddf_sign_changes = 0;
    bool trL_bounded = true;  ///< 0 < trL <= n/t + slack for every sample past t_min
    bool S_nonincreasing = true;
    double F_min = 0.0;
    double F_end = 0.0;
    double F_growth = 0.0;  ///< F(end) / min F
    double S_start = 0.0;
    double S_end = 0.0;
    double max_abs_S = 0.0;
    bool trivial = false;  ///< Hess f vanishes along the run
    std::size_t samples = 0;
};

inline QualitativeReport qualitative_report(const Trajectory& traj, const QualitativeOptions& opt = {}) {
    if (traj.empty()) throw Error(ErrorCode::EmptyTrajectory, "trajectory has no samples");
    if (traj.formulation() != Formulation::T)
        throw Error(ErrorCode::Invalid, "qualitative report needs a T trajectory");
    const AnsatzParams& p = traj.params();
    const double t_min = std::isfinite(opt.t_min) ? opt.t_min : traj.front().x;

    std::vector<double> dH, dF, ddf;
    QualitativeReport rep;
    rep.F_min = std::numeric_limits<double>::infinity();
    double hess_max = 0.0;
    bool have_S = false;
    double S_prev = 0.0;
    for (const auto& s : traj.samples()) {
        const StateT st = state_t(s.x, s.y);
        dH.push_back(st.dH);
        dF.push_back(st.dF);
        rep.F_min = std::min(rep.F_min, st.F);
        if (!s.diag) continue;
        const Diagnostics& dg = *s.diag;
        const DerivT d = rhs_t(p, st);
        ddf.push_back(d.ddf);
        hess_max = std::max({hess_max, std::abs(d.ddf), std::abs(st.df * st.dH / st.H),
                             std::abs(st.df * st.dF / st.F)});
        if (s.x > t_min && !(dg.trL > 0.0 && dg.trL <= p.dim_total / s.x + opt.trl_slack))
            rep.trL_bounded = false;
        if (!have_S) {
            rep.S_start = dg.S;
            have_S = true;
        } else if (dg.S > S_prev + opt.s_slack) {
            rep.S_nonincreasing = false;
        }
        S_prev = dg.S;
        rep.S_end = dg.S;
        rep.max_abs_S = std::max(rep.max_abs_S, std::abs(dg.S));
    }
    rep.dH_sign_changes = sign_changes(dH, opt.hysteresis);
    rep.dF_sign_changes = sign_changes(dF, opt.hysteresis);
    rep.ddf_sign_changes = sign_changes(ddf, opt.hysteresis);
    rep.F_end = state_t(traj.back().x, traj.back().y).F;
    rep.F_growth = rep.F_end / rep.F_min;
    rep.trivial = hess_max <= opt.hysteresis;
    rep.samples = traj.size();
    return rep;
}

/// Diagnostics at the first sample with x >= t (no interpolation).
inline const Sample& sample_at_or_after(const Trajectory& traj, double t) {
    for (const auto& s : traj.samples())
        if (s.x >= t) return s;
    return traj.back();
}

}  // namespace grs
