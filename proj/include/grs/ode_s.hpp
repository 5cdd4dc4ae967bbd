#pragma once

// The system after the change of variables
//
//   ds = H dt,   alpha(s) = H^2(t),   beta(s) = F^2(t),   phi(s) = f(t),   s(0) = 0,
//
// with dots for d/ds. The three soliton equations become
//
//   lambda = -a''/2 - m a b''/b + m a b'^2/(2b^2) - m b'a'/(2b) + a phi'' + phi'a'/2   (A)
//   lambda = 2m q^2 a/b^2 - a''/2 - m a'b'/(2b) + phi'a'/2                             (B)
//   lambda = k/b - 2 a q^2/b^2 - a b''/(2b) + a b'^2/(4b^2) - b'a'/(2b)
//            - (2m-1) b'^2 a/(4b^2) + phi' a b'/(2b)                                   (C)
//
// (a = alpha, b = beta). (A) - (B) eliminates lambda and leaves
//
//   phi'' = m b''/b - m b'^2/(2b^2) + 2m q^2/b^2.                                      (D)
//
// (B) and (C) are solved for alpha'' and beta''; (D) then gives phi''.
//
// Multiplying (B) and (C) by a' and b' and adding gives an energy-like
// identity for (a'^2 + b'^2)/2; it does not close and is not used here.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "grs/error.hpp"
#include "grs/integrator.hpp"
#include "grs/model.hpp"
#include "grs/ode_t.hpp"

namespace grs {

struct DerivS {
    double dalpha = 0.0, ddalpha = 0.0, dbeta = 0.0, ddbeta = 0.0, dphi = 0.0, ddphi = 0.0;
};

/// Right-hand side of (D) given beta'' (no dependence on lambda).
inline double phi_second_derivative(const AnsatzParams& p, double beta, double dbeta, double ddbeta) {
    const double q2 = static_cast<double>(p.q * p.q);
    return p.m * (ddbeta / beta - dbeta * dbeta / (2.0 * beta * beta) + 2.0 * q2 / (beta * beta));
}

inline DerivS rhs_s(const AnsatzParams& p, const StateS& st) {
    if (st.alpha == 0.0) throw Error(ErrorCode::SingularState, "alpha vanishes", "alpha");
    if (st.beta == 0.0) throw Error(ErrorCode::SingularState, "beta vanishes", "beta");
    const double m = p.m;
    const double q2 = static_cast<double>(p.q * p.q);
    const double a = st.alpha, da = st.dalpha, b = st.beta, db = st.dbeta, dphi = st.dphi;
    DerivS d;
    d.dalpha = da;
    d.dbeta = db;
    d.dphi = dphi;
    // (B) times 2, solved for a'':  2m q^2 a/b^2 -> 4m q^2 a/b^2,  -m a'b'/(2b) -> -m a'b'/b,
    // phi'a'/2 -> phi'a',  lambda -> -2 lambda.
    d.ddalpha = 4.0 * m * q2 * a / (b * b) - m * da * db / b + dphi * da - 2.0 * p.lambda;
    // (C) times 2b/a, solved for b'':  k/b -> 2k/a,  -2 a q^2/b^2 -> -4 q^2/b,
    // a b'^2/(4b^2) - (2m-1) b'^2 a/(4b^2) -> (1-m) b'^2/b,  -b'a'/(2b) -> -b'a'/a,
    // phi' a b'/(2b) -> phi' b',  lambda -> -2 lambda b/a.
    d.ddbeta = 2.0 * p.k / a - 4.0 * q2 / b + (1.0 - m) * db * db / b - db * da / a + dphi * db -
               2.0 * p.lambda * b / a;
    d.ddphi = phi_second_derivative(p, b, db, d.ddbeta);
    return d;
}

/// The steady (lambda = 0) field written out directly. Agrees with rhs_s at
/// lambda = 0 term by term.
inline DerivS rhs_s_steady(const AnsatzParams& p, const StateS& st) {
    if (st.alpha == 0.0) throw Error(ErrorCode::SingularState, "alpha vanishes", "alpha");
    if (st.beta == 0.0) throw Error(ErrorCode::SingularState, "beta vanishes", "beta");
    const double m = p.m;
    const double q2 = static_cast<double>(p.q * p.q);
    const double a = st.alpha, da = st.dalpha, b = st.beta, db = st.dbeta, dphi = st.dphi;
    DerivS d;
    d.dalpha = da;
    d.dbeta = db;
    d.dphi = dphi;
    d.ddalpha = a * q2 * 4.0 * m / (b * b) - m * da * db / b + dphi * da;
    d.ddbeta = 2.0 * p.k / a - 4.0 * q2 / b - db * da / a + dphi * db + db * db * (1.0 - m) / b;
    d.ddphi = m * (d.ddbeta / b - db * db / (2.0 * b * b) + q2 * 2.0 / (b * b));
    return d;
}

inline void rhs_s(const AnsatzParams& p, double s, std::span<const double> y, std::span<double> dy) {
    const DerivS d = rhs_s(p, state_s(s, y));
    dy[layout::kAlpha] = d.dalpha;
    dy[layout::kDAlpha] = d.ddalpha;
    dy[layout::kBeta] = d.dbeta;
    dy[layout::kDBeta] = d.ddbeta;
    dy[layout::kPhi] = d.dphi;
    dy[layout::kDPhi] = d.ddphi;
}

/// (A), (B), (C) moved to one side.
inline Residual3 residual_s(const AnsatzParams& p, double a, double da, double dda, double b,
                            double db, double ddb, double dphi, double ddphi) {
    if (b == 0.0) throw Error(ErrorCode::SingularState, "beta vanishes", "beta");
    const double m = p.m;
    const double q2 = static_cast<double>(p.q * p.q);
    Residual3 r;
    r.a = -dda / 2.0 - m * a * ddb / b + m * a * db * db / (2.0 * b * b) - m * db * da / (2.0 * b) +
          a * ddphi + dphi * da / 2.0 - p.lambda;
    r.b = a * q2 * 2.0 * m / (b * b) - dda / 2.0 - m * da * db / (2.0 * b) + dphi * da / 2.0 -
          p.lambda;
    r.c = p.k / b - 2.0 * a * q2 / (b * b) - a * ddb / (2.0 * b) + a * db * db / (4.0 * b * b) -
          db * da / (2.0 * b) - (2.0 * m - 1.0) * db * db * a / (4.0 * b * b) +
          dphi * a * db / (2.0 * b) - p.lambda;
    return r;
}

/// alpha times the residual of (D), so that residual_s(...).a - residual_s(...).b
/// equals it identically.
inline double residual_phi(const AnsatzParams& p, double a, double b, double db, double ddb,
                           double ddphi) {
    return a * (ddphi - phi_second_derivative(p, b, db, ddb));
}

// ---------------------------------------------------------------------------
// Coordinate transforms

/// T trajectory -> S trajectory, sample by sample:
///   s = int H dt (carried column),  alpha' = 2H',  beta' = 2FF'/H,  phi' = f'/H.
/// The S trajectory carries t as its quadrature column. Events and dense
/// output are not transferred.
inline Trajectory to_s(const Trajectory& traj) {
    if (traj.empty()) throw Error(ErrorCode::EmptyTrajectory, "trajectory has no samples");
    if (traj.formulation() != Formulation::T)
        throw Error(ErrorCode::Invalid, "to_s expects a T trajectory");
    Trajectory out(traj.params(), Formulation::S);
    for (const auto& smp : traj.samples()) {
        if (smp.y.size() <= layout::kArcS)
            throw Error(ErrorCode::Invalid, "T trajectory lacks its arclength column");
        const StateT st = state_t(smp.x, smp.y);
        if (!(st.H > 0.0)) throw Error(ErrorCode::SingularState, "H must stay positive", "H");
        std::vector<double> y{st.H * st.H, 2.0 * st.dH,       st.F * st.F,
                              2.0 * st.F * st.dF / st.H, st.f, st.df / st.H,
                              smp.x};
        out.append(Sample{smp.y[layout::kArcS], std::move(y), std::nullopt});
    }
    if (traj.terminated()) {
        Termination term = traj.termination();
        term.time = out.back().x;
        term.estimate.reset();
        term.bracket.reset();
        out.set_termination(term);
    }
    return out;
}

/// S trajectory -> T trajectory: H = sqrt(alpha), F = sqrt(beta),
/// H' = alpha'/2, F' = beta' H/(2F), f' = phi' H, with t read from the carried
/// column t = t0 + int ds/sqrt(alpha).
inline Trajectory to_t(const Trajectory& traj) {
    if (traj.empty()) throw Error(ErrorCode::EmptyTrajectory, "trajectory has no samples");
    if (traj.formulation() != Formulation::S)
        throw Error(ErrorCode::Invalid, "to_t expects an S trajectory");
    Trajectory out(traj.params(), Formulation::T);
    for (const auto& smp : traj.samples()) {
        if (smp.y.size() <= layout::kArcT)
            throw Error(ErrorCode::Invalid, "S trajectory lacks its t column");
        const StateS st = state_s(smp.x, smp.y);
        if (!(st.alpha > 0.0))
            throw Error(ErrorCode::SingularState, "alpha must stay positive", "alpha");
        if (!(st.beta > 0.0)) throw Error(ErrorCode::SingularState, "beta must stay positive", "beta");
        const double H = std::sqrt(st.alpha);
        const double F = std::sqrt(st.beta);
        std::vector<double> y{H, 0.5 * st.dalpha, F, st.dbeta * H / (2.0 * F), st.phi, st.dphi * H,
                              smp.x};
        out.append(Sample{smp.y[layout::kArcT], std::move(y), std::nullopt});
    }
    if (traj.terminated()) {
        Termination term = traj.termination();
        term.time = out.back().x;
        term.estimate.reset();
        term.bracket.reset();
        out.set_termination(term);
    }
    attach_diagnostics(out);
    return out;
}

/// Pointwise transform of one T state (with its H-arclength).
inline StateS to_s(const StateT& st, double s) {
    if (!(st.H > 0.0)) throw Error(ErrorCode::SingularState, "H must be positive", "H");
    return {s, st.H * st.H, 2.0 * st.dH, st.F * st.F, 2.0 * st.F * st.dF / st.H, st.f, st.df / st.H};
}

/// Integrates the S-system from `initial` to `s_end`, carrying
/// t = t_initial + int ds / sqrt(alpha). alpha or beta crossing zero stops the
/// run with a VANISHING termination.
inline Trajectory integrate_s(const AnsatzParams& params, const StateS& initial, double s_end,
                              const IntegratorConfig& cfg, std::vector<EventSpec> events = {},
                              double t_initial = 0.0) {
    const AnsatzParams p = validate(params);
    if (initial.alpha == 0.0) throw Error(ErrorCode::SingularState, "alpha vanishes", "alpha");
    if (initial.beta == 0.0) throw Error(ErrorCode::SingularState, "beta vanishes", "beta");
    events.push_back(EventSpec{"alpha_vanishes",
                               [](double, std::span<const double> y) { return y[layout::kAlpha]; },
                               Trigger::FallsBelow, 0.0, EventAction::Stop});
    events.push_back(EventSpec{"beta_vanishes",
                               [](double, std::span<const double> y) { return y[layout::kBeta]; },
                               Trigger::FallsBelow, 0.0, EventAction::Stop});
    const Integrand t_column{"t",
                             [](double, std::span<const double> y) {
                                 if (!(y[layout::kAlpha] > 0.0))
                                     throw Error(ErrorCode::SingularState, "alpha must be positive");
                                 return 1.0 / std::sqrt(y[layout::kAlpha]);
                             },
                             t_initial};
    const std::vector<double> y0 = to_vector(initial);
    Trajectory traj = integrate(
        [&p](double s, std::span<const double> y, std::span<double> dy) { rhs_s(p, s, y, dy); }, y0,
        Span{initial.s, s_end}, cfg, events, std::span<const Integrand>(&t_column, 1));
    traj.retag(p, Formulation::S);
    const Termination& term = traj.termination();
    if (term.kind == Termination::Kind::Event &&
        (term.event == "alpha_vanishes" || term.event == "beta_vanishes")) {
        Termination refined = term;
        refined.kind = Termination::Kind::Vanishing;
        refined.component = term.event == "alpha_vanishes" ? layout::kAlpha : layout::kBeta;
        traj.refine_termination(refined);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Trajectory-level checks on S runs from the collapsed orbit

struct SProfileReport {
    bool alpha_increasing = true;  ///< alpha' > 0 at every sample with s > 0
    int beta_extrema = 0;          ///< sign changes of beta'
    double beta_min = 0.0;
    double beta_end = 0.0;
    double beta_growth = 0.0;  ///< beta(end) / min beta
};

inline SProfileReport s_profile_report(const Trajectory& traj, double hysteresis = 1e-11) {
    if (traj.empty()) throw Error(ErrorCode::EmptyTrajectory, "trajectory has no samples");
    if (traj.formulation() != Formulation::S)
        throw Error(ErrorCode::Invalid, "profile report needs an S trajectory");
    SProfileReport rep;
    std::vector<double> dbeta;
    rep.beta_min = std::numeric_limits<double>::infinity();
    for (const auto& smp : traj.samples()) {
        const StateS st = state_s(smp.x, smp.y);
        if (smp.x > 0.0 && !(st.dalpha > 0.0)) rep.alpha_increasing = false;
        dbeta.push_back(st.dbeta);
        rep.beta_min = std::min(rep.beta_min, st.beta);
    }
    rep.beta_extrema = sign_changes(dbeta, hysteresis);
    rep.beta_end = state_s(traj.back().x, traj.back().y).beta;
    rep.beta_growth = rep.beta_end / rep.beta_min;
    return rep;
}

// ---------------------------------------------------------------------------
// Quadratic-beta candidates (m = 1, q = 1, phi'' = 0)
//
// With phi'' = 0, (D) forces beta = c1 s^2 + c2 s + c3 with 4(c1 c3 + 1) = c2^2;
// non-compactness rules out c1 != 0, so beta = 2s + c3. Then X = alpha beta
// solves X'' = 2k + c X' with phi' = c, and alpha = X / beta.

struct QuadraticBetaPoint {
    double s = 0.0;
    StateS state;
    double ddalpha = 0.0;
    Residual3 residual;  ///< field residuals (alpha'', beta'', phi'') - rhs_s
};

struct QuadraticBetaCandidate {
    double k = 0.0, c = 0.0, c3 = 1.0, B = 0.0, D = 0.0;

    AnsatzParams params() const { return AnsatzParams::make(0.0, 1, 1, k); }

    double beta(double s) const { return 2.0 * s + c3; }

    /// X, X', X'' at s.
    std::array<double, 3> x_jet(double s) const {
        if (c != 0.0) {
            const double e = std::exp(c * s);
            return {-2.0 * k * s / c + B / c * e + D, -2.0 * k / c + B * e, c * B * e};
        }
        return {k * s * s + B * s + D, 2.0 * k * s + B, 2.0 * k};
    }

    QuadraticBetaPoint at(double s) const {
        const auto [X, dX, ddX] = x_jet(s);
        const double b = beta(s);
        QuadraticBetaPoint pt;
        pt.s = s;
        pt.state = StateS{s, X / b, dX / b - 2.0 * X / (b * b), b, 2.0, c * s, c};
        pt.ddalpha = ddX / b - 4.0 * dX / (b * b) + 8.0 * X / (b * b * b);
        const DerivS d = rhs_s(params(), pt.state);
        pt.residual.a = pt.ddalpha - d.ddalpha;
        pt.residual.b = 0.0 - d.ddbeta;
        pt.residual.c = 0.0 - d.ddphi;
        return pt;
    }
};

/// Builds the candidate and reports its field residuals on `grid`.
inline std::vector<QuadraticBetaPoint> quadratic_beta_candidate(double k, double c, double c3,
                                                                double B, double D,
                                                                std::span<const double> grid) {
    if (!(c3 > 0.0)) throw Error(ErrorCode::Invalid, "c3 must be positive", "c3");
    const QuadraticBetaCandidate cand{k, c, c3, B, D};
    std::vector<QuadraticBetaPoint> out;
    out.reserve(grid.size());
    for (double s : grid) out.push_back(cand.at(s));
    return out;
}

}  // namespace grs
