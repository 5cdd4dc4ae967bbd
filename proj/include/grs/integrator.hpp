#pragma once

// Adaptive Dormand-Prince 5(4) integrator with Hairer's fourth-order dense
// output, PI step-size control, event localization by bisection on the dense
// interpolant, and quadrature columns integrated as extra state components.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "grs/error.hpp"
#include "grs/model.hpp"

namespace grs {

struct IntegratorConfig {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h0 = 1e-4;
    double hmin = 1e-14;
    double hmax = std::numeric_limits<double>::infinity();
    std::int64_t max_steps = 10'000'000;

    void check() const {
        if (!(rtol > 0.0)) throw Error(ErrorCode::Invalid, "rtol must be positive", "rtol");
        if (!(atol > 0.0)) throw Error(ErrorCode::Invalid, "atol must be positive", "atol");
        if (!(hmin > 0.0)) throw Error(ErrorCode::Invalid, "hmin must be positive", "hmin");
        if (!(hmin <= h0)) throw Error(ErrorCode::Invalid, "need hmin <= h0", "h0");
        if (!(h0 <= hmax)) throw Error(ErrorCode::Invalid, "need h0 <= hmax", "hmax");
        if (max_steps < 1) throw Error(ErrorCode::Invalid, "max_steps must be >= 1", "max_steps");
    }
};

using ScalarFn = std::function<double(double, std::span<const double>)>;

enum class Trigger { SignChange, Exceeds, FallsBelow };
enum class EventAction { Stop, Record };

/// Threshold or sign condition localized in time. `fn` sees the full state,
/// quadrature columns included.
struct EventSpec {
    std::string name;
    ScalarFn fn;
    Trigger trigger = Trigger::SignChange;
    double threshold = 0.0;
    EventAction action = EventAction::Stop;
};

/// Running integral of a scalar along the solution. `fn` sees only the base
/// state; the integral becomes an extra column under the same error control.
struct Integrand {
    std::string name;
    ScalarFn fn;
    double initial = 0.0;
};

struct Span {
    double begin = 0.0;
    double end = 1.0;
};

/// Absolute width of the bracket returned by event localization.
inline constexpr double kEventTolerance = 1e-12;

namespace detail {

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    // fifth minus embedded fourth order weights
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    // continuous extension
    static constexpr double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

// PI controller constants (Hairer & Wanner, DOPRI5).
inline constexpr double kSafety = 0.9;
inline constexpr double kBeta = 0.04;
inline constexpr double kExpo = 0.2 - kBeta * 0.75;
inline constexpr double kMaxShrink = 5.0;  // h_new >= h / 5
inline constexpr double kMaxGrow = 0.1;    // h_new <= h * 10

inline bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

inline bool event_status(const EventSpec& ev, double value, double start_value) {
    if (std::isnan(value)) return false;
    switch (ev.trigger) {
        case Trigger::Exceeds: return value > ev.threshold;
        case Trigger::FallsBelow: return value < ev.threshold;
        case Trigger::SignChange:
            if (start_value < 0.0) return value >= 0.0;
            if (start_value > 0.0) return value <= 0.0;
            return false;
    }
    return false;
}

}  // namespace detail

/// Integrates y' = rhs(x, y) over `span`. `rhs(x, y, dydx)` receives the base
/// state only. Each accepted step contributes one sample and one dense
/// segment. The trajectory is tagged Formulation::Raw; formulation drivers
/// retag it.
template <class Field>
Trajectory integrate(Field&& rhs, std::span<const double> y0, Span span,
                     const IntegratorConfig& cfg, std::span<const EventSpec> events = {},
                     std::span<const Integrand> quadratures = {}) {
    using D = detail::Dopri5;
    cfg.check();
    if (!(span.begin < span.end))
        throw Error(ErrorCode::Invalid, "integration span must satisfy begin < end", "span");
    for (const auto& ev : events)
        if (ev.trigger != Trigger::SignChange && !std::isfinite(ev.threshold))
            throw Error(ErrorCode::Invalid, "event threshold must be finite", ev.name);

    const std::size_t n = y0.size();
    const std::size_t dim = n + quadratures.size();

    auto field = [&](double x, std::span<const double> y, std::span<double> dy) {
        rhs(x, y.first(n), dy.first(n));
        for (std::size_t j = 0; j < quadratures.size(); ++j)
            dy[n + j] = quadratures[j].fn(x, y.first(n));
    };

    std::vector<double> y(dim);
    std::copy(y0.begin(), y0.end(), y.begin());
    for (std::size_t j = 0; j < quadratures.size(); ++j) y[n + j] = quadratures[j].initial;

    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
    std::vector<double> ytmp(dim), ynew(dim), yerr(dim);

    field(span.begin, y, k1);
    if (!detail::all_finite(k1))
        throw Error(ErrorCode::NonfiniteRhs, "vector field is not finite at the initial state");

    Trajectory traj;
    double x = span.begin;
    traj.append(Sample{x, y, std::nullopt});

    std::vector<double> g_prev(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) g_prev[e] = events[e].fn(x, y);

    double h = std::min({cfg.h0, cfg.hmax, span.end - span.begin});
    double facold = 1e-4;
    bool rejected_last = false;
    std::int64_t steps = 0;

    // Stage evaluation wrapper: a singular state inside a trial step is a rejection.
    auto stage = [&](double xs, std::span<const double> ys, std::span<double> out) -> bool {
        try {
            field(xs, ys, out);
        } catch (const Error& err) {
            if (err.code() != ErrorCode::SingularState) throw;
            return false;
        }
        return detail::all_finite(out);
    };

    while (true) {
        if (++steps > cfg.max_steps)
            throw Error(ErrorCode::MaxSteps, "maximum number of steps exceeded");

        bool last = false;
        if (x + h >= span.end) {
            h = span.end - x;
            last = true;
        }

        bool ok = true;
        for (std::size_t i = 0; i < dim; ++i) ytmp[i] = y[i] + h * D::a21 * k1[i];
        ok = ok && stage(x + D::c2 * h, ytmp, k2);
        if (ok) {
            for (std::size_t i = 0; i < dim; ++i)
                ytmp[i] = y[i] + h * (D::a31 * k1[i] + D::a32 * k2[i]);
            ok = stage(x + D::c3 * h, ytmp, k3);
        }
        if (ok) {
            for (std::size_t i = 0; i < dim; ++i)
                ytmp[i] = y[i] + h * (D::a41 * k1[i] + D::a42 * k2[i] + D::a43 * k3[i]);
            ok = stage(x + D::c4 * h, ytmp, k4);
        }
        if (ok) {
            for (std::size_t i = 0; i < dim; ++i)
                ytmp[i] = y[i] + h * (D::a51 * k1[i] + D::a52 * k2[i] + D::a53 * k3[i] +
                                      D::a54 * k4[i]);
            ok = stage(x + D::c5 * h, ytmp, k5);
        }
        if (ok) {
            for (std::size_t i = 0; i < dim; ++i)
                ytmp[i] = y[i] + h * (D::a61 * k1[i] + D::a62 * k2[i] + D::a63 * k3[i] +
                                      D::a64 * k4[i] + D::a65 * k5[i]);
            ok = stage(x + h, ytmp, k6);
        }
        if (ok) {
            for (std::size_t i = 0; i < dim; ++i)
                ynew[i] = y[i] + h * (D::a71 * k1[i] + D::a73 * k3[i] + D::a74 * k4[i] +
                                      D::a75 * k5[i] + D::a76 * k6[i]);
            ok = detail::all_finite(ynew) && stage(x + h, ynew, k7);
        }

        double err = std::numeric_limits<double>::infinity();
        if (ok) {
            err = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                yerr[i] = h * (D::e1 * k1[i] + D::e3 * k3[i] + D::e4 * k4[i] + D::e5 * k5[i] +
                               D::e6 * k6[i] + D::e7 * k7[i]);
                const double scale =
                    cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                err = std::max(err, std::abs(yerr[i]) / scale);
            }
            if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
        }

        const double fac11 = std::pow(err, detail::kExpo);
        double hnew;
        if (err <= 1.0) {
            facold = std::max(err, 1e-4);
            const double xnew = last ? span.end : x + h;

            DenseSegment seg;
            seg.x0 = x;
            seg.h = xnew - x;
            for (auto& r : seg.r) r.resize(dim);
            for (std::size_t i = 0; i < dim; ++i) {
                const double dy = ynew[i] - y[i];
                const double bspl = h * k1[i] - dy;
                seg.r[0][i] = y[i];
                seg.r[1][i] = dy;
                seg.r[2][i] = bspl;
                seg.r[3][i] = dy - h * k7[i] - bspl;
                seg.r[4][i] = h * (D::d1 * k1[i] + D::d3 * k3[i] + D::d4 * k4[i] + D::d5 * k5[i] +
                                   D::d6 * k6[i] + D::d7 * k7[i]);
            }

            // Events: localize every trigger inside [x, xnew].
            std::vector<double> g_new(events.size());
            struct Hit {
                std::size_t index;
                double time;
                double lo;
            };
            std::vector<Hit> hits;
            std::vector<double> buf(dim);
            for (std::size_t e = 0; e < events.size(); ++e) {
                const auto& ev = events[e];
                g_new[e] = ev.fn(xnew, ynew);
                if (detail::event_status(ev, g_prev[e], g_prev[e]) ||
                    !detail::event_status(ev, g_new[e], g_prev[e]))
                    continue;
                double lo = x, hi = xnew;
                while (hi - lo > kEventTolerance) {
                    const double mid = 0.5 * (lo + hi);
                    if (!(mid > lo && mid < hi)) break;
                    seg.eval(mid, buf);
                    if (detail::event_status(ev, ev.fn(mid, buf), g_prev[e]))
                        hi = mid;
                    else
                        lo = mid;
                }
                hits.push_back({e, hi, lo});
            }
            std::stable_sort(hits.begin(), hits.end(),
                             [](const Hit& a, const Hit& b) { return a.time < b.time; });

            const Hit* stop = nullptr;
            for (const auto& hit : hits) {
                if (stop && hit.time > stop->time) break;
                std::vector<double> state = hit.time == xnew ? ynew : seg.eval(hit.time);
                traj.add_event(EventRecord{events[hit.index].name, hit.time, hit.lo, state});
                if (!stop && events[hit.index].action == EventAction::Stop) stop = &hit;
            }

            traj.append_dense(seg);
            if (stop) {
                std::vector<double> state = stop->time == xnew ? ynew : seg.eval(stop->time);
                traj.append(Sample{stop->time, std::move(state), std::nullopt});
                Termination term;
                term.kind = Termination::Kind::Event;
                term.time = stop->time;
                term.event = events[stop->index].name;
                term.bracket = std::make_pair(stop->lo, stop->time);
                traj.set_termination(std::move(term));
                return traj;
            }

            traj.append(Sample{xnew, ynew, std::nullopt});
            x = xnew;
            y.swap(ynew);
            k1.swap(k7);
            g_prev.swap(g_new);

            if (last) {
                Termination term;
                term.kind = Termination::Kind::Horizon;
                term.time = x;
                traj.set_termination(std::move(term));
                return traj;
            }

            double fac = fac11 / std::pow(facold, detail::kBeta);
            fac = std::clamp(fac / detail::kSafety, detail::kMaxGrow, detail::kMaxShrink);
            hnew = h / fac;
            if (rejected_last) hnew = std::min(hnew, h);
            rejected_last = false;
        } else {
            hnew = h / std::min(detail::kMaxShrink, fac11 / detail::kSafety);
            rejected_last = true;
        }

        hnew = std::min(hnew, cfg.hmax);
        if (hnew < cfg.hmin || !(x + hnew > x)) {
            Termination term;
            term.kind = Termination::Kind::StepUnderflow;
            term.time = x;
            traj.set_termination(std::move(term));
            return traj;
        }
        h = hnew;
    }
}

/// Running integral of `integrand` over `span`, carried as a zero-base-state
/// quadrature column under the integrator's own step control.
inline Trajectory quadrature(ScalarFn integrand, Span span, const IntegratorConfig& cfg = {}) {
    const Integrand q{"integral", std::move(integrand), 0.0};
    return integrate([](double, std::span<const double>, std::span<double>) {},
                     std::span<const double>{}, span, cfg, {}, std::span<const Integrand>(&q, 1));
}

// ---------------------------------------------------------------------------
// Finite-time blow-up estimation

/// Thresholds whose crossing times feed the blow-up extrapolation.
inline constexpr std::array<double, 5> kBlowupThresholds{1e4, 1e5, 1e6, 1e7, 1e8};

/// One RECORD event per threshold on `fn`, the top one STOP. Names are
/// "<prefix>>1e+04" and so on.
inline std::vector<EventSpec> threshold_ladder(const std::string& prefix, ScalarFn fn,
                                               std::span<const double> thresholds =
                                                   kBlowupThresholds) {
    std::vector<EventSpec> out;
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        char label[32];
        std::snprintf(label, sizeof label, ">%.0e", thresholds[i]);
        out.push_back(EventSpec{prefix + label, fn, Trigger::Exceeds, thresholds[i],
                                i + 1 == thresholds.size() ? EventAction::Stop
                                                           : EventAction::Record});
    }
    return out;
}

struct BlowupEstimate {
    double estimate = 0.0;       ///< extrapolated singular time
    double last_crossing = 0.0;  ///< lower end of the reported bracket
    std::size_t crossings = 0;
    bool extrapolated = false;
};

/// Extrapolates a blow-up time from threshold crossing times listed in
/// increasing threshold order. For a power-law singularity the crossing-time
/// differences shrink geometrically, so Aitken's delta-squared on the last
/// three crossings sums the tail. The estimate never precedes `terminal`,
/// since the solution exists up to there.
inline BlowupEstimate extrapolate_blowup(std::span<const double> crossings, double terminal) {
    BlowupEstimate out;
    out.crossings = crossings.size();
    out.last_crossing = crossings.empty() ? terminal : crossings.back();
    out.estimate = std::max(out.last_crossing, terminal);
    if (crossings.size() >= 3) {
        const double ta = crossings[crossings.size() - 3];
        const double tb = crossings[crossings.size() - 2];
        const double tc = crossings[crossings.size() - 1];
        const double d1 = tb - ta, d2 = tc - tb;
        if (d1 > 0.0 && d2 > 0.0 && d2 < d1) {
            out.estimate = std::max(tc + d2 * d2 / (d1 - d2), terminal);
            out.extrapolated = true;
        }
    }
    return out;
}

/// Crossing times of the events named `prefix...` in the order they were hit.
inline std::vector<double> crossing_times(const Trajectory& traj, const std::string& prefix) {
    std::vector<double> out;
    for (const auto& ev : traj.events())
        if (ev.name.rfind(prefix, 0) == 0) out.push_back(ev.time);
    return out;
}

}  // namespace grs
