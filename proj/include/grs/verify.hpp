#pragma once

// Self-check suite behind `grslab verify`: oracle residuals, first integrals,
// closed forms, blow-up bounds, and coordinate roundtrips.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "grs/integrator.hpp"
#include "grs/model.hpp"
#include "grs/ode_s.hpp"
#include "grs/ode_t.hpp"
#include "grs/oracles.hpp"
#include "grs/special.hpp"

namespace grs {

struct Check {
    std::string name;
    double error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Blow-up time of x' = x^3 - x from x(0) = x0 > 1: int_{x0}^inf dx/(x^3 - x).
inline double separable_blowup_time(double x0) {
    return 0.5 * std::log(x0 * x0 / (x0 * x0 - 1.0));
}

namespace detail {

template <class Oracle>
double max_residual(const Oracle& oracle, double t0, double t1, int n = 1000) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = t0 + (t1 - t0) * i / (n - 1);
        worst = std::max(worst, residual_t(oracle.params(), oracle(t)).max_abs());
    }
    return worst;
}

inline double state_distance(std::span<const double> a, std::span<const double> b, std::size_t n) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

/// sup over samples of |integrated - oracle| on the six base components.
template <class Oracle>
double oracle_tracking(const Oracle& oracle, double t0, double t1, const IntegratorConfig& cfg) {
    const Trajectory traj = integrate_t(oracle.params(), oracle(t0).state(), t1, cfg);
    double worst = 0.0;
    for (const auto& s : traj.samples())
        worst = std::max(worst, state_distance(s.y, to_vector(oracle(s.x).state()), layout::kTBase));
    return worst;
}

inline double roundtrip_error(const Trajectory& traj) {
    const Trajectory back = to_t(to_s(traj));
    double worst = back.size() == traj.size() ? 0.0 : INFINITY;
    for (std::size_t i = 0; i < traj.size() && i < back.size(); ++i) {
        worst = std::max(worst, std::abs(back[i].x - traj[i].x));
        worst = std::max(worst, state_distance(back[i].y, traj[i].y, layout::kTBase));
    }
    return worst;
}

/// Integrate in t and transform, versus transform the start and integrate in s.
inline double commutation_error(const Trajectory& traj_t, const IntegratorConfig& cfg) {
    const Trajectory via_t = to_s(traj_t);
    const Sample& first = via_t.front();
    const Trajectory via_s = integrate_s(traj_t.params(), state_s(first.x, first.y),
                                         via_t.back().x, cfg, {}, first.y[layout::kArcT]);
    double worst = 0.0;
    for (const auto& smp : via_t.samples()) {
        const std::vector<double> y = via_s.eval(std::min(smp.x, via_s.back().x));
        worst = std::max(worst, state_distance(smp.y, y, layout::kSBase + 1));
    }
    return worst;
}

}  // namespace detail

inline std::vector<Check> run_checks(std::optional<double> tolerance_override = std::nullopt) {
    std::vector<Check> out;
    auto add = [&](std::string name, double error, double tol) {
        const double t = tolerance_override.value_or(tol);
        out.push_back(Check{std::move(name), error, t, std::isfinite(error) && error <= t});
    };
    auto guarded = [&](const std::string& name, double tol, const std::function<double()>& fn) {
        try {
            add(name, fn(), tol);
        } catch (const std::exception&) {
            add(name, INFINITY, tol);
        }
    };
    const IntegratorConfig cfg;

    const ConstantSolution constant(2.0, 3.0, 0.0, 5.0);
    const NewFamilySolution family(1.0, 1.0, 1.0);
    const CylinderSolution cylinder(1, 0.5, 2.0);
    const CylinderSolution cylinder2(2, 1.0, 3.0);

    guarded("residual.constant", 1e-10, [&] { return detail::max_residual(constant, 0.0, 10.0); });
    guarded("residual.new_family", 1e-10, [&] { return detail::max_residual(family, 0.0, 0.9); });
    guarded("residual.cylinder", 1e-10, [&] { return detail::max_residual(cylinder, 0.0, 10.0); });
    guarded("residual.cylinder_m2", 1e-10,
            [&] { return detail::max_residual(cylinder2, 0.0, 10.0); });

    guarded("monitors.new_family_first_integrals", 1e-12, [&] {
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const Diagnostics d = monitors(family.params(), family(0.9 * i / 999.0).state());
            worst = std::max({worst, std::abs(d.C), std::abs(d.C1)});
        }
        return worst;
    });

    guarded("tracking.constant", 1e-8,
            [&] { return detail::oracle_tracking(constant, 0.0, 10.0, cfg); });
    guarded("tracking.new_family", 1e-8,
            [&] { return detail::oracle_tracking(family, 0.0, 0.5, cfg); });
    guarded("tracking.cylinder", 1e-8,
            [&] { return detail::oracle_tracking(cylinder, 0.0, 5.0, cfg); });

    const AnsatzParams steady = AnsatzParams::make(0.0, 1, 1, 2.0);
    const ShootingConfig shoot_cfg;
    std::optional<Trajectory> run;
    try {
        run = shoot(steady, shoot_cfg, cfg);
    } catch (const std::exception&) {
    }
    guarded("first_integral.C", 1e-6, [&] { return drift(run.value(), &Diagnostics::C).relative(); });
    guarded("first_integral.C1", 1e-6,
            [&] { return drift(run.value(), &Diagnostics::C1).relative(); });

    guarded("step_off.order", 0.5, [&] {
        double worst = 0.0;
        double prev = 0.0;
        for (double eps : {1e-2, 5e-3, 2.5e-3, 1.25e-3}) {
            ShootingConfig s = shoot_cfg;
            s.eps = eps;
            const double r = step_off_residual(steady, s).max_abs();
            if (prev > 0.0) worst = std::max(worst, std::abs(prev / r - 4.0));
            prev = r;
        }
        return worst;
    });

    guarded("s_field.subtraction_identity", 1e-12, [&] {
        const AnsatzParams p = AnsatzParams::make(0.3, 2, 1, 1.5);
        const StateS st{0.0, 1.3, 0.4, 2.1, -0.7, 0.0, 0.25};
        const DerivS d = rhs_s(p, st);
        const double dda = d.ddalpha + 0.1, ddb = d.ddbeta - 0.2, ddphi = d.ddphi + 0.05;
        const Residual3 r = residual_s(p, st.alpha, st.dalpha, dda, st.beta, st.dbeta, ddb, st.dphi, ddphi);
        return std::abs((r.a - r.b) - residual_phi(p, st.alpha, st.beta, st.dbeta, ddb, ddphi));
    });

    guarded("transform.roundtrip_cylinder", 1e-8, [&] {
        return detail::roundtrip_error(integrate_t(cylinder.params(), cylinder(0.0).state(), 5.0, cfg));
    });
    guarded("transform.roundtrip_new_family", 1e-8, [&] {
        return detail::roundtrip_error(integrate_t(family.params(), family(0.0).state(), 0.5, cfg));
    });
    guarded("transform.commutation_cylinder", 1e-7, [&] {
        return detail::commutation_error(
            integrate_t(cylinder.params(), cylinder(0.0).state(), 5.0, cfg), cfg);
    });
    guarded("transform.commutation_new_family", 1e-7, [&] {
        return detail::commutation_error(
            integrate_t(family.params(), family(0.0).state(), 0.5, cfg), cfg);
    });

    std::optional<BlowupReport> grow, shrink;
    try {
        grow = detect_blowup(1, 0.0, SpecialState{0.0, 2.0, 1.0, 1.0});
        shrink = detect_blowup(1, 0.0, SpecialState{0.0, -2.0, 1.0, 1.0});
    } catch (const std::exception&) {
    }
    guarded("blowup.y2_time_vs_quadrature", 1e-3, [&] {
        return std::abs(grow.value().estimate.estimate - separable_blowup_time(2.0));
    });
    guarded("blowup.y2_within_bound", 0.0,
            [&] { return grow.value().within_bound ? 0.0 : 1.0; });
    guarded("blowup.ratio_within_bound", 0.0,
            [&] { return shrink.value().within_bound ? 0.0 : 1.0; });
    guarded("blowup.comparison_violations", 0.0, [&] {
        return static_cast<double>(comparison_violations(grow.value().traj));
    });
    guarded("closed_form.y1", 1e-6, [&] {
        return std::max(closed_form_errors(grow.value().traj, 0.01).y1,
                        closed_form_errors(shrink.value().traj, 0.01).y1);
    });
    guarded("closed_form.ratio", 1e-6, [&] {
        return std::max(closed_form_errors(grow.value().traj, 0.01).ratio,
                        closed_form_errors(shrink.value().traj, 0.01).ratio);
    });
    return out;
}

}  // namespace grs
