#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "grs/integrator.hpp"

using namespace grs;

namespace {

Trajectory run_exponential(const IntegratorConfig& cfg) {
    const std::vector<double> y0{1.0};
    return integrate([](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0]; },
                     y0, Span{0.0, 1.0}, cfg);
}

Trajectory run_cubic(const IntegratorConfig& cfg) {
    const std::vector<double> y0{2.0};
    const std::vector<EventSpec> events{EventSpec{
        "big", [](double, std::span<const double> y) { return y[0]; }, Trigger::Exceeds, 1e4,
        EventAction::Stop}};
    return integrate(
        [](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0] * y[0] * y[0] - y[0]; },
        y0, Span{0.0, 1.0}, cfg, events);
}

// int_2^inf dx/(x^3 - x) = (1/2) ln(4/3). The 1e4 crossing comes earlier by
// int_{1e4}^inf dx/(x^3 - x) = (1/2) ln(1e8/(1e8 - 1)) ~ 5e-9.
const double kCubicBlowup = 0.5 * std::log(4.0 / 3.0);
const double kCubicCrossing = kCubicBlowup - 0.5 * std::log(1e8 / (1e8 - 1.0));

}  // namespace

TEST(Integrate, ExponentialReachesE) {
    const Trajectory traj = run_exponential({});
    EXPECT_EQ(traj.termination().kind, Termination::Kind::Horizon);
    EXPECT_DOUBLE_EQ(traj.back().x, 1.0);
    EXPECT_NEAR(traj.back().y[0], std::exp(1.0), 1e-9);
}

TEST(Integrate, CubicStopsAtThreshold) {
    const Trajectory traj = run_cubic({});
    const Termination& t = traj.termination();
    ASSERT_EQ(t.kind, Termination::Kind::Event);
    EXPECT_EQ(t.event, "big");
    EXPECT_NEAR(t.time, kCubicCrossing, 1e-11);
    ASSERT_TRUE(t.bracket.has_value());
    EXPECT_LE(t.bracket->second - t.bracket->first, kEventTolerance);
}

TEST(Integrate, EventBracketHasOppositeStatus) {
    const Trajectory traj = run_cubic({});
    const auto [lo, hi] = *traj.termination().bracket;
    const DenseSegment& seg = traj.dense().back();
    EXPECT_LE(seg.eval(lo)[0], 1e4);
    EXPECT_GT(seg.eval(hi)[0], 1e4);
}

TEST(Integrate, ZeroFieldIsConstant) {
    const std::vector<double> y0{3.0, -1.0};
    const Trajectory traj = integrate(
        [](double, std::span<const double>, std::span<double> dy) { dy[0] = dy[1] = 0.0; }, y0,
        Span{0.0, 1.0}, IntegratorConfig{});
    EXPECT_EQ(traj.termination().kind, Termination::Kind::Horizon);
    for (const auto& s : traj.samples()) {
        EXPECT_EQ(s.y[0], 3.0);
        EXPECT_EQ(s.y[1], -1.0);
    }
}

TEST(Integrate, RejectsNonfiniteStartAndEmptySpan) {
    const std::vector<double> y0{1.0};
    auto bad = [](double, std::span<const double>, std::span<double> dy) { dy[0] = NAN; };
    try {
        integrate(bad, y0, Span{0.0, 1.0}, IntegratorConfig{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonfiniteRhs);
    }
    auto ok = [](double, std::span<const double>, std::span<double> dy) { dy[0] = 0.0; };
    EXPECT_THROW(integrate(ok, y0, Span{1.0, 1.0}, IntegratorConfig{}), Error);
}

TEST(Integrate, MaxStepsIsAnError) {
    IntegratorConfig cfg;
    cfg.max_steps = 3;
    cfg.hmax = 1e-3;
    try {
        run_exponential(cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MaxSteps);
    }
}

TEST(Integrate, UnderflowWithoutEvents) {
    const std::vector<double> y0{2.0};
    const Trajectory traj = integrate(
        [](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0] * y[0] * y[0] - y[0]; },
        y0, Span{0.0, 1.0}, IntegratorConfig{});
    EXPECT_EQ(traj.termination().kind, Termination::Kind::StepUnderflow);
    EXPECT_LT(traj.back().x, kCubicBlowup);
    EXPECT_GT(traj.back().x, kCubicBlowup - 1e-9);
}

TEST(Integrate, ConfigInvariantsChecked) {
    IntegratorConfig cfg;
    cfg.hmin = 1.0;  // above h0
    EXPECT_THROW(run_exponential(cfg), Error);
    cfg = {};
    cfg.rtol = 0.0;
    EXPECT_THROW(run_exponential(cfg), Error);
}

TEST(Integrate, TighterToleranceNeverWorse) {
    IntegratorConfig cfg;
    cfg.rtol = 1e-6;
    cfg.atol = 1e-8;
    double prev_exp = INFINITY, prev_cubic = INFINITY, prev_quad = INFINITY;
    for (int i = 0; i < 6; ++i) {
        const double e1 = std::abs(run_exponential(cfg).back().y[0] - std::exp(1.0));
        const double e2 = std::abs(run_cubic(cfg).termination().time - kCubicCrossing);
        const double e3 = std::abs(quadrature([](double x, std::span<const double>) { return x; },
                                              Span{0.0, 1.0}, cfg)
                                       .back()
                                       .y[0] -
                                   0.5);
        // allow roundoff-level wiggle once the error floor is reached
        EXPECT_LE(e1, prev_exp + 1e-14);
        EXPECT_LE(e2, prev_cubic + 1e-12);
        EXPECT_LE(e3, prev_quad + 1e-15);
        prev_exp = e1;
        prev_cubic = e2;
        prev_quad = e3;
        cfg.rtol /= 2.0;
        cfg.atol /= 2.0;
    }
}

TEST(Integrate, Deterministic) {
    const Trajectory a = run_cubic({});
    const Trajectory b = run_cubic({});
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(std::memcmp(&a[i].x, &b[i].x, sizeof(double)), 0);
        EXPECT_EQ(std::memcmp(a[i].y.data(), b[i].y.data(), sizeof(double) * a[i].y.size()), 0);
    }
}

TEST(Integrate, RecordEventsDoNotStop) {
    const std::vector<double> y0{0.0};
    const std::vector<EventSpec> events{
        EventSpec{"half", [](double, std::span<const double> y) { return y[0] - 0.5; },
                  Trigger::SignChange, 0.0, EventAction::Record},
        EventSpec{"below", [](double, std::span<const double> y) { return y[0]; },
                  Trigger::FallsBelow, -1.0, EventAction::Record}};
    const Trajectory traj = integrate(
        [](double, std::span<const double>, std::span<double> dy) { dy[0] = 1.0; }, y0,
        Span{0.0, 2.0}, IntegratorConfig{}, events);
    EXPECT_EQ(traj.termination().kind, Termination::Kind::Horizon);
    ASSERT_EQ(traj.events().size(), 1u);
    EXPECT_EQ(traj.events()[0].name, "half");
    EXPECT_NEAR(traj.events()[0].time, 0.5, 1e-12);
}

TEST(Quadrature, ConstantAndLinear) {
    const Trajectory c = quadrature([](double, std::span<const double>) { return 1.0; }, Span{0.0, 2.0});
    EXPECT_NEAR(c.back().y[0], 2.0, 1e-12);
    const Trajectory l = quadrature([](double x, std::span<const double>) { return x; }, Span{0.0, 1.0});
    EXPECT_NEAR(l.back().y[0], 0.5, 1e-12);
}

TEST(Quadrature, ColumnsRideAlongState) {
    // y' = y, carry int y: equals e^x - 1
    const std::vector<double> y0{1.0};
    const Integrand q{"int_y", [](double, std::span<const double> y) { return y[0]; }, 0.0};
    const Trajectory traj = integrate(
        [](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0]; }, y0,
        Span{0.0, 2.0}, IntegratorConfig{}, {}, std::span<const Integrand>(&q, 1));
    for (const auto& s : traj.samples()) EXPECT_NEAR(s.y[1], std::expm1(s.x), 1e-9 * std::exp(s.x));
}

TEST(Blowup, LadderNamesAndActions) {
    const auto ladder = threshold_ladder("Y", [](double, std::span<const double>) { return 0.0; });
    ASSERT_EQ(ladder.size(), kBlowupThresholds.size());
    EXPECT_EQ(ladder.front().name, "Y>1e+04");
    EXPECT_EQ(ladder.back().name, "Y>1e+08");
    EXPECT_EQ(ladder.front().action, EventAction::Record);
    EXPECT_EQ(ladder.back().action, EventAction::Stop);
}

TEST(Blowup, AitkenSumsGeometricTail) {
    // crossing gaps 1, 1/10, 1/100 from 0: limit 1 + 1/10 + 1/100 + ... = 10/9
    const std::vector<double> crossings{0.0, 1.0, 1.1, 1.11};
    const BlowupEstimate est = extrapolate_blowup(crossings, 1.11);
    EXPECT_TRUE(est.extrapolated);
    EXPECT_NEAR(est.estimate, 10.0 / 9.0, 1e-12);
    EXPECT_EQ(est.last_crossing, 1.11);
}

TEST(Blowup, EstimateNeverPrecedesTerminal) {
    const std::vector<double> crossings{0.0, 1.0, 1.1};
    EXPECT_GE(extrapolate_blowup(crossings, 2.0).estimate, 2.0);
    const std::vector<double> few{0.5};
    const BlowupEstimate est = extrapolate_blowup(few, 0.7);
    EXPECT_FALSE(est.extrapolated);
    EXPECT_EQ(est.estimate, 0.7);
}
