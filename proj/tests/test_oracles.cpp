#include <gtest/gtest.h>

#include <cmath>

#include "grs/oracles.hpp"

using namespace grs;

namespace {

template <class Oracle>
double max_residual_log_spaced(const Oracle& o, double t_lo, double t_hi) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double t = t_lo * std::pow(t_hi / t_lo, i / 999.0);
        worst = std::max(worst, residual_t(o.params(), o(t)).max_abs());
    }
    return worst;
}

// sup over samples of |integrated - oracle| / (1 + |oracle|)
template <class Oracle>
double tracking(const Oracle& o, double t0, double t1) {
    const Trajectory traj = integrate_t(o.params(), o(t0).state(), t1, IntegratorConfig{});
    double worst = 0.0;
    for (const auto& s : traj.samples()) {
        const auto want = to_vector(o(s.x).state());
        for (std::size_t c = 0; c < layout::kTBase; ++c)
            worst = std::max(worst, std::abs(s.y[c] - want[c]) / (1.0 + std::abs(want[c])));
    }
    return worst;
}

// Central differences of the oracle's own values, against its stated derivatives.
template <class Oracle>
void check_derivatives(const Oracle& o, double t) {
    const double h = 1e-5;
    const Jet a = o(t - h), b = o(t + h), j = o(t);
    EXPECT_NEAR((b.H - a.H) / (2 * h), j.dH, 1e-6 * (1 + std::abs(j.dH)));
    EXPECT_NEAR((b.dH - a.dH) / (2 * h), j.ddH, 1e-6 * (1 + std::abs(j.ddH)));
    EXPECT_NEAR((b.F - a.F) / (2 * h), j.dF, 1e-6);
    EXPECT_NEAR((b.f - a.f) / (2 * h), j.df, 1e-6 * (1 + std::abs(j.df)));
    EXPECT_NEAR((b.df - a.df) / (2 * h), j.ddf, 1e-6 * (1 + std::abs(j.ddf)));
}

}  // namespace

TEST(Constant, ResidualsVanish) {
    const ConstantSolution c(2.0, 3.0, 0.0, 5.0);
    EXPECT_EQ(residual_t(c.params(), c(1.7)).max_abs(), 0.0);
    EXPECT_LE(max_residual_log_spaced(c, 1e-3, 1e3), 1e-12);
}

TEST(Constant, FlatPotentialHasZeroIntegrals) {
    const ConstantSolution c(2.0, 3.0, 1.0, 0.0);
    const Diagnostics d = monitors(c.params(), c(0.4).state());
    EXPECT_EQ(d.C, 0.0);
    EXPECT_EQ(d.C1, 0.0);
}

TEST(Constant, RejectsNonpositiveScales) {
    EXPECT_THROW(ConstantSolution(2.0, 0.0, 0.0, 0.0), Error);
    EXPECT_THROW(ConstantSolution(-1.0, 1.0, 0.0, 0.0), Error);
}

TEST(NewFamily, OriginValues) {
    const NewFamilySolution fam(1.0, 1.0, 1.0);
    const Jet j = fam(0.0);
    EXPECT_DOUBLE_EQ(j.H, 2.0);
    EXPECT_DOUBLE_EQ(j.dH, 2.0);
    EXPECT_DOUBLE_EQ(j.ddH, 4.0);
    EXPECT_DOUBLE_EQ(j.df, 2.0);
    EXPECT_DOUBLE_EQ(j.ddf, 2.0);
    EXPECT_NEAR(j.f, 2.0 * std::log(2.0), 1e-15);
    EXPECT_EQ(residual_t(fam.params(), j).max_abs(), 0.0);
    const Diagnostics d = monitors(fam.params(), j.state());
    EXPECT_DOUBLE_EQ(d.S, -4.0);
    EXPECT_DOUBLE_EQ(d.C, 0.0);
    EXPECT_DOUBLE_EQ(d.C1, 0.0);
}

TEST(NewFamily, DerivativesAreConsistent) {
    const NewFamilySolution fam(1.5, 0.7, 2.0);
    for (double t : {-3.0, 0.0, 1.0, 1.9}) check_derivatives(fam, t);
}

TEST(NewFamily, ResidualsAndIntegralsVanish) {
    const NewFamilySolution fam(1.5, 0.7, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        // log-spaced distance to the singular end, from 1e-3 to 1e3
        const double t = 2.0 - 1e-3 * std::pow(1e6, i / 999.0);
        const Jet j = fam(t);
        worst = std::max(worst, residual_t(fam.params(), j).max_abs() / (1.0 + j.ddf));
        const Diagnostics d = monitors(fam.params(), j.state());
        EXPECT_LE(std::abs(d.C), 1e-12 * (1.0 + j.df * j.df));
        EXPECT_LE(std::abs(d.C1), 1e-12 * (1.0 + j.df * j.df));
    }
    EXPECT_LE(worst, 1e-12);
}

TEST(NewFamily, Domain) {
    const NewFamilySolution fam(1.0, 1.0, 1.0);
    try {
        fam(1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Domain);
    }
    EXPECT_THROW(NewFamilySolution(1.0, 0.0, 1.0), Error);
}

TEST(Cylinder, KnownScales) {
    const CylinderSolution a(1, 0.5, 2.0);
    const Jet j = a(0.0);
    EXPECT_NEAR(j.F, std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(j.H, 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(j.ddf, 0.5);
    EXPECT_LE(residual_t(a.params(), j).max_abs(), 1e-15);

    const CylinderSolution b(2, 1.0, 3.0);
    EXPECT_NEAR(b(0.0).F * b(0.0).F, 2.0, 1e-15);
    EXPECT_NEAR(b(0.0).H * b(0.0).H, 1.0, 1e-15);
    EXPECT_LE(max_residual_log_spaced(b, 1e-3, 1e3), 1e-12);
}

TEST(Cylinder, Invalid) {
    EXPECT_THROW(CylinderSolution(1, 0.0, 1.0), Error);
    EXPECT_THROW(CylinderSolution(1, 1.0, 0.0), Error);
    EXPECT_THROW(CylinderSolution(0, 1.0, 1.0), Error);
}

TEST(Tracking, IntegrationReproducesOracles) {
    EXPECT_LE(tracking(ConstantSolution(2.0, 3.0, 0.0, 5.0), 0.0, 10.0), 1e-8);
    EXPECT_LE(tracking(NewFamilySolution(1.0, 1.0, 1.0), 0.0, 0.9), 1e-8);
    EXPECT_LE(tracking(CylinderSolution(1, 0.5, 2.0), 0.0, 5.0), 1e-8);
    EXPECT_LE(tracking(CylinderSolution(2, 1.0, 3.0), 0.0, 3.0), 1e-8);
}
