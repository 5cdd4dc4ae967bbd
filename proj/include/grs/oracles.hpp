#pragma once

// Closed-form solutions of the t-system, used as ground truth.

#include <cmath>

#include "grs/error.hpp"
#include "grs/model.hpp"
#include "grs/ode_t.hpp"

namespace grs {

/// Value and first two derivatives of H, F, f at one t.
struct Jet {
    double t = 0.0;
    double H = 0.0, dH = 0.0, ddH = 0.0;
    double F = 0.0, dF = 0.0, ddF = 0.0;
    double f = 0.0, df = 0.0, ddf = 0.0;

    StateT state() const { return {t, H, dH, F, dF, f, df}; }
};

inline Residual3 residual_t(const AnsatzParams& p, const Jet& j) {
    return residual_t(p, j.H, j.dH, j.ddH, j.F, j.dF, j.ddF, j.df, j.ddf);
}

/// H = C1, F = C2, f = C3 + C4 t with lambda = q = k = 0.
class ConstantSolution {
public:
    ConstantSolution(double C1, double C2, double C3, double C4, int m = 1)
        : C1_(C1), C2_(C2), C3_(C3), C4_(C4), params_(AnsatzParams::make(0.0, m, 0, 0.0)) {
        if (!(C1 > 0.0)) throw Error(ErrorCode::Invalid, "C1 must be positive", "C1");
        if (!(C2 > 0.0)) throw Error(ErrorCode::Invalid, "C2 must be positive", "C2");
        validate(params_);
    }

    const AnsatzParams& params() const { return params_; }

    Jet operator()(double t) const {
        Jet j;
        j.t = t;
        j.H = C1_;
        j.F = C2_;
        j.f = C3_ + C4_ * t;
        j.df = C4_;
        return j;
    }

private:
    double C1_, C2_, C3_, C4_;
    AnsatzParams params_;
};

inline ConstantSolution constant_solution(double C1, double C2, double C3, double C4) {
    return ConstantSolution(C1, C2, C3, C4);
}

/// Steady family on t < c3 with m = 1, lambda = q = k = 0:
///   F = C,  H = 2 / (c1 (c3 - t)),  f = -2 ln(sqrt(c1) (c3 - t) / 2).
class NewFamilySolution {
public:
    NewFamilySolution(double C, double c1, double c3)
        : C_(C), c1_(c1), c3_(c3), params_(AnsatzParams::make(0.0, 1, 0, 0.0)) {
        if (!(C > 0.0)) throw Error(ErrorCode::Invalid, "C must be positive", "C");
        if (!(c1 > 0.0)) throw Error(ErrorCode::Invalid, "c1 must be positive", "c1");
    }

    const AnsatzParams& params() const { return params_; }
    double end() const { return c3_; }

    Jet operator()(double t) const {
        if (!(t < c3_)) throw Error(ErrorCode::Domain, "needs t < c3", "t");
        const double u = c3_ - t;
        Jet j;
        j.t = t;
        j.H = 2.0 / (c1_ * u);
        j.dH = 2.0 / (c1_ * u * u);
        j.ddH = 4.0 / (c1_ * u * u * u);
        j.F = C_;
        j.f = -2.0 * std::log(std::sqrt(c1_) * u / 2.0);
        j.df = 2.0 / u;
        j.ddf = 2.0 / (u * u);
        return j;
    }

private:
    double C_, c1_, c3_;
    AnsatzParams params_;
};

inline NewFamilySolution new_family_solution(double C, double c1, double c3) {
    return NewFamilySolution(C, c1, c3);
}

/// Shrinking constant-scale solution with q = 1:
///   F^2 = k m / (lambda (m + 1)),  H^2 = lambda F^4 / (2m),  f = lambda t^2 / 2 + c1 t + c0.
class CylinderSolution {
public:
    CylinderSolution(int m, double lambda, double k, double c1 = 0.0, double c0 = 0.0)
        : lambda_(lambda), c1_(c1), c0_(c0) {
        if (m < 1) throw Error(ErrorCode::Invalid, "m must be >= 1", "m");
        if (!(lambda > 0.0)) throw Error(ErrorCode::Invalid, "lambda must be positive", "lambda");
        if (!(k > 0.0)) throw Error(ErrorCode::Invalid, "k must be positive", "k");
        params_ = AnsatzParams::make(lambda, m, 1, k);
        const double F2 = k * m / (lambda * (m + 1));
        F_ = std::sqrt(F2);
        H_ = std::sqrt(lambda * F2 * F2 / (2.0 * m));
    }

    const AnsatzParams& params() const { return params_; }

    Jet operator()(double t) const {
        Jet j;
        j.t = t;
        j.H = H_;
        j.F = F_;
        j.f = 0.5 * lambda_ * t * t + c1_ * t + c0_;
        j.df = lambda_ * t + c1_;
        j.ddf = lambda_;
        return j;
    }

private:
    double lambda_, c1_, c0_;
    double H_ = 0.0, F_ = 0.0;
    AnsatzParams params_;
};

inline CylinderSolution cylinder_solution(int m, double lambda, double k) {
    return CylinderSolution(m, lambda, k);
}

}  // namespace grs
