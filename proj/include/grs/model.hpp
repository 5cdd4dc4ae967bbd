#pragma once

// Domain types shared by the three ODE formulations of the soliton ansatz
//
//   g = dt^2 + H(t)^2 eta (x) eta + F(t)^2 pi^* g_N,   f = f(t),
//
// where N is Kahler-Einstein of real dimension 2m with Rc_N = k Id and the
// circle/line bundle has twist q in {0, 1}.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "grs/error.hpp"

namespace grs {

struct AnsatzParams {
    double lambda = 0.0;  ///< soliton constant: steady 0, shrinking > 0
    int m = 1;            ///< half the real dimension of the base N
    int q = 0;            ///< bundle twist
    double k = 0.0;       ///< Einstein constant of N
    int dim_total = 4;    ///< dimension of M, always 2m + 2

    static AnsatzParams make(double lambda, int m, int q, double k) {
        return AnsatzParams{lambda, m, q, k, 2 * m + 2};
    }
};

/// Returns `params` unchanged or throws Reject naming the first bad field.
inline AnsatzParams validate(const AnsatzParams& params) {
    if (params.q != 0 && params.q != 1)
        throw Error(ErrorCode::Reject, "q must be 0 or 1", "q");
    if (params.m < 1) throw Error(ErrorCode::Reject, "m must be >= 1", "m");
    if (params.dim_total != 2 * params.m + 2)
        throw Error(ErrorCode::Reject, "dim_total must equal 2m + 2", "dim_total");
    if (!std::isfinite(params.lambda))
        throw Error(ErrorCode::Reject, "lambda must be finite", "lambda");
    if (!std::isfinite(params.k)) throw Error(ErrorCode::Reject, "k must be finite", "k");
    return params;
}

/// Point of the t-formulation (geodesic arclength t).
struct StateT {
    double t = 0.0;
    double H = 1.0;
    double dH = 0.0;
    double F = 1.0;
    double dF = 0.0;
    double f = 0.0;
    double df = 0.0;
};

/// Point of the transformed formulation, ds = H dt. Never mixed with SpecialState::s.
struct StateS {
    double s = 0.0;
    double alpha = 1.0;  ///< H^2
    double dalpha = 0.0;
    double beta = 1.0;  ///< F^2
    double dbeta = 0.0;
    double phi = 0.0;  ///< f
    double dphi = 0.0;
};

/// Point of the (X2, Y1, Y2) system, ds = gamma dt. X1 vanishes identically.
struct SpecialState {
    double s = 0.0;
    double x2 = 0.0;
    double y1 = 1.0;
    double y2 = 1.0;
};

/// Curvature scalars and first integrals at one t-sample.
struct Diagnostics {
    double trL = 0.0;   ///< H'/H + 2m F'/F
    double trL2 = 0.0;  ///< (H'/H)^2 + 2m (F'/F)^2
    double S = 0.0;     ///< scalar curvature, lambda n - f'' - f' trL
    double C = 0.0;     ///< f'' + trL f' - f'^2 + 2 lambda f
    double C1 = 0.0;    ///< S + f'^2 - 2 lambda f
};

enum class Formulation { T, S, Special, Raw };

constexpr std::string_view to_string(Formulation f) {
    switch (f) {
        case Formulation::T: return "T";
        case Formulation::S: return "S";
        case Formulation::Special: return "SPECIAL";
        case Formulation::Raw: return "RAW";
    }
    return "?";
}

// Layout of the state vectors carried by trajectories. Each formulation has
// its base components followed by quadrature columns integrated alongside.
namespace layout {
// T: H, H', F, F', f, f', then s_H = int H dt.
inline constexpr std::size_t kH = 0, kDH = 1, kF = 2, kDF = 3, kf = 4, kDf = 5, kArcS = 6;
inline constexpr std::size_t kTBase = 6;
// S: alpha, alpha', beta, beta', phi, phi', then t = int ds / sqrt(alpha).
inline constexpr std::size_t kAlpha = 0, kDAlpha = 1, kBeta = 2, kDBeta = 3, kPhi = 4,
                             kDPhi = 5, kArcT = 6;
inline constexpr std::size_t kSBase = 6;
// SPECIAL: X2, Y1, Y2, then int X2^2 ds and int X2 ds.
inline constexpr std::size_t kX2 = 0, kY1 = 1, kY2 = 2, kIntX2Sq = 3, kIntX2 = 4;
inline constexpr std::size_t kSpecialBase = 3;
}  // namespace layout

inline std::vector<double> to_vector(const StateT& st) {
    return {st.H, st.dH, st.F, st.dF, st.f, st.df};
}
inline std::vector<double> to_vector(const StateS& st) {
    return {st.alpha, st.dalpha, st.beta, st.dbeta, st.phi, st.dphi};
}
inline std::vector<double> to_vector(const SpecialState& st) { return {st.x2, st.y1, st.y2}; }

inline StateT state_t(double t, std::span<const double> y) {
    return {t, y[0], y[1], y[2], y[3], y[4], y[5]};
}
inline StateS state_s(double s, std::span<const double> y) {
    return {s, y[0], y[1], y[2], y[3], y[4], y[5]};
}
inline SpecialState special_state(double s, std::span<const double> y) {
    return {s, y[0], y[1], y[2]};
}

/// Continuous extension of one accepted Runge-Kutta step on [x0, x0 + h],
/// stored in Hairer's nested form
///   y(x0 + theta h) = r0 + theta (r1 + (1 - theta) (r2 + theta (r3 + (1 - theta) r4))).
struct DenseSegment {
    double x0 = 0.0;
    double h = 0.0;
    std::array<std::vector<double>, 5> r;

    double x1() const { return x0 + h; }

    void eval(double x, std::span<double> out) const {
        const double theta = (x - x0) / h;
        const double theta1 = 1.0 - theta;
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = r[0][i] +
                     theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
    }
    std::vector<double> eval(double x) const {
        std::vector<double> out(r[0].size());
        eval(x, out);
        return out;
    }
};

struct Sample {
    double x = 0.0;             ///< independent variable (t or s)
    std::vector<double> y;      ///< state plus quadrature columns
    std::optional<Diagnostics> diag;
};

struct EventRecord {
    std::string name;
    double time = 0.0;  ///< first dense-output point with the trigger status set
    double lo = 0.0;    ///< last bisection point with the status clear
    std::vector<double> state;
};

struct Termination {
    enum class Kind { Horizon, Blowup, Vanishing, StepUnderflow, Event };
    Kind kind = Kind::Horizon;
    double time = 0.0;  ///< independent variable where integration stopped
    std::optional<std::size_t> component;
    std::string event;              ///< event name for Kind::Event
    std::optional<double> estimate;  ///< extrapolated blow-up time
    std::optional<std::pair<double, double>> bracket;
};

constexpr std::string_view to_string(Termination::Kind kind) {
    switch (kind) {
        case Termination::Kind::Horizon: return "HORIZON";
        case Termination::Kind::Blowup: return "BLOWUP";
        case Termination::Kind::Vanishing: return "VANISHING";
        case Termination::Kind::StepUnderflow: return "STEP_UNDERFLOW";
        case Termination::Kind::Event: return "EVENT";
    }
    return "?";
}

/// Ordered solution record. Sample abscissae are strictly increasing and the
/// termination cause can be assigned exactly once.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(AnsatzParams params, Formulation formulation)
        : params_(params), formulation_(formulation) {}

    const AnsatzParams& params() const { return params_; }
    Formulation formulation() const { return formulation_; }
    void retag(AnsatzParams params, Formulation formulation) {
        params_ = params;
        formulation_ = formulation;
    }

    void append(Sample sample) {
        if (!samples_.empty() && !(sample.x > samples_.back().x))
            throw Error(ErrorCode::Invalid, "sample abscissae must be strictly increasing");
        samples_.push_back(std::move(sample));
    }
    void append_dense(DenseSegment seg) { dense_.push_back(std::move(seg)); }
    void add_event(EventRecord rec) { events_.push_back(std::move(rec)); }

    void set_termination(Termination term) {
        if (termination_) throw Error(ErrorCode::Invalid, "termination already set");
        termination_ = std::move(term);
    }
    /// Replaces the integrator's cause with a refined one (blow-up, vanishing).
    void refine_termination(Termination term) {
        if (!termination_) throw Error(ErrorCode::Invalid, "termination not set yet");
        termination_ = std::move(term);
    }
    bool terminated() const { return termination_.has_value(); }
    const Termination& termination() const {
        if (!termination_) throw Error(ErrorCode::Invalid, "trajectory has no termination");
        return *termination_;
    }

    const std::vector<Sample>& samples() const { return samples_; }
    std::vector<Sample>& mutable_samples() { return samples_; }
    const std::vector<DenseSegment>& dense() const { return dense_; }
    const std::vector<EventRecord>& events() const { return events_; }

    bool empty() const { return samples_.empty(); }
    std::size_t size() const { return samples_.size(); }
    const Sample& front() const { return samples_.front(); }
    const Sample& back() const { return samples_.back(); }
    const Sample& operator[](std::size_t i) const { return samples_[i]; }

    std::vector<double> column(std::size_t index) const {
        std::vector<double> out;
        out.reserve(samples_.size());
        for (const auto& s : samples_) out.push_back(s.y.at(index));
        return out;
    }
    std::vector<double> abscissae() const {
        std::vector<double> out;
        out.reserve(samples_.size());
        for (const auto& s : samples_) out.push_back(s.x);
        return out;
    }

    bool has_dense() const { return !dense_.empty(); }

    /// Dense evaluation at x inside [front().x, back().x].
    std::vector<double> eval(double x) const {
        if (samples_.empty()) throw Error(ErrorCode::EmptyTrajectory, "no samples");
        if (x < samples_.front().x || x > samples_.back().x)
            throw Error(ErrorCode::Domain, "dense evaluation outside the trajectory span");
        if (dense_.empty()) throw Error(ErrorCode::Invalid, "trajectory carries no dense output");
        auto it = std::upper_bound(dense_.begin(), dense_.end(), x,
                                   [](double v, const DenseSegment& seg) { return v < seg.x0; });
        if (it != dense_.begin()) --it;
        return it->eval(x);
    }

private:
    AnsatzParams params_{};
    Formulation formulation_ = Formulation::Raw;
    std::vector<Sample> samples_;
    std::vector<DenseSegment> dense_;
    std::vector<EventRecord> events_;
    std::optional<Termination> termination_;
};

}  // namespace grs
