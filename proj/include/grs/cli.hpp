#pragma once

// grslab command-line surface. Everything that touches files lives here.
//
// Exit codes: 0 success, 1 a check or run failed, 2 configuration error
// (unreadable or malformed config, bad field, rejected parameters, violated
// hypotheses).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "grs/error.hpp"
#include "grs/integrator.hpp"
#include "grs/model.hpp"
#include "grs/ode_s.hpp"
#include "grs/ode_t.hpp"
#include "grs/special.hpp"
#include "grs/verify.hpp"

namespace grs::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct Options {
    std::string config;
    std::string out;
    std::optional<double> rtol;
    std::optional<double> atol;
    std::optional<double> tolerance;
    bool seedless = false;
};

inline constexpr std::string_view kConfigHelp = R"(Config file (JSON), all sections optional unless a command needs them:
  params      {"lambda": 0, "m": 1, "q": 0, "k": 0}             dim_total is 2m+2
  formulation "T" | "S" | "SPECIAL"                              default "T"
  initial     T:       {"t","H","dH","F","dF","f","df","horizon"}
              S:       {"s","alpha","dalpha","beta","dbeta","phi","dphi","horizon"}
              SPECIAL: {"s","x2","y1","y2","horizon"}
  shooting    {"eps": 1e-3, "h1": 1, "F0": 1, "f2": 0, "f0": 0, "horizon": 50, "t_check": 1e-2}
  integrator  {"rtol": 1e-10, "atol": 1e-12, "h0": 1e-4, "hmin": 1e-14, "hmax": inf, "max_steps": 1e7}
              blowup runs default hmin to 1e-16
  events      [{"name", "component", "trigger": "sign_change|exceeds|falls_below",
                "threshold", "action": "stop|record"}]
  output      {"dir": ".", "stem": <command name>}
  sweep       {"command": "integrate|shoot|blowup|transform",
               "grid": {"<dotted.path>": [values...]}}
)";

// ---------------------------------------------------------------------------
// Config access

inline json load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Config, "cannot open config file '" + path + "'", "config");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(ErrorCode::Config,
                    path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what(),
                    "line " + std::to_string(line));
    }
}

/// Node at a dotted path, or nullptr when absent.
inline const json* find(const json& root, std::string_view path) {
    const json* node = &root;
    while (!path.empty()) {
        const auto dot = path.find('.');
        const std::string key(path.substr(0, dot));
        if (!node->is_object() || !node->contains(key)) return nullptr;
        node = &(*node)[key];
        path = dot == std::string_view::npos ? std::string_view{} : path.substr(dot + 1);
    }
    return node;
}

inline double number(const json& root, std::string_view path, std::optional<double> fallback) {
    const json* node = find(root, path);
    if (!node) {
        if (fallback) return *fallback;
        throw Error(ErrorCode::Config, "missing required field '" + std::string(path) + "'",
                    std::string(path));
    }
    if (node->is_string()) {
        const std::string s = node->get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    if (!node->is_number())
        throw Error(ErrorCode::Config, "field '" + std::string(path) + "' must be a number",
                    std::string(path));
    return node->get<double>();
}

inline int integer(const json& root, std::string_view path, std::optional<int> fallback) {
    const json* node = find(root, path);
    if (!node && fallback) return *fallback;
    const double v = number(root, path, std::nullopt);
    if (v != std::floor(v))
        throw Error(ErrorCode::Config, "field '" + std::string(path) + "' must be an integer",
                    std::string(path));
    return static_cast<int>(v);
}

inline std::string text(const json& root, std::string_view path, std::string fallback) {
    const json* node = find(root, path);
    if (!node) return fallback;
    if (!node->is_string())
        throw Error(ErrorCode::Config, "field '" + std::string(path) + "' must be a string",
                    std::string(path));
    return node->get<std::string>();
}

inline AnsatzParams read_params(const json& cfg) {
    AnsatzParams p = AnsatzParams::make(number(cfg, "params.lambda", 0.0), integer(cfg, "params.m", 1),
                                        integer(cfg, "params.q", 0), number(cfg, "params.k", 0.0));
    if (find(cfg, "params.dim_total")) p.dim_total = integer(cfg, "params.dim_total", std::nullopt);
    return validate(p);
}

inline IntegratorConfig read_integrator(const json& cfg, const Options& opt,
                                        IntegratorConfig base = {}) {
    IntegratorConfig c = base;
    c.rtol = number(cfg, "integrator.rtol", c.rtol);
    c.atol = number(cfg, "integrator.atol", c.atol);
    c.h0 = number(cfg, "integrator.h0", c.h0);
    c.hmin = number(cfg, "integrator.hmin", c.hmin);
    c.hmax = number(cfg, "integrator.hmax", c.hmax);
    c.max_steps = static_cast<std::int64_t>(
        number(cfg, "integrator.max_steps", static_cast<double>(c.max_steps)));
    if (opt.rtol) c.rtol = *opt.rtol;
    if (opt.atol) c.atol = *opt.atol;
    try {
        c.check();
    } catch (const Error& e) {
        throw Error(ErrorCode::Config, e.what(), "integrator." + e.field());
    }
    return c;
}

inline ShootingConfig read_shooting(const json& cfg) {
    ShootingConfig s;
    s.eps = number(cfg, "shooting.eps", s.eps);
    s.h1 = number(cfg, "shooting.h1", s.h1);
    s.F0 = number(cfg, "shooting.F0", s.F0);
    s.f2 = number(cfg, "shooting.f2", s.f2);
    s.f0 = number(cfg, "shooting.f0", s.f0);
    s.horizon = number(cfg, "shooting.horizon", s.horizon);
    try {
        check_shooting(s);
    } catch (const Error& e) {
        throw Error(ErrorCode::Config, e.what(), "shooting." + e.field());
    }
    return s;
}

inline Formulation read_formulation(const json& cfg) {
    const std::string f = text(cfg, "formulation", "T");
    if (f == "T") return Formulation::T;
    if (f == "S") return Formulation::S;
    if (f == "SPECIAL") return Formulation::Special;
    throw Error(ErrorCode::Config, "formulation must be T, S or SPECIAL", "formulation");
}

inline const std::vector<std::string>& component_names(Formulation f) {
    static const std::vector<std::string> t{"H", "dH", "F", "dF", "f", "df", "s"};
    static const std::vector<std::string> s{"alpha", "dalpha", "beta", "dbeta", "phi", "dphi", "t"};
    static const std::vector<std::string> sp{"x2", "y1", "y2", "int_x2_sq", "int_x2"};
    switch (f) {
        case Formulation::T: return t;
        case Formulation::S: return s;
        default: return sp;
    }
}

inline std::vector<EventSpec> read_events(const json& cfg, Formulation f) {
    std::vector<EventSpec> out;
    const json* node = find(cfg, "events");
    if (!node) return out;
    if (!node->is_array()) throw Error(ErrorCode::Config, "events must be an array", "events");
    const auto& names = component_names(f);
    for (std::size_t i = 0; i < node->size(); ++i) {
        const json& ev = (*node)[i];
        const std::string at = "events[" + std::to_string(i) + "]";
        const std::string comp = text(ev, "component", "");
        const auto it = std::find(names.begin(), names.end(), comp);
        if (it == names.end())
            throw Error(ErrorCode::Config, at + ".component '" + comp + "' is not a state component",
                        at + ".component");
        const std::size_t index = static_cast<std::size_t>(it - names.begin());
        EventSpec spec;
        spec.name = text(ev, "name", comp);
        spec.fn = [index](double, std::span<const double> y) { return y[index]; };
        const std::string trig = text(ev, "trigger", "sign_change");
        if (trig == "sign_change")
            spec.trigger = Trigger::SignChange;
        else if (trig == "exceeds")
            spec.trigger = Trigger::Exceeds;
        else if (trig == "falls_below")
            spec.trigger = Trigger::FallsBelow;
        else
            throw Error(ErrorCode::Config, at + ".trigger must be sign_change, exceeds or falls_below",
                        at + ".trigger");
        spec.threshold = number(ev, "threshold", 0.0);
        if (!std::isfinite(spec.threshold))
            throw Error(ErrorCode::Config, at + ".threshold must be finite", at + ".threshold");
        const std::string act = text(ev, "action", "record");
        if (act == "stop")
            spec.action = EventAction::Stop;
        else if (act == "record")
            spec.action = EventAction::Record;
        else
            throw Error(ErrorCode::Config, at + ".action must be stop or record", at + ".action");
        out.push_back(std::move(spec));
    }
    return out;
}

inline StateT read_initial_t(const json& cfg) {
    return {number(cfg, "initial.t", 0.0),  number(cfg, "initial.H", std::nullopt),
            number(cfg, "initial.dH", 0.0), number(cfg, "initial.F", std::nullopt),
            number(cfg, "initial.dF", 0.0), number(cfg, "initial.f", 0.0),
            number(cfg, "initial.df", 0.0)};
}

inline StateS read_initial_s(const json& cfg) {
    return {number(cfg, "initial.s", 0.0),     number(cfg, "initial.alpha", std::nullopt),
            number(cfg, "initial.dalpha", 0.0), number(cfg, "initial.beta", std::nullopt),
            number(cfg, "initial.dbeta", 0.0),  number(cfg, "initial.phi", 0.0),
            number(cfg, "initial.dphi", 0.0)};
}

inline SpecialState read_initial_special(const json& cfg) {
    return {number(cfg, "initial.s", 0.0), number(cfg, "initial.x2", std::nullopt),
            number(cfg, "initial.y1", std::nullopt), number(cfg, "initial.y2", std::nullopt)};
}

// ---------------------------------------------------------------------------
// Output

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

inline void write_csv(const Trajectory& traj, std::ostream& os) {
    switch (traj.formulation()) {
        case Formulation::T:
            os << "t,H,dH,F,dF,f,df,trL,S,C,C1\n";
            for (const auto& s : traj.samples()) {
                const double nan = std::numeric_limits<double>::quiet_NaN();
                const Diagnostics d = s.diag.value_or(Diagnostics{nan, nan, nan, nan, nan});
                os << fmt(s.x);
                for (std::size_t i = 0; i < layout::kTBase; ++i) os << ',' << fmt(s.y[i]);
                os << ',' << fmt(d.trL) << ',' << fmt(d.S) << ',' << fmt(d.C) << ',' << fmt(d.C1)
                   << '\n';
            }
            break;
        case Formulation::S:
            os << "s,alpha,dalpha,beta,dbeta,phi,dphi\n";
            for (const auto& s : traj.samples()) {
                os << fmt(s.x);
                for (std::size_t i = 0; i < layout::kSBase; ++i) os << ',' << fmt(s.y[i]);
                os << '\n';
            }
            break;
        case Formulation::Special:
            os << "s,x2,y1,y2,ratio\n";
            for (const auto& s : traj.samples())
                os << fmt(s.x) << ',' << fmt(s.y[layout::kX2]) << ',' << fmt(s.y[layout::kY1]) << ','
                   << fmt(s.y[layout::kY2]) << ',' << fmt(s.y[layout::kY2] / s.y[layout::kY1])
                   << '\n';
            break;
        case Formulation::Raw:
            throw Error(ErrorCode::Invalid, "raw trajectories have no CSV layout");
    }
}

inline json to_json(const AnsatzParams& p) {
    return {{"lambda", p.lambda}, {"m", p.m}, {"q", p.q}, {"k", p.k}, {"dim_total", p.dim_total}};
}

inline json to_json(const Termination& t, Formulation f) {
    json j{{"kind", std::string(to_string(t.kind))}, {"time", t.time}};
    if (t.component) {
        const auto& names = component_names(f);
        j["component"] = *t.component < names.size() ? names[*t.component]
                                                      : std::to_string(*t.component);
    }
    if (!t.event.empty()) j["event"] = t.event;
    if (t.estimate) j["estimate"] = *t.estimate;
    if (t.bracket) j["bracket"] = {t.bracket->first, t.bracket->second};
    return j;
}

inline json summary(const Trajectory& traj) {
    json j{{"formulation", std::string(to_string(traj.formulation()))},
           {"params", to_json(traj.params())},
           {"samples", traj.size()},
           {"span", {traj.front().x, traj.back().x}},
           {"termination", to_json(traj.termination(), traj.formulation())}};
    json events = json::array();
    for (const auto& e : traj.events()) events.push_back({{"name", e.name}, {"time", e.time}});
    j["events"] = events;
    if (traj.formulation() == Formulation::T) {
        json drift_j = json::object();
        for (auto [name, member] : {std::pair{"C", &Diagnostics::C}, std::pair{"C1", &Diagnostics::C1}}) {
            try {
                const DriftStats d = drift(traj, member);
                drift_j[name] = {{"initial", d.initial}, {"max_drift", d.max_drift},
                                 {"relative", d.relative()}};
            } catch (const Error&) {
            }
        }
        j["drift"] = drift_j;
    }
    return j;
}

class Outputs {
public:
    Outputs(const json& cfg, const Options& opt, std::string_view command)
        : dir_(!opt.out.empty() ? opt.out : text(cfg, "output.dir", ".")),
          stem_(text(cfg, "output.stem", std::string(command))) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw Error(ErrorCode::Config, "cannot create output directory " + dir_.string(), "out");
    }

    fs::path path(std::string_view suffix) const { return dir_ / (stem_ + std::string(suffix)); }

    std::string csv(const Trajectory& traj, std::string_view suffix = ".csv") {
        const fs::path p = path(suffix);
        std::ofstream os(p, std::ios::binary);
        write_csv(traj, os);
        if (!os) throw Error(ErrorCode::Invalid, "failed writing " + p.string());
        files_.push_back(p.string());
        return p.string();
    }

    void report(json j, std::ostream& out, std::string_view suffix = ".json") {
        const fs::path p = path(suffix);
        files_.push_back(p.string());
        j["files"] = files_;
        std::ofstream os(p, std::ios::binary);
        os << j.dump(2) << '\n';
        if (!os) throw Error(ErrorCode::Invalid, "failed writing " + p.string());
        out << j.dump(2) << '\n';
    }

private:
    fs::path dir_;
    std::string stem_;
    std::vector<std::string> files_;
};

// ---------------------------------------------------------------------------
// Commands

inline int cmd_verify(const json& cfg, const Options& opt, std::ostream& out) {
    std::optional<double> tol = opt.tolerance;
    if (!tol && find(cfg, "verify.tolerance")) tol = number(cfg, "verify.tolerance", std::nullopt);
    const std::vector<Check> checks = run_checks(tol);
    bool all = true;
    out << std::left << std::setw(40) << "check" << std::setw(14) << "max_error" << std::setw(12)
        << "tolerance" << "result\n";
    for (const auto& c : checks) {
        char err[32], tl[32];
        std::snprintf(err, sizeof err, "%.3e", c.error);
        std::snprintf(tl, sizeof tl, "%.1e", c.tolerance);
        out << std::left << std::setw(40) << c.name << std::setw(14) << err << std::setw(12) << tl
            << (c.pass ? "PASS" : "FAIL") << '\n';
        all = all && c.pass;
    }
    const auto failed = std::count_if(checks.begin(), checks.end(), [](const Check& c) { return !c.pass; });
    out << (all ? "all checks passed" : std::to_string(failed) + " check(s) failed") << '\n';
    return all ? 0 : 1;
}

/// Integrates in the configured formulation. T runs start from `initial` when
/// present, otherwise from the shooting block.
inline Trajectory run_formulation(const json& cfg, const Options& opt) {
    const Formulation form = read_formulation(cfg);
    const std::vector<EventSpec> events = read_events(cfg, form);
    switch (form) {
        case Formulation::T: {
            const AnsatzParams p = read_params(cfg);
            const IntegratorConfig ic = read_integrator(cfg, opt);
            if (find(cfg, "initial"))
                return integrate_t(p, read_initial_t(cfg), number(cfg, "initial.horizon", std::nullopt),
                                   ic, events);
            return shoot(p, read_shooting(cfg), ic, events);
        }
        case Formulation::S: {
            const AnsatzParams p = read_params(cfg);
            return integrate_s(p, read_initial_s(cfg), number(cfg, "initial.horizon", std::nullopt),
                               read_integrator(cfg, opt), events);
        }
        default: {
            const AnsatzParams p = read_params(cfg);
            return integrate_special(p.m, p.k, read_initial_special(cfg),
                                     number(cfg, "initial.horizon", std::nullopt),
                                     read_integrator(cfg, opt), events);
        }
    }
}

inline int cmd_integrate(const json& cfg, const Options& opt, std::ostream& out) {
    Outputs files(cfg, opt, "integrate");
    const Trajectory traj = run_formulation(cfg, opt);
    files.csv(traj);
    json j = summary(traj);
    j["command"] = "integrate";
    files.report(std::move(j), out);
    return 0;
}

inline int cmd_transform(const json& cfg, const Options& opt, std::ostream& out) {
    Outputs files(cfg, opt, "transform");
    const Trajectory traj = run_formulation(cfg, opt);
    json j{{"command", "transform"}, {"source", summary(traj)}};
    if (traj.formulation() == Formulation::T) {
        const Trajectory s = to_s(traj);
        const Trajectory back = to_t(s);
        double worst = 0.0;
        for (std::size_t i = 0; i < traj.size(); ++i) {
            worst = std::max(worst, std::abs(back[i].x - traj[i].x));
            for (std::size_t c = 0; c < layout::kTBase; ++c)
                worst = std::max(worst, std::abs(back[i].y[c] - traj[i].y[c]));
        }
        files.csv(traj, "_t.csv");
        files.csv(s, "_s.csv");
        j["roundtrip_error"] = worst;
    } else if (traj.formulation() == Formulation::S) {
        const Trajectory t = to_t(traj);
        files.csv(traj, "_s.csv");
        files.csv(t, "_t.csv");
        j["target"] = summary(t);
    } else {
        throw Error(ErrorCode::Config, "transform needs formulation T or S", "formulation");
    }
    files.report(std::move(j), out);
    return 0;
}

inline int cmd_shoot(const json& cfg, const Options& opt, std::ostream& out) {
    Outputs files(cfg, opt, "shoot");
    const AnsatzParams p = read_params(cfg);
    const ShootingConfig sc = read_shooting(cfg);
    const IntegratorConfig ic = read_integrator(cfg, opt);
    const Trajectory traj = shoot(p, sc, ic, read_events(cfg, Formulation::T));
    QualitativeOptions qo = QualitativeOptions::for_config(ic);
    qo.t_min = number(cfg, "shooting.t_check", 1e-2);
    const QualitativeReport q = qualitative_report(traj, qo);
    const double S_check = sample_at_or_after(traj, qo.t_min).diag.value_or(Diagnostics{}).S;
    const SProfileReport sl = s_profile_report(to_s(traj), qo.hysteresis);

    files.csv(traj);
    json j = summary(traj);
    j["command"] = "shoot";
    j["shooting"] = {{"eps", sc.eps}, {"h1", sc.h1}, {"F0", sc.F0}, {"f2", sc.f2}, {"f0", sc.f0},
                     {"horizon", sc.horizon}};
    j["report"] = {
        {"H_increasing", q.dH_sign_changes == 0 && traj.front().y[layout::kDH] > 0.0},
        {"dH_sign_changes", q.dH_sign_changes},
        {"F_extremum_count", q.dF_sign_changes},
        {"F_extremum_count_le_1", q.dF_sign_changes <= 1},
        {"F_growth_factor", q.F_growth},
        {"F_min", q.F_min},
        {"trL_in_0_n_over_t", q.trL_bounded},
        {"S_decreasing", q.S_nonincreasing},
        {"S_at_check", S_check},
        {"S_end", q.S_end},
        {"S_decay_ratio", q.S_end / S_check},
        {"ddf_sign_changes", q.ddf_sign_changes},
        {"trivial_soliton", q.trivial},
        {"alpha_increasing", sl.alpha_increasing},
        {"beta_extremum_count", sl.beta_extrema},
        {"beta_growth_factor", sl.beta_growth},
    };
    files.report(std::move(j), out);
    return 0;
}

inline int cmd_blowup(const json& cfg, const Options& opt, std::ostream& out) {
    Outputs files(cfg, opt, "blowup");
    const AnsatzParams p = read_params(cfg);
    const SpecialState init = read_initial_special(cfg);
    const IntegratorConfig ic = read_integrator(cfg, opt, blowup_integrator_config());
    const BlowupReport rep = detect_blowup(p.m, p.k, init, ic);
    const ClosedFormErrors cf = closed_form_errors(rep.traj, number(cfg, "blowup.margin", 0.01));
    const int x2_dir = monotone_direction(rep.traj.column(layout::kX2));

    files.csv(rep.traj);
    json j = summary(rep.traj);
    j["command"] = "blowup";
    j["initial"] = {{"s", init.s}, {"x2", init.x2}, {"y1", init.y1}, {"y2", init.y2}};
    const bool growth = rep.regime == BlowupRegime::Y2Growth;
    j["regime"] = growth ? "Y2_blowup" : "ratio_blowup";
    j["bound"] = rep.bound;
    j["component"] = rep.component;
    j["crossings"] = rep.crossings;
    j["terminal"] = rep.terminal;
    j["estimate"] = rep.estimate.estimate;
    j["extrapolated"] = rep.estimate.extrapolated;
    j["bracket"] = {rep.estimate.last_crossing, rep.estimate.estimate};
    j["time_le_bound"] = rep.within_bound;
    j["x2_monotone"] = growth ? x2_dir == 1 : x2_dir == -1;
    j["closed_form"] = {{"y1_rel_error", cf.y1}, {"ratio_rel_error", cf.ratio}, {"samples", cf.samples}};
    if (growth) {
        // Y2 past 1e8 sits below double resolution in s; the rescaled run witnesses it.
        const std::vector<EventSpec> top{EventSpec{
            "Y2>1e+08", [](double, std::span<const double> y) { return y[layout::kY2]; },
            Trigger::Exceeds, kBlowupThresholds.back(), EventAction::Stop}};
        const Trajectory w = integrate_special_rescaled(p.m, p.k, init, 1e4, IntegratorConfig{}, top);
        const bool hit = w.termination().kind == Termination::Kind::Event;
        j["y2_threshold_witness"] = {{"reached", hit}, {"s", w.back().y[3]},
                                     {"y2", w.back().y[layout::kY2]},
                                     {"s_le_bound", hit && w.back().y[3] <= rep.bound}};
    }
    files.report(std::move(j), out);
    return rep.within_bound ? 0 : 1;
}

int dispatch(const std::string& command, const json& cfg, const Options& opt, std::ostream& out);

/// Cartesian product of `sweep.grid` in sorted-key order.
inline std::vector<json> grid_points(const json& cfg) {
    const json* grid = find(cfg, "sweep.grid");
    if (!grid || !grid->is_object() || grid->empty())
        throw Error(ErrorCode::Config, "sweep.grid must be a non-empty object", "sweep.grid");
    std::vector<json> points{json::object()};
    for (const auto& [path, values] : grid->items()) {
        if (!values.is_array() || values.empty())
            throw Error(ErrorCode::Config, "sweep.grid." + path + " must be a non-empty array",
                        "sweep.grid." + path);
        std::vector<json> next;
        for (const auto& pt : points)
            for (const auto& v : values) {
                if (!v.is_number() && !v.is_string())
                    throw Error(ErrorCode::Config, "sweep.grid." + path + " values must be numbers",
                                "sweep.grid." + path);
                json q = pt;
                q[path] = v;
                next.push_back(std::move(q));
            }
        points = std::move(next);
    }
    return points;
}

inline void assign(json& root, std::string_view path, const json& value) {
    json* node = &root;
    while (true) {
        const auto dot = path.find('.');
        const std::string key(path.substr(0, dot));
        if (dot == std::string_view::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        path = path.substr(dot + 1);
    }
}

inline int cmd_sweep(const json& cfg, const Options& opt, std::ostream& out) {
    const std::string command = text(cfg, "sweep.command", "shoot");
    if (command == "sweep" || command == "verify")
        throw Error(ErrorCode::Config, "sweep.command cannot be " + command, "sweep.command");
    const std::vector<json> points = grid_points(cfg);
    const fs::path root = !opt.out.empty() ? fs::path(opt.out) : fs::path(text(cfg, "output.dir", "sweep"));
    fs::create_directories(root);

    struct Result {
        int code = 0;
        std::string error;
        std::string log;
    };
    std::vector<Result> results(points.size());
    auto run_point = [&](std::size_t i) {
        json local = cfg;
        local.erase("sweep");
        for (const auto& [path, v] : points[i].items()) assign(local, path, v);
        char name[32];
        std::snprintf(name, sizeof name, "point_%04zu", i);
        Options o = opt;
        o.out = (root / name).string();
        std::ostringstream log;
        try {
            results[i].code = dispatch(command, local, o, log);
        } catch (const Error& e) {
            const bool config = e.code() == ErrorCode::Config || e.code() == ErrorCode::Reject ||
                                e.code() == ErrorCode::HypothesisViolated;
            results[i] = {config ? 2 : 1, e.what(), {}};
        } catch (const std::exception& e) {
            results[i] = {1, e.what(), {}};
        }
        results[i].log = log.str();
    };

    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(points.size(), std::thread::hardware_concurrency()));
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < points.size(); i = next++) run_point(i);
            });
    }

    json index{{"command", command}, {"points", json::array()}};
    int worst = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "point_%04zu", i);
        json entry{{"index", i}, {"dir", name}, {"params", points[i]}, {"exit", results[i].code}};
        if (!results[i].error.empty()) entry["error"] = results[i].error;
        index["points"].push_back(std::move(entry));
        worst = std::max(worst, results[i].code);
    }
    std::ofstream os(root / "index.json", std::ios::binary);
    os << index.dump(2) << '\n';
    out << index.dump(2) << '\n';
    return worst == 0 ? 0 : 1;
}

inline int dispatch(const std::string& command, const json& cfg, const Options& opt, std::ostream& out) {
    if (command == "verify") return cmd_verify(cfg, opt, out);
    if (command == "integrate") return cmd_integrate(cfg, opt, out);
    if (command == "transform") return cmd_transform(cfg, opt, out);
    if (command == "shoot") return cmd_shoot(cfg, opt, out);
    if (command == "blowup") return cmd_blowup(cfg, opt, out);
    if (command == "sweep") return cmd_sweep(cfg, opt, out);
    throw Error(ErrorCode::Config, "unknown command " + command, "command");
}

// ---------------------------------------------------------------------------
// Entry point

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"grslab: integrate, transform and verify the soliton ODE systems of a "
                 "two-function metric ansatz"};
    app.footer(std::string(kConfigHelp));
    app.require_subcommand(1);
    Options opt;

    struct Sub {
        const char* name;
        const char* help;
        bool needs_config;
    };
    const Sub subs[] = {
        {"verify", "run the built-in oracle and property checks", false},
        {"integrate", "integrate one formulation and write CSV plus a JSON summary", true},
        {"blowup", "blow-up experiment for the reduced system against its explicit bound", true},
        {"shoot", "step off the collapsed orbit, integrate, and report trajectory properties", true},
        {"transform", "integrate and convert between the t and s coordinates", true},
        {"sweep", "run a command over a parameter grid into separate directories", true},
    };
    std::vector<CLI::App*> apps;
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        auto* c = sub->add_option("--config", opt.config, "JSON config file");
        if (s.needs_config) c->required();
        sub->add_option("--out", opt.out, "output directory (overrides output.dir)");
        sub->add_option("--rtol", opt.rtol, "relative tolerance (overrides integrator.rtol)");
        sub->add_option("--atol", opt.atol, "absolute tolerance (overrides integrator.atol)");
        sub->add_flag("--seedless", opt.seedless, "reserved; nothing here is random");
        if (std::string_view(s.name) == "verify")
            sub->add_option("--tolerance", opt.tolerance, "replace every check tolerance");
        apps.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    std::string command;
    for (auto* sub : apps)
        if (sub->parsed()) command = sub->get_name();

    try {
        const json cfg = opt.config.empty() ? json::object() : load_config(opt.config);
        if (!cfg.is_object()) throw Error(ErrorCode::Config, "config root must be an object", "config");
        return dispatch(command, cfg, opt, out);
    } catch (const Error& e) {
        err << e.what();
        if (!e.field().empty()) err << " [field: " << e.field() << "]";
        err << '\n';
        switch (e.code()) {
            case ErrorCode::Config:
            case ErrorCode::Reject:
            case ErrorCode::HypothesisViolated: return 2;
            default: return 1;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace grs::cli
