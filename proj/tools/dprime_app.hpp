#pragma once

// Command-line front end. `run` takes the argument list (without argv[0])
// and writes the report to `out` (or --output) and diagnostics to `err`.
// Exit codes: 0 success, 1 config error, 2 numeric failure, 3 theorem
// assertion failure.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dprime/circle_spectrum.hpp"
#include "dprime/contour.hpp"
#include "dprime/distance_profiles.hpp"
#include "dprime/errors.hpp"
#include "dprime/fem_solver.hpp"
#include "dprime/parallel_bound.hpp"

namespace dprime::app {

using json = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumeric = 2;
inline constexpr int kExitTheorem = 3;
inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ContourSpec {
    std::string type = "circle";  // circle | ellipse | perturbed
    double length = 2.0 * std::numbers::pi;
    double aspect = 2.0;
    int mode = 3;
    double eps = 0.1;

    std::string label() const {
        std::ostringstream os;
        os << type;
        if (type == "ellipse") os << " aspect=" << aspect;
        if (type == "perturbed") os << " m=" << mode << " eps=" << eps;
        return os.str();
    }
};

struct RunConfig {
    std::string command;
    double R = 1.0;
    double omega = 1.0;
    ContourSpec contour;
    double tol = 1e-12;      // secular residual
    double fem_tol = 1e-8;   // eigen residual
    double h = 0.04;
    double R_out = 6.0;
    double T = 0.0;          // 0 picks the default profile horizon
    int grid = 512;          // profile table intervals
    double r_min = 0.1;
    double r_max = 100.0;
    int r_count = 64;
    std::vector<double> radii;
    std::vector<double> h_list;
    std::vector<double> r_out_list;
    std::vector<ContourSpec> family;
    std::string outer = "dirichlet";
    double fem_slack = 5e-3;
    double bound_slack = 1e-4;
    bool refine = true;
    std::string output;
    std::string format = "json";
    std::string mesh_out;
    std::string eigen_out;
    std::string profile_out;
};

inline std::vector<ContourSpec> default_family(double length) {
    std::vector<ContourSpec> fam;
    fam.push_back({"circle", length, 2.0, 3, 0.1});
    for (double a : {1.2, 1.5, 2.0, 3.0}) fam.push_back({"ellipse", length, a, 3, 0.1});
    for (int m : {2, 3, 4}) fam.push_back({"perturbed", length, 2.0, m, 0.1});
    return fam;
}

inline Contour build_contour(const ContourSpec& s) {
    if (s.type == "circle") return make_circle(s.length / (2.0 * std::numbers::pi));
    if (s.type == "ellipse") return make_ellipse_by_perimeter(s.length, s.aspect);
    if (s.type == "perturbed") return make_perturbed_circle(s.length, s.mode, s.eps);
    throw ConfigError("unknown contour type '" + s.type + "'");
}

namespace detail {

inline json to_json(const ContourSpec& s) {
    json j{{"type", s.type}, {"length", s.length}};
    if (s.type == "ellipse") j["aspect"] = s.aspect;
    if (s.type == "perturbed") {
        j["mode"] = s.mode;
        j["eps"] = s.eps;
    }
    return j;
}

inline ContourSpec contour_from_json(const json& j, ContourSpec base) {
    if (!j.is_object()) throw ConfigError("contour entry must be an object");
    if (j.contains("type")) base.type = j.at("type").get<std::string>();
    if (j.contains("length")) base.length = j.at("length").get<double>();
    if (j.contains("aspect")) base.aspect = j.at("aspect").get<double>();
    if (j.contains("mode")) base.mode = j.at("mode").get<int>();
    if (j.contains("eps")) base.eps = j.at("eps").get<double>();
    return base;
}

inline json to_json(const QuotientReport& r) {
    return json{{"gradient_inner", r.gradient_inner}, {"gradient_outer", r.gradient_outer},
                {"mass_inner", r.mass_inner},         {"mass_outer", r.mass_outer},
                {"numerator_gradient", r.numerator_gradient}, {"numerator_jump", r.numerator_jump},
                {"denominator", r.denominator},       {"quotient", r.quotient}};
}

inline std::string csv_number(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline void write_csv(std::ostream& os, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << '\n';
    }
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open '" + path + "' for writing");
    return f;
}

template <class T>
void take(const json& file, const char* key, T& field, const CLI::App* sub, const char* flag, std::ostream& err) {
    if (!file.contains(key)) return;
    const T value = file.at(key).get<T>();
    if (sub != nullptr && sub->count(flag) > 0 && !(value == field))
        err << "warning: config file overrides " << flag << '\n';
    field = value;
}

inline void apply_config_file(const std::string& path, RunConfig& cfg, const CLI::App* sub, std::ostream& err) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    json file;
    try {
        file = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
    try {
        if (file.contains("command") && file.at("command").get<std::string>() != cfg.command)
            throw ConfigError("config file command '" + file.at("command").get<std::string>() +
                              "' does not match '" + cfg.command + "'");
        take(file, "R", cfg.R, sub, "--R", err);
        take(file, "omega", cfg.omega, sub, "--omega", err);
        take(file, "tol", cfg.tol, sub, "--tol", err);
        take(file, "fem_tol", cfg.fem_tol, sub, "--fem-tol", err);
        take(file, "h", cfg.h, sub, "--h", err);
        take(file, "R_out", cfg.R_out, sub, "--R_out", err);
        take(file, "T", cfg.T, sub, "--T", err);
        take(file, "grid", cfg.grid, sub, "--grid", err);
        take(file, "r_min", cfg.r_min, sub, "--r-min", err);
        take(file, "r_max", cfg.r_max, sub, "--r-max", err);
        take(file, "r_count", cfg.r_count, sub, "--r-count", err);
        take(file, "radii", cfg.radii, sub, "--radii", err);
        take(file, "h_list", cfg.h_list, sub, "--h-list", err);
        take(file, "R_out_list", cfg.r_out_list, sub, "--R_out-list", err);
        take(file, "outer", cfg.outer, sub, "--outer", err);
        take(file, "fem_slack", cfg.fem_slack, sub, "--fem-slack", err);
        take(file, "bound_slack", cfg.bound_slack, sub, "--bound-slack", err);
        take(file, "refine", cfg.refine, sub, "--refine", err);
        take(file, "output", cfg.output, sub, "--output", err);
        take(file, "format", cfg.format, sub, "--format", err);
        take(file, "mesh_out", cfg.mesh_out, sub, "--mesh-out", err);
        take(file, "eigen_out", cfg.eigen_out, sub, "--eigen-out", err);
        take(file, "profile_out", cfg.profile_out, sub, "--profile-out", err);
        if (file.contains("contour")) {
            const ContourSpec before = cfg.contour;
            cfg.contour = contour_from_json(file.at("contour"), cfg.contour);
            const bool flagged = sub && (sub->count("--contour") + sub->count("--length") + sub->count("--aspect") +
                                         sub->count("--mode") + sub->count("--eps")) > 0;
            if (flagged && to_json(before) != to_json(cfg.contour))
                err << "warning: config file overrides contour flags\n";
        }
        if (file.contains("family")) {
            if (!file.at("family").is_array()) throw ConfigError("family must be an array");
            cfg.family.clear();
            for (const auto& e : file.at("family")) cfg.family.push_back(contour_from_json(e, ContourSpec{}));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config file has a field of the wrong type: ") + e.what());
    }
}

inline void validate(const RunConfig& c) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
    };
    positive(c.R, "R");
    positive(c.omega, "omega");
    positive(c.tol, "tol");
    positive(c.fem_tol, "fem-tol");
    positive(c.h, "h");
    positive(c.R_out, "R_out");
    positive(c.r_min, "r-min");
    positive(c.r_max, "r-max");
    positive(c.contour.length, "length");
    positive(c.fem_slack, "fem-slack");
    positive(c.bound_slack, "bound-slack");
    if (c.T < 0.0 || !std::isfinite(c.T)) throw ConfigError("T must be nonnegative (0 selects the default)");
    if (c.grid < 1) throw ConfigError("grid must be positive");
    if (c.r_count < 2) throw ConfigError("r-count must be at least 2");
    if (c.r_max <= c.r_min) throw ConfigError("r-max must exceed r-min");
    for (double r : c.radii) positive(r, "radii");
    for (double v : c.h_list) positive(v, "h-list");
    for (double v : c.r_out_list) positive(v, "R_out-list");
    if (c.format != "json" && c.format != "csv") throw ConfigError("format must be json or csv");
    if (c.outer != "dirichlet" && c.outer != "natural") throw ConfigError("outer must be dirichlet or natural");
    const auto check_contour = [](const ContourSpec& s) {
        if (s.type != "circle" && s.type != "ellipse" && s.type != "perturbed")
            throw ConfigError("unknown contour type '" + s.type + "'");
        if (!(s.length > 0.0)) throw ConfigError("contour length must be positive");
    };
    check_contour(c.contour);
    for (const auto& s : c.family) check_contour(s);
}

} // namespace detail

// ---------------------------------------------------------------- commands

struct Report {
    json doc;
    std::vector<std::string> csv_header;
    std::vector<std::vector<std::string>> csv_rows;
    int exit_code = kExitOk;
};

inline Report cmd_circle(const RunConfig& cfg) {
    using detail::csv_number;
    const CircleProblem prob(cfg.R, cfg.omega);
    const CircleSolution sol = solve_k_star(prob, cfg.tol);
    const double lower = 2.0 * cfg.omega;
    const double upper = cfg.omega / profile_F(2.0 * cfg.omega * cfg.R);
    const TransmissionDefect td = transmission_defect(sol);
    const double indicator = disk_indicator_bound(prob);

    Report rep;
    rep.doc = json{{"schema", kSchemaVersion},
                   {"command", "circle"},
                   {"R", cfg.R},
                   {"omega", cfg.omega},
                   {"k_star", sol.k_star},
                   {"lambda1", sol.lambda1},
                   {"residual", sol.residual},
                   {"iterations", sol.iterations},
                   {"coeff_inside", sol.coeff_inside},
                   {"coeff_outside", sol.coeff_outside},
                   {"bracket", {{"lower", lower}, {"upper", upper}, {"holds", lower < sol.k_star && sol.k_star < upper}}},
                   {"indicator_bound", {{"value", indicator}, {"holds", sol.lambda1 <= indicator}}},
                   {"below_minus_4_omega2", sol.lambda1 < -4.0 * cfg.omega * cfg.omega},
                   {"transmission",
                    {{"derivative_mismatch", td.derivative_mismatch},
                     {"jump_condition", td.jump_condition},
                     {"scale", td.scale}}}};
    rep.csv_header = {"R", "omega", "k_star", "lambda1", "residual", "bracket_lower", "bracket_upper",
                      "indicator_bound", "derivative_mismatch", "jump_condition"};
    rep.csv_rows.push_back({csv_number(cfg.R), csv_number(cfg.omega), csv_number(sol.k_star), csv_number(sol.lambda1),
                            csv_number(sol.residual), csv_number(lower), csv_number(upper), csv_number(indicator),
                            csv_number(td.derivative_mismatch), csv_number(td.jump_condition)});
    return rep;
}

inline std::vector<double> sweep_radii(const RunConfig& cfg) {
    if (!cfg.radii.empty()) return cfg.radii;
    std::vector<double> radii(cfg.r_count);
    const double a = std::log(cfg.r_min), b = std::log(cfg.r_max);
    for (int i = 0; i < cfg.r_count; ++i) radii[i] = std::exp(a + (b - a) * i / (cfg.r_count - 1));
    radii.front() = cfg.r_min;
    radii.back() = cfg.r_max;
    return radii;
}

inline Report cmd_sweep(const RunConfig& cfg) {
    using detail::csv_number;
    const std::vector<double> radii = sweep_radii(cfg);
    if (!std::is_sorted(radii.begin(), radii.end()) ||
        std::adjacent_find(radii.begin(), radii.end()) != radii.end())
        throw ConfigError("radii must be strictly ascending");
    const auto sols = sweep_radius(cfg.omega, radii, cfg.tol);
    bool increasing = true, k_decreasing = true;
    json rows = json::array();
    Report rep;
    rep.csv_header = {"R", "omega", "k_star", "lambda1", "residual"};
    for (std::size_t i = 0; i < sols.size(); ++i) {
        const auto& s = sols[i];
        if (i > 0) {
            increasing = increasing && s.lambda1 > sols[i - 1].lambda1;
            k_decreasing = k_decreasing && s.k_star < sols[i - 1].k_star;
        }
        rows.push_back({{"R", s.problem.radius}, {"k_star", s.k_star}, {"lambda1", s.lambda1}, {"residual", s.residual}});
        rep.csv_rows.push_back({csv_number(s.problem.radius), csv_number(cfg.omega), csv_number(s.k_star),
                                csv_number(s.lambda1), csv_number(s.residual)});
    }
    rep.doc = json{{"schema", kSchemaVersion}, {"command", "sweep"},         {"omega", cfg.omega},
                   {"lambda1_increasing", increasing}, {"k_star_decreasing", k_decreasing}, {"rows", rows}};
    return rep;
}

inline void write_profiles(const std::string& path, const Contour& c, double outer_horizon, int grid) {
    auto f = detail::open_output(path);
    f << "side,t,A,L\n";
    f << std::setprecision(17);
    for (ProfileSide side : {ProfileSide::inner, ProfileSide::outer}) {
        const DistanceProfileTable tab = distance_profiles(c, side, outer_horizon, grid);
        for (std::size_t j = 0; j < tab.t.size(); ++j)
            f << to_string(side) << ',' << tab.t[j] << ',' << tab.area[j] << ',' << tab.length[j] << '\n';
    }
}

inline Report cmd_bound(const RunConfig& cfg) {
    using detail::csv_number;
    const Contour c = build_contour(cfg.contour);
    const double L = c.length();
    const CircleSolution sol = solve_k_star(CircleProblem(L / (2.0 * std::numbers::pi), cfg.omega), cfg.tol);
    const double T = cfg.T > 0.0 ? cfg.T : default_profile_horizon(sol);
    const RadialProfile p = optimal_profile(sol, T);
    const QuotientComparison cmp = compare_quotients(p, c, cfg.omega);
    const double r_in = in_radius(c);
    if (!cfg.profile_out.empty()) write_profiles(cfg.profile_out, c, T, cfg.grid);

    Report rep;
    rep.doc = json{{"schema", kSchemaVersion},
                   {"command", "bound"},
                   {"contour", detail::to_json(cfg.contour)},
                   {"omega", cfg.omega},
                   {"length", L},
                   {"area", c.area()},
                   {"isoperimetric_defect", c.isoperimetric_defect()},
                   {"in_radius", r_in},
                   {"horizon", T},
                   {"lambda1_circle", sol.lambda1},
                   {"circle_quotient", detail::to_json(cmp.circle)},
                   {"domain_quotient", detail::to_json(cmp.domain)},
                   {"ordering_applicable", cmp.ordering_applicable},
                   {"ordered", cmp.ordered},
                   {"margin", sol.lambda1 - cmp.domain.quotient}};
    rep.csv_header = {"contour", "length", "omega", "in_radius", "horizon", "lambda1_circle", "circle_quotient",
                      "domain_quotient", "numerator_gradient", "numerator_jump", "denominator", "margin"};
    rep.csv_rows.push_back({cfg.contour.type, csv_number(L), csv_number(cfg.omega), csv_number(r_in), csv_number(T),
                            csv_number(sol.lambda1), csv_number(cmp.circle.quotient), csv_number(cmp.domain.quotient),
                            csv_number(cmp.domain.numerator_gradient), csv_number(cmp.domain.numerator_jump),
                            csv_number(cmp.domain.denominator), csv_number(sol.lambda1 - cmp.domain.quotient)});
    return rep;
}

inline fem::FemOptions fem_options(const RunConfig& cfg) {
    fem::FemOptions opt;
    opt.tol = cfg.fem_tol;
    opt.outer = cfg.outer == "natural" ? fem::OuterBoundary::natural : fem::OuterBoundary::dirichlet;
    return opt;
}

inline Report cmd_fem(const RunConfig& cfg) {
    using detail::csv_number;
    const Contour c = build_contour(cfg.contour);
    const fem::FemOptions opt = fem_options(cfg);
    Report rep;
    if (!cfg.h_list.empty()) {
        std::optional<double> reference;
        if (cfg.contour.type == "circle")
            reference = solve_k_star(CircleProblem(c.length() / (2.0 * std::numbers::pi), cfg.omega)).lambda1;
        const std::vector<double> routs = cfg.r_out_list.empty() ? std::vector<double>{cfg.R_out} : cfg.r_out_list;
        const auto rows = fem::convergence_study(c, cfg.omega, cfg.h_list, routs, reference, opt);
        json jrows = json::array();
        rep.csv_header = {"h", "R_out", "lambda1", "error", "observed_order", "nodes"};
        for (const auto& r : rows) {
            json jr{{"h", r.h}, {"R_out", r.r_out}, {"lambda1", r.lambda1}, {"nodes", r.nodes}};
            jr["error"] = r.error ? json(*r.error) : json(nullptr);
            jr["observed_order"] = r.observed_order ? json(*r.observed_order) : json(nullptr);
            jrows.push_back(jr);
            rep.csv_rows.push_back({csv_number(r.h), csv_number(r.r_out), csv_number(r.lambda1),
                                    r.error ? csv_number(*r.error) : "", r.observed_order ? csv_number(*r.observed_order) : "",
                                    std::to_string(r.nodes)});
        }
        rep.doc = json{{"schema", kSchemaVersion}, {"command", "fem"},  {"mode", "convergence"},
                       {"contour", detail::to_json(cfg.contour)},       {"omega", cfg.omega},
                       {"outer", cfg.outer}};
        rep.doc["reference"] = reference ? json(*reference) : json(nullptr);
        rep.doc["rows"] = jrows;
        return rep;
    }

    const fem::FemResult r = fem::solve_lambda1(c, cfg.omega, cfg.h, cfg.R_out, opt);
    if (!cfg.mesh_out.empty()) {
        auto f = detail::open_output(cfg.mesh_out);
        r.mesh.write(f);
    }
    if (!cfg.eigen_out.empty()) {
        auto f = detail::open_output(cfg.eigen_out);
        fem::write_eigenpair_csv(f, r);
    }
    rep.doc = json{{"schema", kSchemaVersion},
                   {"command", "fem"},
                   {"mode", "single"},
                   {"contour", detail::to_json(cfg.contour)},
                   {"omega", cfg.omega},
                   {"h", cfg.h},
                   {"R_out", cfg.R_out},
                   {"outer", cfg.outer},
                   {"lambda1", r.lambda1},
                   {"residual", r.residual},
                   {"iterations", r.iterations},
                   {"eigenvalues_below", r.eigenvalues_below},
                   {"nodes", r.node_count},
                   {"triangles", r.triangle_count},
                   {"interface_pairs", r.interface_pairs},
                   {"dofs", r.dofs},
                   {"min_angle_deg", r.min_angle}};
    rep.csv_header = {"h", "R_out", "lambda1", "residual", "nodes", "triangles", "interface_pairs", "min_angle_deg"};
    rep.csv_rows.push_back({csv_number(cfg.h), csv_number(cfg.R_out), csv_number(r.lambda1), csv_number(r.residual),
                            std::to_string(r.node_count), std::to_string(r.triangle_count),
                            std::to_string(r.interface_pairs), csv_number(r.min_angle)});
    return rep;
}

inline Report cmd_verify_theorem(const RunConfig& cfg) {
    using detail::csv_number;
    const std::vector<ContourSpec> family = cfg.family.empty() ? default_family(cfg.contour.length) : cfg.family;
    const fem::FemOptions opt = fem_options(cfg);
    Report rep;
    rep.csv_header = {"contour", "lambda1_fem", "error_estimate", "domain_bound", "lambda1_circle", "margin",
                      "fem_le_bound", "bound_le_circle", "passed"};
    json entries = json::array();
    bool all_passed = true;
    for (const ContourSpec& spec : family) {
        const Contour c = build_contour(spec);
        const TheoremCertificate cert = theorem_certificate(c, cfg.omega);
        const fem::FemResult coarse = fem::solve_lambda1(c, cfg.omega, cfg.h, cfg.R_out, opt);
        double lambda_fem = coarse.lambda1;
        std::optional<fem::RichardsonEstimate> est;
        if (cfg.refine) {
            const fem::FemResult fine = fem::solve_lambda1(c, cfg.omega, 0.5 * cfg.h, cfg.R_out, opt);
            est = fem::richardson(coarse.lambda1, fine.lambda1);
            lambda_fem = fine.lambda1;
        }
        const bool fem_le_bound = lambda_fem <= cert.domain_bound + cfg.fem_slack;
        const bool bound_le_circle = cert.domain_bound <= cert.lambda1_circle + cfg.bound_slack;
        const bool passed = fem_le_bound && bound_le_circle;
        all_passed = all_passed && passed;
        json e{{"contour", detail::to_json(spec)},
               {"label", spec.label()},
               {"lambda1_fem", lambda_fem},
               {"fem_h", cfg.refine ? 0.5 * cfg.h : cfg.h}};
        e["error_estimate"] = est ? json(est->error_estimate) : json(nullptr);
        e["extrapolated"] = est ? json(est->extrapolated) : json(nullptr);
        e["domain_bound"] = cert.domain_bound;
        e["circle_bound"] = cert.circle_bound;
        e["lambda1_circle"] = cert.lambda1_circle;
        e["margin"] = cert.lambda1_circle - lambda_fem;
        e["bound_margin"] = cert.margin;
        e["in_radius"] = cert.in_radius;
        e["fem_le_bound"] = fem_le_bound;
        e["bound_le_circle"] = bound_le_circle;
        e["passed"] = passed;
        entries.push_back(e);
        rep.csv_rows.push_back({spec.label(), csv_number(lambda_fem), est ? csv_number(est->error_estimate) : "",
                                csv_number(cert.domain_bound), csv_number(cert.lambda1_circle),
                                csv_number(cert.lambda1_circle - lambda_fem), fem_le_bound ? "1" : "0",
                                bound_le_circle ? "1" : "0", passed ? "1" : "0"});
    }
    rep.doc = json{{"schema", kSchemaVersion}, {"command", "verify-theorem"}, {"omega", cfg.omega},
                   {"h", cfg.h},               {"R_out", cfg.R_out},          {"fem_slack", cfg.fem_slack},
                   {"bound_slack", cfg.bound_slack}, {"all_passed", all_passed}, {"contours", entries}};
    rep.exit_code = all_passed ? kExitOk : kExitTheorem;
    return rep;
}

// ---------------------------------------------------------------- parsing

inline constexpr const char* kCsvHelp = R"(CSV columns (--format csv):
  circle          R,omega,k_star,lambda1,residual,bracket_lower,bracket_upper,
                  indicator_bound,derivative_mismatch,jump_condition
  sweep           R,omega,k_star,lambda1,residual
  bound           contour,length,omega,in_radius,horizon,lambda1_circle,circle_quotient,
                  domain_quotient,numerator_gradient,numerator_jump,denominator,margin
  fem             h,R_out,lambda1,residual,nodes,triangles,interface_pairs,min_angle_deg
  fem --h-list    h,R_out,lambda1,error,observed_order,nodes
  verify-theorem  contour,lambda1_fem,error_estimate,domain_bound,lambda1_circle,margin,
                  fem_le_bound,bound_le_circle,passed
  --profile-out   side,t,A,L
  --eigen-out     node,x,y,side,value
Exit codes: 0 success, 1 config error, 2 numeric failure, 3 theorem assertion failure.)";

inline void add_common(CLI::App* sub, RunConfig& cfg, std::string& config_path) {
    sub->add_option("--config", config_path, "JSON config file; its values win over flags")->check(CLI::ExistingFile);
    sub->add_option("--omega", cfg.omega, "coupling strength")->capture_default_str();
    sub->add_option("--output,-o", cfg.output, "write the report here instead of stdout");
    sub->add_option("--format", cfg.format, "json or csv")->capture_default_str();
    sub->add_option("--tol", cfg.tol, "secular-equation residual tolerance")->capture_default_str();
}

inline void add_contour(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--contour", cfg.contour.type, "circle, ellipse or perturbed")->capture_default_str();
    sub->add_option("--length", cfg.contour.length, "contour length L")->capture_default_str();
    sub->add_option("--aspect", cfg.contour.aspect, "ellipse aspect ratio a/b")->capture_default_str();
    sub->add_option("--mode", cfg.contour.mode, "perturbation mode m")->capture_default_str();
    sub->add_option("--eps", cfg.contour.eps, "perturbation amplitude")->capture_default_str();
}

inline void add_fem(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--h", cfg.h, "target edge length on the interface")->capture_default_str();
    sub->add_option("--R_out", cfg.R_out, "radius of the truncation circle")->capture_default_str();
    sub->add_option("--fem-tol", cfg.fem_tol, "eigen residual tolerance")->capture_default_str();
    sub->add_option("--outer", cfg.outer, "outer boundary: dirichlet or natural")->capture_default_str();
}

inline void emit(const Report& rep, const RunConfig& cfg, std::ostream& out) {
    std::ostringstream buf;
    if (cfg.format == "csv") {
        detail::write_csv(buf, rep.csv_header, rep.csv_rows);
    } else {
        buf << rep.doc.dump(2) << '\n';
    }
    if (cfg.output.empty()) {
        out << buf.str();
    } else {
        auto f = detail::open_output(cfg.output);
        f << buf.str();
    }
}

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lowest eigenvalue of the attractive delta-prime interaction on closed planar contours", "dprime"};
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(1);
    app.footer(kCsvHelp);

    RunConfig cfg;
    std::string config_path;

    auto* circle = app.add_subcommand("circle", "exact circle eigenvalue and its checks");
    add_common(circle, cfg, config_path);
    circle->add_option("--R", cfg.R, "circle radius")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "circle eigenvalue over a range of radii");
    add_common(sweep, cfg, config_path);
    sweep->add_option("--r-min", cfg.r_min, "smallest radius (log-spaced sweep)")->capture_default_str();
    sweep->add_option("--r-max", cfg.r_max, "largest radius")->capture_default_str();
    sweep->add_option("--r-count", cfg.r_count, "number of radii")->capture_default_str();
    sweep->add_option("--radii", cfg.radii, "explicit ascending radii (overrides the range)");

    auto* bound = app.add_subcommand("bound", "parallel-coordinate upper bound for a contour");
    add_common(bound, cfg, config_path);
    add_contour(bound, cfg);
    bound->add_option("--T", cfg.T, "outer profile horizon (0: automatic)")->capture_default_str();
    bound->add_option("--grid", cfg.grid, "profile table intervals for --profile-out")->capture_default_str();
    bound->add_option("--profile-out", cfg.profile_out, "write the A/L profile tables as CSV");

    auto* femc = app.add_subcommand("fem", "finite-element eigenvalue for a contour");
    add_common(femc, cfg, config_path);
    add_contour(femc, cfg);
    add_fem(femc, cfg);
    femc->add_option("--h-list", cfg.h_list, "decreasing mesh sizes for a convergence table");
    femc->add_option("--R_out-list", cfg.r_out_list, "truncation radii for the convergence table");
    femc->add_option("--mesh-out", cfg.mesh_out, "write the mesh in the dprime-mesh text format");
    femc->add_option("--eigen-out", cfg.eigen_out, "write the eigenvector as CSV");

    auto* verify = app.add_subcommand("verify-theorem", "FEM, bound and circle eigenvalue over a contour family");
    add_common(verify, cfg, config_path);
    add_fem(verify, cfg);
    verify->add_option("--length", cfg.contour.length, "common contour length")->capture_default_str();
    verify->add_option("--fem-slack", cfg.fem_slack, "allowed excess of the FEM value over the bound")
        ->capture_default_str();
    verify->add_option("--bound-slack", cfg.bound_slack, "allowed excess of the bound over the circle value")
        ->capture_default_str();
    verify->add_option("--refine", cfg.refine, "also solve at h/2 and report a Richardson estimate")
        ->capture_default_str();

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    CLI::App* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();
    try {
        if (!config_path.empty()) detail::apply_config_file(config_path, cfg, sub, err);
        detail::validate(cfg);
        Report rep;
        if (cfg.command == "circle") rep = cmd_circle(cfg);
        else if (cfg.command == "sweep") rep = cmd_sweep(cfg);
        else if (cfg.command == "bound") rep = cmd_bound(cfg);
        else if (cfg.command == "fem") rep = cmd_fem(cfg);
        else rep = cmd_verify_theorem(cfg);
        emit(rep, cfg, out);
        if (rep.exit_code == kExitTheorem) err << "theorem assertion failed for at least one contour\n";
        return rep.exit_code;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    }
}

} // namespace dprime::app
