// kconf: command-line front end. Every subcommand writes one JSON report
// (stdout, or -o FILE). Exit codes: 0 yes/ok, 2 negative decision, 1 input error.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kconf/circlefield.hpp"
#include "kconf/conjugacy.hpp"
#include "kconf/errors.hpp"
#include "kconf/funcspace.hpp"
#include "kconf/geodesics.hpp"
#include "kconf/surface.hpp"

#ifndef KCONF_VERSION
#define KCONF_VERSION "0.0.0"
#endif

using json = nlohmann::ordered_json;
using namespace kconf;

namespace {

constexpr int kOk = 0, kError = 1, kNo = 2;

struct Config {
    std::string f, g, period = "2*pi", g_period, torus, torus2, out, csv;
    std::optional<double> tol;
    int kmax = 64;
    bool allow_reversal = false, no_scale = false, bruteforce = false;
    double t_max = 0;
    std::uint64_t seed = 1;
    int jobs = 1;
    int zero = 0;
    std::string side = "right";
    int samples = 33;
    int points = 1000;
    std::string state, integrals;
    int generators = 0;
    std::string commute, word;
    int radius = 3;
    double vx0 = 1.0;
    double y_window = std::numeric_limits<double>::infinity();
    std::string energy_sign = "space";
};

struct Outcome {
    json result;
    int code = kOk;
    json tolerances = json::object();
};

json conventions() {
    return {
        {"field", "X_{f,P} = f(y) d/dy on R/PZ"},
        {"orientation", "orientation-preserving unless allow_reversal; reversal compares with -f(-y)"},
        {"certificate", "lambda'_k = a lambda_{(k+shift) mod n}, mu' = mu / a"},
        {"metric", "f(y) dx^2 + 2 dx dy, Killing field d/dx"},
        {"curvature", "R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]; K = <R(X,Y)Y,X> / (<X,X><Y,Y> - <X,Y>^2) = f''/2"},
        {"saddle", "f_hat(t) = A^2 f(t/A + z), A = 2/f'(z); theta(0) = 1, u'(0) = -1"},
        {"embedding", "saddle metric 2 theta_S(uv) du dv, theta_S(w) = -(2/lambda) theta(-(2/lambda) w)"},
    };
}

PeriodicFunction function_f(const Config& c) {
    if (c.f.empty()) throw InvalidArgument("--f is required");
    return PeriodicFunction::parse(c.f, c.period);
}

PeriodicFunction function_g(const Config& c) {
    if (c.g.empty()) throw InvalidArgument("--g is required");
    return PeriodicFunction::parse(c.g, c.g_period.empty() ? c.period : c.g_period);
}

ZeroData pick_zero(const PeriodicFunction& f, int index) {
    const auto zs = find_zeros(f);
    if (zs.empty()) throw NoZeros("f has no zeros");
    if (index < 0 || index >= static_cast<int>(zs.size()))
        throw InvalidArgument("--zero must be in [0, " + std::to_string(zs.size()) + ")");
    return zs[static_cast<std::size_t>(index)];
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(parse_constant(item));
    return out;
}

GeodesicState parse_state(const Config& c, const RibbonMetric& m) {
    if (!c.integrals.empty()) {
        const auto v = parse_list(c.integrals);
        if (v.size() != 3) throw InvalidArgument("--integrals expects y,c,E");
        return state_from_integrals(m, v[0], v[1], v[2]);
    }
    const auto v = parse_list(c.state);
    if (v.size() != 4) throw InvalidArgument("--state expects x,y,vx,vy");
    return {v[0], v[1], v[2], v[3]};
}

json state_json(const GeodesicState& s) { return {{"x", s.x}, {"y", s.y}, {"vx", s.vx}, {"vy", s.vy}}; }

json zero_json(const ZeroData& z) { return {{"z", z.z}, {"lambda", z.lambda}, {"simple", z.simple}}; }

json cert_json(const MatchCertificate& m) {
    return {{"a", m.a}, {"shift", m.shift}, {"reversed", m.reversed}, {"kf", m.kf}, {"kg", m.kg}};
}

json list_json(const InvariantList& L) {
    return {{"n", L.n}, {"lambdas", L.lambdas}, {"mu", L.mu}, {"period", L.period},
            {"fundamental_period", L.fundamental_period}};
}

json words_json(const std::vector<CoxeterWord>& ws) {
    json a = json::array();
    for (const auto& w : ws) a.push_back(w);
    return a;
}

void write_csv_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream os(path);
    if (!os) throw InvalidArgument("cannot open " + path);
    body(os);
}

MatchTolerances match_tol(const Config& c) {
    MatchTolerances t;
    if (c.tol) t.lambda_rel = t.mu_rel = *c.tol;
    return t;
}

// --- subcommands -----------------------------------------------------------

Outcome cmd_invariants(const Config& c) {
    const CircleField X(function_f(c));
    const auto L = invariant_list(X);
    json zs = json::array();
    for (const auto& z : X.zeros()) zs.push_back(zero_json(z));
    Outcome o;
    o.result = list_json(L);
    o.result["cover"] = X.cover();
    o.result["zeros"] = zs;
    o.result["telescoping_defect"] = telescoping_defect(L);
    o.tolerances = {{"zero_tau_simple", ZeroOptions{}.tau_simple}};
    return o;
}

Outcome cmd_mu(const Config& c) {
    const CircleField X(function_f(c));
    Outcome o;
    const double m = mu(X);
    o.result = {{"mu", m}};
    if (c.bruteforce) {
        const double b = mu_bruteforce(X);
        o.result["mu_bruteforce"] = b;
        o.result["difference"] = std::abs(m - b);
        o.tolerances["eps_list"] = {1e-2, 1e-3, 1e-4, 1e-5};
    }
    return o;
}

Outcome cmd_equiv(const Config& c) {
    const CircleField X(function_f(c)), Y(function_g(c));
    const auto tol = match_tol(c);
    const auto cert = equivalent(X, Y, !c.no_scale, c.allow_reversal, tol);
    Outcome o;
    o.tolerances = {{"lambda_rel", tol.lambda_rel}, {"mu_rel", tol.mu_rel}};
    o.result = {{"equivalent", cert.has_value()},
                {"source", list_json(invariant_list(X))},
                {"target", list_json(invariant_list(Y))},
                {"certificate", cert ? cert_json(*cert) : json(nullptr)}};
    o.code = cert ? kOk : kNo;
    return o;
}

Outcome cmd_cover(const Config& c) {
    CoverOptions opt;
    opt.kmax = c.kmax;
    opt.allow_reversal = c.allow_reversal;
    const auto m = finite_cover_conformal(function_f(c), function_g(c), opt);
    Outcome o;
    o.tolerances = {{"kmax", c.kmax}, {"lambda_rel", MatchTolerances{}.lambda_rel}, {"mu_rel", MatchTolerances{}.mu_rel}};
    o.result = {{"conformal", m.has_value()}};
    if (m) {
        o.result["P"] = m->P;
        o.result["Q"] = m->Q;
        o.result["certificate"] = cert_json(m->cert);
    }
    o.code = m ? kOk : kNo;
    return o;
}

Outcome cmd_mehidi(const Config& c) {
    const double tol = c.tol.value_or(1e-8);
    const auto r = is_mehidi(function_f(c), tol);
    Outcome o;
    o.tolerances = {{"spread", tol}};
    o.result = {{"mehidi", r.lambda.has_value()},
                {"lambda", r.lambda ? json(*r.lambda) : json(nullptr)},
                {"multipliers", r.multipliers},
                {"spread", r.spread}};
    o.code = r.lambda ? kOk : kNo;
    return o;
}

Outcome cmd_match_cp(const Config& c) {
    const auto f = function_f(c);
    Outcome o;
    o.tolerances = {{"mehidi_spread", 1e-8}};
    try {
        const auto m = match_to_cp(f, f.period());
        if (m) {
            o.result = {{"b", m->b}, {"k", m->k}, {"a", m->a}};
            return o;
        }
        o.result = {{"b", nullptr}, {"reason", "no member of the family matches"}};
    } catch (const NotMehidi& e) {
        o.result = {{"b", nullptr}, {"reason", "NotMehidi"}, {"detail", e.what()}};
    } catch (const NoBracket& e) {
        o.result = {{"b", nullptr}, {"reason", "NoBracket"}, {"detail", e.what()}};
    }
    o.code = kNo;
    return o;
}

json diffeo_samples(const DiffeoMap& phi, int samples) {
    std::ostringstream os;
    phi.write_csv(os, samples);
    json rows = json::array();
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        const auto v = parse_list(line);
        if (v.size() == 3) rows.push_back({{"y", v[0]}, {"phi", v[1]}, {"dphi", v[2]}});
    }
    return rows;
}

Outcome cmd_linearize(const Config& c) {
    const auto f = function_f(c);
    const ZeroData z = pick_zero(f, c.zero);
    if (c.side != "left" && c.side != "right") throw InvalidArgument("--side must be left or right");
    const auto phi = linearize_at(f, z, c.side == "left" ? Side::Left : Side::Right);
    if (!c.csv.empty()) write_csv_file(c.csv, [&](std::ostream& os) { phi.write_csv(os, c.samples); });
    Outcome o;
    o.tolerances = {{"residual_bound", 1e-9}};
    o.result = {{"zero", zero_json(z)}, {"side", c.side},       {"lo", phi.lo()},
                {"hi", phi.hi()},      {"residual", phi.residual}, {"samples", diffeo_samples(phi, c.samples)}};
    return o;
}

Outcome cmd_conjugacy(const Config& c) {
    const CircleField X(function_f(c)), Y(function_g(c));
    const auto tol = match_tol(c);
    const auto cert = equivalent(X, Y, !c.no_scale, c.allow_reversal, tol);
    Outcome o;
    o.tolerances = {{"lambda_rel", tol.lambda_rel}, {"mu_rel", tol.mu_rel}, {"residual_bound", 1e-6}};
    if (!cert) {
        o.result = {{"equivalent", false}};
        o.code = kNo;
        return o;
    }
    const auto phi = build_conjugacy(X, Y, *cert);
    if (!c.csv.empty()) write_csv_file(c.csv, [&](std::ostream& os) { phi.write_csv(os, c.samples); });
    o.result = {{"equivalent", true},
                {"certificate", cert_json(*cert)},
                {"orientation", phi.orientation()},
                {"residual", phi.residual},
                {"closure_defect", phi.closure_defect},
                {"samples", diffeo_samples(phi, c.samples)}};
    return o;
}

CoxeterSystem group_from(const Config& c, json& desc) {
    if (!c.f.empty()) {
        const auto d = strip_decomposition(function_f(c));
        desc = {{"source", "strips"}, {"generators", d.strips.size()}, {"commuting", d.contiguity}};
        return CoxeterSystem(d);
    }
    if (c.generators <= 0) throw InvalidArgument("give --f or --generators");
    std::vector<std::pair<int, int>> pairs;
    std::istringstream in(c.commute);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        const auto dash = item.find('-');
        if (dash == std::string::npos) throw InvalidArgument("--commute expects pairs like 0-1,1-2");
        pairs.push_back({std::stoi(item.substr(0, dash)), std::stoi(item.substr(dash + 1))});
    }
    for (auto [a, b] : pairs)
        if (a < 0 || b < 0 || a >= c.generators || b >= c.generators || a == b)
            throw InvalidArgument("bad commuting pair " + std::to_string(a) + "-" + std::to_string(b));
    desc = {{"source", "explicit"}, {"generators", c.generators}, {"commuting", pairs}};
    return CoxeterSystem(c.generators, pairs);
}

Outcome cmd_strips(const Config& c) {
    const auto d = strip_decomposition(function_f(c));
    json strips = json::array();
    for (const auto& s : d.strips) strips.push_back({{"lo", s.lo}, {"hi", s.hi}, {"sign", s.sign}});
    json zs = json::array();
    for (const auto& z : d.zeros) zs.push_back(zero_json(z));
    Outcome o;
    o.result = {{"period", d.period}, {"zeros", zs}, {"strips", strips}, {"contiguity", d.contiguity}};
    return o;
}

Outcome cmd_word_nf(const Config& c) {
    json desc;
    const auto g = group_from(c, desc);
    CoxeterWord w;
    for (double v : parse_list(c.word)) {
        if (v != std::floor(v)) throw InvalidArgument("letters must be integers");
        w.push_back(static_cast<int>(v));
    }
    const auto nf = word_normal_form(w, g);
    Outcome o;
    o.result = {{"group", desc}, {"word", w}, {"normal_form", nf}, {"length", nf.size()}};
    return o;
}

Outcome cmd_charts(const Config& c) {
    json desc;
    const auto g = group_from(c, desc);
    const auto ws = enumerate_charts(g, c.radius);
    Outcome o;
    o.tolerances = {{"max_words", 2'000'000}};
    o.result = {{"group", desc}, {"radius", c.radius}, {"count", ws.size()}, {"words", words_json(ws)}};
    return o;
}

Outcome cmd_saddle(const Config& c) {
    const auto f = function_f(c);
    const ZeroData z = pick_zero(f, c.zero);
    const auto p = saddle_profile(f, z);
    json rows = json::array();
    const int n = std::max(c.samples, 2);
    for (int i = 0; i < n; ++i) {
        const double w = p.w_min() + (p.w_max() - p.w_min()) * i / (n - 1);
        rows.push_back({{"w", w}, {"theta", p(w)}});
    }
    Outcome o;
    o.tolerances = {{"residual_bound", 1e-8}};
    o.result = {{"zero", zero_json(z)}, {"A", p.A},         {"gauge", p.gauge},         {"t_lo", p.t_lo},
                {"t_hi", p.t_hi},       {"w_min", p.w_min()}, {"w_max", p.w_max()}, {"residual", p.residual},
                {"samples", rows}};
    return o;
}

Outcome cmd_embed(const Config& c) {
    const auto f = function_f(c);
    const ZeroData z = pick_zero(f, c.zero);
    const DominoEmbedding E(f, z);
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> ux(-1.5, 1.5), uy(0.0, 1.0);
    const int points = c.points;
    double worst = 0;
    json rows = json::array();
    for (int k = 0; k < points; ++k) {
        const double x = ux(rng), s = 0.9 * (2 * uy(rng) - 1);
        const double y = E.zero() + s * (s < 0 ? E.zero() - E.domino_lo() : E.domino_hi() - E.zero());
        const double r = E.pullback_residual(x, y);
        worst = std::max(worst, r);
        if (k < 8) {
            const auto uv = E(x, y);
            rows.push_back({{"x", x}, {"y", y}, {"u", uv[0]}, {"v", uv[1]}, {"residual", r}});
        }
    }
    Outcome o;
    o.tolerances = {{"fd_step", 1e-5}, {"residual_bound", 1e-5}};
    o.result = {{"zero", zero_json(z)},   {"lambda", E.lambda()}, {"domino", {E.domino_lo(), E.domino_hi()}},
                {"points", points},       {"seed", c.seed},       {"max_pullback_residual", worst},
                {"examples", rows}};
    return o;
}

Outcome cmd_geodesic(const Config& c) {
    const RibbonMetric m(function_f(c));
    const auto s0 = parse_state(c, m);
    GeodesicOptions opt;
    opt.tol = c.tol.value_or(1e-12);
    opt.y_window = c.y_window;
    const double T = c.t_max == 0 ? 50.0 : c.t_max;
    const auto tr = integrate_geodesic(m, s0, T, opt);
    if (!c.csv.empty()) write_csv_file(c.csv, [&](std::ostream& os) { tr.write_csv(os); });
    Outcome o;
    o.tolerances = {{"local_tol", opt.tol}, {"y_window", std::isfinite(opt.y_window) ? json(opt.y_window) : json("inf")}};
    o.result = {{"initial", state_json(s0)},
                {"t_end", T},
                {"status", to_string(tr.status)},
                {"incomplete", tr.incomplete()},
                {"t_reached", tr.t_reached},
                {"steps", tr.samples.size() - 1},
                {"clairaut0", tr.clairaut0},
                {"energy0", tr.energy0},
                {"clairaut_drift", tr.clairaut_drift},
                {"energy_drift", tr.energy_drift},
                {"final", state_json(tr.final_state())}};
    return o;
}

Outcome cmd_conjugate(const Config& c) {
    const auto f = function_f(c);
    const RibbonMetric m(f);
    const double T = c.t_max == 0 ? 30.0 : c.t_max;
    const double tol = c.tol.value_or(1e-12);
    Outcome o;
    o.tolerances = {{"local_tol", tol}, {"t_start", 1e-6}, {"bisection", 1e-8}};
    if (!c.state.empty() || !c.integrals.empty()) {
        const auto s0 = parse_state(c, m);
        const auto t = first_conjugate_point(m, s0, T, tol);
        if (!c.csv.empty()) {
            JacobiState j0;
            j0.dJ = unit_normal(m, s0);
            const auto run = integrate_jacobi(m, s0, j0, T, tol);
            write_csv_file(c.csv, [&](std::ostream& os) { run.write_csv(os); });
        }
        o.result = {{"initial", state_json(s0)}, {"energy", energy(m, s0)}, {"t_max", T},
                    {"conjugate_point", t ? json(*t) : json(nullptr)}};
        return o;
    }
    // Exploratory sampling: no pass/fail, only a record of what was seen.
    int sign = 0;
    if (c.energy_sign == "space") sign = 1;
    else if (c.energy_sign == "time") sign = -1;
    else if (c.energy_sign != "any") throw InvalidArgument("--energy-sign must be space, time or any");
    const int n = c.samples;
    const auto states = sample_complete_states(f, n, c.seed, sign);
    std::vector<std::optional<double>> found(states.size());
    std::vector<std::string> errors(states.size());
    const auto work = [&](std::size_t begin, std::size_t step) {
        for (std::size_t i = begin; i < states.size(); i += step) {
            try {
                found[i] = first_conjugate_point(m, states[i], T, tol);
            } catch (const Error& e) {
                errors[i] = e.kind();
            }
        }
    };
    const int jobs = std::max(1, c.jobs);
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(work, static_cast<std::size_t>(j), static_cast<std::size_t>(jobs));
    work(0, static_cast<std::size_t>(jobs));
    for (auto& th : pool) th.join();
    json rows = json::array();
    int with = 0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        with += found[i].has_value();
        json r = {{"initial", state_json(states[i])}, {"energy", energy(m, states[i])},
                  {"conjugate_point", found[i] ? json(*found[i]) : json(nullptr)}};
        if (!errors[i].empty()) r["error"] = errors[i];
        rows.push_back(r);
    }
    o.result = {{"exploratory", true}, {"seed", c.seed},   {"samples", n},     {"energy_sign", c.energy_sign},
                {"t_max", T},          {"with_conjugate_point", with}, {"runs", rows}};
    return o;
}

Outcome cmd_lightlike(const Config& c) {
    const auto f = function_f(c);
    const ZeroData z = pick_zero(f, c.zero);
    const RibbonMetric m(f);
    const auto r = lightlike_incompleteness(m, z, c.vx0);
    Outcome o;
    o.tolerances = {{"cross_check", 1e-3}, {"local_tol", 1e-12}};
    o.result = {{"zero", zero_json(z)},
                {"vx0", c.vx0},
                {"incomplete", r.incomplete},
                {"backward_incomplete", r.backward_incomplete},
                {"horizon", std::isfinite(r.horizon) ? json(r.horizon) : json(nullptr)}};
    if (std::isfinite(r.horizon)) {
        const auto tr = integrate_geodesic(m, {0, z.z, c.vx0, 0}, 2 * r.horizon);
        o.result["integrator"] = {{"status", to_string(tr.status)},
                                  {"t_reached", tr.t_reached},
                                  {"horizon_error", std::abs(tr.t_reached - r.horizon)}};
    }
    return o;
}

double json_number(const json& v, const char* what) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_constant(v.get<std::string>());
    throw InvalidArgument(std::string("torus: ") + what + " must be a number or a constant expression");
}

TorusModel load_torus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("torus JSON: ") + e.what());
    }
    if (!j.contains("f") || !j["f"].contains("expr")) throw InvalidArgument("torus JSON needs f.expr");
    std::string fp = "2*pi";
    if (j["f"].contains("period")) {
        const auto& v = j["f"]["period"];
        if (v.is_string()) {
            fp = v.get<std::string>();
        } else if (v.is_number()) {
            std::ostringstream os;
            os.precision(17);
            os << v.get<double>();
            fp = os.str();
        } else {
            throw InvalidArgument("torus: f.period must be a number or a string");
        }
    }
    const auto f = PeriodicFunction::parse(j["f"]["expr"].get<std::string>(), fp);
    const double P = j.contains("period") ? json_number(j["period"], "period") : f.period();
    return TorusModel(f, P, j.contains("orbit_length") ? json_number(j["orbit_length"], "orbit_length") : 1.0,
                      j.contains("twist") ? json_number(j["twist"], "twist") : 0.0, j.value("reeb", false));
}

json torus_json(const TorusModel& T) {
    return {{"f", to_string(T.f.expr())}, {"f_period", T.f.period()}, {"period", T.P},
            {"orbit_length", T.orbit_length}, {"twist", T.twist}, {"reeb", T.reeb}};
}

Outcome cmd_torus(const Config& c) {
    if (c.torus.empty()) throw InvalidArgument("--torus is required");
    const auto T = load_torus(c.torus);
    Outcome o;
    o.tolerances = {{"kmax", c.kmax}, {"lambda_rel", MatchTolerances{}.lambda_rel}, {"mu_rel", MatchTolerances{}.mu_rel}};
    const auto X = torus_invariant(T);
    o.result = {{"torus", torus_json(T)}, {"invariant", list_json(invariant_list(X))}};
    if (T.reeb) {
        const auto r = classify_reeb_mehidi(T);
        o.result["reeb"] = {{"mehidi", r.mehidi.lambda.has_value()},
                            {"multipliers", r.mehidi.multipliers},
                            {"b", r.b ? json(*r.b) : json(nullptr)},
                            {"match", r.match ? json{{"b", r.match->b}, {"k", r.match->k}, {"a", r.match->a}}
                                              : json(nullptr)}};
    }
    if (!c.torus2.empty()) {
        const auto T2 = load_torus(c.torus2);
        const auto cmp = tori_K_conformal(T, T2, c.kmax);
        json fc = nullptr;
        if (cmp.finite_cover)
            fc = {{"P", cmp.finite_cover->P}, {"Q", cmp.finite_cover->Q},
                  {"certificate", cert_json(cmp.finite_cover->cert)}};
        o.result["other"] = torus_json(T2);
        o.result["comparison"] = {{"direct", cmp.direct ? cert_json(*cmp.direct) : json(nullptr)},
                                  {"finite_cover", fc},
                                  {"same_model_isometric", cmp.same_model_isometric}};
        o.code = cmp.direct || cmp.finite_cover ? kOk : kNo;
    }
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    Config cfg;
    CLI::App app{"Hyperbolic circle fields, Lorentzian tori with a Killing field, and their geometry"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(KCONF_VERSION));

    struct Entry {
        const char* name;
        const char* help;
        Outcome (*run)(const Config&);
    };
    const std::vector<Entry> entries = {
        {"invariants", "zeros, multipliers and mu of X_{f,P}", cmd_invariants},
        {"mu", "regularized integral of 1/f", cmd_mu},
        {"equiv", "decide whether X_f and a X_g are conjugate", cmd_equiv},
        {"cover-conformal", "search finite covers for a conformal match", cmd_cover},
        {"mehidi", "do all multipliers share one absolute value?", cmd_mehidi},
        {"match-cp", "locate f in the family sin(y)(1 + b sin(y))", cmd_match_cp},
        {"linearize", "linearizing chart at a zero", cmd_linearize},
        {"conjugacy", "build the conjugating diffeomorphism", cmd_conjugacy},
        {"strips", "strip decomposition and contiguity", cmd_strips},
        {"word-nf", "normal form of a word in the strip group", cmd_word_nf},
        {"charts", "all group elements up to a word length", cmd_charts},
        {"saddle", "saddle profile theta at a zero", cmd_saddle},
        {"embed", "embed the domino around a zero into the saddle", cmd_embed},
        {"geodesic", "integrate a geodesic of f dx^2 + 2 dx dy", cmd_geodesic},
        {"conjugate", "first conjugate point (one state, or seeded samples)", cmd_conjugate},
        {"lightlike", "completeness of the closed lightlike geodesic y = z", cmd_lightlike},
        {"torus-classify", "invariants and comparison of tori", cmd_torus},
    };

    std::vector<std::pair<CLI::App*, const Entry*>> subs;
    for (const auto& e : entries) {
        auto* s = app.add_subcommand(e.name, e.help);
        s->add_option("--f", cfg.f, "expression in one variable");
        s->add_option("--g", cfg.g, "second expression");
        s->add_option("--period", cfg.period, "period of f (constant expression)")->capture_default_str();
        s->add_option("--g-period", cfg.g_period, "period of g (defaults to --period)");
        s->add_option("--torus", cfg.torus, "torus JSON file");
        s->add_option("--torus2", cfg.torus2, "second torus JSON file");
        s->add_option("--tol", cfg.tol, "tolerance override")->check(CLI::PositiveNumber);
        s->add_option("--kmax", cfg.kmax, "largest cover multiplicity")->capture_default_str()->check(CLI::PositiveNumber);
        s->add_flag("--allow-reversal", cfg.allow_reversal, "also try orientation-reversing maps");
        s->add_flag("--no-scale", cfg.no_scale, "require a = 1");
        s->add_option("--t-max", cfg.t_max, "integration length");
        s->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
        s->add_option("-o,--output", cfg.out, "write the JSON report here");
        s->add_option("--jobs", cfg.jobs, "worker threads for sampled runs")->capture_default_str()->check(CLI::PositiveNumber);
        s->add_option("--zero", cfg.zero, "zero index in [0, P)")->capture_default_str();
        s->add_option("--side", cfg.side, "left | right")->capture_default_str();
        s->add_option("--samples", cfg.samples, "sample count")->capture_default_str()->check(CLI::PositiveNumber);
        s->add_option("--points", cfg.points, "random points for embed")->capture_default_str()->check(CLI::PositiveNumber);
        s->add_option("--csv", cfg.csv, "write samples/trajectory as CSV");
        s->add_option("--state", cfg.state, "x,y,vx,vy");
        s->add_option("--integrals", cfg.integrals, "y,c,E (state on the bounded branch)");
        s->add_option("--generators", cfg.generators, "number of generators");
        s->add_option("--commute", cfg.commute, "commuting pairs, e.g. 0-1,1-2");
        s->add_option("--word", cfg.word, "letters, e.g. 0,1,0");
        s->add_option("--radius", cfg.radius, "word length bound")->capture_default_str();
        s->add_option("--vx0", cfg.vx0, "initial x-velocity")->capture_default_str();
        s->add_option("--y-window", cfg.y_window, "stop when |y| exceeds this");
        s->add_option("--energy-sign", cfg.energy_sign, "space | time | any")->capture_default_str();
        if (std::string(e.name) == "mu") s->add_flag("--bruteforce", cfg.bruteforce, "also run the epsilon-limit");
        subs.push_back({s, &e});
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kError;
    }

    const Entry* chosen = nullptr;
    for (auto& [s, e] : subs)
        if (s->parsed()) chosen = e;

    json report = {{"tool", "kconf"}, {"version", KCONF_VERSION}, {"command", chosen->name}, {"conventions", conventions()}};
    int code = kOk;
    try {
        Outcome o = chosen->run(cfg);
        report["tolerances"] = o.tolerances;
        report["input"] = {{"f", cfg.f}, {"g", cfg.g}, {"period", cfg.period}, {"seed", cfg.seed}};
        report["result"] = o.result;
        code = o.code;
    } catch (const Error& e) {
        report["error"] = {{"kind", e.kind()}, {"message", e.what()}};
        code = kError;
    } catch (const std::exception& e) {
        report["error"] = {{"kind", "InvalidArgument"}, {"message", e.what()}};
        code = kError;
    }
    report["exit_code"] = code;

    const std::string text = report.dump(2) + "\n";
    if (cfg.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream os(cfg.out);
        if (!os) {
            std::cerr << "cannot open " << cfg.out << "\n";
            return kError;
        }
        os << text;
    }
    return code;
}
