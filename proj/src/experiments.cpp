#include "zk/experiments.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "zk/dyadic.hpp"
#include "zk/normal_form.hpp"
#include "zk/variational.hpp"

#ifndef ZK_VERSION
#define ZK_VERSION "0.0.0"
#endif

namespace zk {

const char* version_string() { return ZK_VERSION; }

namespace {

std::string located(const std::string& msg, const std::string& key, int line, int col, const std::string& file) {
    std::ostringstream os;
    if (!file.empty()) os << file << ": ";
    if (line > 0) os << "line " << line << ", column " << col << ": ";
    if (!key.empty()) os << "'" << key << "': ";
    os << msg;
    return os.str();
}

}  // namespace

ConfigError::ConfigError(const std::string& msg, std::string k, int l, int c, std::string f)
    : std::runtime_error(located(msg, k, l, c, f)), message(msg), key(std::move(k)), file(std::move(f)), line(l), column(c) {}

const char* to_string(InitialKind k) {
    switch (k) {
        case InitialKind::ground_state_scaled: return "ground_state_scaled";
        case InitialKind::gaussian: return "gaussian";
        case InitialKind::custom_file: return "custom_file";
    }
    return "?";
}

bool ScenarioConfig::wants(const std::string& format) const {
    return std::find(output.formats.begin(), output.formats.end(), format) != output.formats.end();
}

// ---------------------------------------------------------------- parsing

namespace {

const char* potential_name(PotentialFamily::Kind k) {
    switch (k) {
        case PotentialFamily::zero: return "zero";
        case PotentialFamily::free_wave: return "free_wave";
        case PotentialFamily::ground_state_static: return "ground_state_static";
    }
    return "?";
}

// a mapping whose keys are consumed one by one; leftovers are errors
class Section {
public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) fail(path_.empty() ? "top level" : path_, "expected a mapping", node_);
    }

    template <class T>
    void get(const char* key, T& out) {
        used_.insert(key);
        if (!present()) return;
        const YAML::Node v = node_[key];
        if (!v) return;
        if (!v.IsScalar()) fail(full(key), "expected a scalar", v);
        try {
            out = v.as<T>();
        } catch (const YAML::Exception&) {
            fail(full(key), std::string("cannot read '") + v.Scalar() + "' as " + type_name<T>(), v);
        }
    }

    void get_list(const char* key, std::vector<double>& out) {
        used_.insert(key);
        if (!present()) return;
        const YAML::Node v = node_[key];
        if (!v) return;
        if (!v.IsSequence()) fail(full(key), "expected a list of numbers", v);
        out.clear();
        for (const auto& item : v) {
            try {
                out.push_back(item.as<double>());
            } catch (const YAML::Exception&) {
                fail(full(key), "list entry '" + (item.IsScalar() ? item.Scalar() : std::string("?")) + "' is not a number", item);
            }
        }
    }

    void get_strings(const char* key, std::vector<std::string>& out) {
        used_.insert(key);
        if (!present()) return;
        const YAML::Node v = node_[key];
        if (!v) return;
        if (!v.IsSequence()) fail(full(key), "expected a list of strings", v);
        out.clear();
        for (const auto& item : v) {
            if (!item.IsScalar()) fail(full(key), "list entries must be strings", item);
            out.push_back(item.Scalar());
        }
    }

    Section sub(const char* key) {
        used_.insert(key);
        if (!present()) return Section(YAML::Node(), full(key));
        return Section(node_[key], full(key));
    }

    int line_of(const char* key) const {
        if (!present() || !node_[key]) return 0;
        return node_[key].Mark().line + 1;
    }

    void finish() const {
        if (!present()) return;
        for (const auto& kv : node_) {
            const std::string k = kv.first.Scalar();
            if (!used_.count(k)) fail(full(k), "unknown key", kv.first);
        }
    }

    std::string full(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    [[noreturn]] static void fail(const std::string& key, const std::string& msg, const YAML::Node& at) {
        const auto m = at.Mark();
        throw ConfigError(msg, key, m.line >= 0 ? m.line + 1 : 0, m.column >= 0 ? m.column + 1 : 0);
    }

private:
    bool present() const { return node_ && node_.IsMap(); }

    template <class T>
    static const char* type_name() {
        if constexpr (std::is_same_v<T, bool>) return "a boolean";
        if constexpr (std::is_integral_v<T>) return "an integer";
        if constexpr (std::is_floating_point_v<T>) return "a number";
        return "a string";
    }

    YAML::Node node_;
    std::string path_;
    std::set<std::string> used_;
};

// position lookup for validation messages after parsing
struct Positions {
    YAML::Node root;
    std::pair<int, int> of(const std::string& dotted) const {
        if (!root || !root.IsMap()) return {0, 0};
        YAML::Node cur;
        cur.reset(root);
        std::stringstream ss(dotted);
        std::string part;
        YAML::Mark mark;
        bool found = true;
        while (std::getline(ss, part, '.')) {
            if (!cur.IsMap() || !cur[part]) {
                found = false;
                break;
            }
            const YAML::Node next = cur[part];
            cur.reset(next);
            mark = cur.Mark();
        }
        if (!found) return {0, 0};
        return {mark.line + 1, mark.column + 1};
    }
};

void require(bool ok, const std::string& key, const std::string& msg, const Positions* pos) {
    if (ok) return;
    auto [l, c] = pos ? pos->of(key) : std::pair<int, int>{0, 0};
    throw ConfigError(msg, key, l, c);
}

bool finite(double v) { return std::isfinite(v); }

void validate_impl(const ScenarioConfig& c, const Positions* p) {
    require(c.grid.n >= 16 && c.grid.n <= 8192, "grid.n", "must lie in [16, 8192]", p);
    require(finite(c.grid.r_max) && c.grid.r_max > 0, "grid.r_max", "must be positive and finite", p);
    require(finite(c.time.dt) && c.time.dt > 0, "time.dt", "must be positive and finite", p);
    require(finite(c.time.t_end) && c.time.t_end > 0, "time.t_end", "must be positive and finite", p);
    require(c.time.t_end / c.time.dt <= 1e8, "time.t_end", "more than 1e8 steps requested", p);
    require(finite(c.time.dt_floor) && c.time.dt_floor > 0 && c.time.dt_floor <= c.time.dt, "time.dt_floor", "must lie in (0, dt]", p);
    require(finite(c.time.drift_tol) && c.time.drift_tol > 0, "time.drift_tol", "must be positive", p);
    require(c.time.check_every >= 1, "time.check_every", "must be >= 1", p);
    require(finite(c.time.ceiling_grad) && c.time.ceiling_grad > 1, "time.ceiling_grad", "must exceed 1", p);
    require(finite(c.alpha) && c.alpha >= 0, "alpha", "must be finite and >= 0", p);
    require(finite(c.sponge.start) && c.sponge.start > 0 && c.sponge.start < 1, "sponge.start", "must lie in (0, 1)", p);
    require(finite(c.sponge.strength) && c.sponge.strength >= 0, "sponge.strength", "must be >= 0", p);
    const auto& i = c.initial;
    require(finite(i.lambda), "initial.lambda", "must be finite", p);
    require(finite(i.mu) && i.mu > 0, "initial.mu", "must be positive", p);
    require(finite(i.amplitude), "initial.amplitude", "must be finite", p);
    require(finite(i.width) && i.width > 0, "initial.width", "must be positive", p);
    require(finite(i.phase), "initial.phase", "must be finite", p);
    require(finite(i.n_amplitude), "initial.n_amplitude", "must be finite", p);
    require(finite(i.n_width) && i.n_width > 0, "initial.n_width", "must be positive", p);
    require(i.kind != InitialKind::custom_file || !i.file.empty(), "initial.file", "required for kind custom_file", p);
    require(finite(c.potential.mass_fraction) && c.potential.mass_fraction >= 0, "potential.mass", "must be >= 0", p);
    require(finite(c.potential.lambda) && c.potential.lambda > 0, "potential.lambda", "must be positive", p);
    require(finite(c.potential.width) && c.potential.width > 0, "potential.width", "must be positive", p);
    const auto& d = c.diagnostics;
    require(d.stride >= 1, "diagnostics.stride", "must be >= 1", p);
    require(finite(d.R_local) && d.R_local > 0, "diagnostics.R_local", "must be positive", p);
    require(finite(d.virial_R) && d.virial_R >= 0, "diagnostics.virial_R", "must be >= 0 (0 disables)", p);
    require(finite(d.s_decay) && d.s_decay >= 0 && d.s_decay < 2, "diagnostics.s_decay", "must lie in [0, 2)", p);
    require(finite(d.store_every) && d.store_every > 0, "diagnostics.store_every", "must be positive", p);
    const auto& v = c.verdict;
    require(finite(v.local_fraction) && v.local_fraction > 0 && v.local_fraction <= 1, "verdict.local_fraction", "must lie in (0, 1]", p);
    require(finite(v.lp_fraction) && v.lp_fraction > 0 && v.lp_fraction <= 1, "verdict.lp_fraction", "must lie in (0, 1]", p);
    require(finite(v.bounded_factor) && v.bounded_factor > 1, "verdict.bounded_factor", "must exceed 1", p);
    static const std::set<std::string> sweepable = {"lambda", "mu", "amplitude", "width", "n_amplitude", "dt", "alpha"};
    require(c.sweep.parameter.empty() || sweepable.count(c.sweep.parameter), "sweep.parameter",
            "must be one of lambda, mu, amplitude, width, n_amplitude, dt, alpha", p);
    for (double x : c.sweep.values) require(finite(x), "sweep.values", "entries must be finite", p);
    if (c.sweep.parameter == "dt")
        for (double x : c.sweep.values) require(x > 0, "sweep.values", "dt values must be positive", p);
    const auto& q = c.probe;
    require(finite(q.delta) && q.delta >= 0 && q.delta < kDeltaStar, "probe.delta", "must lie in [0, 3/7)", p);
    require(q.ensemble >= 1 && q.ensemble <= 4096, "probe.ensemble", "must lie in [1, 4096]", p);
    require(!q.horizons.empty(), "probe.horizons", "must not be empty", p);
    for (std::size_t k = 0; k < q.horizons.size(); ++k)
        require(finite(q.horizons[k]) && q.horizons[k] > 0 && (k == 0 || q.horizons[k] > q.horizons[k - 1]), "probe.horizons",
                "must be positive and strictly increasing", p);
    require(finite(q.dt) && q.dt > 0, "probe.dt", "must be positive", p);
    require(finite(q.sample_every) && q.sample_every > 0, "probe.sample_every", "must be positive", p);
    require(finite(q.band_lo) && finite(q.band_hi) && q.band_lo > 0 && q.band_hi > q.band_lo, "probe.band_lo", "need 0 < band_lo < band_hi", p);
    require(!c.output.dir.empty(), "output.dir", "must not be empty", p);
    for (const auto& f : c.output.formats) require(f == "csv" || f == "json", "output.formats", "entries must be csv or json", p);
}

template <class E>
E parse_enum(Section& s, const char* key, const std::vector<std::pair<const char*, E>>& table, E current, const YAML::Node& raw) {
    std::string name;
    for (const auto& [n, e] : table)
        if (e == current) name = n;
    s.get(key, name);
    for (const auto& [n, e] : table)
        if (name == n) return e;
    std::string allowed;
    for (const auto& [n, e] : table) allowed += (allowed.empty() ? "" : ", ") + std::string(n);
    const YAML::Node at = raw && raw.IsMap() && raw[key] ? raw[key] : raw;
    Section::fail(s.full(key), "unknown value '" + name + "' (expected one of " + allowed + ")", at ? at : YAML::Node());
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(e.msg, "", e.mark.line + 1, e.mark.column + 1);
    }
    ScenarioConfig c;
    Section top(root, "");

    Section grid = top.sub("grid");
    grid.get("n", c.grid.n);
    grid.get("r_max", c.grid.r_max);
    grid.finish();

    Section time = top.sub("time");
    time.get("dt", c.time.dt);
    time.get("t_end", c.time.t_end);
    time.get("adaptive", c.time.adaptive);
    time.get("dt_floor", c.time.dt_floor);
    time.get("drift_tol", c.time.drift_tol);
    time.get("check_every", c.time.check_every);
    time.get("ceiling_grad", c.time.ceiling_grad);
    time.finish();

    c.mode = parse_enum<EvolutionMode>(top, "mode",
                                       {{"full", EvolutionMode::full},
                                        {"linear_potential", EvolutionMode::linear_potential},
                                        {"free", EvolutionMode::free}},
                                       c.mode, root);
    top.get("alpha", c.alpha);

    Section sp = top.sub("sponge");
    sp.get("enabled", c.sponge.enabled);
    sp.get("start", c.sponge.start);
    sp.get("strength", c.sponge.strength);
    sp.get("damp_wave", c.sponge.damp_wave);
    sp.finish();

    const YAML::Node raw_initial = root && root.IsMap() ? root["initial"] : YAML::Node();
    Section in = top.sub("initial");
    c.initial.kind = parse_enum<InitialKind>(in, "kind",
                                             {{"ground_state_scaled", InitialKind::ground_state_scaled},
                                              {"gaussian", InitialKind::gaussian},
                                              {"custom_file", InitialKind::custom_file}},
                                             c.initial.kind, raw_initial);
    in.get("lambda", c.initial.lambda);
    in.get("mu", c.initial.mu);
    in.get("amplitude", c.initial.amplitude);
    in.get("width", c.initial.width);
    in.get("phase", c.initial.phase);
    in.get("n_amplitude", c.initial.n_amplitude);
    in.get("n_width", c.initial.n_width);
    in.get("truncation", c.initial.truncation);
    in.get("file", c.initial.file);
    in.finish();

    const YAML::Node raw_pot = root && root.IsMap() ? root["potential"] : YAML::Node();
    Section pot = top.sub("potential");
    c.potential.kind = parse_enum<PotentialFamily::Kind>(pot, "kind",
                                                         {{"zero", PotentialFamily::zero},
                                                          {"free_wave", PotentialFamily::free_wave},
                                                          {"ground_state_static", PotentialFamily::ground_state_static}},
                                                         c.potential.kind, raw_pot);
    pot.get("mass", c.potential.mass_fraction);
    pot.get("lambda", c.potential.lambda);
    pot.get("width", c.potential.width);
    pot.finish();

    Section dg = top.sub("diagnostics");
    dg.get("stride", c.diagnostics.stride);
    dg.get("R_local", c.diagnostics.R_local);
    dg.get("virial_R", c.diagnostics.virial_R);
    dg.get("s_decay", c.diagnostics.s_decay);
    dg.get("store_trajectory", c.diagnostics.store_trajectory);
    dg.get("store_every", c.diagnostics.store_every);
    dg.finish();

    Section vd = top.sub("verdict");
    vd.get("local_fraction", c.verdict.local_fraction);
    vd.get("lp_fraction", c.verdict.lp_fraction);
    vd.get("bounded_factor", c.verdict.bounded_factor);
    vd.finish();

    Section sw = top.sub("sweep");
    sw.get("parameter", c.sweep.parameter);
    sw.get_list("values", c.sweep.values);
    sw.finish();

    Section pr = top.sub("probe");
    pr.get("delta", c.probe.delta);
    pr.get("ensemble", c.probe.ensemble);
    pr.get_list("horizons", c.probe.horizons);
    pr.get("dt", c.probe.dt);
    pr.get("sample_every", c.probe.sample_every);
    pr.get("sponge", c.probe.sponge);
    pr.get("band_lo", c.probe.band_lo);
    pr.get("band_hi", c.probe.band_hi);
    pr.get("baseline", c.probe.baseline);
    pr.finish();

    Section out = top.sub("output");
    out.get("dir", c.output.dir);
    out.get_strings("formats", c.output.formats);
    out.finish();

    top.get("seed", c.seed);
    top.finish();

    Positions pos{root};
    validate_impl(c, &pos);
    return c;
}

void validate(const ScenarioConfig& cfg) { validate_impl(cfg, nullptr); }

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        ScenarioConfig c = parse_config(ss.str());
        c.base_dir = std::filesystem::path(path).parent_path().string();
        return c;
    } catch (const ConfigError& e) {
        throw ConfigError(e.message, e.key, e.line, e.column, path);
    }
}

nlohmann::ordered_json config_to_json(const ScenarioConfig& c) {
    using J = nlohmann::ordered_json;
    J j;
    j["grid"] = J{{"n", c.grid.n}, {"r_max", c.grid.r_max}};
    j["time"] = J{{"dt", c.time.dt},
                  {"t_end", c.time.t_end},
                  {"adaptive", c.time.adaptive},
                  {"dt_floor", c.time.dt_floor},
                  {"drift_tol", c.time.drift_tol},
                  {"check_every", c.time.check_every},
                  {"ceiling_grad", c.time.ceiling_grad}};
    j["mode"] = to_string(c.mode);
    j["alpha"] = c.alpha;
    j["sponge"] = J{{"enabled", c.sponge.enabled}, {"start", c.sponge.start}, {"strength", c.sponge.strength}, {"damp_wave", c.sponge.damp_wave}};
    j["initial"] = J{{"kind", to_string(c.initial.kind)},
                     {"lambda", c.initial.lambda},
                     {"mu", c.initial.mu},
                     {"amplitude", c.initial.amplitude},
                     {"width", c.initial.width},
                     {"phase", c.initial.phase},
                     {"n_amplitude", c.initial.n_amplitude},
                     {"n_width", c.initial.n_width},
                     {"truncation", c.initial.truncation},
                     {"file", c.initial.file}};
    j["potential"] = J{{"kind", potential_name(c.potential.kind)},
                       {"mass", c.potential.mass_fraction},
                       {"lambda", c.potential.lambda},
                       {"width", c.potential.width}};
    j["diagnostics"] = J{{"stride", c.diagnostics.stride},
                         {"R_local", c.diagnostics.R_local},
                         {"virial_R", c.diagnostics.virial_R},
                         {"s_decay", c.diagnostics.s_decay},
                         {"store_trajectory", c.diagnostics.store_trajectory},
                         {"store_every", c.diagnostics.store_every}};
    j["verdict"] = J{{"local_fraction", c.verdict.local_fraction}, {"lp_fraction", c.verdict.lp_fraction}, {"bounded_factor", c.verdict.bounded_factor}};
    j["sweep"] = J{{"parameter", c.sweep.parameter}, {"values", c.sweep.values}};
    j["probe"] = J{{"delta", c.probe.delta},
                   {"ensemble", c.probe.ensemble},
                   {"horizons", c.probe.horizons},
                   {"dt", c.probe.dt},
                   {"sample_every", c.probe.sample_every},
                   {"sponge", c.probe.sponge},
                   {"band_lo", c.probe.band_lo},
                   {"band_hi", c.probe.band_hi},
                   {"baseline", c.probe.baseline}};
    j["output"] = J{{"dir", c.output.dir}, {"formats", c.output.formats}};
    j["seed"] = c.seed;
    return j;
}

// ---------------------------------------------------------------- scenario set-up

GridPtr scenario_grid(const ScenarioConfig& cfg) { return make_grid(cfg.grid.n, cfg.grid.r_max); }

namespace {

struct Sample5 {
    double r;
    cplx u, N;
};

std::vector<Sample5> read_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open initial data file '" + path + "'");
    std::vector<Sample5> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double v[5];
        int k = 0;
        while (k < 5 && ss >> v[k]) ++k;
        if (k == 0 && ss.eof()) continue;
        std::string extra;
        if (k != 5 || (ss >> extra))
            throw ConfigError("expected 5 numeric columns r, Re u, Im u, Re N, Im N", path, lineno, 1);
        for (double x : v)
            if (!std::isfinite(x)) throw ConfigError("non-finite value", path, lineno, 1);
        if (!rows.empty() && !(v[0] > rows.back().r)) throw ConfigError("r must increase strictly", path, lineno, 1);
        rows.push_back({v[0], {v[1], v[2]}, {v[3], v[4]}});
    }
    if (rows.size() < 2) throw ConfigError("need at least two rows", path, 0, 0);
    return rows;
}

// linear interpolation, constant below the first node and zero past the last
ZakharovState interpolate_profile(const GridPtr& g, const std::vector<Sample5>& rows) {
    ZakharovState s{RadialField(g), RadialField(g), 0};
    std::size_t j = 0;
    for (std::size_t k = 0; k < g->r.size(); ++k) {
        const double r = g->r[k];
        if (r <= rows.front().r) {
            s.u.values[k] = rows.front().u;
            s.N.values[k] = rows.front().N;
            continue;
        }
        if (r > rows.back().r) continue;
        while (rows[j + 1].r < r) ++j;
        const double a = (r - rows[j].r) / (rows[j + 1].r - rows[j].r);
        s.u.values[k] = (1 - a) * rows[j].u + a * rows[j + 1].u;
        s.N.values[k] = (1 - a) * rows[j].N + a * rows[j + 1].N;
    }
    return s;
}

}  // namespace

ZakharovState initial_state(const GridPtr& g, const ScenarioConfig& cfg) {
    const auto& in = cfg.initial;
    switch (in.kind) {
        case InitialKind::ground_state_scaled: {
            RadialField u = in.truncation ? truncated_W(g, in.lambda, in.mu) : sample(g, [&](double r) {
                return cplx(in.lambda * in.mu * W_profile(in.mu * r));
            });
            RadialField N = abs_sq(u);
            return {std::move(u), std::move(N), 0};
        }
        case InitialKind::gaussian: {
            const double a = in.amplitude, w = in.width, ph = in.phase, b = in.n_amplitude, wn = in.n_width;
            RadialField u = sample(g, [=](double r) { return a * std::exp(-r * r / (2 * w * w)) * std::polar(1.0, ph * r * r); });
            RadialField N = sample(g, [=](double r) { return cplx(b * std::exp(-r * r / (2 * wn * wn))); });
            return {std::move(u), std::move(N), 0};
        }
        case InitialKind::custom_file: {
            std::filesystem::path p(in.file);
            if (p.is_relative() && !cfg.base_dir.empty()) p = std::filesystem::path(cfg.base_dir) / p;
            return interpolate_profile(g, read_profile(p.string()));
        }
    }
    throw ConfigError("unknown initial kind", "initial.kind");
}

IntegratorConfig integrator_config(const ScenarioConfig& cfg) {
    IntegratorConfig c;
    c.dt = cfg.time.dt;
    c.mode = cfg.mode;
    c.alpha = cfg.alpha;
    c.adaptive = cfg.time.adaptive;
    c.dt_floor = cfg.time.dt_floor;
    c.drift_tol = cfg.time.drift_tol;
    c.check_every = cfg.time.check_every;
    c.ceiling_grad = cfg.time.ceiling_grad;
    c.sponge = cfg.sponge;
    c.monitor_every = cfg.diagnostics.stride;
    return c;
}

Diagnostics diagnostics_config(const ScenarioConfig& cfg) {
    Diagnostics d;
    d.R_local = cfg.diagnostics.R_local;
    d.s_decay = cfg.diagnostics.s_decay;
    d.store_trajectory = cfg.diagnostics.store_trajectory || cfg.diagnostics.virial_R > 0;
    d.store_every = cfg.diagnostics.store_every;
    return d;
}

SimulationResult simulate(const ScenarioConfig& cfg) {
    validate(cfg);
    SimulationResult res;
    res.grid = scenario_grid(cfg);
    const ZakharovState s0 = initial_state(res.grid, cfg);
    res.initial = functionals(s0.u, s0.N);
    res.log = run(s0, integrator_config(cfg), cfg.time.t_end, diagnostics_config(cfg));
    res.final = functionals(res.log.final_state.u, res.log.final_state.N);
    res.verdict = scattering_diagnostics(res.log, cfg.verdict);
    if (cfg.diagnostics.virial_R > 0) {
        try {
            res.virial = rate_check(res.log.traj_u, res.log.traj_N, make_virial_weights(res.grid, cfg.diagnostics.virial_R));
        } catch (const std::exception& e) {
            res.log.events.push_back({res.log.final_state.t, "virial_skipped", e.what()});
        }
    }
    return res;
}

// ---------------------------------------------------------------- output

std::string format_number(double v) {
    if (!std::isfinite(v)) throw std::domain_error("format_number: non-finite value");
    if (v == 0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

std::string join_row(std::initializer_list<double> vals) {
    std::string s;
    for (double v : vals) {
        if (!s.empty()) s += ',';
        s += format_number(v);
    }
    return s;
}

double max_over(const RunLog& log, double LogRow::*field) {
    double m = 0;
    for (const auto& r : log.rows) m = std::max(m, r.*field);
    return m;
}

nlohmann::ordered_json energy_json(const EnergyReport& e) {
    return {{"mass", e.mass}, {"energy_Z", e.energy_Z}, {"energy_S", e.energy_S}, {"K", e.K}, {"grad_sq", e.grad_sq},
            {"N_L2", e.N_L2},  {"nu_L2", e.nu_L2},       {"u4_4", e.u4_4},         {"side", to_string(e.classification)}};
}

nlohmann::ordered_json grid_json(const GridPtr& g) { return {{"n", g->n}, {"r_max", g->r_max}, {"fingerprint", g->fingerprint()}}; }

}  // namespace

std::string run_csv(const RunLog& log) {
    std::string out = std::string(kSchemaLine) + "\n";
    out += "t,mass,energy_Z,grad_u_L2,N_L2,u_L4,K_u,local_mass,u_L2ms,dt_current,sponge_active\n";
    for (const auto& r : log.rows) {
        out += join_row({r.t, r.mass, r.energy_Z, r.grad_u_L2, r.N_L2, r.u_L4, r.K_u, r.local_mass, r.u_L2ms, r.dt_current});
        out += r.sponge_active ? ",1\n" : ",0\n";
    }
    return out;
}

std::string virial_csv(const RateReport& rep) {
    std::string out = std::string(kSchemaLine) + "\n";
    out += "t,V_R,NS,QN,CC,CC3p,V_inf,rate_inf,fd_V_R,fd_V_inf\n";
    // centered differences exist only away from the window ends, so those rows are left out
    for (const auto& row : rep.rows) {
        if (!std::isfinite(row.fd_V_R) || !std::isfinite(row.fd_V_inf)) continue;
        const auto& v = row.v;
        out += join_row({v.t, v.V_R, v.NS, v.QN, v.CC, v.CC3p, v.V_inf, v.rate_inf, row.fd_V_R, row.fd_V_inf}) + '\n';
    }
    return out;
}

nlohmann::ordered_json run_summary(const ScenarioConfig& cfg, const SimulationResult& res) {
    using J = nlohmann::ordered_json;
    const auto& log = res.log;
    J j;
    j["verdict"] = to_string(res.verdict.verdict);
    j["verdict_detail"] = J{{"reason", res.verdict.reason},
                            {"local_ratio", res.verdict.local_ratio},
                            {"lp_ratio", res.verdict.lp_ratio},
                            {"grad_ratio", res.verdict.grad_ratio}};
    J ext{{"max_grad_u_L2", max_over(log, &LogRow::grad_u_L2)},
          {"max_N_L2", max_over(log, &LogRow::N_L2)},
          {"max_u_L4", max_over(log, &LogRow::u_L4)},
          {"max_local_mass", max_over(log, &LogRow::local_mass)},
          {"max_grad_ratio", log.max_grad_ratio}};
    j["norms"] = J{{"initial", energy_json(res.initial)}, {"final", energy_json(res.final)}, {"extremal", ext}};
    j["drifts"] = J{{"mass", log.mass_drift}, {"energy_Z", log.energy_drift}};
    j["steps"] = log.steps;
    j["rejected_steps"] = log.rejected;
    j["t_final"] = log.final_state.t;
    J ev = J::array();
    for (const auto& e : log.events) ev.push_back(J{{"t", e.t}, {"kind", e.kind}, {"detail", e.detail}});
    j["events"] = ev;
    if (res.virial) j["virial"] = J{{"mismatch_R", res.virial->mismatch_R}, {"mismatch_inf", res.virial->mismatch_inf}, {"richardson", res.virial->richardson}};
    j["config"] = config_to_json(cfg);
    j["version"] = version_string();
    j["grid"] = grid_json(res.grid);
    j["seed"] = cfg.seed;
    return j;
}

// ---------------------------------------------------------------- sweep

namespace {

void set_parameter(ScenarioConfig& c, const std::string& p, double v) {
    if (p == "lambda")
        c.initial.lambda = v;
    else if (p == "mu")
        c.initial.mu = v;
    else if (p == "amplitude")
        c.initial.amplitude = v;
    else if (p == "width")
        c.initial.width = v;
    else if (p == "n_amplitude")
        c.initial.n_amplitude = v;
    else if (p == "dt") {
        c.time.dt = v;
        c.time.dt_floor = std::min(c.time.dt_floor, v);
    } else if (p == "alpha")
        c.alpha = v;
    else
        throw ConfigError("cannot sweep this parameter", "sweep.parameter");
}

}  // namespace

std::vector<SweepRow> sweep(const ScenarioConfig& cfg) {
    validate(cfg);
    if (cfg.sweep.parameter.empty()) throw ConfigError("missing", "sweep.parameter");
    if (cfg.sweep.values.empty()) throw ConfigError("no values to sweep", "sweep.values");
    const int m = static_cast<int>(cfg.sweep.values.size());
    std::vector<SweepRow> rows(static_cast<std::size_t>(m));
    const GridPtr g = scenario_grid(cfg);

#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < m; ++i) {
        SweepRow& row = rows[static_cast<std::size_t>(i)];
        row.parameter = cfg.sweep.values[static_cast<std::size_t>(i)];
        try {
            ScenarioConfig c = cfg;
            set_parameter(c, cfg.sweep.parameter, row.parameter);
            validate(c);
            const ZakharovState s0 = initial_state(g, c);
            const EnergyReport e = functionals(s0.u, s0.N);
            row.energy_ratio = e.energy_Z / exact::E_S_W;
            row.mass_ratio = e.N_L2 / exact::mass_threshold;
            row.side = to_string(e.classification);
            Diagnostics d = diagnostics_config(c);
            d.store_trajectory = false;
            const RunLog log = run(s0, integrator_config(c), c.time.t_end, d);
            const VerdictReport v = scattering_diagnostics(log, c.verdict);
            row.verdict = to_string(v.verdict);
            row.local_ratio = v.local_ratio;
            row.lp_ratio = v.lp_ratio;
            row.grad_ratio = v.grad_ratio;
            row.max_grad_u = max_over(log, &LogRow::grad_u_L2);
            row.max_N_L2 = max_over(log, &LogRow::N_L2);
            row.max_u_L4 = max_over(log, &LogRow::u_L4);
            row.mass_drift = log.mass_drift;
            row.energy_drift = log.energy_drift;
            row.t_last = log.final_state.t;
            row.steps = log.steps;
            row.ok = true;
        } catch (const std::exception& ex) {
            row.ok = false;
            row.error = ex.what();
        }
    }
    // observed order of the energy drift from neighbouring rows
    if (cfg.sweep.parameter == "dt" && rows.size() >= 2)
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const std::size_t a = i + 1 < rows.size() ? i : i - 1, b = a + 1;
            const auto &ra = rows[a], &rb = rows[b];
            if (ra.ok && rb.ok && ra.energy_drift > 0 && rb.energy_drift > 0 && ra.parameter != rb.parameter)
                rows[i].order = std::log(ra.energy_drift / rb.energy_drift) / std::log(ra.parameter / rb.parameter);
        }
    return rows;
}

std::string sweep_csv(const std::string& parameter, const std::vector<SweepRow>& rows) {
    const bool with_order = parameter == "dt";
    std::string out = std::string(kSchemaLine) + "\n";
    out += parameter +
           ",status,E_Z_over_E_S,N0_over_threshold,side,verdict,local_ratio,lp_ratio,grad_ratio,max_grad_u_L2,max_N_L2,max_u_L4,"
           "mass_drift,energy_drift,t_last,steps";
    out += with_order ? ",order,error\n" : ",error\n";
    for (const auto& r : rows) {
        out += format_number(r.parameter);
        if (!r.ok) {
            std::string msg = r.error;
            std::replace(msg.begin(), msg.end(), '"', '\'');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            out += ",error,,,,,,,,,,,,,,";
            out += with_order ? ",,\"" : ",\"";
            out += msg + "\"\n";
            continue;
        }
        out += ",ok," + join_row({r.energy_ratio, r.mass_ratio}) + "," + r.side + "," + r.verdict + ",";
        out += join_row({r.local_ratio, r.lp_ratio, r.grad_ratio, r.max_grad_u, r.max_N_L2, r.max_u_L4, r.mass_drift, r.energy_drift, r.t_last,
                         static_cast<double>(r.steps)});
        if (with_order) out += "," + (std::isfinite(r.order) ? format_number(r.order) : std::string());
        out += ",\n";
    }
    return out;
}

nlohmann::ordered_json sweep_summary(const ScenarioConfig& cfg, const std::vector<SweepRow>& rows) {
    using J = nlohmann::ordered_json;
    J runs = J::array();
    int failed = 0;
    for (const auto& r : rows) {
        if (!r.ok) {
            ++failed;
            runs.push_back(J{{"parameter", r.parameter}, {"status", "error"}, {"error", r.error}});
            continue;
        }
        runs.push_back(J{{"parameter", r.parameter},
                         {"status", "ok"},
                         {"verdict", r.verdict},
                         {"side", r.side},
                         {"E_Z_over_E_S", r.energy_ratio},
                         {"N0_over_threshold", r.mass_ratio},
                         {"grad_ratio", r.grad_ratio}});
    }
    return J{{"parameter", cfg.sweep.parameter}, {"runs", runs},          {"failed", failed}, {"config", config_to_json(cfg)},
             {"version", version_string()},      {"seed", cfg.seed},       {"grid", J{{"n", cfg.grid.n}, {"r_max", cfg.grid.r_max}}}};
}

// ---------------------------------------------------------------- probe

ProbeReport probe(const ScenarioConfig& cfg) {
    validate(cfg);
    const GridPtr g = scenario_grid(cfg);
    ProbeConfig pc;
    pc.delta = cfg.probe.delta;
    pc.ensemble = cfg.probe.ensemble;
    pc.horizons = cfg.probe.horizons;
    pc.dt = cfg.probe.dt;
    pc.sample_every = cfg.probe.sample_every;
    pc.sponge = cfg.probe.sponge;
    pc.band_lo = cfg.probe.band_lo;
    pc.band_hi = cfg.probe.band_hi;
    pc.seed = cfg.seed;
    ProbeReport rep;
    rep.potential = strichartz_probe(g, cfg.potential, pc);
    if (cfg.probe.baseline) {
        rep.baseline = strichartz_probe(g, PotentialFamily{}, pc);
        rep.has_baseline = true;
    }
    return rep;
}

std::string probe_csv(const ProbeReport& rep) {
    std::string out = std::string(kSchemaLine) + "\n";
    out += "T,ratio,x_ratio,baseline_ratio,ratio_over_baseline\n";
    for (std::size_t h = 0; h < rep.potential.horizons.size(); ++h) {
        out += join_row({rep.potential.horizons[h], rep.potential.ratio[h], rep.potential.x_ratio[h]});
        if (rep.has_baseline)
            out += "," + join_row({rep.baseline.ratio[h], rep.potential.ratio[h] / rep.baseline.ratio[h]});
        else
            out += ",,";
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------- constants

ConstantsReport constants_report(const GridPtr& g) {
    const GroundState gs = ground_state(g);
    const auto& c = gs.constants;
    ConstantsReport rep;
    auto add = [&](const char* name, double v, double ref) { rep.rows.push_back({name, v, ref, std::abs(v / ref - 1)}); };
    add("W_L4^4", c.W4_4, exact::W4_4);
    add("grad_W_L2^2", c.grad_W_sq, exact::W4_4);
    add("W^2_L2", c.mass_threshold, exact::mass_threshold);
    add("E_S(W)", c.E_S_W, exact::E_S_W);
    add("C_S", c.C_S, std::pow(exact::W4_4, -0.25));
    const RadialField lap = op_laplacian(gs.truncated);
    for (std::size_t k = 0; k < lap.size() && g->r[k] < g->r_max / 2; ++k)
        rep.laplace_residual = std::max(rep.laplace_residual, std::abs(lap[k].real() + std::pow(W_profile(g->r[k]), 3)));
    bool tight = rep.laplace_residual < 1e-6, loose = rep.laplace_residual < 1e-2;
    for (const auto& r : rep.rows) {
        tight = tight && r.rel_error < rep.tolerance;
        loose = loose && r.rel_error < rep.loose_tolerance;
    }
    rep.pass = tight;
    rep.warning = !tight && loose;
    return rep;
}

// ---------------------------------------------------------------- check suites

const std::vector<std::string>& check_suites() {
    static const std::vector<std::string> s = {"weight", "variational", "normal_form", "virial", "strichartz", "appendixA"};
    return s;
}

namespace {

CheckLine upper(const std::string& suite, const std::string& name, double value, double limit, std::string detail = {}) {
    return {suite, name, value, limit, value <= limit, std::move(detail)};
}

std::vector<CheckLine> weight_suite() {
    std::vector<CheckLine> out;
    const auto w = build_weight(2, {1, 1024});
    const std::pair<double, double> table[] = {{0.5, 1}, {4, 1}, {32, 32}, {256, 1024}, {300, 1024}, {4096, 1024}, {8192, 2048}, {1e6, 2.5e5}};
    double worst = 0;
    for (auto [r, v] : table) worst = std::max(worst, std::abs(w(r) - v) / v);
    out.push_back(upper("weight", "table_rel_error", worst, 1e-12));
    const double s = 0.5, sp = 0.8, beta = 2;
    const double sep = std::pow(beta, 4 * std::ceil(2 * sp / (sp - s)));
    const auto wl = build_weight(beta, {1, 2 * sep, 4 * sep * sep});
    int bad = 0;
    double prev = -1;
    for (int i = 0; i < 200; ++i) {
        const double r = std::pow(10.0, -2 + 18.0 * i / 199);
        const double v = std::pow(r, sp) * std::pow(wl(r), -s);
        if (!(v > prev)) ++bad;
        prev = v;
    }
    out.push_back(upper("weight", "monotone_violations", bad, 0, "200 point log sweep, (s, s') = (0.5, 0.8)"));
    double ratio = 0;
    for (double lo : {0.01, 1.0, 100.0, 1e4, 1e8})
        for (double hi : {10.0, 1e3, 1e6, 1e12, 1e16})
            if (hi > lo) ratio = std::max(ratio, weight_sum_ratio(wl, s, sp, lo, hi));
    out.push_back(upper("weight", "dyadic_sum_constant", ratio, 10 / (sp - s)));
    return out;
}

std::vector<CheckLine> variational_suite(std::uint64_t seed) {
    std::vector<CheckLine> out;
    const GridPtr g = make_grid(1024, 100);
    const auto d = check_dichotomy_equivalence(random_dichotomy_samples(g, 1000, seed));
    out.push_back(upper("variational", "dichotomy_disagreements", d.checked - d.agreements, 0,
                        std::to_string(d.checked) + " checked, " + std::to_string(d.skipped) + " skipped"));
    out.push_back(upper("variational", "dichotomy_skipped", d.skipped, 0));
    const auto k = check_estK(random_estK_samples(g, 500, seed + 1));
    out.push_back(upper("variational", "estK_violations", k.violations, 0, "worst margin " + format_number(k.worst_margin)));
    out.push_back(upper("variational", "estK_skipped", k.skipped, 0));
    return out;
}

std::vector<CheckLine> normal_form_suite() {
    std::vector<CheckLine> out;
    {
        const GridPtr g = make_grid(1024, 12);
        const auto quad = make_angular_quadrature(64);
        const RadialField gk = lp_project(sample(g, [](double r) { return cplx(std::exp(-r * r / 18)); }), 1.0);
        double lo = INFINITY, hi = 0;
        std::string detail;
        for (double j : {16.0, 32.0, 64.0, 128.0}) {
            const RadialField fj = lp_project(sample(g, [j](double r) { return cplx(std::cos(j * r) * std::exp(-(r - 4) * (r - 4) / 2)); }), j);
            const RadialField o = apply_bilinear({KernelKind::omega_plus, 0.125}, fj, gk, quad);
            const double ratio = lp_norm(o, 4) * std::pow(1 + j + 1, 2) / (lp_norm(fj, 4) * lp_norm(gk, 4));
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            detail += (detail.empty() ? "" : " ") + format_number(ratio);
        }
        out.push_back(upper("normal_form", "gain_variation", hi / lo, 4, detail));
    }
    {
        const GridPtr g = make_grid(512, 10);
        const auto quad = make_angular_quadrature(16);
        auto shell = [&](double j, double a) {
            return lp_project(sample(g, [=](double r) { return cplx(a * std::cos(j * r) * std::exp(-(r - 3) * (r - 3) / 2)); }), j);
        };
        const RadialField u = sample(g, [](double r) { return cplx(0.3 * std::exp(-r * r / 8), 0.1 * std::exp(-r * r / 12)); }) + shell(32, 0.3);
        const RadialField N = sample(g, [](double r) { return cplx(0.3 * std::exp(-r * r / 12.5)); }) + shell(32, 0.3);
        const double iota = 1.0 / 16;
        const auto fw = normal_transform(u, N, iota, iota, quad);
        const auto inv = normal_inverse(fw.first, fw.second, iota, iota, 60, 1e-14, quad);
        const double err = std::max(rel_l2_diff(inv.u, u), rel_l2_diff(inv.N, N));
        out.push_back(upper("normal_form", "roundtrip_rel_error", err, 1e-8,
                            std::to_string(inv.iterations) + " iterations, contraction " + format_number(inv.contraction)));
    }
    return out;
}

std::vector<CheckLine> virial_suite() {
    std::vector<CheckLine> out;
    const GridPtr g = make_grid(1024, 100);
    const auto w = make_virial_weights(g, 10);
    const auto res = weight_relation_residuals(w, g->r_max / 2);
    out.push_back(upper("virial", "relation_residual", *std::max_element(res.begin(), res.end()), 1e-8));
    double lo = INFINITY;
    for (const RadialField* f : {&w.f1, &w.f2, &w.f3, &w.f4, &w.f5})
        for (const auto& v : f->values) lo = std::min(lo, v.real());
    out.push_back({"virial", "min_f1_to_f5", lo, 0, lo > 0, "must be positive"});
    const RadialField u = sample(g, [](double r) { return 0.8 * std::exp(-r * r / 8) * std::polar(1.0, 0.05 * r * r); });
    const RadialField N = sample(g, [](double r) { return cplx(0.6 * std::exp(-r * r / 10), 0.2 * r * std::exp(-r * r / 10)); });
    IntegratorConfig c;
    c.dt = 5e-4;
    c.monitor_every = 1000;
    Diagnostics d;
    d.store_trajectory = true;
    d.store_every = 0.02;
    const RunLog log = run({u, N, 0}, c, 1.0, d);
    const RateReport rep = rate_check(log.traj_u, log.traj_N, w);
    out.push_back(upper("virial", "rate_mismatch_R", rep.mismatch_R, 0.01));
    out.push_back(upper("virial", "rate_mismatch_inf", rep.mismatch_inf, 0.01));
    return out;
}

std::vector<CheckLine> strichartz_suite(std::uint64_t seed) {
    std::vector<CheckLine> out;
    const GridPtr g = make_grid(512, 100);
    ProbeConfig pc;
    pc.ensemble = 4;
    pc.horizons = {10, 20, 30, 40, 50};
    pc.seed = seed;
    PotentialFamily V;
    V.kind = PotentialFamily::free_wave;
    V.mass_fraction = 0.5;
    const ProbeResult a = strichartz_probe(g, V, pc);
    const ProbeResult b = strichartz_probe(g, PotentialFamily{}, pc);
    const std::size_t last = a.ratio.size() - 1;
    out.push_back(upper("strichartz", "ratio_over_free_baseline", a.ratio[last] / b.ratio[last], 2.0,
                        "T = 50, ratio " + format_number(a.ratio[last]) + ", baseline " + format_number(b.ratio[last])));
    out.push_back(upper("strichartz", "late_growth", a.ratio[last] / a.ratio[last - 1] - 1, 0.05, "relative growth from T = 40 to T = 50"));
    return out;
}

std::vector<CheckLine> growth_suite() {
    const GridPtr g = make_grid(512, 10);
    const auto r = appendix_a_probe(g, {4, 8, 16}, 0.5, 8);
    std::string detail = "norms";
    for (double v : r.norms) detail += " " + format_number(v);
    return {upper("appendixA", "exponent_error", std::abs(r.exponent - r.predicted), 0.15,
                  "exponent " + format_number(r.exponent) + ", predicted " + format_number(r.predicted) + ", " + detail)};
}

}  // namespace

std::vector<CheckLine> run_check_suite(const std::string& suite, std::uint64_t seed) {
    if (suite == "weight") return weight_suite();
    if (suite == "variational") return variational_suite(seed);
    if (suite == "normal_form") return normal_form_suite();
    if (suite == "virial") return virial_suite();
    if (suite == "strichartz") return strichartz_suite(seed);
    if (suite == "appendixA") return growth_suite();
    throw ConfigError("unknown check suite '" + suite + "'", "suite");
}

}  // namespace zk
