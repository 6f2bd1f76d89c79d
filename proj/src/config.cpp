#include "isokin/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "isokin/errors.hpp"

namespace isokin {

char const* to_string(SurfaceKind k)
{
    switch (k)
    {
        case SurfaceKind::flat_torus:
            return "flat_torus";
        case SurfaceKind::wavy_torus:
            return "wavy_torus";
        case SurfaceKind::octagon:
            return "octagon";
    }
    return "unknown";
}

char const* to_string(FieldPreset p)
{
    switch (p)
    {
        case FieldPreset::none:
            return "none";
        case FieldPreset::exact_bump:
            return "exact_bump";
        case FieldPreset::product_bumps:
            return "product_bumps";
        case FieldPreset::constant_form:
            return "constant_form";
        case FieldPreset::magnetic_constant:
            return "magnetic_constant";
        case FieldPreset::magnetic_bump:
            return "magnetic_bump";
        case FieldPreset::general:
            return "general";
    }
    return "unknown";
}

SpecVariant implied_variant(FieldPreset p)
{
    switch (p)
    {
        case FieldPreset::none:
            return SpecVariant::geodesic;
        case FieldPreset::exact_bump:
        case FieldPreset::product_bumps:
        case FieldPreset::constant_form:
            return SpecVariant::gaussian;
        case FieldPreset::magnetic_constant:
        case FieldPreset::magnetic_bump:
            return SpecVariant::magnetic;
        case FieldPreset::general:
            return SpecVariant::general;
    }
    return SpecVariant::geodesic;
}

namespace {

int line_of(YAML::Node const& n)
{
    return n.Mark().is_null() ? -1 : n.Mark().line + 1;
}

void check_keys(YAML::Node const& node, std::string const& section,
                std::set<std::string> const& allowed)
{
    if (!node.IsMap())
        throw ConfigError("section '" + section + "' must be a mapping",
                          line_of(node));
    for (auto const& kv : node)
    {
        auto key = kv.first.as<std::string>();
        if (!allowed.count(key))
        {
            std::string list;
            for (auto const& a : allowed)
                list += (list.empty() ? "" : ", ") + a;
            throw ConfigError("unknown key '" + key + "' in section '"
                                  + section + "' (allowed: " + list + ")",
                              line_of(kv.first));
        }
    }
}

template <class T>
T scalar(YAML::Node const& n, std::string const& what)
{
    try
    {
        return n.as<T>();
    }
    catch (YAML::Exception const&)
    {
        throw ConfigError("invalid value for '" + what + "'", line_of(n));
    }
}

double number(YAML::Node const& node, std::string const& key, double fallback,
              double lo, double hi, std::string const& section)
{
    auto n = node[key];
    if (!n)
        return fallback;
    auto what = section + "." + key;
    double v = scalar<double>(n, what);
    if (!std::isfinite(v) || v < lo || v > hi)
        throw ConfigError(fmt::format("{} = {} outside [{}, {}]", what, v, lo,
                                      hi),
                          line_of(n));
    return v;
}

std::size_t count(YAML::Node const& node, std::string const& key,
                  std::size_t fallback, std::size_t lo, std::size_t hi,
                  std::string const& section)
{
    auto n = node[key];
    if (!n)
        return fallback;
    auto what = section + "." + key;
    auto v = scalar<long long>(n, what);
    if (v < static_cast<long long>(lo) || v > static_cast<long long>(hi))
        throw ConfigError(fmt::format("{} = {} outside [{}, {}]", what, v, lo,
                                      hi),
                          line_of(n));
    return static_cast<std::size_t>(v);
}

bool flag(YAML::Node const& node, std::string const& key, bool fallback,
          std::string const& section)
{
    auto n = node[key];
    return n ? scalar<bool>(n, section + "." + key) : fallback;
}

template <class E>
E choice(YAML::Node const& n, std::string const& what,
         std::vector<std::pair<std::string, E>> const& options)
{
    auto s = scalar<std::string>(n, what);
    std::string list;
    for (auto const& [name, value] : options)
    {
        if (name == s)
            return value;
        list += (list.empty() ? "" : ", ") + name;
    }
    throw ConfigError("'" + s + "' is not a valid " + what + " (expected one of: "
                          + list + ")",
                      line_of(n));
}

std::array<double, 2> pair_of(YAML::Node const& n, std::string const& what)
{
    if (!n.IsSequence() || n.size() != 2)
        throw ConfigError(what + " must be a list of two numbers", line_of(n));
    std::array<double, 2> out{scalar<double>(n[0], what),
                              scalar<double>(n[1], what)};
    if (!std::isfinite(out[0]) || !std::isfinite(out[1]))
        throw ConfigError(what + " must be finite", line_of(n));
    return out;
}

void parse_surface(YAML::Node const& n, SurfaceConfig& s)
{
    check_keys(n, "surface", {"kind", "amplitude", "lx", "ly"});
    if (!n["kind"])
        throw ConfigError("surface.kind is required", line_of(n));
    s.kind = choice<SurfaceKind>(n["kind"], "surface kind",
                                 {{"flat_torus", SurfaceKind::flat_torus},
                                  {"wavy_torus", SurfaceKind::wavy_torus},
                                  {"octagon", SurfaceKind::octagon}});
    if (s.kind == SurfaceKind::octagon)
    {
        for (auto key : {"amplitude", "lx", "ly"})
            if (n[key])
                throw ConfigError(std::string("surface.") + key
                                      + " does not apply to the octagon",
                                  line_of(n[key]));
        return;
    }
    if (s.kind == SurfaceKind::flat_torus && n["amplitude"])
        throw ConfigError("surface.amplitude applies to wavy_torus only",
                          line_of(n["amplitude"]));
    s.amplitude = number(n, "amplitude", s.amplitude, -0.9, 0.9, "surface");
    s.lx = number(n, "lx", s.lx, 0.1, 1000.0, "surface");
    s.ly = number(n, "ly", s.ly, 0.1, 1000.0, "surface");
}

void parse_field(YAML::Node const& n, FieldConfig& f)
{
    check_keys(n, "field",
               {"preset", "strength", "bumps", "truncation", "form", "m"});
    if (n["preset"])
        f.preset = choice<FieldPreset>(
            n["preset"], "field preset",
            {{"none", FieldPreset::none},
             {"exact_bump", FieldPreset::exact_bump},
             {"product_bumps", FieldPreset::product_bumps},
             {"constant_form", FieldPreset::constant_form},
             {"magnetic_constant", FieldPreset::magnetic_constant},
             {"magnetic_bump", FieldPreset::magnetic_bump},
             {"general", FieldPreset::general}});
    f.strength = number(n, "strength", f.strength, -10.0, 10.0, "field");
    f.truncation = static_cast<int>(
        count(n, "truncation", static_cast<std::size_t>(f.truncation), 0, 12,
              "field"));
    f.m = number(n, "m", f.m, -10.0, 10.0, "field");
    if (n["form"])
        f.form = pair_of(n["form"], "field.form");
    if (auto b = n["bumps"])
    {
        if (!b.IsSequence() || b.size() < 1 || b.size() > 2)
            throw ConfigError("field.bumps must list one or two bumps",
                              line_of(b));
        for (auto const& item : b)
        {
            check_keys(item, "field.bumps", {"center", "radius", "amplitude"});
            BumpParams p;
            if (!item["center"] || !item["radius"])
                throw ConfigError("each bump needs center and radius",
                                  line_of(item));
            auto c = pair_of(item["center"], "bump center");
            p.center = Complex{c[0], c[1]};
            p.radius = number(item, "radius", 1.0, 1e-3, 100.0, "field.bumps");
            p.amplitude
                = number(item, "amplitude", 1.0, -100.0, 100.0, "field.bumps");
            f.bumps.push_back(p);
        }
    }
}

void parse_run(YAML::Node const& n, RunConfig& r)
{
    check_keys(n, "run",
               {"dt", "dt_max", "T", "burn_in", "ensemble", "seed",
                "n_samples", "renorm_interval", "epsilons", "riccati_burn_in",
                "riccati_dt", "riccati_samples", "n_states",
                "positivity_samples"});
    r.dt = number(n, "dt", r.dt, 1e-6, 0.05, "run");
    r.dt_max = number(n, "dt_max", r.dt, r.dt, 0.05, "run");
    r.T = number(n, "T", r.T, 1e-3, 1e6, "run");
    r.burn_in = number(n, "burn_in", r.burn_in, 0.0, 1e5, "run");
    r.ensemble = count(n, "ensemble", r.ensemble, 2, 100000, "run");
    if (auto s = n["seed"])
    {
        auto v = scalar<long long>(s, "run.seed");
        if (v < 0)
            throw ConfigError("run.seed must be nonnegative", line_of(s));
        r.seed = static_cast<std::uint64_t>(v);
    }
    r.n_samples = count(n, "n_samples", r.n_samples, 1, 100000000, "run");
    r.renorm_interval
        = number(n, "renorm_interval", r.renorm_interval, 1e-3, 20.0, "run");
    if (r.renorm_interval > r.T)
        throw ConfigError("run.renorm_interval exceeds run.T",
                          line_of(n["renorm_interval"] ? n["renorm_interval"]
                                                        : n));
    r.riccati_burn_in
        = number(n, "riccati_burn_in", r.riccati_burn_in, 20.0, 1e4, "run");
    r.riccati_dt = number(n, "riccati_dt", r.riccati_dt, 1e-5, 0.05, "run");
    r.riccati_samples
        = count(n, "riccati_samples", r.riccati_samples, 1, 100000, "run");
    r.n_states = count(n, "n_states", r.n_states, 1, 10000000, "run");
    r.positivity_samples = count(n, "positivity_samples",
                                 r.positivity_samples, 2, 10000000, "run");
    if (auto e = n["epsilons"])
    {
        if (!e.IsSequence() || e.size() == 0)
            throw ConfigError("run.epsilons must be a nonempty list",
                              line_of(e));
        for (auto const& item : e)
        {
            double v = scalar<double>(item, "run.epsilons");
            if (!std::isfinite(v) || std::abs(v) > 10.0)
                throw ConfigError("epsilon outside [-10, 10]", line_of(item));
            if (!r.epsilons.empty() && !(v > r.epsilons.back()))
                throw ConfigError("run.epsilons must be strictly ascending",
                                  line_of(item));
            r.epsilons.push_back(v);
        }
    }
}

void parse_output(YAML::Node const& n, OutputConfig& o)
{
    check_keys(n, "output", {"directory", "formats", "history"});
    if (n["directory"])
        o.directory = scalar<std::string>(n["directory"], "output.directory");
    if (auto f = n["formats"])
    {
        if (!f.IsSequence() || f.size() == 0)
            throw ConfigError("output.formats must be a nonempty list",
                              line_of(f));
        o.csv = o.json = false;
        for (auto const& item : f)
        {
            auto s = scalar<std::string>(item, "output.formats");
            if (s == "csv")
                o.csv = true;
            else if (s == "json")
                o.json = true;
            else
                throw ConfigError("unknown output format '" + s
                                      + "' (expected csv or json)",
                                  line_of(item));
        }
    }
    o.history = flag(n, "history", o.history, "output");
}

}  // namespace

ExperimentConfig parse_config(std::string const& text)
{
    YAML::Node root;
    try
    {
        root = YAML::Load(text);
    }
    catch (YAML::ParserException const& e)
    {
        throw ConfigError("YAML syntax error: " + e.msg, e.mark.line + 1);
    }
    if (!root || !root.IsMap())
        throw ConfigError("config must be a mapping of sections", 1);
    check_keys(root, "top level",
               {"name", "surface", "field", "spec", "run", "output"});

    ExperimentConfig cfg;
    cfg.source = text;
    if (root["name"])
        cfg.name = scalar<std::string>(root["name"], "name");
    if (!root["surface"])
        throw ConfigError("missing required section 'surface'", 1);
    parse_surface(root["surface"], cfg.surface);
    if (root["field"])
        parse_field(root["field"], cfg.field);
    cfg.spec = implied_variant(cfg.field.preset);
    if (auto s = root["spec"])
    {
        auto v = choice<SpecVariant>(s, "spec variant",
                                     {{"geodesic", SpecVariant::geodesic},
                                      {"magnetic", SpecVariant::magnetic},
                                      {"gaussian", SpecVariant::gaussian},
                                      {"general", SpecVariant::general}});
        if (v != cfg.spec)
            throw ConfigError(std::string("spec '") + to_string(v)
                                  + "' does not match field preset '"
                                  + to_string(cfg.field.preset) + "' (implies '"
                                  + to_string(cfg.spec) + "')",
                              line_of(s));
    }
    if (cfg.field.preset == FieldPreset::constant_form
        && cfg.surface.kind == SurfaceKind::octagon)
        throw ConfigError("constant_form needs a torus surface",
                          line_of(root["field"]["preset"]));
    if (root["run"])
        parse_run(root["run"], cfg.run);
    if (cfg.run.dt_max < cfg.run.dt)
        cfg.run.dt_max = cfg.run.dt;
    if (root["output"])
        parse_output(root["output"], cfg.output);
    return cfg;
}

ExperimentConfig load_config(std::string const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

ConformalSurface build_surface(SurfaceConfig const& cfg)
{
    switch (cfg.kind)
    {
        case SurfaceKind::flat_torus:
            return make_flat_torus(cfg.lx, cfg.ly);
        case SurfaceKind::wavy_torus:
            return make_wavy_torus(cfg.amplitude, cfg.lx, cfg.ly);
        case SurfaceKind::octagon:
            return make_octagon();
    }
    throw ConfigError("unknown surface kind");
}

std::vector<BumpParams> resolved_bumps(ConformalSurface const& surface,
                                       FieldConfig const& cfg)
{
    std::vector<BumpParams> defaults;
    if (surface.is_torus())
    {
        double cx = 0.5 * surface.period_x(), cy = 0.5 * surface.period_y();
        defaults = {{Complex{cx, cy}, 0.8, 1.0},
                    {Complex{cx + 0.5, cy + 0.2}, 0.8, 1.0}};
    }
    else
    {
        defaults = {default_octagon_w1(), default_octagon_w2()};
    }
    for (std::size_t i = 0; i < cfg.bumps.size(); ++i)
        defaults[i] = cfg.bumps[i];
    return defaults;
}

BuiltSpec build_spec(ConformalSurface const& surface, FieldConfig const& cfg,
                     double strength)
{
    auto bumps = resolved_bumps(surface, cfg);
    auto bump = [&](std::size_t i) {
        return make_bump(surface, bumps[i], cfg.truncation);
    };
    BuiltSpec out{ThermostatSpec::geodesic(), std::nullopt, {}};
    switch (cfg.preset)
    {
        case FieldPreset::none:
            break;
        case FieldPreset::exact_bump:
            out.spec = ThermostatSpec::gaussian(
                make_exact_form(strength * bump(0)));
            break;
        case FieldPreset::product_bumps: {
            auto pf = make_product_form(surface, bump(0), bump(1));
            out.max_curl = pf.max_curl;
            out.warning = pf.warning;
            out.spec = ThermostatSpec::gaussian(pf.form.scaled(strength));
            break;
        }
        case FieldPreset::constant_form:
            if (!surface.is_torus())
                throw ConfigError("constant_form needs a torus surface");
            out.spec = ThermostatSpec::gaussian(OneForm::constant(
                strength * cfg.form[0], strength * cfg.form[1]));
            break;
        case FieldPreset::magnetic_constant:
            out.spec = ThermostatSpec::magnetic(ScalarField::constant(cfg.m));
            break;
        case FieldPreset::magnetic_bump:
            out.spec = ThermostatSpec::magnetic(cfg.m * bump(0));
            break;
        case FieldPreset::general:
            out.spec = ThermostatSpec::general(
                strength * default_general_lambda(surface));
            break;
    }
    return out;
}

}  // namespace isokin
