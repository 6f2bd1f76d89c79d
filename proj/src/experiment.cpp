#include "isokin/experiment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "isokin/errors.hpp"
#include "isokin/parallel.hpp"

#ifndef ISOKIN_VERSION
#    define ISOKIN_VERSION "unknown"
#endif

namespace isokin {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string code_version()
{
    return ISOKIN_VERSION;
}

std::string sha256_hex(std::string const& data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr)
        != 1)
        throw std::runtime_error("SHA-256 digest failed");
    std::string out;
    for (unsigned int i = 0; i < len; ++i)
        out += fmt::format("{:02x}", md[i]);
    return out;
}

std::string format_number(double v)
{
    return fmt::format("{}", v);
}

std::vector<std::string> result_columns()
{
    return {"schema_version", "row",          "label",
            "field_preset",   "epsilon",      "status",
            "lambda1",        "lambda2",      "lambda3",
            "lambda1_se",     "lambda2_se",   "lambda3_se",
            "e_lyapunov",     "e_lyapunov_se", "e_birkhoff",
            "e_birkhoff_se",  "agreement_z",  "converged",
            "riccati_gap_min", "n_trajectories", "T",
            "dt",             "error"};
}

std::vector<std::string> identity_columns()
{
    return {"schema_version", "identity", "config", "lhs", "rhs",
            "sigma",          "z",        "pass",   "detail"};
}

namespace {

//---------------------------------------------------------------------------//
// Serialization

std::string csv_field(std::string const& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::string csv_line(std::vector<std::string> const& fields)
{
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i)
    {
        if (i)
            out += ',';
        out += csv_field(fields[i]);
    }
    return out + "\n";
}

std::string num_or_empty(std::optional<double> v)
{
    return v ? format_number(*v) : std::string();
}

json num_or_null(std::optional<double> v)
{
    if (!v || !std::isfinite(*v))
        return nullptr;
    return *v;
}

std::optional<double> opt_num(json const& j)
{
    if (j.is_null())
        return std::nullopt;
    return j.get<double>();
}

std::vector<std::string> row_fields(ResultRow const& r)
{
    auto lam = [&](int i) {
        return r.lambdas ? format_number((*r.lambdas)[i]) : std::string();
    };
    auto lse = [&](int i) {
        return r.lambda_se ? format_number((*r.lambda_se)[i]) : std::string();
    };
    return {results_schema,
            std::to_string(r.row),
            r.label,
            r.field_preset,
            format_number(r.epsilon),
            r.status,
            lam(0),
            lam(1),
            lam(2),
            lse(0),
            lse(1),
            lse(2),
            num_or_empty(r.e_lyapunov),
            num_or_empty(r.e_lyapunov_se),
            num_or_empty(r.e_birkhoff),
            num_or_empty(r.e_birkhoff_se),
            num_or_empty(r.agreement_z),
            r.converged ? (*r.converged ? "true" : "false") : "",
            num_or_empty(r.riccati_gap_min),
            std::to_string(r.n_trajectories),
            format_number(r.T),
            format_number(r.dt),
            r.error};
}

json row_json(ResultRow const& r)
{
    auto arr = [](std::optional<std::array<double, 3>> const& a, int i) {
        return a ? json((*a)[i]) : json(nullptr);
    };
    json j;
    j["schema_version"] = results_schema;
    j["row"] = r.row;
    j["label"] = r.label;
    j["field_preset"] = r.field_preset;
    j["epsilon"] = r.epsilon;
    j["status"] = r.status;
    for (int i = 0; i < 3; ++i)
        j[fmt::format("lambda{}", i + 1)] = arr(r.lambdas, i);
    for (int i = 0; i < 3; ++i)
        j[fmt::format("lambda{}_se", i + 1)] = arr(r.lambda_se, i);
    j["e_lyapunov"] = num_or_null(r.e_lyapunov);
    j["e_lyapunov_se"] = num_or_null(r.e_lyapunov_se);
    j["e_birkhoff"] = num_or_null(r.e_birkhoff);
    j["e_birkhoff_se"] = num_or_null(r.e_birkhoff_se);
    j["agreement_z"] = num_or_null(r.agreement_z);
    j["converged"] = r.converged ? json(*r.converged) : json(nullptr);
    j["riccati_gap_min"] = num_or_null(r.riccati_gap_min);
    j["n_trajectories"] = r.n_trajectories;
    j["T"] = r.T;
    j["dt"] = r.dt;
    j["error"] = r.error;
    return j;
}

ResultRow row_from_json(json const& j)
{
    ResultRow r;
    r.row = j.at("row").get<int>();
    r.label = j.at("label").get<std::string>();
    r.field_preset = j.at("field_preset").get<std::string>();
    r.epsilon = j.at("epsilon").get<double>();
    r.status = j.at("status").get<std::string>();
    if (!j.at("lambda1").is_null())
        r.lambdas = std::array<double, 3>{j["lambda1"].get<double>(),
                                          j["lambda2"].get<double>(),
                                          j["lambda3"].get<double>()};
    if (!j.at("lambda1_se").is_null())
        r.lambda_se = std::array<double, 3>{j["lambda1_se"].get<double>(),
                                            j["lambda2_se"].get<double>(),
                                            j["lambda3_se"].get<double>()};
    r.e_lyapunov = opt_num(j.at("e_lyapunov"));
    r.e_lyapunov_se = opt_num(j.at("e_lyapunov_se"));
    r.e_birkhoff = opt_num(j.at("e_birkhoff"));
    r.e_birkhoff_se = opt_num(j.at("e_birkhoff_se"));
    r.agreement_z = opt_num(j.at("agreement_z"));
    if (!j.at("converged").is_null())
        r.converged = j["converged"].get<bool>();
    r.riccati_gap_min = opt_num(j.at("riccati_gap_min"));
    r.n_trajectories = j.at("n_trajectories").get<std::size_t>();
    r.T = j.at("T").get<double>();
    r.dt = j.at("dt").get<double>();
    r.error = j.at("error").get<std::string>();
    return r;
}

json history_json(std::vector<LyapunovHistoryPoint> const& h)
{
    json a = json::array();
    for (auto const& p : h)
        a.push_back({p.t, p.exponents[0], p.exponents[1], p.exponents[2]});
    return a;
}

std::vector<LyapunovHistoryPoint> history_from_json(json const& a)
{
    std::vector<LyapunovHistoryPoint> h;
    for (auto const& p : a)
        h.push_back({p[0].get<double>(),
                     {p[1].get<double>(), p[2].get<double>(),
                      p[3].get<double>()}});
    return h;
}

json identity_json(IdentityRow const& r)
{
    json j;
    j["schema_version"] = identities_schema;
    j["identity"] = r.check.identity;
    j["config"] = r.config;
    j["lhs"] = num_or_null(r.check.lhs);
    j["rhs"] = num_or_null(r.check.rhs);
    j["sigma"] = num_or_null(r.check.sigma());
    j["z"] = num_or_null(r.check.z);
    j["pass"] = r.check.pass;
    j["detail"] = r.check.detail;
    return j;
}

std::vector<std::string> identity_fields(IdentityRow const& r)
{
    auto finite = [](double v) {
        return std::isfinite(v) ? format_number(v) : std::string();
    };
    return {identities_schema,
            r.check.identity,
            r.config,
            finite(r.check.lhs),
            finite(r.check.rhs),
            finite(r.check.sigma()),
            finite(r.check.z),
            r.check.pass ? "true" : "false",
            r.check.detail};
}

void write_atomic(fs::path const& path, std::string const& content)
{
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw ConfigError("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out)
            throw ConfigError("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

//---------------------------------------------------------------------------//
// Run context

struct Context
{
    ExperimentConfig cfg;
    unsigned threads = 1;
    fs::path dir;
    std::ostream* log = nullptr;
    std::string config_hash;

    template <class... Args>
    void say(fmt::format_string<Args...> f, Args&&... args) const
    {
        if (log)
            *log << fmt::format(f, std::forward<Args>(args)...) << std::endl;
    }
};

Context prepare(ExperimentConfig const& cfg, RunOptions const& opts)
{
    Context ctx;
    ctx.cfg = cfg;
    if (opts.seed)
        ctx.cfg.run.seed = *opts.seed;
    ctx.threads = resolve_threads(opts.threads);
    ctx.dir = opts.out_dir ? fs::path(*opts.out_dir)
                           : fs::path(cfg.output.directory);
    ctx.log = opts.log;
    ctx.config_hash = sha256_hex(cfg.source);
    std::error_code ec;
    fs::create_directories(ctx.dir, ec);
    if (ec || !fs::is_directory(ctx.dir))
        throw ConfigError("cannot create output directory '"
                          + ctx.dir.string() + "': " + ec.message());
    return ctx;
}

//! Strength that actually enters the field: 0 for geodesic, m for magnetic
double applied_strength(FieldConfig const& f, double strength)
{
    switch (f.preset)
    {
        case FieldPreset::none:
            return 0.0;
        case FieldPreset::magnetic_constant:
        case FieldPreset::magnetic_bump:
            return f.m;
        default:
            return strength;
    }
}

std::uint64_t riccati_seed(std::uint64_t seed)
{
    return mix_seed(seed ^ 0x52494343ULL);
}

std::uint64_t verify_seed(std::uint64_t seed, std::uint64_t k)
{
    return mix_seed(seed + 0x5645524946ULL + k);
}

void write_manifest(Context const& ctx, std::string const& subcommand,
                    json seeds)
{
    auto const& r = ctx.cfg.run;
    json m;
    m["schema_version"] = manifest_schema;
    m["code_version"] = code_version();
    m["subcommand"] = subcommand;
    m["config_name"] = ctx.cfg.name;
    m["config_sha256"] = ctx.config_hash;
    m["seed"] = r.seed;
    m["seeds"] = std::move(seeds);
    m["effective"] = {
        {"surface", to_string(ctx.cfg.surface.kind)},
        {"field_preset", to_string(ctx.cfg.field.preset)},
        {"spec", to_string(ctx.cfg.spec)},
        {"strength",
         applied_strength(ctx.cfg.field, ctx.cfg.field.strength)},
        {"dt", r.dt},
        {"dt_max", r.dt_max},
        {"T", r.T},
        {"burn_in", r.burn_in},
        {"ensemble", r.ensemble},
        {"n_samples", r.n_samples},
        {"renorm_interval", r.renorm_interval},
        {"riccati_burn_in", r.riccati_burn_in},
        {"riccati_dt", r.riccati_dt},
        {"riccati_samples", r.riccati_samples},
        {"n_states", r.n_states},
        {"positivity_samples", r.positivity_samples},
    };
    m["config"] = ctx.cfg.source;
    write_atomic(ctx.dir / "manifest.json", m.dump(2) + "\n");
}

void write_results(Context const& ctx, std::string const& subcommand,
                   std::vector<ResultRow> const& rows, json extra)
{
    auto const& out = ctx.cfg.output;
    if (out.csv)
    {
        std::string csv = csv_line(result_columns());
        for (auto const& r : rows)
            csv += csv_line(row_fields(r));
        write_atomic(ctx.dir / "results.csv", csv);
    }
    if (out.json)
    {
        json s;
        s["schema_version"] = results_schema;
        s["subcommand"] = subcommand;
        s["config_name"] = ctx.cfg.name;
        s["config_sha256"] = ctx.config_hash;
        s["rows"] = json::array();
        for (auto const& r : rows)
            s["rows"].push_back(row_json(r));
        for (auto& [k, v] : extra.items())
            s[k] = v;
        write_atomic(ctx.dir / "summary.json", s.dump(2) + "\n");
    }
    if (out.history)
    {
        std::string h = csv_line(
            {"schema_version", "label", "t", "lambda1", "lambda2", "lambda3"});
        for (auto const& r : rows)
            for (auto const& p : r.history)
                h += csv_line({history_schema, r.label, format_number(p.t),
                               format_number(p.exponents[0]),
                               format_number(p.exponents[1]),
                               format_number(p.exponents[2])});
        write_atomic(ctx.dir / "history.csv", h);
    }
}

//---------------------------------------------------------------------------//
// Ensemble rows with resumable per-row files

fs::path row_path(Context const& ctx, int index)
{
    return ctx.dir / "rows" / fmt::format("row_{:03d}.json", index);
}

std::optional<ResultRow> load_row(Context const& ctx, int index,
                                  std::string const& label)
{
    auto p = row_path(ctx, index);
    if (!fs::exists(p))
        return std::nullopt;
    try
    {
        std::ifstream in(p, std::ios::binary);
        json j = json::parse(in);
        if (j.at("config_sha256") != ctx.config_hash
            || j.at("seed").get<std::uint64_t>() != ctx.cfg.run.seed
            || j.at("code_version") != code_version())
            return std::nullopt;
        auto r = row_from_json(j.at("row"));
        if (r.label != label)
            return std::nullopt;
        r.history = history_from_json(j.at("history"));
        return r;
    }
    catch (std::exception const&)
    {
        return std::nullopt;
    }
}

void store_row(Context const& ctx, int index, ResultRow const& r)
{
    fs::create_directories(ctx.dir / "rows");
    json j;
    j["config_sha256"] = ctx.config_hash;
    j["seed"] = ctx.cfg.run.seed;
    j["code_version"] = code_version();
    j["row"] = row_json(r);
    j["history"] = history_json(r.history);
    write_atomic(row_path(ctx, index), j.dump() + "\n");
}

struct RowSpec
{
    std::string label;
    FieldPreset preset;
    double epsilon;
};

std::vector<ResultRow> run_rows(Context const& ctx,
                                ConformalSurface const& surface,
                                std::vector<RowSpec> const& specs,
                                RunOutcome& outcome)
{
    std::vector<ResultRow> rows;
    for (std::size_t i = 0; i < specs.size(); ++i)
    {
        auto const& rs = specs[i];
        int index = static_cast<int>(i);
        if (auto done = load_row(ctx, index, rs.label))
        {
            ctx.say("row {} ({}): reusing completed result", index, rs.label);
            rows.push_back(std::move(*done));
        }
        else
        {
            ctx.say("row {} ({}): {} trajectories x T={} ...", index, rs.label,
                    ctx.cfg.run.ensemble, ctx.cfg.run.T);
            auto r = ensemble_row(ctx.cfg, surface, rs.preset, rs.epsilon,
                                  rs.label, ctx.threads);
            r.row = index;
            store_row(ctx, index, r);
            rows.push_back(std::move(r));
        }
        auto const& r = rows.back();
        if (r.status != "ok")
        {
            outcome.failures.push_back(r.label + ": " + r.error);
            if (outcome.failed_stage.empty())
                outcome.failed_stage = r.error.substr(0, r.error.find(':'));
            ctx.say("row {} ({}) failed: {}", index, r.label, r.error);
        }
        else if (r.e_lyapunov)
        {
            ctx.say("row {} ({}): e = {:.6g} +- {:.3g}", index, r.label,
                    *r.e_lyapunov, r.e_lyapunov_se.value_or(0.0));
        }
    }
    return rows;
}

json ensemble_seeds_json(Context const& ctx)
{
    return {{"ensemble", ctx.cfg.run.seed},
            {"riccati", riccati_seed(ctx.cfg.run.seed)}};
}

}  // namespace

//---------------------------------------------------------------------------//

ResultRow ensemble_row(ExperimentConfig const& cfg,
                       ConformalSurface const& surface, FieldPreset preset,
                       double epsilon, std::string label, unsigned threads)
{
    auto const& run = cfg.run;
    ResultRow r;
    r.label = std::move(label);
    r.field_preset = to_string(preset);
    FieldConfig fc = cfg.field;
    fc.preset = preset;
    r.epsilon = applied_strength(fc, epsilon);
    r.n_trajectories = run.ensemble;
    r.T = run.T;
    r.dt = run.dt;

    auto built = build_spec(surface, fc, epsilon);
    ThermostatFlow tf(surface, built.spec, run.dt_max);

    EnsembleConfig ec;
    ec.trajectories = run.ensemble;
    ec.T = run.T;
    ec.dt = run.dt;
    ec.burn_in = run.burn_in;
    ec.renorm_interval = run.renorm_interval;
    ec.seed = run.seed;
    ec.threads = threads;
    try
    {
        auto ep = entropy_production(tf, ec);
        r.lambdas = ep.exponents;
        r.lambda_se = ep.exponent_errors;
        r.e_lyapunov = ep.lyapunov_sum.mean;
        r.e_lyapunov_se = ep.lyapunov_sum.standard_error;
        r.e_birkhoff = ep.birkhoff_divergence.mean;
        r.e_birkhoff_se = ep.birkhoff_divergence.standard_error;
        r.agreement_z = ep.agreement_z;
        r.converged
            = ep.lyapunov_sum.converged && ep.birkhoff_divergence.converged;
        r.history = ep.mean_history;
    }
    catch (NumericalError const& e)
    {
        r.status = "failed";
        r.error = e.what();
        return r;
    }

    if (surface.is_torus())
        return r;
    RiccatiOptions ro;
    ro.burn_in = run.riccati_burn_in;
    ro.dt = run.riccati_dt;
    RiccatiOptions ro_check = ro;
    auto states = sample_liouville(surface, riccati_seed(run.seed),
                                   run.riccati_samples, threads);
    std::vector<double> gaps(states.size());
    ThermostatFlow tf_r(surface, built.spec,
                        std::max(run.dt_max, 0.5 * ro.dt));
    try
    {
        parallel_for(states.size(), threads, [&](std::size_t i) {
            gaps[i] = riccati_at(tf_r, states[i], ro_check).gap();
        });
        r.riccati_gap_min = *std::min_element(gaps.begin(), gaps.end());
    }
    catch (NumericalError const& e)
    {
        r.status = "failed";
        r.error = e.what();
    }
    return r;
}

RunOutcome run_dichotomy(ExperimentConfig const& cfg, RunOptions const& opts)
{
    auto ctx = prepare(cfg, opts);
    auto surface = build_surface(ctx.cfg.surface);
    double eps = ctx.cfg.field.strength;
    RunOutcome outcome{ctx.dir, {}, {}};
    write_manifest(ctx, "dichotomy", ensemble_seeds_json(ctx));
    auto rows = run_rows(ctx, surface,
                         {{"exact", FieldPreset::exact_bump, eps},
                          {"product", FieldPreset::product_bumps, eps}},
                         outcome);
    json extra;
    auto const& ex = rows[0];
    auto const& pr = rows[1];
    json d;
    d["epsilon"] = eps;
    d["e_exact"] = num_or_null(ex.e_lyapunov);
    d["e_exact_se"] = num_or_null(ex.e_lyapunov_se);
    d["e_product"] = num_or_null(pr.e_lyapunov);
    d["e_product_se"] = num_or_null(pr.e_lyapunov_se);
    if (ex.e_lyapunov && pr.e_lyapunov)
    {
        d["exact_consistent_with_zero"]
            = std::abs(*ex.e_lyapunov) <= 3.0 * *ex.e_lyapunov_se;
        d["product_positive"] = *pr.e_lyapunov > 3.0 * *pr.e_lyapunov_se;
        d["estimators_agree"] = ex.agreement_z.value_or(INFINITY) <= 3.0
                                && pr.agreement_z.value_or(INFINITY) <= 3.0;
    }
    extra["dichotomy"] = d;
    write_results(ctx, "dichotomy", rows, extra);
    return outcome;
}

RunOutcome run_scan(ExperimentConfig const& cfg, RunOptions const& opts)
{
    if (cfg.run.epsilons.empty())
        throw ConfigError("scan needs run.epsilons");
    auto p = cfg.field.preset;
    if (p == FieldPreset::none || p == FieldPreset::magnetic_constant
        || p == FieldPreset::magnetic_bump)
        throw ConfigError(std::string("scan needs a field preset scaled by "
                                      "epsilon, not '")
                          + to_string(p) + "'");
    auto ctx = prepare(cfg, opts);
    auto surface = build_surface(ctx.cfg.surface);
    RunOutcome outcome{ctx.dir, {}, {}};
    write_manifest(ctx, "scan", ensemble_seeds_json(ctx));
    std::vector<RowSpec> specs;
    for (double e : ctx.cfg.run.epsilons)
        specs.push_back({fmt::format("eps={}", e), p, e});
    auto rows = run_rows(ctx, surface, specs, outcome);
    json extra;
    bool nonneg = true;
    for (auto const& r : rows)
        if (r.e_lyapunov && *r.e_lyapunov < -3.0 * *r.e_lyapunov_se)
            nonneg = false;
    extra["scan"] = {{"e_nonnegative_within_3sigma", nonneg}};
    write_results(ctx, "scan", rows, extra);
    return outcome;
}

RunOutcome run_lyapunov(ExperimentConfig const& cfg, RunOptions const& opts)
{
    auto ctx = prepare(cfg, opts);
    auto surface = build_surface(ctx.cfg.surface);
    auto const& run = ctx.cfg.run;
    RunOutcome outcome{ctx.dir, {}, {}};
    write_manifest(ctx, "lyapunov",
                   {{"initial_state", run.seed},
                    {"riccati", run.seed}});
    auto built = build_spec(surface, ctx.cfg.field, ctx.cfg.field.strength);
    ThermostatFlow tf(surface, built.spec, run.dt_max);
    auto s0 = sample_liouville(surface, run.seed, 1)[0];

    ResultRow r;
    r.label = "trajectory";
    r.field_preset = to_string(ctx.cfg.field.preset);
    r.epsilon = applied_strength(ctx.cfg.field, ctx.cfg.field.strength);
    r.n_trajectories = 1;
    r.T = run.T;
    r.dt = run.dt;
    LyapunovOptions lo;
    lo.T = run.T;
    lo.dt = run.dt;
    lo.burn_in = run.burn_in;
    lo.renorm_interval = run.renorm_interval;
    ctx.say("lyapunov: T={} dt={} from ({}, {}, {})", run.T, run.dt, s0.x,
            s0.y, s0.phi);
    auto res = lyapunov_spectrum(tf, s0, lo);
    r.lambdas = res.exponents;
    r.e_lyapunov = -(res.exponents[0] + res.exponents[1] + res.exponents[2]);
    r.e_birkhoff = res.minus_divergence_average;
    r.history = res.history;
    if (!surface.is_torus())
    {
        RiccatiOptions ro;
        ro.burn_in = run.riccati_burn_in;
        ro.dt = run.riccati_dt;
        ThermostatFlow tf_r(surface, built.spec,
                            std::max(run.dt_max, 0.5 * ro.dt));
        r.riccati_gap_min = riccati_at(tf_r, s0, ro).gap();
    }
    ctx.say("lyapunov: exponents {:.6f} {:.6f} {:.6f}", res.exponents[0],
            res.exponents[1], res.exponents[2]);
    write_results(ctx, "lyapunov", {r},
                  json{{"lyapunov",
                        {{"convergence_error",
                          {res.convergence_error[0], res.convergence_error[1],
                           res.convergence_error[2]}},
                         {"flow_direction_identified",
                          res.flow_direction_identified}}}});
    return outcome;
}

//---------------------------------------------------------------------------//

namespace {

IdentityCheck threshold_check(std::string name, double value, double limit,
                              std::string detail)
{
    IdentityCheck c;
    c.identity = std::move(name);
    c.lhs = value;
    c.rhs = 0.0;
    c.z = NAN;
    c.sigma_lhs = NAN;
    c.pass = value < limit;
    c.detail = std::move(detail);
    if (std::isfinite(limit))
        c.detail += fmt::format("; pass if < {}", limit);
    return c;
}

}  // namespace

RunOutcome run_verify(ExperimentConfig const& cfg, RunOptions const& opts)
{
    auto ctx = prepare(cfg, opts);
    auto surface = build_surface(ctx.cfg.surface);
    auto const& run = ctx.cfg.run;
    auto built = build_spec(surface, ctx.cfg.field, ctx.cfg.field.strength);
    auto const& spec = built.spec;
    RunOutcome outcome{ctx.dir, {}, {}};
    std::string const label = ctx.cfg.name;
    std::vector<IdentityRow> rows;
    auto add = [&](IdentityCheck c) {
        ctx.say("{:<32} {} {}", c.identity, c.pass ? "pass" : "FAIL",
                c.detail);
        rows.push_back({label, std::move(c)});
    };

    json seeds = {{"states", verify_seed(run.seed, 0)},
                  {"integral", verify_seed(run.seed, 1)},
                  {"symmetry", verify_seed(run.seed, 2)},
                  {"positivity", verify_seed(run.seed, 3)},
                  {"riccati", riccati_seed(run.seed)}};
    write_manifest(ctx, "verify", seeds);

    auto states = sample_liouville(surface, verify_seed(run.seed, 0),
                                   run.n_states, ctx.threads);
    std::size_t n_states = states.size();

    // frame commutation relations
    {
        std::vector<double> worst(n_states);
        parallel_for(n_states, ctx.threads, [&](std::size_t i) {
            auto r = bracket_residuals(surface, states[i]);
            worst[i] = std::max({r[0], r[1], r[2]});
        });
        add(threshold_check("frame_brackets",
                            *std::max_element(worst.begin(), worst.end()),
                            1e-5, fmt::format("max over {} states", n_states)));
    }

    auto fns = preset_test_functions(surface);
    for (auto const& fn : fns)
    {
        std::vector<double> res(n_states);
        parallel_for(n_states, ctx.threads, [&](std::size_t i) {
            res[i] = pestov_residual(spec, surface, fn.u, states[i]);
        });
        add(threshold_check("pestov/" + fn.name,
                            *std::max_element(res.begin(), res.end()), 1e-5,
                            fmt::format("max over {} states", n_states)));
    }

    for (auto const& fn : fns)
    {
        MonteCarloOptions mc{run.n_samples, verify_seed(run.seed, 1),
                             ctx.threads};
        auto c = integral_identity_check(spec, surface, fn.u, mc);
        c.identity += "/" + fn.name;
        add(std::move(c));
    }

    {
        OneForm theta = spec.variant() == SpecVariant::gaussian
                            ? spec.form()
                        : surface.is_torus()
                            ? OneForm::constant(ctx.cfg.field.form[0],
                                                ctx.cfg.field.form[1])
                            : make_product_form(
                                  surface,
                                  make_bump(surface, default_octagon_w1()),
                                  make_bump(surface, default_octagon_w2()))
                                  .form;
        MonteCarloOptions mc{run.n_samples, verify_seed(run.seed, 2),
                             ctx.threads};
        auto rep = liouville_symmetry_check(surface, theta, mc);
        add(threshold_check(
            "liouville_antithetic",
            std::max(rep.paired_odd_max, rep.paired_square_max), INFINITY,
            "max paired difference; pass if < 1e-12 relative"));
        rows.back().check.pass = rep.antithetic_pass;
        add(rep.mean_zero);
        add(rep.squares_equal);
        if (rep.closed_form)
            add(*rep.closed_form);
    }

    if (surface.is_torus())
    {
        ctx.say("riccati and positivity suites skipped: flows on a torus "
                "are not Anosov");
    }
    else
    {
        RiccatiOptions ro;
        ro.burn_in = run.riccati_burn_in;
        ro.dt = run.riccati_dt;
        ThermostatFlow tf(surface, spec, std::max(run.dt_max, 0.5 * ro.dt));
        auto rstates = sample_liouville(surface, riccati_seed(run.seed),
                                        run.riccati_samples, ctx.threads);
        std::vector<RiccatiValue> vals(rstates.size());
        parallel_for(rstates.size(), ctx.threads, [&](std::size_t i) {
            vals[i] = riccati_at(tf, rstates[i], ro);
        });
        double gap = INFINITY, sc = 0.0;
        for (auto const& v : vals)
        {
            gap = std::min(gap, v.gap());
            sc = std::max(sc, v.self_consistency);
        }
        auto g = threshold_check("riccati_gap", gap, INFINITY,
                                 fmt::format("min r_unstable - r_stable over "
                                             "{} states; pass if > 0.5",
                                             rstates.size()));
        g.pass = gap > 0.5;
        add(std::move(g));
        add(threshold_check("riccati_self_consistency", sc, 1e-6,
                            "max spread of relaxations from 0, +2, -2"));

        ThermostatFlow tf_fine(surface, spec, std::max(run.dt_max, 5e-4));
        auto rr = riccati_residual(tf_fine, rstates[0], 20.0, ro.burn_in, 1e-3);
        add(threshold_check("riccati_residual", rr.max_residual(), 1e-5,
                            fmt::format("orbit window 20, min gap {}",
                                        format_number(rr.min_gap))));

        std::vector<NamedFunction> psis{{"one", BundleFunction::constant(1.0)}};
        for (auto const& f : fns)
            psis.push_back(f);
        for (auto which : {Bundle::unstable, Bundle::stable})
        {
            PositivityOptions po;
            po.mc = {run.positivity_samples, verify_seed(run.seed, 3),
                     ctx.threads};
            po.riccati = ro;
            po.which = which;
            auto checks = positivity_identity_check(tf, psis, po);
            for (std::size_t k = 0; k < checks.size(); ++k)
            {
                auto& pc = checks[k];
                pc.identity.identity += "/" + psis[k].name;
                pc.identity.pass = pc.identity.pass && pc.rhs_nonnegative;
                pc.identity.detail += pc.rhs_positive ? " rhs>3sigma"
                                                      : " rhs<=3sigma";
                add(std::move(pc.identity));
            }
        }
    }

    bool all_pass = true;
    for (auto const& r : rows)
        all_pass = all_pass && r.check.pass;

    auto const& out = ctx.cfg.output;
    if (out.csv)
    {
        std::string csv = csv_line(identity_columns());
        for (auto const& r : rows)
            csv += csv_line(identity_fields(r));
        write_atomic(ctx.dir / "results.csv", csv);
    }
    if (out.json)
    {
        json s;
        s["schema_version"] = identities_schema;
        s["subcommand"] = "verify";
        s["config_name"] = ctx.cfg.name;
        s["config_sha256"] = ctx.config_hash;
        s["rows"] = json::array();
        for (auto const& r : rows)
            s["rows"].push_back(identity_json(r));
        s["all_pass"] = all_pass;
        if (built.max_curl)
            s["product_max_curl"] = *built.max_curl;
        write_atomic(ctx.dir / "summary.json", s.dump(2) + "\n");
    }
    if (!all_pass)
        for (auto const& r : rows)
            if (!r.check.pass)
                outcome.failures.push_back(r.check.identity);
    return outcome;
}

RunOutcome run_subcommand(std::string const& name, ExperimentConfig const& cfg,
                          RunOptions const& opts)
{
    if (name == "verify")
        return run_verify(cfg, opts);
    if (name == "dichotomy")
        return run_dichotomy(cfg, opts);
    if (name == "scan")
        return run_scan(cfg, opts);
    if (name == "lyapunov")
        return run_lyapunov(cfg, opts);
    throw ConfigError("unknown subcommand '" + name + "'");
}

}  // namespace isokin
