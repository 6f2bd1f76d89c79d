#include "isokin/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/LU>
#include <Eigen/QR>

#include "isokin/errors.hpp"
#include "isokin/parallel.hpp"
#include "isokin/stats.hpp"

namespace isokin {
namespace {

long step_count(double span, double dt)
{
    return std::max(1L, static_cast<long>(std::llround(span / dt)));
}

std::array<double, 3> sorted_desc(std::array<double, 3> v)
{
    std::sort(v.begin(), v.end(), std::greater<>());
    return v;
}

void burn(ThermostatFlow const& tf, FlowState& state, double burn_in,
          double dt)
{
    if (burn_in <= 0.0)
        return;
    long n = step_count(burn_in, std::abs(dt));
    for (long i = 0; i < n; ++i)
        tf.step(state, dt);
}

double minus_divergence(ThermostatFlow const& tf, UnitTangent const& s,
                        double sign)
{
    if (tf.spec().variant() == SpecVariant::geodesic)
        return 0.0;
    return -sign * tf.spec().lambda_jet(tf.surface(), s).d(2);
}

}  // namespace

LyapunovResult lyapunov_spectrum(ThermostatFlow const& tf,
                                 UnitTangent const& s0,
                                 LyapunovOptions const& options,
                                 std::vector<Observer> const& observers)
{
    if (!(options.T > 0.0) || !(options.dt > 0.0)
        || !(options.renorm_interval > 0.0) || options.burn_in < 0.0)
        throw PreconditionError("lyapunov_spectrum needs T, dt, "
                                "renorm_interval > 0 and burn_in >= 0");
    if (options.renorm_interval > options.T)
        throw PreconditionError("renorm_interval exceeds T");

    double const sign = options.time_reversed ? -1.0 : 1.0;
    long steps_per = step_count(options.renorm_interval, options.dt);
    double h = options.renorm_interval / static_cast<double>(steps_per);
    long n_renorm = step_count(options.T, options.renorm_interval);
    double interval = steps_per * h;

    FlowState state;
    state.s = s0;
    state.record_deck = false;
    tf.reduce(state);
    burn(tf, state, options.burn_in, sign * options.dt);

    LyapunovResult out;
    out.renorm_interval = interval;
    out.history.reserve(static_cast<std::size_t>(n_renorm));

    std::size_t nobs = observers.size();
    std::vector<double> sums(nobs + 1, 0.0), prev(nobs + 1);
    auto sample = [&](UnitTangent const& s, std::vector<double>& dst) {
        for (std::size_t i = 0; i < nobs; ++i)
            dst[i] = observers[i].fn(s);
        dst[nobs] = minus_divergence(tf, s, sign);
    };
    sample(state.s, prev);
    std::vector<double> cur(nobs + 1);

    long checkpoint = std::max(
        1L, static_cast<long>(std::llround(options.checkpoint_fraction
                                           * static_cast<double>(n_renorm))));
    // Generic initial frame: a column on the invariant flow direction would
    // stay there until roundoff flips it mid-run.
    Mat3 generic;
    generic << 0.8, -0.3, 0.2, 0.5, 0.7, -0.4, 0.3, 0.6, 0.9;
    Mat3 q0 = Eigen::HouseholderQR<Mat3>(generic).householderQ();
    Mat3 tangent = frame_matrix(tf.surface(), state.s) * q0;
    std::array<double, 3> log_sums{0.0, 0.0, 0.0};
    double const max_log_stretch = 10.0;

    for (long k = 1; k <= n_renorm; ++k)
    {
        for (long i = 0; i < steps_per; ++i)
        {
            tf.variational_step(state, tangent, sign * h);
            sample(state.s, cur);
            for (std::size_t j = 0; j <= nobs; ++j)
            {
                sums[j] += 0.5 * (prev[j] + cur[j]);
                prev[j] = cur[j];
            }
        }
        Mat3 frame = frame_matrix(tf.surface(), state.s);
        Mat3 coords = frame.lu().solve(tangent);
        Eigen::HouseholderQR<Mat3> qr(coords);
        Mat3 r = qr.matrixQR().triangularView<Eigen::Upper>();
        Mat3 q = qr.householderQ();
        for (int i = 0; i < 3; ++i)
        {
            double stretch = std::abs(r(i, i));
            double l = std::log(stretch);
            if (!std::isfinite(l) || l > max_log_stretch)
                throw NumericalError(
                    "lyapunov",
                    "tangent frame stretched beyond e^10 within one "
                    "renormalization; reduce renorm_interval");
            log_sums[i] += l;
        }
        tangent = frame * q;
        if (k == checkpoint)
            out.minus_divergence_checkpoint
                = sums[nobs] / static_cast<double>(k * steps_per);

        double t = k * interval;
        out.history.push_back(
            {t, sorted_desc({log_sums[0] / t, log_sums[1] / t,
                             log_sums[2] / t})});
    }

    double total = n_renorm * interval;
    out.exponents = sorted_desc(
        {log_sums[0] / total, log_sums[1] / total, log_sums[2] / total});
    double nsteps = static_cast<double>(n_renorm * steps_per);
    for (std::size_t j = 0; j < nobs; ++j)
        out.observer_averages.push_back(sums[j] / nsteps);
    out.minus_divergence_average = sums[nobs] / nsteps;

    for (int i = 0; i < 3; ++i)
    {
        RunningStats tail;
        for (auto const& hp : out.history)
            if (hp.t >= 0.1 * total)
                tail.add(hp.exponents[i]);
        out.convergence_error[i] = tail.stddev();
    }
    int near_zero = 0;
    for (double e : out.exponents)
        if (std::abs(e) <= options.flow_zero_tol)
            ++near_zero;
    out.flow_direction_identified
        = near_zero == 1 && std::abs(out.exponents[1]) <= options.flow_zero_tol;
    out.final_state = state.s;
    return out;
}

//---------------------------------------------------------------------------//

char const* to_string(EstimatorMethod m)
{
    switch (m)
    {
        case EstimatorMethod::lyapunov_sum:
            return "lyapunov_sum";
        case EstimatorMethod::birkhoff_divergence:
            return "birkhoff_divergence";
        case EstimatorMethod::birkhoff:
            return "birkhoff";
    }
    return "unknown";
}

EstimatorResult summarize(std::vector<double> const& final_values,
                          std::vector<double> const& early_values,
                          EstimatorMethod method)
{
    RunningStats fin, early;
    for (double v : final_values)
        fin.add(v);
    for (double v : early_values)
        early.add(v);
    EstimatorResult out;
    out.mean = fin.mean();
    out.standard_error = fin.standard_error();
    out.n_samples = fin.count();
    out.method = method;
    if (early.count() > 0)
    {
        double sigma = std::hypot(fin.standard_error(), early.standard_error());
        double diff = std::abs(fin.mean() - early.mean());
        out.drift_z = sigma > 0.0 ? diff / sigma : (diff > 0.0 ? INFINITY : 0.0);
        out.converged = out.drift_z <= 5.0;
    }
    return out;
}

namespace {

void check_ensemble(EnsembleConfig const& config)
{
    if (config.trajectories < 2)
        throw PreconditionError("ensemble needs at least 2 trajectories");
    if (!(config.T > 0.0) || !(config.dt > 0.0) || config.burn_in < 0.0)
        throw PreconditionError("ensemble needs T, dt > 0 and burn_in >= 0");
}

std::vector<UnitTangent> ensemble_seeds(ThermostatFlow const& tf,
                                        EnsembleConfig const& config)
{
    auto seeds = sample_liouville(tf.surface(), config.seed,
                                  config.trajectories, config.threads);
    if (config.time_reversed)
        for (auto& s : seeds)
            s = s.flipped();
    return seeds;
}

//! Value of the history at the first point with t >= t_target
template <class H, class F>
double history_at(std::vector<H> const& hist, double t_target, F&& get)
{
    for (auto const& hp : hist)
        if (hp.t >= t_target - 1e-9)
            return get(hp);
    return get(hist.back());
}

}  // namespace

EntropyProduction entropy_production(ThermostatFlow const& tf,
                                     EnsembleConfig const& config)
{
    check_ensemble(config);
    auto seeds = ensemble_seeds(tf, config);
    std::size_t n = seeds.size();

    LyapunovOptions opts;
    opts.T = config.T;
    opts.dt = config.dt;
    opts.burn_in = config.burn_in;
    opts.renorm_interval = config.renorm_interval;
    opts.time_reversed = config.time_reversed;

    std::vector<LyapunovResult> runs(n);
    parallel_for(n, config.threads, [&](std::size_t i) {
        runs[i] = lyapunov_spectrum(tf, seeds[i], opts);
    });
    double const t_early = opts.checkpoint_fraction * config.T;

    EntropyProduction out;
    std::vector<double> lsum(n), lsum_early(n), bdiv(n), bdiv_early(n);
    std::array<RunningStats, 3> exps;
    for (std::size_t i = 0; i < n; ++i)
    {
        auto const& r = runs[i];
        lsum[i] = -(r.exponents[0] + r.exponents[1] + r.exponents[2]);
        lsum_early[i] = history_at(r.history, t_early, [](auto const& hp) {
            return -(hp.exponents[0] + hp.exponents[1] + hp.exponents[2]);
        });
        bdiv[i] = r.minus_divergence_average;
        bdiv_early[i] = r.minus_divergence_checkpoint;
        for (int k = 0; k < 3; ++k)
            exps[k].add(r.exponents[k]);
        out.trajectory_exponents.push_back(r.exponents);
    }
    out.lyapunov_sum
        = summarize(lsum, lsum_early, EstimatorMethod::lyapunov_sum);
    out.birkhoff_divergence
        = summarize(bdiv, bdiv_early, EstimatorMethod::birkhoff_divergence);
    double sigma = std::hypot(out.lyapunov_sum.standard_error,
                              out.birkhoff_divergence.standard_error);
    double diff = std::abs(out.lyapunov_sum.mean - out.birkhoff_divergence.mean);
    out.agreement_z = sigma > 0.0 ? diff / sigma : (diff > 0.0 ? INFINITY : 0.0);
    for (int k = 0; k < 3; ++k)
    {
        out.exponents[k] = exps[k].mean();
        out.exponent_errors[k] = exps[k].standard_error();
    }

    auto const& h0 = runs[0].history;
    out.mean_history.reserve(h0.size());
    for (std::size_t j = 0; j < h0.size(); ++j)
    {
        LyapunovHistoryPoint hp{h0[j].t, {0.0, 0.0, 0.0}};
        for (auto const& r : runs)
            for (int k = 0; k < 3; ++k)
                hp.exponents[k] += r.history[j].exponents[k]
                                   / static_cast<double>(n);
        out.mean_history.push_back(hp);
    }
    return out;
}

EstimatorResult birkhoff_average(ThermostatFlow const& tf,
                                 Observer const& observable,
                                 EnsembleConfig const& config)
{
    check_ensemble(config);
    auto seeds = ensemble_seeds(tf, config);
    std::size_t n = seeds.size();
    double const dt = config.time_reversed ? -config.dt : config.dt;
    long nsteps = step_count(config.T, config.dt);
    long early_steps = step_count(0.1 * config.T, config.dt);

    std::vector<double> fin(n), early(n);
    parallel_for(n, config.threads, [&](std::size_t i) {
        FlowState state;
        state.s = seeds[i];
        state.record_deck = false;
        tf.reduce(state);
        burn(tf, state, config.burn_in, dt);
        double prev = observable.fn(state.s);
        double sum = 0.0;
        for (long k = 1; k <= nsteps; ++k)
        {
            tf.step(state, dt);
            double cur = observable.fn(state.s);
            sum += 0.5 * (prev + cur);
            prev = cur;
            if (k == early_steps)
                early[i] = sum / static_cast<double>(k);
        }
        fin[i] = sum / static_cast<double>(nsteps);
    });
    return summarize(fin, early, EstimatorMethod::birkhoff);
}

}  // namespace isokin
