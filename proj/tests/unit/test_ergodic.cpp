#include <cmath>
#include <numbers>

#include <doctest.h>

#include "isokin/ergodic.hpp"
#include "isokin/errors.hpp"
#include "support/surfaces.hpp"

using namespace isokin;
using namespace isokin::testing;

TEST_CASE("flat torus geodesic exponents vanish")
{
    auto t = flat_torus();
    auto spec = ThermostatSpec::geodesic();
    ThermostatFlow tf(t, spec, 0.01);
    LyapunovOptions opts;
    opts.T = 20000.0;
    opts.dt = 0.01;
    opts.burn_in = 0.0;
    auto r = lyapunov_spectrum(tf, UnitTangent{1.0, 2.0, 0.4}, opts);
    // shear growth is linear, so the estimates decay like log(T)/T
    for (double e : r.exponents)
        CHECK(std::abs(e) < 1e-3);
    CHECK(r.exponents[0] >= r.exponents[1]);
    CHECK(r.exponents[1] >= r.exponents[2]);
    CHECK(r.history.size() == 20000);
    CHECK(r.renorm_interval == doctest::Approx(1.0));
}

TEST_CASE("octagon geodesic exponents approach plus and minus one")
{
    auto s = octagon();
    auto spec = ThermostatSpec::geodesic();
    ThermostatFlow tf(s, spec, 0.01);
    LyapunovOptions opts;
    opts.T = 400.0;
    opts.dt = 0.01;
    opts.burn_in = 5.0;
    auto r = lyapunov_spectrum(tf, UnitTangent{0.1, -0.2, 1.0}, opts);
    CHECK(r.exponents[0] == doctest::Approx(1.0).epsilon(0.05));
    CHECK(std::abs(r.exponents[1]) < 0.05);
    CHECK(r.exponents[2] == doctest::Approx(-1.0).epsilon(0.05));
    double sum = r.exponents[0] + r.exponents[1] + r.exponents[2];
    CHECK(std::abs(sum) < 1e-6);
    CHECK(r.minus_divergence_average == 0.0);
    // the running estimates settle
    CHECK(r.convergence_error[0] < 0.05);
}

TEST_CASE("constant magnetic field on the octagon")
{
    auto s = octagon();
    double m = 0.5;
    auto spec = ThermostatSpec::magnetic(ScalarField::constant(m));
    ThermostatFlow tf(s, spec, 0.01);
    LyapunovOptions opts;
    opts.T = 400.0;
    opts.dt = 0.01;
    opts.burn_in = 5.0;
    auto r = lyapunov_spectrum(tf, UnitTangent{0.2, 0.1, 2.0}, opts);
    double expect = std::sqrt(1.0 - m * m);
    CHECK(r.exponents[0] == doctest::Approx(expect).epsilon(0.05));
    CHECK(r.exponents[2] == doctest::Approx(-expect).epsilon(0.05));
    CHECK(std::abs(r.exponents[0] + r.exponents[1] + r.exponents[2]) < 1e-6);
}

TEST_CASE("oversized renormalization interval is reported")
{
    auto s = octagon();
    auto spec = ThermostatSpec::geodesic();
    ThermostatFlow tf(s, spec, 0.01);
    LyapunovOptions opts;
    opts.T = 40.0;
    opts.dt = 0.01;
    opts.burn_in = 0.0;
    opts.renorm_interval = 15.0;
    CHECK_THROWS_AS(lyapunov_spectrum(tf, UnitTangent{0.1, 0.1, 0.3}, opts),
                    NumericalError);
    opts.renorm_interval = 0.0;
    CHECK_THROWS_AS(lyapunov_spectrum(tf, UnitTangent{0.1, 0.1, 0.3}, opts),
                    PreconditionError);
}

TEST_CASE("log-det of the tangent frame matches the divergence integral")
{
    auto s = octagon();
    auto spec = ThermostatSpec::gaussian(
        make_product_form(s, octagon_w1(), octagon_w2()).form.scaled(0.3));
    ThermostatFlow tf(s, spec, 0.01);
    LyapunovOptions opts;
    opts.T = 50.0;
    opts.dt = 0.01;
    opts.burn_in = 2.0;
    auto r = lyapunov_spectrum(tf, UnitTangent{0.05, 0.2, 0.7}, opts);
    double sum = r.exponents[0] + r.exponents[1] + r.exponents[2];
    // Liouville: d/dt log det = div F = V(lambda)
    CHECK(-sum == doctest::Approx(r.minus_divergence_average).epsilon(1e-6));
    CHECK(r.minus_divergence_average != 0.0);
}

TEST_CASE("birkhoff average of a constant is exact")
{
    auto s = octagon();
    auto spec = ThermostatSpec::geodesic();
    ThermostatFlow tf(s, spec, 0.01);
    EnsembleConfig cfg;
    cfg.trajectories = 6;
    cfg.T = 5.0;
    cfg.dt = 0.01;
    cfg.burn_in = 1.0;
    auto r = birkhoff_average(
        tf, Observer{"c", [](UnitTangent const&) { return 2.5; }}, cfg);
    CHECK(r.mean == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(r.standard_error < 1e-14);
    CHECK(r.n_samples == 6);
    CHECK(r.converged);
}

TEST_CASE("octagon geodesic equidistributes the heading")
{
    auto s = octagon();
    auto spec = ThermostatSpec::geodesic();
    ThermostatFlow tf(s, spec, 0.01);
    EnsembleConfig cfg;
    cfg.trajectories = 40;
    cfg.T = 100.0;
    cfg.dt = 0.01;
    cfg.burn_in = 5.0;
    cfg.seed = 11;
    auto r = birkhoff_average(
        tf,
        Observer{"cos_phi",
                 [](UnitTangent const& st) { return std::cos(st.phi); }},
        cfg);
    CHECK(r.standard_error > 0.0);
    CHECK(std::abs(r.mean) < 3.0 * r.standard_error);
}

TEST_CASE("theta(v) averages to minus the V(lambda) average per sample")
{
    auto s = octagon();
    auto spec = ThermostatSpec::gaussian(
        make_product_form(s, octagon_w1(), octagon_w2()).form.scaled(0.3));
    ThermostatFlow tf(s, spec, 0.01);
    EnsembleConfig cfg;
    cfg.trajectories = 4;
    cfg.T = 10.0;
    cfg.dt = 0.01;
    cfg.burn_in = 1.0;
    auto a = birkhoff_average(tf, observe_theta_v(tf), cfg);
    auto b = birkhoff_average(tf, observe_V_lambda(tf), cfg);
    CHECK(a.mean == doctest::Approx(-b.mean).epsilon(1e-12));
    CHECK(a.standard_error
          == doctest::Approx(b.standard_error).epsilon(1e-10));
}

TEST_CASE("geodesic entropy production vanishes")
{
    auto s = octagon();
    auto spec = ThermostatSpec::geodesic();
    ThermostatFlow tf(s, spec, 0.01);
    EnsembleConfig cfg;
    cfg.trajectories = 8;
    cfg.T = 40.0;
    cfg.dt = 0.01;
    cfg.burn_in = 2.0;
    auto e = entropy_production(tf, cfg);
    CHECK(e.birkhoff_divergence.mean == 0.0);
    CHECK(std::abs(e.lyapunov_sum.mean) < 1e-8);
    CHECK(e.lyapunov_sum.standard_error <= 5e-3);
    CHECK(e.lyapunov_sum.method == EstimatorMethod::lyapunov_sum);
    CHECK(e.birkhoff_divergence.method == EstimatorMethod::birkhoff_divergence);
    CHECK(e.trajectory_exponents.size() == 8);
    CHECK(e.mean_history.size() == 40);
}

TEST_CASE("ensemble results do not depend on the worker count")
{
    auto s = octagon();
    auto spec = ThermostatSpec::gaussian(
        make_product_form(s, octagon_w1(), octagon_w2()).form.scaled(0.3));
    ThermostatFlow tf(s, spec, 0.01);
    EnsembleConfig cfg;
    cfg.trajectories = 5;
    cfg.T = 6.0;
    cfg.dt = 0.01;
    cfg.burn_in = 1.0;
    cfg.threads = 1;
    auto a = entropy_production(tf, cfg);
    cfg.threads = 3;
    auto b = entropy_production(tf, cfg);
    CHECK(a.lyapunov_sum.mean == b.lyapunov_sum.mean);
    CHECK(a.lyapunov_sum.standard_error == b.lyapunov_sum.standard_error);
    CHECK(a.birkhoff_divergence.mean == b.birkhoff_divergence.mean);
    CHECK(a.exponents == b.exponents);
}

TEST_CASE("flipped time-reversed ensemble reproduces the entropy production")
{
    // Reversibility: backward orbits of flipped seeds are flipped forward
    // orbits, and V(lambda) changes sign under the flip.
    auto s = octagon();
    auto spec = ThermostatSpec::gaussian(
        make_product_form(s, octagon_w1(), octagon_w2()).form.scaled(0.3));
    ThermostatFlow tf(s, spec, 0.01);
    EnsembleConfig cfg;
    cfg.trajectories = 6;
    cfg.T = 20.0;
    cfg.dt = 0.01;
    cfg.burn_in = 0.0;
    auto fwd = entropy_production(tf, cfg);
    cfg.time_reversed = true;
    auto rev = entropy_production(tf, cfg);
    // with no burn-in the reversed runs trace exactly the flipped forward
    // orbits, so the per-trajectory values coincide up to rounding
    CHECK(rev.birkhoff_divergence.mean
          == doctest::Approx(fwd.birkhoff_divergence.mean).epsilon(1e-8));
    CHECK(rev.lyapunov_sum.mean
          == doctest::Approx(fwd.lyapunov_sum.mean).epsilon(1e-6));
}

TEST_CASE("drift between T/10 and T is flagged")
{
    auto r = summarize({1.0, 1.1, 0.9, 1.0}, {0.0, 0.1, -0.1, 0.0},
                       EstimatorMethod::lyapunov_sum);
    CHECK(r.mean == doctest::Approx(1.0));
    CHECK_FALSE(r.converged);
    CHECK(r.drift_z > 5.0);
    auto ok = summarize({1.0, 1.1, 0.9, 1.0}, {1.0, 1.2, 0.8, 1.05},
                        EstimatorMethod::lyapunov_sum);
    CHECK(ok.converged);
    CHECK(std::string(to_string(EstimatorMethod::birkhoff_divergence))
          == "birkhoff_divergence");
}
