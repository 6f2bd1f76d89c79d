#include <chrono>
#include <cmath>
#include <numbers>

#include <doctest.h>

#include "isokin/dynamics.hpp"
#include "support/surfaces.hpp"

using namespace isokin;
using namespace isokin::testing;

namespace {

double angle_gap(double a, double b)
{
    return std::abs(std::remainder(a - b, two_pi));
}

double periodic_gap(double a, double b, double period)
{
    return std::abs(std::remainder(a - b, period));
}

// final position error of the magnetic circle at T = pi / m (half turn)
double circle_error(double m, double dt)
{
    auto t = flat_torus();
    auto spec = ThermostatSpec::magnetic(ScalarField::constant(m));
    ThermostatFlow tf(t, spec, 4e-3);
    double T = 1.0;
    FlowState st{UnitTangent{1.0, 1.0, 0.0}};
    long n = std::lround(T / dt);
    for (long i = 0; i < n; ++i)
        tf.step(st, dt);
    // center at (1, 1 + 1/m)
    double xe = 1.0 + std::sin(m * T) / m;
    double ye = 1.0 + (1.0 - std::cos(m * T)) / m;
    return std::hypot(st.s.x - xe, st.s.y - ye);
}

}  // namespace

TEST_CASE("flat torus geodesic is a straight line")
{
    auto t = flat_torus();
    auto spec = ThermostatSpec::geodesic();
    ThermostatFlow tf(t, spec);
    FlowState st{UnitTangent{0, 0, 0}};
    for (int i = 0; i < 10000; ++i)
        tf.step(st, 1e-3);
    CHECK(periodic_gap(st.s.x, 10.0, two_pi) < 1e-12);
    CHECK(st.s.y == 0.0);
    CHECK(st.s.phi == 0.0);
    CHECK(st.s.x >= 0.0);
    CHECK(st.s.x < two_pi);
}

TEST_CASE("magnetic circle closes")
{
    double m = 1.0;
    auto t = flat_torus();
    auto spec = ThermostatSpec::magnetic(ScalarField::constant(m));
    ThermostatFlow tf(t, spec);
    int n = 6284;
    double dt = two_pi / m / n;
    FlowState st{UnitTangent{0, 0, 0}};
    for (int i = 0; i < n; ++i)
        tf.step(st, dt);
    CHECK(periodic_gap(st.s.x, 0.0, two_pi) < 1e-9);
    CHECK(periodic_gap(st.s.y, 0.0, two_pi) < 1e-9);
    CHECK(angle_gap(st.s.phi, 0.0) < 1e-9);
}

TEST_CASE("RK4 converges at fourth order")
{
    double e4 = circle_error(5.0, 4e-3), e2 = circle_error(5.0, 2e-3), e1 = circle_error(5.0, 1e-3);
    CAPTURE(e4);
    CAPTURE(e2);
    CAPTURE(e1);
    CHECK(e4 / e2 > 8.0);
    CHECK(e4 / e2 < 32.0);
    CHECK(e2 / e1 > 8.0);
    CHECK(e2 / e1 < 32.0);
}

TEST_CASE("step size bound")
{
    auto t = flat_torus();
    auto spec = ThermostatSpec::geodesic();
    ThermostatFlow tf(t, spec);
    FlowState st;
    CHECK_THROWS_AS(tf.step(st, 2e-3), PreconditionError);
    CHECK_NOTHROW(tf.step(st, -1e-3));
}

TEST_CASE("disk geodesics through the origin are diameters")
{
    auto o = octagon();
    auto spec = ThermostatSpec::geodesic();
    ThermostatFlow tf(o, spec);
    for (double phi : {0.1, 0.9, 2.0, 4.4})
    {
        SUBCASE("on the cover")
        {
            FlowState st{UnitTangent{0, 0, phi}};
            double worst = 0;
            for (int i = 0; i < 3000; ++i)
            {
                tf.step(st, 1e-3, false);
                worst = std::max(worst, std::abs(-std::sin(phi) * st.s.x + std::cos(phi) * st.s.y));
            }
            CHECK(worst < 1e-8);
            // hyperbolic length 3 from the origin
            CHECK(hyperbolic_radius({st.s.x, st.s.y}) == doctest::Approx(3.0).epsilon(1e-10));
        }
        SUBCASE("with reductions, mapped back by the deck word")
        {
            FlowState st{UnitTangent{0, 0, phi}};
            for (int i = 0; i < 3000; ++i)
                tf.step(st, 1e-3);
            CHECK_FALSE(st.word_log.empty());
            CHECK((o.group().word_map(st.word_log) * st.deck.inverse()).distance_to_identity() < 1e-8);
            auto back = apply(st.deck.inverse(), st.s);
            CHECK(std::abs(-std::sin(phi) * back.x + std::cos(phi) * back.y) < 1e-8);
            CHECK(angle_gap(back.phi, phi) < 1e-8);
        }
    }
}

TEST_CASE("reductions commute with the flow")
{
    auto o = octagon();
    auto spec = ThermostatSpec::gaussian(OneForm::product(octagon_w1(), octagon_w2()).scaled(0.3));
    ThermostatFlow tf(o, spec);
    Rng rng = make_stream(51, 0);
    for (int trial = 0; trial < 5; ++trial)
    {
        auto s0 = random_state(o, rng);
        FlowState a{s0}, b{s0};
        for (int i = 0; i < 2000; ++i)
        {
            tf.step(a, 1e-3);
            tf.step(b, 1e-3, false);
        }
        auto mapped = apply(a.deck.inverse(), a.s);
        CHECK(std::abs(mapped.x - b.s.x) < 1e-9);
        CHECK(std::abs(mapped.y - b.s.y) < 1e-9);
        CHECK(angle_gap(mapped.phi, b.s.phi) < 1e-9);
    }
}

TEST_CASE("gaussian thermostat is reversible under the flip")
{
    auto o = octagon();
    auto spec = ThermostatSpec::gaussian(OneForm::product(octagon_w1(), octagon_w2()).scaled(0.3));
    ThermostatFlow tf(o, spec);
    Rng rng = make_stream(52, 0);
    for (int trial = 0; trial < 5; ++trial)
    {
        auto s0 = random_state(o, rng);
        FlowState fwd{s0.flipped()}, back{s0};
        for (int i = 0; i < 1000; ++i)
        {
            tf.step(fwd, 1e-3, false);
            tf.step(back, -1e-3, false);
        }
        auto f = fwd.s;
        CHECK(std::abs(f.x - back.s.x) < 1e-7);
        CHECK(std::abs(f.y - back.s.y) < 1e-7);
        CHECK(angle_gap(f.phi + std::numbers::pi, back.s.phi) < 1e-7);
    }
}

TEST_CASE("variational flow")
{
    SUBCASE("flat torus geodesic shears")
    {
        auto t = flat_torus();
        auto spec = ThermostatSpec::geodesic();
        ThermostatFlow tf(t, spec);
        double phi = 0.7;
        FlowState st{UnitTangent{1, 1, phi}};
        Mat3 tan = Mat3::Identity();
        for (int i = 0; i < 2000; ++i)
            tf.variational_step(st, tan, 1e-3);
        Mat3 expect = Mat3::Identity();
        expect(0, 2) = -2.0 * std::sin(phi);
        expect(1, 2) = 2.0 * std::cos(phi);
        CHECK((tan - expect).norm() < 1e-12);
    }
    SUBCASE("disk geodesic Jacobi field grows like cosh")
    {
        auto o = octagon();
        auto spec = ThermostatSpec::geodesic();
        ThermostatFlow tf(o, spec);
        UnitTangent s0{0.1, -0.2, 0.8};
        FlowState st{s0};
        Mat3 tan = Mat3::Zero();
        tan.col(0) = frame_at(o, s0).H;
        double worst = 0;
        for (int i = 1; i <= 5000; ++i)
        {
            tf.variational_step(st, tan, 1e-3);
            double t = i * 1e-3;
            // H-seeded Jacobi field: (cosh t) H + (sinh t) V in the frame
            Vec3 c = to_frame(o, st.s, tan.col(0));
            worst = std::max({worst, std::abs(c[1] / std::cosh(t) - 1), std::abs(c[2] - std::sinh(t)) / std::cosh(t),
                              std::abs(c[0]) / std::cosh(t)});
        }
        CHECK(worst < 1e-6);
    }
    SUBCASE("matches finite differences of nearby trajectories")
    {
        auto o = octagon();
        auto spec = ThermostatSpec::gaussian(OneForm::product(octagon_w1(), octagon_w2()).scaled(0.3));
        ThermostatFlow tf(o, spec);
        UnitTangent s0{0.2, 0.1, 2.0};
        FlowState st{s0};
        Mat3 tan = Mat3::Identity();
        for (int i = 0; i < 3000; ++i)
            tf.variational_step(st, tan, 1e-3);
        double delta = 1e-6;
        for (int c = 0; c < 3; ++c)
        {
            Vec3 e = Vec3::Zero();
            e[c] = delta;
            FlowState p{UnitTangent{s0.x + e[0], s0.y + e[1], s0.phi + e[2]}};
            FlowState m{UnitTangent{s0.x - e[0], s0.y - e[1], s0.phi - e[2]}};
            for (int i = 0; i < 3000; ++i)
            {
                tf.step(p, 1e-3, false);
                tf.step(m, 1e-3, false);
            }
            // compare on the cover: pull the variational column back
            Vec3 col = transport_tangent(st.deck.inverse(), st.s, tan.col(c));
            Vec3 fd{(p.s.x - m.s.x) / (2 * delta), (p.s.y - m.s.y) / (2 * delta), (p.s.phi - m.s.phi) / (2 * delta)};
            CHECK((fd - col).norm() < 1e-5 * (1 + col.norm()));
        }
    }
    SUBCASE("forward then backward step returns the identity")
    {
        auto o = octagon();
        auto spec = ThermostatSpec::gaussian(OneForm::product(octagon_w1(), octagon_w2()).scaled(0.3));
        ThermostatFlow tf(o, spec);
        FlowState st{UnitTangent{0.1, 0.3, 1.0}};
        Mat3 tan = Mat3::Identity();
        tf.variational_step(st, tan, 1e-3);
        tf.variational_step(st, tan, -1e-3);
        CHECK((tan - Mat3::Identity()).norm() < 1e-9);
    }
}

TEST_CASE("observers")
{
    auto t = flat_torus();
    auto spec = ThermostatSpec::geodesic();
    ThermostatFlow tf(t, spec);
    double phi0 = 0.9;
    auto summary = flow(tf, UnitTangent{0, 0, phi0}, 7.3, 1e-3,
                        {{"one", [](UnitTangent const&) { return 1.0; }},
                         {"cos", [](UnitTangent const& s) { return std::cos(s.phi); }}});
    CHECK(summary.averages[0] == 1.0);
    CHECK(summary.averages[1] == doctest::Approx(std::cos(phi0)).epsilon(1e-12));
    CHECK(summary.history.back().t == doctest::Approx(7.3));
    CHECK(summary.history.size() > 20);

    auto o = octagon();
    ThermostatFlow tg(o, spec);
    auto g = flow(tg, UnitTangent{0.1, 0.1, 0.1}, 5.0, 1e-3, {observe_V_lambda(tg)});
    CHECK(g.averages[0] == 0.0);
}

TEST_CASE("evaluation cost" * doctest::skip())
{
    auto o = octagon();
    auto spec = ThermostatSpec::gaussian(OneForm::product(octagon_w1(), octagon_w2()).scaled(0.3));
    ThermostatFlow tf(o, spec, 0.01);
    FlowState st{UnitTangent{0.1, 0.3, 1.0}};
    st.record_deck = false;
    Mat3 tan = Mat3::Identity();
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 10000; ++i)
        tf.variational_step(st, tan, 0.01);
    auto t1 = std::chrono::steady_clock::now();
    for (int i = 0; i < 10000; ++i)
        tf.step(st, 0.01);
    auto t2 = std::chrono::steady_clock::now();
    MESSAGE("variational step us: ", std::chrono::duration<double, std::micro>(t1 - t0).count() / 10000);
    MESSAGE("plain step us: ", std::chrono::duration<double, std::micro>(t2 - t1).count() / 10000);
}
