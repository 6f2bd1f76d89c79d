#include <cmath>
#include <numbers>

#include <doctest.h>

#include "isokin/fields.hpp"
#include "support/surfaces.hpp"

using namespace isokin;
using namespace isokin::testing;

namespace {

double richardson(auto const& central, double h)
{
    return (4 * central(0.5 * h) - central(h)) / 3;
}

// lambda by value only, so finite differences do not see the analytic partials
double lambda_value(ThermostatSpec const& spec, ConformalSurface const& surface, Vec3 const& q)
{
    return spec.lambda_jet(surface, UnitTangent{q[0], q[1], q[2]}).value();
}

double fd_along(auto const& fn, Vec3 const& q, Vec3 const& dir, double h)
{
    return richardson([&](double e) { return (fn(q + e * dir) - fn(q - e * dir)) / (2 * e); }, h);
}

}  // namespace

TEST_CASE("lambda examples")
{
    auto t = flat_torus();
    auto geo = ThermostatSpec::geodesic();
    auto lv = lambda_eval(geo, t, UnitTangent{1, 2, 3});
    CHECK(lv.lambda == 0.0);
    CHECK(lv.V == 0.0);
    CHECK(lv.H == 0.0);
    CHECK(lv.X == 0.0);
    CHECK(lv.FV == 0.0);

    double a0 = 0.7;
    auto gauss = ThermostatSpec::gaussian(OneForm::constant(a0, 0.0));
    for (double phi : {0.0, 0.4, 2.5, 5.0})
    {
        auto g = lambda_eval(gauss, t, UnitTangent{0.3, 0.2, phi});
        CHECK(g.lambda == doctest::Approx(-a0 * std::sin(phi)));
        CHECK(g.V == doctest::Approx(-a0 * std::cos(phi)));
    }

    auto mag = ThermostatSpec::magnetic(ScalarField::constant(0.5));
    auto m = lambda_eval(mag, t, UnitTangent{1, 1, 1});
    CHECK(m.lambda == 0.5);
    CHECK(m.V == 0.0);
    CHECK(m.H == 0.0);
    CHECK(m.X == 0.0);
    CHECK(m.FV == 0.0);
}

TEST_CASE("effective curvature examples")
{
    auto o = octagon();
    Rng rng = make_stream(41, 0);
    for (int i = 0; i < 20; ++i)
    {
        auto s = random_state(o, rng);
        CHECK(effective_curvature(ThermostatSpec::geodesic(), o, s) == doctest::Approx(-1.0).epsilon(1e-12));
    }
    auto t = flat_torus();
    auto gauss = ThermostatSpec::gaussian(OneForm::constant(0.7, -0.4));
    auto mag = ThermostatSpec::magnetic(ScalarField::constant(0.6));
    for (int i = 0; i < 20; ++i)
    {
        auto s = random_state(t, rng);
        auto terms = effective_curvature_terms(gauss, t, s);
        CHECK(std::abs(terms.total()) < 1e-14);
        CHECK(terms.F_V_lambda == doctest::Approx(-terms.lambda_sq));
        CHECK(effective_curvature(mag, t, s) == doctest::Approx(0.36));
    }
}

TEST_CASE("divergence of F")
{
    auto t = flat_torus();
    CHECK(divergence_F(ThermostatSpec::geodesic(), t, UnitTangent{1, 1, 1}).value == 0.0);
    CHECK(divergence_F(ThermostatSpec::magnetic(ScalarField::constant(2.0)), t, UnitTangent{1, 1, 1}).value == 0.0);
    auto d = divergence_F(ThermostatSpec::gaussian(OneForm::constant(0.7, 0.0)), t, UnitTangent{1, 1, 0});
    CHECK(d.value == doctest::Approx(-0.7));
    REQUIRE(d.minus_theta_v.has_value());
    CHECK(*d.minus_theta_v == doctest::Approx(-0.7));

    SUBCASE("magnetic bump field preserves volume exactly")
    {
        auto o = octagon();
        auto mag = ThermostatSpec::magnetic(octagon_w1());
        Rng rng = make_stream(42, 0);
        for (int i = 0; i < 200; ++i)
            CHECK(divergence_F(mag, o, random_state(o, rng)).value == 0.0);
    }
}

TEST_CASE("gaussian identity V(lambda) = -theta(v)")
{
    SUBCASE("torus, product form, 1e6 states")
    {
        auto t = wavy_torus();
        auto theta = OneForm::product(torus_w1(), torus_w2());
        auto spec = ThermostatSpec::gaussian(theta);
        Rng rng = make_stream(43, 0);
        double worst = 0, worst_rot = 0;
        for (int i = 0; i < 1000000; ++i)
        {
            auto s = random_state(t, rng);
            auto lam = spec.lambda_jet(t, s);
            worst = std::max(worst, std::abs(lam.d(2) + theta.on_velocity(t, s)));
            worst_rot = std::max(worst_rot, std::abs(lam.value() - theta.on_rotated(t, s)));
        }
        CHECK(worst < 1e-12);
        CHECK(worst_rot < 1e-12);
    }
    SUBCASE("octagon, product of bumps")
    {
        auto o = octagon();
        auto theta = OneForm::product(octagon_w1(), octagon_w2());
        auto spec = ThermostatSpec::gaussian(theta);
        Rng rng = make_stream(44, 0);
        double worst = 0;
        for (int i = 0; i < 100000; ++i)
        {
            auto s = random_state(o, rng);
            worst = std::max(worst, std::abs(spec.lambda_jet(o, s).d(2) + theta.on_velocity(o, s)));
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("effective curvature against finite-difference frame derivatives")
{
    struct Case
    {
        char const* name;
        ConformalSurface surface;
        ThermostatSpec spec;
    };
    std::vector<Case> cases{
        {"torus gaussian", wavy_torus(), ThermostatSpec::gaussian(OneForm::product(torus_w1(), torus_w2()))},
        {"torus magnetic", wavy_torus(), ThermostatSpec::magnetic(torus_w2())},
        {"octagon gaussian", octagon(), ThermostatSpec::gaussian(OneForm::product(octagon_w1(), octagon_w2()).scaled(0.3))},
        {"octagon general", octagon(),
         ThermostatSpec::general(invariant_fiber_bump(octagon_group(), Complex{0.1, 0.2}, 1.1, 0.4, 1, 0.3))},
    };
    for (auto const& c : cases)
    {
        CAPTURE(c.name);
        Rng rng = make_stream(45, 0);
        double worst = 0;
        for (int i = 0; i < 200; ++i)
        {
            auto s = random_state(c.surface, rng);
            Vec3 q = s.as_vector();
            auto fr = frame_at(c.surface, s);
            auto lam = [&](Vec3 const& p) { return lambda_value(c.spec, c.surface, p); };
            auto v_lam = [&](Vec3 const& p) { return fd_along(lam, p, Vec3{0, 0, 1}, 1e-3); };
            double h_lam = fd_along(lam, q, fr.H, 1e-4);
            double l0 = lam(q);
            Vec3 fvec = fr.X + l0 * fr.V;
            double fv_lam = fd_along(v_lam, q, fvec, 1e-3);
            double K = curvature(c.surface, s.x, s.y);
            double fd_total = K - h_lam + l0 * l0 + fv_lam;
            worst = std::max(worst, std::abs(fd_total - effective_curvature(c.spec, c.surface, s)));
        }
        CHECK(worst < 1e-5);
    }
}

TEST_CASE("deck invariance on the octagon")
{
    auto o = octagon();
    auto const& g = *octagon_group();
    auto theta = OneForm::product(octagon_w1(), octagon_w2());
    auto spec = ThermostatSpec::gaussian(theta);
    auto general = ThermostatSpec::general(invariant_fiber_bump(octagon_group(), Complex{0.1, 0.2}, 1.1, 0.4, 1, 0.3));
    Rng rng = make_stream(46, 0);
    double worst_theta = 0, worst_lam = 0, worst_k = 0;
    for (int i = 0; i < 500; ++i)
    {
        auto s = random_state(o, rng);
        int k = int(8 * uniform01(rng));
        auto gs = apply(g.generator(k), s);
        worst_theta = std::max(worst_theta, std::abs(theta.on_velocity(o, s) - theta.on_velocity(o, gs)));
        for (auto const* sp : {&spec, &general})
        {
            worst_lam = std::max(worst_lam, std::abs(lambda_eval(*sp, o, s).lambda - lambda_eval(*sp, o, gs).lambda));
            worst_k = std::max(worst_k, std::abs(effective_curvature(*sp, o, s) - effective_curvature(*sp, o, gs)));
        }
    }
    CHECK(worst_theta < 1e-9);
    CHECK(worst_lam < 1e-9);
    CHECK(worst_k < 1e-9);
}

TEST_CASE("exact and product forms")
{
    SUBCASE("constant potential gives the zero form")
    {
        auto f = make_exact_form(ScalarField::constant(3.0));
        auto ab = f.components(0.3, 0.2);
        for (int k = 0; k < SurfaceJet2::size; ++k)
        {
            CHECK(ab.a.coeff(k) == 0.0);
            CHECK(ab.b.coeff(k) == 0.0);
        }
    }
    SUBCASE("torus W = sin x")
    {
        auto f = make_exact_form(ScalarField::expression([](SurfaceJet const& x, SurfaceJet const&) { return sin(x); }));
        CHECK(f.provenance() == FormProvenance::exact);
        CHECK(f.components(0.4, 1.0).a.value() == doctest::Approx(std::cos(0.4)));
        CHECK(f.components(0.4, 1.0).b.value() == 0.0);
        // periods: trapezoid rule on periodic integrands
        int n = 64;
        double px = 0, py = 0;
        for (int i = 0; i < n; ++i)
        {
            double u = two_pi * i / n;
            px += f.components(u, 0.7).a.value() * two_pi / n;
            py += f.components(0.7, u).b.value() * two_pi / n;
        }
        CHECK(std::abs(px) < 1e-10);
        CHECK(std::abs(py) < 1e-10);
        CHECK(std::abs(f.curl(0.2, 0.3)) < 1e-14);
    }
    SUBCASE("exact components are partials of the potential")
    {
        auto w = octagon_w1();
        auto f = make_exact_form(w);
        Rng rng = make_stream(47, 0);
        auto o = octagon();
        for (int i = 0; i < 100; ++i)
        {
            auto s = random_state(o, rng);
            auto j = w.jet(s.x, s.y);
            auto ab = f.components(s.x, s.y);
            CHECK(std::abs(ab.a.value() - j.d(0)) < 1e-10);
            CHECK(std::abs(ab.b.value() - j.d(1)) < 1e-10);
            CHECK(std::abs(f.curl(s.x, s.y)) < 1e-10);
        }
    }
    SUBCASE("octagon product of overlapping bumps is certified non-exact")
    {
        auto o = octagon();
        auto p = make_product_form(o, octagon_w1(), octagon_w2());
        CHECK(p.form.provenance() == FormProvenance::product);
        CHECK(p.max_curl > 0.1);
        CHECK_FALSE(p.degenerate);
        // analytic curl dW1 ^ dW2 agrees with the certificate's sampled value
        Rng rng = make_stream(48, 0);
        for (int i = 0; i < 50; ++i)
        {
            auto s = random_state(o, rng);
            auto a = octagon_w1().jet(s.x, s.y), b = octagon_w2().jet(s.x, s.y);
            CHECK(p.form.curl(s.x, s.y) == doctest::Approx(a.d(0) * b.d(1) - a.d(1) * b.d(0)).epsilon(1e-9));
        }
    }
    SUBCASE("W dW is exact and flagged degenerate")
    {
        auto p = make_product_form(octagon(), octagon_w1(), octagon_w1());
        CHECK(p.degenerate);
        CHECK_FALSE(p.warning.empty());
    }
    SUBCASE("scaling keeps provenance")
    {
        auto e = make_exact_form(torus_w1()).scaled(0.3);
        CHECK(e.provenance() == FormProvenance::exact);
        CHECK(e.components(0.5, 0.5).a.value() == doctest::Approx(0.3 * std::cos(0.5)));
        auto p = OneForm::product(torus_w1(), torus_w2()).scaled(-2.0);
        CHECK(p.provenance() == FormProvenance::product);
        auto q = OneForm::product(torus_w1(), torus_w2());
        CHECK(p.components(0.5, 0.1).b.value() == doctest::Approx(-2.0 * q.components(0.5, 0.1).b.value()));
    }
}

TEST_CASE("isoenergetic reduction")
{
    auto t = wavy_torus();
    auto e = OneForm::product(torus_w1(), torus_w2());
    SUBCASE("W = 0")
    {
        auto r = isoenergetic_reduce(t, ScalarField::constant(0.0), e, 2.0);
        CHECK(r.margin == 2.0);
        CHECK(r.form.provenance() == FormProvenance::product);
        auto ab = r.form.components(0.3, 0.9), ref = e.components(0.3, 0.9);
        CHECK(ab.a.value() == doctest::Approx(ref.a.value() / 4.0));
        CHECK(ab.b.d(0, 1) == doctest::Approx(ref.b.d(0, 1) / 4.0));
    }
    SUBCASE("E = 0 gives the exact form d log(k - W) / 2")
    {
        auto w = ScalarField::expression([](SurfaceJet const& x, SurfaceJet const& y) { return 0.3 * sin(x) * cos(y); });
        auto r = isoenergetic_reduce(t, w, OneForm{}, 1.0);
        CHECK(r.form.provenance() == FormProvenance::exact);
        double x = 0.8, y = 0.4, h = 1e-6;
        auto pot = [&](double u, double v) { return 0.5 * std::log(1.0 - 0.3 * std::sin(u) * std::cos(v)); };
        CHECK(r.form.components(x, y).a.value() == doctest::Approx((pot(x + h, y) - pot(x - h, y)) / (2 * h)).epsilon(1e-8));
        CHECK(r.margin == doctest::Approx(0.7).epsilon(1e-3));
    }
    SUBCASE("constant W, exact E")
    {
        auto r = isoenergetic_reduce(t, ScalarField::constant(0.25), make_exact_form(torus_w1()), 1.0);
        CHECK(r.form.provenance() == FormProvenance::exact);
        CHECK(r.form.components(0.1, 0.2).a.value() == doctest::Approx(std::cos(0.1) / 1.5));
    }
    SUBCASE("general case matches the formula")
    {
        auto w = ScalarField::expression([](SurfaceJet const& x, SurfaceJet const& y) { return 0.3 * sin(x) * cos(y); });
        auto r = isoenergetic_reduce(t, w, e, 1.0);
        CHECK(r.form.provenance() == FormProvenance::general);
        double x = 0.8, y = 0.4;
        auto wj = w.jet(x, y);
        auto ej = e.components(x, y);
        CHECK(r.form.components(x, y).b.value() == doctest::Approx((-wj.d(1) + ej.b.value()) / (2 * (1 - wj.value()))));
    }
    SUBCASE("energy below the potential")
    {
        auto w = ScalarField::expression([](SurfaceJet const& x, SurfaceJet const&) { return sin(x); });
        CHECK_THROWS_AS(isoenergetic_reduce(t, w, OneForm{}, 0.5), EnergyLevelError);
    }
}
