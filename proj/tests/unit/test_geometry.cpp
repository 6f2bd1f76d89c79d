#include <cmath>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <doctest.h>

#include "isokin/errors.hpp"
#include "isokin/geometry.hpp"
#include "isokin/stats.hpp"

using namespace isokin;

namespace {

ConformalSurface flat_torus()
{
    return ConformalSurface::periodic_torus(two_pi, two_pi, ScalarField::constant(0.0));
}

ScalarField wavy_exponent(double amp)
{
    return ScalarField::expression([amp](SurfaceJet const& x, SurfaceJet const& y) { return amp * sin(x) * sin(y); });
}

ConformalSurface wavy_torus()
{
    return ConformalSurface::periodic_torus(two_pi, two_pi, wavy_exponent(0.3));
}

ConformalSurface disk()
{
    static auto g = build_octagon_group();
    return ConformalSurface::poincare_disk(g);
}

}  // namespace

TEST_CASE("frame examples")
{
    auto t = flat_torus();
    auto f = frame_at(t, UnitTangent{0, 0, 0});
    CHECK((f.X - Vec3{1, 0, 0}).norm() < 1e-15);
    CHECK((f.H - Vec3{0, 1, 0}).norm() < 1e-15);
    CHECK((f.V - Vec3{0, 0, 1}).norm() < 1e-15);
    auto q = frame_at(t, UnitTangent{0, 0, std::numbers::pi / 2});
    CHECK((q.X - Vec3{0, 1, 0}).norm() < 1e-15);
    CHECK((q.H - Vec3{-1, 0, 0}).norm() < 1e-15);

    auto d = disk();
    for (double phi : {0.0, 1.0, 4.0})
    {
        auto fd = frame_at(d, UnitTangent{0, 0, phi});
        CHECK((fd.X - Vec3{std::cos(phi) / 2, std::sin(phi) / 2, 0}).norm() < 1e-15);
    }
}

TEST_CASE("curvature examples")
{
    CHECK(curvature(flat_torus(), 1.0, 2.0) == 0.0);
    auto c = ConformalSurface::periodic_torus(1.0, 2.0, ScalarField::constant(0.7));
    CHECK(curvature(c, 0.3, 0.1) == 0.0);
    auto d = disk();
    for (auto [x, y] : {std::pair{0.0, 0.0}, {0.3, 0.1}, {-0.5, 0.6}})
        CHECK(curvature(d, x, y) == doctest::Approx(-1.0).epsilon(1e-13));
    CHECK_THROWS_AS(curvature(d, 0.9, 0.6), DomainError);
}

TEST_CASE("frame orthonormality is exact")
{
    auto s = wavy_torus();
    Rng rng = make_stream(21, 0);
    for (int i = 0; i < 200; ++i)
    {
        UnitTangent p = UnitTangent::make(two_pi * uniform01(rng), two_pi * uniform01(rng), two_pi * uniform01(rng));
        auto fr = frame_at(s, p);
        double e2f = std::exp(2 * s.conformal_exponent(p.x, p.y).value());
        auto g = [&](Vec3 const& a, Vec3 const& b) { return e2f * (a[0] * b[0] + a[1] * b[1]); };
        CHECK(g(fr.X, fr.X) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(g(fr.H, fr.H) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(g(fr.X, fr.H)) < 1e-12);
        // orientation (v, iv) positive
        CHECK(fr.X[0] * fr.H[1] - fr.X[1] * fr.H[0] > 0);
        // to_frame inverts the frame matrix
        Vec3 c{0.3, -1.2, 0.8};
        CHECK((to_frame(s, p, frame_matrix(s, p) * c) - c).norm() < 1e-12);
    }
}

TEST_CASE("bracket relations")
{
    SUBCASE("flat torus")
    {
        auto r = bracket_residuals(flat_torus(), UnitTangent{1.0, 2.0, 0.3});
        for (double v : r)
            CHECK(v < 1e-10);
    }
    SUBCASE("disk")
    {
        auto r = bracket_residuals(disk(), UnitTangent{0.3, 0.1, 1.0});
        for (double v : r)
            CHECK(v < 1e-6);
    }
    SUBCASE("wavy torus, random states")
    {
        auto s = wavy_torus();
        Rng rng = make_stream(22, 0);
        double worst = 0, worst_ratio = 0;
        for (int i = 0; i < 1000; ++i)
        {
            UnitTangent p = UnitTangent::make(two_pi * uniform01(rng), two_pi * uniform01(rng), two_pi * uniform01(rng));
            for (double v : bracket_residuals(s, p))
                worst = std::max(worst, v);
            double k = curvature(s, p.x, p.y);
            if (std::abs(k) > 0.1)
            {
                auto X = [&](Vec3 const& q) { return frame_at(s, UnitTangent{q[0], q[1], q[2]}).X; };
                auto H = [&](Vec3 const& q) { return frame_at(s, UnitTangent{q[0], q[1], q[2]}).H; };
                double ratio = fd_bracket(X, H, p.as_vector(), 1e-4)[2] / k;
                worst_ratio = std::max(worst_ratio, std::abs(ratio - 1));
            }
        }
        CHECK(worst < 1e-5);
        CHECK(worst_ratio < 1e-4);
    }
}

TEST_CASE("torus validation")
{
    auto bad = ScalarField::expression([](SurfaceJet const& x, SurfaceJet const&) { return 0.1 * x; });
    CHECK_THROWS_AS(ConformalSurface::periodic_torus(1.0, 1.0, bad), PreconditionError);
    CHECK_THROWS_AS(ConformalSurface::periodic_torus(-1.0, 1.0, ScalarField{}), PreconditionError);
    CHECK(flat_torus().area() == doctest::Approx(two_pi * two_pi));
    double a = 0.3, mean = 0;
    // fine-grid oracle for the area of e^{2a sin x sin y}
    int n = 1024;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            mean += std::exp(2 * a * std::sin(two_pi * i / n) * std::sin(two_pi * j / n));
    mean /= double(n) * n;
    CHECK(wavy_torus().area() == doctest::Approx(two_pi * two_pi * mean).epsilon(1e-12));
    CHECK(disk().area() == doctest::Approx(4 * std::numbers::pi));
}

TEST_CASE("Liouville sampler")
{
    SUBCASE("flat torus moments")
    {
        auto t = flat_torus();
        auto samples = sample_liouville(t, 31, 1000000);
        RunningStats c, x;
        for (auto const& s : samples)
        {
            c.add(std::cos(s.phi));
            x.add(s.x);
        }
        CHECK(std::abs(c.mean()) < 3.0 / 1000.0);
        CHECK(std::abs(x.mean() - std::numbers::pi) < 3 * x.standard_error());

        // chi-square on an 8x8x8 grid
        std::vector<double> counts(512, 0.0);
        for (auto const& s : samples)
        {
            int i = std::min(7, int(s.x / two_pi * 8));
            int j = std::min(7, int(s.y / two_pi * 8));
            int k = std::min(7, int(s.phi / two_pi * 8));
            counts[(i * 8 + j) * 8 + k] += 1;
        }
        double expect = samples.size() / 512.0, chi2 = 0;
        for (double n : counts)
            chi2 += (n - expect) * (n - expect) / expect;
        boost::math::chi_squared dist(511);
        CHECK(chi2 < boost::math::quantile(dist, 0.999));
    }
    SUBCASE("deterministic and thread independent")
    {
        auto t = wavy_torus();
        auto a = sample_liouville(t, 5, 10000, 1);
        auto b = sample_liouville(t, 5, 10000, 3);
        REQUIRE(a.size() == b.size());
        bool same = true;
        for (std::size_t i = 0; i < a.size(); ++i)
            same = same && a[i].x == b[i].x && a[i].y == b[i].y && a[i].phi == b[i].phi;
        CHECK(same);
    }
    SUBCASE("wavy torus matches quadrature")
    {
        auto t = wavy_torus();
        auto fn = [](double x, double y, double phi) { return std::cos(x) * std::sin(2 * y) + std::sin(y) * std::cos(phi) + std::sin(x); };
        auto samples = sample_liouville(t, 32, 400000);
        RunningStats st;
        for (auto const& s : samples)
            st.add(fn(s.x, s.y, s.phi));
        // 64^3 midpoint quadrature of fn against e^{2f}
        int n = 64;
        double num = 0, den = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                {
                    double x = two_pi * (i + 0.5) / n, y = two_pi * (j + 0.5) / n, p = two_pi * (k + 0.5) / n;
                    double w = std::exp(0.6 * std::sin(x) * std::sin(y));
                    num += w * fn(x, y, p);
                    den += w;
                }
        CHECK(std::abs(st.mean() - num / den) < 3 * st.standard_error());
    }
    SUBCASE("octagon samples lie in the fundamental domain with hyperbolic density")
    {
        auto d = disk();
        LiouvilleSampler sampler(d);
        CHECK(sampler.efficiency() > 0.05);
        auto samples = sample_liouville(d, 33, 200000);
        RunningStats inner;
        for (auto const& s : samples)
        {
            CHECK(d.group().contains({s.x, s.y}, 1e-12));
            // fraction inside hyperbolic radius 1: area 2pi(cosh 1 - 1) of 4pi
            inner.add(hyperbolic_radius({s.x, s.y}) < 1.0 ? 1.0 : 0.0);
        }
        double expect = (std::cosh(1.0) - 1.0) / 2.0;
        CHECK(std::abs(inner.mean() - expect) < 3 * inner.standard_error());
    }
    SUBCASE("pathological exponent")
    {
        auto spiky = ScalarField::expression([](SurfaceJet const& x, SurfaceJet const& y) { return 10.0 * exp(100.0 * (cos(x) + cos(y) - 2.0)); });
        auto t = ConformalSurface::periodic_torus(two_pi, two_pi, spiky);
        CHECK_THROWS_AS(sample_liouville(t, 1, 10), PreconditionError);
    }
}
