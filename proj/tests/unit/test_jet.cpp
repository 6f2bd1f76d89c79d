#include <cmath>

#include <doctest.h>

#include "isokin/jet.hpp"

using namespace isokin;
using J = Jet<2, 3>;

namespace {

// f(x, y) = exp(x y) sin(x + 2y) / (2 + x^2)
template <class T>
T sample_fn(T const& x, T const& y)
{
    return exp(x * y) * sin(x + 2.0 * y) / (2.0 + x * x);
}

double fd_value(double x, double y)
{
    return sample_fn(Jet<2, 0>(x), Jet<2, 0>(y)).value();
}

}  // namespace

TEST_CASE("layout sizes")
{
    CHECK(Jet<2, 2>::size == 6);
    CHECK(Jet<2, 3>::size == 10);
    CHECK(Jet<3, 2>::size == 10);
}

TEST_CASE("variable derivatives")
{
    auto x = J::variable(0, 1.5);
    CHECK(x.value() == 1.5);
    CHECK(x.d(0) == 1.0);
    CHECK(x.d(1) == 0.0);
    CHECK(x.d(0, 0) == 0.0);
}

TEST_CASE("polynomial partials are exact")
{
    auto x = J::variable(0, 0.7), y = J::variable(1, -1.3);
    // p = x^3 y + 2 x y^2
    auto p = x * x * x * y + 2.0 * x * y * y;
    double xv = 0.7, yv = -1.3;
    CHECK(p.value() == doctest::Approx(xv * xv * xv * yv + 2 * xv * yv * yv));
    CHECK(p.d(0) == doctest::Approx(3 * xv * xv * yv + 2 * yv * yv));
    CHECK(p.d(1) == doctest::Approx(xv * xv * xv + 4 * xv * yv));
    CHECK(p.d(0, 0) == doctest::Approx(6 * xv * yv));
    CHECK(p.d(0, 1) == doctest::Approx(3 * xv * xv + 4 * yv));
    CHECK(p.d(1, 0) == doctest::Approx(3 * xv * xv + 4 * yv));
    CHECK(p.d(1, 1) == doctest::Approx(4 * xv));
    CHECK(p.d(0, 0, 0) == doctest::Approx(6 * yv));
    CHECK(p.d(0, 0, 1) == doctest::Approx(6 * xv));
    CHECK(p.d(0, 1, 1) == doctest::Approx(4.0));
    CHECK(p.d(1, 1, 1) == doctest::Approx(0.0));
}

TEST_CASE("transcendental partials agree with finite differences")
{
    double x0 = 0.4, y0 = 0.9;
    auto f = sample_fn(J::variable(0, x0), J::variable(1, y0));
    double const h = 1e-4;
    CHECK(f.value() == doctest::Approx(fd_value(x0, y0)).epsilon(1e-14));
    CHECK(f.d(0)
          == doctest::Approx((fd_value(x0 + h, y0) - fd_value(x0 - h, y0))
                             / (2 * h))
                 .epsilon(1e-7));
    CHECK(f.d(1, 1)
          == doctest::Approx((fd_value(x0, y0 + h) - 2 * fd_value(x0, y0)
                              + fd_value(x0, y0 - h))
                             / (h * h))
                 .epsilon(1e-5));
    // third order: difference of analytic second partials
    auto fp = sample_fn(J::variable(0, x0 + h), J::variable(1, y0));
    auto fm = sample_fn(J::variable(0, x0 - h), J::variable(1, y0));
    CHECK(f.d(0, 0, 1)
          == doctest::Approx((fp.d(0, 1) - fm.d(0, 1)) / (2 * h))
                 .epsilon(1e-6));
}

TEST_CASE("log, sqrt and atan2 invert exp, square and polar form")
{
    auto x = J::variable(0, 0.3), y = J::variable(1, -0.8);
    auto g = 1.0 + x * x + 0.5 * y;
    auto back = exp(log(g)) - g;
    auto sq = sqrt(g) * sqrt(g) - g;
    for (int k = 0; k < J::size; ++k)
    {
        CHECK(std::abs(back.coeff(k)) < 1e-13);
        CHECK(std::abs(sq.coeff(k)) < 1e-13);
    }
    // atan2(r sin t, r cos t) = t
    // (t is past pi, so the constant term comes back shifted by 2 pi)
    auto t = 2.9 + 0.3 * x - y;
    auto r = 1.0 + x * y;
    auto a = atan2(r * sin(t), r * cos(t)) - t;
    CHECK(std::abs(std::remainder(a.value(), 2 * M_PI)) < 1e-12);
    for (int k = 1; k < J::size; ++k)
        CHECK(std::abs(a.coeff(k)) < 1e-12);
}

TEST_CASE("truncate and extend keep shared coefficients")
{
    auto x = J::variable(0, 0.2), y = J::variable(1, 0.5);
    auto f = sin(x) * cos(y);
    auto t = f.truncate<2>();
    CHECK(t.d(0, 1) == doctest::Approx(f.d(0, 1)));
    auto e = t.extend<3>();
    CHECK(e.d(0) == doctest::Approx(f.d(0)));
    CHECK(e.d(2) == 0.0);
    CHECK(e.d(1, 1) == doctest::Approx(f.d(1, 1)));
}
