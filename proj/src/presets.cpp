#include "isokin/presets.hpp"

#include <cmath>
#include <numbers>

namespace isokin {

std::shared_ptr<FuchsianOctagon const> const& default_octagon_group()
{
    static auto const group = build_octagon_group();
    return group;
}

ConformalSurface make_flat_torus(double lx, double ly)
{
    return ConformalSurface::periodic_torus(lx, ly, ScalarField::constant(0.0));
}

ConformalSurface make_wavy_torus(double amp, double lx, double ly)
{
    double kx = two_pi / lx, ky = two_pi / ly;
    return ConformalSurface::periodic_torus(
        lx, ly,
        ScalarField::expression(
            [amp, kx, ky](SurfaceJet const& x, SurfaceJet const& y) {
                return amp * sin(kx * x) * sin(ky * y);
            }));
}

ConformalSurface make_octagon()
{
    return ConformalSurface::poincare_disk(default_octagon_group());
}

BumpParams default_octagon_w1()
{
    return {Complex{0.0, 0.0}, 1.2, 1.0};
}

BumpParams default_octagon_w2()
{
    return {Complex{0.3, 0.1}, 1.2, 1.0};
}

ScalarField make_bump(ConformalSurface const& surface, BumpParams const& p,
                      int truncation)
{
    if (!surface.is_torus())
        return invariant_bump(surface.group_ptr(), p.center, p.radius,
                              p.amplitude, truncation);
    if (!(p.radius > 0.0))
        throw PreconditionError("bump radius must be positive");
    double kx = std::numbers::pi / surface.period_x();
    double ky = std::numbers::pi / surface.period_y();
    double cx = p.center.real(), cy = p.center.imag();
    double inv_r2 = 1.0 / (p.radius * p.radius);
    double amp = p.amplitude;
    return ScalarField::expression(
        [=](SurfaceJet const& x, SurfaceJet const& y) {
            SurfaceJet sx = sin(kx * (x - cx));
            SurfaceJet sy = sin(ky * (y - cy));
            return amp * exp(-inv_r2 * (sx * sx + sy * sy));
        });
}

ScalarField default_torus_w1()
{
    return ScalarField::expression(
        [](SurfaceJet const& x, SurfaceJet const& y) {
            return sin(x) + 0.5 * cos(y);
        });
}

ScalarField default_torus_w2()
{
    return ScalarField::expression(
        [](SurfaceJet const& x, SurfaceJet const& y) {
            return cos(x + y) + 0.3 * sin(2.0 * y);
        });
}

BundleFunction default_general_lambda(ConformalSurface const& surface)
{
    if (surface.is_torus())
    {
        double kx = two_pi / surface.period_x();
        double ky = two_pi / surface.period_y();
        return BundleFunction::expression(
            [kx, ky](BundleJet const& x, BundleJet const& y,
                     BundleJet const& phi) {
                return 0.3 * sin(kx * x) * cos(2.0 * phi)
                       + 0.2 * cos(ky * y) * sin(phi) + 0.1;
            });
    }
    auto const& g = surface.group_ptr();
    auto w1 = default_octagon_w1();
    auto w2 = default_octagon_w2();
    return 0.3
               * invariant_fiber_bump(g, w1.center, w1.radius, 1.0, 2, 0.0)
           + 0.2
                 * invariant_fiber_bump(g, w2.center, w2.radius, 1.0, 1,
                                        0.5)
           + BundleFunction::constant(0.1);
}

std::vector<NamedFunction> preset_test_functions(ConformalSurface const& surface)
{
    if (surface.is_torus())
    {
        double kx = two_pi / surface.period_x();
        double ky = two_pi / surface.period_y();
        return {
            {"sin_x_cos_phi",
             BundleFunction::expression(
                 [kx](BundleJet const& x, BundleJet const&,
                      BundleJet const& phi) { return sin(kx * x) * cos(phi); })},
            {"mixed_harmonics",
             BundleFunction::expression(
                 [kx, ky](BundleJet const& x, BundleJet const& y,
                          BundleJet const& phi) {
                     return cos(kx * x + ky * y) * sin(2.0 * phi)
                            + 0.5 * sin(ky * y);
                 })},
            {"exp_trig",
             BundleFunction::expression(
                 [kx, ky](BundleJet const& x, BundleJet const& y,
                          BundleJet const& phi) {
                     return exp(0.5 * sin(kx * x) * cos(ky * y))
                            * cos(phi - 0.3);
                 })},
        };
    }
    auto const& g = surface.group_ptr();
    auto w1 = default_octagon_w1();
    auto w2 = default_octagon_w2();
    return {
        {"bump_harmonic1",
         invariant_fiber_bump(g, w1.center, w1.radius, 1.0, 1, 0.0)},
        {"bump_harmonic2",
         invariant_fiber_bump(g, w2.center, w2.radius, 1.0, 2, 0.4)},
        {"bump_mixed",
         BundleFunction::lift(make_bump(surface, w2))
             + 0.5
                   * invariant_fiber_bump(g, Complex{-0.2, 0.25}, 1.0, 1.0,
                                          3, 1.1)},
    };
}

}  // namespace isokin
