#include "isokin/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "isokin/errors.hpp"
#include "isokin/parallel.hpp"

namespace isokin {
namespace {

constexpr double pi = std::numbers::pi;

double relative_gap(double a, double b)
{
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

void check_torus_exponent(ScalarField const& f, double lx, double ly)
{
    Rng rng = make_stream(0x70e05, 0);
    for (int i = 0; i < 64; ++i)
    {
        double x = lx * uniform01(rng), y = ly * uniform01(rng);
        auto here = f.jet(x, y);
        auto sx = f.jet(x + lx, y);
        auto sy = f.jet(x, y + ly);
        for (int k = 0; k < SurfaceJet::size; ++k)
        {
            if (relative_gap(here.coeff(k), sx.coeff(k)) > 1e-12
                || relative_gap(here.coeff(k), sy.coeff(k)) > 1e-12)
                throw PreconditionError(
                    "conformal exponent is not periodic with the torus "
                    "periods");
        }
        // supplied partials vs central differences
        double const h = 1e-5;
        double fx = (f(x + h, y) - f(x - h, y)) / (2 * h);
        double fy = (f(x, y + h) - f(x, y - h)) / (2 * h);
        double fxx = (f.jet(x + h, y).d(0) - f.jet(x - h, y).d(0)) / (2 * h);
        double fyy = (f.jet(x, y + h).d(1) - f.jet(x, y - h).d(1)) / (2 * h);
        double fxy = (f.jet(x, y + h).d(0) - f.jet(x, y - h).d(0)) / (2 * h);
        if (relative_gap(fx, here.d(0)) > 1e-6
            || relative_gap(fy, here.d(1)) > 1e-6
            || relative_gap(fxx, here.d(0, 0)) > 1e-6
            || relative_gap(fyy, here.d(1, 1)) > 1e-6
            || relative_gap(fxy, here.d(0, 1)) > 1e-6)
            throw PreconditionError(
                "conformal exponent partials disagree with finite "
                "differences");
    }
}

}  // namespace

//---------------------------------------------------------------------------//

ConformalSurface ConformalSurface::periodic_torus(double lx, double ly,
                                                  ScalarField exponent)
{
    if (!(lx > 0.0) || !(ly > 0.0))
        throw PreconditionError("torus periods must be positive");
    ConformalSurface s;
    s.kind_ = ChartKind::periodic_torus;
    s.lx_ = lx;
    s.ly_ = ly;
    s.exponent_ = std::move(exponent);
    if (!s.exponent_.constant_value())
        check_torus_exponent(s.exponent_, lx, ly);

    // Trapezoid rule is spectrally accurate for periodic integrands.
    constexpr int n = 256;
    double sum = 0.0, peak = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
        {
            double w = std::exp(2.0 * s.exponent_(lx * i / n, ly * j / n));
            sum += w;
            peak = std::max(peak, w);
        }
    s.area_ = sum * lx * ly / (n * n);
    s.density_bound_ = s.exponent_.constant_value() ? peak : 1.05 * peak;
    return s;
}

ConformalSurface
ConformalSurface::poincare_disk(std::shared_ptr<FuchsianOctagon const> group)
{
    if (!group)
        throw PreconditionError("poincare_disk needs a group");
    ConformalSurface s;
    s.kind_ = ChartKind::poincare_disk;
    s.group_ = std::move(group);
    s.exponent_ = ScalarField::expression(
        [](SurfaceJet const& x, SurfaceJet const& y) {
            return std::log(2.0) - log(1.0 - x * x - y * y);
        });
    // Gauss-Bonnet: genus 2 has area 4 pi at curvature -1
    s.area_ = 4.0 * pi;
    double rv = s.group_->vertex_radius();
    s.density_bound_ = 4.0 / std::pow(1.0 - rv * rv, 2);
    return s;
}

SurfaceJet2 ConformalSurface::conformal_exponent(double x, double y) const
{
    if (kind_ == ChartKind::poincare_disk)
    {
        if (!(x * x + y * y < 1.0))
            throw DomainError("point outside the open unit disk");
        SurfaceJet2 xj = SurfaceJet2::variable(0, x);
        SurfaceJet2 yj = SurfaceJet2::variable(1, y);
        return std::log(2.0) - log(1.0 - xj * xj - yj * yj);
    }
    if (auto c = exponent_.constant_value())
        return SurfaceJet2(*c);
    return exponent_.jet(x, y).truncate<2>();
}

bool ConformalSurface::in_domain(double x, double y) const
{
    if (kind_ == ChartKind::poincare_disk)
        return x * x + y * y < 1.0;
    return std::isfinite(x) && std::isfinite(y);
}

bool ConformalSurface::in_fundamental_domain(double x, double y,
                                             double tol) const
{
    if (kind_ == ChartKind::poincare_disk)
        return group_->contains({x, y}, tol);
    return x >= -tol && x < lx_ + tol && y >= -tol && y < ly_ + tol;
}

std::array<double, 4> ConformalSurface::bounding_box() const
{
    if (kind_ == ChartKind::poincare_disk)
    {
        double r = group_->vertex_radius();
        return {-r, r, -r, r};
    }
    return {0.0, lx_, 0.0, ly_};
}

//---------------------------------------------------------------------------//

FrameAtPoint frame_at(ConformalSurface const& surface, UnitTangent const& s)
{
    auto f = surface.conformal_exponent(s.x, s.y);
    double e = std::exp(-f.value());
    double c = std::cos(s.phi), sn = std::sin(s.phi);
    double fx = f.d(0), fy = f.d(1);
    return {Vec3{e * c, e * sn, e * (-fx * sn + fy * c)},
            Vec3{-e * sn, e * c, e * (-fx * c - fy * sn)},
            Vec3{0.0, 0.0, 1.0}};
}

Mat3 frame_matrix(ConformalSurface const& surface, UnitTangent const& s)
{
    auto fr = frame_at(surface, s);
    Mat3 m;
    m.col(0) = fr.X;
    m.col(1) = fr.H;
    m.col(2) = fr.V;
    return m;
}

Vec3 to_frame(ConformalSurface const& surface, UnitTangent const& s,
              Vec3 const& v)
{
    auto f = surface.conformal_exponent(s.x, s.y);
    double e = std::exp(f.value());
    double c = std::cos(s.phi), sn = std::sin(s.phi);
    double fx = f.d(0), fy = f.d(1);
    double cx = e * (c * v[0] + sn * v[1]);
    double ch = e * (-sn * v[0] + c * v[1]);
    // phi components of X and H
    double x3 = (-fx * sn + fy * c) / e;
    double h3 = (-fx * c - fy * sn) / e;
    return {cx, ch, v[2] - x3 * cx - h3 * ch};
}

double sasaki_norm(ConformalSurface const& surface, UnitTangent const& s,
                   Vec3 const& v)
{
    return to_frame(surface, s, v).norm();
}

double curvature(ConformalSurface const& surface, double x, double y)
{
    auto f = surface.conformal_exponent(x, y);
    return -std::exp(-2.0 * f.value()) * (f.d(0, 0) + f.d(1, 1));
}

std::array<double, 3> bracket_residuals(ConformalSurface const& surface,
                                        UnitTangent const& s, double h)
{
    auto field = [&](int which) {
        return [&surface, which](Vec3 const& q) -> Vec3 {
            auto fr = frame_at(surface, UnitTangent{q[0], q[1], q[2]});
            return which == 0 ? fr.X : which == 1 ? fr.H : fr.V;
        };
    };
    auto X = field(0), H = field(1), V = field(2);
    Vec3 q = s.as_vector();
    auto fr = frame_at(surface, s);
    double k = curvature(surface, s.x, s.y);
    Vec3 vx = fd_bracket(V, X, q, h) - fr.H;
    Vec3 vh = fd_bracket(V, H, q, h) + fr.X;
    Vec3 xh = fd_bracket(X, H, q, h) - k * fr.V;
    return {vx.lpNorm<Eigen::Infinity>(), vh.lpNorm<Eigen::Infinity>(),
            xh.lpNorm<Eigen::Infinity>()};
}

//---------------------------------------------------------------------------//

LiouvilleSampler::LiouvilleSampler(ConformalSurface const& surface)
    : surface_(&surface)
    , box_(surface.bounding_box())
    , bound_(surface.density_bound())
{
    double box_area = (box_[1] - box_[0]) * (box_[3] - box_[2]);
    efficiency_ = surface.area() / (box_area * bound_);
    if (!(efficiency_ >= 1e-4))
        throw PreconditionError(
            "Liouville rejection efficiency " + std::to_string(efficiency_)
            + " is below 1e-4; conformal exponent is pathological");
}

UnitTangent LiouvilleSampler::draw(Rng& rng) const
{
    while (true)
    {
        double x = box_[0] + (box_[1] - box_[0]) * uniform01(rng);
        double y = box_[2] + (box_[3] - box_[2]) * uniform01(rng);
        double u = uniform01(rng);
        double phi = two_pi * uniform01(rng);
        if (!surface_->in_fundamental_domain(x, y, 0.0))
            continue;
        double w = std::exp(2.0 * surface_->conformal_exponent(x, y).value());
        if (w > bound_)
            throw std::logic_error("Liouville density bound violated");
        if (u * bound_ < w)
            return UnitTangent::make(x, y, phi);
    }
}

std::vector<UnitTangent> sample_liouville(ConformalSurface const& surface,
                                          std::uint64_t seed, std::size_t n,
                                          unsigned threads)
{
    if (n < 1)
        throw PreconditionError("sample_liouville needs n >= 1");
    LiouvilleSampler sampler(surface);
    std::vector<UnitTangent> out(n);
    std::size_t chunks = (n + liouville_chunk - 1) / liouville_chunk;
    parallel_for(chunks, threads, [&](std::size_t j) {
        Rng rng = make_stream(seed, j);
        std::size_t end = std::min(n, (j + 1) * liouville_chunk);
        for (std::size_t i = j * liouville_chunk; i < end; ++i)
            out[i] = sampler.draw(rng);
    });
    return out;
}

}  // namespace isokin
