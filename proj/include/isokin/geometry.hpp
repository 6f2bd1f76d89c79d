#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "hyperbolic.hpp"
#include "random.hpp"
#include "scalar_field.hpp"
#include "types.hpp"

namespace isokin {

enum class ChartKind
{
    periodic_torus,
    poincare_disk,
};

//---------------------------------------------------------------------------//
/*!
 * Closed oriented surface in a conformal chart, metric e^{2f}(dx^2 + dy^2).
 *
 * Either a torus given by a periodic conformal exponent on [0,Lx)x[0,Ly),
 * or the genus-2 quotient of the Poincaré disk by the octagon group (with
 * f = log(2 / (1 - x^2 - y^2))).
 */
class ConformalSurface
{
  public:
    //! Validates periodicity and the supplied partials of f
    static ConformalSurface periodic_torus(double lx, double ly,
                                           ScalarField exponent);
    static ConformalSurface
    poincare_disk(std::shared_ptr<FuchsianOctagon const> group);

    ChartKind kind() const { return kind_; }
    bool is_torus() const { return kind_ == ChartKind::periodic_torus; }
    double period_x() const { return lx_; }
    double period_y() const { return ly_; }
    FuchsianOctagon const& group() const { return *group_; }
    std::shared_ptr<FuchsianOctagon const> const& group_ptr() const
    {
        return group_;
    }
    ScalarField const& exponent_field() const { return exponent_; }

    //! f and its partials up to order 2; throws DomainError off-chart
    SurfaceJet2 conformal_exponent(double x, double y) const;
    bool in_domain(double x, double y) const;
    bool in_fundamental_domain(double x, double y, double tol = 1e-12) const;
    //! Area of one fundamental domain
    double area() const { return area_; }
    //! Total Liouville measure of SM, 2 pi times the area
    double liouville_volume() const { return two_pi * area_; }

    //! Bounding box of the fundamental domain: xmin, xmax, ymin, ymax
    std::array<double, 4> bounding_box() const;
    //! Upper bound of e^{2f} on the fundamental domain
    double density_bound() const { return density_bound_; }

  private:
    ConformalSurface() = default;

    ChartKind kind_ = ChartKind::periodic_torus;
    double lx_ = 0.0;
    double ly_ = 0.0;
    ScalarField exponent_;
    std::shared_ptr<FuchsianOctagon const> group_;
    double area_ = 0.0;
    double density_bound_ = 1.0;
};

//! Frame fields at a point, as (d/dx, d/dy, d/dphi) components
struct FrameAtPoint
{
    Vec3 X;
    Vec3 H;
    Vec3 V;
};

FrameAtPoint frame_at(ConformalSurface const& surface, UnitTangent const& s);
//! Columns X, H, V
Mat3 frame_matrix(ConformalSurface const& surface, UnitTangent const& s);
//! Coefficients of a chart vector in the (X, H, V) basis
Vec3 to_frame(ConformalSurface const& surface, UnitTangent const& s,
              Vec3 const& chart_vector);
//! Norm making (X, H, V) orthonormal
double sasaki_norm(ConformalSurface const& surface, UnitTangent const& s,
                   Vec3 const& chart_vector);

//! Gaussian curvature -e^{-2f} (f_xx + f_yy)
double curvature(ConformalSurface const& surface, double x, double y);

/*!
 * Sup-norm residuals of [V,X] - H, [V,H] + X and [X,H] - K V, with the Lie
 * brackets computed by central differences of step h.
 */
std::array<double, 3> bracket_residuals(ConformalSurface const& surface,
                                        UnitTangent const& s,
                                        double h = 1e-4);

//! Lie bracket of two chart vector fields by central differences, with one
//! Richardson step (steps h and h/2) so the error is O(h^4)
template <class A, class B>
Vec3 fd_bracket(A const& a, B const& b, Vec3 const& q, double h)
{
    // [A,B] = DB A - DA B
    Vec3 av = a(q), bv = b(q);
    auto central = [&](double step) -> Vec3 {
        Vec3 db_a = (b(q + step * av) - b(q - step * av)) / (2.0 * step);
        Vec3 da_b = (a(q + step * bv) - a(q - step * bv)) / (2.0 * step);
        return db_a - da_b;
    };
    return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

//---------------------------------------------------------------------------//
/*!
 * Rejection sampler for the normalized Liouville measure e^{2f} dx dy dphi
 * on one fundamental domain.
 */
class LiouvilleSampler
{
  public:
    explicit LiouvilleSampler(ConformalSurface const& surface);

    UnitTangent draw(Rng& rng) const;
    //! Expected acceptance rate
    double efficiency() const { return efficiency_; }

  private:
    ConformalSurface const* surface_;
    std::array<double, 4> box_;
    double bound_;
    double efficiency_;
};

//! Substream size used by sample_liouville
constexpr std::size_t liouville_chunk = 4096;

//! Deterministic i.i.d. Liouville samples; chunk j draws from stream j
std::vector<UnitTangent> sample_liouville(ConformalSurface const& surface,
                                          std::uint64_t seed, std::size_t n,
                                          unsigned threads = 1);

}  // namespace isokin
