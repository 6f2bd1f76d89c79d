#pragma once

#include <array>
#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "scalar_field.hpp"
#include "types.hpp"

namespace isokin {

using Complex = std::complex<double>;

//---------------------------------------------------------------------------//
/*!
 * Orientation-preserving isometry of the Poincaré disk,
 * z -> (a z + b) / (conj(b) z + conj(a)) with |a|^2 - |b|^2 = 1.
 */
class MobiusMap
{
  public:
    MobiusMap() = default;
    //! Normalizes so that |a|^2 - |b|^2 = 1
    MobiusMap(Complex a, Complex b);

    static MobiusMap rotation(double angle);
    //! Hyperbolic translation by `length` along the real diameter
    static MobiusMap translation(double length);

    Complex a() const { return a_; }
    Complex b() const { return b_; }

    Complex operator()(Complex z) const
    {
        return (a_ * z + b_) / (std::conj(b_) * z + std::conj(a_));
    }
    Complex derivative(Complex z) const
    {
        Complex den = std::conj(b_) * z + std::conj(a_);
        return 1.0 / (den * den);
    }
    //! m''(z) / m'(z)
    Complex log_derivative_slope(Complex z) const
    {
        return -2.0 * std::conj(b_) / (std::conj(b_) * z + std::conj(a_));
    }

    MobiusMap inverse() const { return MobiusMap(std::conj(a_), -b_, raw); }
    //! Composition: (lhs * rhs)(z) = lhs(rhs(z))
    friend MobiusMap operator*(MobiusMap const& lhs, MobiusMap const& rhs);

    //! | |a|^2 - |b|^2 - 1 |
    double normalization_defect() const;
    //! Max coefficient distance to the identity (up to overall sign)
    double distance_to_identity() const;

  private:
    struct Raw
    {
    };
    static constexpr Raw raw{};
    MobiusMap(Complex a, Complex b, Raw) : a_(a), b_(b) {}

    Complex a_{1.0, 0.0};
    Complex b_{0.0, 0.0};
};

double hyperbolic_distance(Complex z, Complex w);
//! Hyperbolic distance from the disk center
double hyperbolic_radius(Complex z);

//! Image of a unit tangent; the heading turns by arg m'(z)
UnitTangent apply(MobiusMap const& m, UnitTangent const& s);
//! Differential of the induced map on SM in (x, y, phi) chart coordinates
Mat3 transport_jacobian(MobiusMap const& m, UnitTangent const& s);
Vec3 transport_tangent(MobiusMap const& m, UnitTangent const& s,
                       Vec3 const& xi);

//---------------------------------------------------------------------------//

struct GeodesicSide
{
    Complex circle_center;  //!< Euclidean center of the supporting circle
    double circle_radius;
    Complex start;  //!< Vertex at the clockwise end
    Complex end;    //!< Vertex at the counterclockwise end
};

struct Reduction
{
    UnitTangent state;
    std::vector<int> word;  //!< Generators in the order they were applied
    MobiusMap map;          //!< Composite map: state = map(input)
};

//---------------------------------------------------------------------------//
/*!
 * Surface group of the regular hyperbolic octagon with angles pi/4.
 *
 * Side k faces direction k*pi/4; generator g_k maps side k onto side k+4
 * and g_{k+4} is its inverse. The quotient is a closed genus-2 surface.
 */
class FuchsianOctagon
{
  public:
    static constexpr int num_sides = 8;
    //! g_0 g_3 g_6 g_1 g_4 g_7 g_2 g_5 = identity
    static constexpr std::array<int, 8> relation{0, 3, 6, 1, 4, 7, 2, 5};

    FuchsianOctagon();

    MobiusMap const& generator(int k) const { return generators_[k]; }
    GeodesicSide const& side(int k) const { return sides_[k]; }
    Complex vertex(int j) const;
    double vertex_radius() const { return vertex_radius_; }
    //! Hyperbolic distance from the center to each side
    double side_distance() const { return side_distance_; }
    //! Hyperbolic distance from the center to each vertex
    double circumradius() const { return circumradius_; }
    //! Interior angle at vertex j, from the side circles
    double interior_angle(int j) const;

    //! Signed violation of side k: positive when z lies beyond it
    double side_violation(Complex z, int k) const;
    bool contains(Complex z, double tol = 1e-12) const;

    /*!
     * Map a state into the closed fundamental octagon by repeatedly
     * applying the pairing of the most violated side.
     */
    Reduction reduce(UnitTangent const& s, int max_steps = 64) const;

    //! Composite map of a word, first letter applied first
    MobiusMap word_map(std::span<int const> word) const;

  private:
    std::array<MobiusMap, num_sides> generators_;
    std::array<GeodesicSide, num_sides> sides_;
    double vertex_radius_;
    double side_distance_;
    double circumradius_;
};

//! Builds the group and verifies its side pairings and relation
std::shared_ptr<FuchsianOctagon const> build_octagon_group();

//---------------------------------------------------------------------------//
/*!
 * Group orbit of a point, truncated to the elements whose images can lie
 * within a support radius of the region where fields are evaluated.
 */
class OrbitTable
{
  public:
    struct Entry
    {
        Complex point;       //!< gamma(center)
        MobiusMap pullback;  //!< gamma^{-1}
        double radius;       //!< hyperbolic distance of point from 0
        int word_length;
    };

    OrbitTable(std::shared_ptr<FuchsianOctagon const> group, Complex center,
               double support_radius, int truncation);

    //! Entries whose support may contain z
    std::span<Entry const> candidates(Complex z) const;
    //! Smallest displacement d(c, gamma c) over nontrivial elements
    double min_displacement() const { return min_displacement_; }
    //! Longest word needed by the evaluation region
    int needed_word_length() const { return needed_length_; }
    //! Evaluation is valid for hyperbolic radius up to this value
    double coverage_radius() const { return full_radius_; }
    std::size_t size() const { return entries_.size(); }

  private:
    std::shared_ptr<FuchsianOctagon const> group_;
    std::vector<Entry> entries_;  // sorted by radius
    std::size_t near_count_ = 0;
    double near_radius_ = 0.0;
    double full_radius_ = 0.0;
    double min_displacement_ = 0.0;
    int needed_length_ = 0;
};

/*!
 * Group-invariant bump: sum over the orbit of
 * amplitude * exp(1 - 1/(1 - (d/radius)^2)) with d the hyperbolic distance.
 */
ScalarField invariant_bump(std::shared_ptr<FuchsianOctagon const> group,
                           Complex center, double radius, double amplitude,
                           int truncation = 8);

/*!
 * Deck-invariant function on SM: Poincaré series of a bump times a fiber
 * harmonic cos(k psi - phase), where psi is the heading pulled back to the
 * bump's home copy.
 */
BundleFunction invariant_fiber_bump(
    std::shared_ptr<FuchsianOctagon const> group, Complex center,
    double radius, double amplitude, int harmonic, double phase,
    int truncation = 8);

//! Bump profile of d^2 as a jet (exposed for tests)
SurfaceJet bump_profile(SurfaceJet const& dist_sq, double radius,
                        double amplitude);
//! Squared hyperbolic distance to w as a jet in the coordinates of z
SurfaceJet squared_distance_jet(SurfaceJet const& x, SurfaceJet const& y,
                                Complex w);

}  // namespace isokin
