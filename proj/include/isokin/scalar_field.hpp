#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "jet.hpp"
#include "types.hpp"

namespace isokin {

//! Scalar on the surface with partials up to order 3 in (x, y)
using SurfaceJet = Jet<2, 3>;
//! Scalar on the surface with partials up to order 2 in (x, y)
using SurfaceJet2 = Jet<2, 2>;
//! Scalar on the unit tangent bundle with partials up to order 2 in
//! (x, y, phi)
using BundleJet = Jet<3, 2>;

//---------------------------------------------------------------------------//
/*!
 * Smooth scalar field on a chart, evaluated with closed-form partials.
 *
 * Cheap to copy; the underlying evaluator is immutable and shared.
 */
class ScalarField
{
  public:
    struct Node
    {
        virtual ~Node() = default;
        virtual SurfaceJet eval(double x, double y) const = 0;
        virtual std::optional<double> constant_value() const
        {
            return std::nullopt;
        }
    };

    using Expression = std::function<SurfaceJet(SurfaceJet const& x,
                                                SurfaceJet const& y)>;

    //! The zero field
    ScalarField();
    explicit ScalarField(std::shared_ptr<Node const> node);

    static ScalarField constant(double c);
    //! Closed-form expression in the coordinate jets
    static ScalarField expression(Expression fn);

    SurfaceJet jet(double x, double y) const { return node_->eval(x, y); }
    double operator()(double x, double y) const
    {
        return jet(x, y).value();
    }
    std::optional<double> constant_value() const
    {
        return node_->constant_value();
    }

    friend ScalarField operator+(ScalarField const& a, ScalarField const& b);
    friend ScalarField operator*(ScalarField const& a, ScalarField const& b);
    friend ScalarField operator*(double s, ScalarField const& a);

  private:
    std::shared_ptr<Node const> node_;
};

//---------------------------------------------------------------------------//
/*!
 * Smooth function on the unit tangent bundle in chart coordinates.
 */
class BundleFunction
{
  public:
    struct Node
    {
        virtual ~Node() = default;
        virtual BundleJet eval(UnitTangent const& s) const = 0;
        virtual bool is_zero() const { return false; }
    };

    using Expression = std::function<BundleJet(
        BundleJet const& x, BundleJet const& y, BundleJet const& phi)>;

    BundleFunction();
    explicit BundleFunction(std::shared_ptr<Node const> node);

    static BundleFunction constant(double c);
    static BundleFunction expression(Expression fn);
    //! Pull back a surface field along the projection
    static BundleFunction lift(ScalarField const& w);

    BundleJet jet(UnitTangent const& s) const { return node_->eval(s); }
    double operator()(UnitTangent const& s) const { return jet(s).value(); }
    bool is_zero() const { return node_->is_zero(); }

    friend BundleFunction operator+(BundleFunction const& a,
                                    BundleFunction const& b);
    friend BundleFunction operator*(BundleFunction const& a,
                                    BundleFunction const& b);
    friend BundleFunction operator*(double s, BundleFunction const& a);

  private:
    std::shared_ptr<Node const> node_;
};

//! Coordinate jets for expression evaluation
inline BundleJet bundle_var(int i, UnitTangent const& s)
{
    double v[3] = {s.x, s.y, s.phi};
    return BundleJet::variable(i, v[i]);
}

}  // namespace isokin
