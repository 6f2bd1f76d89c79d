#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "scalar_field.hpp"

namespace isokin {

enum class FormProvenance
{
    exact,     //!< dW
    product,   //!< W1 dW2
    constant,  //!< a0 dx + b0 dy (torus only)
    general,
};

char const* to_string(FormProvenance p);

//! Components a, b of theta = a dx + b dy with partials up to order 2
struct FormJet
{
    SurfaceJet2 a;
    SurfaceJet2 b;
};

//---------------------------------------------------------------------------//
/*!
 * External-field 1-form in chart components, with provenance.
 */
class OneForm
{
  public:
    using Evaluator = std::function<FormJet(double x, double y)>;

    //! The zero form (exact, potential 0)
    OneForm();

    static OneForm exact(ScalarField potential);
    static OneForm product(ScalarField w1, ScalarField w2);
    static OneForm constant(double a0, double b0);
    static OneForm general(Evaluator fn);

    FormJet components(double x, double y) const { return eval_(x, y); }
    FormProvenance provenance() const { return provenance_; }
    //! Potential for exact forms
    std::optional<ScalarField> const& potential() const { return potential_; }
    //! Factors (W1, W2) for product forms
    std::vector<ScalarField> const& factors() const { return factors_; }
    //! (a0, b0) for constant forms
    std::array<double, 2> constant_components() const { return ab0_; }

    //! theta(v) at a unit tangent: exp(-f) (a cos phi + b sin phi)
    double on_velocity(ConformalSurface const& surface,
                       UnitTangent const& s) const;
    //! theta(iv): exp(-f) (-a sin phi + b cos phi)
    double on_rotated(ConformalSurface const& surface,
                      UnitTangent const& s) const;
    //! Coefficient of d(theta): b_x - a_y
    double curl(double x, double y) const;

    //! eps * theta; provenance is kept (the potential or W1 is scaled)
    OneForm scaled(double eps) const;
    //! Sum; provenance exact when both are exact, otherwise general
    friend OneForm operator+(OneForm const& lhs, OneForm const& rhs);

  private:
    Evaluator eval_;
    FormProvenance provenance_ = FormProvenance::exact;
    std::optional<ScalarField> potential_;
    std::vector<ScalarField> factors_;
    std::array<double, 2> ab0_{0.0, 0.0};
};

OneForm make_exact_form(ScalarField w);

//! Product form together with its non-exactness certificate
struct ProductForm
{
    OneForm form;
    //! max |b_x - a_y| over a sample grid, by central differences of the
    //! components
    double max_curl = 0.0;
    //! Certificate below 1e-6: the form may be (close to) exact
    bool degenerate = false;
    std::string warning;
};

ProductForm make_product_form(ConformalSurface const& surface, ScalarField w1,
                              ScalarField w2);

//! Max |b_x - a_y| over a grid on the fundamental domain, by central
//! differences of the form components
double max_curl_on_grid(ConformalSurface const& surface, OneForm const& form,
                        int grid = 48);

//---------------------------------------------------------------------------//

enum class SpecVariant
{
    geodesic,
    magnetic,
    gaussian,
    general,
};

char const* to_string(SpecVariant v);

/*!
 * Fiberwise forcing lambda of the thermostat F = X + lambda V.
 */
class ThermostatSpec
{
  public:
    static ThermostatSpec geodesic();
    static ThermostatSpec magnetic(ScalarField m);
    static ThermostatSpec gaussian(OneForm theta);
    //! User lambda(x, y, phi) with chart partials up to order 2
    static ThermostatSpec general(BundleFunction lambda);

    SpecVariant variant() const { return variant_; }
    OneForm const& form() const;
    ScalarField const& magnetic_field() const;

    //! lambda with chart partials up to order 2
    BundleJet lambda_jet(ConformalSurface const& surface,
                         UnitTangent const& s) const;

  private:
    SpecVariant variant_ = SpecVariant::geodesic;
    OneForm theta_;
    ScalarField m_;
    BundleFunction lambda_;
};

struct LambdaValues
{
    double lambda = 0.0;
    double V = 0.0;   //!< V(lambda)
    double H = 0.0;   //!< H(lambda)
    double X = 0.0;   //!< X(lambda)
    double FV = 0.0;  //!< F(V(lambda)) = X(V(lambda)) + lambda V(V(lambda))
};

//! Frame derivatives of lambda from its chart jet
LambdaValues lambda_values(ConformalSurface const& surface,
                           UnitTangent const& s, BundleJet const& lambda);
LambdaValues lambda_eval(ThermostatSpec const& spec,
                         ConformalSurface const& surface,
                         UnitTangent const& s);

struct CurvatureTerms
{
    double K = 0.0;
    double minus_H_lambda = 0.0;
    double lambda_sq = 0.0;
    double F_V_lambda = 0.0;
    double total() const { return K + minus_H_lambda + lambda_sq + F_V_lambda; }
};

CurvatureTerms effective_curvature_terms(ThermostatSpec const& spec,
                                         ConformalSurface const& surface,
                                         UnitTangent const& s);
//! K - H(lambda) + lambda^2 + F(V(lambda))
double effective_curvature(ThermostatSpec const& spec,
                           ConformalSurface const& surface,
                           UnitTangent const& s);

struct Divergence
{
    double value = 0.0;                  //!< V(lambda)
    std::optional<double> minus_theta_v;  //!< gaussian specs only
};

//! Divergence of F for the Liouville volume; gaussian specs check that it
//! equals -theta(v)
Divergence divergence_F(ThermostatSpec const& spec,
                        ConformalSurface const& surface, UnitTangent const& s);

//---------------------------------------------------------------------------//

//! k - W vanishes somewhere on the surface
class EnergyLevelError : public PreconditionError
{
  public:
    using PreconditionError::PreconditionError;
};

struct IsoenergeticReduction
{
    OneForm form;
    //! min (k - W) over the sampling grid
    double margin = 0.0;
};

/*!
 * Isokinetic form equivalent to the isoenergetic motion at energy k:
 * d(log(k - W))/2 + E / (2 (k - W)). Here E is the field 1-form, so the
 * force of a potential U is -dU.
 */
IsoenergeticReduction isoenergetic_reduce(ConformalSurface const& surface,
                                          ScalarField const& w,
                                          OneForm const& e_form, double k,
                                          int grid = 64);

}  // namespace isokin
