#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "fields.hpp"
#include "geometry.hpp"
#include "presets.hpp"

namespace isokin {

//! Smooth function on SM with analytic chart partials up to order 2
using TestFunctionSM = BundleFunction;

//! Frame derivatives of a test function at one state
struct FrameDerivatives
{
    double u = 0.0;
    double Xu = 0.0;
    double Hu = 0.0;
    double Vu = 0.0;
    double Fu = 0.0;   //!< Xu + lambda Vu
    double VFu = 0.0;  //!< V(F(u))
    double FVu = 0.0;  //!< F(V(u))
};

FrameDerivatives frame_derivatives(ThermostatSpec const& spec,
                                   ConformalSurface const& surface,
                                   TestFunctionSM const& u,
                                   UnitTangent const& s);

//! Both sides of the Pestov identity at a state
struct PestovSides
{
    double lhs = 0.0;  //!< 2 Hu VFu
    double rhs = 0.0;
};

/*!
 * Pestov identity
 *   2 Hu VFu = (Fu)^2 + (Hu)^2 - (K - H lambda + lambda^2)(Vu)^2
 *              + F(Hu Vu) + V(lambda) Hu Vu - H(Fu Vu) + V(Fu Hu).
 * The outer derivatives of the products are central differences of step h
 * along the frame directions, with one Richardson step.
 */
PestovSides pestov_sides(ThermostatSpec const& spec,
                         ConformalSurface const& surface,
                         TestFunctionSM const& u, UnitTangent const& s,
                         double h = 1e-4);
double pestov_residual(ThermostatSpec const& spec,
                       ConformalSurface const& surface,
                       TestFunctionSM const& u, UnitTangent const& s,
                       double h = 1e-4);

//---------------------------------------------------------------------------//

//! One line of an identity report
struct IdentityCheck
{
    std::string identity;
    double lhs = 0.0;
    double rhs = 0.0;
    double sigma_lhs = 0.0;
    double sigma_rhs = 0.0;
    //! |lhs - rhs| / sqrt(sigma_lhs^2 + sigma_rhs^2)
    double z = 0.0;
    bool pass = false;
    std::string detail;

    double sigma() const;
};

//! Agreement within `nsigma` combined standard errors; zero-variance
//! estimates may differ by rounding (relative 1e-9)
bool agrees(double lhs, double rhs, double sigma, double nsigma = 3.0);
double z_score(double lhs, double rhs, double sigma);

struct MonteCarloOptions
{
    std::size_t n_samples = 100000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

/*!
 * Integral identity over SM with the Liouville measure:
 *   int (FVu)^2 - int K_eff (Vu)^2 = int (VFu)^2 - int (Fu)^2,
 * K_eff = K - H(lambda) + lambda^2 + F(V(lambda)). Integrals are reported
 * unnormalized (total measure 2 pi area times the sample mean).
 */
IdentityCheck integral_identity_check(ThermostatSpec const& spec,
                                      ConformalSurface const& surface,
                                      TestFunctionSM const& u,
                                      MonteCarloOptions const& options);

//---------------------------------------------------------------------------//

struct RiccatiOptions
{
    double burn_in = 20.0;
    double dt = 0.01;
    //! Alternative initial values for the self-consistency runs
    double alt_initial = 2.0;
};

struct RiccatiValue
{
    //! Unstable slope: E^u is spanned by H + r_unstable V
    double r_unstable = 0.0;
    //! Stable slope
    double r_stable = 0.0;
    double burn_in = 0.0;
    //! Largest disagreement among the relaxations started from
    //! 0, +alt_initial and -alt_initial (both directions)
    double self_consistency = 0.0;
    double gap() const { return r_unstable - r_stable; }
    //! Positive gap and relaxations that agree
    bool anosov = false;
};

/*!
 * Slopes of the unstable and stable bundles at s from the Riccati equation
 *   sigma' = -sigma^2 - V(lambda) sigma - K_eff,   r = sigma + V(lambda),
 * relaxed forward along the orbit arriving at s (unstable) and backward
 * along the orbit leaving s (stable). Throws ConjugatePointError when the
 * relaxation from sigma = 0 blows up.
 */
RiccatiValue riccati_at(ThermostatFlow const& tf, UnitTangent const& s,
                        RiccatiOptions const& options = {});

enum class Bundle
{
    stable,
    unstable,
};

char const* to_string(Bundle b);

//! Single relaxation from sigma = 0 (r, not sigma)
double riccati_slope(ThermostatFlow const& tf, UnitTangent const& s,
                     Bundle which, RiccatiOptions const& options = {});

struct RiccatiResidual
{
    //! max |sigma' + (sigma + V(lambda)) sigma + K_eff| over the window,
    //! sigma' by a fourth-order difference of the computed solution
    double max_residual_unstable = 0.0;
    double max_residual_stable = 0.0;
    double max_residual() const
    {
        return std::max(max_residual_unstable, max_residual_stable);
    }
    //! min over the window of r_unstable - r_stable
    double min_gap = 0.0;
    std::size_t n_points = 0;
};

/*!
 * Integrate the orbit of s0 over [0, burn_in + T + burn_in], relax the
 * unstable solution forward from 0 and the stable one backward from the
 * end, and evaluate the residual on the window [burn_in, burn_in + T].
 */
RiccatiResidual riccati_residual(ThermostatFlow const& tf,
                                 UnitTangent const& s0, double T,
                                 double burn_in = 20.0, double dt = 1e-3);

//---------------------------------------------------------------------------//

struct PositivityOptions
{
    MonteCarloOptions mc;
    RiccatiOptions riccati;
    Bundle which = Bundle::unstable;
};

struct PositivityCheck
{
    IdentityCheck identity;  //!< lhs: int (F psi)^2 - K_eff psi^2
    //! RHS = int (F psi - r psi + psi V(lambda))^2 >= -3 sigma
    bool rhs_nonnegative = false;
    //! RHS > 3 sigma
    bool rhs_positive = false;
};

/*!
 * Positivity identity
 *   int (F psi)^2 - int K_eff psi^2 = int (F psi - r psi + psi V(lambda))^2
 * for r = r_stable or r_unstable, evaluated on shared Monte Carlo samples
 * for each psi (the Riccati slopes are computed once per sample).
 */
std::vector<PositivityCheck>
positivity_identity_check(ThermostatFlow const& tf,
                          std::vector<NamedFunction> const& psis,
                          PositivityOptions const& options);

//---------------------------------------------------------------------------//

struct SymmetryReport
{
    //! Antithetic pairs (v, -v): largest |theta(v) + theta(-v)|
    double paired_odd_max = 0.0;
    //! Antithetic rotation pairs: largest per-sample difference of
    //! theta(v)^2 + theta(iv)^2 and theta(iv)^2 + theta(-v)^2
    double paired_square_max = 0.0;
    bool antithetic_pass = false;
    //! Independent samples
    IdentityCheck mean_zero;        //!< int theta(v) vs 0
    IdentityCheck squares_equal;    //!< int theta(v)^2 vs int theta(iv)^2
    //! Torus with constant form: int theta(v)^2 vs pi (a0^2 + b0^2) Lx Ly
    std::optional<IdentityCheck> closed_form;
    bool pass = false;
};

SymmetryReport liouville_symmetry_check(ConformalSurface const& surface,
                                        OneForm const& theta,
                                        MonteCarloOptions const& options);

}  // namespace isokin
