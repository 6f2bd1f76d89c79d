#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fields.hpp"
#include "geometry.hpp"
#include "hyperbolic.hpp"

namespace isokin {

struct FlowState
{
    UnitTangent s;
    double t = 0.0;
    //! Generators applied by reductions, in order (quotient charts)
    std::vector<int> word_log;
    //! Composite deck map: s = deck(unreduced state)
    MobiusMap deck;
    //! Keep word_log and deck; the composite loses precision once the
    //! trajectory has travelled far (tens of time units), so long runs turn
    //! this off
    bool record_deck = true;
};

//! Chart vector field of F and its Jacobian at one state
struct FlowDerivative
{
    Vec3 rhs;
    Mat3 jacobian;
};

//---------------------------------------------------------------------------//
/*!
 * Thermostat flow F = X + lambda V in chart coordinates,
 *   x' = e^{-f} cos phi, y' = e^{-f} sin phi,
 *   phi' = e^{-f} (-f_x sin phi + f_y cos phi) + lambda,
 * integrated with the classical fixed-step RK4 method.
 */
class ThermostatFlow
{
  public:
    //! Default step bound
    static constexpr double default_dt_max = 1e-3;

    ThermostatFlow(ConformalSurface const& surface, ThermostatSpec const& spec,
                   double dt_max = default_dt_max);

    ConformalSurface const& surface() const { return *surface_; }
    ThermostatSpec const& spec() const { return *spec_; }
    double dt_max() const { return dt_max_; }

    Vec3 rhs(Vec3 const& q) const;
    FlowDerivative derivative(Vec3 const& q) const;

    //! One RK4 step (dt may be negative), then reduction to the fundamental
    //! domain; set reduce_state = false to stay on the universal cover
    void step(FlowState& state, double dt, bool reduce_state = true) const;
    /*!
     * RK4 step of the state together with the linearized flow applied to the
     * columns of `tangent` (chart components). Tangent columns are
     * transported by the same deck map when the state is reduced.
     */
    void variational_step(FlowState& state, Mat3& tangent, double dt) const;

    //! Reduce into the fundamental domain; returns the chart Jacobian of the
    //! identification that was applied
    Mat3 reduce(FlowState& state) const;

  private:
    void check_dt(double dt) const;

    ConformalSurface const* surface_;
    ThermostatSpec const* spec_;
    double dt_max_;
};

//---------------------------------------------------------------------------//

struct Observer
{
    std::string name;
    std::function<double(UnitTangent const&)> fn;
};

struct HistoryPoint
{
    double t;
    std::vector<double> means;
};

struct FlowSummary
{
    FlowState final_state;
    std::vector<std::string> names;
    std::vector<double> averages;
    //! Running means at logarithmically spaced times
    std::vector<HistoryPoint> history;
};

/*!
 * Integrate for time T with fixed step dt and accumulate time averages of
 * the observers (trapezoid rule in time).
 */
FlowSummary flow(ThermostatFlow const& tf, UnitTangent const& s0, double T,
                 double dt, std::vector<Observer> const& observers,
                 int history_per_decade = 10);

//! Standard observers
Observer observe_lambda(ThermostatFlow const& tf);
Observer observe_V_lambda(ThermostatFlow const& tf);
Observer observe_effective_curvature(ThermostatFlow const& tf);
//! theta(v), gaussian specs only
Observer observe_theta_v(ThermostatFlow const& tf);

}  // namespace isokin
