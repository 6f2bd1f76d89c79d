#include "isokin/dynamics.hpp"

#include <cmath>
#include <string>

#include "isokin/errors.hpp"

namespace isokin {

ThermostatFlow::ThermostatFlow(ConformalSurface const& surface,
                               ThermostatSpec const& spec, double dt_max)
    : surface_(&surface), spec_(&spec), dt_max_(dt_max)
{
    if (!(dt_max > 0.0))
        throw PreconditionError("dt_max must be positive");
}

void ThermostatFlow::check_dt(double dt) const
{
    if (!(std::abs(dt) <= dt_max_ * (1.0 + 1e-12)) || dt == 0.0)
        throw PreconditionError("time step " + std::to_string(dt)
                                + " exceeds dt_max "
                                + std::to_string(dt_max_));
}

Vec3 ThermostatFlow::rhs(Vec3 const& q) const
{
    UnitTangent s{q[0], q[1], q[2]};
    auto f = surface_->conformal_exponent(s.x, s.y);
    double e = std::exp(-f.value());
    double c = std::cos(s.phi), sn = std::sin(s.phi);
    double lam = spec_->variant() == SpecVariant::geodesic
                     ? 0.0
                     : spec_->lambda_jet(*surface_, s).value();
    return {e * c, e * sn, e * (-f.d(0) * sn + f.d(1) * c) + lam};
}

FlowDerivative ThermostatFlow::derivative(Vec3 const& q) const
{
    UnitTangent s{q[0], q[1], q[2]};
    auto f = surface_->conformal_exponent(s.x, s.y);
    double e = std::exp(-f.value());
    double c = std::cos(s.phi), sn = std::sin(s.phi);
    double fx = f.d(0), fy = f.d(1);
    double fxx = f.d(0, 0), fxy = f.d(0, 1), fyy = f.d(1, 1);
    auto lam = spec_->lambda_jet(*surface_, s);
    double g = -fx * sn + fy * c;

    FlowDerivative out;
    out.rhs = {e * c, e * sn, e * g + lam.value()};
    Mat3& j = out.jacobian;
    j(0, 0) = -fx * e * c;
    j(0, 1) = -fy * e * c;
    j(0, 2) = -e * sn;
    j(1, 0) = -fx * e * sn;
    j(1, 1) = -fy * e * sn;
    j(1, 2) = e * c;
    j(2, 0) = e * (-fx * g - fxx * sn + fxy * c) + lam.d(0);
    j(2, 1) = e * (-fy * g - fxy * sn + fyy * c) + lam.d(1);
    j(2, 2) = e * (-fx * c - fy * sn) + lam.d(2);
    return out;
}

Mat3 ThermostatFlow::reduce(FlowState& state) const
{
    if (surface_->is_torus())
    {
        double lx = surface_->period_x(), ly = surface_->period_y();
        state.s.x -= lx * std::floor(state.s.x / lx);
        state.s.y -= ly * std::floor(state.s.y / ly);
        if (state.s.x >= lx)
            state.s.x = 0.0;
        if (state.s.y >= ly)
            state.s.y = 0.0;
        state.s.phi = wrap_angle(state.s.phi);
        return Mat3::Identity();
    }
    if (surface_->in_fundamental_domain(state.s.x, state.s.y))
    {
        state.s.phi = wrap_angle(state.s.phi);
        return Mat3::Identity();
    }
    auto r = surface_->group().reduce(state.s);
    Mat3 jac = transport_jacobian(r.map, state.s);
    state.s = r.state;
    if (state.record_deck)
    {
        state.word_log.insert(state.word_log.end(), r.word.begin(),
                              r.word.end());
        state.deck = r.map * state.deck;
    }
    return jac;
}

void ThermostatFlow::step(FlowState& state, double dt, bool reduce_state) const
{
    check_dt(dt);
    Vec3 q = state.s.as_vector();
    Vec3 k1 = rhs(q);
    Vec3 k2 = rhs(q + 0.5 * dt * k1);
    Vec3 k3 = rhs(q + 0.5 * dt * k2);
    Vec3 k4 = rhs(q + dt * k3);
    q += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    state.s = UnitTangent{q[0], q[1], q[2]};
    state.t += dt;
    if (reduce_state)
        reduce(state);
}

void ThermostatFlow::variational_step(FlowState& state, Mat3& tangent,
                                      double dt) const
{
    check_dt(dt);
    Vec3 q = state.s.as_vector();
    auto d1 = derivative(q);
    Mat3 m1 = d1.jacobian * tangent;
    auto d2 = derivative(q + 0.5 * dt * d1.rhs);
    Mat3 m2 = d2.jacobian * (tangent + 0.5 * dt * m1);
    auto d3 = derivative(q + 0.5 * dt * d2.rhs);
    Mat3 m3 = d3.jacobian * (tangent + 0.5 * dt * m2);
    auto d4 = derivative(q + dt * d3.rhs);
    Mat3 m4 = d4.jacobian * (tangent + dt * m3);
    q += dt / 6.0 * (d1.rhs + 2.0 * d2.rhs + 2.0 * d3.rhs + d4.rhs);
    tangent += dt / 6.0 * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
    state.s = UnitTangent{q[0], q[1], q[2]};
    state.t += dt;
    Mat3 jac = reduce(state);
    tangent = jac * tangent;
}

//---------------------------------------------------------------------------//

FlowSummary flow(ThermostatFlow const& tf, UnitTangent const& s0, double T,
                 double dt, std::vector<Observer> const& observers,
                 int history_per_decade)
{
    if (!(T > 0.0))
        throw PreconditionError("flow needs T > 0");
    if (!(dt > 0.0))
        throw PreconditionError("flow needs dt > 0");
    auto nsteps = static_cast<long>(std::llround(T / dt));
    if (nsteps < 1)
        nsteps = 1;
    double h = T / static_cast<double>(nsteps);

    FlowSummary out;
    out.final_state.s = s0;
    out.final_state.record_deck = false;
    tf.reduce(out.final_state);
    std::size_t nobs = observers.size();
    for (auto const& o : observers)
        out.names.push_back(o.name);

    // Sums of trapezoid weights in units of the step; a constant observer
    // then averages to itself exactly.
    std::vector<double> sums(nobs, 0.0), prev(nobs);
    for (std::size_t i = 0; i < nobs; ++i)
        prev[i] = observers[i].fn(out.final_state.s);

    double next_record = h;
    double const growth = std::pow(10.0, 1.0 / history_per_decade);
    for (long n = 1; n <= nsteps; ++n)
    {
        tf.step(out.final_state, h);
        double t = n * h;
        for (std::size_t i = 0; i < nobs; ++i)
        {
            double cur = observers[i].fn(out.final_state.s);
            sums[i] += 0.5 * (prev[i] + cur);
            prev[i] = cur;
        }
        if (t >= next_record || n == nsteps)
        {
            HistoryPoint hp{t, {}};
            for (double s : sums)
                hp.means.push_back(s / static_cast<double>(n));
            out.history.push_back(std::move(hp));
            while (next_record <= t)
                next_record *= growth;
        }
    }
    for (double s : sums)
        out.averages.push_back(s / static_cast<double>(nsteps));
    out.final_state.t = T;
    return out;
}

Observer observe_lambda(ThermostatFlow const& tf)
{
    return {"lambda", [&tf](UnitTangent const& s) {
                return tf.spec().lambda_jet(tf.surface(), s).value();
            }};
}

Observer observe_V_lambda(ThermostatFlow const& tf)
{
    return {"V_lambda", [&tf](UnitTangent const& s) {
                return tf.spec().lambda_jet(tf.surface(), s).d(2);
            }};
}

Observer observe_effective_curvature(ThermostatFlow const& tf)
{
    return {"effective_curvature", [&tf](UnitTangent const& s) {
                return effective_curvature(tf.spec(), tf.surface(), s);
            }};
}

Observer observe_theta_v(ThermostatFlow const& tf)
{
    return {"theta_v", [&tf](UnitTangent const& s) {
                return tf.spec().form().on_velocity(tf.surface(), s);
            }};
}

}  // namespace isokin
