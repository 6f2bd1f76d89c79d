#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dynamics.hpp"

namespace isokin {

struct LyapunovOptions
{
    double T = 2000.0;
    double dt = 1e-3;
    double renorm_interval = 1.0;
    double burn_in = 50.0;
    //! Exponent magnitude accepted as the flow direction
    double flow_zero_tol = 5e-3;
    //! Integrate the time-reversed flow (dt is negated internally)
    bool time_reversed = false;
    //! Running averages are also recorded at this fraction of T
    double checkpoint_fraction = 0.1;
};

struct LyapunovHistoryPoint
{
    double t;  //!< time since the end of burn-in
    std::array<double, 3> exponents;
};

struct LyapunovResult
{
    //! Sorted descending
    std::array<double, 3> exponents{};
    std::vector<LyapunovHistoryPoint> history;
    double renorm_interval = 1.0;
    //! Standard deviation of the running estimates over the last decade of
    //! the history (one value per exponent)
    std::array<double, 3> convergence_error{};
    //! Exactly one exponent is within flow_zero_tol of 0
    bool flow_direction_identified = false;
    //! Time average of minus the divergence of the integrated vector field,
    //! -V(lambda) forward and +V(lambda) when time reversed, over the same
    //! window
    double minus_divergence_average = 0.0;
    //! The same running average at checkpoint_fraction * T
    double minus_divergence_checkpoint = 0.0;
    //! Observer averages over the same window, in input order
    std::vector<double> observer_averages;
    UnitTangent final_state;
};

/*!
 * Benettin method: the tangent frame is orthonormalized (QR in the frame
 * norm) every renorm_interval; exponents are averaged log stretch factors.
 */
LyapunovResult lyapunov_spectrum(ThermostatFlow const& tf,
                                 UnitTangent const& s0,
                                 LyapunovOptions const& options,
                                 std::vector<Observer> const& observers = {});

//---------------------------------------------------------------------------//

enum class EstimatorMethod
{
    lyapunov_sum,
    birkhoff_divergence,
    birkhoff,
};

char const* to_string(EstimatorMethod m);

struct EstimatorResult
{
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t n_samples = 0;
    EstimatorMethod method = EstimatorMethod::birkhoff;
    //! |mean(T) - mean(T/10)| / standard_error(T/10)
    double drift_z = 0.0;
    //! drift_z <= 5
    bool converged = true;
};

struct EnsembleConfig
{
    std::size_t trajectories = 100;
    double T = 1000.0;
    double dt = 1e-3;
    double burn_in = 50.0;
    double renorm_interval = 1.0;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    //! Start from flipped seeds and integrate backward in time
    bool time_reversed = false;
};

struct EntropyProduction
{
    EstimatorResult lyapunov_sum;
    EstimatorResult birkhoff_divergence;
    //! |lyapunov_sum - birkhoff_divergence| / combined sigma
    double agreement_z = 0.0;
    //! Ensemble means and standard errors of the sorted exponents
    std::array<double, 3> exponents{};
    std::array<double, 3> exponent_errors{};
    //! Per-trajectory exponents, in seed order
    std::vector<std::array<double, 3>> trajectory_exponents;
    //! Running ensemble means of the lyapunov_sum estimator
    std::vector<LyapunovHistoryPoint> mean_history;
};

/*!
 * Entropy production -<div F> over the SRB measure, estimated from an
 * ensemble of Liouville-random seeds after burn-in: minus the sum of the
 * Lyapunov exponents, and the Birkhoff average of -V(lambda), on the same
 * trajectories.
 */
EntropyProduction entropy_production(ThermostatFlow const& tf,
                                     EnsembleConfig const& config);

//! Ensemble Birkhoff average of an observable
EstimatorResult birkhoff_average(ThermostatFlow const& tf,
                                 Observer const& observable,
                                 EnsembleConfig const& config);

//! Ensemble statistics of per-trajectory values with the T/10 drift check
EstimatorResult summarize(std::vector<double> const& final_values,
                          std::vector<double> const& early_values,
                          EstimatorMethod method);

}  // namespace isokin
