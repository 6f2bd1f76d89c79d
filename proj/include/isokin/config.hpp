#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fields.hpp"
#include "geometry.hpp"
#include "presets.hpp"

namespace isokin {

enum class SurfaceKind
{
    flat_torus,
    wavy_torus,
    octagon,
};

enum class FieldPreset
{
    none,               //!< geodesic flow
    exact_bump,         //!< theta = eps dW1
    product_bumps,      //!< theta = eps W1 dW2
    constant_form,      //!< theta = eps (a0 dx + b0 dy), tori only
    magnetic_constant,  //!< lambda = m
    magnetic_bump,      //!< lambda = m W1
    general,            //!< lambda = eps * built-in fiberwise forcing
};

char const* to_string(SurfaceKind k);
char const* to_string(FieldPreset p);

struct SurfaceConfig
{
    SurfaceKind kind = SurfaceKind::octagon;
    double amplitude = 0.3;  //!< wavy torus
    double lx = two_pi;
    double ly = two_pi;
};

struct FieldConfig
{
    FieldPreset preset = FieldPreset::none;
    double strength = 0.3;
    //! W1, W2; defaults depend on the surface
    std::vector<BumpParams> bumps;
    int truncation = default_truncation;
    std::array<double, 2> form{1.0, 0.0};
    double m = 0.5;
};

struct RunConfig
{
    double dt = 0.01;
    double dt_max = 0.0;  //!< 0: same as dt
    double T = 1000.0;
    double burn_in = 50.0;
    std::size_t ensemble = 100;
    std::uint64_t seed = 1;
    std::size_t n_samples = 100000;
    double renorm_interval = 1.0;
    std::vector<double> epsilons;
    double riccati_burn_in = 20.0;
    double riccati_dt = 0.01;
    std::size_t riccati_samples = 20;
    //! States for the pointwise (Pestov, bracket) suites
    std::size_t n_states = 1000;
    //! Monte Carlo samples for the positivity identity
    std::size_t positivity_samples = 400;
};

struct OutputConfig
{
    std::string directory = "out";
    bool csv = true;
    bool json = true;
    bool history = true;
};

struct ExperimentConfig
{
    std::string name = "experiment";
    SurfaceConfig surface;
    FieldConfig field;
    //! Variant implied by the field preset
    SpecVariant spec = SpecVariant::geodesic;
    RunConfig run;
    OutputConfig output;
    //! Raw file contents (hashed and embedded in the manifest)
    std::string source;
};

//! Parse and validate; throws ConfigError carrying the offending line
ExperimentConfig parse_config(std::string const& text);
ExperimentConfig load_config(std::string const& path);

ConformalSurface build_surface(SurfaceConfig const& cfg);

//! Field and spec for a given strength (epsilon); the surface must outlive
//! the returned spec
struct BuiltSpec
{
    ThermostatSpec spec;
    //! Non-exactness certificate for product fields
    std::optional<double> max_curl;
    std::string warning;
};

BuiltSpec build_spec(ConformalSurface const& surface, FieldConfig const& cfg,
                     double strength);

//! Bumps W1, W2 with surface defaults filled in
std::vector<BumpParams> resolved_bumps(ConformalSurface const& surface,
                                       FieldConfig const& cfg);

SpecVariant implied_variant(FieldPreset p);

}  // namespace isokin
