#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fields.hpp"
#include "geometry.hpp"
#include "hyperbolic.hpp"

namespace isokin {

//! Shared octagon group (built and self-checked once)
std::shared_ptr<FuchsianOctagon const> const& default_octagon_group();

ConformalSurface make_flat_torus(double lx = two_pi, double ly = two_pi);
//! f = amp sin(2 pi x / lx) sin(2 pi y / ly)
ConformalSurface make_wavy_torus(double amp = 0.3, double lx = two_pi,
                                 double ly = two_pi);
ConformalSurface make_octagon();

struct BumpParams
{
    Complex center{0.0, 0.0};
    double radius = 1.2;
    double amplitude = 1.0;
};

//! Default bumps of the octagon field presets (W1 for the exact field,
//! W1 dW2 for the product field)
BumpParams default_octagon_w1();
BumpParams default_octagon_w2();
constexpr int default_truncation = 8;

//! Invariant bump on the octagon; a periodic bump
//! amp exp(-(sin^2((x - cx)/2) + sin^2((y - cy)/2)) / r^2) on a torus
ScalarField make_bump(ConformalSurface const& surface, BumpParams const& p,
                      int truncation = default_truncation);

//! Default potentials W1, W2 on a torus (trigonometric)
ScalarField default_torus_w1();
ScalarField default_torus_w2();

//! Deck-compatible fiberwise forcing for the general spec variant
BundleFunction default_general_lambda(ConformalSurface const& surface);

struct NamedFunction
{
    std::string name;
    BundleFunction u;
};

/*!
 * Three smooth test functions on SM: trigonometric in the heading times
 * base factors on a torus, invariant bumps times fiber harmonics on the
 * octagon.
 */
std::vector<NamedFunction> preset_test_functions(ConformalSurface const& surface);

}  // namespace isokin
