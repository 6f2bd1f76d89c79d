#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace isokin {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

constexpr double two_pi = 2.0 * std::numbers::pi;

inline double wrap_angle(double phi)
{
    double r = std::fmod(phi, two_pi);
    if (r < 0.0)
        r += two_pi;
    if (r >= two_pi)
        r = 0.0;
    return r;
}

//---------------------------------------------------------------------------//
/*!
 * A point of the unit tangent bundle in chart coordinates.
 *
 * The heading phi is the chart angle of the velocity: the unit vector is
 * exp(-f) (cos phi, sin phi). The rotated vector iv has heading phi + pi/2.
 */
struct UnitTangent
{
    double x = 0.0;
    double y = 0.0;
    double phi = 0.0;

    static UnitTangent make(double x, double y, double phi)
    {
        return {x, y, wrap_angle(phi)};
    }

    Vec3 as_vector() const { return {x, y, phi}; }

    UnitTangent flipped() const { return make(x, y, phi + std::numbers::pi); }
    UnitTangent rotated() const
    {
        return make(x, y, phi + 0.5 * std::numbers::pi);
    }
};

}  // namespace isokin
