#include "isokin/hyperbolic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_map>

#include "isokin/errors.hpp"

namespace isokin {
namespace {

constexpr double pi = std::numbers::pi;

}  // namespace

//---------------------------------------------------------------------------//
// MobiusMap

MobiusMap::MobiusMap(Complex a, Complex b)
{
    double det = std::norm(a) - std::norm(b);
    if (!(det > 0.0))
        throw PreconditionError("Mobius map does not preserve the disk");
    double s = 1.0 / std::sqrt(det);
    a_ = a * s;
    b_ = b * s;
}

MobiusMap MobiusMap::rotation(double angle)
{
    return MobiusMap(std::polar(1.0, 0.5 * angle), Complex{});
}

MobiusMap MobiusMap::translation(double length)
{
    return MobiusMap(Complex{std::cosh(0.5 * length)},
                     Complex{std::sinh(0.5 * length)});
}

MobiusMap operator*(MobiusMap const& lhs, MobiusMap const& rhs)
{
    // Matrix product of [[a, b], [conj b, conj a]] representatives
    Complex a = lhs.a_ * rhs.a_ + lhs.b_ * std::conj(rhs.b_);
    Complex b = lhs.a_ * rhs.b_ + lhs.b_ * std::conj(rhs.a_);
    return MobiusMap(a, b);
}

double MobiusMap::normalization_defect() const
{
    return std::abs(std::norm(a_) - std::norm(b_) - 1.0);
}

double MobiusMap::distance_to_identity() const
{
    double plus = std::max(std::abs(a_ - 1.0), std::abs(b_));
    double minus = std::max(std::abs(a_ + 1.0), std::abs(b_));
    return std::min(plus, minus);
}

double hyperbolic_distance(Complex z, Complex w)
{
    double num = std::norm(z - w);
    double den = (1.0 - std::norm(z)) * (1.0 - std::norm(w));
    return std::acosh(1.0 + 2.0 * num / den);
}

double hyperbolic_radius(Complex z)
{
    return 2.0 * std::atanh(std::abs(z));
}

UnitTangent apply(MobiusMap const& m, UnitTangent const& s)
{
    Complex z{s.x, s.y};
    Complex w = m(z);
    return UnitTangent::make(w.real(), w.imag(),
                             s.phi + std::arg(m.derivative(z)));
}

Mat3 transport_jacobian(MobiusMap const& m, UnitTangent const& s)
{
    Complex z{s.x, s.y};
    Complex d = m.derivative(z);
    Complex slope = m.log_derivative_slope(z);
    Mat3 j;
    j << d.real(), -d.imag(), 0.0,  //
        d.imag(), d.real(), 0.0,    //
        slope.imag(), slope.real(), 1.0;
    return j;
}

Vec3 transport_tangent(MobiusMap const& m, UnitTangent const& s,
                       Vec3 const& xi)
{
    return transport_jacobian(m, s) * xi;
}

//---------------------------------------------------------------------------//
// FuchsianOctagon

FuchsianOctagon::FuchsianOctagon()
{
    // Right triangle (center, side midpoint, vertex) with angles pi/8, pi/8
    double cosh_d = 1.0 / std::tan(pi / 8.0);
    side_distance_ = std::acosh(cosh_d);
    circumradius_ = std::acosh(cosh_d * cosh_d);
    vertex_radius_ = std::tanh(0.5 * circumradius_);

    double foot = std::tanh(0.5 * side_distance_);
    double center_dist = (1.0 + foot * foot) / (2.0 * foot);
    double radius = (1.0 - foot * foot) / (2.0 * foot);

    for (int k = 0; k < num_sides; ++k)
    {
        double theta = k * pi / 4.0;
        Complex dir = std::polar(1.0, theta);
        generators_[k] = MobiusMap(Complex{std::cosh(side_distance_)},
                                   -std::sinh(side_distance_) * dir);
        sides_[k] = GeodesicSide{center_dist * dir, radius, vertex(k),
                                 vertex(k + 1)};
    }
}

Complex FuchsianOctagon::vertex(int j) const
{
    return std::polar(vertex_radius_, (2 * j - 1) * pi / 8.0);
}

double FuchsianOctagon::interior_angle(int j) const
{
    Complex v = vertex(j);
    auto tangent_toward = [&](GeodesicSide const& side, Complex other) {
        Complex radial = v - side.circle_center;
        Complex t = Complex{-radial.imag(), radial.real()};
        Complex chord = other - v;
        if (t.real() * chord.real() + t.imag() * chord.imag() < 0.0)
            t = -t;
        return t / std::abs(t);
    };
    int next = ((j % num_sides) + num_sides) % num_sides;
    int prev = (next + num_sides - 1) % num_sides;
    Complex t1 = tangent_toward(sides_[next], vertex(j + 1));
    Complex t2 = tangent_toward(sides_[prev], vertex(j - 1));
    return std::abs(std::arg(t2 / t1));
}

double FuchsianOctagon::side_violation(Complex z, int k) const
{
    auto const& side = sides_[k];
    return side.circle_radius - std::abs(z - side.circle_center);
}

bool FuchsianOctagon::contains(Complex z, double tol) const
{
    if (std::norm(z) >= 1.0)
        return false;
    for (int k = 0; k < num_sides; ++k)
        if (side_violation(z, k) > tol)
            return false;
    return true;
}

Reduction FuchsianOctagon::reduce(UnitTangent const& s, int max_steps) const
{
    Complex z{s.x, s.y};
    if (!(std::norm(z) < 1.0))
        throw DomainError("reduce: point outside the unit disk");
    Reduction out{s, {}, MobiusMap{}};
    for (int step = 0;; ++step)
    {
        Complex cur{out.state.x, out.state.y};
        int worst = -1;
        double worst_violation = 1e-12;
        for (int k = 0; k < num_sides; ++k)
        {
            double v = side_violation(cur, k);
            if (v > worst_violation)
            {
                worst_violation = v;
                worst = k;
            }
        }
        if (worst < 0)
            return out;
        if (step >= max_steps)
            throw ReductionError("reduce", "no convergence after "
                                               + std::to_string(max_steps)
                                               + " generator applications");
        out.state = apply(generators_[worst], out.state);
        out.word.push_back(worst);
        out.map = generators_[worst] * out.map;
    }
}

MobiusMap FuchsianOctagon::word_map(std::span<int const> word) const
{
    MobiusMap m;
    for (int k : word)
        m = generators_[k] * m;
    return m;
}

std::shared_ptr<FuchsianOctagon const> build_octagon_group()
{
    auto group = std::make_shared<FuchsianOctagon const>();
    auto fail = [](std::string const& what) {
        throw std::logic_error("octagon group self-check failed: " + what);
    };
    if (std::abs(group->vertex_radius() - std::pow(2.0, -0.25)) > 1e-12)
        fail("vertex radius");
    for (int k = 0; k < FuchsianOctagon::num_sides; ++k)
    {
        auto const& g = group->generator(k);
        auto const& src = group->side(k);
        auto const& dst = group->side((k + 4) % 8);
        if (std::abs(g(src.start) - dst.end) > 1e-10
            || std::abs(g(src.end) - dst.start) > 1e-10)
            fail("side pairing " + std::to_string(k));
        if ((g * group->generator((k + 4) % 8)).distance_to_identity()
            > 1e-12)
            fail("inverse pairing " + std::to_string(k));
        if (std::abs(group->interior_angle(k) - pi / 4.0) > 1e-10)
            fail("interior angle " + std::to_string(k));
    }
    if (group->word_map(FuchsianOctagon::relation).distance_to_identity()
        > 1e-8)
        fail("surface relation");
    return group;
}

//---------------------------------------------------------------------------//
// OrbitTable

OrbitTable::OrbitTable(std::shared_ptr<FuchsianOctagon const> group,
                       Complex center, double support_radius, int truncation)
    : group_(std::move(group))
{
    if (!(std::norm(center) < 1.0))
        throw PreconditionError("bump center outside the unit disk");
    if (!(support_radius > 0.0))
        throw PreconditionError("bump radius must be positive");

    double const design_near = group_->circumradius() + 0.5;
    double const design_full
        = group_->circumradius() + 2.0 * group_->side_distance() + 0.5;
    double const explore = design_full + support_radius
                           + group_->circumradius() + hyperbolic_radius(center)
                           + 0.5;

    struct Element
    {
        MobiusMap map;
        Complex point;
        int length;
    };
    std::vector<Element> found{{MobiusMap{}, center, 0}};
    std::unordered_map<long long, std::vector<std::size_t>> grid;
    constexpr double cell = 1e-6;
    auto key_of = [](long long i, long long j) { return i * 4000037LL + j; };
    auto locate = [&](Complex p) -> bool {
        long long i = std::llround(p.real() / cell);
        long long j = std::llround(p.imag() / cell);
        for (long long di = -1; di <= 1; ++di)
            for (long long dj = -1; dj <= 1; ++dj)
            {
                auto it = grid.find(key_of(i + di, j + dj));
                if (it == grid.end())
                    continue;
                for (auto idx : it->second)
                    if (std::abs(found[idx].point - p) < 1e-8)
                        return true;
            }
        return false;
    };
    auto insert = [&](Complex p, std::size_t idx) {
        grid[key_of(std::llround(p.real() / cell),
                    std::llround(p.imag() / cell))]
            .push_back(idx);
    };
    insert(center, 0);

    std::size_t frontier_begin = 0;
    for (int length = 0;; ++length)
    {
        std::size_t frontier_end = found.size();
        if (frontier_begin == frontier_end)
            break;
        if (length > 64)
            throw std::logic_error("orbit enumeration did not terminate");
        for (std::size_t i = frontier_begin; i < frontier_end; ++i)
        {
            for (int k = 0; k < FuchsianOctagon::num_sides; ++k)
            {
                MobiusMap next = found[i].map * group_->generator(k);
                Complex p = next(center);
                if (hyperbolic_radius(p) > explore || locate(p))
                    continue;
                found.push_back({next, p, length + 1});
                insert(p, found.size() - 1);
            }
        }
        frontier_begin = frontier_end;
    }

    // Terms reachable from the closed octagon must fit the truncation.
    double const octagon_reach = group_->circumradius() + support_radius;
    min_displacement_ = std::numeric_limits<double>::infinity();
    double first_excluded = std::numeric_limits<double>::infinity();
    for (auto const& e : found)
    {
        double r = hyperbolic_radius(e.point);
        if (e.length > 0)
            min_displacement_ = std::min(
                min_displacement_, hyperbolic_distance(center, e.point));
        if (r <= octagon_reach)
            needed_length_ = std::max(needed_length_, e.length);
        if (e.length > truncation)
            first_excluded = std::min(first_excluded, r);
    }
    if (needed_length_ > truncation)
        throw PreconditionError(
            "bump truncation " + std::to_string(truncation)
            + " is too short; the octagon needs words of length "
            + std::to_string(needed_length_));
    if (!(support_radius < 0.5 * min_displacement_))
        throw PreconditionError(
            "bump radius overlaps its own orbit (radius must be below "
            + std::to_string(0.5 * min_displacement_) + ")");

    full_radius_ = std::min(design_full, first_excluded - support_radius);
    near_radius_ = std::min(design_near, full_radius_);

    for (auto const& e : found)
    {
        double r = hyperbolic_radius(e.point);
        if (e.length <= truncation && r <= full_radius_ + support_radius)
            entries_.push_back({e.point, e.map.inverse(), r, e.length});
    }
    std::sort(entries_.begin(), entries_.end(),
              [](Entry const& a, Entry const& b) { return a.radius < b.radius; });
    near_count_ = static_cast<std::size_t>(
        std::upper_bound(entries_.begin(), entries_.end(),
                         near_radius_ + support_radius,
                         [](double r, Entry const& e) { return r < e.radius; })
        - entries_.begin());
}

std::span<OrbitTable::Entry const> OrbitTable::candidates(Complex z) const
{
    double r = hyperbolic_radius(z);
    if (r <= near_radius_)
        return {entries_.data(), near_count_};
    if (r <= full_radius_)
        return entries_;
    throw DomainError("point at hyperbolic radius " + std::to_string(r)
                      + " is beyond the orbit table coverage");
}

//---------------------------------------------------------------------------//
// Bumps

namespace {

// d^2 = acosh(1 + 2 delta)^2 and derivatives in delta up to order 3
std::array<double, 4> squared_distance_of_delta(double delta)
{
    if (delta < 1e-2)
    {
        static constexpr double c[] = {4.0,
                                       -4.0 / 3.0,
                                       32.0 / 45.0,
                                       -16.0 / 35.0,
                                       512.0 / 1575.0,
                                       -512.0 / 2079.0,
                                       4096.0 / 21021.0,
                                       -1024.0 / 6435.0,
                                       131072.0 / 984555.0};
        constexpr int n = 9;
        std::array<double, 4> out{};
        // out[m] = sum_k c_k * k!/(k-m)! delta^(k-m), k = 1..n
        for (int m = 0; m <= 3; ++m)
        {
            double acc = 0.0;
            for (int k = n; k >= 1; --k)
            {
                if (k < m)
                    break;
                double falling = 1.0;
                for (int t = 0; t < m; ++t)
                    falling *= (k - t);
                acc += c[k - 1] * falling * std::pow(delta, k - m);
            }
            out[m] = acc;
        }
        return out;
    }
    using J = Jet<1, 3>;
    J d = J::variable(0, delta);
    J y = 1.0 + 2.0 * d;
    J a = log(y + sqrt(y * y - 1.0));
    J h = a * a;
    return {h.coeff(0), h.coeff(1), 2.0 * h.coeff(2), 6.0 * h.coeff(3)};
}

}  // namespace

SurfaceJet squared_distance_jet(SurfaceJet const& x, SurfaceJet const& y,
                                Complex w)
{
    SurfaceJet dx = x - w.real();
    SurfaceJet dy = y - w.imag();
    SurfaceJet delta = (dx * dx + dy * dy)
                       / ((1.0 - x * x - y * y) * (1.0 - std::norm(w)));
    return SurfaceJet::compose(delta,
                               squared_distance_of_delta(delta.value()));
}

SurfaceJet bump_profile(SurfaceJet const& dist_sq, double radius,
                        double amplitude)
{
    SurfaceJet t = 1.0 - dist_sq / (radius * radius);
    // exp(1 - 1/t) and all its derivatives underflow below this
    if (t.value() < 2e-3)
        return SurfaceJet(0.0);
    return amplitude * exp(1.0 - reciprocal(t));
}

namespace {

class BumpNode final : public ScalarField::Node
{
  public:
    BumpNode(std::shared_ptr<FuchsianOctagon const> group, Complex center,
             double radius, double amplitude, int truncation)
        : table_(std::move(group), center, radius, truncation)
        , radius_(radius)
        , amplitude_(amplitude)
        , delta_max_(0.5 * (std::cosh(radius) - 1.0))
    {
    }

    SurfaceJet eval(double x, double y) const override
    {
        Complex z{x, y};
        if (!(std::norm(z) < 1.0))
            throw DomainError("bump evaluated outside the unit disk");
        SurfaceJet sum(0.0);
        SurfaceJet xj = SurfaceJet::variable(0, x);
        SurfaceJet yj = SurfaceJet::variable(1, y);
        double one_minus = 1.0 - std::norm(z);
        for (auto const& e : table_.candidates(z))
        {
            double delta = std::norm(z - e.point)
                           / (one_minus * (1.0 - std::norm(e.point)));
            if (delta >= delta_max_)
                continue;
            sum += bump_profile(squared_distance_jet(xj, yj, e.point),
                                radius_, amplitude_);
        }
        return sum;
    }

  private:
    OrbitTable table_;
    double radius_;
    double amplitude_;
    double delta_max_;
};

class FiberBumpNode final : public BundleFunction::Node
{
  public:
    FiberBumpNode(std::shared_ptr<FuchsianOctagon const> group,
                  Complex center, double radius, double amplitude,
                  int harmonic, double phase, int truncation)
        : table_(std::move(group), center, radius, truncation)
        , radius_(radius)
        , amplitude_(amplitude)
        , harmonic_(harmonic)
        , phase_(phase)
        , delta_max_(0.5 * (std::cosh(radius) - 1.0))
    {
    }

    BundleJet eval(UnitTangent const& s) const override
    {
        Complex z{s.x, s.y};
        if (!(std::norm(z) < 1.0))
            throw DomainError("bump evaluated outside the unit disk");
        BundleJet sum(0.0);
        SurfaceJet xj = SurfaceJet::variable(0, s.x);
        SurfaceJet yj = SurfaceJet::variable(1, s.y);
        BundleJet xb = bundle_var(0, s), yb = bundle_var(1, s),
                  phib = bundle_var(2, s);
        double one_minus = 1.0 - std::norm(z);
        for (auto const& e : table_.candidates(z))
        {
            double delta = std::norm(z - e.point)
                           / (one_minus * (1.0 - std::norm(e.point)));
            if (delta >= delta_max_)
                continue;
            BundleJet base
                = bump_profile(squared_distance_jet(xj, yj, e.point), radius_,
                               amplitude_)
                      .truncate<2>()
                      .extend<3>();
            // heading of the pulled-back copy: phi + arg m'(z),
            // arg m'(z) = -2 arg(conj(b) z + conj(a))
            Complex bb = std::conj(e.pullback.b());
            Complex aa = std::conj(e.pullback.a());
            BundleJet re = bb.real() * xb - bb.imag() * yb + aa.real();
            BundleJet im = bb.imag() * xb + bb.real() * yb + aa.imag();
            BundleJet psi = phib - 2.0 * atan2(im, re);
            sum += base * cos(static_cast<double>(harmonic_) * psi - phase_);
        }
        return sum;
    }

  private:
    OrbitTable table_;
    double radius_;
    double amplitude_;
    int harmonic_;
    double phase_;
    double delta_max_;
};

}  // namespace

ScalarField invariant_bump(std::shared_ptr<FuchsianOctagon const> group,
                           Complex center, double radius, double amplitude,
                           int truncation)
{
    return ScalarField(std::make_shared<BumpNode>(
        std::move(group), center, radius, amplitude, truncation));
}

BundleFunction invariant_fiber_bump(
    std::shared_ptr<FuchsianOctagon const> group, Complex center,
    double radius, double amplitude, int harmonic, double phase,
    int truncation)
{
    return BundleFunction(std::make_shared<FiberBumpNode>(
        std::move(group), center, radius, amplitude, harmonic, phase,
        truncation));
}

}  // namespace isokin
