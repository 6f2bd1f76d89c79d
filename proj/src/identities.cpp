#include "isokin/identities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "isokin/errors.hpp"
#include "isokin/parallel.hpp"
#include "isokin/stats.hpp"

namespace isokin {

FrameDerivatives frame_derivatives(ThermostatSpec const& spec,
                                   ConformalSurface const& surface,
                                   TestFunctionSM const& u,
                                   UnitTangent const& s)
{
    auto fr = frame_at(surface, s);
    auto uj = u.jet(s);
    auto lam = spec.lambda_jet(surface, s);
    Vec3 grad{uj.d(0), uj.d(1), uj.d(2)};
    Vec3 grad_phi{uj.d(0, 2), uj.d(1, 2), uj.d(2, 2)};
    double l = lam.value(), l_phi = lam.d(2);

    FrameDerivatives d;
    d.u = uj.value();
    d.Xu = fr.X.dot(grad);
    d.Hu = fr.H.dot(grad);
    d.Vu = uj.d(2);
    d.Fu = d.Xu + l * d.Vu;
    double x_vu = fr.X.dot(grad_phi);
    d.FVu = x_vu + l * uj.d(2, 2);
    // V(Xu) = Hu + X(Vu) since the phi-derivative of X is H
    d.VFu = d.Hu + x_vu + l_phi * d.Vu + l * uj.d(2, 2);
    return d;
}

namespace {

//! Derivative of g along the chart vector y at q: central differences of
//! steps h and h/2 combined by one Richardson step
template <class G>
double directional(G const& g, Vec3 const& q, Vec3 const& y, double h)
{
    auto central = [&](double step) {
        return (g(q + step * y) - g(q - step * y)) / (2.0 * step);
    };
    return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

UnitTangent as_state(Vec3 const& q)
{
    return UnitTangent{q[0], q[1], q[2]};
}

}  // namespace

PestovSides pestov_sides(ThermostatSpec const& spec,
                         ConformalSurface const& surface,
                         TestFunctionSM const& u, UnitTangent const& s,
                         double h)
{
    if (!surface.in_domain(s.x, s.y))
        throw DomainError("pestov_residual: state outside the chart");
    auto d = frame_derivatives(spec, surface, u, s);
    auto lv = lambda_eval(spec, surface, s);
    auto fr = frame_at(surface, s);
    double K = curvature(surface, s.x, s.y);
    Vec3 q = s.as_vector();
    Vec3 F = fr.X + lv.lambda * fr.V;

    auto at = [&](Vec3 const& p) {
        return frame_derivatives(spec, surface, u, as_state(p));
    };
    auto hu_vu = [&](Vec3 const& p) {
        auto e = at(p);
        return e.Hu * e.Vu;
    };
    auto fu_vu = [&](Vec3 const& p) {
        auto e = at(p);
        return e.Fu * e.Vu;
    };
    auto fu_hu = [&](Vec3 const& p) {
        auto e = at(p);
        return e.Fu * e.Hu;
    };

    PestovSides out;
    out.lhs = 2.0 * d.Hu * d.VFu;
    out.rhs = d.Fu * d.Fu + d.Hu * d.Hu
              - (K - lv.H + lv.lambda * lv.lambda) * d.Vu * d.Vu
              + directional(hu_vu, q, F, h) + lv.V * d.Hu * d.Vu
              - directional(fu_vu, q, fr.H, h)
              + directional(fu_hu, q, fr.V, h);
    return out;
}

double pestov_residual(ThermostatSpec const& spec,
                       ConformalSurface const& surface,
                       TestFunctionSM const& u, UnitTangent const& s, double h)
{
    auto p = pestov_sides(spec, surface, u, s, h);
    return std::abs(p.lhs - p.rhs);
}

//---------------------------------------------------------------------------//

double IdentityCheck::sigma() const
{
    return std::hypot(sigma_lhs, sigma_rhs);
}

double z_score(double lhs, double rhs, double sigma)
{
    double diff = std::abs(lhs - rhs);
    if (sigma > 0.0)
        return diff / sigma;
    return diff > 0.0 ? INFINITY : 0.0;
}

bool agrees(double lhs, double rhs, double sigma, double nsigma)
{
    double floor = 1e-9 * std::max(std::abs(lhs), std::abs(rhs));
    return std::abs(lhs - rhs) <= nsigma * sigma + floor;
}

namespace {

IdentityCheck make_check(std::string name, double lhs, double rhs,
                         double sl, double sr)
{
    IdentityCheck c;
    c.identity = std::move(name);
    c.lhs = lhs;
    c.rhs = rhs;
    c.sigma_lhs = sl;
    c.sigma_rhs = sr;
    c.z = z_score(lhs, rhs, c.sigma());
    c.pass = agrees(lhs, rhs, c.sigma());
    return c;
}

//! Sample-parallel accumulation over fixed chunks; `body(i, stats)` adds
//! sample i to the per-chunk accumulators
template <class Body>
std::vector<RunningStats> accumulate(std::size_t n, std::size_t nstats,
                                     unsigned threads, Body&& body)
{
    std::size_t nchunks = (n + liouville_chunk - 1) / liouville_chunk;
    std::vector<std::vector<RunningStats>> parts(
        nchunks, std::vector<RunningStats>(nstats));
    parallel_for(nchunks, threads, [&](std::size_t j) {
        std::size_t end = std::min(n, (j + 1) * liouville_chunk);
        for (std::size_t i = j * liouville_chunk; i < end; ++i)
            body(i, parts[j]);
    });
    std::vector<RunningStats> out(nstats);
    for (std::size_t k = 0; k < nstats; ++k)
    {
        std::vector<RunningStats> col(nchunks);
        for (std::size_t j = 0; j < nchunks; ++j)
            col[j] = parts[j][k];
        out[k] = merge_all(col);
    }
    return out;
}

}  // namespace

IdentityCheck integral_identity_check(ThermostatSpec const& spec,
                                      ConformalSurface const& surface,
                                      TestFunctionSM const& u,
                                      MonteCarloOptions const& options)
{
    auto samples = sample_liouville(surface, options.seed, options.n_samples,
                                    options.threads);
    // stats: lhs integrand, rhs integrand, difference
    auto st = accumulate(
        samples.size(), 3, options.threads,
        [&](std::size_t i, std::vector<RunningStats>& acc) {
            auto const& s = samples[i];
            auto d = frame_derivatives(spec, surface, u, s);
            double k_eff = effective_curvature(spec, surface, s);
            double l = d.FVu * d.FVu - k_eff * d.Vu * d.Vu;
            double r = d.VFu * d.VFu - d.Fu * d.Fu;
            acc[0].add(l);
            acc[1].add(r);
            acc[2].add(l - r);
        });
    double vol = surface.liouville_volume();
    auto c = make_check("integral_identity", vol * st[0].mean(),
                        vol * st[1].mean(), vol * st[0].standard_error(),
                        vol * st[1].standard_error());
    c.detail = "n=" + std::to_string(samples.size())
               + " paired_sigma=" + std::to_string(vol * st[2].standard_error());
    return c;
}

//---------------------------------------------------------------------------//

char const* to_string(Bundle b)
{
    return b == Bundle::stable ? "stable" : "unstable";
}

namespace {

//! V(lambda) and K_eff at half-step nodes of an orbit; node j is at time
//! direction * j * h / 2
struct OrbitCoefficients
{
    std::vector<double> a;
    std::vector<double> k;
    double h = 0.0;
    long n_steps = 0;
};

OrbitCoefficients orbit_coefficients(ThermostatFlow const& tf,
                                     UnitTangent const& s, double span,
                                     double h, double direction)
{
    OrbitCoefficients oc;
    oc.n_steps = std::max(1L, static_cast<long>(std::llround(span / h)));
    oc.h = span / static_cast<double>(oc.n_steps);
    std::size_t nodes = 2 * static_cast<std::size_t>(oc.n_steps) + 1;
    oc.a.resize(nodes);
    oc.k.resize(nodes);
    FlowState st;
    st.s = s;
    st.record_deck = false;
    tf.reduce(st);
    auto const& spec = tf.spec();
    auto const& surface = tf.surface();
    auto eval = [&](std::size_t j) {
        auto lv = lambda_eval(spec, surface, st.s);
        double K = curvature(surface, st.s.x, st.s.y);
        oc.a[j] = lv.V;
        oc.k[j] = K - lv.H + lv.lambda * lv.lambda + lv.FV;
    };
    eval(0);
    for (std::size_t j = 1; j < nodes; ++j)
    {
        tf.step(st, direction * 0.5 * oc.h);
        eval(j);
    }
    return oc;
}

struct Linear
{
    double w;
    double p;
};

/*!
 * Integrate w'' = -a w' - k w (sigma = w'/w) over the nodes from index
 * `from` to `to` (full steps of stride 2), with signed time step dt.
 * Returns the final sigma; `track` receives sigma at every full node.
 */
double relax(OrbitCoefficients const& oc, long from, long to, double dt,
             double sigma0, bool throw_on_blowup,
             std::vector<double>* track = nullptr)
{
    long stride = to > from ? 2 : -2;
    long half = stride / 2;
    Linear y{1.0, sigma0};
    auto f = [](Linear const& v, double a, double k) {
        return Linear{v.p, -a * v.p - k * v.w};
    };
    auto axpy = [](Linear const& v, double s, Linear const& d) {
        return Linear{v.w + s * d.w, v.p + s * d.p};
    };
    if (track)
        track->push_back(sigma0);
    for (long i = from; i != to; i += stride)
    {
        auto ui = static_cast<std::size_t>(i);
        auto um = static_cast<std::size_t>(i + half);
        auto ue = static_cast<std::size_t>(i + stride);
        Linear k1 = f(y, oc.a[ui], oc.k[ui]);
        Linear k2 = f(axpy(y, 0.5 * dt, k1), oc.a[um], oc.k[um]);
        Linear k3 = f(axpy(y, 0.5 * dt, k2), oc.a[um], oc.k[um]);
        Linear k4 = f(axpy(y, dt, k3), oc.a[ue], oc.k[ue]);
        Linear next{y.w + dt / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w),
                    y.p + dt / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p)};
        if (throw_on_blowup && (next.w <= 0.0) != (y.w <= 0.0))
            throw ConjugatePointError(
                "riccati",
                "solution from sigma = 0 escaped to infinity (conjugate "
                "point; the flow is not Anosov here)");
        if (!std::isfinite(next.w) || !std::isfinite(next.p))
            throw NumericalError("riccati", "non-finite Riccati solution");
        double scale = std::max(std::abs(next.w), std::abs(next.p));
        y = {next.w / scale, next.p / scale};
        if (track)
            track->push_back(y.p / y.w);
    }
    return y.p / y.w;
}

void check_riccati(RiccatiOptions const& o)
{
    if (!(o.burn_in > 0.0) || !(o.dt > 0.0))
        throw PreconditionError("riccati needs burn_in > 0 and dt > 0");
}

//! Relaxed sigma at s for each initial value
std::vector<double> relax_at(ThermostatFlow const& tf, UnitTangent const& s,
                             Bundle which, RiccatiOptions const& o,
                             std::vector<double> const& initial)
{
    // unstable: orbit backward, sigma forward in time; stable: mirrored
    double direction = which == Bundle::unstable ? -1.0 : 1.0;
    auto oc = orbit_coefficients(tf, s, o.burn_in, o.dt, direction);
    long last = 2 * oc.n_steps;
    double dt = -direction * oc.h;
    std::vector<double> out;
    for (std::size_t i = 0; i < initial.size(); ++i)
        out.push_back(relax(oc, last, 0, dt, initial[i], i == 0));
    return out;
}

}  // namespace

double riccati_slope(ThermostatFlow const& tf, UnitTangent const& s,
                     Bundle which, RiccatiOptions const& options)
{
    check_riccati(options);
    double sigma = relax_at(tf, s, which, options, {0.0})[0];
    return sigma + lambda_eval(tf.spec(), tf.surface(), s).V;
}

RiccatiValue riccati_at(ThermostatFlow const& tf, UnitTangent const& s,
                        RiccatiOptions const& options)
{
    check_riccati(options);
    std::vector<double> init{0.0, options.alt_initial, -options.alt_initial};
    auto u = relax_at(tf, s, Bundle::unstable, options, init);
    auto st = relax_at(tf, s, Bundle::stable, options, init);
    double v_lambda = lambda_eval(tf.spec(), tf.surface(), s).V;

    RiccatiValue out;
    out.burn_in = options.burn_in;
    out.r_unstable = u[0] + v_lambda;
    out.r_stable = st[0] + v_lambda;
    for (auto const* set : {&u, &st})
        for (std::size_t i = 0; i < set->size(); ++i)
            for (std::size_t j = i + 1; j < set->size(); ++j)
            {
                double d = std::abs((*set)[i] - (*set)[j]);
                if (!std::isfinite(d))
                    d = INFINITY;
                out.self_consistency = std::max(out.self_consistency, d);
            }
    out.anosov = out.gap() > 1e-6 && out.self_consistency < 1e-3;
    return out;
}

RiccatiResidual riccati_residual(ThermostatFlow const& tf,
                                 UnitTangent const& s0, double T,
                                 double burn_in, double dt)
{
    if (!(T > 0.0) || !(burn_in > 0.0) || !(dt > 0.0))
        throw PreconditionError("riccati_residual needs T, burn_in, dt > 0");
    long n_burn = std::max(2L, static_cast<long>(std::llround(burn_in / dt)));
    long n_window = std::max(1L, static_cast<long>(std::llround(T / dt)));
    double span = dt * static_cast<double>(2 * n_burn + n_window);
    auto oc = orbit_coefficients(tf, s0, span, dt, 1.0);
    long last = 2 * oc.n_steps;

    std::vector<double> su, ss;
    su.reserve(static_cast<std::size_t>(oc.n_steps + 1));
    relax(oc, 0, last, oc.h, 0.0, true, &su);
    relax(oc, last, 0, -oc.h, 0.0, true, &ss);
    std::reverse(ss.begin(), ss.end());

    RiccatiResidual out;
    out.min_gap = INFINITY;
    double h = oc.h;
    auto residual = [&](std::vector<double> const& sg, long n) {
        auto i = static_cast<std::size_t>(n);
        double deriv = (-sg[i + 2] + 8.0 * sg[i + 1] - 8.0 * sg[i - 1]
                        + sg[i - 2])
                       / (12.0 * h);
        double a = oc.a[2 * i], k = oc.k[2 * i];
        return std::abs(deriv + (sg[i] + a) * sg[i] + k);
    };
    for (long n = n_burn; n <= n_burn + n_window; ++n)
    {
        out.max_residual_unstable
            = std::max(out.max_residual_unstable, residual(su, n));
        out.max_residual_stable
            = std::max(out.max_residual_stable, residual(ss, n));
        auto i = static_cast<std::size_t>(n);
        out.min_gap = std::min(out.min_gap, su[i] - ss[i]);
        ++out.n_points;
    }
    return out;
}

//---------------------------------------------------------------------------//

std::vector<PositivityCheck>
positivity_identity_check(ThermostatFlow const& tf,
                          std::vector<NamedFunction> const& psis,
                          PositivityOptions const& options)
{
    check_riccati(options.riccati);
    auto const& surface = tf.surface();
    auto const& spec = tf.spec();
    auto samples = sample_liouville(surface, options.mc.seed,
                                    options.mc.n_samples, options.mc.threads);
    std::size_t np = psis.size();
    // per psi: lhs, rhs, difference
    auto st = accumulate(
        samples.size(), 3 * np, options.mc.threads,
        [&](std::size_t i, std::vector<RunningStats>& acc) {
            auto const& s = samples[i];
            double r = riccati_slope(tf, s, options.which, options.riccati);
            auto lv = lambda_eval(spec, surface, s);
            double k_eff = effective_curvature(spec, surface, s);
            for (std::size_t p = 0; p < np; ++p)
            {
                auto d = frame_derivatives(spec, surface, psis[p].u, s);
                double l = d.Fu * d.Fu - k_eff * d.u * d.u;
                double g = d.Fu - r * d.u + d.u * lv.V;
                acc[3 * p].add(l);
                acc[3 * p + 1].add(g * g);
                acc[3 * p + 2].add(l - g * g);
            }
        });

    double vol = surface.liouville_volume();
    std::vector<PositivityCheck> out;
    for (std::size_t p = 0; p < np; ++p)
    {
        auto const& sl = st[3 * p];
        auto const& sr = st[3 * p + 1];
        PositivityCheck pc;
        pc.identity = make_check("positivity_" + std::string(to_string(options.which)),
                                 vol * sl.mean(), vol * sr.mean(),
                                 vol * sl.standard_error(),
                                 vol * sr.standard_error());
        pc.identity.detail
            = "psi=" + psis[p].name + " n=" + std::to_string(samples.size())
              + " paired_sigma="
              + std::to_string(vol * st[3 * p + 2].standard_error());
        double rhs = pc.identity.rhs, srhs = pc.identity.sigma_rhs;
        pc.rhs_nonnegative = rhs >= -3.0 * srhs;
        pc.rhs_positive = rhs > 3.0 * srhs;
        out.push_back(std::move(pc));
    }
    return out;
}

//---------------------------------------------------------------------------//

SymmetryReport liouville_symmetry_check(ConformalSurface const& surface,
                                        OneForm const& theta,
                                        MonteCarloOptions const& options)
{
    SymmetryReport rep;
    std::size_t n = options.n_samples;
    double vol = surface.liouville_volume();

    // antithetic pairs from one sample set
    auto base = sample_liouville(surface, options.seed, n, options.threads);
    std::vector<double> odd(n), sq(n), scale(n);
    parallel_for(n, options.threads, [&](std::size_t i) {
        auto const& s = base[i];
        double tv = theta.on_velocity(surface, s);
        double tiv = theta.on_velocity(surface, s.rotated());
        double tmv = theta.on_velocity(surface, s.flipped());
        odd[i] = std::abs(tv + tmv);
        sq[i] = std::abs((tv * tv + tiv * tiv) - (tiv * tiv + tmv * tmv));
        scale[i] = tv * tv + tiv * tiv;
    });
    rep.paired_odd_max = *std::max_element(odd.begin(), odd.end());
    rep.paired_square_max = *std::max_element(sq.begin(), sq.end());
    double mag = std::max(1.0, *std::max_element(scale.begin(), scale.end()));
    rep.antithetic_pass = rep.paired_odd_max <= 1e-12 * std::sqrt(mag)
                          && rep.paired_square_max <= 1e-12 * mag;

    // independent sample sets
    auto draw = [&](std::uint64_t k) {
        return sample_liouville(surface, mix_seed(options.seed + k), n,
                                options.threads);
    };
    auto s1 = draw(1), s2 = draw(2), s3 = draw(3);
    auto st = accumulate(n, 3, options.threads,
                         [&](std::size_t i, std::vector<RunningStats>& acc) {
                             acc[0].add(theta.on_velocity(surface, s1[i]));
                             double a = theta.on_velocity(surface, s2[i]);
                             double b = theta.on_velocity(surface,
                                                          s3[i].rotated());
                             acc[1].add(a * a);
                             acc[2].add(b * b);
                         });
    rep.mean_zero = make_check("liouville_mean_zero", vol * st[0].mean(), 0.0,
                               vol * st[0].standard_error(), 0.0);
    rep.squares_equal = make_check(
        "liouville_squares_equal", vol * st[1].mean(), vol * st[2].mean(),
        vol * st[1].standard_error(), vol * st[2].standard_error());
    rep.mean_zero.detail = "independent n=" + std::to_string(n);
    rep.squares_equal.detail = rep.mean_zero.detail;

    rep.pass = rep.antithetic_pass && rep.mean_zero.pass
               && rep.squares_equal.pass;
    if (surface.is_torus() && theta.provenance() == FormProvenance::constant)
    {
        auto ab = theta.constant_components();
        double closed = std::numbers::pi * (ab[0] * ab[0] + ab[1] * ab[1])
                        * surface.period_x() * surface.period_y();
        auto c = make_check("liouville_closed_form", vol * st[1].mean(),
                            closed, vol * st[1].standard_error(), 0.0);
        c.detail = "pi (a0^2 + b0^2) Lx Ly";
        rep.pass = rep.pass && c.pass;
        rep.closed_form = std::move(c);
    }
    return rep;
}

}  // namespace isokin
