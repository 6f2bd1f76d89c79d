#include "isokin/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace isokin {

char const* to_string(FormProvenance p)
{
    switch (p)
    {
        case FormProvenance::exact:
            return "exact";
        case FormProvenance::product:
            return "product";
        case FormProvenance::constant:
            return "constant";
        case FormProvenance::general:
            return "general";
    }
    return "?";
}

char const* to_string(SpecVariant v)
{
    switch (v)
    {
        case SpecVariant::geodesic:
            return "geodesic";
        case SpecVariant::magnetic:
            return "magnetic";
        case SpecVariant::gaussian:
            return "gaussian";
        case SpecVariant::general:
            return "general";
    }
    return "?";
}

//---------------------------------------------------------------------------//
// OneForm

OneForm::OneForm()
    : eval_([](double, double) {
        return FormJet{SurfaceJet2(0.0), SurfaceJet2(0.0)};
    })
    , potential_(ScalarField::constant(0.0))
{
}

OneForm OneForm::exact(ScalarField potential)
{
    OneForm out;
    out.provenance_ = FormProvenance::exact;
    if (potential.constant_value())
    {
        out.eval_ = [](double, double) {
            return FormJet{SurfaceJet2(0.0), SurfaceJet2(0.0)};
        };
    }
    else
    {
        out.eval_ = [potential](double x, double y) {
            auto w = potential.jet(x, y);
            return FormJet{w.partial(0), w.partial(1)};
        };
    }
    out.potential_ = std::move(potential);
    return out;
}

OneForm OneForm::product(ScalarField w1, ScalarField w2)
{
    OneForm out;
    out.provenance_ = FormProvenance::product;
    out.eval_ = [w1, w2](double x, double y) {
        auto f = w1.jet(x, y).truncate<2>();
        auto g = w2.jet(x, y);
        return FormJet{f * g.partial(0), f * g.partial(1)};
    };
    out.factors_ = {std::move(w1), std::move(w2)};
    return out;
}

OneForm OneForm::constant(double a0, double b0)
{
    OneForm out;
    out.provenance_ = FormProvenance::constant;
    out.eval_ = [a0, b0](double, double) {
        return FormJet{SurfaceJet2(a0), SurfaceJet2(b0)};
    };
    out.ab0_ = {a0, b0};
    return out;
}

OneForm OneForm::general(Evaluator fn)
{
    OneForm out;
    out.provenance_ = FormProvenance::general;
    out.eval_ = std::move(fn);
    return out;
}

double OneForm::on_velocity(ConformalSurface const& surface,
                            UnitTangent const& s) const
{
    auto ab = components(s.x, s.y);
    double e = std::exp(-surface.conformal_exponent(s.x, s.y).value());
    return e * (ab.a.value() * std::cos(s.phi) + ab.b.value() * std::sin(s.phi));
}

double OneForm::on_rotated(ConformalSurface const& surface,
                           UnitTangent const& s) const
{
    auto ab = components(s.x, s.y);
    double e = std::exp(-surface.conformal_exponent(s.x, s.y).value());
    return e
           * (-ab.a.value() * std::sin(s.phi) + ab.b.value() * std::cos(s.phi));
}

double OneForm::curl(double x, double y) const
{
    auto ab = components(x, y);
    return ab.b.d(0) - ab.a.d(1);
}

OneForm OneForm::scaled(double eps) const
{
    switch (provenance_)
    {
        case FormProvenance::exact:
            return exact(eps * *potential_);
        case FormProvenance::product:
            return product(eps * factors_[0], factors_[1]);
        case FormProvenance::constant:
            return constant(eps * ab0_[0], eps * ab0_[1]);
        case FormProvenance::general:
            break;
    }
    auto fn = eval_;
    return general([fn, eps](double x, double y) {
        auto ab = fn(x, y);
        return FormJet{eps * ab.a, eps * ab.b};
    });
}

OneForm operator+(OneForm const& lhs, OneForm const& rhs)
{
    if (lhs.provenance_ == FormProvenance::exact
        && rhs.provenance_ == FormProvenance::exact)
        return OneForm::exact(*lhs.potential_ + *rhs.potential_);
    auto f = lhs.eval_, g = rhs.eval_;
    return OneForm::general([f, g](double x, double y) {
        auto p = f(x, y), q = g(x, y);
        return FormJet{p.a + q.a, p.b + q.b};
    });
}

OneForm make_exact_form(ScalarField w)
{
    return OneForm::exact(std::move(w));
}

double max_curl_on_grid(ConformalSurface const& surface, OneForm const& form,
                        int grid)
{
    auto box = surface.bounding_box();
    double const h = 1e-5;
    double worst = 0.0;
    for (int i = 0; i < grid; ++i)
    {
        for (int j = 0; j < grid; ++j)
        {
            double x = box[0] + (box[1] - box[0]) * (i + 0.5) / grid;
            double y = box[2] + (box[3] - box[2]) * (j + 0.5) / grid;
            if (!surface.in_fundamental_domain(x, y, 0.0))
                continue;
            double bx = (form.components(x + h, y).b.value()
                         - form.components(x - h, y).b.value())
                        / (2 * h);
            double ay = (form.components(x, y + h).a.value()
                         - form.components(x, y - h).a.value())
                        / (2 * h);
            worst = std::max(worst, std::abs(bx - ay));
        }
    }
    return worst;
}

ProductForm make_product_form(ConformalSurface const& surface, ScalarField w1,
                              ScalarField w2)
{
    ProductForm out;
    out.form = OneForm::product(std::move(w1), std::move(w2));
    out.max_curl = max_curl_on_grid(surface, out.form);
    if (out.max_curl < 1e-6)
    {
        out.degenerate = true;
        out.warning = "product form W1 dW2 has max |d theta| = "
                      + std::to_string(out.max_curl)
                      + " < 1e-6; non-exactness is not certified";
    }
    return out;
}

//---------------------------------------------------------------------------//
// ThermostatSpec

ThermostatSpec ThermostatSpec::geodesic()
{
    return ThermostatSpec{};
}

ThermostatSpec ThermostatSpec::magnetic(ScalarField m)
{
    ThermostatSpec s;
    s.variant_ = SpecVariant::magnetic;
    s.m_ = std::move(m);
    return s;
}

ThermostatSpec ThermostatSpec::gaussian(OneForm theta)
{
    ThermostatSpec s;
    s.variant_ = SpecVariant::gaussian;
    s.theta_ = std::move(theta);
    return s;
}

ThermostatSpec ThermostatSpec::general(BundleFunction lambda)
{
    ThermostatSpec s;
    s.variant_ = SpecVariant::general;
    s.lambda_ = std::move(lambda);
    return s;
}

OneForm const& ThermostatSpec::form() const
{
    if (variant_ != SpecVariant::gaussian)
        throw std::logic_error("thermostat spec has no 1-form");
    return theta_;
}

ScalarField const& ThermostatSpec::magnetic_field() const
{
    if (variant_ != SpecVariant::magnetic)
        throw std::logic_error("thermostat spec has no magnetic field");
    return m_;
}

BundleJet ThermostatSpec::lambda_jet(ConformalSurface const& surface,
                                     UnitTangent const& s) const
{
    switch (variant_)
    {
        case SpecVariant::geodesic:
            if (!surface.in_domain(s.x, s.y))
                throw DomainError("state outside the chart domain");
            return BundleJet(0.0);
        case SpecVariant::magnetic:
            if (!surface.in_domain(s.x, s.y))
                throw DomainError("state outside the chart domain");
            return m_.jet(s.x, s.y).truncate<2>().extend<3>();
        case SpecVariant::gaussian: {
            BundleJet f = surface.conformal_exponent(s.x, s.y).extend<3>();
            auto ab = theta_.components(s.x, s.y);
            BundleJet phi = bundle_var(2, s);
            return exp(-f)
                   * (cos(phi) * ab.b.extend<3>() - sin(phi) * ab.a.extend<3>());
        }
        case SpecVariant::general:
            if (!surface.in_domain(s.x, s.y))
                throw DomainError("state outside the chart domain");
            return lambda_.jet(s);
    }
    return BundleJet(0.0);
}

LambdaValues lambda_values(ConformalSurface const& surface,
                           UnitTangent const& s, BundleJet const& lam)
{
    auto fr = frame_at(surface, s);
    Vec3 grad{lam.d(0), lam.d(1), lam.d(2)};
    Vec3 grad_v{lam.d(0, 2), lam.d(1, 2), lam.d(2, 2)};
    LambdaValues out;
    out.lambda = lam.value();
    out.V = lam.d(2);
    out.H = fr.H.dot(grad);
    out.X = fr.X.dot(grad);
    out.FV = fr.X.dot(grad_v) + out.lambda * lam.d(2, 2);
    return out;
}

LambdaValues lambda_eval(ThermostatSpec const& spec,
                         ConformalSurface const& surface, UnitTangent const& s)
{
    return lambda_values(surface, s, spec.lambda_jet(surface, s));
}

CurvatureTerms effective_curvature_terms(ThermostatSpec const& spec,
                                         ConformalSurface const& surface,
                                         UnitTangent const& s)
{
    auto lv = lambda_eval(spec, surface, s);
    CurvatureTerms t;
    t.K = curvature(surface, s.x, s.y);
    t.minus_H_lambda = -lv.H;
    t.lambda_sq = lv.lambda * lv.lambda;
    t.F_V_lambda = lv.FV;
    return t;
}

double effective_curvature(ThermostatSpec const& spec,
                           ConformalSurface const& surface,
                           UnitTangent const& s)
{
    return effective_curvature_terms(spec, surface, s).total();
}

Divergence divergence_F(ThermostatSpec const& spec,
                        ConformalSurface const& surface, UnitTangent const& s)
{
    Divergence d;
    d.value = spec.lambda_jet(surface, s).d(2);
    if (spec.variant() == SpecVariant::gaussian)
    {
        double mtv = -spec.form().on_velocity(surface, s);
        if (std::abs(mtv - d.value) > 1e-12 * std::max(1.0, std::abs(mtv)))
            throw std::logic_error("V(lambda) differs from -theta(v)");
        d.minus_theta_v = mtv;
    }
    return d;
}

//---------------------------------------------------------------------------//

namespace {

bool is_zero_form(OneForm const& e)
{
    if (e.provenance() == FormProvenance::exact)
        return e.potential()->constant_value().has_value();
    if (e.provenance() == FormProvenance::constant)
        return e.constant_components()[0] == 0.0
               && e.constant_components()[1] == 0.0;
    return false;
}

}  // namespace

IsoenergeticReduction isoenergetic_reduce(ConformalSurface const& surface,
                                          ScalarField const& w,
                                          OneForm const& e_form, double k,
                                          int grid)
{
    IsoenergeticReduction out;
    if (auto c = w.constant_value())
    {
        out.margin = k - *c;
    }
    else
    {
        auto box = surface.bounding_box();
        out.margin = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= grid; ++i)
            for (int j = 0; j <= grid; ++j)
            {
                double x = box[0] + (box[1] - box[0]) * i / grid;
                double y = box[2] + (box[3] - box[2]) * j / grid;
                if (!surface.in_fundamental_domain(x, y, 1e-9))
                    continue;
                out.margin = std::min(out.margin, k - w(x, y));
            }
    }
    if (!(out.margin > 0.0))
        throw EnergyLevelError("energy level k = " + std::to_string(k)
                               + " is not above the potential (min k - W = "
                               + std::to_string(out.margin) + ")");

    if (auto c = w.constant_value())
    {
        out.form = e_form.scaled(1.0 / (2.0 * (k - *c)));
        return out;
    }
    if (is_zero_form(e_form))
    {
        out.form = OneForm::exact(ScalarField::expression(
            [w, k](SurfaceJet const& x, SurfaceJet const& y) {
                return 0.5 * log(k - w.jet(x.value(), y.value()));
            }));
        return out;
    }
    out.form = OneForm::general([w, e_form, k](double x, double y) {
        auto wj = w.jet(x, y);
        SurfaceJet2 inv = 1.0 / (2.0 * (k - wj.truncate<2>()));
        auto e = e_form.components(x, y);
        return FormJet{(e.a - wj.partial(0)) * inv,
                       (e.b - wj.partial(1)) * inv};
    });
    return out;
}

}  // namespace isokin
