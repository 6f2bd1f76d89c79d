#include "isokin/scalar_field.hpp"

#include <utility>

namespace isokin {
namespace {

class ConstantNode final : public ScalarField::Node
{
  public:
    explicit ConstantNode(double c) : c_(c) {}
    SurfaceJet eval(double, double) const override { return SurfaceJet(c_); }
    std::optional<double> constant_value() const override { return c_; }

  private:
    double c_;
};

class ExpressionNode final : public ScalarField::Node
{
  public:
    explicit ExpressionNode(ScalarField::Expression fn) : fn_(std::move(fn))
    {
    }
    SurfaceJet eval(double x, double y) const override
    {
        return fn_(SurfaceJet::variable(0, x), SurfaceJet::variable(1, y));
    }

  private:
    ScalarField::Expression fn_;
};

class SumNode final : public ScalarField::Node
{
  public:
    SumNode(ScalarField a, ScalarField b) : a_(std::move(a)), b_(std::move(b))
    {
    }
    SurfaceJet eval(double x, double y) const override
    {
        return a_.jet(x, y) + b_.jet(x, y);
    }
    std::optional<double> constant_value() const override
    {
        auto a = a_.constant_value(), b = b_.constant_value();
        if (a && b)
            return *a + *b;
        return std::nullopt;
    }

  private:
    ScalarField a_, b_;
};

class ProductNode final : public ScalarField::Node
{
  public:
    ProductNode(ScalarField a, ScalarField b)
        : a_(std::move(a)), b_(std::move(b))
    {
    }
    SurfaceJet eval(double x, double y) const override
    {
        return a_.jet(x, y) * b_.jet(x, y);
    }
    std::optional<double> constant_value() const override
    {
        auto a = a_.constant_value(), b = b_.constant_value();
        if (a && b)
            return *a * *b;
        if ((a && *a == 0.0) || (b && *b == 0.0))
            return 0.0;
        return std::nullopt;
    }

  private:
    ScalarField a_, b_;
};

//---------------------------------------------------------------------------//

class BundleConstantNode final : public BundleFunction::Node
{
  public:
    explicit BundleConstantNode(double c) : c_(c) {}
    BundleJet eval(UnitTangent const&) const override { return BundleJet(c_); }
    bool is_zero() const override { return c_ == 0.0; }

  private:
    double c_;
};

class BundleExpressionNode final : public BundleFunction::Node
{
  public:
    explicit BundleExpressionNode(BundleFunction::Expression fn)
        : fn_(std::move(fn))
    {
    }
    BundleJet eval(UnitTangent const& s) const override
    {
        return fn_(bundle_var(0, s), bundle_var(1, s), bundle_var(2, s));
    }

  private:
    BundleFunction::Expression fn_;
};

class LiftNode final : public BundleFunction::Node
{
  public:
    explicit LiftNode(ScalarField w) : w_(std::move(w)) {}
    BundleJet eval(UnitTangent const& s) const override
    {
        return w_.jet(s.x, s.y).truncate<2>().extend<3>();
    }
    bool is_zero() const override
    {
        auto c = w_.constant_value();
        return c && *c == 0.0;
    }

  private:
    ScalarField w_;
};

class BundleSumNode final : public BundleFunction::Node
{
  public:
    BundleSumNode(BundleFunction a, BundleFunction b)
        : a_(std::move(a)), b_(std::move(b))
    {
    }
    BundleJet eval(UnitTangent const& s) const override
    {
        return a_.jet(s) + b_.jet(s);
    }
    bool is_zero() const override { return a_.is_zero() && b_.is_zero(); }

  private:
    BundleFunction a_, b_;
};

class BundleProductNode final : public BundleFunction::Node
{
  public:
    BundleProductNode(BundleFunction a, BundleFunction b)
        : a_(std::move(a)), b_(std::move(b))
    {
    }
    BundleJet eval(UnitTangent const& s) const override
    {
        return a_.jet(s) * b_.jet(s);
    }
    bool is_zero() const override { return a_.is_zero() || b_.is_zero(); }

  private:
    BundleFunction a_, b_;
};

}  // namespace

//---------------------------------------------------------------------------//

ScalarField::ScalarField() : ScalarField(constant(0.0)) {}

ScalarField::ScalarField(std::shared_ptr<Node const> node)
    : node_(std::move(node))
{
}

ScalarField ScalarField::constant(double c)
{
    return ScalarField(std::make_shared<ConstantNode>(c));
}

ScalarField ScalarField::expression(Expression fn)
{
    return ScalarField(std::make_shared<ExpressionNode>(std::move(fn)));
}

ScalarField operator+(ScalarField const& a, ScalarField const& b)
{
    return ScalarField(std::make_shared<SumNode>(a, b));
}

ScalarField operator*(ScalarField const& a, ScalarField const& b)
{
    return ScalarField(std::make_shared<ProductNode>(a, b));
}

ScalarField operator*(double s, ScalarField const& a)
{
    return ScalarField::constant(s) * a;
}

//---------------------------------------------------------------------------//

BundleFunction::BundleFunction() : BundleFunction(constant(0.0)) {}

BundleFunction::BundleFunction(std::shared_ptr<Node const> node)
    : node_(std::move(node))
{
}

BundleFunction BundleFunction::constant(double c)
{
    return BundleFunction(std::make_shared<BundleConstantNode>(c));
}

BundleFunction BundleFunction::expression(Expression fn)
{
    return BundleFunction(
        std::make_shared<BundleExpressionNode>(std::move(fn)));
}

BundleFunction BundleFunction::lift(ScalarField const& w)
{
    return BundleFunction(std::make_shared<LiftNode>(w));
}

BundleFunction operator+(BundleFunction const& a, BundleFunction const& b)
{
    return BundleFunction(std::make_shared<BundleSumNode>(a, b));
}

BundleFunction operator*(BundleFunction const& a, BundleFunction const& b)
{
    return BundleFunction(std::make_shared<BundleProductNode>(a, b));
}

BundleFunction operator*(double s, BundleFunction const& a)
{
    return BundleFunction::constant(s) * a;
}

}  // namespace isokin
