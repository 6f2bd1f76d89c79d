#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace isokin {

namespace detail {

constexpr int binomial(int n, int k)
{
    int r = 1;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

constexpr double factorial(int n)
{
    double r = 1.0;
    for (int i = 2; i <= n; ++i)
        r *= i;
    return r;
}

// Multi-indices of total degree <= K in N variables, graded order.
template <int N, int K>
struct JetLayout
{
    static constexpr int size = binomial(N + K, K);
    using Index = std::array<int, N>;

    static constexpr std::array<Index, size> make_indices()
    {
        std::array<Index, size> out{};
        int pos = 0;
        for (int deg = 0; deg <= K; ++deg)
        {
            // enumerate compositions of deg into N parts, lexicographically
            Index a{};
            a[0] = deg;
            while (true)
            {
                out[pos++] = a;
                // next composition
                int j = N - 2;
                while (j >= 0 && a[j] == 0)
                    --j;
                if (j < 0)
                    break;
                a[j] -= 1;
                int tail = 0;
                for (int t = j + 1; t < N; ++t)
                    tail += a[t];
                for (int t = j + 1; t < N; ++t)
                    a[t] = 0;
                a[j + 1] = tail + 1;
            }
        }
        return out;
    }

    static constexpr std::array<Index, size> indices = make_indices();

    static constexpr int degree(int i)
    {
        int d = 0;
        for (int v : indices[i])
            d += v;
        return d;
    }

    static constexpr int find(Index const& a)
    {
        for (int i = 0; i < size; ++i)
        {
            bool same = true;
            for (int v = 0; v < N; ++v)
                same = same && indices[i][v] == a[v];
            if (same)
                return i;
        }
        return -1;
    }

    struct Term
    {
        int lhs, rhs, out;
    };
    static constexpr int count_terms()
    {
        int n = 0;
        for (int i = 0; i < size; ++i)
            for (int j = 0; j < size; ++j)
                if (degree(i) + degree(j) <= K)
                    ++n;
        return n;
    }
    static constexpr int num_terms = count_terms();

    static constexpr std::array<Term, num_terms> make_terms()
    {
        std::array<Term, num_terms> out{};
        int n = 0;
        for (int i = 0; i < size; ++i)
            for (int j = 0; j < size; ++j)
                if (degree(i) + degree(j) <= K)
                {
                    Index s{};
                    for (int v = 0; v < N; ++v)
                        s[v] = indices[i][v] + indices[j][v];
                    out[n++] = Term{i, j, find(s)};
                }
        return out;
    }
    static constexpr std::array<Term, num_terms> terms = make_terms();

    // Conversion factor alpha! between Taylor coefficient and partial.
    static constexpr std::array<double, size> make_factorials()
    {
        std::array<double, size> out{};
        for (int i = 0; i < size; ++i)
        {
            double f = 1.0;
            for (int v : indices[i])
                f *= factorial(v);
            out[i] = f;
        }
        return out;
    }
    static constexpr std::array<double, size> factorials = make_factorials();
};

}  // namespace detail

//---------------------------------------------------------------------------//
/*!
 * Truncated multivariate Taylor polynomial.
 *
 * Carries a value together with every partial derivative up to total order
 * K in N variables. Arithmetic and composition with univariate functions
 * propagate the partials by the chain rule, so closed-form fields can be
 * written once and evaluated with all their derivatives.
 */
template <int N, int K>
class Jet
{
    using Layout = detail::JetLayout<N, K>;

  public:
    static constexpr int size = Layout::size;
    static constexpr int num_vars = N;
    static constexpr int order = K;

    constexpr Jet() = default;
    constexpr Jet(double c) { c_[0] = c; }  // NOLINT: implicit constant

    static Jet variable(int var, double at)
    {
        Jet j(at);
        if constexpr (K >= 1)
            j.c_[1 + var] = 1.0;
        return j;
    }

    double value() const { return c_[0]; }
    double d(int i) const
    {
        static_assert(K >= 1);
        return c_[1 + i];
    }
    double d(int i, int j) const
    {
        static_assert(K >= 2);
        typename Layout::Index a{};
        a[i] += 1;
        a[j] += 1;
        int k = Layout::find(a);
        return c_[k] * Layout::factorials[k];
    }
    double d(int i, int j, int l) const
    {
        static_assert(K >= 3);
        typename Layout::Index a{};
        a[i] += 1;
        a[j] += 1;
        a[l] += 1;
        int k = Layout::find(a);
        return c_[k] * Layout::factorials[k];
    }

    //! Raw Taylor coefficient for the k-th multi-index
    double coeff(int k) const { return c_[k]; }
    double& coeff(int k) { return c_[k]; }

    Jet& operator+=(Jet const& o)
    {
        for (int i = 0; i < size; ++i)
            c_[i] += o.c_[i];
        return *this;
    }
    Jet& operator-=(Jet const& o)
    {
        for (int i = 0; i < size; ++i)
            c_[i] -= o.c_[i];
        return *this;
    }
    Jet& operator*=(double s)
    {
        for (auto& c : c_)
            c *= s;
        return *this;
    }
    Jet& operator+=(double s)
    {
        c_[0] += s;
        return *this;
    }

    friend Jet operator+(Jet a, Jet const& b) { return a += b; }
    friend Jet operator-(Jet a, Jet const& b) { return a -= b; }
    friend Jet operator+(Jet a, double s) { return a += s; }
    friend Jet operator+(double s, Jet a) { return a += s; }
    friend Jet operator-(Jet a, double s) { return a += -s; }
    friend Jet operator-(double s, Jet const& a) { return (-a) + s; }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator*(double s, Jet a) { return a *= s; }
    friend Jet operator/(Jet a, double s) { return a *= 1.0 / s; }
    Jet operator-() const
    {
        Jet r = *this;
        r *= -1.0;
        return r;
    }

    friend Jet operator*(Jet const& a, Jet const& b)
    {
        Jet r;
        for (auto const& t : Layout::terms)
            r.c_[t.out] += a.c_[t.lhs] * b.c_[t.rhs];
        return r;
    }
    Jet& operator*=(Jet const& o) { return *this = *this * o; }

    //! f(g) given f and its derivatives up to order K at g.value()
    static Jet compose(Jet const& g, std::array<double, K + 1> const& derivs)
    {
        Jet h = g;
        h.c_[0] = 0.0;
        Jet result(derivs[K] / detail::factorial(K));
        // Horner in the nilpotent part
        for (int k = K - 1; k >= 0; --k)
            result = result * h + derivs[k] / detail::factorial(k);
        return result;
    }

    //! Same point, lower order
    template <int K2>
    Jet<N, K2> truncate() const
    {
        static_assert(K2 <= K);
        using L2 = detail::JetLayout<N, K2>;
        Jet<N, K2> r;
        for (int i = 0; i < L2::size; ++i)
            r.coeff(i) = c_[Layout::find(L2::indices[i])];
        return r;
    }

    //! Partial derivative in one variable, one order lower
    Jet<N, K - 1> partial(int var) const
    {
        static_assert(K >= 1);
        using L2 = detail::JetLayout<N, K - 1>;
        Jet<N, K - 1> r;
        for (int i = 0; i < L2::size; ++i)
        {
            typename Layout::Index a = L2::indices[i];
            a[var] += 1;
            r.coeff(i) = c_[Layout::find(a)] * a[var];
        }
        return r;
    }

    //! Embed into a jet over M >= N variables (new variables are inert)
    template <int M>
    Jet<M, K> extend() const
    {
        static_assert(M >= N);
        using L2 = detail::JetLayout<M, K>;
        Jet<M, K> r;
        for (int i = 0; i < size; ++i)
        {
            typename L2::Index a{};
            for (int v = 0; v < N; ++v)
                a[v] = Layout::indices[i][v];
            r.coeff(L2::find(a)) = c_[i];
        }
        return r;
    }

  private:
    std::array<double, size> c_{};
};

//---------------------------------------------------------------------------//
// Univariate compositions

template <int N, int K>
Jet<N, K> exp(Jet<N, K> const& g)
{
    std::array<double, K + 1> d;
    d.fill(std::exp(g.value()));
    return Jet<N, K>::compose(g, d);
}

template <int N, int K>
Jet<N, K> log(Jet<N, K> const& g)
{
    double x = g.value();
    std::array<double, K + 1> d;
    d[0] = std::log(x);
    double p = 1.0 / x;
    for (int k = 1; k <= K; ++k)
    {
        d[k] = p;
        p *= -k / x;
    }
    return Jet<N, K>::compose(g, d);
}

template <int N, int K>
Jet<N, K> sin(Jet<N, K> const& g)
{
    double s = std::sin(g.value()), c = std::cos(g.value());
    std::array<double, K + 1> d;
    double const cycle[4] = {s, c, -s, -c};
    for (int k = 0; k <= K; ++k)
        d[k] = cycle[k % 4];
    return Jet<N, K>::compose(g, d);
}

template <int N, int K>
Jet<N, K> cos(Jet<N, K> const& g)
{
    double s = std::sin(g.value()), c = std::cos(g.value());
    std::array<double, K + 1> d;
    double const cycle[4] = {c, -s, -c, s};
    for (int k = 0; k <= K; ++k)
        d[k] = cycle[k % 4];
    return Jet<N, K>::compose(g, d);
}

template <int N, int K>
Jet<N, K> reciprocal(Jet<N, K> const& g)
{
    double x = g.value();
    std::array<double, K + 1> d;
    double p = 1.0 / x;
    for (int k = 0; k <= K; ++k)
    {
        d[k] = p;
        p *= -(k + 1) / x;
    }
    return Jet<N, K>::compose(g, d);
}

template <int N, int K>
Jet<N, K> operator/(Jet<N, K> const& a, Jet<N, K> const& b)
{
    return a * reciprocal(b);
}

template <int N, int K>
Jet<N, K> operator/(double a, Jet<N, K> const& b)
{
    return a * reciprocal(b);
}

template <int N, int K>
Jet<N, K> sqrt(Jet<N, K> const& g)
{
    double x = g.value();
    std::array<double, K + 1> d;
    double p = std::sqrt(x);
    double e = 0.5;
    for (int k = 0; k <= K; ++k)
    {
        d[k] = p;
        p *= e / x;
        e -= 1.0;
    }
    return Jet<N, K>::compose(g, d);
}

//! Polar angle of (u, v) as a jet; the constant term is atan2(v, u).
template <int N, int K>
Jet<N, K> atan2(Jet<N, K> const& v, Jet<N, K> const& u)
{
    double u0 = u.value(), v0 = v.value();
    double theta0 = std::atan2(v0, u0);
    // Rotate by -theta0 so the remaining angle is centered at zero.
    Jet<N, K> ratio = (u0 * v - v0 * u) / (u0 * u + v0 * v);
    // atan derivatives at 0: 0, 1, 0, -2, 0, 24
    std::array<double, K + 1> d{};
    double const at0[6] = {0.0, 1.0, 0.0, -2.0, 0.0, 24.0};
    static_assert(K <= 5);
    for (int k = 0; k <= K; ++k)
        d[k] = at0[k];
    return Jet<N, K>::compose(ratio, d) + theta0;
}

}  // namespace isokin
