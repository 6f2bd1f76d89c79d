#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace isokin {

//! Streaming mean and second central moment with associative merge
class RunningStats
{
  public:
    void add(double x)
    {
        ++n_;
        double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }

    void merge(RunningStats const& o)
    {
        if (o.n_ == 0)
            return;
        if (n_ == 0)
        {
            *this = o;
            return;
        }
        double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
        double delta = o.mean_ - mean_;
        double n = na + nb;
        mean_ += delta * nb / n;
        m2_ += o.m2_ + delta * delta * na * nb / n;
        n_ += o.n_;
    }

    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const
    {
        return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    }
    double stddev() const { return std::sqrt(variance()); }
    //! Standard error of the mean
    double standard_error() const
    {
        return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }

  private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

//! Pairwise (tree) merge of per-chunk accumulators in index order
inline RunningStats merge_all(std::span<RunningStats const> parts)
{
    if (parts.empty())
        return {};
    if (parts.size() == 1)
        return parts[0];
    auto half = parts.size() / 2;
    RunningStats left = merge_all(parts.first(half));
    left.merge(merge_all(parts.subspan(half)));
    return left;
}

}  // namespace isokin
