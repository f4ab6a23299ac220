// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#ifndef JBB_STATS_HPP
#define JBB_STATS_HPP

#include <cmath>
#include <cstddef>

namespace jbb
{

// Neumaier-compensated running sum.
class CompensatedSum
{
public:
    void add(double x)
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            c_ += (sum_ - t) + x;
        else
            c_ += (x - t) + sum_;
        sum_ = t;
    }

    void merge(const CompensatedSum &other)
    {
        add(other.sum_);
        add(other.c_);
    }

    double value() const { return sum_ + c_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

struct MeanEstimate
{
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
};

// Sample mean and variance from compensated first and second moments.
class MeanAccumulator
{
public:
    void add(double x)
    {
        ++n_;
        sum_.add(x);
        sum_sq_.add(x * x);
    }

    void merge(const MeanAccumulator &other)
    {
        n_ += other.n_;
        sum_.merge(other.sum_);
        sum_sq_.merge(other.sum_sq_);
    }

    std::size_t count() const { return n_; }
    double mean() const { return n_ ? sum_.value() / static_cast<double>(n_) : 0.0; }
    double second_moment() const { return n_ ? sum_sq_.value() / static_cast<double>(n_) : 0.0; }

    double variance() const
    {
        if (n_ < 2)
            return 0.0;
        const double n = static_cast<double>(n_);
        const double m = mean();
        const double v = (sum_sq_.value() - n * m * m) / (n - 1.0);
        return v > 0.0 ? v : 0.0;
    }

    double std_error() const { return n_ ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

    MeanEstimate estimate() const { return {mean(), std_error(), n_}; }

private:
    std::size_t n_ = 0;
    CompensatedSum sum_;
    CompensatedSum sum_sq_;
};

// Ordinary least squares of y on x with an intercept.
class RegressionAccumulator
{
public:
    void add(double x, double y)
    {
        ++n_;
        sx_.add(x);
        sy_.add(y);
        sxx_.add(x * x);
        sxy_.add(x * y);
        syy_.add(y * y);
    }

    void merge(const RegressionAccumulator &o)
    {
        n_ += o.n_;
        sx_.merge(o.sx_);
        sy_.merge(o.sy_);
        sxx_.merge(o.sxx_);
        sxy_.merge(o.sxy_);
        syy_.merge(o.syy_);
    }

    std::size_t count() const { return n_; }

    double slope() const
    {
        const double cxx = centered_xx();
        return cxx > 0.0 ? centered_xy() / cxx : 0.0;
    }

    double slope_std_error() const
    {
        if (n_ < 3)
            return 0.0;
        const double cxx = centered_xx();
        if (!(cxx > 0.0))
            return 0.0;
        const double b = slope();
        double rss = centered_yy() - b * centered_xy();
        if (rss < 0.0)
            rss = 0.0;
        return std::sqrt(rss / (static_cast<double>(n_) - 2.0) / cxx);
    }

private:
    double centered_xx() const { return sxx_.value() - sx_.value() * sx_.value() / static_cast<double>(n_); }
    double centered_xy() const { return sxy_.value() - sx_.value() * sy_.value() / static_cast<double>(n_); }
    double centered_yy() const { return syy_.value() - sy_.value() * sy_.value() / static_cast<double>(n_); }

    std::size_t n_ = 0;
    CompensatedSum sx_, sy_, sxx_, sxy_, syy_;
};

} // namespace jbb

#endif
