#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace lorentz
{
//! Streaming mean and variance (Welford), mergeable.
class RunningStats
{
  public:
    void add(double x);
    void merge(RunningStats const& other);

    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const;
    double std_error() const;
    //! Half width of the normal-approximation 95% interval
    double ci95() const { return 1.959963984540054 * std_error(); }

  private:
    std::uint64_t n_ = 0;
    double mean_ = 0;
    double m2_ = 0;
};

//! Equal-width histogram on [lo, hi); out-of-range samples are tallied.
struct Histogram
{
    double lo = 0;
    double hi = 1;
    std::vector<std::uint64_t> counts;
    std::uint64_t underflow = 0;
    std::uint64_t overflow = 0;

    Histogram() = default;
    Histogram(double lo, double hi, std::size_t bins);

    std::size_t bins() const { return counts.size(); }
    double width() const { return (hi - lo) / counts.size(); }
    double center(std::size_t i) const { return lo + (i + 0.5) * width(); }
    std::uint64_t total() const;
    void add(double x);
    void merge(Histogram const& other);
    //! Fraction of all samples (including out of range) per bin
    std::vector<double> probabilities() const;
    //! 95% half width of each bin probability (normal approximation)
    std::vector<double> probability_ci() const;
};

//! Bin index of an angle on [0, 2 pi) split into `bins` equal sectors.
std::size_t angle_bin(double angle, std::size_t bins);

//! Half the L1 distance between two count vectors after normalization.
double total_variation(std::vector<std::uint64_t> const& a,
                       std::vector<std::uint64_t> const& b);

//! Delta-method 95% half width of total_variation(a, b).
double total_variation_ci95(std::vector<std::uint64_t> const& a,
                            std::vector<std::uint64_t> const& b);

struct ChiSquareResult
{
    double statistic = 0;
    double dof = 0;
    double p_value = 1;
};

//! Pearson test of counts against expected probabilities (summing to 1).
ChiSquareResult chi_square(std::vector<std::uint64_t> const& counts,
                           std::vector<double> const& expected);
ChiSquareResult chi_square_uniform(std::vector<std::uint64_t> const& counts);

struct KsResult
{
    double statistic = 0;
    double p_value = 1;
};

//! One-sample Kolmogorov-Smirnov test; `samples` need not be sorted.
KsResult ks_test(std::vector<double> samples,
                 std::function<double(double)> const& cdf);

//! Asymptotic Kolmogorov survival function with the Stephens correction.
double ks_p_value(double statistic, std::size_t n);

struct LinearFit
{
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
    double slope_se = 0;
    double intercept_se = 0;
    //! 95% half widths from the Student t quantile
    double slope_ci95 = 0;
    double intercept_ci95 = 0;

    double operator()(double x) const { return intercept + slope * x; }
};

//! Ordinary least squares; weights, when given, are inverse variances.
LinearFit linear_fit(std::vector<double> const& x,
                     std::vector<double> const& y,
                     std::vector<double> const& weights = {});

double trapezoid(std::vector<double> const& x, std::vector<double> const& y);

//! Two-sided Student t quantile at 95% for the given degrees of freedom.
double t_quantile95(double dof);

}  // namespace lorentz
