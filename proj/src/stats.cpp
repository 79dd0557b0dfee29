#include "lorentz/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numbers>
#include <numeric>

#include "lorentz/errors.hpp"

namespace lorentz
{
void RunningStats::add(double x)
{
    ++n_;
    double const delta = x - mean_;
    mean_ += delta / n_;
    m2_ += delta * (x - mean_);
}

void RunningStats::merge(RunningStats const& other)
{
    if (other.n_ == 0)
        return;
    if (n_ == 0)
    {
        *this = other;
        return;
    }
    double const n = static_cast<double>(n_ + other.n_);
    double const delta = other.mean_ - mean_;
    mean_ += delta * other.n_ / n;
    m2_ += other.m2_ + delta * delta * (static_cast<double>(n_) * other.n_ / n);
    n_ += other.n_;
}

double RunningStats::variance() const
{
    return n_ > 1 ? m2_ / (n_ - 1) : 0.0;
}

double RunningStats::std_error() const
{
    return n_ > 0 ? std::sqrt(variance() / n_) : 0.0;
}

//---------------------------------------------------------------------------//
Histogram::Histogram(double lo_, double hi_, std::size_t bins)
    : lo(lo_), hi(hi_), counts(bins, 0)
{
    if (!(hi > lo) || bins == 0)
        throw DomainError("histogram needs hi > lo and at least one bin");
}

std::uint64_t Histogram::total() const
{
    return std::accumulate(counts.begin(), counts.end(), underflow + overflow);
}

void Histogram::add(double x)
{
    if (x < lo)
    {
        ++underflow;
        return;
    }
    auto const i = static_cast<std::size_t>((x - lo) / width());
    if (x >= hi || i >= counts.size())
        ++overflow;
    else
        ++counts[i];
}

void Histogram::merge(Histogram const& other)
{
    for (std::size_t i = 0; i < counts.size(); ++i)
        counts[i] += other.counts[i];
    underflow += other.underflow;
    overflow += other.overflow;
}

std::vector<double> Histogram::probabilities() const
{
    double const n = static_cast<double>(std::max<std::uint64_t>(total(), 1));
    std::vector<double> p(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        p[i] = counts[i] / n;
    return p;
}

std::vector<double> Histogram::probability_ci() const
{
    double const n = static_cast<double>(std::max<std::uint64_t>(total(), 1));
    auto p = probabilities();
    for (double& q : p)
        q = 1.959963984540054 * std::sqrt(q * (1 - q) / n);
    return p;
}

std::size_t angle_bin(double angle, std::size_t bins)
{
    constexpr double two_pi = 2 * std::numbers::pi;
    double a = std::fmod(angle, two_pi);
    if (a < 0)
        a += two_pi;
    auto const i = static_cast<std::size_t>(a / two_pi * bins);
    return std::min(i, bins - 1);
}

double total_variation(std::vector<std::uint64_t> const& a,
                       std::vector<std::uint64_t> const& b)
{
    if (a.size() != b.size())
        throw DomainError("histograms differ in bin count");
    double const na = std::accumulate(a.begin(), a.end(), 0.0);
    double const nb = std::accumulate(b.begin(), b.end(), 0.0);
    if (na == 0 || nb == 0)
        throw DomainError("total variation of an empty histogram");
    double sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += std::fabs(a[i] / na - b[i] / nb);
    return std::min(1.0, 0.5 * sum);
}

double total_variation_ci95(std::vector<std::uint64_t> const& a,
                            std::vector<std::uint64_t> const& b)
{
    if (a.size() != b.size())
        throw DomainError("histograms differ in bin count");
    double const na = std::accumulate(a.begin(), a.end(), 0.0);
    double const nb = std::accumulate(b.begin(), b.end(), 0.0);
    if (na == 0 || nb == 0)
        throw DomainError("total variation of an empty histogram");
    // TV = (1/2) sum s_i (p_i - q_i) with s_i the sign of the difference
    double sp = 0, sq = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        double const p = a[i] / na, q = b[i] / nb;
        double const s = p > q ? 1.0 : (p < q ? -1.0 : 0.0);
        sp += s * p;
        sq += s * q;
    }
    double const var = 0.25 * ((1 - sp * sp) / na + (1 - sq * sq) / nb);
    return 1.959963984540054 * std::sqrt(std::max(0.0, var));
}

ChiSquareResult chi_square(std::vector<std::uint64_t> const& counts,
                           std::vector<double> const& expected)
{
    if (counts.size() != expected.size() || counts.size() < 2)
        throw DomainError("chi-square needs matching vectors of >= 2 bins");
    double const n = std::accumulate(counts.begin(), counts.end(), 0.0);
    ChiSquareResult result;
    for (std::size_t i = 0; i < counts.size(); ++i)
    {
        double const e = n * expected[i];
        if (!(e > 0))
            throw DomainError("chi-square expected count must be positive");
        double const d = counts[i] - e;
        result.statistic += d * d / e;
    }
    result.dof = static_cast<double>(counts.size() - 1);
    boost::math::chi_squared dist(result.dof);
    result.p_value = boost::math::cdf(complement(dist, result.statistic));
    return result;
}

ChiSquareResult chi_square_uniform(std::vector<std::uint64_t> const& counts)
{
    return chi_square(counts,
                      std::vector<double>(counts.size(), 1.0 / counts.size()));
}

double ks_p_value(double statistic, std::size_t n)
{
    double const sn = std::sqrt(static_cast<double>(n));
    double const lambda = (sn + 0.12 + 0.11 / sn) * statistic;
    if (lambda < 0.2)
        return 1.0;
    double sum = 0;
    double sign = 1;
    for (int k = 1; k <= 100; ++k)
    {
        double const term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-16)
            break;
        sign = -sign;
    }
    return std::clamp(2 * sum, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> samples,
                 std::function<double(double)> const& cdf)
{
    if (samples.empty())
        throw DomainError("KS test of an empty sample");
    std::sort(samples.begin(), samples.end());
    double const n = static_cast<double>(samples.size());
    KsResult result;
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        double const f = cdf(samples[i]);
        result.statistic
            = std::max({result.statistic, (i + 1) / n - f, f - i / n});
    }
    result.p_value = ks_p_value(result.statistic, samples.size());
    return result;
}

double t_quantile95(double dof)
{
    boost::math::students_t dist(dof);
    return boost::math::quantile(complement(dist, 0.025));
}

LinearFit linear_fit(std::vector<double> const& x,
                     std::vector<double> const& y,
                     std::vector<double> const& weights)
{
    std::size_t const n = x.size();
    if (y.size() != n || n < 3 || (!weights.empty() && weights.size() != n))
        throw DomainError("linear fit needs >= 3 matching points");
    auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };

    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        sw += w(i);
        sx += w(i) * x[i];
        sy += w(i) * y[i];
    }
    double const xm = sx / sw, ym = sy / sw;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        double const dx = x[i] - xm, dy = y[i] - ym;
        sxx += w(i) * dx * dx;
        sxy += w(i) * dx * dy;
        syy += w(i) * dy * dy;
    }
    if (!(sxx > 0))
        throw DomainError("linear fit needs distinct abscissae");

    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ym - fit.slope * xm;
    double sse = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        double const r = y[i] - fit(x[i]);
        sse += w(i) * r * r;
    }
    fit.r2 = syy > 0 ? 1 - sse / syy : 1.0;
    double const dof = static_cast<double>(n - 2);
    // Known variances: use them directly; otherwise estimate from residuals
    double const sigma2 = weights.empty() ? sse / dof : 1.0;
    fit.slope_se = std::sqrt(sigma2 / sxx);
    fit.intercept_se = std::sqrt(sigma2 * (1 / sw + xm * xm / sxx));
    double const q = weights.empty() ? t_quantile95(dof) : 1.959963984540054;
    fit.slope_ci95 = q * fit.slope_se;
    fit.intercept_ci95 = q * fit.intercept_se;
    return fit;
}

double trapezoid(std::vector<double> const& x, std::vector<double> const& y)
{
    if (x.size() != y.size())
        throw DomainError("trapezoid needs matching vectors");
    double sum = 0;
    for (std::size_t i = 1; i < x.size(); ++i)
        sum += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return sum;
}

}  // namespace lorentz
