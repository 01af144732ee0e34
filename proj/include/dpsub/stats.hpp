#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "dpsub/errors.hpp"

namespace dpsub {

struct SampleSummary {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double std_error = std::numeric_limits<double>::quiet_NaN();
    std::size_t count = 0;
};

/// Mean and standard error (sample sd / sqrt(count)); NaN entries are skipped.
inline SampleSummary summarize(const std::vector<double>& xs)
{
    SampleSummary s;
    double sum = 0.0;
    for (double x : xs)
        if (!std::isnan(x)) {
            sum += x;
            ++s.count;
        }
    if (s.count == 0) return s;
    s.mean = sum / static_cast<double>(s.count);
    if (s.count < 2) return s;
    double ss = 0.0;
    for (double x : xs)
        if (!std::isnan(x)) ss += (x - s.mean) * (x - s.mean);
    s.std_error = std::sqrt(ss / static_cast<double>(s.count - 1) / static_cast<double>(s.count));
    return s;
}

/// Least-squares line through (log x, log y) with a two-sided interval on the
/// slope from Student's t with count - 2 degrees of freedom.
struct LogLogFit {
    double slope = std::numeric_limits<double>::quiet_NaN();
    double intercept = std::numeric_limits<double>::quiet_NaN();
    double slope_std_error = std::numeric_limits<double>::quiet_NaN();
    double ci_low = std::numeric_limits<double>::quiet_NaN();
    double ci_high = std::numeric_limits<double>::quiet_NaN();
    double confidence = 0.95;
    std::size_t points = 0;
};

/// Points with non-positive or non-finite y are dropped.
inline LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double confidence = 0.95)
{
    detail::require(x.size() == y.size(), "fit needs equally many x and y values");
    detail::require(confidence > 0.0 && confidence < 1.0, "confidence must lie in (0, 1)");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] > 0 && y[i] > 0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    LogLogFit f;
    f.confidence = confidence;
    f.points = lx.size();
    if (f.points < 2) return f;
    const double m = static_cast<double>(f.points);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (f.points < 3) return f;
    double rss = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (f.intercept + f.slope * lx[i]);
        rss += r * r;
    }
    f.slope_std_error = std::sqrt(rss / (m - 2.0) / sxx);
    const boost::math::students_t dist(m - 2.0);
    const double q = boost::math::quantile(boost::math::complement(dist, (1.0 - confidence) / 2.0));
    f.ci_low = f.slope - q * f.slope_std_error;
    f.ci_high = f.slope + q * f.slope_std_error;
    return f;
}

} // namespace dpsub
