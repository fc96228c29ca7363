#include "fdrsel/distributions.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>

namespace fdrsel::dist {

namespace {
const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);
}

double normal_pdf(double x)
{
    return boost::math::pdf(kStdNormal, x);
}

double normal_cdf(double x)
{
    return boost::math::cdf(kStdNormal, x);
}

double normal_sf(double x)
{
    return boost::math::cdf(boost::math::complement(kStdNormal, x));
}

double normal_quantile(double prob)
{
    if (prob <= 0.0) return -std::numeric_limits<double>::infinity();
    if (prob >= 1.0) return std::numeric_limits<double>::infinity();
    return boost::math::quantile(kStdNormal, prob);
}

double normal_upper_quantile(double tail)
{
    if (tail <= 0.0) return std::numeric_limits<double>::infinity();
    if (tail >= 1.0) return -std::numeric_limits<double>::infinity();
    return boost::math::quantile(boost::math::complement(kStdNormal, tail));
}

double t_two_sided_p(double t, double df)
{
    if (!std::isfinite(t)) return 0.0;
    const boost::math::students_t_distribution<double> dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

double z_two_sided_p(double z)
{
    if (!std::isfinite(z)) return 0.0;
    return 2.0 * normal_sf(std::fabs(z));
}

} // namespace fdrsel::dist
