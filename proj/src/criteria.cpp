#include "fdrsel/criteria.hpp"

#include "fdrsel/distributions.hpp"
#include "fdrsel/errors.hpp"

#include <algorithm>
#include <cctype>
#include <string>
#include <cmath>
#include <limits>

namespace fdrsel {

CriterionKind parse_criterion(std::string_view name)
{
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "aic") return CriterionKind::aic;
    if (lower == "bic") return CriterionKind::bic;
    if (lower == "ric") return CriterionKind::ric;
    if (lower == "mbic") return CriterionKind::mbic;
    if (lower == "maic") return CriterionKind::maic;
    if (lower == "mbic2") return CriterionKind::mbic2;
    if (lower == "maic2") return CriterionKind::maic2;
    if (lower == "ebic") return CriterionKind::ebic;
    throw Error(ErrorCode::invalid_argument, "unknown criterion '" + std::string(name) + "'");
}

const char* to_string(CriterionKind kind) noexcept
{
    switch (kind) {
    case CriterionKind::aic: return "aic";
    case CriterionKind::bic: return "bic";
    case CriterionKind::ric: return "ric";
    case CriterionKind::mbic: return "mbic";
    case CriterionKind::maic: return "maic";
    case CriterionKind::mbic2: return "mbic2";
    case CriterionKind::maic2: return "maic2";
    case CriterionKind::ebic: return "ebic";
    }
    return "unknown";
}

bool CriterionSpec::linear_in_k() const
{
    return kind != CriterionKind::mbic2 && kind != CriterionKind::maic2 && kind != CriterionKind::ebic;
}

double penalty(const CriterionSpec& spec, Index k, Index n)
{
    if (k < 0) throw Error(ErrorCode::invalid_argument, "model size must be non-negative");
    if (spec.p_total < 1) throw Error(ErrorCode::invalid_argument, "penalty needs p_total >= 1");
    if (k == 0) return 0.0;
    const double kd = static_cast<double>(k);
    const double p = static_cast<double>(spec.p_total);
    const double log_n = std::log(static_cast<double>(n));
    const double log_kfact = std::lgamma(kd + 1.0);

    switch (spec.kind) {
    case CriterionKind::aic: return 2.0 * kd;
    case CriterionKind::bic: return log_n * kd;
    case CriterionKind::ric: return 2.0 * std::log(p) * kd;
    case CriterionKind::mbic: return log_n * kd + 2.0 * std::log(p / spec.E) * kd;
    case CriterionKind::maic: return 2.0 * kd + 2.0 * std::log(p / spec.constant) * kd;
    case CriterionKind::mbic2: return log_n * kd + 2.0 * std::log(p / spec.E) * kd - 2.0 * log_kfact;
    case CriterionKind::maic2: return 2.0 * kd + 2.0 * std::log(p / spec.constant) * kd - 2.0 * log_kfact;
    case CriterionKind::ebic: {
        const double log_choose = std::lgamma(p + 1.0) - log_kfact - std::lgamma(p - kd + 1.0);
        return log_n * kd + 2.0 * (1.0 - spec.kappa) * log_choose;
    }
    }
    return 0.0;
}

double orthogonal_z_threshold(const CriterionSpec& spec, Index n)
{
    if (!spec.linear_in_k())
        throw Error(ErrorCode::invalid_argument,
                    std::string("criterion ") + to_string(spec.kind) + " has no fixed z-threshold");
    return std::sqrt(penalty(spec, 1, n));
}

Index k_cap(CriterionKind kind, Index n, Index p)
{
    const Index by_n = n / 2;
    const bool fdr_type = kind == CriterionKind::mbic2 || kind == CriterionKind::maic2 || kind == CriterionKind::ebic;
    return fdr_type ? std::min(by_n, p / 4) : by_n;
}

namespace {

Matrix submodel_design(const Dataset& d, const Support& support)
{
    Matrix Z(d.n(), static_cast<Index>(support.size()) + 1);
    Z.col(0).setOnes();
    for (std::size_t c = 0; c < support.size(); ++c) {
        if (support[c] < 0 || support[c] >= d.p())
            throw Error(ErrorCode::invalid_argument, "support index " + std::to_string(support[c]) + " out of range");
        Z.col(static_cast<Index>(c) + 1) = d.X().col(support[c]);
    }
    return Z;
}

void check_rank(const Matrix& Z)
{
    Eigen::ColPivHouseholderQR<Matrix> qr(Z);
    qr.setThreshold(1e-10);
    if (qr.rank() < Z.cols())
        throw FitError(ErrorCode::rank_deficient, "submodel design is rank deficient (rank "
                                                      + std::to_string(qr.rank()) + " < "
                                                      + std::to_string(Z.cols()) + ")");
}

double binomial_deviance(const Vector& y, const Vector& eta)
{
    double dev = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
        // log(1 + e^eta) - y eta, computed without overflow
        const double e = eta[i];
        const double softplus = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
        dev += softplus - y[i] * e;
    }
    return 2.0 * dev;
}

SubmodelFit fit_logistic(const Dataset& d, const Matrix& Z)
{
    const Index n = Z.rows();
    const Index m = Z.cols();
    const Vector& y = d.y();
    SubmodelFit fit;

    Vector theta = Vector::Zero(m);
    const double ybar = std::clamp(y.mean(), 1e-6, 1 - 1e-6);
    theta[0] = std::log(ybar / (1 - ybar));
    Vector eta = Z * theta;
    double dev = binomial_deviance(y, eta);

    constexpr int kMaxIter = 100;
    bool converged = false;
    for (int it = 0; it < kMaxIter; ++it) {
        fit.iterations = it + 1;
        Vector mu(n), w(n);
        for (Index i = 0; i < n; ++i) {
            mu[i] = 1.0 / (1.0 + std::exp(-eta[i]));
            w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-12);
        }
        const Matrix H = Z.transpose() * w.asDiagonal() * Z;
        const Vector g = Z.transpose() * (y - mu);
        Eigen::LDLT<Matrix> ldlt(H);
        const Vector step = ldlt.solve(g);

        double t = 1.0;
        Vector cand_theta;
        Vector cand_eta;
        double cand_dev = std::numeric_limits<double>::infinity();
        for (int half = 0; half < 30; ++half) {
            cand_theta = theta + t * step;
            cand_eta = Z * cand_theta;
            cand_dev = binomial_deviance(y, cand_eta);
            if (cand_dev <= dev + 1e-12 * std::fabs(dev)) break;
            t *= 0.5;
        }
        const double change = dev - cand_dev;
        theta = cand_theta;
        eta = cand_eta;
        dev = cand_dev;
        if (dev < 1e-6 * static_cast<double>(n) || eta.cwiseAbs().maxCoeff() > 30.0) {
            fit.separation = true;
            converged = true;
            break;
        }
        if (std::fabs(change) <= 1e-10 * (std::fabs(dev) + 0.1)) {
            converged = true;
            break;
        }
    }
    if (!converged) throw FitError(ErrorCode::not_converged, "IRLS did not converge in 100 iterations");
    fit.intercept = theta[0];
    fit.coefficients = theta.tail(m - 1);
    fit.deviance = dev;
    return fit;
}

} // namespace

SubmodelFit fit_submodel(const Dataset& d, const Support& support)
{
    if (static_cast<Index>(support.size()) > d.n() - 2)
        throw FitError(ErrorCode::rank_deficient, "submodel with " + std::to_string(support.size())
                                                      + " columns needs more than n - 2 observations");
    const Matrix Z = submodel_design(d, support);
    check_rank(Z);
    if (d.family() == Family::binomial) return fit_logistic(d, Z);

    SubmodelFit fit;
    const Vector theta = Z.householderQr().solve(d.y());
    fit.intercept = theta[0];
    fit.coefficients = theta.tail(Z.cols() - 1);
    fit.rss = (d.y() - Z * theta).squaredNorm();
    fit.iterations = 1;
    return fit;
}

double gaussian_neg2_loglik(double rss, Index n, std::optional<double> known_sigma)
{
    if (known_sigma) return rss / (*known_sigma * *known_sigma);
    const double nd = static_cast<double>(n);
    return nd * std::log(std::max(rss, std::numeric_limits<double>::min()) / nd);
}

double neg2_loglik(const Dataset& d, const Support& support, const Vector& coefficients, double intercept,
                   std::optional<double> known_sigma)
{
    if (static_cast<Index>(support.size()) != coefficients.size())
        throw Error(ErrorCode::invalid_argument, "coefficient count does not match support size");
    Vector eta = Vector::Constant(d.n(), intercept);
    for (std::size_t c = 0; c < support.size(); ++c) eta += coefficients[static_cast<Index>(c)] * d.X().col(support[c]);
    if (d.family() == Family::binomial) return binomial_deviance(d.y(), eta);
    return gaussian_neg2_loglik((d.y() - eta).squaredNorm(), d.n(), known_sigma);
}

double neg2_loglik(const Dataset& d, const SubmodelFit& fit, std::optional<double> known_sigma)
{
    if (d.family() == Family::binomial) return fit.deviance;
    return gaussian_neg2_loglik(fit.rss, d.n(), known_sigma);
}

double criterion_value(const Dataset& d, const CriterionSpec& spec, const Support& support)
{
    CriterionSpec resolved = spec;
    resolved.p_total = spec.resolved_p(d.p());
    const SubmodelFit fit = fit_submodel(d, support);
    return neg2_loglik(d, fit, spec.known_sigma) + penalty(resolved, static_cast<Index>(support.size()), d.n());
}

TailBounds normal_tail_bounds(double c)
{
    if (!(c > 1.0)) throw Error(ErrorCode::invalid_argument, "normal tail bounds need c > 1");
    const double upper = 2.0 * dist::normal_pdf(c) / c;
    return {upper * (1.0 - 1.0 / (c * c)), upper};
}

} // namespace fdrsel
