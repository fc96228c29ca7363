#pragma once

#include "fdrsel/dataset.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace fdrsel {

/// Support of a candidate model: column indices, unique, in range.
using Support = std::vector<Index>;

enum class CriterionKind { aic, bic, ric, mbic, maic, mbic2, maic2, ebic };

CriterionKind parse_criterion(std::string_view name);
const char* to_string(CriterionKind kind) noexcept;

/**
 * An L0 information criterion with its constants.
 *
 * `p_total` is the number of candidate predictors the multiplicity term is
 * adjusted to. Zero means "the number of columns of the data being searched";
 * a larger value adjusts for a pre-screened subset of a bigger data set.
 */
struct CriterionSpec
{
    CriterionKind kind = CriterionKind::mbic2;
    double E = 4.0;          ///< mBIC / mBIC2: prior expected number of signals
    double constant = 0.5;   ///< mAIC / mAIC2
    double kappa = 0.0;      ///< EBIC
    Index p_total = 0;
    std::optional<double> known_sigma;  ///< gaussian only; unset means profile likelihood

    CriterionSpec() = default;
    explicit CriterionSpec(CriterionKind k, Index p = 0) : kind(k), p_total(p) {}

    /// p used in the penalty for data with `columns` candidate columns.
    Index resolved_p(Index columns) const { return p_total > 0 ? p_total : columns; }

    /// True for the criteria whose penalty is linear in k.
    bool linear_in_k() const;
};

/**
 * Penalty term for a model of size k with n observations. Uses spec.p_total,
 * which must be positive here. Every penalty is 0 at k = 0.
 */
double penalty(const CriterionSpec& spec, Index k, Index n);

/**
 * z-threshold equivalent of a linear penalty under an orthogonal design with
 * known sigma: a column enters iff |Z_j| exceeds sqrt(penalty(1)).
 * Throws for mBIC2, mAIC2 and EBIC.
 */
double orthogonal_z_threshold(const CriterionSpec& spec, Index n);

/**
 * Largest model size a greedy search may reach: floor(n/2), further limited
 * to floor(p/4) for the FDR-type criteria (mBIC2, mAIC2, EBIC).
 */
Index k_cap(CriterionKind kind, Index n, Index p);

/// Least-squares (gaussian) or IRLS logistic (binomial) fit with intercept.
struct SubmodelFit
{
    Vector coefficients;  ///< aligned with the support order
    double intercept = 0.0;
    double rss = 0.0;       ///< gaussian residual sum of squares
    double deviance = 0.0;  ///< binomial deviance (= -2 log L)
    int iterations = 0;
    bool separation = false;
};

/// Throws FitError(rank_deficient) for a singular submatrix and
/// FitError(not_converged) if IRLS fails without separation.
SubmodelFit fit_submodel(const Dataset& d, const Support& support);

/**
 * -2 log-likelihood up to model-independent constants.
 * gaussian, unknown sigma: n log(RSS/n); known sigma: RSS / sigma^2;
 * binomial: deviance.
 */
double neg2_loglik(const Dataset& d, const Support& support, const Vector& coefficients, double intercept,
                   std::optional<double> known_sigma = std::nullopt);

double neg2_loglik(const Dataset& d, const SubmodelFit& fit, std::optional<double> known_sigma = std::nullopt);

/// Gaussian -2 log-likelihood term from a residual sum of squares.
double gaussian_neg2_loglik(double rss, Index n, std::optional<double> known_sigma);

/// neg2_loglik of the fitted submodel plus the penalty.
double criterion_value(const Dataset& d, const CriterionSpec& spec, const Support& support);

struct TailBounds
{
    double lower;
    double upper;
};

/// Bounds 2 phi(c)/c (1 - 1/c^2) <= P(|Z| > c) <= 2 phi(c)/c, for c > 1.
TailBounds normal_tail_bounds(double c);

} // namespace fdrsel
