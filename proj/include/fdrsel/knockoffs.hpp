#pragma once

#include "fdrsel/cv.hpp"
#include "fdrsel/dataset.hpp"
#include "fdrsel/rng.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace fdrsel {

/// min(lambda_min(Sigma), min_j Sigma_jj) for every coordinate; for a correlation matrix this is min(lambda_min, 1).
Vector equicorrelated_s(const Matrix& sigma);

/**
 * Gaussian model-X knockoffs for rows of X drawn from N(0, Sigma):
 *   X~ = X (I - Sigma^-1 D) + Z C',  C C' = 2D - D Sigma^-1 D,  D = diag(s),
 * with Z standard normal. Throws Error(not_positive_definite) if Sigma is
 * not positive definite or 2 Sigma - D is not positive semidefinite.
 */
Matrix make_knockoffs(const Matrix& X, const Matrix& sigma, const Vector& s, RngStream& rng);

/// W_j = |b_j| - |b_{j+p}| from cross-validated LASSO on [X, X~].
Vector knockoff_stats(const Dataset& d, const Matrix& knockoffs, const CvSpec& cv = {});

struct KnockoffThreshold
{
    double threshold = std::numeric_limits<double>::infinity();
    std::vector<Index> selected;
};

/// Smallest t in {|W_j| : W_j != 0} with (1 + #{W <= -t}) / #{W >= t} <= q; no selection if none qualifies.
KnockoffThreshold knockoff_threshold(const Vector& W, double q);

struct KnockoffResult
{
    Matrix knockoffs;
    Vector W;
    double threshold = std::numeric_limits<double>::infinity();
    std::vector<Index> selected;
    double q = 0.2;
};

/// Generates knockoffs with s (default equicorrelated_s), computes W and applies the threshold.
KnockoffResult knockoff_filter(const Dataset& d, const Matrix& sigma, double q, RngStream& rng,
                               const CvSpec& cv = {}, std::optional<Vector> s = std::nullopt);

} // namespace fdrsel
