#pragma once

#include "fdrsel/dataset.hpp"
#include "fdrsel/sorted_l1.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace fdrsel {

struct SlopeOptions
{
    int max_iter = 20000;
    double tol_objective = 1e-7;  ///< relative change of the objective between iterations
    double tol_kkt = 1e-6;
    bool monotone = true;
    bool intercept = true;
    enum class Gram { automatic, always, never } gram = Gram::automatic;
};

/// Groups of coefficients sharing one nonzero magnitude (up to 1e-8).
using Clusters = std::vector<std::vector<Index>>;

Clusters equal_magnitude_clusters(const Vector& beta, double tolerance = 1e-8);

struct SlopeFit
{
    Vector coefficients;
    double intercept = 0.0;
    double objective = 0.0;  ///< loss + J_lambda(coefficients), recomputed from the data
    double kkt = 0.0;        ///< optimality residual at exit, see kkt_residual()
    int iterations = 0;
    bool converged = false;
    Clusters clusters;

    Index nonzero() const;
};

/**
 * Optimality residual of (beta, intercept) for loss + J_lambda:
 * max of the relative dual-norm excess of the loss gradient, the relative
 * complementarity gap |J(beta) + g'beta| / max(1, J(beta)) and the
 * intercept gradient. Zero exactly at the optimum.
 */
double kkt_residual(const Dataset& d, const LambdaSequence& lambda, const Vector& beta, double intercept,
                    bool with_intercept = true);

/**
 * Accelerated proximal gradient for
 *   gaussian: 1/2 |y - b0 - X beta|^2 + J_lambda(beta)
 *   binomial: sum log(1 + e^eta) - y eta + J_lambda(beta),  eta = b0 + X beta
 * with the intercept b0 unpenalized. Precomputes per-dataset state so
 * repeated fits (paths, grids) share it.
 */
class SlopeSolver
{
public:
    SlopeSolver(const Dataset& d, SlopeOptions options = {});
    ~SlopeSolver();
    SlopeSolver(SlopeSolver&&) noexcept;
    SlopeSolver& operator=(SlopeSolver&&) noexcept;

    SlopeFit fit(const LambdaSequence& lambda, const SlopeFit* warm_start = nullptr) const;

    /// Fits at lambda * scale for each scale in decreasing order, each warm-started from the previous.
    std::vector<SlopeFit> path(const LambdaSequence& lambda, std::vector<double> scales) const;

    /// Smallest scale of `lambda` at which the fit is identically zero.
    double zero_scale(const LambdaSequence& lambda) const;

    const Dataset& data() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

SlopeFit fit_slope(const Dataset& d, const LambdaSequence& lambda, const SlopeOptions& options = {});

struct PathPoint
{
    double scale;
    SlopeFit fit;
    Index clusters() const { return static_cast<Index>(fit.clusters.size()); }
};

/// SLOPE path over the given scale grid of a base sequence, warm-started from large to small scales.
std::vector<PathPoint> slope_path(const Dataset& d, const LambdaSequence& base, std::vector<double> scales,
                                  const SlopeOptions& options = {});

struct MeanShiftFit
{
    Vector coefficients;  ///< regression part
    Vector shifts;        ///< per-observation shift; nonzero entries flag outliers
    double intercept = 0.0;
    double objective = 0.0;  ///< 1/2 |y - b0 - X beta - mu|^2 + rho1 J(beta) + rho2 J(mu)
    double kkt = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// sigma * sqrt(log(2n / i)), i = 1..n
LambdaSequence mean_shift_lambda(Index n, double sigma = 1.0);

/**
 * Regression with a sparse per-observation shift:
 *   min 1/2 |y - b0 - X beta - mu|^2 + rho1 J_{lambda_beta}(beta) + rho2 J_{lambda_mu}(mu),
 * which is half of |y - X beta - mu|^2 + 2 rho1 J + 2 rho2 J. Gaussian only.
 */
MeanShiftFit fit_mean_shift(const Dataset& d, const LambdaSequence& lambda_beta, const LambdaSequence& lambda_mu,
                            double rho1, double rho2, const SlopeOptions& options = {});

} // namespace fdrsel
