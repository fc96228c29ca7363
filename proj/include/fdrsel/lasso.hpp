#pragma once

#include "fdrsel/dataset.hpp"

#include <vector>

namespace fdrsel {

struct LassoOptions
{
    int max_sweeps = 100000;
    double tolerance = 1e-7;   ///< max weighted coordinate change relative to the null deviance
    bool intercept = true;
    bool early_stop = true;    ///< stop the path once the deviance ratio reaches 0.999
};

/**
 * LASSO fits along a decreasing grid for
 *   gaussian: 1/2 |y - b0 - X beta|^2 + lambda |beta|_1
 *   binomial: negative log-likelihood + lambda |beta|_1
 * Column j of `coefficients` belongs to lambdas[j]. When the path stops
 * early only the first `computed` grid points are filled.
 */
struct LassoPath
{
    std::vector<double> lambdas;
    Matrix coefficients;
    Vector intercepts;
    std::vector<double> deviance_ratio;
    Index computed = 0;
};

/// Smallest lambda giving the empty model.
double lasso_lambda_max(const Dataset& d, bool intercept = true);

/// `count` log-spaced points from lambda_max down to ratio * lambda_max.
std::vector<double> lasso_grid(const Dataset& d, int count = 100, double ratio = 1e-3, bool intercept = true);

LassoPath lasso_path(const Dataset& d, std::vector<double> lambdas, const LassoOptions& options = {});

struct LassoFit
{
    Vector coefficients;
    double intercept = 0.0;
    double lambda = 0.0;
};

LassoFit fit_lasso(const Dataset& d, double lambda, const LassoOptions& options = {});

} // namespace fdrsel
