#pragma once

#include "fdrsel/dataset.hpp"
#include "fdrsel/lasso.hpp"
#include "fdrsel/slope.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fdrsel {

enum class CvMethod { lasso, slope };
enum class CvError { automatic, squared, deviance };  ///< automatic: squared for gaussian, deviance for binomial

CvMethod parse_cv_method(std::string_view name);
const char* to_string(CvMethod method) noexcept;

/// SLOPE tuning point: the sequence sigma * bh(c, q).
struct SlopeTuning
{
    double c;
    double q;
};

/// c at 6 log-spaced values in [0.5, 3] times q in {0.05, 0.1, 0.2, ..., 0.6}.
std::vector<SlopeTuning> default_slope_grid();

struct CvSpec
{
    int folds = 10;
    std::vector<double> lambdas;          ///< lasso grid; empty means lasso_grid(d)
    std::vector<SlopeTuning> slope_grid;  ///< empty means default_slope_grid()
    double sigma = 1.0;                   ///< noise scale multiplying the SLOPE sequences
    CvError error = CvError::automatic;
    std::uint64_t seed = 1;
    bool one_se = false;
    int threads = 1;
    LassoOptions lasso;
    SlopeOptions slope;         ///< used for the full-data refit
    double fold_tol_kkt = 1e-4; ///< looser stopping rule for the SLOPE fold fits
    double fold_tol_objective = 1e-6;
};

/// Random partition of the rows into K folds with sizes differing by at most one; stratified by class for binomial data.
std::vector<std::vector<Index>> make_folds(const Dataset& d, int folds, std::uint64_t seed);

struct CvPoint
{
    double lambda = 0.0;  ///< lasso
    double c = 0.0;       ///< slope
    double q = 0.0;       ///< slope
    std::vector<double> fold_errors;
    double mean = 0.0;
    double se = 0.0;
    bool disqualified = false;
    std::string note;
};

struct CvResult
{
    CvMethod method = CvMethod::lasso;
    CvError error = CvError::squared;
    std::vector<CvPoint> points;
    std::size_t best = 0;
    std::vector<std::vector<Index>> folds;
    Vector coefficients;  ///< refit on the full data at the selected point
    double intercept = 0.0;

    const CvPoint& selected() const { return points.at(best); }
    std::vector<Index> support() const;
};

/**
 * K-fold cross-validation over a LASSO lambda grid or a SLOPE (c, q) grid.
 * A point whose fit fails in any fold is disqualified. The selected point
 * minimizes the mean held-out error, or with one_se the most regularized
 * point within one standard error of that minimum.
 */
CvResult cv_select(const Dataset& d, const CvSpec& spec, CvMethod method);

/// Columns: lambda, c, q, mean_error, se, disqualified, selected.
void write_cv_csv(const std::filesystem::path& path, const CvResult& result);

} // namespace fdrsel
