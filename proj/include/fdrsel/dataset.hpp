#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fdrsel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class Family { gaussian, binomial };

Family parse_family(std::string_view name);
const char* to_string(Family family) noexcept;

/**
 * Response vector, column-major design matrix and column labels.
 *
 * Construction validates: n >= 2, p >= 1, all entries finite, names match
 * the column count, and binomial responses are 0/1. Immutable afterwards.
 */
class Dataset
{
public:
    Dataset(Vector y, Matrix X, std::vector<std::string> names, Family family = Family::gaussian);

    /// Same as the full constructor with names "x1".."xp".
    Dataset(Vector y, Matrix X, Family family = Family::gaussian);

    const Vector& y() const { return y_; }
    const Matrix& X() const { return X_; }
    const std::vector<std::string>& names() const { return names_; }
    Family family() const { return family_; }

    Index n() const { return X_.rows(); }
    Index p() const { return X_.cols(); }

    /// Column index by label; throws DataError(missing_column).
    Index column(std::string_view name) const;

    /// Dataset restricted to the given columns, in the given order.
    Dataset select_columns(const std::vector<Index>& columns) const;

    /// Dataset restricted to the given rows.
    Dataset select_rows(const std::vector<Index>& rows) const;

private:
    Vector y_;
    Matrix X_;
    std::vector<std::string> names_;
    Family family_;
};

std::vector<std::string> default_names(Index p);

enum class ScaleMode {
    none,
    center,       ///< subtract column means
    unit_l2,      ///< rescale columns to squared norm n
    unit_l2_one,  ///< rescale columns to norm 1
};

ScaleMode parse_scale_mode(std::string_view name);

/**
 * Per-column transform x' = (x - mean) / scale applied by standardize().
 * For the scaling modes mean is 0 (columns are rescaled, not centered);
 * for center the scale is 1.
 */
struct Standardization
{
    ScaleMode mode = ScaleMode::none;
    Vector means;
    Vector scales;

    /// Apply the stored transform to a matrix with the same columns.
    Matrix apply(const Matrix& X) const;

    /**
     * Map coefficients fitted on the transformed design back to the original
     * columns. Returns (beta, intercept) such that
     * intercept + X beta == intercept_std + apply(X) beta_std.
     */
    std::pair<Vector, double> back_transform(const Vector& beta_std, double intercept_std) const;
};

/// Throws DataError(constant_column) naming the column when a scaling mode
/// meets a column whose standard deviation is <= 1e-12.
std::pair<Dataset, Standardization> standardize(const Dataset& d, ScaleMode mode);

/**
 * Load a header-first RFC-4180 CSV. The response column becomes y; every
 * other column becomes a design column in file order.
 */
Dataset load_csv(const std::filesystem::path& path, std::string_view response_column,
                 Family family = Family::gaussian);

/// Write y followed by the design columns, in the format load_csv reads.
void write_csv(const std::filesystem::path& path, const Dataset& d, std::string_view response_column = "y");

} // namespace fdrsel
