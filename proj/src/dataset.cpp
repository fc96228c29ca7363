#include "fdrsel/dataset.hpp"

#include "fdrsel/csv.hpp"
#include "fdrsel/errors.hpp"

#include <cmath>
#include <fstream>

namespace fdrsel {

const char* to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::missing_column: return "missing-column";
    case ErrorCode::non_numeric: return "non-numeric";
    case ErrorCode::invalid_binary_response: return "invalid-binary-response";
    case ErrorCode::constant_column: return "constant-column";
    case ErrorCode::invalid_dataset: return "invalid-dataset";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::not_positive_definite: return "not-positive-definite";
    case ErrorCode::rank_deficient: return "rank-deficient";
    case ErrorCode::not_converged: return "not-converged";
    case ErrorCode::io: return "io";
    }
    return "unknown";
}

Family parse_family(std::string_view name)
{
    if (name == "gaussian") return Family::gaussian;
    if (name == "binomial") return Family::binomial;
    throw Error(ErrorCode::invalid_argument, "unknown family '" + std::string(name) + "'");
}

const char* to_string(Family family) noexcept
{
    return family == Family::gaussian ? "gaussian" : "binomial";
}

std::vector<std::string> default_names(Index p)
{
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
    return names;
}

Dataset::Dataset(Vector y, Matrix X, std::vector<std::string> names, Family family)
    : y_(std::move(y)), X_(std::move(X)), names_(std::move(names)), family_(family)
{
    if (X_.rows() < 2) throw DataError(ErrorCode::invalid_dataset, "dataset needs n >= 2 observations");
    if (X_.cols() < 1) throw DataError(ErrorCode::invalid_dataset, "dataset needs p >= 1 columns");
    if (y_.size() != X_.rows())
        throw DataError(ErrorCode::invalid_dataset, "response length " + std::to_string(y_.size())
                                                        + " does not match " + std::to_string(X_.rows()) + " rows");
    if (static_cast<Index>(names_.size()) != X_.cols())
        throw DataError(ErrorCode::invalid_dataset, "column label count does not match design columns");
    if (!y_.allFinite()) throw DataError(ErrorCode::invalid_dataset, "response contains non-finite values");
    for (Index j = 0; j < X_.cols(); ++j)
        if (!X_.col(j).allFinite())
            throw DataError(ErrorCode::invalid_dataset, "column '" + names_[j] + "' contains non-finite values");
    if (family_ == Family::binomial) {
        for (Index i = 0; i < y_.size(); ++i)
            if (y_[i] != 0.0 && y_[i] != 1.0)
                throw DataError(ErrorCode::invalid_binary_response,
                                "binomial response must be 0 or 1, found " + csv::format_double(y_[i]) + " in row "
                                    + std::to_string(i + 1));
    }
}

Dataset::Dataset(Vector y, Matrix X, Family family)
    : Dataset(std::move(y), X, default_names(X.cols()), family)
{}

Index Dataset::column(std::string_view name) const
{
    for (std::size_t j = 0; j < names_.size(); ++j)
        if (names_[j] == name) return static_cast<Index>(j);
    throw DataError(ErrorCode::missing_column, "missing column '" + std::string(name) + "'");
}

Dataset Dataset::select_columns(const std::vector<Index>& columns) const
{
    Matrix X(n(), static_cast<Index>(columns.size()));
    std::vector<std::string> names;
    names.reserve(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        X.col(static_cast<Index>(c)) = X_.col(columns[c]);
        names.push_back(names_[columns[c]]);
    }
    return Dataset(y_, std::move(X), std::move(names), family_);
}

Dataset Dataset::select_rows(const std::vector<Index>& rows) const
{
    Matrix X(static_cast<Index>(rows.size()), p());
    Vector y(static_cast<Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        X.row(static_cast<Index>(r)) = X_.row(rows[r]);
        y[static_cast<Index>(r)] = y_[rows[r]];
    }
    return Dataset(std::move(y), std::move(X), names_, family_);
}

ScaleMode parse_scale_mode(std::string_view name)
{
    if (name == "none") return ScaleMode::none;
    if (name == "center") return ScaleMode::center;
    if (name == "unit-l2") return ScaleMode::unit_l2;
    if (name == "unit-l2-one") return ScaleMode::unit_l2_one;
    throw Error(ErrorCode::invalid_argument, "unknown standardization '" + std::string(name) + "'");
}

Matrix Standardization::apply(const Matrix& X) const
{
    return (X.rowwise() - means.transpose()).array().rowwise() / scales.transpose().array();
}

std::pair<Vector, double> Standardization::back_transform(const Vector& beta_std, double intercept_std) const
{
    Vector beta = beta_std.array() / scales.array();
    return {beta, intercept_std - means.dot(beta)};
}

std::pair<Dataset, Standardization> standardize(const Dataset& d, ScaleMode mode)
{
    const Index n = d.n();
    const Index p = d.p();
    Standardization s;
    s.mode = mode;
    s.means = Vector::Zero(p);
    s.scales = Vector::Ones(p);

    for (Index j = 0; j < p; ++j) {
        const auto col = d.X().col(j);
        const double mean = col.mean();
        if (mode == ScaleMode::center) {
            s.means[j] = mean;
        } else if (mode == ScaleMode::unit_l2 || mode == ScaleMode::unit_l2_one) {
            const double sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(n));
            if (!(sd > 1e-12))
                throw DataError(ErrorCode::constant_column, "constant column '" + d.names()[j] + "' cannot be scaled");
            const double target = mode == ScaleMode::unit_l2 ? std::sqrt(static_cast<double>(n)) : 1.0;
            s.scales[j] = col.norm() / target;
        }
    }
    Dataset out(d.y(), s.apply(d.X()), d.names(), d.family());
    return {std::move(out), std::move(s)};
}

Dataset load_csv(const std::filesystem::path& path, std::string_view response_column, Family family)
{
    auto rows = csv::read_file(path);
    if (rows.empty()) throw DataError(ErrorCode::io, path.string() + ": missing header row");
    const auto& header = rows.front();

    std::size_t response = header.size();
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == response_column) response = c;
    if (response == header.size())
        throw DataError(ErrorCode::missing_column,
                        path.string() + ": missing response column '" + std::string(response_column) + "'");

    const Index n = static_cast<Index>(rows.size()) - 1;
    const Index p = static_cast<Index>(header.size()) - 1;
    Vector y(n);
    Matrix X(n, p);
    std::vector<std::string> names;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != response) names.push_back(header[c]);

    for (Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i) + 1];
        if (row.size() != header.size())
            throw DataError(ErrorCode::invalid_dataset, path.string() + ": row " + std::to_string(i + 2) + " has "
                                                            + std::to_string(row.size()) + " fields, expected "
                                                            + std::to_string(header.size()));
        Index j = 0;
        for (std::size_t c = 0; c < row.size(); ++c) {
            double v = 0.0;
            if (!csv::parse_double(row[c], v))
                throw DataError(ErrorCode::non_numeric, path.string() + ": non-numeric cell '" + row[c]
                                                            + "' in column '" + header[c] + "', row "
                                                            + std::to_string(i + 2));
            if (c == response) y[i] = v;
            else X(i, j++) = v;
        }
    }
    return Dataset(std::move(y), std::move(X), std::move(names), family);
}

void write_csv(const std::filesystem::path& path, const Dataset& d, std::string_view response_column)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
    csv::Row header{std::string(response_column)};
    header.insert(header.end(), d.names().begin(), d.names().end());
    csv::write_row(out, header);
    for (Index i = 0; i < d.n(); ++i) {
        csv::Row row{csv::format_double(d.y()[i])};
        for (Index j = 0; j < d.p(); ++j) row.push_back(csv::format_double(d.X()(i, j)));
        csv::write_row(out, row);
    }
}

} // namespace fdrsel
