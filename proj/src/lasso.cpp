#include "fdrsel/lasso.hpp"

#include "fdrsel/errors.hpp"
#include "fdrsel/slope.hpp"

#include <algorithm>
#include <cmath>

namespace fdrsel {

namespace {

double soft(double z, double t)
{
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

double binomial_deviance(const Dataset& d, const Vector& beta, double b0)
{
    const Vector eta = (d.X() * beta).array() + b0;
    double dev = 0.0;
    for (Index i = 0; i < d.n(); ++i) {
        const double e = eta[i];
        const double sp = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
        dev += 2.0 * (sp - d.y()[i] * e);
    }
    return dev;
}

void check_grid(const std::vector<double>& lambdas)
{
    if (lambdas.empty()) throw Error(ErrorCode::invalid_argument, "lasso grid is empty");
    for (double l : lambdas)
        if (!(l > 0.0) || !std::isfinite(l)) throw Error(ErrorCode::invalid_argument, "lasso lambdas must be positive");
}

LassoPath gaussian_path(const Dataset& d, const std::vector<double>& lambdas, const LassoOptions& opt)
{
    const Index p = d.p();
    Matrix X = d.X();
    Vector y = d.y();
    Vector x_mean = Vector::Zero(p);
    double y_mean = 0.0;
    if (opt.intercept) {
        x_mean = X.colwise().mean().transpose();
        y_mean = y.mean();
        X.rowwise() -= x_mean.transpose();
        y.array() -= y_mean;
    }
    const Vector sq = X.colwise().squaredNorm().transpose();
    const double null_dev = std::max(y.squaredNorm(), 1e-300);

    LassoPath path;
    path.lambdas = lambdas;
    path.coefficients = Matrix::Zero(p, static_cast<Index>(lambdas.size()));
    path.intercepts = Vector::Zero(static_cast<Index>(lambdas.size()));

    Vector beta = Vector::Zero(p);
    Vector r = y;
    std::vector<char> in_active(static_cast<std::size_t>(p), 0);
    std::vector<Index> active;

    auto update = [&](Index j, double lambda) {
        if (sq[j] <= 0.0) return 0.0;
        const double old = beta[j];
        const double next = soft(old * sq[j] + X.col(j).dot(r), lambda) / sq[j];
        if (next == old) return 0.0;
        r.noalias() -= (next - old) * X.col(j);
        beta[j] = next;
        if (next != 0.0 && !in_active[static_cast<std::size_t>(j)]) {
            in_active[static_cast<std::size_t>(j)] = 1;
            active.push_back(j);
        }
        return sq[j] * (next - old) * (next - old);
    };

    int sweeps = 0;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        const double lambda = lambdas[k];
        while (true) {
            double worst = 0.0;
            for (Index j = 0; j < p; ++j) worst = std::max(worst, update(j, lambda));
            if (++sweeps > opt.max_sweeps) throw FitError(ErrorCode::not_converged, "lasso coordinate descent did not converge");
            if (worst <= opt.tolerance * null_dev) break;
            while (true) {
                double w = 0.0;
                for (Index j : active) w = std::max(w, update(j, lambda));
                if (++sweeps > opt.max_sweeps) throw FitError(ErrorCode::not_converged, "lasso coordinate descent did not converge");
                if (w <= opt.tolerance * null_dev) break;
            }
        }
        const auto col = static_cast<Index>(k);
        path.coefficients.col(col) = beta;
        path.intercepts[col] = opt.intercept ? y_mean - x_mean.dot(beta) : 0.0;
        const double ratio = 1.0 - r.squaredNorm() / null_dev;
        path.deviance_ratio.push_back(ratio);
        path.computed = col + 1;
        if (opt.early_stop && ratio >= 0.999) break;
    }
    return path;
}

LassoPath binomial_path(const Dataset& d, const std::vector<double>& lambdas, const LassoOptions& opt)
{
    SlopeOptions so;
    so.intercept = opt.intercept;
    const SlopeSolver solver(d, so);
    const double ybar = std::clamp(d.y().mean(), 1e-12, 1 - 1e-12);
    const double b_null = opt.intercept ? std::log(ybar / (1 - ybar)) : 0.0;
    const double null_dev = std::max(binomial_deviance(d, Vector::Zero(d.p()), b_null), 1e-300);

    LassoPath path;
    path.lambdas = lambdas;
    path.coefficients = Matrix::Zero(d.p(), static_cast<Index>(lambdas.size()));
    path.intercepts = Vector::Zero(static_cast<Index>(lambdas.size()));
    SlopeFit previous;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        LambdaSequence seq;
        seq.values = Vector::Constant(d.p(), lambdas[k]);
        seq.rule = LambdaRule::constant;
        SlopeFit f = solver.fit(seq, k == 0 ? nullptr : &previous);
        const auto col = static_cast<Index>(k);
        path.coefficients.col(col) = f.coefficients;
        path.intercepts[col] = f.intercept;
        const double ratio = 1.0 - binomial_deviance(d, f.coefficients, f.intercept) / null_dev;
        path.deviance_ratio.push_back(ratio);
        path.computed = col + 1;
        previous = std::move(f);
        if (opt.early_stop && ratio >= 0.999) break;
    }
    return path;
}

} // namespace

double lasso_lambda_max(const Dataset& d, bool intercept)
{
    Vector r = d.y();
    if (d.family() == Family::gaussian) {
        if (intercept) r.array() -= r.mean();
    } else {
        r.array() -= intercept ? r.mean() : 0.5;
    }
    return (d.X().transpose() * r).lpNorm<Eigen::Infinity>();
}

std::vector<double> lasso_grid(const Dataset& d, int count, double ratio, bool intercept)
{
    if (count < 1 || !(ratio > 0.0 && ratio < 1.0))
        throw Error(ErrorCode::invalid_argument, "lasso grid needs count >= 1 and ratio in (0, 1)");
    double top = lasso_lambda_max(d, intercept);
    if (!(top > 0.0)) top = 1.0;
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        grid[static_cast<std::size_t>(i)] = top * std::pow(ratio, t);
    }
    return grid;
}

LassoPath lasso_path(const Dataset& d, std::vector<double> lambdas, const LassoOptions& options)
{
    check_grid(lambdas);
    std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
    return d.family() == Family::gaussian ? gaussian_path(d, lambdas, options) : binomial_path(d, lambdas, options);
}

LassoFit fit_lasso(const Dataset& d, double lambda, const LassoOptions& options)
{
    LassoOptions opt = options;
    opt.early_stop = false;
    const LassoPath path = lasso_path(d, {lambda}, opt);
    return {path.coefficients.col(0), path.intercepts[0], lambda};
}

} // namespace fdrsel
