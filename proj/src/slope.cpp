#include "fdrsel/slope.hpp"

#include "fdrsel/errors.hpp"
#include "fdrsel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

namespace fdrsel {

namespace {

struct PenaltyBlock
{
    Index offset;
    Index length;
    Vector lambda;
};

double softplus(double e)
{
    return e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
}

double sigmoid(double e)
{
    if (e >= 0) return 1.0 / (1.0 + std::exp(-e));
    const double z = std::exp(e);
    return z / (1.0 + z);
}

double block_penalty(const std::vector<PenaltyBlock>& blocks, const Vector& theta)
{
    double total = 0.0;
    for (const auto& b : blocks) total += sorted_l1_norm(theta.segment(b.offset, b.length), b.lambda);
    return total;
}

double block_kkt(const std::vector<PenaltyBlock>& blocks, const Vector& theta, const Vector& grad)
{
    double worst = 0.0;
    for (const auto& b : blocks) {
        const Vector g = grad.segment(b.offset, b.length);
        const Vector x = theta.segment(b.offset, b.length);
        const double dual = sorted_l1_dual_norm(g, b.lambda);
        const double norm = sorted_l1_norm(x, b.lambda);
        worst = std::max(worst, std::max(dual - 1.0, 0.0));
        worst = std::max(worst, std::fabs(norm + g.dot(x)) / std::max(1.0, norm));
    }
    return worst;
}

struct EngineResult
{
    Vector theta;
    double intercept;
    double kkt;
    int iterations;
    bool converged;
};

// Smooth loss over theta = [beta; mu] (mu present only with an identity block)
// plus an unpenalized intercept, minimized by FISTA with backtracking and
// function-value restarts.
class Engine
{
public:
    Engine(const Dataset& d, bool identity_block, const SlopeOptions& options)
        : family_(d.family()), identity_(identity_block), n_(d.n()), p_(d.p()), m_(d.p() + (identity_block ? d.n() : 0))
    {
        if (identity_ && family_ != Family::gaussian)
            throw Error(ErrorCode::invalid_argument, "the mean-shift model is gaussian only");
        center_ = family_ == Family::gaussian && options.intercept && !identity_;
        free_b0_ = options.intercept && !center_;

        X_ = d.X();
        y_ = d.y();
        x_mean_ = Vector::Zero(p_);
        if (center_) {
            x_mean_ = X_.colwise().mean().transpose();
            y_mean_ = y_.mean();
            X_.rowwise() -= x_mean_.transpose();
            y_.array() -= y_mean_;
        }
        const bool use_gram = center_ || (family_ == Family::gaussian && !options.intercept && !identity_);
        if (use_gram && (options.gram == SlopeOptions::Gram::always
                         || (options.gram == SlopeOptions::Gram::automatic && p_ <= 2000))) {
            G_ = X_.transpose() * X_;
            Xty_ = X_.transpose() * y_;
            half_yty_ = 0.5 * y_.squaredNorm();
        }
        lipschitz_ = estimate_lipschitz();
    }

    Index size() const { return m_; }
    bool free_intercept() const { return free_b0_; }

    double intercept_for(const Vector& theta, double b0) const
    {
        if (center_) return y_mean_ - x_mean_.dot(theta.head(p_));
        return free_b0_ ? b0 : 0.0;
    }

    // G theta in Gram mode, otherwise the linear predictor. Linear in (theta, b0).
    Vector product(const Vector& theta, double b0) const
    {
        return G_ ? gram_times(theta) : predictor(theta, b0);
    }

    double loss(const Vector& theta, const Vector& prod) const
    {
        if (G_) return half_yty_ - theta.dot(Xty_) + 0.5 * theta.dot(prod);
        if (family_ == Family::gaussian) return 0.5 * (prod - y_).squaredNorm();
        double total = 0.0;
        for (Index i = 0; i < n_; ++i) total += softplus(prod[i]) - y_[i] * prod[i];
        return total;
    }

    void gradient(const Vector& prod, Vector& grad, double& grad_b0) const
    {
        if (G_) {
            grad = prod - Xty_;
            grad_b0 = 0.0;
            return;
        }
        Vector resid(n_);
        if (family_ == Family::gaussian) {
            resid = prod - y_;
        } else {
            for (Index i = 0; i < n_; ++i) resid[i] = sigmoid(prod[i]) - y_[i];
        }
        grad.resize(m_);
        grad.head(p_).noalias() = X_.transpose() * resid;
        if (identity_) grad.tail(n_) = resid;
        grad_b0 = free_b0_ ? resid.sum() : 0.0;
    }

    EngineResult solve(const std::vector<PenaltyBlock>& blocks, Vector x, double xb, const SlopeOptions& opt) const
    {
        auto prox = [&](const Vector& v, double step) {
            Vector out(m_);
            for (const auto& b : blocks)
                out.segment(b.offset, b.length) = prox_sorted_l1(v.segment(b.offset, b.length), step * b.lambda);
            return out;
        };
        if (!free_b0_) xb = 0.0;
        Vector px = product(x, xb);
        double Fx = loss(x, px) + block_penalty(blocks, x);
        Vector yv = x, py = px;
        double yb = xb;
        double t = 1.0;
        double L = lipschitz_;
        Vector g(m_);
        double gb = 0.0;
        EngineResult res{x, xb, std::numeric_limits<double>::infinity(), 0, false};

        for (int it = 1; it <= opt.max_iter; ++it) {
            res.iterations = it;
            const double fy = loss(yv, py);
            gradient(py, g, gb);
            Vector z, pz;
            double zb = 0.0;
            double fz = 0.0;
            for (int bt = 0; bt < 60; ++bt) {
                z = prox(yv - g / L, 1.0 / L);
                zb = free_b0_ ? yb - gb / L : 0.0;
                pz = product(z, zb);
                fz = loss(z, pz);
                const Vector dz = z - yv;
                const double db = zb - yb;
                const double model = fy + g.dot(dz) + gb * db + 0.5 * L * (dz.squaredNorm() + db * db);
                if (fz <= model + 1e-12 * std::fabs(fy)) break;
                L *= 2.0;
            }
            const double Fz = fz + block_penalty(blocks, z);
            const double previous = Fx;
            if (!opt.monotone || Fz <= Fx) {
                const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
                const double momentum = (t - 1.0) / t_next;
                yv = z + momentum * (z - x);
                yb = zb + momentum * (zb - xb);
                py = pz + momentum * (pz - px);
                x = std::move(z);
                px = std::move(pz);
                xb = zb;
                Fx = Fz;
                t = t_next;
            } else {
                t = 1.0;
                yv = x;
                yb = xb;
                py = px;
            }
            if (std::fabs(previous - Fx) <= opt.tol_objective * std::max(1.0, std::fabs(Fx))) {
                const double k = kkt(blocks, x, xb);
                if (k <= opt.tol_kkt) {
                    res.kkt = k;
                    res.converged = true;
                    break;
                }
            }
        }
        res.theta = std::move(x);
        res.intercept = xb;
        if (!res.converged) res.kkt = kkt(blocks, res.theta, xb);
        return res;
    }

    double kkt(const std::vector<PenaltyBlock>& blocks, const Vector& theta, double b0) const
    {
        Vector g;
        double gb = 0.0;
        gradient(product(theta, b0), g, gb);
        double lam_max = 1.0;
        for (const auto& b : blocks) lam_max = std::max(lam_max, b.lambda[0]);
        return std::max(block_kkt(blocks, theta, g), std::fabs(gb) / lam_max);
    }

    /// Gradient of the loss at theta = 0 with the intercept at its optimum.
    Vector null_gradient() const
    {
        if (family_ == Family::gaussian) {
            if (center_) return -(X_.transpose() * y_);
            const double b0 = free_b0_ ? y_.mean() : 0.0;
            Vector g(m_);
            const Vector r = Vector::Constant(n_, b0) - y_;
            g.head(p_) = X_.transpose() * r;
            if (identity_) g.tail(n_) = r;
            return g;
        }
        const double ybar = y_.mean();
        const double mu = free_b0_ ? ybar : 0.5;
        const Vector r = Vector::Constant(n_, mu) - y_;
        return X_.transpose() * r;
    }

    double null_intercept() const
    {
        if (!free_b0_) return 0.0;
        if (family_ == Family::gaussian) return y_.mean();
        const double ybar = std::clamp(y_.mean(), 1e-12, 1 - 1e-12);
        return std::log(ybar / (1 - ybar));
    }

private:
    Vector gram_times(const Vector& theta) const
    {
        Vector out = Vector::Zero(p_);
        Index nnz = 0;
        for (Index j = 0; j < p_; ++j) nnz += theta[j] != 0.0;
        if (nnz * 3 > p_) return *G_ * theta;
        for (Index j = 0; j < p_; ++j)
            if (theta[j] != 0.0) out.noalias() += G_->col(j) * theta[j];
        return out;
    }

    Vector predictor(const Vector& theta, double b0) const
    {
        Vector eta = Vector::Constant(n_, free_b0_ ? b0 : 0.0);
        Index nnz = 0;
        for (Index j = 0; j < p_; ++j) nnz += theta[j] != 0.0;
        if (nnz * 3 > p_) {
            eta.noalias() += X_ * theta.head(p_);
        } else {
            for (Index j = 0; j < p_; ++j)
                if (theta[j] != 0.0) eta.noalias() += X_.col(j) * theta[j];
        }
        if (identity_) eta += theta.tail(n_);
        return eta;
    }

    // 20 power iterations on A'A, A = [1 X I] restricted to the active parts.
    double estimate_lipschitz() const
    {
        RngStream rng(0x51ab1e);
        Vector v(m_ + 1);
        for (Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
        v.normalize();
        double est = 0.0;
        for (int it = 0; it < 20; ++it) {
            Vector w(m_ + 1);
            if (G_) {
                w.head(p_) = *G_ * v.head(p_);
                w[m_] = 0.0;
            } else {
                Vector Av = X_ * v.head(p_);
                if (free_b0_) Av.array() += v[m_];
                if (identity_) Av += v.segment(p_, n_);
                w.head(p_) = X_.transpose() * Av;
                if (identity_) w.segment(p_, n_) = Av;
                w[m_] = free_b0_ ? Av.sum() : 0.0;
            }
            est = w.norm();
            if (est == 0.0) break;
            v = w / est;
        }
        if (family_ == Family::binomial) est *= 0.25;
        return est > 0.0 ? est : 1.0;
    }

    Family family_;
    bool identity_;
    bool center_ = false;
    bool free_b0_ = false;
    Index n_, p_, m_;
    Matrix X_;
    Vector y_;
    Vector x_mean_;
    double y_mean_ = 0.0;
    std::optional<Matrix> G_;
    Vector Xty_;
    double half_yty_ = 0.0;
    double lipschitz_ = 1.0;
};

double data_loss(const Dataset& d, const Vector& beta, double intercept, const Vector* shift = nullptr)
{
    Vector eta = (d.X() * beta).array() + intercept;
    if (shift) eta += *shift;
    if (d.family() == Family::gaussian) return 0.5 * (d.y() - eta).squaredNorm();
    double total = 0.0;
    for (Index i = 0; i < d.n(); ++i) total += softplus(eta[i]) - d.y()[i] * eta[i];
    return total;
}

void check_lambda(const LambdaSequence& lambda, Index size, const char* what)
{
    if (lambda.size() != size)
        throw Error(ErrorCode::invalid_argument, std::string(what) + " lambda has length " + std::to_string(lambda.size())
                                                     + ", expected " + std::to_string(size));
}

} // namespace

Clusters equal_magnitude_clusters(const Vector& beta, double tolerance)
{
    std::vector<Index> idx;
    for (Index j = 0; j < beta.size(); ++j)
        if (beta[j] != 0.0) idx.push_back(j);
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return std::fabs(beta[a]) > std::fabs(beta[b]); });
    Clusters out;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i == 0 || std::fabs(beta[idx[i - 1]]) - std::fabs(beta[idx[i]]) > tolerance) out.emplace_back();
        out.back().push_back(idx[i]);
    }
    for (auto& c : out) std::sort(c.begin(), c.end());
    return out;
}

Index SlopeFit::nonzero() const
{
    return (coefficients.array() != 0.0).count();
}

double kkt_residual(const Dataset& d, const LambdaSequence& lambda, const Vector& beta, double intercept,
                    bool with_intercept)
{
    check_lambda(lambda, d.p(), "coefficient");
    const Vector eta = (d.X() * beta).array() + intercept;
    Vector r(d.n());
    for (Index i = 0; i < d.n(); ++i)
        r[i] = (d.family() == Family::gaussian ? eta[i] : sigmoid(eta[i])) - d.y()[i];
    const Vector g = d.X().transpose() * r;
    const std::vector<PenaltyBlock> blocks{{0, d.p(), lambda.values}};
    double res = block_kkt(blocks, beta, g);
    if (with_intercept) res = std::max(res, std::fabs(r.sum()) / std::max(1.0, lambda.values[0]));
    return res;
}

struct SlopeSolver::Impl
{
    Impl(const Dataset& data, SlopeOptions opts) : d(data), options(opts), engine(data, false, opts) {}
    Dataset d;
    SlopeOptions options;
    Engine engine;
};

SlopeSolver::SlopeSolver(const Dataset& d, SlopeOptions options) : impl_(std::make_unique<Impl>(d, options)) {}
SlopeSolver::~SlopeSolver() = default;
SlopeSolver::SlopeSolver(SlopeSolver&&) noexcept = default;
SlopeSolver& SlopeSolver::operator=(SlopeSolver&&) noexcept = default;

const Dataset& SlopeSolver::data() const
{
    return impl_->d;
}

SlopeFit SlopeSolver::fit(const LambdaSequence& lambda, const SlopeFit* warm_start) const
{
    const Dataset& d = impl_->d;
    check_lambda(lambda, d.p(), "coefficient");
    const Engine& eng = impl_->engine;
    Vector start = Vector::Zero(d.p());
    double b0 = eng.null_intercept();
    if (warm_start && warm_start->coefficients.size() == d.p()) {
        start = warm_start->coefficients;
        if (eng.free_intercept()) b0 = warm_start->intercept;
    }
    const std::vector<PenaltyBlock> blocks{{0, d.p(), lambda.values}};
    EngineResult r = eng.solve(blocks, std::move(start), b0, impl_->options);

    SlopeFit fit;
    fit.coefficients = std::move(r.theta);
    fit.intercept = eng.intercept_for(fit.coefficients, r.intercept);
    fit.objective = data_loss(d, fit.coefficients, fit.intercept) + sorted_l1_norm(fit.coefficients, lambda.values);
    fit.kkt = r.kkt;
    fit.iterations = r.iterations;
    fit.converged = r.converged;
    fit.clusters = equal_magnitude_clusters(fit.coefficients);
    return fit;
}

std::vector<SlopeFit> SlopeSolver::path(const LambdaSequence& lambda, std::vector<double> scales) const
{
    std::sort(scales.begin(), scales.end(), std::greater<>());
    std::vector<SlopeFit> fits;
    fits.reserve(scales.size());
    for (double s : scales) fits.push_back(fit(lambda.scaled(s), fits.empty() ? nullptr : &fits.back()));
    return fits;
}

double SlopeSolver::zero_scale(const LambdaSequence& lambda) const
{
    check_lambda(lambda, impl_->d.p(), "coefficient");
    const Vector g = impl_->engine.null_gradient();
    return sorted_l1_dual_norm(g.head(impl_->d.p()), lambda.values);
}

SlopeFit fit_slope(const Dataset& d, const LambdaSequence& lambda, const SlopeOptions& options)
{
    return SlopeSolver(d, options).fit(lambda);
}

std::vector<PathPoint> slope_path(const Dataset& d, const LambdaSequence& base, std::vector<double> scales,
                                  const SlopeOptions& options)
{
    std::sort(scales.begin(), scales.end(), std::greater<>());
    const SlopeSolver solver(d, options);
    const auto fits = solver.path(base, scales);
    std::vector<PathPoint> out;
    for (std::size_t i = 0; i < fits.size(); ++i) out.push_back({scales[i], fits[i]});
    return out;
}

LambdaSequence mean_shift_lambda(Index n, double sigma)
{
    if (n < 1 || !(sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "mean-shift lambda needs n >= 1 and sigma > 0");
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = sigma * std::sqrt(std::log(2.0 * static_cast<double>(n) / static_cast<double>(i + 1)));
    return explicit_lambda(std::move(v));
}

MeanShiftFit fit_mean_shift(const Dataset& d, const LambdaSequence& lambda_beta, const LambdaSequence& lambda_mu,
                            double rho1, double rho2, const SlopeOptions& options)
{
    check_lambda(lambda_beta, d.p(), "coefficient");
    check_lambda(lambda_mu, d.n(), "shift");
    if (!(rho1 > 0.0 && rho2 > 0.0)) throw Error(ErrorCode::invalid_argument, "rho1 and rho2 must be positive");
    const Engine eng(d, true, options);
    const std::vector<PenaltyBlock> blocks{{0, d.p(), rho1 * lambda_beta.values}, {d.p(), d.n(), rho2 * lambda_mu.values}};
    EngineResult r = eng.solve(blocks, Vector::Zero(d.p() + d.n()), eng.null_intercept(), options);

    MeanShiftFit fit;
    fit.coefficients = r.theta.head(d.p());
    fit.shifts = r.theta.tail(d.n());
    fit.intercept = eng.intercept_for(r.theta, r.intercept);
    fit.objective = data_loss(d, fit.coefficients, fit.intercept, &fit.shifts)
                    + rho1 * sorted_l1_norm(fit.coefficients, lambda_beta.values)
                    + rho2 * sorted_l1_norm(fit.shifts, lambda_mu.values);
    fit.kkt = r.kkt;
    fit.iterations = r.iterations;
    fit.converged = r.converged;
    return fit;
}

} // namespace fdrsel
