#include "fdrsel/design.hpp"

#include "fdrsel/errors.hpp"

#include <numeric>

namespace fdrsel {

Index BlockSpec::p() const
{
    return std::accumulate(block_sizes.begin(), block_sizes.end(), Index{0}) + independent;
}

BlockSpec BlockSpec::gwas_like(double rho)
{
    BlockSpec spec;
    for (Index size : {32, 16, 8, 4})
        for (int b = 0; b < 4; ++b) spec.block_sizes.push_back(size);
    spec.independent = 16;
    spec.rho = rho;
    return spec;
}

Matrix covariance(const SigmaModel& model, Index p)
{
    return std::visit(
        [p](const auto& m) -> Matrix {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, IdentityCov>) {
                return Matrix::Identity(p, p);
            } else if constexpr (std::is_same_v<T, CompoundSymmetry>) {
                if (!(m.rho >= 0.0 && m.rho < 1.0))
                    throw Error(ErrorCode::invalid_argument, "compound symmetry needs rho in [0, 1)");
                Matrix s = Matrix::Constant(p, p, m.rho);
                s.diagonal().setOnes();
                return s;
            } else {
                if (m.p() != p)
                    throw Error(ErrorCode::invalid_argument, "block spec covers " + std::to_string(m.p())
                                                                 + " columns, design has " + std::to_string(p));
                Matrix s = Matrix::Identity(p, p);
                Index start = 0;
                for (Index size : m.block_sizes) {
                    s.block(start, start, size, size).setConstant(m.rho);
                    s.block(start, start, size, size).diagonal().setOnes();
                    start += size;
                }
                return s;
            }
        },
        model);
}

GaussianDesign::GaussianDesign(Index p, SigmaModel model)
    : p_(p), identity_(std::holds_alternative<IdentityCov>(model)), sigma_(covariance(model, p))
{
    if (identity_) return;
    Eigen::LLT<Matrix> llt(sigma_);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::not_positive_definite, "design covariance is not positive definite");
    chol_lower_ = llt.matrixL();
}

Matrix GaussianDesign::draw(Index n, double row_scale, RngStream& rng) const
{
    if (!(row_scale > 0.0)) throw Error(ErrorCode::invalid_argument, "row scale must be positive");
    // fill row by row so the draw order does not depend on storage order
    Matrix z(n, p_);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p_; ++j) z(i, j) = rng.normal();
    if (!identity_) z = z * chol_lower_.transpose();
    if (row_scale != 1.0) z *= row_scale;
    return z;
}

Matrix draw_gaussian_design(Index n, Index p, const SigmaModel& model, double row_scale, RngStream& rng)
{
    return GaussianDesign(p, model).draw(n, row_scale, rng);
}

} // namespace fdrsel
