#pragma once

#include "fdrsel/dataset.hpp"
#include "fdrsel/rng.hpp"

#include <variant>
#include <vector>

namespace fdrsel {

/**
 * Block-diagonal correlation: each block is compound symmetric with
 * correlation rho; `independent` trailing columns are uncorrelated.
 */
struct BlockSpec
{
    std::vector<Index> block_sizes;
    Index independent = 0;
    double rho = 0.0;

    Index p() const;

    /// 4 blocks each of sizes 32, 16, 8, 4 plus 16 independent columns (p = 256).
    static BlockSpec gwas_like(double rho);
};

struct IdentityCov {};
struct CompoundSymmetry { double rho = 0.0; };

using SigmaModel = std::variant<IdentityCov, CompoundSymmetry, BlockSpec>;

/// The p x p correlation matrix described by a sigma model.
Matrix covariance(const SigmaModel& model, Index p);

/**
 * Sampler for rows x ~ N(0, row_scale^2 * Sigma). The Cholesky factor is
 * computed once at construction so repeated draws share it.
 */
class GaussianDesign
{
public:
    GaussianDesign(Index p, SigmaModel model);

    Matrix draw(Index n, double row_scale, RngStream& rng) const;

    const Matrix& sigma() const { return sigma_; }
    Index p() const { return p_; }

private:
    Index p_;
    bool identity_;
    Matrix sigma_;
    Matrix chol_lower_;
};

/// One-shot convenience wrapper over GaussianDesign.
Matrix draw_gaussian_design(Index n, Index p, const SigmaModel& model, double row_scale, RngStream& rng);

} // namespace fdrsel
