#pragma once

#include "fdrsel/dataset.hpp"

#include <filesystem>
#include <string_view>

namespace fdrsel {

enum class LambdaRule {
    bh,            ///< c * Phi^{-1}(1 - j q / 2p)
    second_order,  ///< scale * sqrt(2 log(p / j))
    inflated_bh,   ///< (1 + delta) * bh(1, q)
    heuristic,     ///< bh(sigma, q) inflated by the running variance correction, kept non-increasing
    constant,      ///< the lasso penalty
    explicit_values,
};

LambdaRule parse_lambda_rule(std::string_view name);
const char* to_string(LambdaRule rule) noexcept;

struct LambdaParams
{
    double c = 1.0;
    double q = 0.2;
    double delta = 0.05;
    double sigma = 1.0;
    double scale = 1.0;  ///< second-order proportionality constant
    double value = 1.0;  ///< constant rule
    Index n = 0;         ///< heuristic rule: number of observations
};

/**
 * Non-increasing, nonnegative, not identically zero tuning vector.
 *
 * `truncated` is set by the heuristic rule when the variance correction's
 * denominator n - i - 2 reaches zero; from that index on the sequence is
 * held flat at its last valid value.
 */
struct LambdaSequence
{
    Vector values;
    LambdaRule rule = LambdaRule::explicit_values;
    bool truncated = false;

    Index size() const { return values.size(); }
    LambdaSequence scaled(double factor) const;
};

LambdaSequence make_lambda(LambdaRule rule, Index p, const LambdaParams& params = {});

/// Validates and wraps user-supplied values.
LambdaSequence explicit_lambda(Vector values);

/// sum_j lambda_j |beta|_(j) with |beta|_(1) >= |beta|_(2) >= ...
double sorted_l1_norm(const Vector& beta, const Vector& lambda);

/// Dual norm: max_k (sum of the k largest |v|) / (sum of the first k lambdas).
double sorted_l1_dual_norm(const Vector& v, const Vector& lambda);

/// argmin_x 1/2 |x - v|^2 + J_lambda(x), by pool-adjacent-violators on the sorted magnitudes.
Vector prox_sorted_l1(const Vector& v, const Vector& lambda);

/// Single-column CSV with header "lambda".
LambdaSequence read_lambda_csv(const std::filesystem::path& path);
void write_lambda_csv(const std::filesystem::path& path, const LambdaSequence& lambda);

} // namespace fdrsel
