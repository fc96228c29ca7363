#include "fdrsel/sorted_l1.hpp"

#include "fdrsel/csv.hpp"
#include "fdrsel/distributions.hpp"
#include "fdrsel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace fdrsel {

namespace {

void validate(const Vector& values)
{
    if (values.size() == 0) throw Error(ErrorCode::invalid_argument, "lambda sequence is empty");
    bool any_positive = false;
    for (Index j = 0; j < values.size(); ++j) {
        if (!std::isfinite(values[j]) || values[j] < 0.0)
            throw Error(ErrorCode::invalid_argument, "lambda values must be finite and nonnegative");
        if (j > 0 && values[j] > values[j - 1])
            throw Error(ErrorCode::invalid_argument, "lambda sequence must be non-increasing (index "
                                                         + std::to_string(j + 1) + ")");
        any_positive = any_positive || values[j] > 0.0;
    }
    if (!any_positive) throw Error(ErrorCode::invalid_argument, "lambda sequence is identically zero");
}

void check_q(double q)
{
    if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCode::invalid_argument, "q must lie in (0, 1)");
}

std::vector<Index> order_by_magnitude(const Vector& v)
{
    std::vector<Index> idx(static_cast<std::size_t>(v.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return std::fabs(v[a]) > std::fabs(v[b]); });
    return idx;
}

} // namespace

LambdaRule parse_lambda_rule(std::string_view name)
{
    if (name == "bh") return LambdaRule::bh;
    if (name == "second-order") return LambdaRule::second_order;
    if (name == "inflated" || name == "inflated-bh") return LambdaRule::inflated_bh;
    if (name == "heuristic") return LambdaRule::heuristic;
    if (name == "constant") return LambdaRule::constant;
    if (name == "explicit") return LambdaRule::explicit_values;
    throw Error(ErrorCode::invalid_argument, "unknown lambda rule '" + std::string(name) + "'");
}

const char* to_string(LambdaRule rule) noexcept
{
    switch (rule) {
    case LambdaRule::bh: return "bh";
    case LambdaRule::second_order: return "second-order";
    case LambdaRule::inflated_bh: return "inflated-bh";
    case LambdaRule::heuristic: return "heuristic";
    case LambdaRule::constant: return "constant";
    case LambdaRule::explicit_values: return "explicit";
    }
    return "unknown";
}

LambdaSequence LambdaSequence::scaled(double factor) const
{
    LambdaSequence out = *this;
    out.values *= factor;
    return out;
}

LambdaSequence make_lambda(LambdaRule rule, Index p, const LambdaParams& params)
{
    if (p < 1) throw Error(ErrorCode::invalid_argument, "lambda sequence needs p >= 1");
    const double pd = static_cast<double>(p);
    LambdaSequence out;
    out.rule = rule;
    out.values.resize(p);

    auto bh = [&](Index j, double c) { return c * dist::normal_upper_quantile(static_cast<double>(j + 1) * params.q / (2.0 * pd)); };

    switch (rule) {
    case LambdaRule::bh:
        check_q(params.q);
        if (!(params.c > 0.0)) throw Error(ErrorCode::invalid_argument, "bh scale c must be positive");
        for (Index j = 0; j < p; ++j) out.values[j] = bh(j, params.c);
        break;
    case LambdaRule::second_order:
        if (!(params.scale > 0.0)) throw Error(ErrorCode::invalid_argument, "second-order scale must be positive");
        for (Index j = 0; j < p; ++j) out.values[j] = params.scale * std::sqrt(2.0 * std::log(pd / static_cast<double>(j + 1)));
        break;
    case LambdaRule::inflated_bh:
        check_q(params.q);
        if (!(params.delta > 0.0)) throw Error(ErrorCode::invalid_argument, "inflation delta must be positive");
        for (Index j = 0; j < p; ++j) out.values[j] = bh(j, 1.0 + params.delta);
        break;
    case LambdaRule::heuristic: {
        check_q(params.q);
        if (!(params.sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "heuristic sigma must be positive");
        if (params.n < 1) throw Error(ErrorCode::invalid_argument, "heuristic rule needs the number of observations n");
        const double n = static_cast<double>(params.n);
        out.values[0] = bh(0, params.sigma);
        double sum_sq = out.values[0] * out.values[0];
        for (Index j = 1; j < p; ++j) {
            // one-based index i = j + 1, denominator n - i - 2
            const double denom = n - static_cast<double>(j + 1) - 2.0;
            if (denom <= 0.0) {
                out.values.tail(p - j).setConstant(out.values[j - 1]);
                out.truncated = true;
                break;
            }
            const double candidate = bh(j, params.sigma) * std::sqrt(1.0 + sum_sq / denom);
            out.values[j] = std::min(out.values[j - 1], candidate);
            sum_sq += out.values[j] * out.values[j];
        }
        break;
    }
    case LambdaRule::constant:
        if (!(params.value > 0.0)) throw Error(ErrorCode::invalid_argument, "constant lambda must be positive");
        out.values.setConstant(params.value);
        break;
    case LambdaRule::explicit_values:
        throw Error(ErrorCode::invalid_argument, "explicit sequences are built with explicit_lambda()");
    }
    validate(out.values);
    return out;
}

LambdaSequence explicit_lambda(Vector values)
{
    validate(values);
    LambdaSequence out;
    out.values = std::move(values);
    out.rule = LambdaRule::explicit_values;
    return out;
}

double sorted_l1_norm(const Vector& beta, const Vector& lambda)
{
    if (beta.size() != lambda.size()) throw Error(ErrorCode::invalid_argument, "beta and lambda lengths differ");
    std::vector<double> mag(static_cast<std::size_t>(beta.size()));
    for (Index j = 0; j < beta.size(); ++j) mag[static_cast<std::size_t>(j)] = std::fabs(beta[j]);
    std::sort(mag.begin(), mag.end(), std::greater<>());
    double total = 0.0;
    for (Index j = 0; j < beta.size(); ++j) total += lambda[j] * mag[static_cast<std::size_t>(j)];
    return total;
}

double sorted_l1_dual_norm(const Vector& v, const Vector& lambda)
{
    if (v.size() != lambda.size()) throw Error(ErrorCode::invalid_argument, "vector and lambda lengths differ");
    std::vector<double> mag(static_cast<std::size_t>(v.size()));
    for (Index j = 0; j < v.size(); ++j) mag[static_cast<std::size_t>(j)] = std::fabs(v[j]);
    std::sort(mag.begin(), mag.end(), std::greater<>());
    double cum_v = 0.0, cum_l = 0.0, worst = 0.0;
    for (Index j = 0; j < v.size(); ++j) {
        cum_v += mag[static_cast<std::size_t>(j)];
        cum_l += lambda[j];
        if (cum_l > 0.0) worst = std::max(worst, cum_v / cum_l);
        else if (cum_v > 0.0) return std::numeric_limits<double>::infinity();
    }
    return worst;
}

Vector prox_sorted_l1(const Vector& v, const Vector& lambda)
{
    const Index p = v.size();
    if (lambda.size() != p) throw Error(ErrorCode::invalid_argument, "v and lambda lengths differ");
    const auto order = order_by_magnitude(v);

    struct Block
    {
        Index start;
        Index end;  // inclusive
        double sum;
        double value() const { return sum / static_cast<double>(end - start + 1); }
    };
    std::vector<Block> stack;
    stack.reserve(static_cast<std::size_t>(p));
    for (Index i = 0; i < p; ++i) {
        const double w = std::fabs(v[order[static_cast<std::size_t>(i)]]) - lambda[i];
        stack.push_back({i, i, w});
        // the fit must be non-increasing: merge while a later block is not smaller
        while (stack.size() > 1 && stack[stack.size() - 2].value() <= stack.back().value()) {
            const Block top = stack.back();
            stack.pop_back();
            stack.back().end = top.end;
            stack.back().sum += top.sum;
        }
    }

    Vector out = Vector::Zero(p);
    for (const Block& b : stack) {
        const double value = std::max(b.value(), 0.0);
        if (value == 0.0) continue;
        for (Index i = b.start; i <= b.end; ++i) {
            const Index j = order[static_cast<std::size_t>(i)];
            out[j] = v[j] < 0.0 ? -value : value;
        }
    }
    return out;
}

LambdaSequence read_lambda_csv(const std::filesystem::path& path)
{
    const auto table = csv::read_numeric_table(path);
    const std::size_t col = table.column("lambda");
    Vector values(static_cast<Index>(table.rows.size()));
    for (std::size_t i = 0; i < table.rows.size(); ++i) values[static_cast<Index>(i)] = table.rows[i][col];
    return explicit_lambda(std::move(values));
}

void write_lambda_csv(const std::filesystem::path& path, const LambdaSequence& lambda)
{
    csv::NumericTable table;
    table.header = {"lambda"};
    for (Index j = 0; j < lambda.size(); ++j) table.rows.push_back({lambda.values[j]});
    write_numeric_table(path, table);
}

} // namespace fdrsel
