#pragma once

#include "fdrsel/criteria.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fdrsel {

struct ScreenStage { double threshold = 0.15; };
struct ForwardStage { CriterionSpec criterion; };
struct BackwardStage { CriterionSpec criterion; };
struct StepwiseStage { CriterionSpec criterion; };

/// Add the best candidate `count` times whether or not the criterion drops.
struct ForwardStepsStage
{
    CriterionSpec criterion;
    int count = 1;
};

using SearchStage = std::variant<ScreenStage, ForwardStage, BackwardStage, StepwiseStage, ForwardStepsStage>;

std::string describe(const SearchStage& stage);

/**
 * Ordered search recipe.
 *
 * A screen stage restricts the columns later forward-type stages may add;
 * a stepwise stage always searches every column. With `return_best` the plan
 * returns the stage-end support with the lowest value of the last stage's
 * criterion instead of the final stage-end support.
 */
struct SearchPlan
{
    std::vector<SearchStage> stages;
    bool return_best = false;

    /// screen(0.15) -> forward(BIC) -> backward(c) -> stepwise(c)
    static SearchPlan standard(const CriterionSpec& criterion);

    /// stepwise(c) -> 2 forward steps with BIC -> stepwise(c), keeping the best end point.
    static SearchPlan escape_local_minimum(const CriterionSpec& criterion);

    /**
     * Parse "screen(0.15),forward(bic),backward(mbic2),stepwise(mbic2),forward-steps(bic,2)".
     * Criterion constants (E, const, kappa, p_total, sigma) come from `base`.
     */
    static SearchPlan parse(std::string_view text, const CriterionSpec& base);

    std::string describe() const;
};

struct TraceEntry
{
    enum class Action { stage, screen, add, drop };
    Action action;
    Index index = -1;   ///< column for add/drop; survivor count for screen
    double value = 0.0; ///< criterion value after the action
    std::string label;  ///< stage description for stage markers
};

const char* to_string(TraceEntry::Action action) noexcept;

struct FitResult
{
    Support support;
    Vector coefficients;  ///< aligned with support, on the original column scale
    double intercept = 0.0;
    CriterionSpec criterion;  ///< the criterion criterion_value refers to
    double criterion_value = 0.0;
    std::vector<TraceEntry> trace;
    bool separation = false;
    Index skipped_candidates = 0;  ///< candidate fits that failed (rank deficiency, IRLS)
};

struct SearchOptions
{
    /// Overrides the per-criterion cap from k_cap().
    std::optional<Index> k_cap;
};

/// Per-column marginal p-values: t-test (gaussian) or Wald z (binomial) of
/// the single-variable model with intercept. Constant columns get 1.
std::vector<double> marginal_pvalues(const Dataset& d);

/// Columns whose marginal p-value is <= threshold, in increasing order.
Support marginal_screen(const Dataset& d, double threshold);

FitResult forward(const Dataset& d, const CriterionSpec& spec, const Support& start = {}, SearchOptions options = {});
FitResult backward(const Dataset& d, const CriterionSpec& spec, const Support& start, SearchOptions options = {});
FitResult stepwise(const Dataset& d, const CriterionSpec& spec, const Support& start = {}, SearchOptions options = {});
FitResult run_plan(const Dataset& d, const SearchPlan& plan, const Support& start = {}, SearchOptions options = {});

} // namespace fdrsel
