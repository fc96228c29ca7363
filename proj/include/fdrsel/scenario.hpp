#pragma once

#include "fdrsel/dataset.hpp"
#include "fdrsel/design.hpp"
#include "fdrsel/metrics.hpp"
#include "fdrsel/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fdrsel {

/// Integer-valued function of n used for p and k.
struct SizeRule
{
    enum class Kind { constant, power, table };
    Kind kind = Kind::constant;
    double coef = 0.0;      ///< constant value, or the factor in coef * n^exponent
    double exponent = 1.0;
    std::vector<std::pair<Index, Index>> table;  ///< (n, value) pairs

    static SizeRule fixed(Index value);
    static SizeRule scaled_power(double coef, double exponent);
    static SizeRule lookup(std::vector<std::pair<Index, Index>> table);

    /// Rounds coef * n^exponent; table rules require n to be listed.
    Index evaluate(Index n) const;
    std::string describe() const;
};

/// Accepts "49", "n", "7*sqrt(n)", "0.05*n^1.5", "n^0.5", "table(49:5,100:7)".
SizeRule parse_size_rule(std::string_view text);

struct EffectRule
{
    enum class Kind { constant, sqrt_2log_p_over_k, scaled, normal };
    Kind kind = Kind::constant;
    double value = 1.0;  ///< constant value, the factor gamma, or the variance tau^2

    std::string describe() const;
};

/// Accepts "0.4", "sqrt-2log-p-over-k", "scaled(1.3)" (times sqrt(2 log p)), "normal(0.5)" (variance).
EffectRule parse_effect_rule(std::string_view text);

struct DesignSpec
{
    enum class Kind { identity, compound_symmetry, block };
    Kind kind = Kind::identity;
    double rho = 0.0;
    bool scale_rows = false;  ///< rows N(0, Sigma / n) instead of N(0, Sigma)

    std::string describe() const;
};

/// Accepts "identity", "compound(0.5)", "block(0.3)".
DesignSpec parse_design(std::string_view text);

struct ScenarioSpec
{
    std::string name;
    Index n = 100;
    SizeRule p = SizeRule::fixed(10);
    SizeRule k = SizeRule::fixed(0);
    EffectRule effect;
    DesignSpec design;
    double noise_sd = 1.0;
    int replicates = 100;
    std::vector<std::string> methods;
    std::uint64_t seed = 1;

    Index resolved_p() const;
    Index resolved_k() const;
    /// Throws Error(invalid_argument) if the rules do not yield 0 <= k <= p or replicates < 1.
    void validate() const;
    SigmaModel sigma_model() const;
    /// Indices of the nonzero coefficients: the first k columns, or the fixed layout of the block design.
    std::vector<Index> causal_columns() const;
};

/// Block layout: per block size, blocks get 3, 2, 1 and 0 causal columns; 4 causal among the independent ones.
std::vector<Index> block_causal_columns(const BlockSpec& blocks);

/**
 * Named scenarios: scenario0..scenario3 (beta = 0.4 with p, k fixed or
 * growing in n; n = 1024 by default), block, prediction-independent and
 * prediction-correlated, identification, and
 * comparison-{independent,correlated}-{weak,strong}. Replicate counts are
 * reduced defaults; override them per run.
 */
std::vector<ScenarioSpec> builtin_scenarios();
ScenarioSpec builtin_scenario(std::string_view name);

/// Scenarios from a YAML file, one document per scenario. A `builtin` key starts from that scenario.
std::vector<ScenarioSpec> load_scenarios(const std::filesystem::path& path);

/// One simulated data set as seen by a method.
struct MethodContext
{
    const Dataset& data;
    const Matrix& row_covariance;  ///< covariance of a design row
    const Vector& truth;           ///< for injected oracle methods only
    RngStream& rng;
};

struct MethodOutput
{
    Vector coefficients;  ///< length p; nonzero entries are the selection
    double intercept = 0.0;
};

using MethodFn = std::function<MethodOutput(const MethodContext&)>;
using MethodParams = std::map<std::string, double>;

/**
 * Maps method strings "name" or "name:key=value,..." to callables.
 * Built-ins: the criteria (aic bic ric mbic mbic2 maic maic2 ebic, run with
 * the standard search plan), slope-bh (c, q), slope-heuristic (q),
 * slope-inflated (delta, q), slope-cv, lasso-cv, lasso-bonferroni (q),
 * lasso-cv-threshold (backward mBIC2 on the CV-LASSO support) and
 * knockoff (q).
 */
class MethodRegistry
{
public:
    using Factory = std::function<MethodFn(const MethodParams&)>;

    static MethodRegistry builtin();

    void add(std::string name, Factory factory);
    bool contains(std::string_view name) const;
    std::vector<std::string> names() const;
    MethodFn resolve(std::string_view spec) const;

private:
    std::map<std::string, Factory, std::less<>> factories_;
};

struct RunOptions
{
    int threads = 1;
    int replicates = 0;  ///< overrides the scenario's count when positive
};

struct MetricsReport
{
    ScenarioSpec scenario;
    Index p = 0;
    Index k = 0;
    std::vector<ReplicateRecord> records;  ///< replicate-major, methods in listed order
    std::vector<MethodSummary> summaries;

    const MethodSummary& summary(std::string_view method) const;
};

/// Runs every method on every replicate; replicate r uses RngStream(seed, r) so results do not depend on threads.
MetricsReport run_scenario(const ScenarioSpec& spec, const MethodRegistry& registry, const RunOptions& options = {});

void write_records_csv(const std::filesystem::path& path, const MetricsReport& report);
void write_summary_csv(const std::filesystem::path& path, const MetricsReport& report);
/// Plot-ready rows: scenario, n, method, metric, value, se.
void write_long_csv(const std::filesystem::path& path, const std::vector<MetricsReport>& reports);

} // namespace fdrsel
