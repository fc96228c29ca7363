#include "fdrsel/scenario.hpp"

#include "fdrsel/csv.hpp"
#include "fdrsel/cv.hpp"
#include "fdrsel/errors.hpp"
#include "fdrsel/knockoffs.hpp"
#include "fdrsel/lasso.hpp"
#include "fdrsel/parallel.hpp"
#include "fdrsel/slope.hpp"
#include "fdrsel/stepwise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <regex>
#include <sstream>

namespace fdrsel {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

double to_number(const std::string& text, std::string_view what)
{
    double v = 0.0;
    if (!csv::parse_double(text, v)) throw Error(ErrorCode::invalid_argument, "cannot read " + std::string(what) + " from '" + text + "'");
    return v;
}

std::string fmt(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

double param(const MethodParams& params, const std::string& key, double fallback)
{
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

MethodOutput from_support(Index p, const Support& support, const Vector& coefficients, double intercept)
{
    MethodOutput out{Vector::Zero(p), intercept};
    for (std::size_t i = 0; i < support.size(); ++i) out.coefficients[support[i]] = coefficients[static_cast<Index>(i)];
    return out;
}

CvSpec quiet_cv(std::uint64_t seed)
{
    CvSpec cv;
    cv.seed = seed;
    cv.threads = 1;
    return cv;
}

} // namespace

// ---- rules -----------------------------------------------------------------

SizeRule SizeRule::fixed(Index value)
{
    SizeRule r;
    r.kind = Kind::constant;
    r.coef = static_cast<double>(value);
    return r;
}

SizeRule SizeRule::scaled_power(double coef, double exponent)
{
    SizeRule r;
    r.kind = Kind::power;
    r.coef = coef;
    r.exponent = exponent;
    return r;
}

SizeRule SizeRule::lookup(std::vector<std::pair<Index, Index>> table)
{
    SizeRule r;
    r.kind = Kind::table;
    r.table = std::move(table);
    return r;
}

Index SizeRule::evaluate(Index n) const
{
    switch (kind) {
    case Kind::constant: return static_cast<Index>(std::llround(coef));
    case Kind::power: return static_cast<Index>(std::llround(coef * std::pow(static_cast<double>(n), exponent)));
    case Kind::table:
        for (const auto& [key, value] : table)
            if (key == n) return value;
        throw Error(ErrorCode::invalid_argument, "n = " + std::to_string(n) + " is not listed in " + describe());
    }
    return 0;
}

std::string SizeRule::describe() const
{
    switch (kind) {
    case Kind::constant: return fmt(coef);
    case Kind::power:
        if (exponent == 1.0) return coef == 1.0 ? "n" : fmt(coef) + "*n";
        if (exponent == 0.5) return coef == 1.0 ? "sqrt(n)" : fmt(coef) + "*sqrt(n)";
        return (coef == 1.0 ? std::string() : fmt(coef) + "*") + "n^" + fmt(exponent);
    case Kind::table: {
        std::string s = "table(";
        for (std::size_t i = 0; i < table.size(); ++i)
            s += (i ? "," : "") + std::to_string(table[i].first) + ":" + std::to_string(table[i].second);
        return s + ")";
    }
    }
    return {};
}

SizeRule parse_size_rule(std::string_view raw)
{
    const std::string text = trim(raw);
    static const std::regex number(R"(^[0-9]+$)");
    static const std::regex power(R"(^(?:([0-9.eE+-]+)\*)?(n|sqrt\(n\))(?:\^([0-9.eE+-]+))?$)");
    static const std::regex table(R"(^table\((.*)\)$)");
    std::smatch m;
    if (std::regex_match(text, number)) return SizeRule::fixed(std::stoll(text));
    if (std::regex_match(text, m, power)) {
        const double coef = m[1].matched ? to_number(m[1].str(), "size rule") : 1.0;
        double exponent = m[3].matched ? to_number(m[3].str(), "size rule") : 1.0;
        if (m[2].str() == "sqrt(n)") exponent *= 0.5;
        return SizeRule::scaled_power(coef, exponent);
    }
    if (std::regex_match(text, m, table)) {
        std::vector<std::pair<Index, Index>> entries;
        std::stringstream ss(m[1].str());
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto colon = item.find(':');
            if (colon == std::string::npos) throw Error(ErrorCode::invalid_argument, "table entries look like n:value, got '" + item + "'");
            entries.emplace_back(std::stoll(trim(item.substr(0, colon))), std::stoll(trim(item.substr(colon + 1))));
        }
        if (entries.empty()) throw Error(ErrorCode::invalid_argument, "empty size table");
        return SizeRule::lookup(std::move(entries));
    }
    throw Error(ErrorCode::invalid_argument, "cannot parse size rule '" + text + "'");
}

std::string EffectRule::describe() const
{
    switch (kind) {
    case Kind::constant: return fmt(value);
    case Kind::sqrt_2log_p_over_k: return "sqrt-2log-p-over-k";
    case Kind::scaled: return "scaled(" + fmt(value) + ")";
    case Kind::normal: return "normal(" + fmt(value) + ")";
    }
    return {};
}

EffectRule parse_effect_rule(std::string_view raw)
{
    const std::string text = trim(raw);
    static const std::regex call(R"(^(scaled|normal)\(([^)]*)\)$)");
    std::smatch m;
    EffectRule r;
    if (text == "sqrt-2log-p-over-k") {
        r.kind = EffectRule::Kind::sqrt_2log_p_over_k;
    } else if (std::regex_match(text, m, call)) {
        r.kind = m[1].str() == "scaled" ? EffectRule::Kind::scaled : EffectRule::Kind::normal;
        r.value = to_number(trim(m[2].str()), "effect");
    } else {
        r.kind = EffectRule::Kind::constant;
        r.value = to_number(text, "effect");
    }
    if (r.kind == EffectRule::Kind::normal && !(r.value > 0.0))
        throw Error(ErrorCode::invalid_argument, "effect variance must be positive");
    return r;
}

std::string DesignSpec::describe() const
{
    std::string s = kind == Kind::identity ? "identity"
                    : kind == Kind::compound_symmetry ? "compound(" + fmt(rho) + ")"
                                                      : "block(" + fmt(rho) + ")";
    return scale_rows ? s + ", rows/sqrt(n)" : s;
}

DesignSpec parse_design(std::string_view raw)
{
    const std::string text = trim(raw);
    static const std::regex call(R"(^(compound|block)\(([^)]*)\)$)");
    std::smatch m;
    DesignSpec d;
    if (text == "identity") return d;
    if (!std::regex_match(text, m, call)) throw Error(ErrorCode::invalid_argument, "cannot parse design '" + text + "'");
    d.kind = m[1].str() == "compound" ? DesignSpec::Kind::compound_symmetry : DesignSpec::Kind::block;
    d.rho = to_number(trim(m[2].str()), "correlation");
    if (!(d.rho >= 0.0 && d.rho < 1.0)) throw Error(ErrorCode::invalid_argument, "correlation must lie in [0, 1)");
    return d;
}

// ---- scenarios -------------------------------------------------------------

Index ScenarioSpec::resolved_p() const
{
    return design.kind == DesignSpec::Kind::block ? BlockSpec::gwas_like(design.rho).p() : p.evaluate(n);
}

Index ScenarioSpec::resolved_k() const
{
    if (design.kind == DesignSpec::Kind::block)
        return static_cast<Index>(block_causal_columns(BlockSpec::gwas_like(design.rho)).size());
    return k.evaluate(n);
}

void ScenarioSpec::validate() const
{
    const std::string where = "scenario '" + name + "': ";
    if (n < 2) throw Error(ErrorCode::invalid_argument, where + "n must be at least 2");
    const Index pp = resolved_p(), kk = resolved_k();
    if (pp < 1) throw Error(ErrorCode::invalid_argument, where + "p must be positive");
    if (kk < 0 || kk > pp) throw Error(ErrorCode::invalid_argument, where + "need 0 <= k <= p");
    if (replicates < 1) throw Error(ErrorCode::invalid_argument, where + "replicates must be at least 1");
    if (!(noise_sd > 0.0)) throw Error(ErrorCode::invalid_argument, where + "noise sd must be positive");
    if (methods.empty()) throw Error(ErrorCode::invalid_argument, where + "no methods listed");
}

SigmaModel ScenarioSpec::sigma_model() const
{
    switch (design.kind) {
    case DesignSpec::Kind::identity: return IdentityCov{};
    case DesignSpec::Kind::compound_symmetry: return CompoundSymmetry{design.rho};
    case DesignSpec::Kind::block: return BlockSpec::gwas_like(design.rho);
    }
    return IdentityCov{};
}

std::vector<Index> ScenarioSpec::causal_columns() const
{
    if (design.kind == DesignSpec::Kind::block) return block_causal_columns(BlockSpec::gwas_like(design.rho));
    std::vector<Index> out(static_cast<std::size_t>(resolved_k()));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<Index>(i);
    return out;
}

std::vector<Index> block_causal_columns(const BlockSpec& blocks)
{
    std::vector<Index> out;
    Index offset = 0;
    // blocks arrive grouped by size; within each group of equal sizes the
    // first gets 3 causal columns, then 2, then 1, then none
    std::size_t i = 0;
    while (i < blocks.block_sizes.size()) {
        std::size_t j = i;
        while (j < blocks.block_sizes.size() && blocks.block_sizes[j] == blocks.block_sizes[i]) ++j;
        for (std::size_t b = i; b < j; ++b) {
            const Index want = std::max<Index>(0, 3 - static_cast<Index>(b - i));
            for (Index c = 0; c < std::min(want, blocks.block_sizes[b]); ++c) out.push_back(offset + c);
            offset += blocks.block_sizes[b];
        }
        i = j;
    }
    for (Index c = 0; c < std::min<Index>(4, blocks.independent); ++c) out.push_back(offset + c);
    return out;
}

std::vector<ScenarioSpec> builtin_scenarios()
{
    const std::vector<std::string> criteria{"bic", "mbic", "mbic2", "maic", "maic2"};
    std::vector<ScenarioSpec> out;

    auto table_cell = [&](std::string name, SizeRule p, SizeRule k) {
        ScenarioSpec s;
        s.name = std::move(name);
        s.n = 1024;
        s.p = std::move(p);
        s.k = std::move(k);
        s.effect.value = 0.4;
        s.replicates = 200;
        s.methods = criteria;
        return s;
    };
    out.push_back(table_cell("scenario0", SizeRule::fixed(49), SizeRule::fixed(0)));
    out.push_back(table_cell("scenario1", SizeRule::fixed(49), SizeRule::fixed(5)));
    out.push_back(table_cell("scenario2", SizeRule::scaled_power(7.0, 0.5),
                             SizeRule::lookup({{49, 5}, {100, 7}, {225, 10}, {529, 13}, {1024, 16}})));
    out.push_back(table_cell("scenario3", SizeRule::scaled_power(1.0, 1.0),
                             SizeRule::lookup({{49, 5}, {100, 7}, {225, 10}, {529, 15}, {1024, 20}})));

    {
        ScenarioSpec s;
        s.name = "block";
        s.n = 250;
        s.design.kind = DesignSpec::Kind::block;
        s.p = SizeRule::fixed(256);
        s.k = SizeRule::fixed(28);
        s.effect.kind = EffectRule::Kind::normal;
        s.effect.value = 0.5;
        s.replicates = 300;
        s.methods = criteria;
        out.push_back(s);
    }
    for (bool correlated : {false, true}) {
        ScenarioSpec s;
        s.name = correlated ? "prediction-correlated" : "prediction-independent";
        s.n = 1000;
        s.p = SizeRule::scaled_power(1.0, 1.0);
        s.k = SizeRule::fixed(100);
        s.effect.kind = EffectRule::Kind::sqrt_2log_p_over_k;
        s.design.kind = correlated ? DesignSpec::Kind::compound_symmetry : DesignSpec::Kind::identity;
        s.design.rho = correlated ? 0.5 : 0.0;
        s.design.scale_rows = true;
        s.replicates = 20;
        s.methods = {"slope-cv", "lasso-cv"};
        out.push_back(s);
    }
    {
        ScenarioSpec s;
        s.name = "identification";
        s.n = 200;
        s.p = SizeRule::scaled_power(0.05, 1.5);
        s.k = SizeRule::scaled_power(1.0, 0.5);
        s.effect.kind = EffectRule::Kind::scaled;
        s.effect.value = 0.9;
        s.design.scale_rows = true;
        s.replicates = 100;
        s.methods = {"slope-bh", "slope-inflated:delta=0.05", "slope-inflated:delta=0.1", "slope-heuristic",
                     "lasso-bonferroni"};
        out.push_back(s);
    }
    for (bool correlated : {false, true})
        for (bool strong : {false, true}) {
            ScenarioSpec s;
            s.name = std::string("comparison-") + (correlated ? "correlated" : "independent") + (strong ? "-strong" : "-weak");
            s.n = 500;
            s.p = SizeRule::scaled_power(1.0, 1.0);
            s.k = SizeRule::fixed(40);
            s.effect.kind = EffectRule::Kind::scaled;
            s.effect.value = strong ? 2.0 : 1.3;
            s.design.kind = correlated ? DesignSpec::Kind::compound_symmetry : DesignSpec::Kind::identity;
            s.design.rho = correlated ? 0.5 : 0.0;
            s.design.scale_rows = true;
            s.replicates = 40;
            s.methods = {"mbic2", correlated ? "slope-bh" : "slope-heuristic", "lasso-cv", "knockoff"};
            out.push_back(s);
        }
    return out;
}

ScenarioSpec builtin_scenario(std::string_view name)
{
    for (auto& s : builtin_scenarios())
        if (s.name == name) return s;
    std::string known;
    for (const auto& s : builtin_scenarios()) known += (known.empty() ? "" : ", ") + s.name;
    throw Error(ErrorCode::invalid_argument, "unknown scenario '" + std::string(name) + "' (known: " + known + ")");
}

// ---- methods ---------------------------------------------------------------

void MethodRegistry::add(std::string name, Factory factory)
{
    factories_[std::move(name)] = std::move(factory);
}

bool MethodRegistry::contains(std::string_view name) const
{
    return factories_.find(name) != factories_.end();
}

std::vector<std::string> MethodRegistry::names() const
{
    std::vector<std::string> out;
    for (const auto& [name, f] : factories_) out.push_back(name);
    return out;
}

MethodFn MethodRegistry::resolve(std::string_view spec) const
{
    const std::string text = trim(spec);
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    const auto it = factories_.find(name);
    if (it == factories_.end()) throw Error(ErrorCode::invalid_argument, "unknown method '" + name + "'");
    MethodParams params;
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw Error(ErrorCode::invalid_argument, "method parameters look like key=value, got '" + item + "'");
            params[trim(item.substr(0, eq))] = to_number(trim(item.substr(eq + 1)), "method parameter");
        }
    }
    return it->second(params);
}

MethodRegistry MethodRegistry::builtin()
{
    MethodRegistry reg;
    for (const char* name : {"aic", "bic", "ric", "mbic", "mbic2", "maic", "maic2", "ebic"}) {
        const CriterionKind kind = parse_criterion(name);
        reg.add(name, [kind](const MethodParams& prm) -> MethodFn {
            CriterionSpec base(kind);
            base.E = param(prm, "E", base.E);
            base.constant = param(prm, "const", base.constant);
            base.kappa = param(prm, "kappa", base.kappa);
            return [base](const MethodContext& ctx) {
                CriterionSpec spec = base;
                spec.p_total = ctx.data.p();
                const FitResult fit = run_plan(ctx.data, SearchPlan::standard(spec));
                return from_support(ctx.data.p(), fit.support, fit.coefficients, fit.intercept);
            };
        });
    }
    auto slope_with = [](LambdaRule rule, LambdaParams defaults) {
        return [rule, defaults](const MethodParams& prm) -> MethodFn {
            LambdaParams lp = defaults;
            lp.c = param(prm, "c", lp.c);
            lp.q = param(prm, "q", lp.q);
            lp.delta = param(prm, "delta", lp.delta);
            lp.sigma = param(prm, "sigma", lp.sigma);
            return [rule, lp](const MethodContext& ctx) {
                LambdaParams use = lp;
                use.n = ctx.data.n();
                LambdaSequence seq = make_lambda(rule, ctx.data.p(), use);
                if (rule == LambdaRule::bh || rule == LambdaRule::inflated_bh) seq = seq.scaled(lp.sigma);
                const SlopeFit fit = fit_slope(ctx.data, seq);
                return MethodOutput{fit.coefficients, fit.intercept};
            };
        };
    };
    reg.add("slope-bh", slope_with(LambdaRule::bh, {}));
    reg.add("slope-heuristic", slope_with(LambdaRule::heuristic, {}));
    reg.add("slope-inflated", slope_with(LambdaRule::inflated_bh, {}));
    reg.add("slope-cv", [](const MethodParams& prm) -> MethodFn {
        const double sigma = param(prm, "sigma", 1.0);
        return [sigma](const MethodContext& ctx) {
            CvSpec cv = quiet_cv(ctx.rng());
            cv.sigma = sigma;
            const CvResult r = cv_select(ctx.data, cv, CvMethod::slope);
            return MethodOutput{r.coefficients, r.intercept};
        };
    });
    reg.add("lasso-cv", [](const MethodParams&) -> MethodFn {
        return [](const MethodContext& ctx) {
            const CvResult r = cv_select(ctx.data, quiet_cv(ctx.rng()), CvMethod::lasso);
            return MethodOutput{r.coefficients, r.intercept};
        };
    });
    reg.add("lasso-bonferroni", [](const MethodParams& prm) -> MethodFn {
        const double q = param(prm, "q", 0.2), sigma = param(prm, "sigma", 1.0);
        return [q, sigma](const MethodContext& ctx) {
            const double lambda = sigma * make_lambda(LambdaRule::bh, ctx.data.p(), {.c = 1.0, .q = q}).values[0];
            const LassoFit fit = fit_lasso(ctx.data, lambda);
            return MethodOutput{fit.coefficients, fit.intercept};
        };
    });
    reg.add("lasso-cv-threshold", [](const MethodParams& prm) -> MethodFn {
        CriterionSpec base(CriterionKind::mbic2);
        base.E = param(prm, "E", base.E);
        return [base](const MethodContext& ctx) {
            const CvResult r = cv_select(ctx.data, quiet_cv(ctx.rng()), CvMethod::lasso);
            CriterionSpec spec = base;
            spec.p_total = ctx.data.p();
            const FitResult fit = backward(ctx.data, spec, r.support());
            return from_support(ctx.data.p(), fit.support, fit.coefficients, fit.intercept);
        };
    });
    reg.add("knockoff", [](const MethodParams& prm) -> MethodFn {
        const double q = param(prm, "q", 0.2);
        return [q](const MethodContext& ctx) {
            const KnockoffResult r = knockoff_filter(ctx.data, ctx.row_covariance, q, ctx.rng, quiet_cv(ctx.rng()));
            // least-squares refit of the selection for the error metrics
            const Support support(r.selected.begin(), r.selected.end());
            MethodOutput out{Vector::Zero(ctx.data.p()), 0.0};
            for (Index j : support) out.coefficients[j] = std::numeric_limits<double>::min();
            if (!support.empty() && static_cast<Index>(support.size()) < ctx.data.n() - 1) {
                const SubmodelFit sub = fit_submodel(ctx.data, support);
                for (std::size_t i = 0; i < support.size(); ++i)
                    if (sub.coefficients[static_cast<Index>(i)] != 0.0)
                        out.coefficients[support[i]] = sub.coefficients[static_cast<Index>(i)];
                out.intercept = sub.intercept;
            }
            return out;
        };
    });
    return reg;
}

// ---- runs ------------------------------------------------------------------

const MethodSummary& MetricsReport::summary(std::string_view method) const
{
    for (const auto& s : summaries)
        if (s.method == method) return s;
    throw Error(ErrorCode::invalid_argument, "no summary for method '" + std::string(method) + "'");
}

MetricsReport run_scenario(const ScenarioSpec& spec, const MethodRegistry& registry, const RunOptions& options)
{
    spec.validate();
    MetricsReport report;
    report.scenario = spec;
    if (options.replicates > 0) report.scenario.replicates = options.replicates;
    report.p = spec.resolved_p();
    report.k = spec.resolved_k();
    const Index n = spec.n, p = report.p;

    std::vector<MethodFn> methods;
    for (const auto& m : spec.methods) methods.push_back(registry.resolve(m));

    const GaussianDesign design(p, spec.sigma_model());
    const double row_scale = spec.design.scale_rows ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0;
    const Matrix row_cov = design.sigma() * (row_scale * row_scale);
    const std::vector<Index> causal = spec.causal_columns();

    const auto reps = static_cast<std::size_t>(report.scenario.replicates);
    std::vector<std::vector<ReplicateRecord>> per_rep(reps);
    parallel_for(reps, options.threads, [&](std::size_t r) {
        RngStream rng(spec.seed, r);
        const Matrix X = design.draw(n, row_scale, rng);
        Vector beta = Vector::Zero(p);
        for (Index j : causal) {
            switch (spec.effect.kind) {
            case EffectRule::Kind::constant: beta[j] = spec.effect.value; break;
            case EffectRule::Kind::sqrt_2log_p_over_k:
                beta[j] = std::sqrt(2.0 * std::log(static_cast<double>(p) / static_cast<double>(causal.size())));
                break;
            case EffectRule::Kind::scaled: beta[j] = spec.effect.value * std::sqrt(2.0 * std::log(static_cast<double>(p))); break;
            case EffectRule::Kind::normal: beta[j] = std::sqrt(spec.effect.value) * rng.normal(); break;
            }
        }
        Vector y = X * beta;
        for (Index i = 0; i < n; ++i) y[i] += spec.noise_sd * rng.normal();
        const Dataset data(std::move(y), X);

        for (std::size_t m = 0; m < methods.size(); ++m) {
            RngStream method_rng = rng.substream(static_cast<std::uint32_t>(m + 1));
            ReplicateRecord rec;
            try {
                const MethodContext ctx{data, row_cov, beta, method_rng};
                const MethodOutput out = methods[m](ctx);
                rec = score_replicate(data.X(), beta, out.coefficients);
            } catch (const std::exception& e) {
                rec.failed = true;
                rec.error = e.what();
            }
            rec.replicate = static_cast<int>(r);
            rec.method = spec.methods[m];
            per_rep[r].push_back(std::move(rec));
        }
    });
    for (auto& v : per_rep)
        for (auto& rec : v) report.records.push_back(std::move(rec));
    report.summaries = summarize(report.records);
    return report;
}

void write_records_csv(const std::filesystem::path& path, const MetricsReport& report)
{
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::io, "cannot write " + path.string());
    csv::write_row(os, {"scenario", "replicate", "method", "failed", "selected", "tp", "fp", "fn", "sq_error_beta",
                        "sq_error_mu", "beta_norm2", "mu_norm2", "error"});
    for (const auto& r : report.records)
        csv::write_row(os, {report.scenario.name, std::to_string(r.replicate), r.method, r.failed ? "1" : "0",
                            std::to_string(r.selected), std::to_string(r.true_positives),
                            std::to_string(r.false_positives), std::to_string(r.false_negatives),
                            csv::format_double(r.sq_error_beta), csv::format_double(r.sq_error_mu),
                            csv::format_double(r.beta_norm2), csv::format_double(r.mu_norm2), r.error});
}

namespace {

std::vector<std::pair<std::string, Estimate>> metric_list(const MethodSummary& s)
{
    return {{"fdr", s.fdr},       {"fwer", s.fwer}, {"power", s.power},
            {"misclassifications", s.misclassifications}, {"selected", s.selected},
            {"mse", s.mse},       {"msp", s.msp},   {"relative_mse", s.relative_mse},
            {"relative_msp", s.relative_msp}};
}

} // namespace

void write_summary_csv(const std::filesystem::path& path, const MetricsReport& report)
{
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::io, "cannot write " + path.string());
    csv::Row header{"scenario", "n", "p", "k", "method", "replicates", "failures"};
    for (const auto& [name, e] : metric_list(MethodSummary{})) {
        header.push_back(name);
        header.push_back(name + "_se");
    }
    csv::write_row(os, header);
    for (const auto& s : report.summaries) {
        csv::Row row{report.scenario.name, std::to_string(report.scenario.n), std::to_string(report.p),
                     std::to_string(report.k), s.method, std::to_string(s.replicates), std::to_string(s.failures)};
        for (const auto& [name, e] : metric_list(s)) {
            row.push_back(csv::format_double(e.mean));
            row.push_back(csv::format_double(e.se));
        }
        csv::write_row(os, row);
    }
}

void write_long_csv(const std::filesystem::path& path, const std::vector<MetricsReport>& reports)
{
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::io, "cannot write " + path.string());
    csv::write_row(os, {"scenario", "n", "method", "metric", "value", "se"});
    for (const auto& report : reports)
        for (const auto& s : report.summaries)
            for (const auto& [name, e] : metric_list(s))
                csv::write_row(os, {report.scenario.name, std::to_string(report.scenario.n), s.method, name,
                                    csv::format_double(e.mean), csv::format_double(e.se)});
}

} // namespace fdrsel
