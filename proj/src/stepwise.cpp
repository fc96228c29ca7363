#include "fdrsel/stepwise.hpp"

#include "fdrsel/distributions.hpp"
#include "fdrsel/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <memory>
#include <regex>
#include <sstream>

namespace fdrsel {

namespace {

struct Move
{
    Index column = -1;
    double value = 0.0;
};

bool improves(double candidate, double current)
{
    return candidate < current - 1e-9 * (1.0 + std::fabs(current));
}

void validate_support(const Support& s, Index p)
{
    Support sorted = s;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw Error(ErrorCode::invalid_argument, "support contains duplicate columns");
    for (Index j : sorted)
        if (j < 0 || j >= p) throw Error(ErrorCode::invalid_argument, "support index " + std::to_string(j) + " out of range");
}

class Searcher
{
public:
    Searcher(const Dataset& d, const CriterionSpec& spec, Index cap)
        : d_(d), spec_(spec), cap_(std::min(cap, d.n() - 2)), in_model_(static_cast<std::size_t>(d.p()), false)
    {
        spec_.p_total = spec.resolved_p(d.p());
    }
    virtual ~Searcher() = default;

    virtual void reset(const Support& support) = 0;
    virtual std::optional<Move> best_add(const std::vector<Index>& pool) = 0;
    virtual std::optional<Move> best_drop() = 0;
    virtual void add(Index column) = 0;
    virtual void drop(Index column) = 0;

    double value() const { return value_; }
    const Support& support() const { return support_; }
    Index skipped() const { return skipped_; }
    bool can_add() const { return static_cast<Index>(support_.size()) < cap_; }

protected:
    double crit(double neg2ll, Index k) const { return neg2ll + penalty(spec_, k, d_.n()); }

    void mark(const Support& s)
    {
        std::fill(in_model_.begin(), in_model_.end(), false);
        for (Index j : s) in_model_[static_cast<std::size_t>(j)] = true;
        support_ = s;
    }

    const Dataset& d_;
    CriterionSpec spec_;
    Index cap_;
    std::vector<bool> in_model_;
    Support support_;
    double value_ = 0.0;
    Index skipped_ = 0;
};

// Least squares search on an orthonormal basis of [1, X_S]. Adding column j
// lowers the RSS by (r'x_j)^2 / (|x_j|^2 - |Q'x_j|^2); both terms are kept
// up to date for every column.
class GaussianSearcher final : public Searcher
{
public:
    GaussianSearcher(const Dataset& d, const CriterionSpec& spec, Index cap) : Searcher(d, spec, cap)
    {
        col_norm2_ = d.X().colwise().squaredNorm().transpose();
    }

    void reset(const Support& support) override
    {
        mark(support);
        const Index n = d_.n();
        Q_.resize(n, 0);
        append_basis(Vector::Ones(n), true);
        for (Index j : support_)
            if (!append_basis(d_.X().col(j), false))
                throw FitError(ErrorCode::rank_deficient, "starting support is rank deficient");
        residual_ = d_.y() - Q_ * (Q_.transpose() * d_.y());
        xr_ = d_.X().transpose() * residual_;
        proj2_ = (Q_.transpose() * d_.X()).colwise().squaredNorm().transpose();
        refresh_value();
    }

    std::optional<Move> best_add(const std::vector<Index>& pool) override
    {
        if (!can_add()) return std::nullopt;
        double best_gain = -1.0;
        Index best = -1;
        for (Index j : pool) {
            if (in_model_[static_cast<std::size_t>(j)]) continue;
            const double resid_norm2 = col_norm2_[j] - proj2_[j];
            if (resid_norm2 < 1e-10 * col_norm2_[j] || resid_norm2 <= 0.0) {
                ++skipped_;
                continue;
            }
            const double gain = xr_[j] * xr_[j] / resid_norm2;
            if (gain > best_gain) {
                best_gain = gain;
                best = j;
            }
        }
        if (best < 0) return std::nullopt;
        const double rss = std::max(rss_ - best_gain, 0.0);
        return Move{best, crit(gaussian_neg2_loglik(rss, d_.n(), spec_.known_sigma), static_cast<Index>(support_.size()) + 1)};
    }

    std::optional<Move> best_drop() override
    {
        if (support_.empty()) return std::nullopt;
        const Index k = static_cast<Index>(support_.size());
        Matrix Z(d_.n(), k + 1);
        Z.col(0).setOnes();
        for (Index c = 0; c < k; ++c) Z.col(c + 1) = d_.X().col(support_[static_cast<std::size_t>(c)]);
        Eigen::HouseholderQR<Matrix> qr(Z);
        const Matrix R = qr.matrixQR().topRows(k + 1).triangularView<Eigen::Upper>();
        const Matrix Rinv = R.triangularView<Eigen::Upper>().solve(Matrix::Identity(k + 1, k + 1));
        const Vector beta = qr.solve(d_.y());

        double best_increase = std::numeric_limits<double>::infinity();
        Index best = -1;
        for (Index c = 0; c < k; ++c) {
            // RSS increase from removing one column: beta^2 / [(Z'Z)^{-1}]_cc
            const double increase = beta[c + 1] * beta[c + 1] / Rinv.row(c + 1).squaredNorm();
            const Index j = support_[static_cast<std::size_t>(c)];
            if (increase < best_increase || (increase == best_increase && j < best)) {
                best_increase = increase;
                best = j;
            }
        }
        return Move{best, crit(gaussian_neg2_loglik(rss_ + best_increase, d_.n(), spec_.known_sigma), k - 1)};
    }

    void add(Index column) override
    {
        if (!append_basis(d_.X().col(column), false))
            throw FitError(ErrorCode::rank_deficient, "column " + std::to_string(column) + " is collinear with the model");
        const auto q = Q_.col(Q_.cols() - 1);
        const double qy = q.dot(residual_);
        residual_ -= qy * q;
        const Vector qX = d_.X().transpose() * q;
        xr_ -= qy * qX;
        proj2_ += qX.cwiseAbs2();
        support_.push_back(column);
        in_model_[static_cast<std::size_t>(column)] = true;
        refresh_value();
    }

    void drop(Index column) override
    {
        Support next;
        for (Index j : support_)
            if (j != column) next.push_back(j);
        reset(next);
    }

private:
    // Modified Gram-Schmidt with one reorthogonalization pass.
    bool append_basis(const Vector& x, bool force)
    {
        Vector v = x;
        for (int pass = 0; pass < 2; ++pass)
            for (Index c = 0; c < Q_.cols(); ++c) v -= Q_.col(c).dot(v) * Q_.col(c);
        const double norm = v.norm();
        if (!force && norm * norm < 1e-10 * x.squaredNorm()) return false;
        Q_.conservativeResize(Eigen::NoChange, Q_.cols() + 1);
        Q_.col(Q_.cols() - 1) = v / norm;
        return true;
    }

    void refresh_value()
    {
        rss_ = residual_.squaredNorm();
        value_ = crit(gaussian_neg2_loglik(rss_, d_.n(), spec_.known_sigma), static_cast<Index>(support_.size()));
    }

    Matrix Q_;
    Vector residual_;
    Vector xr_;
    Vector proj2_;
    Vector col_norm2_;
    double rss_ = 0.0;
};

// Logistic search: every candidate model is refitted by IRLS.
class BinomialSearcher final : public Searcher
{
public:
    using Searcher::Searcher;

    void reset(const Support& support) override
    {
        mark(support);
        value_ = evaluate(support_).value();
    }

    std::optional<Move> best_add(const std::vector<Index>& pool) override
    {
        if (!can_add()) return std::nullopt;
        std::optional<Move> best;
        Support trial = support_;
        trial.push_back(-1);
        for (Index j : pool) {
            if (in_model_[static_cast<std::size_t>(j)]) continue;
            trial.back() = j;
            const auto v = evaluate(trial);
            if (!v) {
                ++skipped_;
                continue;
            }
            if (!best || *v < best->value) best = Move{j, *v};
        }
        return best;
    }

    std::optional<Move> best_drop() override
    {
        std::optional<Move> best;
        for (std::size_t c = 0; c < support_.size(); ++c) {
            Support trial = support_;
            trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(c));
            const auto v = evaluate(trial);
            if (!v) {
                ++skipped_;
                continue;
            }
            if (!best || *v < best->value || (*v == best->value && support_[c] < best->column))
                best = Move{support_[c], *v};
        }
        return best;
    }

    void add(Index column) override
    {
        Support next = support_;
        next.push_back(column);
        reset(next);
    }

    void drop(Index column) override
    {
        Support next;
        for (Index j : support_)
            if (j != column) next.push_back(j);
        reset(next);
    }

private:
    std::optional<double> evaluate(const Support& s) const
    {
        try {
            const SubmodelFit fit = fit_submodel(d_, s);
            return crit(fit.deviance, static_cast<Index>(s.size()));
        } catch (const FitError&) {
            return std::nullopt;
        }
    }
};

std::unique_ptr<Searcher> make_searcher(const Dataset& d, const CriterionSpec& spec, const SearchOptions& options)
{
    const Index cap = options.k_cap ? *options.k_cap : k_cap(spec.kind, d.n(), spec.resolved_p(d.p()));
    if (d.family() == Family::binomial) return std::make_unique<BinomialSearcher>(d, spec, cap);
    return std::make_unique<GaussianSearcher>(d, spec, cap);
}

std::vector<Index> all_columns(Index p)
{
    std::vector<Index> cols(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) cols[static_cast<std::size_t>(j)] = j;
    return cols;
}

enum class Mode { forward, backward, both, fixed_steps };

void search(Searcher& s, Mode mode, const std::vector<Index>& pool, int steps, std::vector<TraceEntry>& trace)
{
    if (mode == Mode::fixed_steps) {
        for (int i = 0; i < steps; ++i) {
            const auto add = s.best_add(pool);
            if (!add) break;
            s.add(add->column);
            trace.push_back({TraceEntry::Action::add, add->column, s.value(), {}});
        }
        return;
    }
    for (;;) {
        std::optional<Move> add;
        std::optional<Move> drop;
        if (mode != Mode::backward) add = s.best_add(pool);
        if (mode != Mode::forward) drop = s.best_drop();
        const bool add_ok = add && improves(add->value, s.value());
        const bool drop_ok = drop && improves(drop->value, s.value());
        if (!add_ok && !drop_ok) break;
        if (drop_ok && (!add_ok || drop->value <= add->value)) {
            s.drop(drop->column);
            trace.push_back({TraceEntry::Action::drop, drop->column, s.value(), {}});
        } else {
            s.add(add->column);
            trace.push_back({TraceEntry::Action::add, add->column, s.value(), {}});
        }
    }
}

FitResult finish(const Dataset& d, const CriterionSpec& spec, Support support, std::vector<TraceEntry> trace,
                 Index skipped)
{
    std::sort(support.begin(), support.end());
    FitResult out;
    out.criterion = spec;
    out.criterion.p_total = spec.resolved_p(d.p());
    const SubmodelFit fit = fit_submodel(d, support);
    out.support = std::move(support);
    out.coefficients = fit.coefficients;
    out.intercept = fit.intercept;
    out.separation = fit.separation;
    out.criterion_value = neg2_loglik(d, fit, spec.known_sigma)
                          + penalty(out.criterion, static_cast<Index>(out.support.size()), d.n());
    out.trace = std::move(trace);
    out.skipped_candidates = skipped;
    return out;
}

FitResult run_single(const Dataset& d, const CriterionSpec& spec, const Support& start, SearchOptions options, Mode mode)
{
    validate_support(start, d.p());
    auto s = make_searcher(d, spec, options);
    s->reset(start);
    std::vector<TraceEntry> trace;
    search(*s, mode, all_columns(d.p()), 0, trace);
    return finish(d, spec, s->support(), std::move(trace), s->skipped());
}

std::string format_number(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

double parse_number(const std::string& text, const std::string& what)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::invalid_argument, "bad " + what + " '" + text + "'");
    }
}

} // namespace

const char* to_string(TraceEntry::Action action) noexcept
{
    switch (action) {
    case TraceEntry::Action::stage: return "stage";
    case TraceEntry::Action::screen: return "screen";
    case TraceEntry::Action::add: return "add";
    case TraceEntry::Action::drop: return "drop";
    }
    return "unknown";
}

std::vector<double> marginal_pvalues(const Dataset& d)
{
    const Index n = d.n();
    std::vector<double> out(static_cast<std::size_t>(d.p()), 1.0);
    if (d.family() == Family::gaussian) {
        const Vector yc = d.y().array() - d.y().mean();
        const double syy = yc.squaredNorm();
        for (Index j = 0; j < d.p(); ++j) {
            const auto x = d.X().col(j);
            const Vector xc = x.array() - x.mean();
            const double sxx = xc.squaredNorm();
            if (sxx <= 1e-20 * (1.0 + x.squaredNorm())) continue;
            const double sxy = xc.dot(yc);
            const double rss = std::max(syy - sxy * sxy / sxx, 0.0);
            if (rss <= 1e-14 * syy) {
                out[static_cast<std::size_t>(j)] = 0.0;
                continue;
            }
            const double se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
            out[static_cast<std::size_t>(j)] = dist::t_two_sided_p(sxy / sxx / se, static_cast<double>(n - 2));
        }
        return out;
    }
    for (Index j = 0; j < d.p(); ++j) {
        SubmodelFit fit;
        try {
            fit = fit_submodel(d, {j});
        } catch (const FitError&) {
            continue;
        }
        if (fit.separation) {
            out[static_cast<std::size_t>(j)] = 0.0;
            continue;
        }
        const auto x = d.X().col(j);
        Eigen::Matrix2d info = Eigen::Matrix2d::Zero();
        for (Index i = 0; i < n; ++i) {
            const double mu = 1.0 / (1.0 + std::exp(-(fit.intercept + fit.coefficients[0] * x[i])));
            const double w = mu * (1.0 - mu);
            info(0, 0) += w;
            info(0, 1) += w * x[i];
            info(1, 1) += w * x[i] * x[i];
        }
        info(1, 0) = info(0, 1);
        const double var = info.inverse()(1, 1);
        if (!(var > 0.0) || !std::isfinite(var)) continue;
        out[static_cast<std::size_t>(j)] = dist::z_two_sided_p(fit.coefficients[0] / std::sqrt(var));
    }
    return out;
}

Support marginal_screen(const Dataset& d, double threshold)
{
    const auto pv = marginal_pvalues(d);
    Support keep;
    for (std::size_t j = 0; j < pv.size(); ++j)
        if (pv[j] <= threshold) keep.push_back(static_cast<Index>(j));
    return keep;
}

FitResult forward(const Dataset& d, const CriterionSpec& spec, const Support& start, SearchOptions options)
{
    return run_single(d, spec, start, options, Mode::forward);
}

FitResult backward(const Dataset& d, const CriterionSpec& spec, const Support& start, SearchOptions options)
{
    return run_single(d, spec, start, options, Mode::backward);
}

FitResult stepwise(const Dataset& d, const CriterionSpec& spec, const Support& start, SearchOptions options)
{
    return run_single(d, spec, start, options, Mode::both);
}

FitResult run_plan(const Dataset& d, const SearchPlan& plan, const Support& start, SearchOptions options)
{
    validate_support(start, d.p());
    const SearchStage* last_scored = nullptr;
    for (const auto& st : plan.stages)
        if (!std::holds_alternative<ScreenStage>(st)) last_scored = &st;
    if (!last_scored) throw Error(ErrorCode::invalid_argument, "search plan has no criterion stage");

    auto criterion_of = [](const SearchStage& st) -> CriterionSpec {
        return std::visit(
            [](const auto& s) -> CriterionSpec {
                if constexpr (std::is_same_v<std::decay_t<decltype(s)>, ScreenStage>) return {};
                else return s.criterion;
            },
            st);
    };
    const CriterionSpec final_spec = criterion_of(*last_scored);

    Support current = start;
    std::vector<Index> pool = all_columns(d.p());
    std::vector<TraceEntry> trace;
    Index skipped = 0;
    std::optional<std::pair<double, Support>> best;

    for (const auto& st : plan.stages) {
        trace.push_back({TraceEntry::Action::stage, -1, 0.0, describe(st)});
        if (const auto* sc = std::get_if<ScreenStage>(&st)) {
            pool = marginal_screen(d, sc->threshold);
            trace.push_back({TraceEntry::Action::screen, static_cast<Index>(pool.size()), 0.0, {}});
            continue;
        }
        const CriterionSpec spec = criterion_of(st);
        auto s = make_searcher(d, spec, options);
        s->reset(current);
        trace.back().value = s->value();
        if (std::holds_alternative<ForwardStage>(st)) {
            search(*s, Mode::forward, pool, 0, trace);
        } else if (std::holds_alternative<BackwardStage>(st)) {
            search(*s, Mode::backward, pool, 0, trace);
        } else if (std::holds_alternative<StepwiseStage>(st)) {
            pool = all_columns(d.p());
            search(*s, Mode::both, pool, 0, trace);
        } else {
            search(*s, Mode::fixed_steps, pool, std::get<ForwardStepsStage>(st).count, trace);
        }
        current = s->support();
        skipped += s->skipped();
        if (plan.return_best) {
            const double v = criterion_value(d, final_spec, current);
            if (!best || improves(v, best->first)) best = std::make_pair(v, current);
        }
    }
    if (plan.return_best && best) current = best->second;
    return finish(d, final_spec, std::move(current), std::move(trace), skipped);
}

std::string describe(const SearchStage& stage)
{
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ScreenStage>) return "screen(" + format_number(s.threshold) + ")";
            else if constexpr (std::is_same_v<T, ForwardStage>) return std::string("forward(") + to_string(s.criterion.kind) + ")";
            else if constexpr (std::is_same_v<T, BackwardStage>) return std::string("backward(") + to_string(s.criterion.kind) + ")";
            else if constexpr (std::is_same_v<T, StepwiseStage>) return std::string("stepwise(") + to_string(s.criterion.kind) + ")";
            else return std::string("forward-steps(") + to_string(s.criterion.kind) + "," + std::to_string(s.count) + ")";
        },
        stage);
}

SearchPlan SearchPlan::standard(const CriterionSpec& criterion)
{
    CriterionSpec bic = criterion;
    bic.kind = CriterionKind::bic;
    return {{ScreenStage{0.15}, ForwardStage{bic}, BackwardStage{criterion}, StepwiseStage{criterion}}, false};
}

SearchPlan SearchPlan::escape_local_minimum(const CriterionSpec& criterion)
{
    CriterionSpec bic = criterion;
    bic.kind = CriterionKind::bic;
    return {{StepwiseStage{criterion}, ForwardStepsStage{bic, 2}, StepwiseStage{criterion}}, true};
}

SearchPlan SearchPlan::parse(std::string_view text, const CriterionSpec& base)
{
    SearchPlan plan;
    static const std::regex token(R"(\s*([A-Za-z-]+)\s*(?:\(([^)]*)\))?\s*(,|$))");
    std::string input(text);
    auto it = input.cbegin();
    std::smatch m;
    while (it != input.cend()) {
        if (!std::regex_search(it, input.cend(), m, token, std::regex_constants::match_continuous))
            throw Error(ErrorCode::invalid_argument, "cannot parse search plan '" + input + "'");
        const std::string name = lower(m[1].str());
        std::vector<std::string> args;
        if (m[2].matched) {
            std::stringstream ss(m[2].str());
            std::string a;
            while (std::getline(ss, a, ',')) args.push_back(trim(a));
        }
        auto crit = [&](std::size_t i) {
            if (args.size() <= i) throw Error(ErrorCode::invalid_argument, name + " needs a criterion");
            CriterionSpec s = base;
            s.kind = parse_criterion(args[i]);
            return s;
        };
        if (name == "screen") {
            plan.stages.push_back(ScreenStage{args.empty() ? 0.15 : parse_number(args[0], "screen threshold")});
        } else if (name == "forward") {
            plan.stages.push_back(ForwardStage{crit(0)});
        } else if (name == "backward") {
            plan.stages.push_back(BackwardStage{crit(0)});
        } else if (name == "stepwise") {
            plan.stages.push_back(StepwiseStage{crit(0)});
        } else if (name == "forward-steps") {
            const int count = args.size() > 1 ? static_cast<int>(parse_number(args[1], "step count")) : 1;
            if (count < 1) throw Error(ErrorCode::invalid_argument, "forward-steps count must be >= 1");
            plan.stages.push_back(ForwardStepsStage{crit(0), count});
        } else if (name == "best") {
            plan.return_best = true;
        } else {
            throw Error(ErrorCode::invalid_argument, "unknown search stage '" + name + "'");
        }
        it = m[0].second;
        if (m[3].length() == 0) break;
    }
    if (plan.stages.empty()) throw Error(ErrorCode::invalid_argument, "empty search plan");
    return plan;
}

std::string SearchPlan::describe() const
{
    std::string out;
    for (const auto& st : stages) {
        if (!out.empty()) out += ",";
        out += fdrsel::describe(st);
    }
    if (return_best) out += ",best";
    return out;
}

} // namespace fdrsel
