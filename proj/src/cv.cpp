#include "fdrsel/cv.hpp"

#include "fdrsel/csv.hpp"
#include "fdrsel/errors.hpp"
#include "fdrsel/parallel.hpp"
#include "fdrsel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace fdrsel {

namespace {

constexpr double missing = std::numeric_limits<double>::quiet_NaN();

double held_out_error(const Dataset& test, const Vector& beta, double b0, CvError error)
{
    const Vector eta = (test.X() * beta).array() + b0;
    double total = 0.0;
    for (Index i = 0; i < test.n(); ++i) {
        const double y = test.y()[i], e = eta[i];
        if (error == CvError::squared) {
            total += (y - e) * (y - e);
        } else {
            const double sp = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
            total += 2.0 * (sp - y * e);
        }
    }
    return total / static_cast<double>(test.n());
}

std::vector<Index> complement(const std::vector<Index>& rows, Index n)
{
    std::vector<char> mark(static_cast<std::size_t>(n), 0);
    for (Index i : rows) mark[static_cast<std::size_t>(i)] = 1;
    std::vector<Index> out;
    for (Index i = 0; i < n; ++i)
        if (!mark[static_cast<std::size_t>(i)]) out.push_back(i);
    return out;
}

// Per-fold errors for every lasso grid point; NaN where the fold's path stopped early.
std::vector<double> lasso_fold(const Dataset& train, const Dataset& test, const std::vector<double>& grid,
                               const CvSpec& spec, CvError error)
{
    std::vector<double> out(grid.size(), missing);
    const LassoPath path = lasso_path(train, grid, spec.lasso);
    for (Index k = 0; k < path.computed; ++k)
        out[static_cast<std::size_t>(k)] = held_out_error(test, path.coefficients.col(k), path.intercepts[k], error);
    return out;
}

std::vector<double> slope_fold(const Dataset& train, const Dataset& test, const std::vector<SlopeTuning>& grid,
                               const CvSpec& spec, CvError error)
{
    std::vector<double> out(grid.size(), missing);
    SlopeOptions options = spec.slope;
    options.tol_kkt = std::max(options.tol_kkt, spec.fold_tol_kkt);
    options.tol_objective = std::max(options.tol_objective, spec.fold_tol_objective);
    const SlopeSolver solver(train, options);
    // one warm-started path over c for each q
    std::map<double, std::vector<std::size_t>> by_q;
    for (std::size_t i = 0; i < grid.size(); ++i) by_q[grid[i].q].push_back(i);
    for (auto& [q, members] : by_q) {
        std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) { return grid[a].c > grid[b].c; });
        const LambdaSequence base = make_lambda(LambdaRule::bh, train.p(), {.c = 1.0, .q = q});
        SlopeFit previous;
        bool have_previous = false;
        for (std::size_t i : members) {
            try {
                SlopeFit f = solver.fit(base.scaled(spec.sigma * grid[i].c), have_previous ? &previous : nullptr);
                out[i] = held_out_error(test, f.coefficients, f.intercept, error);
                previous = std::move(f);
                have_previous = true;
            } catch (const Error&) {
                have_previous = false;
            }
        }
    }
    return out;
}

double penalty_level(const CvPoint& pt, CvMethod method, Index p)
{
    if (method == CvMethod::lasso) return pt.lambda;
    return pt.c * make_lambda(LambdaRule::bh, p, {.c = 1.0, .q = pt.q}).values.mean();
}

} // namespace

CvMethod parse_cv_method(std::string_view name)
{
    if (name == "lasso") return CvMethod::lasso;
    if (name == "slope") return CvMethod::slope;
    throw Error(ErrorCode::invalid_argument, "unknown cross-validation method '" + std::string(name) + "'");
}

const char* to_string(CvMethod method) noexcept
{
    return method == CvMethod::lasso ? "lasso" : "slope";
}

std::vector<SlopeTuning> default_slope_grid()
{
    std::vector<SlopeTuning> grid;
    const double qs[] = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    for (double q : qs)
        for (int i = 0; i < 6; ++i) grid.push_back({3.0 * std::pow(0.5 / 3.0, i / 5.0), q});
    return grid;
}

std::vector<Index> CvResult::support() const
{
    std::vector<Index> out;
    for (Index j = 0; j < coefficients.size(); ++j)
        if (coefficients[j] != 0.0) out.push_back(j);
    return out;
}

std::vector<std::vector<Index>> make_folds(const Dataset& d, int folds, std::uint64_t seed)
{
    if (folds < 2) throw Error(ErrorCode::invalid_argument, "cross-validation needs at least 2 folds");
    if (d.n() < 2 * static_cast<Index>(folds))
        throw Error(ErrorCode::invalid_argument, "cross-validation needs n >= 2K (n = " + std::to_string(d.n())
                                                     + ", K = " + std::to_string(folds) + ")");
    RngStream rng(seed, 0xcf01d5);
    std::vector<std::vector<Index>> groups;
    if (d.family() == Family::binomial) {
        groups.resize(2);
        for (Index i = 0; i < d.n(); ++i) groups[d.y()[i] > 0.5 ? 1 : 0].push_back(i);
    } else {
        groups.emplace_back(static_cast<std::size_t>(d.n()));
        std::iota(groups[0].begin(), groups[0].end(), Index{0});
    }
    std::vector<std::vector<Index>> out(static_cast<std::size_t>(folds));
    std::size_t slot = 0;
    for (auto& g : groups) {
        std::shuffle(g.begin(), g.end(), rng);
        for (Index i : g) out[slot++ % out.size()].push_back(i);
    }
    for (auto& f : out) std::sort(f.begin(), f.end());
    return out;
}

CvResult cv_select(const Dataset& d, const CvSpec& spec, CvMethod method)
{
    CvResult res;
    res.method = method;
    res.error = spec.error;
    if (res.error == CvError::automatic)
        res.error = d.family() == Family::binomial ? CvError::deviance : CvError::squared;
    res.folds = make_folds(d, spec.folds, spec.seed);

    std::vector<double> lambdas;
    std::vector<SlopeTuning> tunings;
    if (method == CvMethod::lasso) {
        lambdas = spec.lambdas.empty() ? lasso_grid(d, 100, 1e-3, spec.lasso.intercept) : spec.lambdas;
        for (double l : lambdas)
            if (!(l > 0.0)) throw Error(ErrorCode::invalid_argument, "lasso lambdas must be positive");
        std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
        for (double l : lambdas) {
            CvPoint pt;
            pt.lambda = l;
            res.points.push_back(std::move(pt));
        }
    } else {
        tunings = spec.slope_grid.empty() ? default_slope_grid() : spec.slope_grid;
        for (const auto& t : tunings) {
            if (!(t.c > 0.0) || !(t.q > 0.0 && t.q < 1.0))
                throw Error(ErrorCode::invalid_argument, "slope grid needs c > 0 and q in (0, 1)");
            CvPoint pt;
            pt.c = t.c;
            pt.q = t.q;
            res.points.push_back(std::move(pt));
        }
    }
    if (res.points.empty()) throw Error(ErrorCode::invalid_argument, "cross-validation grid is empty");

    const std::size_t K = res.folds.size();
    std::vector<std::vector<double>> errors(K);
    std::vector<std::string> fold_failure(K);
    parallel_for(K, spec.threads, [&](std::size_t k) {
        const Dataset test = d.select_rows(res.folds[k]);
        const Dataset train = d.select_rows(complement(res.folds[k], d.n()));
        try {
            errors[k] = method == CvMethod::lasso ? lasso_fold(train, test, lambdas, spec, res.error)
                                                  : slope_fold(train, test, tunings, spec, res.error);
        } catch (const Error& e) {
            errors[k].assign(res.points.size(), missing);
            fold_failure[k] = e.what();
        }
    });

    for (std::size_t i = 0; i < res.points.size(); ++i) {
        CvPoint& pt = res.points[i];
        for (std::size_t k = 0; k < K; ++k) {
            const double e = errors[k][i];
            pt.fold_errors.push_back(e);
            if (std::isnan(e) && !pt.disqualified) {
                pt.disqualified = true;
                pt.note = "fold " + std::to_string(k + 1) + ": "
                          + (fold_failure[k].empty() ? std::string("no fit") : fold_failure[k]);
            }
        }
        if (pt.disqualified) {
            pt.mean = pt.se = missing;
            continue;
        }
        double sum = 0.0;
        for (double e : pt.fold_errors) sum += e;
        pt.mean = sum / static_cast<double>(K);
        double ss = 0.0;
        for (double e : pt.fold_errors) ss += (e - pt.mean) * (e - pt.mean);
        pt.se = std::sqrt(ss / static_cast<double>(K - 1) / static_cast<double>(K));
    }

    std::size_t best = res.points.size();
    for (std::size_t i = 0; i < res.points.size(); ++i)
        if (!res.points[i].disqualified && (best == res.points.size() || res.points[i].mean < res.points[best].mean))
            best = i;
    if (best == res.points.size()) throw FitError(ErrorCode::not_converged, "every cross-validation grid point failed");
    if (spec.one_se) {
        const double cutoff = res.points[best].mean + res.points[best].se;
        double level = penalty_level(res.points[best], method, d.p());
        for (std::size_t i = 0; i < res.points.size(); ++i) {
            const CvPoint& pt = res.points[i];
            if (pt.disqualified || pt.mean > cutoff) continue;
            const double l = penalty_level(pt, method, d.p());
            if (l > level) {
                level = l;
                best = i;
            }
        }
    }
    res.best = best;

    if (method == CvMethod::lasso) {
        LassoOptions opt = spec.lasso;
        opt.early_stop = false;
        const std::vector<double> head(lambdas.begin(), lambdas.begin() + static_cast<std::ptrdiff_t>(best) + 1);
        const LassoPath path = lasso_path(d, head, opt);
        res.coefficients = path.coefficients.col(path.computed - 1);
        res.intercept = path.intercepts[path.computed - 1];
    } else {
        const SlopeTuning& t = tunings[best];
        const auto seq = make_lambda(LambdaRule::bh, d.p(), {.c = spec.sigma * t.c, .q = t.q});
        const SlopeFit f = fit_slope(d, seq, spec.slope);
        res.coefficients = f.coefficients;
        res.intercept = f.intercept;
    }
    return res;
}

void write_cv_csv(const std::filesystem::path& path, const CvResult& result)
{
    csv::NumericTable table;
    table.header = {"lambda", "c", "q", "mean_error", "se", "disqualified", "selected"};
    for (std::size_t i = 0; i < result.points.size(); ++i) {
        const CvPoint& pt = result.points[i];
        table.rows.push_back({pt.lambda, pt.c, pt.q, pt.mean, pt.se, pt.disqualified ? 1.0 : 0.0,
                              i == result.best ? 1.0 : 0.0});
    }
    csv::write_numeric_table(path, table);
}

} // namespace fdrsel
