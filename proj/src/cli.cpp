#include "fdrsel/cli.hpp"

#include "fdrsel/criteria.hpp"
#include "fdrsel/csv.hpp"
#include "fdrsel/cv.hpp"
#include "fdrsel/dataset.hpp"
#include "fdrsel/errors.hpp"
#include "fdrsel/knockoffs.hpp"
#include "fdrsel/lasso.hpp"
#include "fdrsel/parallel.hpp"
#include "fdrsel/rng.hpp"
#include "fdrsel/scenario.hpp"
#include "fdrsel/slope.hpp"
#include "fdrsel/sorted_l1.hpp"
#include "fdrsel/stepwise.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace fdrsel {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::uint64_t env_seed()
{
    const char* text = std::getenv("FDRSEL_SEED");
    if (!text || !*text) return 1;
    double v = 0.0;
    if (!csv::parse_double(text, v) || v < 0 || v != std::floor(v))
        throw Error(ErrorCode::invalid_argument, std::string("FDRSEL_SEED is not a nonnegative integer: ") + text);
    return static_cast<std::uint64_t>(v);
}

struct DataArgs
{
    std::string path;
    std::string response = "y";
    std::string family = "gaussian";

    void attach(CLI::App* cmd)
    {
        cmd->add_option("data", path, "input CSV with a header row")->required();
        cmd->add_option("--response", response, "response column")->capture_default_str();
        cmd->add_option("--family", family, "gaussian or binomial")->capture_default_str();
    }
    Dataset load() const { return load_csv(path, response, parse_family(family)); }
};

fs::path prepare_out(const std::string& dir)
{
    const fs::path out(dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw Error(ErrorCode::io, "cannot create output directory " + dir);
    const fs::path probe = out / ".fdrsel-write-test";
    {
        std::ofstream os(probe);
        if (!os) throw Error(ErrorCode::io, "output directory " + dir + " is not writable");
    }
    fs::remove(probe, ec);
    return out;
}

void write_json(const fs::path& path, const json& value)
{
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::io, "cannot write " + path.string());
    os << value.dump(2) << '\n';
}

json read_json(const fs::path& path)
{
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::io, "cannot read " + path.string());
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw DataError(ErrorCode::invalid_dataset, path.string() + ": " + e.what());
    }
}

// timestamps live only here so the result files stay byte-identical across runs
void append_log(const fs::path& out, const std::vector<std::string>& args)
{
    std::ofstream os(out / "run.log", std::ios::app);
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    os << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
    for (const auto& a : args) os << ' ' << a;
    os << '\n';
}

json number(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

json names_of(const Dataset& d, const std::vector<Index>& columns)
{
    json out = json::array();
    for (Index j : columns) out.push_back(d.names()[static_cast<std::size_t>(j)]);
    return out;
}

std::vector<Index> nonzero_columns(const Vector& beta)
{
    std::vector<Index> out;
    for (Index j = 0; j < beta.size(); ++j)
        if (beta[j] != 0.0) out.push_back(j);
    return out;
}

json coefficient_map(const Dataset& d, const std::vector<Index>& columns, const Vector& values)
{
    json out = json::object();
    for (std::size_t i = 0; i < columns.size(); ++i)
        out[d.names()[static_cast<std::size_t>(columns[i])]] = values[static_cast<Index>(i)];
    return out;
}

void write_coefficients(const fs::path& path, const Dataset& d, const Vector& beta, double intercept)
{
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::io, "cannot write " + path.string());
    csv::write_row(os, {"name", "coefficient"});
    csv::write_row(os, {"(intercept)", csv::format_double(intercept)});
    for (Index j = 0; j < beta.size(); ++j)
        csv::write_row(os, {d.names()[static_cast<std::size_t>(j)], csv::format_double(beta[j])});
}

json trace_json(const Dataset& d, const std::vector<TraceEntry>& trace)
{
    json out = json::array();
    for (const auto& t : trace) {
        json e{{"action", to_string(t.action)}, {"value", number(t.value)}};
        if (t.action == TraceEntry::Action::add || t.action == TraceEntry::Action::drop)
            e["column"] = d.names()[static_cast<std::size_t>(t.index)];
        else if (t.action == TraceEntry::Action::screen)
            e["kept"] = t.index;
        if (!t.label.empty()) e["label"] = t.label;
        out.push_back(std::move(e));
    }
    return out;
}

struct CriterionArgs
{
    std::string name = "mbic2";
    double E = 4.0;
    double constant = 0.5;
    double kappa = 0.0;
    Index p_total = 0;
    double sigma = 0.0;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--criterion", name, "aic bic ric mbic maic mbic2 maic2 ebic")->capture_default_str();
        cmd->add_option("--E", E, "expected number of signals (mbic, mbic2)")->capture_default_str();
        cmd->add_option("--const", constant, "mAIC / mAIC2 constant")->capture_default_str();
        cmd->add_option("--kappa", kappa, "EBIC kappa")->capture_default_str();
        cmd->add_option("--p-total", p_total, "number of candidates the penalty adjusts for (default: columns in the data)");
        cmd->add_option("--known-sigma", sigma, "use a known residual sd instead of the profile likelihood");
    }
    CriterionSpec build(Index p) const
    {
        CriterionSpec spec(parse_criterion(name), p_total > 0 ? p_total : p);
        spec.E = E;
        spec.constant = constant;
        spec.kappa = kappa;
        if (sigma > 0.0) spec.known_sigma = sigma;
        return spec;
    }
};

json criterion_json(const CriterionSpec& spec)
{
    json out{{"name", to_string(spec.kind)}, {"p_total", spec.p_total}, {"E", spec.E}, {"const", spec.constant},
             {"kappa", spec.kappa}};
    if (spec.known_sigma) out["known_sigma"] = *spec.known_sigma;
    return out;
}

// ---- select ----------------------------------------------------------------

struct SelectArgs
{
    DataArgs data;
    CriterionArgs criterion;
    std::string plan = "default";
    std::string out = "fdrsel-out";
};

int cmd_select(const SelectArgs& a, std::ostream& out)
{
    const Dataset d = a.data.load();
    const CriterionSpec spec = a.criterion.build(d.p());
    SearchPlan plan;
    if (a.plan == "default") plan = SearchPlan::standard(spec);
    else if (a.plan == "escape") plan = SearchPlan::escape_local_minimum(spec);
    else plan = SearchPlan::parse(a.plan, spec);

    const fs::path dir = prepare_out(a.out);
    const FitResult fit = run_plan(d, plan);
    Vector beta = Vector::Zero(d.p());
    for (std::size_t i = 0; i < fit.support.size(); ++i) beta[fit.support[i]] = fit.coefficients[static_cast<Index>(i)];

    json result{{"command", "select"},
                {"data", a.data.path},
                {"family", to_string(d.family())},
                {"n", d.n()},
                {"p", d.p()},
                {"criterion", criterion_json(fit.criterion)},
                {"plan", plan.describe()},
                {"support", names_of(d, fit.support)},
                {"coefficients", coefficient_map(d, fit.support, fit.coefficients)},
                {"intercept", fit.intercept},
                {"criterion_value", number(fit.criterion_value)},
                {"separation", fit.separation},
                {"skipped_candidates", fit.skipped_candidates},
                {"trace", trace_json(d, fit.trace)}};
    write_json(dir / "selection.json", result);
    write_coefficients(dir / "coefficients.csv", d, beta, fit.intercept);

    out << "selected " << fit.support.size() << " of " << d.p() << " columns:";
    for (Index j : fit.support) out << ' ' << d.names()[static_cast<std::size_t>(j)];
    out << "\n" << to_string(fit.criterion.kind) << " = " << fit.criterion_value << '\n';
    return exit_ok;
}

// ---- slope / lasso ---------------------------------------------------------

struct PenaltyArgs
{
    DataArgs data;
    std::string rule = "bh";
    double q = 0.2, c = 1.0, delta = 0.05, sigma = 1.0, value = 1.0, scale = 1.0;
    std::string lambda_file;
    double lambda = 0.0;
    bool cv = false;
    int folds = 10;
    bool one_se = false;
    int path_points = 20;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out = "fdrsel-out";
};

json fit_summary(const Dataset& d, const Vector& beta, double intercept)
{
    const auto support = nonzero_columns(beta);
    Vector values(static_cast<Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) values[static_cast<Index>(i)] = beta[support[i]];
    return json{{"support", names_of(d, support)},
                {"coefficients", coefficient_map(d, support, values)},
                {"intercept", intercept},
                {"nonzero", support.size()},
                {"clusters", equal_magnitude_clusters(beta).size()}};
}

CvSpec cv_spec(const PenaltyArgs& a)
{
    CvSpec cv;
    cv.folds = a.folds;
    cv.seed = a.seed;
    cv.one_se = a.one_se;
    cv.threads = a.threads;
    cv.sigma = a.sigma;
    return cv;
}

int cmd_slope(const PenaltyArgs& a, std::ostream& out)
{
    const Dataset d = a.data.load();
    const fs::path dir = prepare_out(a.out);

    json result{{"command", "slope"}, {"data", a.data.path}, {"family", to_string(d.family())}, {"n", d.n()}, {"p", d.p()}};
    LambdaSequence lambda;
    SlopeFit fit;
    if (a.cv) {
        const CvResult r = cv_select(d, cv_spec(a), CvMethod::slope);
        write_cv_csv(dir / "cv.csv", r);
        const CvPoint& best = r.selected();
        lambda = make_lambda(LambdaRule::bh, d.p(), {.c = best.c, .q = best.q}).scaled(a.sigma);
        fit = fit_slope(d, lambda);
        result["cv"] = {{"folds", a.folds}, {"c", best.c}, {"q", best.q}, {"mean_error", best.mean}, {"se", best.se},
                        {"one_se", a.one_se}, {"seed", a.seed}};
    } else if (!a.lambda_file.empty()) {
        lambda = read_lambda_csv(a.lambda_file);
        fit = fit_slope(d, lambda);
        result["rule"] = "file";
    } else {
        const LambdaRule rule = parse_lambda_rule(a.rule == "inflated" ? "inflated-bh" : a.rule);
        LambdaParams params{.c = a.c, .q = a.q, .delta = a.delta, .sigma = a.sigma, .scale = a.scale, .value = a.value, .n = d.n()};
        lambda = make_lambda(rule, d.p(), params);
        if (rule == LambdaRule::bh || rule == LambdaRule::inflated_bh) lambda = lambda.scaled(a.sigma);
        fit = fit_slope(d, lambda);
        result["rule"] = to_string(rule);
        result["lambda_params"] = {{"q", a.q}, {"c", a.c}, {"delta", a.delta}, {"sigma", a.sigma}, {"scale", a.scale},
                                   {"value", a.value}};
        result["truncated"] = lambda.truncated;
    }
    write_lambda_csv(dir / "lambda.csv", lambda);
    result.update(fit_summary(d, fit.coefficients, fit.intercept));
    result["objective"] = fit.objective;
    result["kkt"] = fit.kkt;
    result["iterations"] = fit.iterations;
    result["converged"] = fit.converged;

    if (a.path_points > 0) {
        const double top = SlopeSolver(d).zero_scale(lambda);
        std::vector<double> scales;
        for (int i = 0; i < a.path_points; ++i)
            scales.push_back(top * std::pow(0.01, a.path_points == 1 ? 0.0 : static_cast<double>(i) / (a.path_points - 1)));
        csv::NumericTable table{{"scale", "nonzero", "clusters", "objective"}, {}};
        for (const auto& pt : slope_path(d, lambda, scales))
            table.rows.push_back({pt.scale, static_cast<double>(pt.fit.nonzero()), static_cast<double>(pt.clusters()), pt.fit.objective});
        csv::write_numeric_table(dir / "path.csv", table);
    }
    write_json(dir / "fit.json", result);
    write_coefficients(dir / "coefficients.csv", d, fit.coefficients, fit.intercept);
    out << "slope: " << result["nonzero"].get<std::size_t>() << " nonzero in " << result["clusters"].get<std::size_t>()
        << " clusters, kkt " << fit.kkt << '\n';
    return fit.converged ? exit_ok : exit_fit;
}

int cmd_lasso(const PenaltyArgs& a, std::ostream& out)
{
    const Dataset d = a.data.load();
    const fs::path dir = prepare_out(a.out);
    json result{{"command", "lasso"}, {"data", a.data.path}, {"family", to_string(d.family())}, {"n", d.n()}, {"p", d.p()}};
    Vector beta;
    double intercept = 0.0;
    if (a.lambda > 0.0) {
        const LassoFit fit = fit_lasso(d, a.lambda);
        beta = fit.coefficients;
        intercept = fit.intercept;
        result["lambda"] = a.lambda;
    } else {
        const CvResult r = cv_select(d, cv_spec(a), CvMethod::lasso);
        write_cv_csv(dir / "cv.csv", r);
        beta = r.coefficients;
        intercept = r.intercept;
        result["lambda"] = r.selected().lambda;
        result["cv"] = {{"folds", a.folds}, {"mean_error", r.selected().mean}, {"se", r.selected().se},
                        {"one_se", a.one_se}, {"seed", a.seed}};
    }
    result.update(fit_summary(d, beta, intercept));

    if (a.path_points > 0) {
        const LassoPath path = lasso_path(d, lasso_grid(d, a.path_points));
        csv::NumericTable table{{"lambda", "nonzero", "clusters", "deviance_ratio"}, {}};
        for (Index i = 0; i < path.computed; ++i) {
            const Vector b = path.coefficients.col(i);
            table.rows.push_back({path.lambdas[static_cast<std::size_t>(i)], static_cast<double>(nonzero_columns(b).size()),
                                  static_cast<double>(equal_magnitude_clusters(b).size()),
                                  path.deviance_ratio[static_cast<std::size_t>(i)]});
        }
        csv::write_numeric_table(dir / "path.csv", table);
    }
    write_json(dir / "fit.json", result);
    write_coefficients(dir / "coefficients.csv", d, beta, intercept);
    out << "lasso: lambda " << result["lambda"].get<double>() << ", " << result["nonzero"].get<std::size_t>()
        << " nonzero\n";
    return exit_ok;
}

// ---- knockoff --------------------------------------------------------------

struct KnockoffArgs
{
    DataArgs data;
    std::string sigma;
    double q = 0.2;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out = "fdrsel-out";
};

Matrix read_square(const fs::path& path, Index p)
{
    const csv::NumericTable t = csv::read_numeric_table(path);
    if (static_cast<Index>(t.header.size()) != p || static_cast<Index>(t.rows.size()) != p)
        throw DataError(ErrorCode::invalid_dataset, path.string() + " must hold a " + std::to_string(p) + " x "
                                                        + std::to_string(p) + " matrix under a header row");
    Matrix S(p, p);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j) S(i, j) = t.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return S;
}

int cmd_knockoff(const KnockoffArgs& a, std::ostream& out)
{
    const Dataset d = a.data.load();
    const Matrix sigma = read_square(a.sigma, d.p());
    const fs::path dir = prepare_out(a.out);
    RngStream rng(a.seed);
    CvSpec cv;
    cv.seed = a.seed;
    cv.threads = a.threads;
    const KnockoffResult r = knockoff_filter(d, sigma, a.q, rng, cv);

    json W = json::object();
    std::ofstream os(dir / "w.csv");
    if (!os) throw Error(ErrorCode::io, "cannot write w.csv");
    csv::write_row(os, {"name", "W", "selected"});
    std::vector<bool> chosen(static_cast<std::size_t>(d.p()), false);
    for (Index j : r.selected) chosen[static_cast<std::size_t>(j)] = true;
    for (Index j = 0; j < d.p(); ++j) {
        W[d.names()[static_cast<std::size_t>(j)]] = r.W[j];
        csv::write_row(os, {d.names()[static_cast<std::size_t>(j)], csv::format_double(r.W[j]),
                            chosen[static_cast<std::size_t>(j)] ? "1" : "0"});
    }
    json result{{"command", "knockoff"}, {"data", a.data.path}, {"n", d.n()}, {"p", d.p()}, {"q", a.q},
                {"seed", a.seed}, {"threshold", number(r.threshold)}, {"support", names_of(d, r.selected)}, {"W", W}};
    write_json(dir / "knockoff.json", result);
    out << "knockoff: threshold " << r.threshold << ", selected " << r.selected.size() << '\n';
    return exit_ok;
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs
{
    std::string target;
    int replicates = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    Index n = 0;
    std::vector<std::string> methods;
    int threads = 1;
    std::string out = "fdrsel-out";
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out)
{
    std::vector<ScenarioSpec> specs;
    if (fs::exists(a.target)) specs = load_scenarios(a.target);
    else specs.push_back(builtin_scenario(a.target));
    const fs::path dir = prepare_out(a.out);
    const MethodRegistry registry = MethodRegistry::builtin();

    std::vector<MetricsReport> reports;
    for (auto spec : specs) {
        if (a.seed_given) spec.seed = a.seed;
        if (a.n > 0) spec.n = a.n;
        if (!a.methods.empty()) spec.methods = a.methods;
        const MetricsReport rep = run_scenario(spec, registry, {.threads = a.threads, .replicates = a.replicates});
        write_records_csv(dir / (spec.name + "_records.csv"), rep);
        write_summary_csv(dir / (spec.name + "_summary.csv"), rep);
        out << spec.name << " (n=" << spec.n << ", p=" << rep.p << ", k=" << rep.k << ", "
            << rep.scenario.replicates << " replicates)\n";
        out << "  " << std::left << std::setw(28) << "method" << std::right << std::setw(8) << "fdr" << std::setw(8)
            << "fwer" << std::setw(8) << "power" << std::setw(10) << "mis" << std::setw(10) << "failed" << '\n';
        for (const auto& s : rep.summaries)
            out << "  " << std::left << std::setw(28) << s.method << std::right << std::fixed << std::setprecision(3)
                << std::setw(8) << s.fdr.mean << std::setw(8) << s.fwer.mean << std::setw(8) << s.power.mean
                << std::setw(10) << s.misclassifications.mean << std::setw(10) << s.failures << '\n'
                << std::defaultfloat;
        reports.push_back(rep);
    }
    write_long_csv(dir / "long.csv", reports);
    return exit_ok;
}

// ---- threshold -------------------------------------------------------------

struct ThresholdArgs
{
    DataArgs data;
    CriterionArgs criterion;
    std::string fit;
    std::string out = "fdrsel-out";
};

int cmd_threshold(const ThresholdArgs& a, std::ostream& out)
{
    const Dataset d = a.data.load();
    const json input = read_json(a.fit);
    if (!input.contains("support") || !input["support"].is_array())
        throw DataError(ErrorCode::invalid_dataset, a.fit + " has no \"support\" array");
    Support start;
    for (const auto& name : input["support"]) start.push_back(d.column(name.get<std::string>()));
    std::sort(start.begin(), start.end());
    start.erase(std::unique(start.begin(), start.end()), start.end());

    const CriterionSpec spec = a.criterion.build(d.p());
    const fs::path dir = prepare_out(a.out);
    json before = nullptr;
    try {
        before = criterion_value(d, spec, start);
    } catch (const FitError&) {
        // an input support too large to fit still gets reduced below
    }
    SearchOptions options;
    options.k_cap = std::max<Index>(static_cast<Index>(start.size()), k_cap(spec.kind, d.n(), spec.p_total));
    const FitResult fit = backward(d, spec, start, options);
    Vector beta = Vector::Zero(d.p());
    for (std::size_t i = 0; i < fit.support.size(); ++i) beta[fit.support[i]] = fit.coefficients[static_cast<Index>(i)];

    json result{{"command", "threshold"},
                {"data", a.data.path},
                {"fit", a.fit},
                {"criterion", criterion_json(fit.criterion)},
                {"input_support", names_of(d, start)},
                {"input_criterion_value", before},
                {"support", names_of(d, fit.support)},
                {"coefficients", coefficient_map(d, fit.support, fit.coefficients)},
                {"intercept", fit.intercept},
                {"criterion_value", number(fit.criterion_value)},
                {"trace", trace_json(d, fit.trace)}};
    write_json(dir / "threshold.json", result);
    write_coefficients(dir / "coefficients.csv", d, beta, fit.intercept);
    out << "threshold: " << start.size() << " -> " << fit.support.size() << " columns\n";
    return exit_ok;
}

// ---- demo-data -------------------------------------------------------------

Dataset synthetic(Index n, Index p, const std::vector<std::pair<Index, double>>& effects, std::uint64_t seed)
{
    RngStream rng(seed);
    Matrix X(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) X(i, j) = rng.normal();
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
        y[i] = rng.normal();
        for (const auto& [j, b] : effects) y[i] += b * X(i, j);
    }
    return Dataset(y, X);
}

int cmd_demo_data(const std::string& dir_text, std::ostream& out)
{
    const fs::path dir = prepare_out(dir_text);
    // seeds fixed so the shipped fixtures can be regenerated byte for byte
    write_csv(dir / "demo.csv", synthetic(50, 10, {{0, 1.5}, {3, -1.5}}, 20240611));
    write_csv(dir / "noise.csv", synthetic(50, 10, {}, 20240612));
    write_csv(dir / "wide.csv", synthetic(100, 50, {{0, 1.0}, {1, 0.8}, {2, -0.8}}, 20240613));
    out << "wrote demo.csv (signals x1, x4), noise.csv, wide.csv (signals x1, x2, x3) to " << dir.string() << '\n';
    return exit_ok;
}

int exit_code_for(const Error& e)
{
    switch (e.code()) {
    case ErrorCode::missing_column:
    case ErrorCode::non_numeric:
    case ErrorCode::invalid_binary_response:
    case ErrorCode::constant_column:
    case ErrorCode::invalid_dataset:
    case ErrorCode::io: return exit_data;
    case ErrorCode::not_positive_definite:
    case ErrorCode::rank_deficient:
    case ErrorCode::not_converged: return exit_fit;
    case ErrorCode::invalid_argument: return exit_usage;
    }
    return exit_fit;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"False-discovery-aware variable selection: L0 criteria, SLOPE, LASSO and knockoffs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "fdrsel 0.1.0");

    std::uint64_t default_seed = 1;
    try {
        default_seed = env_seed();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    const int default_thread_count = default_threads();

    SelectArgs select;
    auto* c_select = app.add_subcommand("select", "stepwise search minimizing an L0 criterion");
    select.data.attach(c_select);
    select.criterion.attach(c_select);
    c_select->add_option("--plan", select.plan, "default, escape, or stages like screen(0.15),forward(bic),stepwise(mbic2)")
        ->capture_default_str();
    c_select->add_option("--out", select.out, "output directory")->capture_default_str();

    auto penalty_options = [&](CLI::App* cmd, PenaltyArgs& a) {
        a.seed = default_seed;
        a.threads = default_thread_count;
        a.data.attach(cmd);
        auto* cv = cmd->add_flag("--cv", a.cv, "choose the penalty by cross-validation");
        cmd->add_option("--folds", a.folds, "cross-validation folds")->capture_default_str()->needs(cv);
        cmd->add_flag("--one-se", a.one_se, "pick the most regularized point within one standard error")->needs(cv);
        cmd->add_option("--path", a.path_points, "number of path points written to path.csv (0: none)")->capture_default_str();
        cmd->add_option("--seed", a.seed, "fold assignment seed (default FDRSEL_SEED or 1)");
        cmd->add_option("--threads", a.threads, "worker threads")->capture_default_str();
        cmd->add_option("--out", a.out, "output directory")->capture_default_str();
        return cv;
    };

    PenaltyArgs slope;
    auto* c_slope = app.add_subcommand("slope", "SLOPE fit with a sorted-L1 penalty");
    auto* slope_cv = penalty_options(c_slope, slope);
    auto* rule = c_slope->add_option("--rule", slope.rule, "bh, heuristic, inflated, second-order or constant")->capture_default_str();
    c_slope->add_option("--q", slope.q, "target FDR level")->capture_default_str();
    c_slope->add_option("--c", slope.c, "multiplier of the bh sequence")->capture_default_str();
    c_slope->add_option("--delta", slope.delta, "inflation of the inflated rule")->capture_default_str();
    c_slope->add_option("--sigma", slope.sigma, "noise scale")->capture_default_str();
    c_slope->add_option("--scale", slope.scale, "second-order rule constant")->capture_default_str();
    c_slope->add_option("--value", slope.value, "constant rule value")->capture_default_str();
    auto* lambda_file = c_slope->add_option("--lambda-file", slope.lambda_file, "CSV with a lambda column");
    slope_cv->excludes(rule)->excludes(lambda_file);
    lambda_file->excludes(rule);

    PenaltyArgs lasso;
    lasso.path_points = 100;
    auto* c_lasso = app.add_subcommand("lasso", "LASSO fit at a given lambda, or by cross-validation (default)");
    auto* lasso_cv = penalty_options(c_lasso, lasso);
    auto* lambda = c_lasso->add_option("--lambda", lasso.lambda, "penalty level")->check(CLI::PositiveNumber);
    lasso_cv->excludes(lambda);

    KnockoffArgs knock;
    knock.seed = default_seed;
    knock.threads = default_thread_count;
    auto* c_knock = app.add_subcommand("knockoff", "model-X knockoff filter with CV-LASSO statistics");
    knock.data.attach(c_knock);
    c_knock->add_option("--sigma", knock.sigma, "CSV holding the covariance of a design row")->required();
    c_knock->add_option("--q", knock.q, "target FDR level")->capture_default_str();
    c_knock->add_option("--seed", knock.seed, "knockoff and fold seed (default FDRSEL_SEED or 1)");
    c_knock->add_option("--threads", knock.threads, "worker threads")->capture_default_str();
    c_knock->add_option("--out", knock.out, "output directory")->capture_default_str();

    SimulateArgs sim;
    sim.threads = default_thread_count;
    auto* c_sim = app.add_subcommand("simulate", "run a built-in scenario or a YAML scenario file");
    c_sim->add_option("scenario", sim.target, "scenario name or YAML file")->required();
    c_sim->add_option("--replicates", sim.replicates, "override the replicate count");
    auto* sim_seed = c_sim->add_option("--seed", sim.seed, "override the scenario seed");
    c_sim->add_option("--n", sim.n, "override the sample size");
    c_sim->add_option("--methods", sim.methods, "override the method list")->delimiter(';');
    c_sim->add_option("--threads", sim.threads, "worker threads")->capture_default_str();
    c_sim->add_option("--out", sim.out, "output directory")->capture_default_str();

    ThresholdArgs thr;
    auto* c_thr = app.add_subcommand("threshold", "backward elimination over the support of an earlier fit");
    c_thr->add_option("fit", thr.fit, "JSON result with a support array")->required();
    thr.data.attach(c_thr);
    thr.criterion.attach(c_thr);
    c_thr->add_option("--out", thr.out, "output directory")->capture_default_str();

    std::string demo_dir = "data";
    auto* c_demo = app.add_subcommand("demo-data", "write the bundled example data sets");
    c_demo->add_option("--out", demo_dir, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }
    if (!sim_seed->empty()) sim.seed_given = true;
    else if (std::getenv("FDRSEL_SEED")) {
        sim.seed = default_seed;
        sim.seed_given = true;
    }

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        int code = exit_ok;
        std::string out_dir;
        if (c_select->parsed()) code = cmd_select(select, out), out_dir = select.out;
        else if (c_slope->parsed()) code = cmd_slope(slope, out), out_dir = slope.out;
        else if (c_lasso->parsed()) code = cmd_lasso(lasso, out), out_dir = lasso.out;
        else if (c_knock->parsed()) code = cmd_knockoff(knock, out), out_dir = knock.out;
        else if (c_sim->parsed()) code = cmd_simulate(sim, out), out_dir = sim.out;
        else if (c_thr->parsed()) code = cmd_threshold(thr, out), out_dir = thr.out;
        else if (c_demo->parsed()) code = cmd_demo_data(demo_dir, out), out_dir = demo_dir;
        append_log(out_dir, args);
        return code;
    } catch (const Error& e) {
        err << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_fit;
    }
}

} // namespace fdrsel
