// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [criterion ...] [--known-failures 4,6] [--threads N]
//
// Exit status is nonzero when a criterion fails that is not listed as a
// known failure. Known failures still print FAIL.

#include "fdrsel/criteria.hpp"
#include "fdrsel/metrics.hpp"
#include "fdrsel/parallel.hpp"
#include "fdrsel/scenario.hpp"
#include "fdrsel/slope.hpp"
#include "fdrsel/sorted_l1.hpp"
#include "fdrsel/stepwise.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace fdrsel;
using namespace fdrsel::testing;

namespace {

struct Outcome
{
    bool pass = true;
    std::string detail;
};

class Checks
{
public:
    void expect(bool ok, const std::string& what)
    {
        if (!ok) pass_ = false;
        if (!detail_.empty()) detail_ += "; ";
        detail_ += what + (ok ? "" : " [x]");
    }
    Outcome done() const { return {pass_, detail_}; }

private:
    bool pass_ = true;
    std::string detail_;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

int threads = 1;

// ---- 1 -----------------------------------------------------------------------

Outcome orthogonal_equivalence()
{
    const Index n = 64, p = 16;
    const Matrix X = hadamard_columns(n, p);
    const double ln = std::log(static_cast<double>(n)), pd = static_cast<double>(p);
    // z thresholds written out from the penalties, not taken from the library
    const std::vector<std::pair<CriterionKind, double>> cases{
        {CriterionKind::aic, std::sqrt(2.0)},
        {CriterionKind::bic, std::sqrt(ln)},
        {CriterionKind::ric, std::sqrt(2.0 * std::log(pd))},
        {CriterionKind::mbic, std::sqrt(ln + 2.0 * std::log(pd / 4.0))},
        {CriterionKind::maic, std::sqrt(2.0 + 2.0 * std::log(pd / 0.5))},
    };
    RngStream rng(101);
    int mismatches = 0, fits = 0;
    for (int rep = 0; rep < 40; ++rep) {
        Vector y = normal_vector(n, rng);
        for (Index j = 0; j < 6; ++j) y += (0.15 * static_cast<double>(j + 1) / 3.0) * X.col(j);
        const Dataset d(y, X);
        const Vector z = X.transpose() * y / std::sqrt(static_cast<double>(n));
        for (const auto& [kind, threshold] : cases) {
            Support expected;
            for (Index j = 0; j < p; ++j)
                if (std::fabs(z[j]) > threshold) expected.push_back(j);
            CriterionSpec spec(kind, p);
            spec.known_sigma = 1.0;
            Support got = stepwise(d, spec, {}, {.k_cap = p}).support;
            std::sort(got.begin(), got.end());
            mismatches += got != expected;
            ++fits;
        }
    }
    Checks c;
    c.expect(mismatches == 0, std::to_string(mismatches) + " mismatches in " + std::to_string(fits) + " fits");
    return c.done();
}

// ---- 2 -----------------------------------------------------------------------

Outcome prox_oracle()
{
    RngStream rng(202);
    double worst = 0.0;
    for (int rep = 0; rep < 500; ++rep) {
        const Index p = 1 + static_cast<Index>(rng.below(6));
        Vector v(p), lambda(p);
        for (Index j = 0; j < p; ++j) v[j] = 3.0 * rng.normal();
        for (Index j = 0; j < p; ++j) lambda[j] = 2.0 * rng.uniform();
        std::sort(lambda.data(), lambda.data() + p, std::greater<>());
        worst = std::max(worst, (prox_sorted_l1(v, lambda) - prox_by_enumeration(v, lambda)).lpNorm<Eigen::Infinity>());
    }
    Checks c;
    c.expect(worst <= 1e-6, fmt("max deviation %.2e over 500 instances", worst));
    return c.done();
}

// ---- 3 -----------------------------------------------------------------------

Outcome solver_optimality()
{
    double worst_kkt = 0.0, worst_gap = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        RngStream rng(303, static_cast<std::uint64_t>(rep));
        const Matrix X = normal_matrix(50, 30, rng);
        Vector beta = Vector::Zero(30);
        for (Index j = 0; j < 4; ++j) beta[j] = 2.0 * rng.normal();
        const Vector y = X * beta + normal_vector(50, rng);
        const Dataset d(y, X);
        const LambdaSequence lambda = make_lambda(LambdaRule::bh, 30, {.c = 1.0, .q = 0.1 + 0.4 * rng.uniform()});
        const SlopeFit fit = fit_slope(d, lambda);
        const ReferenceFit ref = proximal_gradient_reference(X, y, lambda.values, [](const Vector& v, const Vector& l) {
            return prox_sorted_l1(v, l);
        });
        worst_kkt = std::max(worst_kkt, fit.kkt);
        worst_gap = std::max(worst_gap, std::fabs(fit.objective - ref.objective) / std::max(1.0, std::fabs(ref.objective)));
    }
    Checks c;
    c.expect(worst_kkt <= 1e-6, fmt("max KKT residual %.2e", worst_kkt));
    c.expect(worst_gap <= 1e-6, fmt("max relative objective gap %.2e", worst_gap));
    return c.done();
}

// ---- scenarios -----------------------------------------------------------------

MetricsReport run(ScenarioSpec spec, int replicates)
{
    return run_scenario(spec, MethodRegistry::builtin(), {.threads = threads, .replicates = replicates});
}

std::string describe(const MethodSummary& s, const char* metric, const Estimate& e)
{
    std::ostringstream os;
    os.precision(3);
    os << s.method << ' ' << metric << ' ' << std::fixed << e.mean << " (se " << e.se << ")";
    return os.str();
}

Outcome fwer_control()
{
    ScenarioSpec s = builtin_scenario("scenario0");
    s.methods = {"maic", "maic2", "mbic", "bic"};
    const MetricsReport r = run(s, 500);
    const auto& maic = r.summary("maic");
    const auto& maic2 = r.summary("maic2");
    const auto& mbic = r.summary("mbic");
    const auto& bic = r.summary("bic");
    Checks c;
    c.expect(maic.fwer.mean >= 0.02 && maic.fwer.mean <= 0.08, describe(maic, "FWER", maic.fwer) + " in [0.02, 0.08]");
    c.expect(maic2.fwer.mean >= 0.05 && maic2.fwer.mean <= 0.12, describe(maic2, "FWER", maic2.fwer) + " in [0.05, 0.12]");
    c.expect(mbic.fwer.mean <= 0.05, describe(mbic, "FWER", mbic.fwer) + " <= 0.05");
    c.expect(bic.fwer.mean >= 0.5, describe(bic, "FWER", bic.fwer) + " >= 0.5");
    return c.done();
}

Outcome fdr_control()
{
    ScenarioSpec s = builtin_scenario("scenario3");
    s.methods = {"mbic", "mbic2", "maic", "maic2"};
    const MetricsReport r = run(s, 300);
    Checks c;
    const auto& maic2 = r.summary("maic2");
    const auto& mbic2 = r.summary("mbic2");
    c.expect(maic2.fdr.mean >= 0.02 && maic2.fdr.mean <= 0.09, describe(maic2, "FDR", maic2.fdr) + " in [0.02, 0.09]");
    c.expect(mbic2.fdr.mean <= 0.08, describe(mbic2, "FDR", mbic2.fdr) + " <= 0.08");
    double lowest = 1.0;
    for (const auto& m : r.summaries) lowest = std::min(lowest, m.power.mean);
    c.expect(lowest >= 0.95, fmt("lowest power %.3f >= 0.95", lowest));
    return c.done();
}

Outcome block_study()
{
    const MetricsReport r = run(builtin_scenario("block"), 300);
    const auto& bic = r.summary("bic");
    const auto& maic2 = r.summary("maic2");
    const auto& mbic2 = r.summary("mbic2");
    Checks c;
    c.expect(std::fabs(bic.power.mean - 0.75) <= 0.05, describe(bic, "power", bic.power) + " in 0.75 +- 0.05");
    c.expect(std::fabs(bic.fdr.mean - 0.26) <= 0.05, describe(bic, "FDR", bic.fdr) + " in 0.26 +- 0.05");
    c.expect(std::fabs(maic2.fdr.mean - 0.07) <= 0.04, describe(maic2, "FDR", maic2.fdr) + " in 0.07 +- 0.04");
    c.expect(std::fabs(mbic2.fdr.mean - 0.10) <= 0.04, describe(mbic2, "FDR", mbic2.fdr) + " in 0.10 +- 0.04");
    const MethodSummary* best = &r.summaries.front();
    for (const auto& m : r.summaries)
        if (m.misclassifications.mean < best->misclassifications.mean) best = &m;
    c.expect(best->method == "maic2" || best->method == "mbic2",
             "fewest misclassifications: " + best->method + fmt(" (%.2f)", best->misclassifications.mean));
    return c.done();
}

Outcome slope_vs_lasso()
{
    ScenarioSpec s = builtin_scenario("prediction-correlated");
    s.n = 500;
    s.k = SizeRule::fixed(50);
    s.methods = {"slope-cv", "lasso-cv"};
    const MetricsReport r = run(s, 20);
    std::vector<double> slope(20, NAN), lasso(20, NAN);
    for (const auto& rec : r.records)
        if (!rec.failed) (rec.method == "slope-cv" ? slope : lasso)[static_cast<std::size_t>(rec.replicate)] = rec.sq_error_mu;
    int wins = 0, pairs = 0;
    for (std::size_t i = 0; i < 20; ++i)
        if (std::isfinite(slope[i]) && std::isfinite(lasso[i])) {
            ++pairs;
            wins += slope[i] < lasso[i];
        }
    Checks c;
    c.expect(pairs == 20, std::to_string(pairs) + " complete pairs");
    c.expect(wins >= 14, "SLOPE MSP below LASSO in " + std::to_string(wins) + "/20 replicates (need 14)");
    c.expect(true, fmt("mean MSP slope %.3f, lasso %.3f", r.summary("slope-cv").msp.mean, r.summary("lasso-cv").msp.mean));
    return c.done();
}

Outcome knockoff_fdr()
{
    ScenarioSpec s = builtin_scenario("comparison-independent-strong");
    s.methods = {"knockoff"};
    const MetricsReport r = run(s, 100);
    const auto& k = r.summary("knockoff");
    Checks c;
    c.expect(k.failures == 0, std::to_string(k.failures) + " failed replicates");
    c.expect(k.fdr.mean <= 0.2 + 3.0 * k.fdr.se, describe(k, "FDR", k.fdr) + fmt(" <= %.3f", 0.2 + 3.0 * k.fdr.se));
    c.expect(k.power.mean >= 0.8, describe(k, "power", k.power) + " >= 0.8");
    return c.done();
}

// ---- 9 -----------------------------------------------------------------------

double upper_quantile_bisect(double alpha)
{
    double lo = 0.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(mid / std::sqrt(2.0)) > alpha ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Outcome lambda_values()
{
    const LambdaSequence bh = make_lambda(LambdaRule::bh, 1000, {.c = 1.0, .q = 0.2});
    double worst = 0.0;
    for (Index j : {1, 100, 1000})
        worst = std::max(worst, std::fabs(bh.values[j - 1] - upper_quantile_bisect(static_cast<double>(j) * 0.2 / 2000.0)));
    Checks c;
    c.expect(worst <= 1e-9, fmt("bh(1, 0.2) max deviation %.2e", worst));
    bool monotone = true, first_equal = true;
    for (Index n : {200, 1000, 5000}) {
        const LambdaSequence h = make_lambda(LambdaRule::heuristic, 1000, {.q = 0.2, .n = n});
        for (Index j = 1; j < h.size(); ++j) monotone = monotone && h.values[j] <= h.values[j - 1];
        first_equal = first_equal && h.values[0] == bh.values[0];
    }
    c.expect(monotone, "heuristic non-increasing");
    c.expect(first_equal, "heuristic first element equals bh first element");
    return c.done();
}

// ---- 10 ----------------------------------------------------------------------

Outcome property_suites()
{
    Checks c;
    RngStream rng(1010);

    bool axioms = true;
    for (int rep = 0; rep < 2000; ++rep) {
        const Index p = 1 + static_cast<Index>(rng.below(12));
        Vector lambda(p), x(p), y(p);
        for (Index j = 0; j < p; ++j) lambda[j] = rng.uniform();
        std::sort(lambda.data(), lambda.data() + p, std::greater<>());
        for (Index j = 0; j < p; ++j) x[j] = rng.normal(), y[j] = rng.normal();
        const double a = 3.0 * rng.normal();
        const double jx = sorted_l1_norm(x, lambda), jy = sorted_l1_norm(y, lambda);
        axioms = axioms && jx >= 0.0 && sorted_l1_norm(x + y, lambda) <= jx + jy + 1e-12
                 && std::fabs(sorted_l1_norm(a * x, lambda) - std::fabs(a) * jx) <= 1e-12 * (1.0 + std::fabs(a) * jx)
                 && sorted_l1_norm(Vector::Zero(p), lambda) == 0.0;
    }
    c.expect(axioms, "norm axioms");

    bool nonexpansive = true;
    for (int rep = 0; rep < 2000; ++rep) {
        const Index p = 1 + static_cast<Index>(rng.below(20));
        Vector lambda(p), u(p), v(p);
        for (Index j = 0; j < p; ++j) lambda[j] = 2.0 * rng.uniform();
        std::sort(lambda.data(), lambda.data() + p, std::greater<>());
        for (Index j = 0; j < p; ++j) u[j] = 2.0 * rng.normal(), v[j] = 2.0 * rng.normal();
        nonexpansive = nonexpansive
                       && (prox_sorted_l1(u, lambda) - prox_sorted_l1(v, lambda)).norm() <= (u - v).norm() + 1e-12;
    }
    c.expect(nonexpansive, "prox non-expansive");

    bool trace_ok = true;
    for (int rep = 0; rep < 20; ++rep) {
        RngStream r(1011, static_cast<std::uint64_t>(rep));
        const Matrix X = normal_matrix(100, 30, r);
        Vector y = normal_vector(100, r);
        for (Index j = 0; j < 4; ++j) y += 0.5 * X.col(j);
        const Dataset d(y, X);
        for (auto kind : {CriterionKind::bic, CriterionKind::mbic2, CriterionKind::maic2}) {
            const FitResult fit = stepwise(d, CriterionSpec(kind));
            double last = criterion_value(d, fit.criterion, {});
            for (const auto& t : fit.trace) {
                if (t.action != TraceEntry::Action::add && t.action != TraceEntry::Action::drop) continue;
                trace_ok = trace_ok && t.value < last;
                last = t.value;
            }
            trace_ok = trace_ok && std::fabs(last - fit.criterion_value) <= 1e-9 * (1.0 + std::fabs(last));
        }
    }
    c.expect(trace_ok, "greedy trace strictly decreasing");

    auto rec = [](Index tp, Index fp, Index fn) {
        ReplicateRecord r;
        r.method = "m";
        r.true_positives = tp;
        r.false_positives = fp;
        r.false_negatives = fn;
        r.selected = tp + fp;
        return r;
    };
    const MethodSummary s = summarize({rec(5, 0, 0), rec(4, 1, 1), rec(3, 3, 2), rec(0, 0, 5)}).at(0);
    const bool identities = std::fabs(s.power.mean - 12.0 / 20.0) < 1e-15
                            && std::fabs(s.fdr.mean - (0.2 + 0.5) / 4.0) < 1e-15 && s.fwer.mean == 0.5
                            && s.misclassifications.mean == (0 + 2 + 5 + 5) / 4.0;
    c.expect(identities, "metric identities");

    ScenarioSpec spec;
    spec.name = "determinism";
    spec.n = 80;
    spec.p = SizeRule::fixed(40);
    spec.k = SizeRule::fixed(4);
    spec.effect.value = 0.8;
    spec.replicates = 12;
    spec.methods = {"mbic2", "slope-bh", "lasso-cv"};
    const MethodRegistry registry = MethodRegistry::builtin();
    const MetricsReport one = run_scenario(spec, registry, {.threads = 1});
    const MetricsReport four = run_scenario(spec, registry, {.threads = 4});
    bool same = one.records.size() == four.records.size();
    for (std::size_t i = 0; same && i < one.records.size(); ++i)
        same = one.records[i].selected == four.records[i].selected
               && one.records[i].sq_error_mu == four.records[i].sq_error_mu;
    for (std::size_t i = 0; same && i < one.summaries.size(); ++i)
        same = one.summaries[i].msp.mean == four.summaries[i].msp.mean && one.summaries[i].fdr.mean == four.summaries[i].fdr.mean;
    c.expect(same, "identical results with 1 and 4 threads");
    return c.done();
}

struct Criterion
{
    int id;
    const char* name;
    std::function<Outcome()> run;
};

std::set<int> parse_list(const std::string& text)
{
    std::set<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.insert(std::stoi(item));
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> criteria{
        {1, "orthogonal-design equivalence", orthogonal_equivalence},
        {2, "prox vs brute force", prox_oracle},
        {3, "SLOPE solver optimality", solver_optimality},
        {4, "FWER control, scenario 0", fwer_control},
        {5, "FDR control, scenario 3", fdr_control},
        {6, "block-correlation study", block_study},
        {7, "CV-SLOPE vs CV-LASSO prediction", slope_vs_lasso},
        {8, "knockoff FDR and power", knockoff_fdr},
        {9, "lambda sequence values", lambda_values},
        {10, "property suites", property_suites},
    };

    std::set<int> wanted, known;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--known-failures" && i + 1 < argc) known = parse_list(argv[++i]);
        else if (a == "--threads" && i + 1 < argc) threads = std::max(1, std::atoi(argv[++i]));
        else wanted.insert(std::atoi(a.c_str()));
    }

    int unexpected = 0;
    for (const auto& c : criteria) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool is_known = known.count(c.id) > 0;
        if (!o.pass && !is_known) ++unexpected;
        std::printf("criterion %2d %s %s: %s (%.1f s)%s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                    !o.pass && is_known ? " [known failure]" : "");
        std::fflush(stdout);
    }
    return unexpected == 0 ? 0 : 1;
}
