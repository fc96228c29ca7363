#include "fdrsel/cv.hpp"
#include "fdrsel/errors.hpp"
#include "fdrsel/knockoffs.hpp"
#include "fdrsel/lasso.hpp"
#include "fdrsel/metrics.hpp"
#include "fdrsel/scenario.hpp"
#include "fdrsel/slope.hpp"
#include "fdrsel/sorted_l1.hpp"
#include "fdrsel/stepwise.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace fdrsel;

namespace {

Dataset make_data(const Matrix& X, const Vector& y, const std::string& family, std::optional<std::vector<std::string>> names)
{
    if (names) return Dataset(y, X, *names, parse_family(family));
    return Dataset(y, X, parse_family(family));
}

py::dict fit_dict(const Vector& beta, double intercept)
{
    std::vector<Index> support;
    for (Index j = 0; j < beta.size(); ++j)
        if (beta[j] != 0.0) support.push_back(j);
    py::dict out;
    out["coefficients"] = beta;
    out["intercept"] = intercept;
    out["support"] = support;
    return out;
}

py::dict estimate_dict(const Estimate& e)
{
    py::dict out;
    out["mean"] = e.mean;
    out["se"] = e.se;
    out["count"] = e.count;
    return out;
}

} // namespace

PYBIND11_MODULE(_fdrsel, m)
{
    m.doc() = "L0 criteria, SLOPE, LASSO and knockoff variable selection";

    // translators run newest first, so the subclasses come after the base
    auto& base = py::register_exception<Error>(m, "FdrselError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<FitError>(m, "FitError", base.ptr());

    m.def("make_lambda",
          [](const std::string& rule, Index p, double q, double c, double delta, double sigma, double scale, double value,
             Index n) {
              LambdaParams lp{.c = c, .q = q, .delta = delta, .sigma = sigma, .scale = scale, .value = value, .n = n};
              return make_lambda(parse_lambda_rule(rule), p, lp).values;
          },
          py::arg("rule"), py::arg("p"), py::arg("q") = 0.2, py::arg("c") = 1.0, py::arg("delta") = 0.05,
          py::arg("sigma") = 1.0, py::arg("scale") = 1.0, py::arg("value") = 1.0, py::arg("n") = 0,
          "Tuning sequence: bh, second-order, inflated-bh, heuristic or constant.");

    m.def("sorted_l1_norm", &sorted_l1_norm, py::arg("beta"), py::arg("lam"));
    m.def("prox_sorted_l1", &prox_sorted_l1, py::arg("v"), py::arg("lam"));

    m.def("fit_slope",
          [](const Matrix& X, const Vector& y, const Vector& lam, const std::string& family, bool intercept) {
              SlopeOptions opt;
              opt.intercept = intercept;
              const SlopeFit fit = fit_slope(make_data(X, y, family, std::nullopt), explicit_lambda(lam), opt);
              py::dict out = fit_dict(fit.coefficients, fit.intercept);
              out["objective"] = fit.objective;
              out["kkt"] = fit.kkt;
              out["iterations"] = fit.iterations;
              out["converged"] = fit.converged;
              out["clusters"] = fit.clusters;
              return out;
          },
          py::arg("X"), py::arg("y"), py::arg("lam"), py::arg("family") = "gaussian", py::arg("intercept") = true);

    m.def("fit_lasso",
          [](const Matrix& X, const Vector& y, double lambda, const std::string& family) {
              const LassoFit fit = fit_lasso(make_data(X, y, family, std::nullopt), lambda);
              return fit_dict(fit.coefficients, fit.intercept);
          },
          py::arg("X"), py::arg("y"), py::arg("lam"), py::arg("family") = "gaussian");

    m.def("select",
          [](const Matrix& X, const Vector& y, const std::string& criterion, const std::string& plan,
             const std::string& family, Index p_total, double E) {
              const Dataset d = make_data(X, y, family, std::nullopt);
              CriterionSpec spec(parse_criterion(criterion), p_total > 0 ? p_total : d.p());
              spec.E = E;
              const SearchPlan sp = plan == "default" ? SearchPlan::standard(spec)
                                    : plan == "escape" ? SearchPlan::escape_local_minimum(spec)
                                                       : SearchPlan::parse(plan, spec);
              const FitResult fit = run_plan(d, sp);
              Vector beta = Vector::Zero(d.p());
              for (std::size_t i = 0; i < fit.support.size(); ++i) beta[fit.support[i]] = fit.coefficients[static_cast<Index>(i)];
              py::dict out = fit_dict(beta, fit.intercept);
              out["support"] = fit.support;
              out["criterion_value"] = fit.criterion_value;
              out["plan"] = sp.describe();
              return out;
          },
          py::arg("X"), py::arg("y"), py::arg("criterion") = "mbic2", py::arg("plan") = "default",
          py::arg("family") = "gaussian", py::arg("p_total") = 0, py::arg("E") = 4.0,
          "Stepwise search minimizing an L0 criterion.");

    m.def("cv_select",
          [](const Matrix& X, const Vector& y, const std::string& method, int folds, std::uint64_t seed, bool one_se,
             const std::string& family) {
              CvSpec cv;
              cv.folds = folds;
              cv.seed = seed;
              cv.one_se = one_se;
              const CvResult r = cv_select(make_data(X, y, family, std::nullopt), cv, parse_cv_method(method));
              py::dict out = fit_dict(r.coefficients, r.intercept);
              const CvPoint& best = r.selected();
              out["lam"] = best.lambda;
              out["c"] = best.c;
              out["q"] = best.q;
              out["mean_error"] = best.mean;
              out["se"] = best.se;
              return out;
          },
          py::arg("X"), py::arg("y"), py::arg("method") = "lasso", py::arg("folds") = 10, py::arg("seed") = 1,
          py::arg("one_se") = false, py::arg("family") = "gaussian");

    m.def("knockoff_threshold",
          [](const Vector& W, double q) {
              const KnockoffThreshold t = knockoff_threshold(W, q);
              return py::make_tuple(t.threshold, t.selected);
          },
          py::arg("W"), py::arg("q"));

    m.def("knockoff_filter",
          [](const Matrix& X, const Vector& y, const Matrix& sigma, double q, std::uint64_t seed) {
              RngStream rng(seed);
              CvSpec cv;
              cv.seed = seed;
              const KnockoffResult r = knockoff_filter(Dataset(y, X), sigma, q, rng, cv);
              py::dict out;
              out["W"] = r.W;
              out["threshold"] = r.threshold;
              out["selected"] = r.selected;
              return out;
          },
          py::arg("X"), py::arg("y"), py::arg("sigma"), py::arg("q") = 0.2, py::arg("seed") = 1);

    m.def("bayes_risk", &bayes_risk, py::arg("t1"), py::arg("t2"), py::arg("eta"), py::arg("p"), py::arg("loss0") = 1.0,
          py::arg("loss_alt") = 1.0);

    m.def("builtin_scenarios", [] {
        std::vector<std::string> out;
        for (const auto& s : builtin_scenarios()) out.push_back(s.name);
        return out;
    });

    m.def("simulate",
          [](const std::string& name, int replicates, Index n, std::optional<std::vector<std::string>> methods,
             std::optional<std::uint64_t> seed, int threads) {
              ScenarioSpec spec = builtin_scenario(name);
              if (n > 0) spec.n = n;
              if (methods) spec.methods = *methods;
              if (seed) spec.seed = *seed;
              MetricsReport rep;
              {
                  py::gil_scoped_release release;
                  rep = run_scenario(spec, MethodRegistry::builtin(), {.threads = threads, .replicates = replicates});
              }
              py::list out;
              for (const auto& s : rep.summaries) {
                  py::dict row;
                  row["method"] = s.method;
                  row["replicates"] = s.replicates;
                  row["failures"] = s.failures;
                  row["fdr"] = estimate_dict(s.fdr);
                  row["fwer"] = estimate_dict(s.fwer);
                  row["power"] = estimate_dict(s.power);
                  row["misclassifications"] = estimate_dict(s.misclassifications);
                  row["mse"] = estimate_dict(s.mse);
                  row["msp"] = estimate_dict(s.msp);
                  out.append(row);
              }
              return out;
          },
          py::arg("scenario"), py::arg("replicates") = 0, py::arg("n") = 0, py::arg("methods") = std::nullopt,
          py::arg("seed") = std::nullopt, py::arg("threads") = 1,
          "Run a built-in scenario and return one summary dict per method.");
}
