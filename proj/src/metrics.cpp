#include "fdrsel/metrics.hpp"

#include "fdrsel/errors.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace fdrsel {

double bayes_risk(double type1, double type2, double eta, double p, double loss0, double loss_alt)
{
    if (!(eta >= 0.0 && eta <= 1.0)) throw Error(ErrorCode::invalid_argument, "eta must lie in [0, 1]");
    return p * ((1.0 - eta) * type1 * loss0 + eta * type2 * loss_alt);
}

double ReplicateRecord::false_discovery_proportion() const
{
    const Index found = true_positives + false_positives;
    return found == 0 ? 0.0 : static_cast<double>(false_positives) / static_cast<double>(found);
}

double ReplicateRecord::power() const
{
    const Index k = true_positives + false_negatives;
    return k == 0 ? std::numeric_limits<double>::quiet_NaN()
                  : static_cast<double>(true_positives) / static_cast<double>(k);
}

ReplicateRecord score_replicate(const Matrix& X, const Vector& truth, const Vector& estimate)
{
    if (truth.size() != X.cols() || estimate.size() != X.cols())
        throw Error(ErrorCode::invalid_argument, "estimate, truth and design disagree in size");
    ReplicateRecord r;
    for (Index j = 0; j < truth.size(); ++j) {
        const bool chosen = estimate[j] != 0.0, causal = truth[j] != 0.0;
        r.selected += chosen;
        r.true_positives += chosen && causal;
        r.false_positives += chosen && !causal;
        r.false_negatives += !chosen && causal;
    }
    const Vector diff = estimate - truth;
    r.sq_error_beta = diff.squaredNorm();
    r.sq_error_mu = (X * diff).squaredNorm();
    r.beta_norm2 = truth.squaredNorm();
    r.mu_norm2 = (X * truth).squaredNorm();
    return r;
}

double pairwise_sum(const double* values, std::size_t count)
{
    if (count <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < count; ++i) s += values[i];
        return s;
    }
    const std::size_t half = count / 2;
    return pairwise_sum(values, half) + pairwise_sum(values + half, count - half);
}

Estimate estimate(const std::vector<double>& values)
{
    std::vector<double> finite;
    for (double v : values)
        if (std::isfinite(v)) finite.push_back(v);
    Estimate e;
    e.count = static_cast<int>(finite.size());
    if (finite.empty()) {
        e.mean = e.se = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    const double n = static_cast<double>(finite.size());
    e.mean = pairwise_sum(finite.data(), finite.size()) / n;
    if (finite.size() < 2) return e;
    std::vector<double> sq(finite.size());
    for (std::size_t i = 0; i < finite.size(); ++i) sq[i] = (finite[i] - e.mean) * (finite[i] - e.mean);
    e.se = std::sqrt(pairwise_sum(sq.data(), sq.size()) / (n - 1.0) / n);
    return e;
}

std::vector<MethodSummary> summarize(const std::vector<ReplicateRecord>& records)
{
    std::vector<std::string> order;
    std::map<std::string, std::vector<const ReplicateRecord*>> by_method;
    for (const auto& r : records) {
        auto [it, inserted] = by_method.try_emplace(r.method);
        if (inserted) order.push_back(r.method);
        it->second.push_back(&r);
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<MethodSummary> out;
    for (const auto& name : order) {
        MethodSummary s;
        s.method = name;
        std::vector<double> fdr, fwer, power, mis, sel, mse, msp, rmse, rmsp;
        for (const ReplicateRecord* r : by_method[name]) {
            if (r->failed) {
                ++s.failures;
                continue;
            }
            ++s.replicates;
            fdr.push_back(r->false_discovery_proportion());
            fwer.push_back(r->false_positives > 0 ? 1.0 : 0.0);
            power.push_back(r->power());
            mis.push_back(static_cast<double>(r->misclassifications()));
            sel.push_back(static_cast<double>(r->selected));
            mse.push_back(r->sq_error_beta);
            msp.push_back(r->sq_error_mu);
            rmse.push_back(r->beta_norm2 > 0 ? r->sq_error_beta / r->beta_norm2 : nan);
            rmsp.push_back(r->mu_norm2 > 0 ? r->sq_error_mu / r->mu_norm2 : nan);
        }
        s.fdr = estimate(fdr);
        s.fwer = estimate(fwer);
        s.power = estimate(power);
        s.misclassifications = estimate(mis);
        s.selected = estimate(sel);
        s.mse = estimate(mse);
        s.msp = estimate(msp);
        s.relative_mse = estimate(rmse);
        s.relative_msp = estimate(rmsp);
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace fdrsel
