#pragma once

#include "fdrsel/dataset.hpp"

#include <string>
#include <vector>

namespace fdrsel {

/// R = p((1 - eta) t1 delta0 + eta t2 deltaA); with unit losses the expected number of misclassifications.
double bayes_risk(double type1, double type2, double eta, double p, double loss0 = 1.0, double loss_alt = 1.0);

/// Outcome of one method on one simulated data set.
struct ReplicateRecord
{
    int replicate = 0;
    std::string method;
    bool failed = false;
    std::string error;
    Index selected = 0;
    Index true_positives = 0;
    Index false_positives = 0;
    Index false_negatives = 0;
    double sq_error_beta = 0.0;  ///< |b - beta|^2
    double sq_error_mu = 0.0;    ///< |X b - X beta|^2
    double beta_norm2 = 0.0;     ///< |beta|^2
    double mu_norm2 = 0.0;       ///< |X beta|^2

    double false_discovery_proportion() const;
    /// NaN when the generating model is empty.
    double power() const;
    Index misclassifications() const { return false_positives + false_negatives; }
};

/// Fills the confusion counts and errors of a record from an estimate and the truth.
ReplicateRecord score_replicate(const Matrix& X, const Vector& truth, const Vector& estimate);

struct Estimate
{
    double mean = 0.0;
    double se = 0.0;  ///< Monte-Carlo standard error, sd / sqrt(count)
    int count = 0;
};

/// Mean and standard error of the finite values, summed pairwise in index order.
Estimate estimate(const std::vector<double>& values);

struct MethodSummary
{
    std::string method;
    int replicates = 0;  ///< successful replicates
    int failures = 0;
    Estimate fdr, fwer, power, misclassifications, selected, mse, msp, relative_mse, relative_msp;
};

/// Per-method aggregates over the records, methods in first-appearance order. Failed records only count as failures.
std::vector<MethodSummary> summarize(const std::vector<ReplicateRecord>& records);

/// Pairwise (cascade) summation in index order.
double pairwise_sum(const double* values, std::size_t count);

} // namespace fdrsel
