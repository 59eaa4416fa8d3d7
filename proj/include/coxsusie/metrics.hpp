#ifndef COXSUSIE_METRICS_HPP
#define COXSUSIE_METRICS_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "coxsusie/gibss.hpp"

namespace coxsusie {

// One replicate's fit joined to its ground truth.
struct ReplicateResult {
    Eigen::VectorXd pips;
    std::vector<CredibleSet> credible_sets;
    std::vector<int> causal_indices;
    std::string replicate_id;
};

struct CalibrationRow {
    double bin_lower = 0.0;
    double bin_upper = 0.0;
    double mean_pip = 0.0;
    double causal_fraction = 0.0;
    long count = 0;
    bool low_count = false;  // fewer than 10 observations
};

// Variables pooled over replicates, grouped into equally spaced PIP
// bins; only populated bins are returned.
std::vector<CalibrationRow> calibration_table(const std::vector<ReplicateResult>& results,
                                              int bins);

struct PowerFdrRow {
    double threshold = 0.0;
    double fdr = 0.0;    // FP / (TP + FP), 0 when no calls
    double power = 0.0;  // TP / (TP + FN)
    long tp = 0;
    long fp = 0;
    long fn = 0;
};

// A variable is called causal when its PIP >= threshold.
std::vector<PowerFdrRow> power_fdr_curve(const std::vector<ReplicateResult>& results,
                                         const std::vector<double>& thresholds);

struct CsSummary {
    long n_cs = 0;
    std::optional<double> coverage;  // absent when no sets were emitted
    double power = 0.0;
    double median_purity = 0.0;
    double median_mas = 0.0;
    double mean_size = 0.0;
};

CsSummary cs_summary(const std::vector<ReplicateResult>& results);

} // namespace coxsusie

#endif
