#include "coxsusie/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace coxsusie {

namespace {

std::set<int> causal_set(const ReplicateResult& r) {
    return {r.causal_indices.begin(), r.causal_indices.end()};
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

} // namespace

std::vector<CalibrationRow> calibration_table(const std::vector<ReplicateResult>& results,
                                              int bins) {
    if (bins < 2) throw InvalidArgumentError("calibration_table: need >= 2 bins");
    std::vector<double> pip_sum(bins, 0.0);
    std::vector<long> count(bins, 0), causal(bins, 0);

    for (const auto& r : results) {
        const auto causals = causal_set(r);
        for (Eigen::Index j = 0; j < r.pips.size(); ++j) {
            const double pip = r.pips[j];
            int b = static_cast<int>(pip * bins);
            b = std::clamp(b, 0, bins - 1);  // pip == 1 lands in the top bin
            pip_sum[b] += pip;
            ++count[b];
            if (causals.count(static_cast<int>(j))) ++causal[b];
        }
    }

    std::vector<CalibrationRow> table;
    for (int b = 0; b < bins; ++b) {
        if (count[b] == 0) continue;
        CalibrationRow row;
        row.bin_lower = static_cast<double>(b) / bins;
        row.bin_upper = static_cast<double>(b + 1) / bins;
        row.mean_pip = pip_sum[b] / count[b];
        row.causal_fraction = static_cast<double>(causal[b]) / count[b];
        row.count = count[b];
        row.low_count = count[b] < 10;
        table.push_back(row);
    }
    return table;
}

std::vector<PowerFdrRow> power_fdr_curve(const std::vector<ReplicateResult>& results,
                                         const std::vector<double>& thresholds) {
    for (double t : thresholds)
        if (!(t >= 0.0 && t <= 1.0))
            throw InvalidArgumentError("power_fdr_curve: thresholds must be in [0, 1]");

    std::vector<PowerFdrRow> rows;
    rows.reserve(thresholds.size());
    for (double t : thresholds) {
        PowerFdrRow row;
        row.threshold = t;
        for (const auto& r : results) {
            const auto causals = causal_set(r);
            for (Eigen::Index j = 0; j < r.pips.size(); ++j) {
                const bool called = r.pips[j] >= t;
                const bool is_causal = causals.count(static_cast<int>(j)) > 0;
                if (called && is_causal) ++row.tp;
                else if (called && !is_causal) ++row.fp;
                else if (!called && is_causal) ++row.fn;
            }
        }
        row.fdr = (row.tp + row.fp) > 0
                      ? static_cast<double>(row.fp) / static_cast<double>(row.tp + row.fp)
                      : 0.0;
        row.power = (row.tp + row.fn) > 0
                        ? static_cast<double>(row.tp) / static_cast<double>(row.tp + row.fn)
                        : 0.0;
        rows.push_back(row);
    }
    return rows;
}

CsSummary cs_summary(const std::vector<ReplicateResult>& results) {
    CsSummary s;
    long covered = 0, causal_total = 0, causal_in_cs = 0, size_total = 0;
    std::vector<double> purities, mas;

    for (const auto& r : results) {
        const auto causals = causal_set(r);
        causal_total += static_cast<long>(causals.size());
        std::set<int> in_any_cs;
        for (const auto& cs : r.credible_sets) {
            ++s.n_cs;
            size_total += static_cast<long>(cs.members.size());
            purities.push_back(cs.purity);
            mas.push_back(cs.mean_abs_corr);
            bool hit = false;
            for (int j : cs.members) {
                in_any_cs.insert(j);
                if (causals.count(j)) hit = true;
            }
            if (hit) ++covered;
        }
        for (int j : in_any_cs)
            if (causals.count(j)) ++causal_in_cs;
    }

    if (s.n_cs > 0) {
        s.coverage = static_cast<double>(covered) / static_cast<double>(s.n_cs);
        s.mean_size = static_cast<double>(size_total) / static_cast<double>(s.n_cs);
    }
    s.power = causal_total > 0
                  ? static_cast<double>(causal_in_cs) / static_cast<double>(causal_total)
                  : 0.0;
    s.median_purity = median(purities);
    s.median_mas = median(mas);
    return s;
}

} // namespace coxsusie
