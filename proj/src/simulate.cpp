#include "coxsusie/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coxsusie {

namespace {

// splitmix64; decorrelates consecutive seeds and stream ids.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(mix64(mix64(seed) ^ mix64(stream * 0x9e3779b97f4a7c15ULL + 1)));
}

void SimulationSpec::validate() const {
    if (n < 2) throw InvalidArgumentError("simulation: n must be >= 2");
    if (p < 1) throw InvalidArgumentError("simulation: p must be >= 1");
    if (p1 < 0 || p1 > p)
        throw InvalidArgumentError("simulation: causal count must be in [0, p]");
    if (!(effect_variance >= 0.0))
        throw InvalidArgumentError("simulation: effect variance must be >= 0");
    if (!(censoring_level >= 0.0 && censoring_level < 1.0))
        throw InvalidArgumentError("simulation: censoring level must be in [0, 1)");
    if (!(maf > 0.0 && maf <= 0.5))
        throw InvalidArgumentError("simulation: minor allele frequency must be in (0, 0.5]");
    if (!std::isfinite(baseline) || !std::isfinite(effect_mean))
        throw InvalidArgumentError("simulation: baseline and effect mean must be finite");
}

Eigen::MatrixXd simulate_genotypes(Eigen::Index n, Eigen::Index p, double maf,
                                   std::uint64_t seed) {
    if (n < 1 || p < 1) throw InvalidArgumentError("simulate_genotypes: n, p must be >= 1");
    if (!(maf > 0.0 && maf <= 0.5))
        throw InvalidArgumentError("simulate_genotypes: maf must be in (0, 0.5]");
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        auto rng = make_rng(seed, static_cast<std::uint64_t>(j));
        std::binomial_distribution<int> dosage(2, maf);
        for (Eigen::Index i = 0; i < n; ++i)
            X(i, j) = static_cast<double>(dosage(rng));
    }
    return X;
}

SimulatedDataset simulate_tte(Eigen::MatrixXd X, const SimulationSpec& spec) {
    spec.validate();
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (spec.n > 0 && spec.n != n)
        throw DimensionError("simulate_tte: X rows do not match spec.n");
    if (spec.p > 0 && spec.p != p)
        throw DimensionError("simulate_tte: X columns do not match spec.p");
    if (!X.allFinite())
        throw InvalidArgumentError("simulate_tte: design matrix has non-finite entries");

    auto rng = make_rng(spec.seed, 0x7474650ULL);  // coefficient + time stream

    SimulatedDataset out;

    // Causal indices: partial Fisher-Yates draw without replacement.
    std::vector<int> pool(p);
    std::iota(pool.begin(), pool.end(), 0);
    for (Eigen::Index i = 0; i < spec.p1; ++i) {
        std::uniform_int_distribution<Eigen::Index> pick(i, p - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    out.causal_indices.assign(pool.begin(), pool.begin() + spec.p1);
    std::sort(out.causal_indices.begin(), out.causal_indices.end());

    // Effect sizes; redraw the whole vector while any per-sample rate
    // is non-positive (the additive rate admits negative values).
    std::normal_distribution<double> effect(spec.effect_mean,
                                            std::sqrt(spec.effect_variance));
    Eigen::VectorXd rates;
    bool feasible = false;
    for (int attempt = 0; attempt < 100 && !feasible; ++attempt) {
        out.true_coefficients = Eigen::VectorXd::Zero(p);
        for (int j : out.causal_indices)
            out.true_coefficients[j] =
                spec.effect_variance == 0.0 ? spec.effect_mean : effect(rng);
        rates = spec.baseline * Eigen::VectorXd::Ones(n) + X * out.true_coefficients;
        feasible = (rates.array() > 0.0).all();
    }
    if (!feasible)
        throw InvalidArgumentError(
            "simulate_tte: could not draw coefficients keeping all event rates positive");

    out.outcome.times.resize(n);
    out.outcome.status.resize(n);
    const double r = spec.censoring_level;
    if (r == 0.0) {
        for (Eigen::Index i = 0; i < n; ++i) {
            std::exponential_distribution<double> event_time(rates[i]);
            out.outcome.times[i] = event_time(rng);
            out.outcome.status[i] = 1;
        }
    } else {
        const double censor_rate = r * rates.mean() / (1.0 - r);
        for (Eigen::Index i = 0; i < n; ++i) {
            std::exponential_distribution<double> event_time(rates[i]);
            std::exponential_distribution<double> censor_time(censor_rate);
            const double t = event_time(rng);
            const double c = censor_time(rng);
            out.outcome.times[i] = std::min(t, c);
            out.outcome.status[i] = t <= c ? 1 : 0;
        }
    }
    out.realized_censoring_rate = out.outcome.censoring_rate();
    out.X = std::move(X);
    return out;
}

double exponential_race_check(double lambda, double mu, long trials,
                              std::uint64_t seed) {
    if (!(lambda > 0.0) || !(mu > 0.0))
        throw InvalidArgumentError("exponential_race_check: rates must be positive");
    if (trials < 1) throw InvalidArgumentError("exponential_race_check: trials must be >= 1");
    auto rng = make_rng(seed, 0x72616365ULL);
    std::exponential_distribution<double> draw_x(lambda);
    std::exponential_distribution<double> draw_y(mu);
    long wins = 0;
    for (long t = 0; t < trials; ++t) {
        const double x = draw_x(rng);
        const double y = draw_y(rng);
        if (x > y) ++wins;
    }
    return static_cast<double>(wins) / static_cast<double>(trials);
}

} // namespace coxsusie
