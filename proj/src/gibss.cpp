#include "coxsusie/gibss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coxsusie {

namespace {

double pearson(const Eigen::Ref<const Eigen::VectorXd>& a,
               const Eigen::Ref<const Eigen::VectorXd>& b) {
    const double n = static_cast<double>(a.size());
    const Eigen::ArrayXd ac = a.array() - a.mean();
    const Eigen::ArrayXd bc = b.array() - b.mean();
    const double denom = std::sqrt((ac.square().sum()) * (bc.square().sum()));
    if (denom <= 0.0 || n < 2) return 0.0;  // zero-variance column
    return (ac * bc).sum() / denom;
}

} // namespace

std::optional<CredibleSet> credible_set(const Eigen::Ref<const Eigen::VectorXd>& alpha,
                                        double rho,
                                        const Eigen::Ref<const Eigen::MatrixXd>& X,
                                        double purity_threshold) {
    if (!(rho > 0.0 && rho < 1.0))
        throw InvalidArgumentError("credible_set: rho must be in (0, 1)");
    if (X.cols() != alpha.size())
        throw DimensionError("credible_set: X columns do not match alpha length");

    const Eigen::Index p = alpha.size();
    std::vector<int> idx(p);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return alpha[a] > alpha[b]; });

    CredibleSet cs;
    double mass = 0.0;
    for (int j : idx) {
        cs.members.push_back(j);
        mass += alpha[j];
        if (mass >= rho) break;
    }
    cs.coverage_mass = mass;
    cs.sentinel = cs.members.front();

    if (cs.members.size() > 1) {
        double min_corr = 1.0, sum_corr = 0.0;
        int pairs = 0;
        for (std::size_t a = 0; a < cs.members.size(); ++a) {
            for (std::size_t b = a + 1; b < cs.members.size(); ++b) {
                const double r = std::abs(pearson(X.col(cs.members[a]), X.col(cs.members[b])));
                min_corr = std::min(min_corr, r);
                sum_corr += r;
                ++pairs;
            }
        }
        cs.purity = min_corr;
        cs.mean_abs_corr = sum_corr / pairs;
    }
    if (cs.purity < purity_threshold) return std::nullopt;
    return cs;
}

Eigen::VectorXd compute_pips(const SusieFit& fit) {
    if (fit.effects.empty()) throw InvalidArgumentError("compute_pips: no fitted effects");
    const Eigen::Index p = fit.effects.front().alpha.size();
    Eigen::ArrayXd not_included = Eigen::ArrayXd::Ones(p);
    for (const auto& effect : fit.effects)
        not_included *= (1.0 - effect.alpha.array()).max(0.0);
    return (1.0 - not_included).matrix();
}

SusieFit fit_susie(const Eigen::Ref<const Eigen::MatrixXd>& X,
                   const SurvivalOutcome& outcome, int L,
                   const Eigen::Ref<const Eigen::VectorXd>& pi,
                   const Eigen::Ref<const Eigen::VectorXd>& sigma0_init,
                   const Eigen::Ref<const Eigen::VectorXd>& covariate_offset,
                   const SusieOptions& opts) {
    if (L < 1) throw InvalidArgumentError("fit_susie: L must be >= 1");
    if (opts.max_iter < 1) throw InvalidArgumentError("fit_susie: max_iter must be >= 1");
    if (sigma0_init.size() != L)
        throw DimensionError("fit_susie: sigma0_init length must equal L");
    if ((sigma0_init.array() <= 0.0).any())
        throw InvalidArgumentError("fit_susie: initial prior variances must be positive");
    validate_prior_weights(pi);
    if (X.cols() != pi.size())
        throw DimensionError("fit_susie: X columns do not match prior weight length");
    if (X.rows() != outcome.n())
        throw DimensionError("fit_susie: X rows do not match outcome length");
    if (covariate_offset.size() != 0 && covariate_offset.size() != X.rows())
        throw DimensionError("fit_susie: covariate offset length does not match n");

    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    const RiskSetOrder order(outcome);
    const SerOptions ser_opts{opts.threads};

    const Eigen::VectorXd base_offset =
        covariate_offset.size() == 0 ? Eigen::VectorXd::Zero(n).eval()
                                     : Eigen::VectorXd(covariate_offset);

    SusieFit fit;
    fit.effects.resize(L);
    fit.posterior_means.assign(L, Eigen::VectorXd::Zero(p));
    Eigen::VectorXd sigma0 = sigma0_init;
    Eigen::VectorXd c = base_offset;

    Eigen::VectorXd total_effect = Eigen::VectorXd::Zero(p);
    // Floor keeps the prior variance usable by the posterior formulas
    // even after a collapsed effect shrinks it for many iterations.
    constexpr double kSigma0Floor = 1e-300;

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        long fits_this_iter = 0;
        for (int l = 0; l < L; ++l) {
            Eigen::VectorXd c_l = c - X * fit.posterior_means[l];
            fit.effects[l] = fit_ser(X, outcome, c_l, pi, sigma0[l], order, ser_opts);
            fits_this_iter += p;
            sigma0[l] = std::max(update_prior_variance(fit.effects[l]), kSigma0Floor);
            fit.posterior_means[l] = posterior_mean_effect(fit.effects[l]);
            c = c_l + X * fit.posterior_means[l];

            // Bookkeeping check: c must always equal the covariate
            // offset plus the combined effect of all L posteriors.
            Eigen::VectorXd combined = Eigen::VectorXd::Zero(p);
            for (int k = 0; k < L; ++k) combined += fit.posterior_means[k];
            const double residual =
                (c - base_offset - X * combined).cwiseAbs().maxCoeff();
            fit.max_offset_residual = std::max(fit.max_offset_residual, residual);
        }
        fit.fit_counts.push_back(fits_this_iter);
        ++fit.iterations;

        Eigen::VectorXd new_total = Eigen::VectorXd::Zero(p);
        for (int l = 0; l < L; ++l) new_total += fit.posterior_means[l];
        const double delta = (new_total - total_effect).cwiseAbs().maxCoeff();
        fit.max_delta_history.push_back(delta);
        total_effect = std::move(new_total);
        if (delta < opts.tol) {
            fit.converged = true;
            break;
        }
    }

    fit.offsets = c;
    fit.effect_active.assign(L, 1);
    for (int l = 0; l < L; ++l) {
        if (sigma0[l] < opts.sigma0_inactive || fit.effects[l].all_degenerate)
            fit.effect_active[l] = 0;
    }
    fit.pips = compute_pips(fit);
    for (int l = 0; l < L; ++l) {
        if (!fit.effect_active[l]) continue;
        auto cs = credible_set(fit.effects[l].alpha, opts.rho, X, opts.purity_threshold);
        if (cs) {
            cs->effect_index = l;
            fit.credible_sets.push_back(std::move(*cs));
        }
    }
    return fit;
}

} // namespace coxsusie
