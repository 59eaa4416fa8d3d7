#include "coxsusie/survival.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coxsusie {

void SurvivalOutcome::validate() const {
    if (times.size() != status.size())
        throw DimensionError("survival outcome: times and status lengths differ");
    if (times.size() < 2)
        throw InvalidArgumentError("survival outcome: need at least 2 samples");
    for (Eigen::Index i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]) || times[i] < 0.0)
            throw InvalidArgumentError("survival outcome: times must be finite and >= 0");
        if (status[i] != 0 && status[i] != 1)
            throw InvalidArgumentError("survival outcome: status must be 0 or 1");
    }
    if (status.sum() == 0)
        throw DegenerateDataError("survival outcome: no observed events");
}

RiskSetOrder::RiskSetOrder(const SurvivalOutcome& outcome) {
    outcome.validate();
    const int n = static_cast<int>(outcome.n());
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    // Descending time; ties broken by index for determinism.
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
        return outcome.times[a] > outcome.times[b];
    });
    group_begin_.push_back(0);
    for (int i = 1; i < n; ++i) {
        if (outcome.times[order_[i]] != outcome.times[order_[i - 1]])
            group_begin_.push_back(i);
    }
    group_begin_.push_back(n);
    status_ = outcome.status;
}

namespace {

void check_covariate(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index n) {
    if (x.size() != n)
        throw DimensionError("covariate length does not match outcome length");
    if (!x.allFinite())
        throw InvalidArgumentError("covariate contains non-finite values");
}

void check_offsets(const Eigen::Ref<const Eigen::VectorXd>& offsets, Eigen::Index n) {
    if (offsets.size() == 0) return;  // empty = all-zero offsets
    if (offsets.size() != n)
        throw DimensionError("offset length does not match outcome length");
    if (!offsets.allFinite())
        throw InvalidArgumentError("offsets contain non-finite values");
}

// Neumaier-compensated accumulator; the risk-set sums grow to O(n)
// while per-event ratio terms are O(b*x), so uncompensated rounding
// drift would dominate likelihood-ratio differences near 1e-10.
struct CompensatedSum {
    double sum = 0.0;
    double c = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            c += (sum - t) + v;
        else
            c += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + c; }
};

// eta_i = b * (x_i - mean(x)) + c_i. Centering x leaves the partial
// likelihood, score and Hessian unchanged (a constant shift of eta
// cancels in every risk-set ratio) and keeps the risk-set moments of x
// well conditioned for genotype-coded covariates.
Eigen::VectorXd linear_predictor(double b, const Eigen::Ref<const Eigen::VectorXd>& x,
                                 const Eigen::Ref<const Eigen::VectorXd>& offsets,
                                 double x_center) {
    Eigen::VectorXd eta = b * (x.array() - x_center).matrix();
    if (offsets.size() > 0) eta += offsets;
    return eta;
}

struct CoxEval {
    double loglik = 0.0;
    double score = 0.0;
    double hessian = 0.0;
};

// One sweep over samples in descending time order. S0/S1/S2 are the
// running risk-set sums of w, w*x, w*x^2 with w = exp(eta - max eta);
// every member of a tied-time group enters the risk set before the
// group's events are scored. Risk-set denominators are buffered per
// event so the log pass runs vectorized instead of per event.
CoxEval cox_eval(double b, const Eigen::Ref<const Eigen::VectorXd>& x,
                 const Eigen::Ref<const Eigen::VectorXd>& offsets,
                 const RiskSetOrder& order, bool want_derivatives) {
    const double x_center = x.mean();
    const Eigen::VectorXd eta = linear_predictor(b, x, offsets, x_center);
    const double m = eta.maxCoeff();
    const Eigen::VectorXd w = (eta.array() - m).exp();

    CoxEval out;
    const auto& ord = order.order();
    const auto& groups = order.group_begin();
    const auto& status = order.status();
    Eigen::VectorXd denominators(order.n());
    Eigen::Index n_events = 0;
    double eta_events = 0.0;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
        for (int i = groups[g]; i < groups[g + 1]; ++i) {
            const int j = ord[i];
            s0 += w[j];
            if (want_derivatives) {
                const double xc = x[j] - x_center;
                s1 += w[j] * xc;
                s2 += w[j] * xc * xc;
            }
        }
        for (int i = groups[g]; i < groups[g + 1]; ++i) {
            const int j = ord[i];
            if (status[j] == 0) continue;
            eta_events += eta[j] - m;
            denominators[n_events++] = s0;
            if (want_derivatives) {
                const double mean = s1 / s0;
                out.score += (x[j] - x_center) - mean;
                out.hessian -= s2 / s0 - mean * mean;
            }
        }
    }
    out.loglik = eta_events - denominators.head(n_events).array().log().sum();
    return out;
}

} // namespace

double partial_loglik(double b, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& offsets,
                      const SurvivalOutcome& outcome, const RiskSetOrder& order) {
    if (!std::isfinite(b)) throw InvalidArgumentError("coefficient b must be finite");
    check_covariate(x, outcome.n());
    check_offsets(offsets, outcome.n());
    return cox_eval(b, x, offsets, order, false).loglik;
}

double partial_loglik(double b, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& offsets,
                      const SurvivalOutcome& outcome) {
    RiskSetOrder order(outcome);
    return partial_loglik(b, x, offsets, outcome, order);
}

double partial_loglik_ratio(double b, const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& offsets,
                            const SurvivalOutcome& outcome, const RiskSetOrder& order) {
    if (!std::isfinite(b)) throw InvalidArgumentError("coefficient b must be finite");
    check_covariate(x, outcome.n());
    check_offsets(offsets, outcome.n());

    // Per-event term: delta_j - log(S0(b)/S0(0)), with
    // delta_j = b * (x_j - mean(x)). The risk-set ratio is accumulated
    // against the shared null weights through expm1, so each event's
    // rounding error is relative to the small increment delta rather
    // than to the O(n) sums; with the plain two-sweep formulation the
    // coherent per-event bias grows as n * eps and caps the accuracy of
    // likelihood-ratio differences near 1e-10.
    const double x_center = x.mean();
    Eigen::VectorXd w0;
    if (offsets.size() > 0) {
        w0 = (offsets.array() - offsets.maxCoeff()).exp();
    } else {
        w0 = Eigen::VectorXd::Ones(x.size());
    }

    const auto& ord = order.order();
    const auto& groups = order.group_begin();
    const auto& status = order.status();
    CompensatedSum t0;       // sum of null weights over the risk set
    CompensatedSum u;        // sum of w0 * (exp(delta) - 1)
    CompensatedSum s0;       // sum of w0 * exp(delta), for far ratios
    CompensatedSum ratio;
    for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
        for (int i = groups[g]; i < groups[g + 1]; ++i) {
            const int j = ord[i];
            const double inc = w0[j] * std::expm1(b * (x[j] - x_center));
            t0.add(w0[j]);
            u.add(inc);
            s0.add(w0[j] + inc);
        }
        const double r = u.value() / t0.value();
        const double log_risk_ratio =
            r > -0.5 ? std::log1p(r) : std::log(s0.value() / t0.value());
        for (int i = groups[g]; i < groups[g + 1]; ++i) {
            const int j = ord[i];
            if (status[j] == 0) continue;
            ratio.add(b * (x[j] - x_center) - log_risk_ratio);
        }
    }
    return ratio.value();
}

std::pair<double, double> partial_score_hessian(
    double b, const Eigen::Ref<const Eigen::VectorXd>& x,
    const Eigen::Ref<const Eigen::VectorXd>& offsets, const SurvivalOutcome& outcome,
    const RiskSetOrder& order) {
    if (!std::isfinite(b)) throw InvalidArgumentError("coefficient b must be finite");
    check_covariate(x, outcome.n());
    check_offsets(offsets, outcome.n());
    const CoxEval e = cox_eval(b, x, offsets, order, true);
    return {e.score, e.hessian};
}

std::pair<double, double> partial_score_hessian(
    double b, const Eigen::Ref<const Eigen::VectorXd>& x,
    const Eigen::Ref<const Eigen::VectorXd>& offsets, const SurvivalOutcome& outcome) {
    RiskSetOrder order(outcome);
    return partial_score_hessian(b, x, offsets, outcome, order);
}

UnivariateFit fit_univariate(const Eigen::Ref<const Eigen::VectorXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& offsets,
                             const SurvivalOutcome& outcome, const RiskSetOrder& order,
                             const NewtonOptions& opts) {
    check_covariate(x, outcome.n());
    check_offsets(offsets, outcome.n());

    UnivariateFit fit;
    if (x.maxCoeff() == x.minCoeff()) return fit;  // constant covariate: no information

    CoxEval cur = cox_eval(0.0, x, offsets, order, true);
    // Information at b = 0 below this scale-aware floor means the
    // covariate is numerically constant on the risk sets.
    const double x_scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    if (-cur.hessian <= 1e-12 * x_scale * x_scale) return fit;

    const double score0 = std::abs(cur.score);
    const double score_tol = opts.tol * std::max(1.0, score0);
    double b = 0.0;
    bool ok = false;
    int iter = 0;
    while (iter < opts.max_iter) {
        if (std::abs(cur.score) <= score_tol) {
            ok = true;
            break;
        }
        ++iter;
        if (cur.hessian >= 0.0) break;  // flat direction; cannot step
        double step = -cur.score / cur.hessian;
        CoxEval next;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h) {
            next = cox_eval(b + step, x, offsets, order, true);
            if (next.loglik >= cur.loglik - 1e-12 * std::abs(cur.loglik)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        b += step;
        cur = next;
    }

    fit.iterations = iter;
    fit.converged = ok && cur.hessian < 0.0;
    if (cur.hessian < 0.0) {
        // Last iterate is reported even without convergence; callers
        // inspect the flag and decide.
        fit.bhat = b;
        fit.se = 1.0 / std::sqrt(-cur.hessian);
        fit.log_lr = partial_loglik_ratio(b, x, offsets, outcome, order);
    }
    return fit;
}

UnivariateFit fit_univariate(const Eigen::Ref<const Eigen::VectorXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& offsets,
                             const SurvivalOutcome& outcome, const NewtonOptions& opts) {
    RiskSetOrder order(outcome);
    return fit_univariate(x, offsets, outcome, order, opts);
}

namespace {

struct CoxEvalMulti {
    double loglik = 0.0;
    Eigen::VectorXd score;
    Eigen::MatrixXd neg_hessian;
};

CoxEvalMulti cox_eval_multi(const Eigen::VectorXd& beta,
                            const Eigen::Ref<const Eigen::MatrixXd>& Zc,
                            const RiskSetOrder& order) {
    const Eigen::Index m = Zc.cols();
    const Eigen::VectorXd eta = Zc * beta;
    const double mx = eta.maxCoeff();
    const Eigen::VectorXd w = (eta.array() - mx).exp();

    CoxEvalMulti out;
    out.score = Eigen::VectorXd::Zero(m);
    out.neg_hessian = Eigen::MatrixXd::Zero(m, m);
    const auto& ord = order.order();
    const auto& groups = order.group_begin();
    const auto& status = order.status();
    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
        for (int i = groups[g]; i < groups[g + 1]; ++i) {
            const int j = ord[i];
            s0 += w[j];
            s1.noalias() += w[j] * Zc.row(j).transpose();
            s2.noalias() += w[j] * Zc.row(j).transpose() * Zc.row(j);
        }
        for (int i = groups[g]; i < groups[g + 1]; ++i) {
            const int j = ord[i];
            if (status[j] == 0) continue;
            const Eigen::VectorXd mean = s1 / s0;
            out.loglik += (eta[j] - mx) - std::log(s0);
            out.score += Zc.row(j).transpose() - mean;
            out.neg_hessian += s2 / s0 - mean * mean.transpose();
        }
    }
    return out;
}

} // namespace

MultivariateFit fit_multivariate(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                                 const SurvivalOutcome& outcome,
                                 const NewtonOptions& opts) {
    if (Z.cols() < 1) throw InvalidArgumentError("design matrix must have >= 1 column");
    if (Z.rows() != outcome.n())
        throw DimensionError("design matrix rows do not match outcome length");
    if (!Z.allFinite())
        throw InvalidArgumentError("design matrix contains non-finite values");
    RiskSetOrder order(outcome);

    // Column-center; a covariate in the span of the constant vector is
    // unidentifiable under the partial likelihood, so rank is checked
    // on the centered design.
    const Eigen::Index m = Z.cols();
    Eigen::MatrixXd Zc = Z.rowwise() - Z.colwise().mean();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Zc);
    if (qr.rank() < m)
        throw SingularDesignError("design matrix is rank deficient after centering");

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(m);
    CoxEvalMulti cur = cox_eval_multi(beta, Zc, order);

    MultivariateFit fit;
    bool ok = false;
    int iter = 0;
    const int max_iter = std::max(opts.max_iter, 50);
    while (iter < max_iter) {
        // Absolute gradient tolerance: the fitted offsets feed later
        // stages, so first-order optimality is held tight.
        if (cur.score.cwiseAbs().maxCoeff() <= opts.tol) {
            ok = true;
            break;
        }
        ++iter;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(cur.neg_hessian);
        if (ldlt.info() != Eigen::Success)
            throw SingularDesignError("observed information is singular");
        Eigen::VectorXd step = ldlt.solve(cur.score);
        CoxEvalMulti next;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h) {
            next = cox_eval_multi(beta + step, Zc, order);
            if (next.loglik >= cur.loglik - 1e-12 * std::abs(cur.loglik)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        beta += step;
        cur = next;
    }

    fit.coefficients = beta;
    // Linear predictor on the original (uncentered) scale; the constant
    // shift is irrelevant downstream but matches Z * beta as documented.
    fit.linear_predictor = Z * beta;
    fit.converged = ok;
    fit.iterations = iter;
    return fit;
}

} // namespace coxsusie
