#include "dse/risk.hpp"

#include <cmath>

#include "dse/error.hpp"

namespace dse {

LossValue sigmoid_loss(double t, int y) {
    double z = t * static_cast<double>(y);
    double l;
    if (z >= 0.0) {
        double e = std::exp(-z);
        l = e / (1.0 + e);
    } else {
        l = 1.0 / (1.0 + std::exp(z));
    }
    return {l, -static_cast<double>(y) * l * (1.0 - l)};
}

double zero_one_loss(double t, int y) {
    int pred = t > 0.0 ? 1 : -1;
    return pred == y ? 0.0 : 1.0;
}

RiskMode risk_mode_from_string(const std::string& s) {
    if (s == "pn") return RiskMode::pn;
    if (s == "naive") return RiskMode::naive;
    if (s == "upu") return RiskMode::upu;
    if (s == "nnpu") return RiskMode::nnpu;
    if (s == "pnu") return RiskMode::pnu;
    throw ConfigError("unknown risk mode: " + s);
}

std::string to_string(RiskMode mode) {
    switch (mode) {
        case RiskMode::pn: return "pn";
        case RiskMode::naive: return "naive";
        case RiskMode::upu: return "upu";
        case RiskMode::nnpu: return "nnpu";
        case RiskMode::pnu: return "pnu";
    }
    return "?";
}

void RiskConfig::validate() const {
    if (!(prior >= 0.0 && prior <= 1.0)) throw ConfigError("prior must lie in [0, 1]");
    if (!(alpha >= 1.0)) throw ConfigError("alpha must be >= 1");
    if (!(nn_beta >= 0.0)) throw ConfigError("nn_beta must be >= 0");
    if (!(nn_gamma > 0.0)) throw ConfigError("nn_gamma must be > 0");
    if (!(pnu_gamma >= 0.0 && pnu_gamma <= 1.0)) throw ConfigError("pnu_gamma must lie in [0, 1]");
}

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw DataError(what);
}

// Adds weight * mean_S l(g_i, y) and its per-score derivatives. Returns the
// term value; an empty set contributes nothing (callers enforce emptiness
// policy before getting here).
double loss_term(std::span<const double> scores, int y, double weight, Loss loss,
                 std::vector<double>& coeff) {
    if (scores.empty() || weight == 0.0) return 0.0;
    double inv = 1.0 / static_cast<double>(scores.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (loss == Loss::sigmoid) {
            LossValue lv = sigmoid_loss(scores[i], y);
            mean += lv.loss;
            coeff[i] += weight * inv * lv.dloss_dt;
        } else {
            mean += zero_one_loss(scores[i], y);
        }
    }
    return weight * mean * inv;
}

RiskOutput pn_impl(std::span<const double> p, std::span<const double> n, double prior, Loss loss,
                   bool allow_empty) {
    require(prior >= 0.0 && prior <= 1.0, "prior must lie in [0, 1]");
    if (!allow_empty) {
        require(!p.empty(), "supervised risk needs a non-empty positive set");
        require(!n.empty(), "supervised risk needs a non-empty negative set");
    }
    RiskOutput out;
    out.coeff_p.assign(p.size(), 0.0);
    out.coeff_n.assign(n.size(), 0.0);
    out.positive_part = loss_term(p, +1, prior, loss, out.coeff_p);
    out.negative_part = loss_term(n, -1, 1.0 - prior, loss, out.coeff_n);
    out.reported_risk = out.positive_part + out.negative_part;
    out.grad_objective = out.reported_risk;
    return out;
}

RiskOutput upu_parts(std::span<const double> p, std::span<const double> u, double prior, double alpha,
                     Loss loss, bool allow_empty, const char* name) {
    require(prior >= 0.0 && prior <= 1.0, "prior must lie in [0, 1]");
    require(alpha > 0.0, "alpha must be positive");
    if (!allow_empty) {
        if (p.empty()) throw DataError(std::string(name) + " needs a non-empty positive set");
        if (u.empty()) throw DataError(std::string(name) + " needs a non-empty unlabeled set");
    }
    RiskOutput out;
    out.coeff_p.assign(p.size(), 0.0);
    out.coeff_u.assign(u.size(), 0.0);
    double w = alpha * prior;
    out.positive_part = loss_term(p, +1, w, loss, out.coeff_p);
    double p_as_neg = loss_term(p, -1, -w, loss, out.coeff_p);
    double u_as_neg = loss_term(u, -1, 1.0, loss, out.coeff_u);
    out.negative_part = u_as_neg + p_as_neg;
    out.reported_risk = out.positive_part + out.negative_part;
    out.grad_objective = out.reported_risk;
    return out;
}

RiskOutput nnpu_impl(std::span<const double> p, std::span<const double> u, double prior, double alpha,
                     double beta, double gamma, Loss loss, bool allow_empty) {
    require(beta >= 0.0, "nn_beta must be >= 0");
    require(gamma > 0.0, "nn_gamma must be > 0");
    RiskOutput out = upu_parts(p, u, prior, alpha, loss, allow_empty, "non-negative PU risk");
    if (out.negative_part >= -beta) return out;

    // The estimated negative risk went below the floor: the model is fitting
    // the unlabeled pool as if it were all-negative. Report the clamped risk
    // and step against the offending part instead of following it further.
    out.correction_active = true;
    out.reported_risk = out.positive_part - beta;
    out.grad_objective = -gamma * out.negative_part;
    if (loss == Loss::sigmoid) {
        double w = alpha * prior;
        out.coeff_p.assign(p.size(), 0.0);
        out.coeff_u.assign(u.size(), 0.0);
        std::vector<double> tmp_p(p.size(), 0.0), tmp_u(u.size(), 0.0);
        loss_term(p, -1, -w, loss, tmp_p);
        loss_term(u, -1, 1.0, loss, tmp_u);
        for (std::size_t i = 0; i < p.size(); ++i) out.coeff_p[i] = -gamma * tmp_p[i];
        for (std::size_t i = 0; i < u.size(); ++i) out.coeff_u[i] = -gamma * tmp_u[i];
    }
    return out;
}

RiskOutput pnu_impl(std::span<const double> p, std::span<const double> n, std::span<const double> u,
                    double prior, double pnu_gamma, double alpha, Loss loss, bool non_negative,
                    double nn_beta, double nn_gamma, bool allow_empty) {
    require(pnu_gamma >= 0.0 && pnu_gamma <= 1.0, "pnu_gamma must lie in [0, 1]");
    RiskOutput pn = pn_impl(p, n, prior, loss, allow_empty);
    RiskOutput pu = non_negative ? nnpu_impl(p, u, prior, alpha, nn_beta, nn_gamma, loss, allow_empty)
                                 : upu_parts(p, u, prior, alpha, loss, allow_empty, "unbiased PU risk");
    RiskOutput out;
    double g = pnu_gamma;
    out.reported_risk = g * pn.reported_risk + (1.0 - g) * pu.reported_risk;
    out.grad_objective = g * pn.grad_objective + (1.0 - g) * pu.grad_objective;
    out.positive_part = g * pn.positive_part + (1.0 - g) * pu.positive_part;
    out.negative_part = g * pn.negative_part + (1.0 - g) * pu.negative_part;
    out.correction_active = pu.correction_active;
    out.coeff_p.assign(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        out.coeff_p[i] = g * pn.coeff_p[i] + (1.0 - g) * pu.coeff_p[i];
    out.coeff_n.assign(n.size(), 0.0);
    for (std::size_t i = 0; i < n.size(); ++i) out.coeff_n[i] = g * pn.coeff_n[i];
    out.coeff_u.assign(u.size(), 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) out.coeff_u[i] = (1.0 - g) * pu.coeff_u[i];
    return out;
}

} // namespace

RiskOutput pn_risk(std::span<const double> p_scores, std::span<const double> n_scores, double prior,
                   Loss loss) {
    return pn_impl(p_scores, n_scores, prior, loss, false);
}

RiskOutput naive_risk(std::span<const double> lp_scores, std::span<const double> u_scores, Loss loss) {
    RiskOutput pn = pn_impl(lp_scores, u_scores, 0.5, loss, false);
    RiskOutput out = pn;
    out.coeff_u = std::move(pn.coeff_n);
    out.coeff_n.clear();
    return out;
}

RiskOutput upu_risk(std::span<const double> p_scores, std::span<const double> u_scores, double prior,
                    double alpha, Loss loss) {
    return upu_parts(p_scores, u_scores, prior, alpha, loss, false, "unbiased PU risk");
}

RiskOutput nnpu_risk(std::span<const double> p_scores, std::span<const double> u_scores, double prior,
                     double alpha, double beta, double gamma, Loss loss) {
    return nnpu_impl(p_scores, u_scores, prior, alpha, beta, gamma, loss, false);
}

RiskOutput pnu_risk(std::span<const double> p_scores, std::span<const double> n_scores,
                    std::span<const double> u_scores, double prior, double pnu_gamma, double alpha,
                    Loss loss, bool non_negative, double nn_beta, double nn_gamma) {
    return pnu_impl(p_scores, n_scores, u_scores, prior, pnu_gamma, alpha, loss, non_negative, nn_beta,
                    nn_gamma, false);
}

RiskOutput evaluate_risk(const RiskConfig& config, std::span<const double> p_scores,
                         std::span<const double> u_scores, std::span<const double> n_scores, Loss loss,
                         bool allow_empty) {
    switch (config.mode) {
        case RiskMode::pn:
            return pn_impl(p_scores, n_scores, config.prior, loss, allow_empty);
        case RiskMode::naive: {
            RiskOutput pn = pn_impl(p_scores, u_scores, 0.5, loss, allow_empty);
            RiskOutput out = pn;
            out.coeff_u = std::move(pn.coeff_n);
            out.coeff_n.clear();
            return out;
        }
        case RiskMode::upu:
            return upu_parts(p_scores, u_scores, config.prior, config.alpha, loss, allow_empty,
                             "unbiased PU risk");
        case RiskMode::nnpu:
            return nnpu_impl(p_scores, u_scores, config.prior, config.alpha, config.nn_beta,
                             config.nn_gamma, loss, allow_empty);
        case RiskMode::pnu:
            return pnu_impl(p_scores, n_scores, u_scores, config.prior, config.pnu_gamma, config.alpha,
                            loss, config.pnu_nn, config.nn_beta, config.nn_gamma, allow_empty);
    }
    throw ConfigError("unknown risk mode");
}

} // namespace dse
