#pragma once

#include <span>
#include <string>
#include <vector>

namespace dse {

enum class Loss { sigmoid, zero_one };

struct LossValue {
    double loss = 0.0;
    double dloss_dt = 0.0;
};

/// Sigmoid surrogate loss l(t, y) = 1 / (1 + exp(t*y)) for y in {-1, +1},
/// with its derivative in t. Satisfies l(t,+1) + l(t,-1) = 1.
LossValue sigmoid_loss(double t, int y);

/// 1 if sign(t) != y, with sign(0) treated as -1. Evaluation only.
double zero_one_loss(double t, int y);

enum class RiskMode { pn, naive, upu, nnpu, pnu };

RiskMode risk_mode_from_string(const std::string& s);
std::string to_string(RiskMode mode);

struct RiskConfig {
    RiskMode mode = RiskMode::nnpu;
    double prior = 0.5;     // assumed positive-class prior (0.5 = balanced-error surrogate)
    double alpha = 1.0;     // positive-frequency multiplier on the P terms of PU estimators
    double nn_beta = 0.0;   // negative-risk floor before the correction kicks in
    double nn_gamma = 1.0;  // ascent step scale when the correction is active
    double pnu_gamma = 0.5; // blend: gamma * supervised + (1-gamma) * PU
    bool pnu_nn = false;    // use the non-negative correction inside the PNU blend

    void validate() const;
};

/// Estimator output. coeff_* hold d(grad_objective)/d(score_i) so a model
/// gradient is assembled by backpropagating each score with its coefficient.
/// grad_objective equals reported_risk except in the non-negative correction
/// branch, where the step deliberately ascends -nn_gamma * (negative part)
/// while reported_risk is clamped at positive_part - nn_beta.
struct RiskOutput {
    double reported_risk = 0.0;
    double grad_objective = 0.0;
    double positive_part = 0.0; // alpha * prior * mean_P l(g,+1) (prior-weighted P term)
    double negative_part = 0.0; // estimated negative-class risk (see each estimator)
    bool correction_active = false;
    std::vector<double> coeff_p;
    std::vector<double> coeff_u;
    std::vector<double> coeff_n;
};

/// Supervised risk: prior * mean_P l(g,+1) + (1-prior) * mean_N l(g,-1).
RiskOutput pn_risk(std::span<const double> p_scores, std::span<const double> n_scores, double prior,
                   Loss loss);

/// Treats the unlabeled pool as negatives with a balanced prior of 0.5.
RiskOutput naive_risk(std::span<const double> lp_scores, std::span<const double> u_scores, Loss loss);

/// Unbiased PU risk: alpha * prior * mean_P [l(g,+1) - l(g,-1)] + mean_U l(g,-1).
/// positive_part = alpha * prior * mean_P l(g,+1);
/// negative_part = mean_U l(g,-1) - alpha * prior * mean_P l(g,-1).
RiskOutput upu_risk(std::span<const double> p_scores, std::span<const double> u_scores, double prior,
                    double alpha, Loss loss);

/// Same as upu_risk while negative_part >= -beta. Otherwise reports
/// positive_part - beta and emits coefficients for -gamma * negative_part,
/// stepping against the overfit direction.
RiskOutput nnpu_risk(std::span<const double> p_scores, std::span<const double> u_scores, double prior,
                     double alpha, double beta, double gamma, Loss loss);

/// gamma * pn_risk(P, N) + (1-gamma) * (u/nn)pu_risk(P, U).
RiskOutput pnu_risk(std::span<const double> p_scores, std::span<const double> n_scores,
                    std::span<const double> u_scores, double prior, double pnu_gamma, double alpha,
                    Loss loss, bool non_negative = false, double nn_beta = 0.0, double nn_gamma = 1.0);

/// Dispatch on config.mode. With allow_empty, terms over an absent class
/// contribute zero instead of raising; the trainer uses this for plain
/// uniform batches, which may lack a class entirely. Without it, an empty
/// class required by the estimator is a DataError.
RiskOutput evaluate_risk(const RiskConfig& config, std::span<const double> p_scores,
                         std::span<const double> u_scores, std::span<const double> n_scores, Loss loss,
                         bool allow_empty = false);

} // namespace dse
