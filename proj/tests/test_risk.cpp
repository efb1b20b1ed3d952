#include "doctest.h"

#include <cmath>
#include <vector>

#include "dse/error.hpp"
#include "dse/risk.hpp"
#include "dse/rng.hpp"

using namespace dse;

namespace {

std::vector<double> random_scores(Rng& rng, std::size_t n, double spread = 3.0) {
    std::vector<double> s(n);
    for (auto& v : s) v = rng.uniform(-spread, spread);
    return s;
}

// Finite differences of grad_objective with respect to one score pool.
// Returns the numeric counterpart of the corresponding coeff vector.
std::vector<double> fd_coeffs(const RiskConfig& cfg, std::vector<double> p, std::vector<double> u,
                              std::vector<double> n, int pool) {
    auto eval = [&](const std::vector<double>& pp, const std::vector<double>& uu,
                    const std::vector<double>& nn) {
        return evaluate_risk(cfg, pp, uu, nn, Loss::sigmoid).grad_objective;
    };
    std::vector<double>& target = pool == 0 ? p : pool == 1 ? u : n;
    std::vector<double> out(target.size());
    const double h = 1e-6;
    for (std::size_t i = 0; i < target.size(); ++i) {
        double keep = target[i];
        target[i] = keep + h;
        double up = eval(p, u, n);
        target[i] = keep - h;
        double down = eval(p, u, n);
        target[i] = keep;
        out[i] = (up - down) / (2.0 * h);
    }
    return out;
}

void check_coeffs(const RiskConfig& cfg, const std::vector<double>& p, const std::vector<double>& u,
                  const std::vector<double>& n) {
    RiskOutput out = evaluate_risk(cfg, p, u, n, Loss::sigmoid);
    for (int pool = 0; pool < 3; ++pool) {
        const auto& analytic = pool == 0 ? out.coeff_p : pool == 1 ? out.coeff_u : out.coeff_n;
        auto numeric = fd_coeffs(cfg, p, u, n, pool);
        if (analytic.empty()) {
            // pools the estimator ignores must have no numeric influence either
            for (double v : numeric) CHECK(std::abs(v) < 1e-9);
            continue;
        }
        REQUIRE(analytic.size() == numeric.size());
        for (std::size_t i = 0; i < numeric.size(); ++i) {
            double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-10});
            CHECK(std::abs(analytic[i] - numeric[i]) / denom < 1e-6);
        }
    }
}

} // namespace

TEST_CASE("sigmoid loss hand values and complement identity") {
    CHECK(sigmoid_loss(std::log(3.0), +1).loss == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(sigmoid_loss(std::log(3.0), -1).loss == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(sigmoid_loss(0.0, +1).loss == doctest::Approx(0.5));

    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        double t = rng.uniform(-20.0, 20.0);
        CHECK(sigmoid_loss(t, +1).loss + sigmoid_loss(t, -1).loss == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sigmoid_loss(t, +1).loss >= 0.0);
        CHECK(sigmoid_loss(t, +1).loss <= 1.0);
    }
}

TEST_CASE("sigmoid loss derivative matches finite differences") {
    Rng rng(2);
    const double h = 1e-6;
    for (int i = 0; i < 30; ++i) {
        double t = rng.uniform(-6.0, 6.0);
        for (int y : {+1, -1}) {
            double fd = (sigmoid_loss(t + h, y).loss - sigmoid_loss(t - h, y).loss) / (2.0 * h);
            CHECK(sigmoid_loss(t, y).dloss_dt == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("zero-one loss treats sign(0) as negative") {
    CHECK(zero_one_loss(2.0, +1) == 0.0);
    CHECK(zero_one_loss(2.0, -1) == 1.0);
    CHECK(zero_one_loss(-2.0, -1) == 0.0);
    CHECK(zero_one_loss(0.0, -1) == 0.0);
    CHECK(zero_one_loss(0.0, +1) == 1.0);
}

TEST_CASE("supervised risk blends class means by the prior") {
    // P losses [0,1] mean 0.5; N losses [0,0,1,0] mean 0.25
    std::vector<double> p{2.0, -1.0};
    std::vector<double> n{-1.0, -1.0, 3.0, -2.0};
    RiskOutput out = pn_risk(p, n, 0.2, Loss::zero_one);
    CHECK(out.reported_risk == doctest::Approx(0.2 * 0.5 + 0.8 * 0.25).epsilon(1e-12));
    CHECK(out.grad_objective == out.reported_risk);
    CHECK_FALSE(out.correction_active);

    std::vector<double> zeros{0.0};
    CHECK(pn_risk(zeros, zeros, 0.3, Loss::sigmoid).reported_risk == doctest::Approx(0.5));

    CHECK_THROWS_AS(pn_risk({}, n, 0.2, Loss::sigmoid), DataError);
    CHECK_THROWS_AS(pn_risk(p, {}, 0.2, Loss::sigmoid), DataError);
}

TEST_CASE("naive risk treats unlabeled as negative at balanced prior") {
    Rng rng(3);
    auto lp = random_scores(rng, 5);
    auto u = random_scores(rng, 9);
    RiskOutput naive = naive_risk(lp, u, Loss::sigmoid);
    RiskOutput pn = pn_risk(lp, u, 0.5, Loss::sigmoid);
    CHECK(naive.reported_risk == doctest::Approx(pn.reported_risk).epsilon(1e-15));
    CHECK(naive.coeff_p == pn.coeff_p);
    CHECK(naive.coeff_u == pn.coeff_n);
}

TEST_CASE("unbiased pu risk can go negative when unlabeled looks negative") {
    std::vector<double> p{10.0, 10.0};
    std::vector<double> u{-10.0, -10.0};
    RiskOutput out = upu_risk(p, u, 0.5, 1.0, Loss::sigmoid);
    CHECK(out.reported_risk == doctest::Approx(-0.49990920426259516).epsilon(1e-12));
    CHECK(out.positive_part == doctest::Approx(2.2698934351217197e-05).epsilon(1e-9));
    CHECK(out.negative_part == doctest::Approx(-0.49993190319694636).epsilon(1e-12));
    CHECK(out.grad_objective == out.reported_risk);
    CHECK_FALSE(out.correction_active);

    CHECK_THROWS_AS(upu_risk({}, u, 0.5, 1.0, Loss::sigmoid), DataError);
    CHECK_THROWS_AS(upu_risk(p, {}, 0.5, 1.0, Loss::sigmoid), DataError);
}

TEST_CASE("alpha multiplies the positive terms of the pu estimator") {
    std::vector<double> p{0.5, -1.0, 2.0};
    std::vector<double> u{0.3, -0.4};
    RiskOutput a1 = upu_risk(p, u, 0.2, 1.0, Loss::sigmoid);
    RiskOutput a3 = upu_risk(p, u, 0.2, 3.0, Loss::sigmoid);
    CHECK(a3.positive_part == doctest::Approx(3.0 * a1.positive_part).epsilon(1e-12));
    // negative_part = mean_U l- - alpha * prior * mean_P l-; the U share is
    // alpha-independent, so the gap between alphas isolates the scaled P share.
    double p_minus_share = a1.negative_part - a3.negative_part;
    double mean_p_neg = (sigmoid_loss(0.5, -1).loss + sigmoid_loss(-1.0, -1).loss +
                         sigmoid_loss(2.0, -1).loss) / 3.0;
    CHECK(p_minus_share == doctest::Approx(2.0 * 0.2 * mean_p_neg).epsilon(1e-12));
}

TEST_CASE("non-negative correction clamps the report and flips the step") {
    std::vector<double> p{10.0, 10.0};
    std::vector<double> u{-10.0, -10.0};

    RiskOutput active = nnpu_risk(p, u, 0.5, 1.0, 0.0, 1.0, Loss::sigmoid);
    CHECK(active.correction_active);
    CHECK(active.reported_risk == doctest::Approx(2.2698934351217197e-05).epsilon(1e-9));
    CHECK(active.grad_objective == doctest::Approx(0.49993190319694636).epsilon(1e-12));

    // gamma scales the ascent objective
    RiskOutput half = nnpu_risk(p, u, 0.5, 1.0, 0.0, 0.5, Loss::sigmoid);
    CHECK(half.grad_objective == doctest::Approx(0.5 * active.grad_objective).epsilon(1e-12));
    for (std::size_t i = 0; i < half.coeff_u.size(); ++i)
        CHECK(half.coeff_u[i] == doctest::Approx(0.5 * active.coeff_u[i]).epsilon(1e-12));

    // beta floor: a large beta keeps the correction off entirely
    RiskOutput off = nnpu_risk(p, u, 0.5, 1.0, 1.0, 1.0, Loss::sigmoid);
    RiskOutput plain = upu_risk(p, u, 0.5, 1.0, Loss::sigmoid);
    CHECK_FALSE(off.correction_active);
    CHECK(off.reported_risk == doctest::Approx(plain.reported_risk).epsilon(1e-15));

    // beta also shifts the clamped report: reported = positive_part - beta
    RiskOutput shifted = nnpu_risk(p, u, 0.5, 1.0, 0.3, 1.0, Loss::sigmoid);
    CHECK(shifted.correction_active);
    CHECK(shifted.reported_risk ==
          doctest::Approx(shifted.positive_part - 0.3).epsilon(1e-12));

    // the healthy branch matches the unbiased estimator exactly
    std::vector<double> p2{-10.0, -10.0};
    std::vector<double> u2{10.0, 10.0};
    RiskOutput healthy = nnpu_risk(p2, u2, 0.5, 1.0, 0.0, 1.0, Loss::sigmoid);
    RiskOutput unbiased = upu_risk(p2, u2, 0.5, 1.0, Loss::sigmoid);
    CHECK_FALSE(healthy.correction_active);
    CHECK(healthy.reported_risk == doctest::Approx(unbiased.reported_risk).epsilon(1e-15));
    CHECK(healthy.coeff_p == unbiased.coeff_p);
    CHECK(healthy.coeff_u == unbiased.coeff_u);
}

TEST_CASE("a constant scorer lands exactly on one half under the balanced surrogate") {
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        double c = rng.uniform(-8.0, 8.0);
        std::vector<double> p(3 + rng.below(5), c);
        std::vector<double> u(5 + rng.below(9), c);
        RiskConfig cfg;
        cfg.mode = RiskMode::upu;
        cfg.prior = 0.5;
        cfg.alpha = 1.0;
        RiskOutput out = evaluate_risk(cfg, p, u, {}, Loss::sigmoid);
        CHECK(std::abs(out.reported_risk - 0.5) <= 1e-9);

        cfg.mode = RiskMode::naive;
        RiskOutput nv = evaluate_risk(cfg, p, u, {}, Loss::sigmoid);
        CHECK(std::abs(nv.reported_risk - 0.5) <= 1e-9);
    }
}

TEST_CASE("pnu risk blends the supervised and pu estimators") {
    Rng rng(5);
    auto p = random_scores(rng, 4);
    auto n = random_scores(rng, 6);
    auto u = random_scores(rng, 8);

    RiskOutput pn = pn_risk(p, n, 0.3, Loss::sigmoid);
    RiskOutput pu = upu_risk(p, u, 0.3, 1.0, Loss::sigmoid);

    RiskOutput all_pn = pnu_risk(p, n, u, 0.3, 1.0, 1.0, Loss::sigmoid);
    CHECK(all_pn.reported_risk == doctest::Approx(pn.reported_risk).epsilon(1e-14));

    RiskOutput all_pu = pnu_risk(p, n, u, 0.3, 0.0, 1.0, Loss::sigmoid);
    CHECK(all_pu.reported_risk == doctest::Approx(pu.reported_risk).epsilon(1e-14));

    RiskOutput mix = pnu_risk(p, n, u, 0.3, 0.25, 1.0, Loss::sigmoid);
    CHECK(mix.reported_risk ==
          doctest::Approx(0.25 * pn.reported_risk + 0.75 * pu.reported_risk).epsilon(1e-12));
    for (std::size_t i = 0; i < mix.coeff_n.size(); ++i)
        CHECK(mix.coeff_n[i] == doctest::Approx(0.25 * pn.coeff_n[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < mix.coeff_u.size(); ++i)
        CHECK(mix.coeff_u[i] == doctest::Approx(0.75 * pu.coeff_u[i]).epsilon(1e-12));

    // non-negative flavor routes the pu share through the corrected estimator
    std::vector<double> ph{10.0, 10.0};
    std::vector<double> uh{-10.0, -10.0};
    RiskOutput nn = pnu_risk(ph, n, uh, 0.5, 0.5, 1.0, Loss::sigmoid, true);
    RiskOutput corrected = nnpu_risk(ph, uh, 0.5, 1.0, 0.0, 1.0, Loss::sigmoid);
    RiskOutput pn_half = pn_risk(ph, n, 0.5, Loss::sigmoid);
    CHECK(nn.correction_active);
    CHECK(nn.reported_risk ==
          doctest::Approx(0.5 * pn_half.reported_risk + 0.5 * corrected.reported_risk)
              .epsilon(1e-12));
}

TEST_CASE("risk coefficients match finite differences for every estimator") {
    Rng rng(6);
    auto p = random_scores(rng, 4, 1.5);
    auto u = random_scores(rng, 7, 1.5);
    auto n = random_scores(rng, 5, 1.5);

    RiskConfig cfg;
    cfg.prior = 0.3;

    cfg.mode = RiskMode::pn;
    check_coeffs(cfg, p, u, n);
    cfg.mode = RiskMode::naive;
    check_coeffs(cfg, p, u, n);
    cfg.mode = RiskMode::upu;
    cfg.alpha = 2.0;
    check_coeffs(cfg, p, u, n);
    cfg.mode = RiskMode::pnu;
    cfg.alpha = 1.0;
    cfg.pnu_gamma = 0.4;
    check_coeffs(cfg, p, u, n);

    // nnpu, healthy branch (margin away from the flip keeps differences clean)
    cfg.mode = RiskMode::nnpu;
    std::vector<double> ph{-2.0, -1.0, -3.0};
    std::vector<double> uh{2.0, 1.5, 2.5, 1.0};
    RiskOutput healthy = evaluate_risk(cfg, ph, uh, {}, Loss::sigmoid);
    REQUIRE_FALSE(healthy.correction_active);
    REQUIRE(healthy.negative_part > 1e-3);
    check_coeffs(cfg, ph, uh, {});

    // nnpu, correction branch
    std::vector<double> pa{3.0, 2.0, 2.5};
    std::vector<double> ua{-2.0, -3.0, -2.5, -1.5};
    RiskOutput ascending = evaluate_risk(cfg, pa, ua, {}, Loss::sigmoid);
    REQUIRE(ascending.correction_active);
    REQUIRE(ascending.negative_part < -1e-3);
    check_coeffs(cfg, pa, ua, {});
}

TEST_CASE("evaluate_risk dispatches and enforces required pools") {
    std::vector<double> p{1.0};
    std::vector<double> u{0.5, -0.5};
    std::vector<double> n{-1.0};

    RiskConfig cfg;
    cfg.mode = RiskMode::pn;
    CHECK(evaluate_risk(cfg, p, u, n, Loss::sigmoid).reported_risk ==
          doctest::Approx(pn_risk(p, n, cfg.prior, Loss::sigmoid).reported_risk));
    CHECK_THROWS_AS(evaluate_risk(cfg, p, u, {}, Loss::sigmoid), DataError);

    cfg.mode = RiskMode::nnpu;
    CHECK_THROWS_AS(evaluate_risk(cfg, p, {}, n, Loss::sigmoid), DataError);
    CHECK_THROWS_AS(evaluate_risk(cfg, {}, u, n, Loss::sigmoid), DataError);

    cfg.mode = RiskMode::pnu;
    CHECK_THROWS_AS(evaluate_risk(cfg, p, u, {}, Loss::sigmoid), DataError);
}

TEST_CASE("allow_empty turns absent pools into zero contributions") {
    std::vector<double> p{0.8, -0.3};
    std::vector<double> u{0.4, 0.1, -0.2};

    RiskConfig cfg;
    cfg.mode = RiskMode::pn;
    cfg.prior = 0.3;
    RiskOutput only_p = evaluate_risk(cfg, p, {}, {}, Loss::sigmoid, true);
    double mean_pos = (sigmoid_loss(0.8, 1).loss + sigmoid_loss(-0.3, 1).loss) / 2.0;
    CHECK(only_p.reported_risk == doctest::Approx(0.3 * mean_pos).epsilon(1e-12));
    CHECK(only_p.coeff_n.empty());

    cfg.mode = RiskMode::nnpu;
    cfg.prior = 0.5;
    RiskOutput no_p = evaluate_risk(cfg, {}, u, {}, Loss::sigmoid, true);
    double mean_neg = (sigmoid_loss(0.4, -1).loss + sigmoid_loss(0.1, -1).loss +
                       sigmoid_loss(-0.2, -1).loss) / 3.0;
    CHECK(no_p.reported_risk == doctest::Approx(mean_neg).epsilon(1e-12));
    CHECK(no_p.coeff_p.empty());

    RiskOutput nothing = evaluate_risk(cfg, {}, {}, {}, Loss::sigmoid, true);
    CHECK(nothing.reported_risk == 0.0);
}

TEST_CASE("risk config validation") {
    RiskConfig ok;
    CHECK_NOTHROW(ok.validate());

    RiskConfig bad_prior;
    bad_prior.prior = -0.1;
    CHECK_THROWS_AS(bad_prior.validate(), ConfigError);
    bad_prior.prior = 1.5;
    CHECK_THROWS_AS(bad_prior.validate(), ConfigError);

    RiskConfig bad_alpha;
    bad_alpha.alpha = 0.5;
    CHECK_THROWS_AS(bad_alpha.validate(), ConfigError);

    RiskConfig bad_beta;
    bad_beta.nn_beta = -0.1;
    CHECK_THROWS_AS(bad_beta.validate(), ConfigError);

    RiskConfig bad_gamma;
    bad_gamma.nn_gamma = 0.0;
    CHECK_THROWS_AS(bad_gamma.validate(), ConfigError);

    RiskConfig bad_blend;
    bad_blend.pnu_gamma = 1.2;
    CHECK_THROWS_AS(bad_blend.validate(), ConfigError);
}

TEST_CASE("risk mode names round-trip") {
    for (RiskMode m : {RiskMode::pn, RiskMode::naive, RiskMode::upu, RiskMode::nnpu, RiskMode::pnu})
        CHECK(risk_mode_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(risk_mode_from_string("bogus"), ConfigError);
}
