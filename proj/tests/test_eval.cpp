#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dse/error.hpp"
#include "dse/eval.hpp"
#include "dse/rng.hpp"

using namespace dse;

namespace {

// Exact expected top-k F1 of a uniformly random ranking: TP at depth k is
// hypergeometric, so E[f1] = sum_t P(TP = t) * 2t / (k + m).
double expected_random_f1(std::size_t n, std::size_t m, std::size_t k) {
    auto lchoose = [](std::size_t a, std::size_t b) -> double {
        if (b > a) return -std::numeric_limits<double>::infinity();
        return std::lgamma(static_cast<double>(a) + 1) - std::lgamma(static_cast<double>(b) + 1) -
               std::lgamma(static_cast<double>(a - b) + 1);
    };
    double total = 0.0;
    for (std::size_t t = 0; t <= std::min(m, k); ++t) {
        if (k - t > n - m) continue;
        double logp = lchoose(m, t) + lchoose(n - m, k - t) - lchoose(n, k);
        total += std::exp(logp) * 2.0 * static_cast<double>(t) /
                 static_cast<double>(k + m);
    }
    return total;
}

} // namespace

TEST_CASE("confusion counts a hand-checked table") {
    std::vector<int> truth{+1, +1, +1, +1, -1, -1, -1, -1, -1, -1};
    std::vector<int> preds{+1, +1, +1, -1, +1, +1, -1, -1, -1, -1};
    ConfusionCounts c = confusion(preds, truth);
    CHECK(c.tp == 3);
    CHECK(c.fn == 1);
    CHECK(c.fp == 2);
    CHECK(c.tn == 4);
    CHECK(c.total() == 10);

    CHECK_THROWS_AS(confusion(std::vector<int>{1}, truth), DataError);
}

TEST_CASE("metrics reproduce hand-computed values") {
    ConfusionCounts c{3, 2, 4, 1}; // tp, fp, tn, fn
    MetricReport r = metrics(c);
    CHECK(r.precision == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(r.recall == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(r.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(r.accuracy == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(r.ber == doctest::Approx(0.2916666666666667).epsilon(1e-12));
    CHECK(r.auc == doctest::Approx(0.9166666666666667).epsilon(1e-12));
    CHECK_FALSE(r.auc_above_one);
}

TEST_CASE("degenerate ratios resolve to zero, perfect hard decisions push auc past one") {
    MetricReport nothing = metrics(ConfusionCounts{0, 0, 5, 0});
    CHECK(nothing.precision == 0.0);
    CHECK(nothing.recall == 0.0);
    CHECK(nothing.f1 == 0.0);
    CHECK(nothing.ber == 0.0);

    MetricReport perfect = metrics(ConfusionCounts{5, 0, 5, 0});
    CHECK(perfect.f1 == 1.0);
    CHECK(perfect.ber == 0.0);
    CHECK(perfect.auc == doctest::Approx(1.5));
    CHECK(perfect.auc_above_one);
}

TEST_CASE("metric formulas hold on random tables and auc tracks ber") {
    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        ConfusionCounts c;
        c.tp = rng.below(40);
        c.fp = rng.below(40);
        c.tn = rng.below(40);
        c.fn = rng.below(40);
        if (c.total() == 0) continue;
        MetricReport r = metrics(c);

        auto ratio = [](double num, double den) { return den == 0.0 ? 0.0 : num / den; };
        double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
        double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
        double prec = ratio(tp, tp + fp);
        double rec = ratio(tp, tp + fn);
        CHECK(r.precision == doctest::Approx(prec).epsilon(1e-12));
        CHECK(r.recall == doctest::Approx(rec).epsilon(1e-12));
        CHECK(r.f1 == doctest::Approx(prec + rec == 0.0 ? 0.0 : 2 * prec * rec / (prec + rec))
                          .epsilon(1e-12));
        CHECK(r.accuracy == doctest::Approx((tp + tn) / (tp + tn + fp + fn)).epsilon(1e-12));
        CHECK(r.ber ==
              doctest::Approx(0.5 * (ratio(fp, tn + fp) + ratio(fn, fn + tp))).epsilon(1e-12));
        CHECK(r.auc == doctest::Approx(1.5 - 2.0 * r.ber).epsilon(1e-12));
        CHECK(r.auc_above_one == (r.auc > 1.0));
    }
}

TEST_CASE("all-positive baseline has closed-form f1") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 20 + rng.below(200);
        std::vector<int> truth;
        std::size_t pos = 0;
        for (std::size_t i = 0; i < n; ++i) {
            bool p = rng.uniform() < 0.3;
            truth.push_back(p ? 1 : -1);
            pos += p;
        }
        if (pos == 0) continue;
        double pi = static_cast<double>(pos) / static_cast<double>(n);
        MetricReport r = all_positive_baseline(truth);
        CHECK(r.recall == doctest::Approx(1.0));
        CHECK(r.precision == doctest::Approx(pi).epsilon(1e-12));
        CHECK(r.f1 == doctest::Approx(2.0 * pi / (1.0 + pi)).epsilon(1e-12));
    }
}

TEST_CASE("topk curve on a hand-ranked list") {
    std::vector<int> ranked{+1, -1, +1, -1}; // two positives among four
    TopkCurve curve = topk_ir_baseline(ranked, 1, 4);
    REQUIRE(curve.k == std::vector<std::size_t>{1, 2, 3, 4});
    CHECK(curve.f1[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12)); // tp 1
    CHECK(curve.f1[1] == doctest::Approx(0.5).epsilon(1e-12));       // tp 1
    CHECK(curve.f1[2] == doctest::Approx(0.8).epsilon(1e-12));       // tp 2
    CHECK(curve.f1[3] == doctest::Approx(2.0 / 3.0).epsilon(1e-12)); // tp 2

    double mean = (2.0 / 3.0 + 0.5 + 0.8 + 2.0 / 3.0) / 4.0;
    CHECK(curve.mean_f1 == doctest::Approx(mean).epsilon(1e-12));
    double var = 0.0;
    for (double f : curve.f1) var += (f - mean) * (f - mean);
    CHECK(curve.std_f1 == doctest::Approx(std::sqrt(var / 4.0)).epsilon(1e-12));

    // k_max beyond the list clamps; a perfect prefix reaches f1 = 1 at k = m
    TopkCurve clamp = topk_ir_baseline(ranked, 2, 100);
    CHECK(clamp.k.back() == 4);
    std::vector<int> perfect{+1, +1, -1, -1};
    TopkCurve best = topk_ir_baseline(perfect, 2, 2);
    CHECK(best.f1[0] == doctest::Approx(1.0));
    CHECK(best.std_f1 == 0.0);

    CHECK_THROWS_AS(topk_ir_baseline(ranked, 3, 2), ConfigError);
    CHECK_THROWS_AS(topk_ir_baseline(std::vector<int>{}, 1, 2), DataError);
}

TEST_CASE("topk curve of random rankings matches the hypergeometric expectation") {
    const std::size_t n = 30, m = 10;
    const std::size_t k = 7;
    Rng rng(123);
    std::vector<int> base(n, -1);
    for (std::size_t i = 0; i < m; ++i) base[i] = +1;

    double sum = 0.0, sumsq = 0.0;
    const int trials = 3000;
    for (int t = 0; t < trials; ++t) {
        std::vector<int> ranked = base;
        rng.shuffle(ranked);
        TopkCurve c = topk_ir_baseline(ranked, k, k);
        sum += c.f1[0];
        sumsq += c.f1[0] * c.f1[0];
    }
    double mc_mean = sum / trials;
    double mc_var = sumsq / trials - mc_mean * mc_mean;
    double se = std::sqrt(mc_var / trials);
    double want = expected_random_f1(n, m, k);
    CHECK(std::abs(mc_mean - want) < 4.0 * se + 1e-9);
}

TEST_CASE("ensemble averages member scores by weight") {
    std::vector<std::vector<double>> members{{1.0, -3.0, 0.0}, {3.0, 1.0, 0.0}};
    std::vector<double> balanced{1.0, 1.0};
    CHECK(ensemble_scores(members, balanced) == std::vector<double>{2.0, -1.0, 0.0});

    std::vector<double> first_only{1.0, 0.0};
    CHECK(ensemble_scores(members, first_only) == members[0]);

    std::vector<double> skewed{2.0, 6.0};
    auto out = ensemble_scores(members, skewed);
    CHECK(out[0] == doctest::Approx((2.0 * 1.0 + 6.0 * 3.0) / 8.0));

    CHECK_THROWS_AS(ensemble_scores({members[0]}, std::vector<double>{1.0}), ConfigError);
    CHECK_THROWS_AS(ensemble_scores(members, std::vector<double>{1.0}), ConfigError);
    CHECK_THROWS_AS(ensemble_scores(members, std::vector<double>{0.0, 0.0}), ConfigError);
    CHECK_THROWS_AS(ensemble_scores(members, std::vector<double>{1.0, -1.0}), ConfigError);
    std::vector<std::vector<double>> ragged{{1.0, 2.0}, {1.0}};
    CHECK_THROWS_AS(ensemble_scores(ragged, balanced), DataError);
}

TEST_CASE("scaling curve normalizes f1 gaps per labeled-set size") {
    std::vector<std::pair<int, double>> sys{{100, 0.6}, {200, 0.4}, {400, 0.0}};
    std::vector<std::pair<int, double>> ref{{100, 0.2}, {200, 0.4}, {400, 0.0}};
    auto gaps = scaling_curve(sys, ref);
    REQUIRE(gaps.size() == 3);
    CHECK(gaps[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(gaps[1] == 0.0);
    CHECK(gaps[2] == 0.0); // 0/0 resolves to 0

    std::vector<std::pair<int, double>> misaligned{{100, 0.2}, {300, 0.4}, {400, 0.0}};
    CHECK_THROWS_AS(scaling_curve(sys, misaligned), DataError);
    CHECK_THROWS_AS(scaling_curve(sys, std::vector<std::pair<int, double>>{{100, 0.2}}),
                    DataError);
}

TEST_CASE("score histogram buckets both classes and conserves counts") {
    std::vector<double> scores{0.0, 1.0, 2.0, 3.0};
    std::vector<int> truth{+1, -1, +1, -1};
    ScoreHistogram h = score_histogram(scores, truth, 2);
    CHECK(h.lo == 0.0);
    CHECK(h.hi == 3.0);
    CHECK(h.width == doctest::Approx(1.5));
    REQUIRE(h.positive.size() == 2);
    CHECK(h.positive[0] == 1); // score 0
    CHECK(h.negative[0] == 1); // score 1
    CHECK(h.positive[1] == 1); // score 2
    CHECK(h.negative[1] == 1); // score 3 lands in the last bucket inclusively

    std::size_t total = std::accumulate(h.positive.begin(), h.positive.end(), std::size_t{0}) +
                        std::accumulate(h.negative.begin(), h.negative.end(), std::size_t{0});
    CHECK(total == 4);

    ScoreHistogram flat = score_histogram(std::vector<double>{2.0, 2.0}, std::vector<int>{1, -1}, 4);
    CHECK(flat.positive[0] == 1);
    CHECK(flat.negative[0] == 1);
    for (std::size_t b = 1; b < 4; ++b) CHECK(flat.positive[b] + flat.negative[b] == 0);

    CHECK_THROWS_AS(score_histogram(std::vector<double>{}, std::vector<int>{}, 2), DataError);
    CHECK_THROWS_AS(score_histogram(scores, truth, 0), ConfigError);
    CHECK_THROWS_AS(score_histogram(scores, std::vector<int>{1}, 2), DataError);
}

TEST_CASE("metrics json is byte-stable with fixed key order") {
    ConfusionCounts c{3, 2, 4, 1};
    std::string a = metrics_json(c, metrics(c));
    std::string b = metrics_json(c, metrics(c));
    CHECK(a == b);

    // keys come out alphabetically, counts nested in one object
    auto pos = [&](const char* key) { return a.find(key); };
    CHECK(pos("\"accuracy\"") < pos("\"auc\""));
    CHECK(pos("\"auc\"") < pos("\"ber\""));
    CHECK(pos("\"ber\"") < pos("\"counts\""));
    CHECK(pos("\"counts\"") < pos("\"f1\""));
    CHECK(pos("\"f1\"") < pos("\"precision\""));
    CHECK(pos("\"precision\"") < pos("\"recall\""));
    CHECK(pos("\"tp\"") != std::string::npos);
}

TEST_CASE("csv writers produce one row per entry") {
    TopkCurve curve;
    curve.k = {1, 2};
    curve.f1 = {0.5, 0.25};
    std::string csv = topk_csv(curve);
    CHECK(csv.find("k,f1") == 0);
    CHECK(csv.find("\n1,") != std::string::npos);
    CHECK(csv.find("\n2,") != std::string::npos);

    ScoreHistogram h;
    h.lo = 0.0;
    h.hi = 1.0;
    h.width = 0.5;
    h.positive = {1, 0};
    h.negative = {0, 2};
    std::string hcsv = histogram_csv(h);
    CHECK(hcsv.find("bucket_lo,bucket_hi,positive,negative") == 0);
}

TEST_CASE("report aggregation groups by method and topic in first-seen order") {
    std::vector<RunSummary> runs{
        {"pu", "topicB", 0.30},
        {"pu", "topicB", 0.40},
        {"pu", "topicA", 0.50},
        {"oracle", "topicB", 0.20},
    };
    ReportTable table = aggregate_report(runs);
    REQUIRE(table.methods == std::vector<std::string>{"pu", "oracle"});
    REQUIRE(table.topics == std::vector<std::string>{"topicB", "topicA"});

    const ReportCell& b = table.cells[0][0];
    CHECK(b.runs == 2);
    CHECK(b.mean == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(b.stddev == doctest::Approx(0.05).epsilon(1e-12)); // population std

    CHECK(table.cells[1][1].runs == 0); // oracle never ran on topicA

    CHECK_THROWS_AS(aggregate_report({}), DataError);
}

TEST_CASE("rendered table shows scaled means, spreads and row averages") {
    std::vector<RunSummary> runs{
        {"pu", "t1", 0.30},
        {"pu", "t1", 0.40},
        {"pu", "t2", 0.50},
        {"oracle", "t1", 0.20},
    };
    std::string text = render_table(aggregate_report(runs));

    CHECK(text.find("Method") != std::string::npos);
    CHECK(text.find("t1") != std::string::npos);
    CHECK(text.find("Avg") != std::string::npos);
    CHECK(text.find("35.00 \xC2\xB1 5.00") != std::string::npos); // pu on t1
    CHECK(text.find("50.00") != std::string::npos);               // single run, no spread
    CHECK(text.find("42.50") != std::string::npos);               // pu average
    CHECK(text.find("-") != std::string::npos);                   // oracle has no t2 run

    std::string csv = render_csv(aggregate_report(runs));
    CHECK(csv.find("method,t1,t2,avg") == 0);
    CHECK(csv.find("\npu,35.00,50.00,42.50") != std::string::npos);
    CHECK(csv.find("\noracle,20.00,,20.00") != std::string::npos);
}
