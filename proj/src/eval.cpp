#include "dse/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dse/error.hpp"

namespace dse {

ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> truth) {
    if (predictions.size() != truth.size())
        throw DataError("predictions and truth differ in length");
    ConfusionCounts c;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] != 1 && predictions[i] != -1)
            throw DataError("predictions must be +1/-1");
        if (truth[i] != 1 && truth[i] != -1) throw DataError("truth labels must be +1/-1");
        if (truth[i] == 1)
            predictions[i] == 1 ? ++c.tp : ++c.fn;
        else
            predictions[i] == 1 ? ++c.fp : ++c.tn;
    }
    return c;
}

namespace {

double ratio0(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

} // namespace

MetricReport metrics(const ConfusionCounts& c) {
    if (c.total() == 0) throw DataError("empty confusion table");
    MetricReport r;
    auto tp = static_cast<double>(c.tp);
    auto fp = static_cast<double>(c.fp);
    auto tn = static_cast<double>(c.tn);
    auto fn = static_cast<double>(c.fn);
    r.precision = ratio0(tp, tp + fp);
    r.recall = ratio0(tp, tp + fn);
    r.f1 = ratio0(2.0 * r.precision * r.recall, r.precision + r.recall);
    r.accuracy = (tp + tn) / static_cast<double>(c.total());
    r.ber = 0.5 * (ratio0(fp, tn + fp) + ratio0(fn, fn + tp));
    r.auc = 1.5 - 2.0 * r.ber;
    r.auc_above_one = r.auc > 1.0;
    return r;
}

std::vector<double> score_all(const ModelParams& params, const std::vector<Instance>& xs) {
    std::vector<double> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(forward(params, x));
    return out;
}

std::vector<int> predict_all(const ModelParams& params, const std::vector<Instance>& xs,
                             double threshold) {
    std::vector<int> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(predict(params, x, threshold));
    return out;
}

TopkCurve topk_ir_baseline(std::span<const int> ranked_truth, std::size_t k_min, std::size_t k_max) {
    std::size_t n = ranked_truth.size();
    if (n == 0) throw DataError("empty ranking");
    if (k_min < 1) throw ConfigError("k_min must be at least 1");
    k_max = std::min(k_max, n);
    if (k_min > k_max) throw ConfigError("empty k range: k_min exceeds min(k_max, n)");

    std::size_t total_pos = 0;
    for (int y : ranked_truth) {
        if (y != 1 && y != -1) throw DataError("truth labels must be +1/-1");
        if (y == 1) ++total_pos;
    }

    TopkCurve curve;
    std::size_t tp = 0;
    for (std::size_t k = 1; k <= k_max; ++k) {
        if (ranked_truth[k - 1] == 1) ++tp;
        if (k < k_min) continue;
        // predictions: top k positive -> fp = k - tp, fn = total_pos - tp
        double denom = static_cast<double>(k + total_pos);
        double f1 = denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
        curve.k.push_back(k);
        curve.f1.push_back(f1);
    }

    double sum = 0.0;
    for (double v : curve.f1) sum += v;
    curve.mean_f1 = sum / static_cast<double>(curve.f1.size());
    double var = 0.0;
    for (double v : curve.f1) var += (v - curve.mean_f1) * (v - curve.mean_f1);
    curve.std_f1 = std::sqrt(var / static_cast<double>(curve.f1.size()));
    return curve;
}

MetricReport all_positive_baseline(std::span<const int> truth) {
    if (truth.empty()) throw DataError("empty truth vector");
    std::vector<int> preds(truth.size(), 1);
    return metrics(confusion(preds, truth));
}

std::vector<double> ensemble_scores(const std::vector<std::vector<double>>& member_scores,
                                    std::span<const double> weights) {
    if (member_scores.size() < 2) throw ConfigError("an ensemble needs at least two members");
    if (weights.size() != member_scores.size())
        throw ConfigError("one weight per ensemble member required");
    double total_w = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw ConfigError("ensemble weights must be non-negative");
        total_w += w;
    }
    if (total_w == 0.0) throw ConfigError("ensemble weights must not all be zero");
    std::size_t n = member_scores[0].size();
    for (const auto& s : member_scores)
        if (s.size() != n) throw DataError("ensemble members scored different numbers of documents");
    std::vector<double> out(n, 0.0);
    for (std::size_t m = 0; m < member_scores.size(); ++m)
        for (std::size_t i = 0; i < n; ++i) out[i] += weights[m] * member_scores[m][i];
    for (auto& v : out) v /= total_w;
    return out;
}

std::vector<double> scaling_curve(const std::vector<std::pair<int, double>>& system,
                                  const std::vector<std::pair<int, double>>& reference) {
    if (system.size() != reference.size())
        throw DataError("scaling curves measured on different grids");
    std::vector<double> out;
    out.reserve(system.size());
    for (std::size_t i = 0; i < system.size(); ++i) {
        if (system[i].first != reference[i].first)
            throw DataError("scaling curves measured on different grids");
        double a = system[i].second, b = reference[i].second;
        double denom = a + b;
        out.push_back(denom == 0.0 ? 0.0 : std::abs(a - b) / denom);
    }
    return out;
}

ScoreHistogram score_histogram(std::span<const double> scores, std::span<const int> truth,
                               std::size_t buckets) {
    if (scores.empty()) throw DataError("no scores to bucket");
    if (scores.size() != truth.size()) throw DataError("scores and truth differ in length");
    if (buckets < 1) throw ConfigError("bucket count must be at least 1");
    ScoreHistogram h;
    h.lo = *std::min_element(scores.begin(), scores.end());
    h.hi = *std::max_element(scores.begin(), scores.end());
    h.width = (h.hi - h.lo) / static_cast<double>(buckets);
    h.positive.assign(buckets, 0);
    h.negative.assign(buckets, 0);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        std::size_t b = 0;
        if (h.width > 0.0)
            b = std::min(buckets - 1,
                         static_cast<std::size_t>((scores[i] - h.lo) / h.width));
        if (truth[i] == 1)
            ++h.positive[b];
        else
            ++h.negative[b];
    }
    return h;
}

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

} // namespace

std::string metrics_json(const ConfusionCounts& c, const MetricReport& r) {
    std::ostringstream out;
    out << "{\n";
    out << "  \"accuracy\": " << fmt17(r.accuracy) << ",\n";
    out << "  \"auc\": " << fmt17(r.auc) << ",\n";
    out << "  \"auc_above_one\": " << (r.auc_above_one ? "true" : "false") << ",\n";
    out << "  \"ber\": " << fmt17(r.ber) << ",\n";
    out << "  \"counts\": {\"tp\": " << c.tp << ", \"fp\": " << c.fp << ", \"tn\": " << c.tn
        << ", \"fn\": " << c.fn << "},\n";
    out << "  \"f1\": " << fmt17(r.f1) << ",\n";
    out << "  \"precision\": " << fmt17(r.precision) << ",\n";
    out << "  \"recall\": " << fmt17(r.recall) << "\n";
    out << "}\n";
    return out.str();
}

std::string topk_csv(const TopkCurve& curve) {
    std::ostringstream out;
    out << "k,f1\n";
    for (std::size_t i = 0; i < curve.k.size(); ++i)
        out << curve.k[i] << ',' << fmt17(curve.f1[i]) << '\n';
    return out.str();
}

std::string histogram_csv(const ScoreHistogram& hist) {
    std::ostringstream out;
    out << "bucket_lo,bucket_hi,positive,negative\n";
    std::size_t buckets = hist.positive.size();
    for (std::size_t b = 0; b < buckets; ++b) {
        double lo = hist.lo + hist.width * static_cast<double>(b);
        double hi = b + 1 == buckets ? hist.hi : lo + hist.width;
        out << fmt17(lo) << ',' << fmt17(hi) << ',' << hist.positive[b] << ',' << hist.negative[b]
            << '\n';
    }
    return out.str();
}

ReportTable aggregate_report(const std::vector<RunSummary>& runs) {
    if (runs.empty()) throw DataError("no runs to aggregate");
    ReportTable table;
    auto index_of = [](std::vector<std::string>& names, const std::string& name) {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return i;
        names.push_back(name);
        return names.size() - 1;
    };

    std::vector<std::vector<std::vector<double>>> samples; // [method][topic][run]
    for (const auto& run : runs) {
        std::size_t m = index_of(table.methods, run.method);
        std::size_t t = index_of(table.topics, run.topic);
        if (samples.size() < table.methods.size()) samples.resize(table.methods.size());
        for (auto& row : samples) row.resize(table.topics.size());
        samples[m][t].push_back(run.f1);
    }

    table.cells.assign(table.methods.size(), std::vector<ReportCell>(table.topics.size()));
    for (std::size_t m = 0; m < table.methods.size(); ++m) {
        for (std::size_t t = 0; t < table.topics.size(); ++t) {
            const auto& xs = samples[m][t];
            if (xs.empty()) continue;
            ReportCell& cell = table.cells[m][t];
            cell.runs = xs.size();
            for (double v : xs) cell.mean += v;
            cell.mean /= static_cast<double>(xs.size());
            double var = 0.0;
            for (double v : xs) var += (v - cell.mean) * (v - cell.mean);
            cell.stddev = std::sqrt(var / static_cast<double>(xs.size()));
        }
    }
    return table;
}

namespace {

std::string cell_text(const ReportCell& cell) {
    if (cell.runs == 0) return "-";
    std::string out = fmt2(100.0 * cell.mean);
    if (cell.runs > 1) out += " \xC2\xB1 " + fmt2(100.0 * cell.stddev);
    return out;
}

ReportCell average_cell(const std::vector<ReportCell>& row) {
    ReportCell avg;
    std::vector<double> means;
    for (const auto& c : row)
        if (c.runs > 0) means.push_back(c.mean);
    if (means.empty()) return avg;
    avg.runs = 1;
    for (double v : means) avg.mean += v;
    avg.mean /= static_cast<double>(means.size());
    return avg;
}

} // namespace

std::string render_table(const ReportTable& table) {
    std::vector<std::string> headers{"Method"};
    headers.insert(headers.end(), table.topics.begin(), table.topics.end());
    headers.push_back("Avg");

    std::vector<std::vector<std::string>> rows;
    for (std::size_t m = 0; m < table.methods.size(); ++m) {
        std::vector<std::string> row{table.methods[m]};
        for (const auto& cell : table.cells[m]) row.push_back(cell_text(cell));
        row.push_back(cell_text(average_cell(table.cells[m])));
        rows.push_back(std::move(row));
    }

    // Column widths in display characters; the plus-minus sign is two bytes.
    auto display_len = [](const std::string& s) {
        std::size_t len = 0;
        for (unsigned char ch : s)
            if ((ch & 0xC0) != 0x80) ++len;
        return len;
    };
    std::vector<std::size_t> width(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) width[c] = display_len(headers[c]);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c)
            width[c] = std::max(width[c], display_len(row[c]));

    std::ostringstream out;
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << "  ";
            out << row[c];
            std::size_t pad = width[c] - display_len(row[c]);
            if (c + 1 < row.size()) out << std::string(pad, ' ');
        }
        out << '\n';
    };
    emit_row(headers);
    std::size_t rule = 0;
    for (std::size_t c = 0; c < width.size(); ++c) rule += width[c] + (c ? 2 : 0);
    out << std::string(rule, '-') << '\n';
    for (const auto& row : rows) emit_row(row);
    return out.str();
}

std::string render_csv(const ReportTable& table) {
    std::ostringstream out;
    out << "method";
    for (const auto& t : table.topics) out << ',' << t;
    out << ",avg\n";
    for (std::size_t m = 0; m < table.methods.size(); ++m) {
        out << table.methods[m];
        for (const auto& cell : table.cells[m]) {
            out << ',';
            if (cell.runs > 0) out << fmt2(100.0 * cell.mean);
        }
        ReportCell avg = average_cell(table.cells[m]);
        out << ',';
        if (avg.runs > 0) out << fmt2(100.0 * avg.mean);
        out << '\n';
    }
    return out.str();
}

} // namespace dse
