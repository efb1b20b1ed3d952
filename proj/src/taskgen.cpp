#include "dse/taskgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "dse/error.hpp"
#include "json.hpp"

namespace dse {

using nlohmann::json;

Topic Topic::parse(const std::string& plus_joined) {
    Topic t;
    std::string cur;
    std::istringstream in(plus_joined);
    while (std::getline(in, cur, '+')) {
        // trim surrounding whitespace
        auto first = cur.find_first_not_of(" \t");
        auto last = cur.find_last_not_of(" \t");
        if (first == std::string::npos) continue;
        t.terms.push_back(cur.substr(first, last - first + 1));
    }
    if (t.terms.empty()) throw ConfigError("topic needs at least one label term");
    std::sort(t.terms.begin(), t.terms.end());
    t.terms.erase(std::unique(t.terms.begin(), t.terms.end()), t.terms.end());
    return t;
}

bool Topic::matches(const Document& doc) const {
    for (const auto& term : terms)
        if (!doc.has_label(term)) return false;
    return true;
}

std::string Topic::display() const {
    std::string out;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i) out += " + ";
        out += terms[i];
    }
    return out;
}

std::string to_string(TaskVariant v) {
    return v == TaskVariant::case_control ? "case-control" : "censoring";
}

std::string to_string(Selector s) { return s == Selector::bm25 ? "bm25" : "random"; }

TaskVariant task_variant_from_string(const std::string& s) {
    if (s == "case-control") return TaskVariant::case_control;
    if (s == "censoring") return TaskVariant::censoring;
    throw ConfigError("unknown task variant: " + s);
}

Selector selector_from_string(const std::string& s) {
    if (s == "bm25") return Selector::bm25;
    if (s == "random") return Selector::random;
    throw ConfigError("unknown selector: " + s);
}

BiasSpec BiasSpec::parse(const std::string& s) {
    BiasSpec b;
    if (s == "none" || s.empty()) return b;
    const std::string prefix = "max-chars:";
    if (s.rfind(prefix, 0) == 0) {
        b.kind = Kind::max_chars;
        try {
            b.threshold = std::stoull(s.substr(prefix.size()));
        } catch (const std::exception&) {
            throw ConfigError("bad bias threshold in: " + s);
        }
        if (b.threshold == 0) throw ConfigError("bias threshold must be positive");
        return b;
    }
    throw ConfigError("unknown bias spec: " + s + " (expected none or max-chars:N)");
}

std::string BiasSpec::display() const {
    if (kind == Kind::none) return "none";
    return "max-chars:" + std::to_string(threshold);
}

SplitParts split_pool(std::vector<std::string> pool, Rng& rng, double valid_fraction) {
    if (!(valid_fraction > 0.0 && valid_fraction < 1.0))
        throw ConfigError("valid_fraction must lie in (0, 1)");
    rng.shuffle(pool);
    std::size_t n = pool.size();
    std::size_t n_valid = static_cast<std::size_t>(std::floor(static_cast<double>(n) * valid_fraction));
    std::size_t n_train = n - n_valid;
    // Under the default 1/3 share, cap the training side so that
    // |valid| == floor(|train| / 2) holds exactly; the one surplus id (only
    // pools of size 3k+2 have one) is handed back to the caller.
    if (std::abs(valid_fraction - 1.0 / 3.0) < 1e-12) n_train = std::min(n_train, 2 * n_valid + 1);
    if (n_train < 1 || n_valid < 1)
        throw DataError("pool of " + std::to_string(n) + " is too small to split into train/valid");
    SplitParts parts;
    parts.train.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_train));
    parts.valid.assign(pool.begin() + static_cast<std::ptrdiff_t>(n_train),
                       pool.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid));
    parts.leftover.assign(pool.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid), pool.end());
    return parts;
}

namespace {

std::vector<std::string> topic_positive_ids(const Corpus& corpus, const Topic& topic) {
    std::vector<std::string> ids;
    for (const auto& d : corpus.docs)
        if (topic.matches(d)) ids.push_back(d.id);
    return ids;
}

struct LpDraw {
    std::vector<std::string> pool; // train + valid
    std::vector<std::string> train, valid;
};

LpDraw draw_lp(std::vector<std::string> positives, int n_plus, Rng& rng, const Topic& topic) {
    if (n_plus < 2) throw ConfigError("n_plus must be at least 2");
    std::size_t pool_size = static_cast<std::size_t>(n_plus) + static_cast<std::size_t>(n_plus / 2);
    if (positives.size() < pool_size)
        throw DataError("topic [" + topic.display() + "] has " + std::to_string(positives.size()) +
                        " positives; " + std::to_string(pool_size) +
                        " are needed for the labeled pool");
    rng.shuffle(positives);
    LpDraw lp;
    lp.pool.assign(positives.begin(), positives.begin() + static_cast<std::ptrdiff_t>(pool_size));
    SplitParts parts = split_pool(lp.pool, rng);
    lp.train = std::move(parts.train);
    lp.valid = std::move(parts.valid);
    if (lp.train.size() != static_cast<std::size_t>(n_plus))
        throw std::logic_error("labeled pool split did not produce n_plus training positives");
    return lp;
}

/// Reserves half the unlabeled pool as the truth-labeled test split and
/// cuts the remainder 2:1 into train/valid; the at-most-one split leftover
/// joins the test side.
void split_unlabeled(std::vector<std::string> u_pool, const Corpus& corpus, const Topic& topic,
                     Rng& rng, DseTask& task) {
    if (u_pool.size() < 5)
        throw DataError("unlabeled pool of " + std::to_string(u_pool.size()) +
                        " is too small to split");
    rng.shuffle(u_pool);
    std::size_t n_test = u_pool.size() / 2;
    std::vector<std::string> test_ids(u_pool.begin(),
                                      u_pool.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<std::string> rest(u_pool.begin() + static_cast<std::ptrdiff_t>(n_test), u_pool.end());
    SplitParts parts = split_pool(std::move(rest), rng);
    task.u_train = std::move(parts.train);
    task.u_valid = std::move(parts.valid);
    for (auto& id : parts.leftover) test_ids.push_back(std::move(id));
    task.test.reserve(test_ids.size());
    for (auto& id : test_ids) {
        int truth = topic.matches(corpus.by_id(id)) ? 1 : 0;
        task.test.emplace_back(std::move(id), truth);
    }
}

void attach_negatives(const Corpus& corpus, const Topic& topic, const GenParams& params, Rng& rng,
                      DseTask& task) {
    if (params.n_minus == 0) return;
    if (params.n_minus < 2) throw ConfigError("n_minus must be 0 or at least 2");
    std::unordered_set<std::string> used;
    for (const auto& id : task.lp_train) used.insert(id);
    for (const auto& id : task.lp_valid) used.insert(id);
    for (const auto& id : task.u_train) used.insert(id);
    for (const auto& id : task.u_valid) used.insert(id);
    for (const auto& [id, truth] : task.test) {
        (void)truth;
        used.insert(id);
    }
    std::size_t pool_size =
        static_cast<std::size_t>(params.n_minus) + static_cast<std::size_t>(params.n_minus / 2);
    auto ids = sample_biased_negatives(corpus, topic, pool_size, params.bias, rng, used);
    SplitParts parts = split_pool(std::move(ids), rng);
    task.n_train = std::move(parts.train);
    task.n_valid = std::move(parts.valid);
}

void fill_meta(DseTask& task, const Corpus& corpus, const Topic& topic, const GenParams& params,
               TaskVariant variant, std::size_t topic_positive_count) {
    TaskMeta& m = task.meta;
    m.topic_terms = topic.terms;
    m.variant = variant;
    m.selector = params.selector;
    m.seed = params.seed;
    m.bias = params.bias;
    m.corpus_docs = corpus.size();
    m.topic_positives = topic_positive_count;
    TaskStats stats = task_stats(task, corpus);
    m.u_precision_pct = stats.precision_pct;
    m.u_recall_pct = stats.recall_pct;
    m.true_prior_u = stats.precision_pct / 100.0;
    m.oracle_labels = true;
}

} // namespace

DseTask generate_case_control(const Corpus& corpus, const Topic& topic, const GenParams& params,
                              const InvertedIndex* index) {
    Rng rng(params.seed);
    std::vector<std::string> positives = topic_positive_ids(corpus, topic);
    std::size_t topic_positive_count = positives.size();

    DseTask task;
    LpDraw lp = draw_lp(std::move(positives), params.n_plus, rng, topic);
    task.lp_train = lp.train;
    task.lp_valid = lp.valid;
    std::unordered_set<std::string> lp_set(lp.pool.begin(), lp.pool.end());

    std::vector<std::string> u_pool;
    if (params.selector == Selector::bm25) {
        if (index == nullptr) throw ConfigError("the bm25 selector needs an index");
        Query query = build_mlt_query(*index, corpus, lp.pool, params.mlt);
        auto ranked = retrieve(*index, query, params.u_size + lp.pool.size());
        for (auto& sd : ranked) {
            if (lp_set.count(sd.id)) continue;
            if (u_pool.size() == params.u_size) break;
            u_pool.push_back(sd.id);
            task.meta.ranking.push_back(std::move(sd));
        }
    } else {
        std::vector<std::string> rest;
        rest.reserve(corpus.size());
        for (const auto& d : corpus.docs)
            if (!lp_set.count(d.id)) rest.push_back(d.id);
        rng.shuffle(rest);
        if (rest.size() > params.u_size) rest.resize(params.u_size);
        u_pool = std::move(rest);
    }

    split_unlabeled(std::move(u_pool), corpus, topic, rng, task);
    attach_negatives(corpus, topic, params, rng, task);
    fill_meta(task, corpus, topic, params, TaskVariant::case_control, topic_positive_count);
    return task;
}

DseTask generate_censoring(const Corpus& corpus, const Topic& topic, const GenParams& params,
                           const InvertedIndex& index) {
    if (params.selector != Selector::bm25)
        throw ConfigError("the censoring variant retrieves its negatives and requires selector=bm25");
    Rng rng(params.seed);
    std::vector<std::string> positives = topic_positive_ids(corpus, topic);
    std::size_t topic_positive_count = positives.size();
    std::unordered_set<std::string> positive_set(positives.begin(), positives.end());

    DseTask task;
    LpDraw lp = draw_lp(positives, params.n_plus, rng, topic);
    task.lp_train = lp.train;
    task.lp_valid = lp.valid;
    std::unordered_set<std::string> lp_set(lp.pool.begin(), lp.pool.end());

    // Retrieval is seeded with the full positive set; returned positives are
    // stripped so the retrieved part holds plausible negatives only.
    Query query = build_mlt_query(index, corpus, positives, params.mlt);
    auto ranked = retrieve(index, query, params.u_size + positives.size());
    std::vector<std::string> u_pool;
    for (const auto& id : positives)
        if (!lp_set.count(id)) u_pool.push_back(id);
    for (auto& sd : ranked) {
        if (positive_set.count(sd.id)) continue;
        if (task.meta.ranking.size() == params.u_size) break;
        u_pool.push_back(sd.id);
        task.meta.ranking.push_back(std::move(sd));
    }

    split_unlabeled(std::move(u_pool), corpus, topic, rng, task);
    attach_negatives(corpus, topic, params, rng, task);
    fill_meta(task, corpus, topic, params, TaskVariant::censoring, topic_positive_count);
    return task;
}

std::vector<std::string> sample_biased_negatives(const Corpus& corpus, const Topic& topic,
                                                 std::size_t n, const BiasSpec& bias, Rng& rng,
                                                 const std::unordered_set<std::string>& exclude) {
    std::vector<std::string> pool;
    for (const auto& d : corpus.docs) {
        if (topic.matches(d)) continue;
        if (exclude.count(d.id)) continue;
        if (bias.kind == BiasSpec::Kind::max_chars && d.abstract.size() >= bias.threshold) continue;
        pool.push_back(d.id);
    }
    if (pool.size() < n)
        throw DataError("only " + std::to_string(pool.size()) + " negatives qualify (bias " +
                        bias.display() + "), need " + std::to_string(n));
    rng.shuffle(pool);
    pool.resize(n);
    return pool;
}

TaskStats task_stats(const DseTask& task, const Corpus& corpus) {
    Topic topic;
    topic.terms = task.meta.topic_terms;
    TaskStats s;
    s.u_size = task.u_train.size() + task.u_valid.size();
    for (const auto& id : task.u_train)
        if (topic.matches(corpus.by_id(id))) ++s.u_positives;
    for (const auto& id : task.u_valid)
        if (topic.matches(corpus.by_id(id))) ++s.u_positives;
    if (s.u_size > 0)
        s.precision_pct = 100.0 * static_cast<double>(s.u_positives) / static_cast<double>(s.u_size);
    std::size_t total_positives = 0;
    for (const auto& d : corpus.docs)
        if (topic.matches(d)) ++total_positives;
    std::size_t lp = task.lp_train.size() + task.lp_valid.size();
    if (total_positives > lp)
        s.recall_pct =
            100.0 * static_cast<double>(s.u_positives) / static_cast<double>(total_positives - lp);
    return s;
}

void verify_task(const DseTask& task, const Corpus& corpus) {
    Topic topic;
    topic.terms = task.meta.topic_terms;
    auto fail = [](const std::string& what) { throw DataError("task invariant violated: " + what); };

    std::unordered_set<std::string> seen;
    auto check_unique = [&](const std::vector<std::string>& ids, const char* name) {
        for (const auto& id : ids) {
            if (!corpus.contains(id)) fail(std::string(name) + " id not in corpus: " + id);
            if (!seen.insert(id).second) fail("id appears in two splits: " + id);
        }
    };
    check_unique(task.lp_train, "lp_train");
    check_unique(task.lp_valid, "lp_valid");
    check_unique(task.u_train, "u_train");
    check_unique(task.u_valid, "u_valid");
    check_unique(task.n_train, "n_train");
    check_unique(task.n_valid, "n_valid");
    for (const auto& [id, truth] : task.test) {
        if (!corpus.contains(id)) fail("test id not in corpus: " + id);
        if (!seen.insert(id).second) fail("id appears in two splits: " + id);
        int want = topic.matches(corpus.by_id(id)) ? 1 : 0;
        if (truth != want) fail("test label disagrees with topic membership for " + id);
    }

    for (const auto& id : task.lp_train)
        if (!topic.matches(corpus.by_id(id))) fail("lp_train contains a non-positive: " + id);
    for (const auto& id : task.lp_valid)
        if (!topic.matches(corpus.by_id(id))) fail("lp_valid contains a non-positive: " + id);
    for (const auto& id : task.n_train)
        if (topic.matches(corpus.by_id(id))) fail("n_train contains a positive: " + id);
    for (const auto& id : task.n_valid)
        if (topic.matches(corpus.by_id(id))) fail("n_valid contains a positive: " + id);

    if (task.lp_valid.size() != task.lp_train.size() / 2) fail("lp_valid is not half of lp_train");
    if (task.u_valid.size() != task.u_train.size() / 2) fail("u_valid is not half of u_train");
    if (!task.n_train.empty() && task.n_valid.size() != task.n_train.size() / 2)
        fail("n_valid is not half of n_train");
    if (task.u_train.empty() || task.test.empty()) fail("empty unlabeled or test split");

    if (task.meta.variant == TaskVariant::censoring) {
        // Every positive outside LP must be somewhere in the generated pool.
        std::unordered_set<std::string> lp(task.lp_train.begin(), task.lp_train.end());
        lp.insert(task.lp_valid.begin(), task.lp_valid.end());
        for (const auto& d : corpus.docs) {
            if (!topic.matches(d) || lp.count(d.id)) continue;
            if (!seen.count(d.id)) fail("censoring task dropped positive " + d.id);
        }
    }
}

namespace {

json record_json(const Document& d, char pu, int truth) {
    json j;
    j["abstract"] = d.abstract;
    j["id"] = d.id;
    j["pu_label"] = std::string(1, pu);
    j["title"] = d.title;
    if (truth >= 0) {
        j["true_label"] = truth;
    } else {
        j["true_label"] = nullptr;
    }
    return j;
}

void write_split(const std::filesystem::path& file, const std::vector<json>& records) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write task split: " + file.string());
    for (const auto& j : records) out << j.dump() << '\n';
}

int truth_of(const Corpus& corpus, const Topic& topic, const std::string& id) {
    return topic.matches(corpus.by_id(id)) ? 1 : 0;
}

} // namespace

void save_task(const DseTask& task, const Corpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    Topic topic;
    topic.terms = task.meta.topic_terms;
    bool keep_truth = task.meta.oracle_labels;

    auto rows = [&](const std::vector<std::string>& ids, char pu) {
        std::vector<json> out;
        out.reserve(ids.size());
        for (const auto& id : ids) {
            const Document& d = corpus.by_id(id);
            out.push_back(record_json(d, pu, keep_truth ? truth_of(corpus, topic, id) : -1));
        }
        return out;
    };

    std::vector<json> train = rows(task.lp_train, 'P');
    for (auto& j : rows(task.u_train, 'U')) train.push_back(std::move(j));
    for (auto& j : rows(task.n_train, 'N')) train.push_back(std::move(j));
    std::vector<json> valid = rows(task.lp_valid, 'P');
    for (auto& j : rows(task.u_valid, 'U')) valid.push_back(std::move(j));
    for (auto& j : rows(task.n_valid, 'N')) valid.push_back(std::move(j));
    std::vector<json> test;
    for (const auto& [id, truth] : task.test) test.push_back(record_json(corpus.by_id(id), 'U', truth));

    write_split(dir / "train.jsonl", train);
    write_split(dir / "valid.jsonl", valid);
    write_split(dir / "test.jsonl", test);

    json meta;
    meta["schema_version"] = 1;
    meta["topic_terms"] = task.meta.topic_terms;
    meta["variant"] = to_string(task.meta.variant);
    meta["selector"] = to_string(task.meta.selector);
    meta["seed"] = task.meta.seed;
    meta["bias"] = task.meta.bias.display();
    meta["corpus_docs"] = task.meta.corpus_docs;
    meta["topic_positives"] = task.meta.topic_positives;
    meta["counts"] = {{"lp_train", task.lp_train.size()}, {"lp_valid", task.lp_valid.size()},
                      {"u_train", task.u_train.size()},   {"u_valid", task.u_valid.size()},
                      {"n_train", task.n_train.size()},   {"n_valid", task.n_valid.size()},
                      {"test", task.test.size()}};
    meta["u_precision_pct"] = task.meta.u_precision_pct;
    meta["u_recall_pct"] = task.meta.u_recall_pct;
    meta["true_prior_u"] = task.meta.true_prior_u;
    meta["oracle_labels"] = task.meta.oracle_labels;
    json ranking = json::array();
    for (const auto& sd : task.meta.ranking) ranking.push_back(json::array({sd.id, sd.score}));
    meta["ranking"] = std::move(ranking);

    std::ofstream out(dir / "meta.json", std::ios::binary);
    if (!out) throw DataError("cannot write task meta: " + (dir / "meta.json").string());
    out << meta.dump(2) << '\n';
}

namespace {

std::vector<TaskRecord> read_split(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open task split: " + file.string());
    std::vector<TaskRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw DataError(file.string() + ", line " + std::to_string(line_no) + ": invalid JSON");
        TaskRecord r;
        try {
            r.id = j.at("id").get<std::string>();
            r.title = j.at("title").get<std::string>();
            r.abstract = j.at("abstract").get<std::string>();
            std::string pu = j.at("pu_label").get<std::string>();
            if (pu != "P" && pu != "U" && pu != "N")
                throw DataError("pu_label must be P, U or N, got " + pu);
            r.pu = pu[0];
            if (j.contains("true_label") && !j.at("true_label").is_null())
                r.truth = j.at("true_label").get<int>();
        } catch (const json::exception& e) {
            throw DataError(file.string() + ", line " + std::to_string(line_no) + ": " + e.what());
        }
        records.push_back(std::move(r));
    }
    return records;
}

} // namespace

TaskBundle load_task(const std::filesystem::path& dir) {
    TaskBundle bundle;
    bundle.train = read_split(dir / "train.jsonl");
    bundle.valid = read_split(dir / "valid.jsonl");
    bundle.test = read_split(dir / "test.jsonl");

    std::ifstream in(dir / "meta.json");
    if (!in) throw DataError("cannot open task meta: " + (dir / "meta.json").string());
    json meta = json::parse(in, nullptr, false);
    if (meta.is_discarded()) throw DataError("invalid JSON in " + (dir / "meta.json").string());
    try {
        bundle.meta.topic_terms = meta.at("topic_terms").get<std::vector<std::string>>();
        bundle.meta.variant = task_variant_from_string(meta.at("variant").get<std::string>());
        bundle.meta.selector = selector_from_string(meta.at("selector").get<std::string>());
        bundle.meta.seed = meta.at("seed").get<std::uint64_t>();
        bundle.meta.bias = BiasSpec::parse(meta.at("bias").get<std::string>());
        bundle.meta.corpus_docs = meta.at("corpus_docs").get<std::size_t>();
        bundle.meta.topic_positives = meta.at("topic_positives").get<std::size_t>();
        bundle.meta.u_precision_pct = meta.at("u_precision_pct").get<double>();
        bundle.meta.u_recall_pct = meta.at("u_recall_pct").get<double>();
        bundle.meta.true_prior_u = meta.at("true_prior_u").get<double>();
        bundle.meta.oracle_labels = meta.at("oracle_labels").get<bool>();
        for (const auto& row : meta.at("ranking"))
            bundle.meta.ranking.push_back({row.at(0).get<std::string>(), row.at(1).get<double>()});
    } catch (const json::exception& e) {
        throw DataError((dir / "meta.json").string() + ": " + e.what());
    }
    for (const auto& r : bundle.test)
        if (r.truth < 0) throw DataError("test split contains a record without a true label: " + r.id);
    return bundle;
}

SyntheticPuSpec SyntheticPuSpec::isotropic(double prior, int dim, double separation, double sigma) {
    SyntheticPuSpec spec;
    spec.prior = prior;
    spec.dim = dim;
    spec.mean_pos.assign(dim, separation / 2.0);
    spec.mean_neg.assign(dim, -separation / 2.0);
    spec.cov_pos.assign(static_cast<std::size_t>(dim) * dim, 0.0);
    spec.cov_neg.assign(static_cast<std::size_t>(dim) * dim, 0.0);
    for (int i = 0; i < dim; ++i) {
        spec.cov_pos[static_cast<std::size_t>(i) * dim + i] = sigma * sigma;
        spec.cov_neg[static_cast<std::size_t>(i) * dim + i] = sigma * sigma;
    }
    return spec;
}

namespace {

// Lower-triangular Cholesky factor; rejects non-positive-definite input.
std::vector<double> cholesky(const std::vector<double>& cov, int d) {
    if (cov.size() != static_cast<std::size_t>(d) * static_cast<std::size_t>(d))
        throw ConfigError("covariance must be dim*dim");
    std::vector<double> L(cov.size(), 0.0);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = cov[static_cast<std::size_t>(i) * d + j];
            for (int k = 0; k < j; ++k)
                s -= L[static_cast<std::size_t>(i) * d + k] * L[static_cast<std::size_t>(j) * d + k];
            if (i == j) {
                if (s <= 0.0) throw DataError("covariance matrix is not positive definite");
                L[static_cast<std::size_t>(i) * d + i] = std::sqrt(s);
            } else {
                L[static_cast<std::size_t>(i) * d + j] = s / L[static_cast<std::size_t>(j) * d + j];
            }
        }
    }
    return L;
}

std::vector<double> gaussian_draw(const std::vector<double>& mean, const std::vector<double>& L, int d,
                                  Rng& rng) {
    std::vector<double> z(d);
    for (auto& v : z) v = rng.normal();
    std::vector<double> x(d);
    for (int i = 0; i < d; ++i) {
        double s = mean[static_cast<std::size_t>(i)];
        for (int j = 0; j <= i; ++j) s += L[static_cast<std::size_t>(i) * d + j] * z[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] = s;
    }
    return x;
}

} // namespace

SyntheticPuSet generate_synthetic(const SyntheticPuSpec& spec) {
    if (!(spec.prior > 0.0 && spec.prior < 1.0))
        throw ConfigError("synthetic prior must lie in (0, 1)");
    if (spec.dim < 1) throw ConfigError("synthetic dim must be positive");
    if (spec.mean_pos.size() != static_cast<std::size_t>(spec.dim) ||
        spec.mean_neg.size() != static_cast<std::size_t>(spec.dim))
        throw ConfigError("synthetic means must have length dim");
    std::vector<double> L_pos = cholesky(spec.cov_pos, spec.dim);
    std::vector<double> L_neg = cholesky(spec.cov_neg, spec.dim);

    Rng rng(spec.seed);
    SyntheticPuSet out;
    out.p.reserve(spec.n_p);
    for (std::size_t i = 0; i < spec.n_p; ++i)
        out.p.push_back({gaussian_draw(spec.mean_pos, L_pos, spec.dim, rng), +1});
    out.u.reserve(spec.n_u);
    for (std::size_t i = 0; i < spec.n_u; ++i) {
        bool pos = rng.uniform() < spec.prior;
        out.u.push_back({gaussian_draw(pos ? spec.mean_pos : spec.mean_neg, pos ? L_pos : L_neg,
                                       spec.dim, rng),
                         pos ? +1 : -1});
    }
    out.n.reserve(spec.n_n);
    for (std::size_t i = 0; i < spec.n_n; ++i)
        out.n.push_back({gaussian_draw(spec.mean_neg, L_neg, spec.dim, rng), -1});
    return out;
}

} // namespace dse
