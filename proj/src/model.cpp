#include "dse/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "dse/error.hpp"
#include "dse/rng.hpp"

namespace dse {

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> counts)
    : tokens_(std::move(tokens)), counts_(std::move(counts)) {
    if (tokens_.size() != counts_.size()) throw DataError("vocabulary token/count size mismatch");
    ids_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        auto [it, inserted] = ids_.emplace(tokens_[i], static_cast<int>(i) + 2);
        (void)it;
        if (!inserted) throw DataError("duplicate vocabulary token: " + tokens_[i]);
    }
}

int Vocabulary::id_of(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? kUnk : it->second;
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
    std::vector<int> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(id_of(t));
    return out;
}

Vocabulary build_vocab(const std::vector<const Document*>& docs, std::uint64_t min_count,
                       std::size_t max_size) {
    if (docs.empty()) throw DataError("cannot build a vocabulary from zero documents");
    std::map<std::string, std::uint64_t> counts;
    for (const Document* d : docs) {
        for (const auto& t : d->title_tokens) ++counts[t];
        for (const auto& t : d->abstract_tokens) ++counts[t];
    }
    std::vector<std::pair<std::string, std::uint64_t>> kept;
    for (auto& [token, count] : counts) {
        if (count >= min_count) kept.emplace_back(token, count);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (kept.size() > max_size) kept.resize(max_size);
    std::vector<std::string> tokens;
    std::vector<std::uint64_t> token_counts;
    tokens.reserve(kept.size());
    token_counts.reserve(kept.size());
    for (auto& [token, count] : kept) {
        tokens.push_back(std::move(token));
        token_counts.push_back(count);
    }
    return Vocabulary(std::move(tokens), std::move(token_counts));
}

void save_vocab(const Vocabulary& vocab, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write vocabulary: " + file.string());
    for (std::size_t i = 0; i < vocab.tokens().size(); ++i)
        out << vocab.tokens()[i] << '\t' << vocab.counts()[i] << '\n';
}

Vocabulary load_vocab(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open vocabulary: " + file.string());
    std::vector<std::string> tokens;
    std::vector<std::uint64_t> counts;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(file.string() + ", line " + std::to_string(line_no) + ": expected <token>\\t<count>");
        tokens.push_back(line.substr(0, tab));
        counts.push_back(std::stoull(line.substr(tab + 1)));
    }
    return Vocabulary(std::move(tokens), std::move(counts));
}

void ArchConfig::validate() const {
    if (embedding_dim <= 0) throw ConfigError("embedding_dim must be positive");
    if (windows.empty()) throw ConfigError("at least one window size is required");
    for (int w : windows)
        if (w <= 0) throw ConfigError("window sizes must be positive");
    if (arch == Arch::conv) {
        if (title_filters <= 0 || abstract_filters <= 0)
            throw ConfigError("filter counts must be positive");
        if (title_filters % static_cast<int>(windows.size()) != 0 ||
            abstract_filters % static_cast<int>(windows.size()) != 0)
            throw ConfigError("filter counts must divide evenly across window sizes");
    }
    if (max_abstract_tokens <= 0) throw ConfigError("max_abstract_tokens must be positive");
    if (dense_dim < 0) throw ConfigError("dense_dim must be non-negative");
}

Instance encode(const Document& doc, const Vocabulary& vocab, const ArchConfig& config) {
    Instance inst;
    inst.title_ids = vocab.encode(doc.title_tokens);
    if (doc.abstract_tokens.size() > static_cast<std::size_t>(config.max_abstract_tokens)) {
        std::vector<std::string> cut(doc.abstract_tokens.begin(),
                                     doc.abstract_tokens.begin() + config.max_abstract_tokens);
        inst.abstract_ids = vocab.encode(cut);
    } else {
        inst.abstract_ids = vocab.encode(doc.abstract_tokens);
    }
    return inst;
}

Instance dense_instance(std::vector<double> values) {
    Instance inst;
    inst.dense = std::move(values);
    return inst;
}

namespace {

enum class Field { title, abstract };

// Flat parameter layout. linear_bow: [token weights][bias][dense head].
// conv: [embedding][per field, per window: filter weights then biases]
// [output weights][output bias][dense head].
struct FilterBank {
    Field field;
    int window = 0;
    int n_filters = 0;
    std::size_t weights = 0; // offset; n_filters * window * dim doubles
    std::size_t biases = 0;  // offset; n_filters doubles
};

struct Layout {
    std::size_t emb = 0;
    std::vector<FilterBank> banks;
    std::size_t bow_weights = 0;
    std::size_t out_weights = 0;
    int out_count = 0;
    std::size_t out_bias = 0;
    std::size_t dense_weights = 0;
    std::size_t total = 0;
};

Layout compute_layout(const ArchConfig& c, std::size_t vocab_size) {
    c.validate();
    Layout l;
    std::size_t off = 0;
    if (c.arch == Arch::linear_bow) {
        l.bow_weights = off;
        off += vocab_size;
    } else {
        l.emb = off;
        off += vocab_size * static_cast<std::size_t>(c.embedding_dim);
        for (Field f : {Field::title, Field::abstract}) {
            int per_window = (f == Field::title ? c.title_filters : c.abstract_filters) /
                             static_cast<int>(c.windows.size());
            for (int w : c.windows) {
                FilterBank bank;
                bank.field = f;
                bank.window = w;
                bank.n_filters = per_window;
                bank.weights = off;
                off += static_cast<std::size_t>(per_window) * static_cast<std::size_t>(w) *
                       static_cast<std::size_t>(c.embedding_dim);
                bank.biases = off;
                off += static_cast<std::size_t>(per_window);
                l.banks.push_back(bank);
            }
        }
        l.out_count = c.title_filters + c.abstract_filters;
        l.out_weights = off;
        off += static_cast<std::size_t>(l.out_count);
    }
    l.out_bias = off;
    off += 1;
    if (c.dense_dim > 0) {
        l.dense_weights = off;
        off += static_cast<std::size_t>(c.dense_dim);
    }
    l.total = off;
    return l;
}

inline int id_at(const std::vector<int>& ids, std::size_t i) {
    // Virtual padding: positions past the end read as the pad token, so
    // sequences shorter than a window still produce one valid position.
    return i < ids.size() ? ids[i] : Vocabulary::kPad;
}

struct Poolled {
    double activation = 0.0;
    std::size_t position = 0;
};

// Max-pooled tanh activation of one filter over the sequence; ties keep the
// first position so the gradient routing is deterministic.
Poolled pool_filter(const ModelParams& p, const Layout& l, const FilterBank& bank, int k,
                    const std::vector<int>& ids) {
    const int d = p.config.embedding_dim;
    const int w = bank.window;
    const std::size_t len = std::max(ids.size(), static_cast<std::size_t>(w));
    const std::size_t n_pos = len - static_cast<std::size_t>(w) + 1;
    const double* weights =
        p.values.data() + bank.weights + static_cast<std::size_t>(k) * static_cast<std::size_t>(w * d);
    const double bias = p.values[bank.biases + static_cast<std::size_t>(k)];
    Poolled best;
    best.activation = -2.0; // below tanh range
    for (std::size_t pos = 0; pos < n_pos; ++pos) {
        double z = bias;
        for (int j = 0; j < w; ++j) {
            const double* row =
                p.values.data() + l.emb +
                static_cast<std::size_t>(id_at(ids, pos + static_cast<std::size_t>(j))) *
                    static_cast<std::size_t>(d);
            const double* fw = weights + static_cast<std::size_t>(j * d);
            for (int e = 0; e < d; ++e) z += row[e] * fw[e];
        }
        double a = std::tanh(z);
        if (a > best.activation) {
            best.activation = a;
            best.position = pos;
        }
    }
    return best;
}

double dense_forward(const ModelParams& p, const Layout& l, const Instance& inst) {
    if (p.config.dense_dim <= 0)
        throw ConfigError("instance carries a dense vector but the model has dense_dim 0");
    if (inst.dense.size() != static_cast<std::size_t>(p.config.dense_dim))
        throw ConfigError("dense vector size " + std::to_string(inst.dense.size()) +
                          " does not match dense_dim " + std::to_string(p.config.dense_dim));
    double s = p.values[l.out_bias];
    const double* wv = p.values.data() + l.dense_weights;
    for (std::size_t i = 0; i < inst.dense.size(); ++i) s += wv[i] * inst.dense[i];
    return s;
}

} // namespace

ModelParams init_model(const ArchConfig& config, std::size_t vocab_size, std::uint64_t seed) {
    Layout l = compute_layout(config, vocab_size);
    ModelParams p;
    p.config = config;
    p.vocab_size = vocab_size;
    p.values.assign(l.total, 0.0);
    Rng rng(seed);
    auto fill = [&](std::size_t off, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) p.values[off + i] = rng.uniform(-0.05, 0.05);
    };
    if (config.arch == Arch::linear_bow) {
        fill(l.bow_weights, vocab_size);
    } else {
        fill(l.emb, vocab_size * static_cast<std::size_t>(config.embedding_dim));
        for (const auto& bank : l.banks)
            fill(bank.weights, static_cast<std::size_t>(bank.n_filters) *
                                   static_cast<std::size_t>(bank.window) *
                                   static_cast<std::size_t>(config.embedding_dim));
        fill(l.out_weights, static_cast<std::size_t>(l.out_count));
    }
    if (config.dense_dim > 0) fill(l.dense_weights, static_cast<std::size_t>(config.dense_dim));
    return p;
}

double forward(const ModelParams& params, const Instance& inst) {
    Layout l = compute_layout(params.config, params.vocab_size);
    if (params.values.size() != l.total) throw ConfigError("parameter vector does not match layout");
    if (!inst.dense.empty()) return dense_forward(params, l, inst);

    if (params.config.arch == Arch::linear_bow) {
        double s = params.values[l.out_bias];
        for (int id : inst.title_ids) s += params.values[l.bow_weights + static_cast<std::size_t>(id)];
        for (int id : inst.abstract_ids) s += params.values[l.bow_weights + static_cast<std::size_t>(id)];
        return s;
    }

    double s = params.values[l.out_bias];
    std::size_t feature = 0;
    for (const auto& bank : l.banks) {
        const auto& ids = bank.field == Field::title ? inst.title_ids : inst.abstract_ids;
        for (int k = 0; k < bank.n_filters; ++k) {
            double pooled = pool_filter(params, l, bank, k, ids).activation;
            s += params.values[l.out_weights + feature] * pooled;
            ++feature;
        }
    }
    return s;
}

double forward(const ModelParams& params, const Document& doc, const Vocabulary& vocab) {
    return forward(params, encode(doc, vocab, params.config));
}

void accumulate_gradient(const ModelParams& params, const Instance& inst, double upstream,
                         std::span<double> grad) {
    Layout l = compute_layout(params.config, params.vocab_size);
    if (grad.size() != l.total) throw ConfigError("gradient vector does not match layout");
    if (upstream == 0.0) return;

    if (!inst.dense.empty()) {
        dense_forward(params, l, inst); // validates shape
        grad[l.out_bias] += upstream;
        for (std::size_t i = 0; i < inst.dense.size(); ++i)
            grad[l.dense_weights + i] += upstream * inst.dense[i];
        return;
    }

    if (params.config.arch == Arch::linear_bow) {
        grad[l.out_bias] += upstream;
        for (int id : inst.title_ids) grad[l.bow_weights + static_cast<std::size_t>(id)] += upstream;
        for (int id : inst.abstract_ids) grad[l.bow_weights + static_cast<std::size_t>(id)] += upstream;
        return;
    }

    const int d = params.config.embedding_dim;
    grad[l.out_bias] += upstream;
    std::size_t feature = 0;
    for (const auto& bank : l.banks) {
        const auto& ids = bank.field == Field::title ? inst.title_ids : inst.abstract_ids;
        for (int k = 0; k < bank.n_filters; ++k) {
            Poolled best = pool_filter(params, l, bank, k, ids);
            double w_out = params.values[l.out_weights + feature];
            grad[l.out_weights + feature] += upstream * best.activation;
            double dz = upstream * w_out * (1.0 - best.activation * best.activation);
            const std::size_t fw_off = bank.weights + static_cast<std::size_t>(k) *
                                                          static_cast<std::size_t>(bank.window * d);
            grad[bank.biases + static_cast<std::size_t>(k)] += dz;
            for (int j = 0; j < bank.window; ++j) {
                int id = id_at(ids, best.position + static_cast<std::size_t>(j));
                const std::size_t emb_off = l.emb + static_cast<std::size_t>(id) * static_cast<std::size_t>(d);
                const std::size_t fj = fw_off + static_cast<std::size_t>(j * d);
                for (int e = 0; e < d; ++e) {
                    grad[fj + static_cast<std::size_t>(e)] +=
                        dz * params.values[emb_off + static_cast<std::size_t>(e)];
                    grad[emb_off + static_cast<std::size_t>(e)] +=
                        dz * params.values[fj + static_cast<std::size_t>(e)];
                }
            }
            ++feature;
        }
    }
}

ScoredGradient backward(const ModelParams& params, const Instance& inst, double upstream) {
    ScoredGradient out;
    out.score = forward(params, inst);
    out.gradient.assign(params.values.size(), 0.0);
    accumulate_gradient(params, inst, upstream, out.gradient);
    return out;
}

int predict(const ModelParams& params, const Instance& inst, double threshold) {
    return forward(params, inst) > threshold ? 1 : -1;
}

int predict(const ModelParams& params, const Document& doc, const Vocabulary& vocab,
            double threshold) {
    return predict(params, encode(doc, vocab, params.config), threshold);
}

namespace {

constexpr char kModelMagic[8] = {'D', 'S', 'E', 'M', 'D', 'L', '0', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw DataError("model snapshot truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

} // namespace

void save_model(const ModelParams& params, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write model snapshot: " + file.string());
    out.write(kModelMagic, sizeof(kModelMagic));
    const ArchConfig& c = params.config;
    put_u64(out, c.arch == Arch::linear_bow ? 0 : 1);
    put_u64(out, static_cast<std::uint64_t>(c.embedding_dim));
    put_u64(out, static_cast<std::uint64_t>(c.title_filters));
    put_u64(out, static_cast<std::uint64_t>(c.abstract_filters));
    put_u64(out, c.windows.size());
    for (int w : c.windows) put_u64(out, static_cast<std::uint64_t>(w));
    put_u64(out, static_cast<std::uint64_t>(c.max_abstract_tokens));
    put_u64(out, static_cast<std::uint64_t>(c.dense_dim));
    put_u64(out, params.vocab_size);
    put_u64(out, params.values.size());
    for (double v : params.values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        put_u64(out, bits);
    }
    if (!out) throw DataError("failed writing model snapshot: " + file.string());
}

ModelParams load_model(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DataError("cannot open model snapshot: " + file.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kModelMagic, 8) != 0)
        throw DataError("not a model snapshot (bad header): " + file.string());
    ModelParams p;
    p.config.arch = get_u64(in) == 0 ? Arch::linear_bow : Arch::conv;
    p.config.embedding_dim = static_cast<int>(get_u64(in));
    p.config.title_filters = static_cast<int>(get_u64(in));
    p.config.abstract_filters = static_cast<int>(get_u64(in));
    std::uint64_t n_windows = get_u64(in);
    p.config.windows.clear();
    for (std::uint64_t i = 0; i < n_windows; ++i)
        p.config.windows.push_back(static_cast<int>(get_u64(in)));
    p.config.max_abstract_tokens = static_cast<int>(get_u64(in));
    p.config.dense_dim = static_cast<int>(get_u64(in));
    p.vocab_size = get_u64(in);
    std::uint64_t n = get_u64(in);
    p.values.resize(n);
    for (auto& v : p.values) {
        std::uint64_t bits = get_u64(in);
        std::memcpy(&v, &bits, 8);
    }
    Layout l = compute_layout(p.config, p.vocab_size);
    if (l.total != p.values.size())
        throw DataError("model snapshot parameter count does not match its architecture");
    return p;
}

} // namespace dse
