#include "dse/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "dse/error.hpp"
#include "dse/rng.hpp"

namespace dse {

std::vector<SparseVec> embed_tfidf(const std::vector<const Document*>& docs,
                                   const Vocabulary& vocab) {
    if (docs.empty()) throw DataError("no documents to embed");
    std::size_t n = docs.size();

    std::vector<std::map<int, double>> counts(n);
    std::vector<std::size_t> df(vocab.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        auto add = [&](const std::vector<std::string>& toks) {
            for (const auto& t : toks) {
                int id = vocab.id_of(t);
                if (id < 2) continue; // skip pad/unk pseudo-tokens
                counts[i][id] += 1.0;
            }
        };
        add(docs[i]->title_tokens);
        add(docs[i]->abstract_tokens);
        for (const auto& [id, c] : counts[i]) {
            (void)c;
            ++df[static_cast<std::size_t>(id)];
        }
    }

    std::vector<SparseVec> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (counts[i].empty())
            throw DataError("document " + docs[i]->id + " has no in-vocabulary tokens to embed");
        double norm2 = 0.0;
        for (const auto& [id, tf] : counts[i]) {
            double idf =
                std::log((1.0 + static_cast<double>(n)) /
                         (1.0 + static_cast<double>(df[static_cast<std::size_t>(id)]))) +
                1.0;
            double w = tf * idf;
            out[i].emplace_back(id, w);
            norm2 += w * w;
        }
        double inv = 1.0 / std::sqrt(norm2);
        for (auto& [id, w] : out[i]) {
            (void)id;
            w *= inv;
        }
    }
    return out;
}

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;

    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    std::size_t find(std::size_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

/// Must-link groups collapsed to their weighted means.
struct PseudoPoints {
    std::vector<std::vector<double>> x;         // dense, one per group
    std::vector<double> weight;                 // group sizes
    std::vector<double> norm2;                  // squared norms of x
    std::vector<std::size_t> group_of;          // original point -> group
    std::vector<std::vector<std::size_t>> cannot; // group-level cannot-link adjacency
    double within_group_sse = 0.0;              // constant part of the objective
};

int infer_dim(const std::vector<SparseVec>& points, int dim) {
    int d = dim;
    if (d < 0) {
        d = 0;
        for (const auto& p : points)
            for (const auto& [id, w] : p) {
                (void)w;
                d = std::max(d, id + 1);
            }
    }
    if (d <= 0) throw DataError("points have no features; cannot infer dimension");
    return d;
}

PseudoPoints build_pseudo_points(const std::vector<SparseVec>& points,
                                 const ConstraintSet& constraints, int dim) {
    std::size_t n = points.size();
    UnionFind uf(n);
    for (const auto& [a, b] : constraints.must_link) {
        if (a >= n || b >= n) throw ConfigError("must-link index out of range");
        uf.unite(a, b);
    }
    for (const auto& [a, b] : constraints.cannot_link) {
        if (a >= n || b >= n) throw ConfigError("cannot-link index out of range");
        if (uf.find(a) == uf.find(b))
            throw DataError("infeasible constraints: a cannot-link pair is must-linked");
    }

    // Groups numbered by smallest member index for determinism.
    std::map<std::size_t, std::size_t> root_to_group;
    PseudoPoints pp;
    pp.group_of.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t root = uf.find(i);
        auto it = root_to_group.find(root);
        if (it == root_to_group.end()) {
            it = root_to_group.emplace(root, pp.x.size()).first;
            pp.x.emplace_back(static_cast<std::size_t>(dim), 0.0);
            pp.weight.push_back(0.0);
        }
        std::size_t g = it->second;
        pp.group_of[i] = g;
        pp.weight[g] += 1.0;
        for (const auto& [id, w] : points[i]) pp.x[g][static_cast<std::size_t>(id)] += w;
    }
    for (std::size_t g = 0; g < pp.x.size(); ++g)
        for (auto& v : pp.x[g]) v /= pp.weight[g];

    // Objective decomposition: sum over original points of ||x - mean||^2
    // plus the weighted pseudo-point term handled during iterations.
    for (std::size_t i = 0; i < n; ++i) {
        const auto& mean = pp.x[pp.group_of[i]];
        double d2 = 0.0;
        std::size_t k = 0; // walk sparse entries against the dense mean
        for (int j = 0; j < dim; ++j) {
            double xj = 0.0;
            if (k < points[i].size() && points[i][k].first == j) {
                xj = points[i][k].second;
                ++k;
            }
            double diff = xj - mean[static_cast<std::size_t>(j)];
            d2 += diff * diff;
        }
        pp.within_group_sse += d2;
    }

    pp.norm2.resize(pp.x.size());
    for (std::size_t g = 0; g < pp.x.size(); ++g) {
        double s = 0.0;
        for (double v : pp.x[g]) s += v * v;
        pp.norm2[g] = s;
    }

    pp.cannot.resize(pp.x.size());
    for (const auto& [a, b] : constraints.cannot_link) {
        std::size_t ga = pp.group_of[a], gb = pp.group_of[b];
        pp.cannot[ga].push_back(gb);
        pp.cannot[gb].push_back(ga);
    }
    for (auto& adj : pp.cannot) {
        std::sort(adj.begin(), adj.end());
        adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }
    return pp;
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::vector<std::vector<double>> kmeanspp(const PseudoPoints& pp, int k, Rng& rng) {
    std::size_t m = pp.x.size();
    std::vector<std::vector<double>> centroids;
    double total_w = std::accumulate(pp.weight.begin(), pp.weight.end(), 0.0);

    auto weighted_pick = [&](const std::vector<double>& probs, double total) {
        double r = rng.uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (r < acc) return i;
        }
        return probs.size() - 1;
    };

    centroids.push_back(pp.x[weighted_pick(pp.weight, total_w)]);
    std::vector<double> d2(m);
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double best = sq_dist(pp.x[i], centroids[0]);
            for (std::size_t c = 1; c < centroids.size(); ++c)
                best = std::min(best, sq_dist(pp.x[i], centroids[c]));
            d2[i] = best * pp.weight[i];
            total += d2[i];
        }
        std::size_t pick = total > 0.0 ? weighted_pick(d2, total) : rng.below(m);
        centroids.push_back(pp.x[pick]);
    }
    return centroids;
}

struct IterationState {
    std::vector<int> assign;  // per pseudo-point
    std::vector<std::vector<double>> centroids;
    double objective = 0.0;
};

/// Assign each pseudo-point to the nearest centroid not excluded by an
/// already-assigned cannot-link partner; recompute centroids; report the
/// weighted objective. Throws when a point has no permissible cluster.
IterationState one_iteration(const PseudoPoints& pp, std::vector<std::vector<double>> centroids) {
    std::size_t m = pp.x.size();
    int k = static_cast<int>(centroids.size());
    IterationState st;
    st.assign.assign(m, -1);

    for (std::size_t i = 0; i < m; ++i) {
        std::vector<std::pair<double, int>> order;
        order.reserve(static_cast<std::size_t>(k));
        for (int c = 0; c < k; ++c) order.emplace_back(sq_dist(pp.x[i], centroids[static_cast<std::size_t>(c)]), c);
        std::sort(order.begin(), order.end());
        int chosen = -1;
        for (const auto& [d, c] : order) {
            (void)d;
            bool violates = false;
            for (std::size_t partner : pp.cannot[i]) {
                if (st.assign[partner] == c) {
                    violates = true;
                    break;
                }
            }
            if (!violates) {
                chosen = c;
                break;
            }
        }
        if (chosen < 0)
            throw DataError("constrained assignment failed: point group " + std::to_string(i) +
                            " has no permissible cluster");
        st.assign[i] = chosen;
    }

    std::size_t dim = pp.x.empty() ? 0 : pp.x[0].size();
    st.centroids.assign(static_cast<std::size_t>(k), std::vector<double>(dim, 0.0));
    std::vector<double> cluster_w(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        auto c = static_cast<std::size_t>(st.assign[i]);
        cluster_w[c] += pp.weight[i];
        for (std::size_t j = 0; j < dim; ++j) st.centroids[c][j] += pp.weight[i] * pp.x[i][j];
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
        if (cluster_w[c] > 0.0) {
            for (auto& v : st.centroids[c]) v /= cluster_w[c];
        } else {
            // Empty cluster: reseed to the pseudo-point farthest from its
            // assigned centroid.
            double worst = -1.0;
            std::size_t pick = 0;
            for (std::size_t i = 0; i < m; ++i) {
                double d = sq_dist(pp.x[i], st.centroids[static_cast<std::size_t>(st.assign[i])]);
                if (d > worst) {
                    worst = d;
                    pick = i;
                }
            }
            st.centroids[c] = pp.x[pick];
        }
    }

    st.objective = pp.within_group_sse;
    for (std::size_t i = 0; i < m; ++i)
        st.objective += pp.weight[i] * sq_dist(pp.x[i], st.centroids[static_cast<std::size_t>(st.assign[i])]);
    return st;
}

/// Objective of an assignment measured against the centroids it induces.
double assignment_objective(const PseudoPoints& pp, const std::vector<int>& assign,
                            const std::vector<std::vector<double>>& centroids) {
    double obj = pp.within_group_sse;
    for (std::size_t i = 0; i < pp.x.size(); ++i)
        obj += pp.weight[i] * sq_dist(pp.x[i], centroids[static_cast<std::size_t>(assign[i])]);
    return obj;
}

ClusterAssignment run_cop_kmeans(const std::vector<SparseVec>& points,
                                 const ConstraintSet& constraints,
                                 std::vector<std::vector<double>> centroids, int max_iters,
                                 int dim) {
    PseudoPoints pp = build_pseudo_points(points, constraints, dim);
    int k = static_cast<int>(centroids.size());
    if (k < 1) throw ConfigError("k must be at least 1");
    if (static_cast<std::size_t>(k) > pp.x.size())
        throw ConfigError("k exceeds the number of must-link groups");

    ClusterAssignment result;
    std::vector<int> best_assign;
    double best_obj = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best_centroids = centroids;

    for (int iter = 0; iter < max_iters; ++iter) {
        IterationState st = one_iteration(pp, centroids);
        ++result.iterations;
        if (st.objective > best_obj + 1e-12) {
            // A constrained reassignment can occasionally move uphill; keep
            // the best state instead and stop.
            break;
        }
        bool converged = (st.assign == best_assign);
        best_assign = st.assign;
        best_obj = st.objective;
        best_centroids = st.centroids;
        result.objective_trace.push_back(st.objective);
        centroids = st.centroids;
        if (converged) break;
    }

    if (best_assign.empty()) {
        // max_iters == 0: evaluate the initial centroids without moving them.
        IterationState st = one_iteration(pp, centroids);
        best_assign = st.assign;
        best_centroids = centroids;
        best_obj = assignment_objective(pp, st.assign, centroids);
        result.objective_trace.push_back(best_obj);
    }

    result.cluster.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        result.cluster[i] = best_assign[pp.group_of[i]];
    result.centroids = std::move(best_centroids);
    result.objective = best_obj;
    return result;
}

} // namespace

ClusterAssignment cop_kmeans(const std::vector<SparseVec>& points, const ConstraintSet& constraints,
                             int k, std::uint64_t seed, int max_iters, int dim) {
    if (points.empty()) throw DataError("no points to cluster");
    if (k < 1) throw ConfigError("k must be at least 1");
    int d = infer_dim(points, dim);
    PseudoPoints pp = build_pseudo_points(points, constraints, d);
    if (static_cast<std::size_t>(k) > pp.x.size())
        throw ConfigError("k exceeds the number of must-link groups");
    Rng rng(seed);
    auto centroids = kmeanspp(pp, k, rng);
    return run_cop_kmeans(points, constraints, std::move(centroids), max_iters, d);
}

ClusterAssignment cop_kmeans_from_centroids(const std::vector<SparseVec>& points,
                                            const ConstraintSet& constraints,
                                            std::vector<std::vector<double>> centroids,
                                            int max_iters, int dim) {
    if (points.empty()) throw DataError("no points to cluster");
    if (centroids.empty()) throw ConfigError("need at least one initial centroid");
    int d = infer_dim(points, dim);
    for (const auto& c : centroids)
        if (c.size() != static_cast<std::size_t>(d))
            throw ConfigError("initial centroid dimension mismatch");
    return run_cop_kmeans(points, constraints, std::move(centroids), max_iters, d);
}

std::vector<int> pu_from_clusters(const ClusterAssignment& assignment,
                                  const std::vector<std::size_t>& lp_indices) {
    if (lp_indices.empty()) throw DataError("no labeled positives to anchor the positive cluster");
    int positive_cluster = -1;
    for (std::size_t idx : lp_indices) {
        if (idx >= assignment.cluster.size()) throw ConfigError("labeled index out of range");
        int c = assignment.cluster[idx];
        if (positive_cluster < 0) positive_cluster = c;
        if (c != positive_cluster)
            throw DataError("labeled positives ended up in different clusters; must-link them "
                            "before clustering");
    }
    std::vector<int> labels(assignment.cluster.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        labels[i] = assignment.cluster[i] == positive_cluster ? +1 : -1;
    return labels;
}

std::string cluster_tsv(const std::vector<std::string>& ids, const ClusterAssignment& assignment,
                        const std::vector<int>& labels) {
    if (ids.size() != assignment.cluster.size() || ids.size() != labels.size())
        throw ConfigError("cluster TSV inputs disagree in length");
    std::ostringstream out;
    for (std::size_t i = 0; i < ids.size(); ++i)
        out << ids[i] << '\t' << assignment.cluster[i] << '\t' << labels[i] << '\n';
    return out.str();
}

} // namespace dse
