#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dse/corpus.hpp"
#include "dse/model.hpp"

namespace dse {

/// Sparse feature vector: (feature id, weight) pairs sorted by id.
using SparseVec = std::vector<std::pair<int, double>>;

/// L2-normalized tf-idf vectors over the vocabulary's real tokens (pad and
/// unk are excluded). idf = ln((1 + N) / (1 + df)) + 1. A document with no
/// in-vocabulary token cannot be normalized and raises a DataError.
std::vector<SparseVec> embed_tfidf(const std::vector<const Document*>& docs,
                                   const Vocabulary& vocab);

/// Pairwise constraints over point indices.
struct ConstraintSet {
    std::vector<std::pair<std::size_t, std::size_t>> must_link;
    std::vector<std::pair<std::size_t, std::size_t>> cannot_link;
};

struct ClusterAssignment {
    std::vector<int> cluster;                   // per point, in [0, k)
    std::vector<std::vector<double>> centroids; // k dense vectors
    double objective = 0.0;                     // sum of squared point-centroid distances
    std::vector<double> objective_trace;        // one entry per iteration, non-increasing
    int iterations = 0;
};

/// K-means under must-link/cannot-link constraints. Must-link groups are
/// collapsed to weighted pseudo-points (their mean, weighted by size), which
/// is exact for the k-means objective; cannot-link is enforced by rejecting
/// violating centroids during assignment, nearest-first. Seeding is
/// k-means++. Iterations that would increase the objective are reverted, so
/// the trace is non-increasing. Infeasible constraints or a point with no
/// permitted cluster raise DataError.
ClusterAssignment cop_kmeans(const std::vector<SparseVec>& points, const ConstraintSet& constraints,
                             int k, std::uint64_t seed, int max_iters = 100, int dim = -1);

/// Same algorithm with caller-provided initial centroids; used to study
/// initialization sensitivity exhaustively on tiny instances.
ClusterAssignment cop_kmeans_from_centroids(const std::vector<SparseVec>& points,
                                            const ConstraintSet& constraints,
                                            std::vector<std::vector<double>> centroids,
                                            int max_iters = 100, int dim = -1);

/// The cluster holding the labeled positives becomes the positive class.
/// Returns +1/-1 per point. The labeled points must share one cluster.
std::vector<int> pu_from_clusters(const ClusterAssignment& assignment,
                                  const std::vector<std::size_t>& lp_indices);

/// "id<TAB>cluster<TAB>label" lines, label +1/-1.
std::string cluster_tsv(const std::vector<std::string>& ids, const ClusterAssignment& assignment,
                        const std::vector<int>& labels);

} // namespace dse
