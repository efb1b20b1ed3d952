#include "dse/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dse/error.hpp"

namespace dse {

BatchPlan make_plan(std::size_t n_lp, std::size_t n_u, std::size_t n_n, int batch_size) {
    if (n_lp == 0) throw DataError("batch plan needs a non-empty positive pool");
    if (n_u == 0 && n_n == 0) throw DataError("batch plan needs unlabeled or negative examples");
    int present = 1 + (n_u > 0 ? 1 : 0) + (n_n > 0 ? 1 : 0);
    if (batch_size < present)
        throw ConfigError("batch_size " + std::to_string(batch_size) + " cannot hold " +
                          std::to_string(present) + " classes");

    double total = static_cast<double>(n_lp + n_u + n_n);
    auto share = [&](std::size_t pool) {
        return static_cast<int>(std::ceil(static_cast<double>(batch_size) *
                                          static_cast<double>(pool) / total));
    };

    BatchPlan plan;
    plan.batch_size = batch_size;
    plan.p = std::max(1, share(n_lp));
    if (n_u > 0 && n_n > 0) {
        // Both minority-prone classes get the rounded-up share; unlabeled
        // absorbs whatever is left.
        plan.n = std::max(1, share(n_n));
        plan.u = batch_size - plan.p - plan.n;
        if (plan.u < 1) throw ConfigError("batch_size too small for the class proportions");
    } else if (n_u > 0) {
        plan.u = batch_size - plan.p;
    } else {
        plan.n = batch_size - plan.p;
    }
    if (plan.p > static_cast<int>(n_lp) || plan.u > static_cast<int>(n_u) ||
        plan.n > static_cast<int>(n_n))
        throw DataError("a class pool is smaller than its per-batch count");
    plan.alpha = (static_cast<double>(plan.p) / static_cast<double>(batch_size)) /
                 (static_cast<double>(n_lp) / total);
    return plan;
}

void ProportionalStream::Cycle::take(std::size_t count, Rng& rng, std::vector<std::size_t>& out) {
    for (std::size_t i = 0; i < count; ++i) {
        if (pos == order.size()) {
            rng.shuffle(order);
            pos = 0;
        }
        out.push_back(order[pos++]);
    }
}

ProportionalStream::ProportionalStream(std::size_t n_lp, std::size_t n_u, std::size_t n_n,
                                       const BatchPlan& plan, std::uint64_t seed)
    : plan_(plan), n_lp_(n_lp), rng_(seed) {
    if (plan.p < 1) throw ConfigError("plan must include at least one positive per batch");
    u_cycle_.order.resize(n_u);
    std::iota(u_cycle_.order.begin(), u_cycle_.order.end(), 0);
    u_cycle_.pos = n_u; // forces a shuffle on first use
    n_cycle_.order.resize(n_n);
    std::iota(n_cycle_.order.begin(), n_cycle_.order.end(), 0);
    n_cycle_.pos = n_n;
}

std::vector<Batch> ProportionalStream::next_epoch() {
    std::vector<std::size_t> positives(n_lp_);
    std::iota(positives.begin(), positives.end(), 0);
    rng_.shuffle(positives);

    std::vector<Batch> batches;
    std::size_t consumed = 0;
    while (consumed < n_lp_) {
        std::size_t want_p = std::min<std::size_t>(plan_.p, n_lp_ - consumed);
        Batch b;
        b.p.assign(positives.begin() + static_cast<std::ptrdiff_t>(consumed),
                   positives.begin() + static_cast<std::ptrdiff_t>(consumed + want_p));
        consumed += want_p;
        // A short final batch keeps the planned class ratio, scaled down.
        double scale = static_cast<double>(want_p) / static_cast<double>(plan_.p);
        std::size_t want_u =
            plan_.u > 0 ? static_cast<std::size_t>(std::ceil(scale * plan_.u)) : 0;
        std::size_t want_n =
            plan_.n > 0 ? static_cast<std::size_t>(std::ceil(scale * plan_.n)) : 0;
        u_cycle_.take(want_u, rng_, b.u);
        n_cycle_.take(want_n, rng_, b.n);
        batches.push_back(std::move(b));
    }
    return batches;
}

std::vector<Batch> epoch_batches(std::size_t n_lp, std::size_t n_u, std::size_t n_n,
                                 const BatchPlan& plan, std::uint64_t seed) {
    return ProportionalStream(n_lp, n_u, n_n, plan, seed).next_epoch();
}

UniformStream::UniformStream(std::size_t n_lp, std::size_t n_u, std::size_t n_n, int batch_size,
                             std::uint64_t seed)
    : n_lp_(n_lp), n_u_(n_u), n_n_(n_n), batch_size_(batch_size), rng_(seed) {
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (n_lp + n_u + n_n == 0) throw DataError("uniform batching needs a non-empty pool");
}

std::vector<Batch> UniformStream::next_epoch() {
    // Tagged pool: [0, n_lp) positives, [n_lp, n_lp+n_u) unlabeled, rest negative.
    std::vector<std::size_t> pool(n_lp_ + n_u_ + n_n_);
    std::iota(pool.begin(), pool.end(), 0);
    rng_.shuffle(pool);

    std::vector<Batch> batches;
    for (std::size_t start = 0; start < pool.size(); start += batch_size_) {
        std::size_t end = std::min(pool.size(), start + static_cast<std::size_t>(batch_size_));
        Batch b;
        for (std::size_t i = start; i < end; ++i) {
            std::size_t tag = pool[i];
            if (tag < n_lp_) {
                b.p.push_back(tag);
            } else if (tag < n_lp_ + n_u_) {
                b.u.push_back(tag - n_lp_);
            } else {
                b.n.push_back(tag - n_lp_ - n_u_);
            }
        }
        batches.push_back(std::move(b));
    }
    return batches;
}

std::vector<Batch> uniform_batches(std::size_t n_lp, std::size_t n_u, std::size_t n_n, int batch_size,
                                   std::uint64_t seed) {
    return UniformStream(n_lp, n_u, n_n, batch_size, seed).next_epoch();
}

} // namespace dse
