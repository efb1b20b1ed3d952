#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dse/rng.hpp"

namespace dse {

/// Fixed per-class composition for one batch. Minority classes get their
/// proportional share rounded up (never below one), the unlabeled class
/// absorbs the remainder, so every batch sees at least one positive.
struct BatchPlan {
    int batch_size = 0;
    int p = 0;
    int u = 0;
    int n = 0;
    /// Positive-frequency multiplier the plan induces relative to uniform
    /// sampling: (p / batch_size) / (n_lp / total).
    double alpha = 1.0;
};

BatchPlan make_plan(std::size_t n_lp, std::size_t n_u, std::size_t n_n, int batch_size);

/// Indices into the caller's per-class pools.
struct Batch {
    std::vector<std::size_t> p;
    std::vector<std::size_t> u;
    std::vector<std::size_t> n;

    std::size_t size() const { return p.size() + u.size() + n.size(); }
};

/// Emits proportional batches. An epoch is one pass over the positives;
/// unlabeled and negative examples are drawn from persistent shuffled cycles
/// that reshuffle on exhaustion and keep their position across epochs, so
/// the whole pool is consumed evenly over training rather than per epoch.
class ProportionalStream {
public:
    ProportionalStream(std::size_t n_lp, std::size_t n_u, std::size_t n_n, const BatchPlan& plan,
                       std::uint64_t seed);

    std::vector<Batch> next_epoch();
    const BatchPlan& plan() const { return plan_; }

private:
    struct Cycle {
        std::vector<std::size_t> order;
        std::size_t pos = 0;
        void take(std::size_t count, Rng& rng, std::vector<std::size_t>& out);
    };

    BatchPlan plan_;
    std::size_t n_lp_;
    Cycle u_cycle_;
    Cycle n_cycle_;
    Rng rng_;
};

/// One proportional epoch with a fresh stream; for multi-epoch training use
/// ProportionalStream so the cycles persist.
std::vector<Batch> epoch_batches(std::size_t n_lp, std::size_t n_u, std::size_t n_n,
                                 const BatchPlan& plan, std::uint64_t seed);

/// Plain batching over the pooled classes: shuffle everything together and
/// cut consecutive slices. Batches frequently contain no positives at all
/// when positives are scarce; that is the condition this mode exists to
/// reproduce.
class UniformStream {
public:
    UniformStream(std::size_t n_lp, std::size_t n_u, std::size_t n_n, int batch_size,
                  std::uint64_t seed);

    std::vector<Batch> next_epoch();

private:
    std::size_t n_lp_, n_u_, n_n_;
    int batch_size_;
    Rng rng_;
};

std::vector<Batch> uniform_batches(std::size_t n_lp, std::size_t n_u, std::size_t n_n, int batch_size,
                                   std::uint64_t seed);

} // namespace dse
