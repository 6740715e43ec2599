#include "cdmara/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <thread>

namespace cdmara::sim {

namespace {

struct Moments {
    std::uint64_t count = 0;
    std::uint64_t sum = 0;
    std::uint64_t sum_sq = 0;

    void add(std::uint64_t x) {
        ++count;
        sum += x;
        sum_sq += x * x;
    }
};

// Runs `body(rng, n)` for every batch, each on its own stream, and merges
// the integer moments. Integer sums make the merge order irrelevant.
SimEstimate run_batches(std::uint64_t total, std::uint64_t seed, unsigned threads,
                        const std::function<Moments(numerics::RngStream&, std::uint64_t)>& body) {
    if (total == 0) throw DomainError("simulation needs at least one slot");
    const std::uint64_t batches = (total + kBatchSize - 1) / kBatchSize;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, batches));

    std::vector<Moments> per_batch(batches);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (std::uint64_t b = next++; b < batches; b = next++) {
            numerics::RngStream rng(seed, b);
            const std::uint64_t n = std::min(kBatchSize, total - b * kBatchSize);
            per_batch[b] = body(rng, n);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    Moments m;
    for (const auto& b : per_batch) {
        m.count += b.count;
        m.sum += b.sum;
        m.sum_sq += b.sum_sq;
    }
    SimEstimate est;
    est.slots = m.count;
    est.seed = seed;
    const double n = static_cast<double>(m.count);
    est.mean = static_cast<double>(m.sum) / n;
    if (m.count < 2) {
        est.degenerate = true;
        return est;
    }
    const double s = static_cast<double>(m.sum);
    const double var = std::max(0.0, (static_cast<double>(m.sum_sq) - s * s / n) / (n - 1.0));
    est.std_error = std::sqrt(var / n);
    est.degenerate = var == 0.0;
    return est;
}

}  // namespace

double sample_gain(numerics::RngStream& rng, Scheme scheme, double g_th) {
    const double g = rng.exponential();
    return scheme == Scheme::Conventional ? g : std::max(g, g_th);
}

SlotOutcome simulate_slot_with_k(numerics::RngStream& rng, const SystemParams& params, Scheme scheme,
                                 std::uint64_t k, SlotScratch& scratch) {
    SlotOutcome out;
    out.k = k;
    if (k == 0) return out;

    const double g_th = scheme == Scheme::Conventional ? 0.0 : params.g_th();
    const double noise = noise_term(params, scheme);
    const double n = params.processing_gain;

    auto& seq = scratch.sequence;
    seq.resize(k);
    for (auto& s : seq) s = params.n_seq ? rng.uniform_index(*params.n_seq) : 0;

    // Received power relative to the scheme's reference level. Channel
    // inversion still draws the gain so stream consumption matches.
    auto& rx = scratch.received;
    rx.resize(k);
    double total = 0.0;
    for (auto& r : rx) {
        const double g = sample_gain(rng, scheme, g_th);
        r = scheme == Scheme::AdaptiveInversion ? 1.0 : g;
        total += r;
    }

    // Mark stations whose sequence is shared.
    auto& order = scratch.order;
    order.resize(k);
    std::iota(order.begin(), order.end(), std::uint64_t{0});
    auto& shared = scratch.shared;
    shared.assign(k, 0);
    if (params.n_seq) {
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return seq[a] < seq[b]; });
        for (std::uint64_t i = 1; i < k; ++i) {
            if (seq[order[i]] == seq[order[i - 1]]) {
                shared[order[i]] = 1;
                shared[order[i - 1]] = 1;
            }
        }
    }

    for (std::uint64_t i = 0; i < k; ++i) {
        if (shared[i]) {
            ++out.collided;
            continue;
        }
        const double interference = scheme == Scheme::AdaptiveInversion ? static_cast<double>(k - 1)
                                                                        : total - rx[i];
        const double sinr = rx[i] / (noise + interference / n);
        if (sinr > params.eta_th)
            ++out.successes;
        else
            ++out.capture_failed;
    }
    return out;
}

SlotOutcome simulate_slot(numerics::RngStream& rng, const SystemParams& params, Scheme scheme, double lambda,
                          SlotScratch& scratch) {
    std::uint64_t k = rng.poisson(lambda);
    while (k > params.stations) k = rng.poisson(lambda);
    return simulate_slot_with_k(rng, params, scheme, k, scratch);
}

SlotOutcome simulate_slot(numerics::RngStream& rng, const SystemParams& params, Scheme scheme, double lambda) {
    SlotScratch scratch;
    return simulate_slot(rng, params, scheme, lambda, scratch);
}

bool capture_station0(numerics::RngStream& rng, const SystemParams& params, Scheme scheme, std::uint64_t k) {
    if (k == 0) throw DomainError("capture_station0: k must be >= 1");
    const double g_th = scheme == Scheme::Conventional ? 0.0 : params.g_th();
    const double noise = noise_term(params, scheme);
    const double desired_gain = sample_gain(rng, scheme, g_th);
    double interference = 0.0;
    for (std::uint64_t j = 1; j < k; ++j) {
        const double g = sample_gain(rng, scheme, g_th);
        interference += scheme == Scheme::AdaptiveInversion ? 1.0 : g;
    }
    const double desired = scheme == Scheme::AdaptiveInversion ? 1.0 : desired_gain;
    return desired / (noise + interference / params.processing_gain) > params.eta_th;
}

SimEstimate estimate_throughput(const SystemParams& params, Scheme scheme, double lambda, std::uint64_t slots,
                                std::uint64_t seed, unsigned threads) {
    if (!(lambda > 0.0)) throw DomainError("estimate_throughput: lambda must be positive");
    return run_batches(slots, seed, threads, [&](numerics::RngStream& rng, std::uint64_t n) {
        Moments m;
        SlotScratch scratch;
        for (std::uint64_t i = 0; i < n; ++i) m.add(simulate_slot(rng, params, scheme, lambda, scratch).successes);
        return m;
    });
}

SimEstimate estimate_ps_given_k(const SystemParams& params, Scheme scheme, std::uint64_t k,
                                std::uint64_t trials, std::uint64_t seed, unsigned threads) {
    if (k == 0) throw DomainError("estimate_ps_given_k: k must be >= 1");
    return run_batches(trials, seed, threads, [&](numerics::RngStream& rng, std::uint64_t n) {
        Moments m;
        for (std::uint64_t i = 0; i < n; ++i) m.add(capture_station0(rng, params, scheme, k) ? 1 : 0);
        return m;
    });
}

}  // namespace cdmara::sim
