#pragma once

#include <cstdint>
#include <vector>

#include "cdmara/model.hpp"
#include "cdmara/numerics.hpp"

namespace cdmara::sim {

/// Slots (or trials) per independently seeded batch. Part of the
/// reproducibility contract: batch b always draws from RngStream(seed, b).
inline constexpr std::uint64_t kBatchSize = 1024;

/// Tallies for one random access slot.
struct SlotOutcome {
    std::uint64_t k = 0;               ///< simultaneous transmitters
    std::uint64_t successes = 0;
    std::uint64_t collided = 0;        ///< shared a sequence with someone
    std::uint64_t capture_failed = 0;  ///< unique sequence but SINR <= eta

    bool operator==(const SlotOutcome&) const = default;
};

/// Sample mean of a per-slot count with its standard error.
struct SimEstimate {
    double mean = 0.0;
    double std_error = 0.0;  ///< sample std / sqrt(slots); 0 when slots < 2
    std::uint64_t slots = 0;
    std::uint64_t seed = 0;
    /// Set when slots < 2 and the standard error is undefined.
    bool degenerate = false;  ///< fewer than two samples, or no variation among them
};

/// Equivalent small-scale gain of a transmitting station. Unit-mean
/// exponential; adaptive stations wait out gains below g_th and so
/// transmit at max(g, g_th).
double sample_gain(numerics::RngStream& rng, Scheme scheme, double g_th);

/// Reusable per-worker buffers for simulate_slot.
struct SlotScratch {
    std::vector<double> received;
    std::vector<std::uint64_t> sequence;
    std::vector<std::uint64_t> order;
    std::vector<char> shared;
};

/// One slot with K ~ Poisson(lambda) (redrawn while K > M).
SlotOutcome simulate_slot(numerics::RngStream& rng, const SystemParams& params, Scheme scheme, double lambda);
SlotOutcome simulate_slot(numerics::RngStream& rng, const SystemParams& params, Scheme scheme, double lambda,
                          SlotScratch& scratch);

/// One slot with exactly k transmitters.
SlotOutcome simulate_slot_with_k(numerics::RngStream& rng, const SystemParams& params, Scheme scheme,
                                 std::uint64_t k, SlotScratch& scratch);

/// Whether station 0 of k collision-free transmitters is captured.
bool capture_station0(numerics::RngStream& rng, const SystemParams& params, Scheme scheme, std::uint64_t k);

/// Mean successes per slot over `slots` slots. The result does not depend
/// on `threads` (0 picks the hardware concurrency).
SimEstimate estimate_throughput(const SystemParams& params, Scheme scheme, double lambda, std::uint64_t slots,
                                std::uint64_t seed, unsigned threads = 1);

/// Capture rate of station 0 given exactly k transmitters on distinct
/// sequences: the Monte Carlo counterpart of p_s(k).
SimEstimate estimate_ps_given_k(const SystemParams& params, Scheme scheme, std::uint64_t k,
                                std::uint64_t trials, std::uint64_t seed, unsigned threads = 1);

}  // namespace cdmara::sim
