#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cdmara/model.hpp"

namespace cdmara::analytic {

/// Constants of the two-case split for the adaptive constant-power scheme.
/// With K transmitters the interference sum W is at least (K-1) g_th; case A
/// (K <= k_boundary) is the one where a desired gain sitting at g_th can
/// still be captured against that minimum interference.
struct CaseSplit {
    double k_boundary;  ///< 1 + (N/g_th)(g_th/eta - noise)
    double a;           ///< N (g_th/eta - noise)
    double beta;        ///< 1 + eta/N

    /// A - (K-1) g_th; non-negative exactly when K is in case A.
    double b(std::uint64_t k, double g_th) const { return a - static_cast<double>(k - 1) * g_th; }
    bool case_a(std::uint64_t k) const { return static_cast<double>(k) <= k_boundary; }
};

CaseSplit case_split(const SystemParams& params);

/// 1 - (1 - 1/n_seq)^{k-1}; 0 for an unlimited pool.
double collision_prob(const SequenceCount& n_seq, std::uint64_t k);

double ps_conv(std::uint64_t k, const SystemParams& params);
double ps_const(std::uint64_t k, const SystemParams& params);
double ps_inv(std::uint64_t k, const SystemParams& params);

/// Success probability of one of k collision-free transmitters under `scheme`.
double ps(Scheme scheme, std::uint64_t k, const SystemParams& params);

/// Largest k with ps_inv(k) = 1, or 0 when none. Depends on the selected
/// InversionBoundary.
std::uint64_t inversion_k_max(const SystemParams& params);

/// Upper summation index for the throughput sum: min(M, ceil(lambda + 12 sqrt(lambda) + 30)).
std::uint64_t throughput_k_limit(double lambda, const SystemParams& params);

/// p_s(k) for k = 1..k_max, cached so throughput can be evaluated at many
/// arrival rates without recomputing the per-k success probabilities.
class SuccessCurve {
public:
    SuccessCurve(const SystemParams& params, Scheme scheme);

    /// p_s(k) for k >= 1; extends the cache as needed.
    double at(std::uint64_t k);
    /// p_s(1..k_max) as a contiguous view (index 0 holds k = 1).
    std::span<const double> upto(std::uint64_t k_max);

    const SystemParams& params() const { return params_; }
    Scheme scheme() const { return scheme_; }

private:
    SystemParams params_;
    Scheme scheme_;
    std::vector<double> values_;
};

/// Generic throughput sum_{k=1}^{limit} k p_s(k) (1 - p_coll(k)) f_K(k | lambda).
double throughput_sum(double lambda, const SystemParams& params, Scheme scheme);
double throughput_sum(double lambda, SuccessCurve& curve);

/// Closed form for conventional access, valid with the Poisson tail
/// extended to infinity.
double throughput_conv_closed(double lambda, const SystemParams& params);

/// lambda e^{-lambda} sum_{k=1}^{k_max} (lambda (1 - 1/n_seq))^{k-1} / (k-1)!
double throughput_inv_closed(double lambda, const SystemParams& params);

/// Poisson mass above the throughput truncation index.
double truncation_tail_bound(double lambda, const SystemParams& params);

}  // namespace cdmara::analytic
