#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace cdmara {

/// Raised when a numeric routine is handed an argument outside its domain.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace numerics {

/// ln(n!) with relative error below 1e-12.
double log_factorial(std::uint64_t n);

/// lambda^k e^{-lambda} / k!, evaluated in log space.
double poisson_pmf(std::uint64_t k, double lambda);

/// Sum of poisson_pmf(j, lambda) for j = 0..k.
double poisson_cdf(std::uint64_t k, double lambda);

/// Index past which the Poisson tail mass is below 1e-12 for lambda <= 1e4:
/// ceil(lambda + 12 sqrt(lambda) + 30).
std::uint64_t poisson_truncation(double lambda);

/// Regularized lower incomplete gamma P(v, x) for integer order v >= 1,
/// i.e. the Erlang(v, 1) CDF: 1 - e^{-x} sum_{m<v} x^m/m!.
double erlang_gamma_lower(unsigned v, double x);

/// Regularized upper incomplete gamma Q(v, x) = e^{-x} sum_{m<v} x^m/m!.
/// lower + upper == 1 up to a single rounding.
double erlang_gamma_upper(unsigned v, double x);

/// Regularized lower and upper incomplete gammas for every order 1..max_order
/// at a fixed argument, in O(max_order). Both sides are accumulated from
/// positive Poisson terms (upper forward, lower backward from a convergent
/// tail), so neither loses accuracy to cancellation.
class ErlangTable {
public:
    ErlangTable(unsigned max_order, double x);

    double lower(unsigned v) const { return lower_.at(v - 1); }
    double upper(unsigned v) const { return upper_.at(v - 1); }
    unsigned max_order() const { return static_cast<unsigned>(lower_.size()); }

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

struct Maximum {
    double argmax;
    double value;
};

/// Grid scan of at least `grid_points` samples to bracket the global
/// maximum, then golden-section refinement until the bracket is narrower
/// than `tol`. Throws DomainError on a non-finite evaluation.
Maximum maximize_1d(const std::function<double(double)>& f, double lo, double hi, double tol,
                    unsigned grid_points = 256);

/// Mixes a base seed with an index into a well-separated 64-bit seed
/// (used to give every sweep row its own seed).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Counter-based substream of a 64-bit seed.
///
/// The state is expanded from (seed, stream_index) with SplitMix64 and
/// advanced with xoshiro256**; both are fully specified integer recurrences,
/// so a given pair yields the same draws on every platform. Only the
/// floating-point transforms (log in `exponential`) depend on libm.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_index);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_index() const { return stream_index_; }

    std::uint64_t next_u64();
    std::uint64_t operator()() { return next_u64(); }
    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform integer on [0, n), unbiased (Lemire's multiply-shift with rejection).
    std::uint64_t uniform_index(std::uint64_t n);
    /// Unit-mean exponential.
    double exponential();
    /// Poisson(lambda) by sequential inversion, split into chunks of mean <= 30
    /// so e^{-lambda} never underflows.
    std::uint64_t poisson(double lambda);

private:
    std::uint64_t seed_;
    std::uint64_t stream_index_;
    std::uint64_t s_[4];
};

}  // namespace numerics
}  // namespace cdmara
