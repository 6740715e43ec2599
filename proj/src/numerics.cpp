#include "cdmara/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace cdmara::numerics {

namespace {

constexpr std::size_t kLogFactTableSize = 1024;

const std::array<double, kLogFactTableSize>& log_factorial_table() {
    static const auto table = [] {
        std::array<double, kLogFactTableSize> t{};
        // Products are exact in double up to 18!, beyond that accumulate logs.
        double prod = 1.0;
        t[0] = 0.0;
        for (std::size_t n = 1; n < t.size(); ++n) {
            if (n <= 18) {
                prod *= static_cast<double>(n);
                t[n] = std::log(prod);
            } else {
                t[n] = t[n - 1] + std::log(static_cast<double>(n));
            }
        }
        return t;
    }();
    return table;
}

void require_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw DomainError("poisson: lambda must be positive and finite, got " + std::to_string(lambda));
}

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

double log_factorial(std::uint64_t n) {
    if (n < kLogFactTableSize) return log_factorial_table()[n];
    // Stirling series; truncation error below 1e-20 for n >= 1024.
    const double x = static_cast<double>(n) + 1.0;
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * M_PI) +
           inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0)));
}

double poisson_pmf(std::uint64_t k, double lambda) {
    require_lambda(lambda);
    if (k == 0) return std::exp(-lambda);
    return std::exp(static_cast<double>(k) * std::log(lambda) - lambda - log_factorial(k));
}

double poisson_cdf(std::uint64_t k, double lambda) {
    require_lambda(lambda);
    double sum = 0.0;
    for (std::uint64_t j = 0; j <= k; ++j) {
        const double p = poisson_pmf(j, lambda);
        sum += p;
        // Past the mode, once terms stop registering the sum is final.
        if (static_cast<double>(j) > lambda && p < sum * 1e-18) break;
    }
    return std::min(sum, 1.0);
}

std::uint64_t poisson_truncation(double lambda) {
    require_lambda(lambda);
    return static_cast<std::uint64_t>(std::ceil(lambda + 12.0 * std::sqrt(lambda) + 30.0));
}

namespace {

// e^{-x} sum_{m=lo}^{hi-1} x^m/m!, terms formed in log space.
double poisson_terms(unsigned lo, unsigned hi, double x) {
    if (x == 0.0) return lo == 0 && hi > 0 ? 1.0 : 0.0;
    const double lx = std::log(x);
    double sum = 0.0;
    for (unsigned m = lo; m < hi; ++m)
        sum += std::exp(m * lx - x - log_factorial(m));
    return sum;
}

// e^{-x} sum_{m>=v} x^m/m! for x < v: the ratio of successive terms is
// x/(m+1) < 1, so the series converges geometrically.
double poisson_tail_from(unsigned v, double x) {
    if (x == 0.0) return 0.0;
    const double lead = std::exp(v * std::log(x) - x - log_factorial(v));
    double term = 1.0;
    double sum = 1.0;
    for (unsigned j = 1; j < 100000; ++j) {
        term *= x / (static_cast<double>(v) + j);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return lead * sum;
}

void require_order(unsigned v, double x) {
    if (v == 0) throw DomainError("erlang gamma: order must be >= 1");
    if (!(x >= 0.0)) throw DomainError("erlang gamma: argument must be >= 0, got " + std::to_string(x));
}

}  // namespace

// Whichever of lower/upper is the smaller one is summed directly and the
// other taken as its complement, so neither suffers cancellation.
double erlang_gamma_lower(unsigned v, double x) {
    require_order(v, x);
    if (std::isinf(x)) return 1.0;
    if (x < v) return poisson_tail_from(v, x);
    return 1.0 - poisson_terms(0, v, x);
}

double erlang_gamma_upper(unsigned v, double x) {
    require_order(v, x);
    if (std::isinf(x)) return 0.0;
    if (x < v) return 1.0 - poisson_tail_from(v, x);
    return poisson_terms(0, v, x);
}

ErlangTable::ErlangTable(unsigned max_order, double x) : lower_(max_order), upper_(max_order) {
    if (max_order == 0) return;
    require_order(max_order, x);
    if (x == 0.0) {
        std::fill(lower_.begin(), lower_.end(), 0.0);
        std::fill(upper_.begin(), upper_.end(), 1.0);
        return;
    }
    if (std::isinf(x)) {
        std::fill(lower_.begin(), lower_.end(), 1.0);
        std::fill(upper_.begin(), upper_.end(), 0.0);
        return;
    }
    const double lx = std::log(x);
    auto term = [&](unsigned m) { return std::exp(m * lx - x - log_factorial(m)); };

    double acc = 0.0;
    for (unsigned v = 1; v <= max_order; ++v) {
        acc += term(v - 1);
        upper_[v - 1] = std::min(acc, 1.0);
    }
    // Tail beyond the largest order: series when it converges fast,
    // otherwise the complement of the (then small) upper sum.
    double tail = max_order > x ? poisson_tail_from(max_order, x) : 1.0 - acc;
    lower_[max_order - 1] = tail;
    for (unsigned v = max_order - 1; v >= 1; --v) {
        tail += term(v);
        lower_[v - 1] = std::min(tail, 1.0);
    }
}

Maximum maximize_1d(const std::function<double(double)>& f, double lo, double hi, double tol,
                    unsigned grid_points) {
    if (!(lo < hi)) throw DomainError("maximize_1d: need lo < hi");
    if (!(tol > 0.0)) throw DomainError("maximize_1d: tol must be positive");
    grid_points = std::max(grid_points, 256u);

    auto eval = [&](double x) {
        const double y = f(x);
        if (!std::isfinite(y))
            throw DomainError("maximize_1d: non-finite objective at x = " + std::to_string(x));
        return y;
    };

    const double step = (hi - lo) / (grid_points - 1);
    Maximum best{lo, eval(lo)};
    unsigned best_i = 0;
    for (unsigned i = 1; i < grid_points; ++i) {
        const double x = (i + 1 == grid_points) ? hi : lo + i * step;
        const double y = eval(x);
        if (y > best.value) {
            best = {x, y};
            best_i = i;
        }
    }

    double a = best_i == 0 ? lo : lo + (best_i - 1) * step;
    double b = best_i + 1 >= grid_points ? hi : lo + (best_i + 1) * step;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = eval(c);
    double fd = eval(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
        }
    }
    if (fc > best.value) best = {c, fc};
    if (fd > best.value) best = {d, fd};
    return best;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t x = base;
    std::uint64_t a = splitmix64(x);
    std::uint64_t y = index ^ a;
    return splitmix64(y);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_index)
    : seed_(seed), stream_index_(stream_index) {
    // Mix the stream index through its own SplitMix64 step so neighbouring
    // (seed, index) pairs do not produce overlapping seeding sequences.
    std::uint64_t idx = stream_index;
    std::uint64_t x = seed ^ splitmix64(idx);
    for (auto& word : s_) word = splitmix64(x);
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
    if (n == 0) throw DomainError("uniform_index: empty range");
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(next_u64()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double RngStream::exponential() { return -std::log1p(-uniform()); }

std::uint64_t RngStream::poisson(double lambda) {
    require_lambda(lambda);
    constexpr double kChunk = 30.0;
    const auto chunks = static_cast<std::uint64_t>(std::ceil(lambda / kChunk));
    const double mu = lambda / static_cast<double>(chunks);
    const double p0 = std::exp(-mu);
    std::uint64_t total = 0;
    for (std::uint64_t c = 0; c < chunks; ++c) {
        double u = uniform();
        std::uint64_t k = 0;
        double p = p0;
        double cdf = p0;
        while (u >= cdf) {
            ++k;
            p *= mu / static_cast<double>(k);
            const double next = cdf + p;
            if (next == cdf) break;  // rounding floor of the CDF, u is in the last ulp
            cdf = next;
        }
        total += k;
    }
    return total;
}

}  // namespace cdmara::numerics
