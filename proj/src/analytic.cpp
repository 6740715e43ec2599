#include "cdmara/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cdmara/numerics.hpp"

namespace cdmara::analytic {

namespace {

void require_k(std::uint64_t k) {
    if (k == 0) throw DomainError("number of transmitters k must be >= 1");
}

double log_binomial(std::uint64_t n, std::uint64_t r) {
    return numerics::log_factorial(n) - numerics::log_factorial(r) - numerics::log_factorial(n - r);
}

double checked(double value, const char* what) {
    if (!std::isfinite(value)) throw std::runtime_error(std::string(what) + ": non-finite result");
    return std::clamp(value, 0.0, 1.0);
}

}  // namespace

CaseSplit case_split(const SystemParams& params) {
    const double n = params.processing_gain;
    const double eta = params.eta_th;
    const double g_th = params.g_th();
    const double noise = noise_term(params, Scheme::AdaptiveConstant);
    const double a = n * (g_th / eta - noise);
    const double k_boundary = g_th > 0.0 ? 1.0 + a / g_th : -std::numeric_limits<double>::infinity();
    return {k_boundary, a, 1.0 + eta / n};
}

double collision_prob(const SequenceCount& n_seq, std::uint64_t k) {
    require_k(k);
    if (!n_seq || k == 1) return 0.0;
    if (*n_seq == 0) throw DomainError("n_seq must be >= 1");
    if (*n_seq == 1) return 1.0;
    const double per_other = std::log1p(-1.0 / static_cast<double>(*n_seq));
    return -std::expm1(static_cast<double>(k - 1) * per_other);
}

double ps_conv(std::uint64_t k, const SystemParams& params) {
    require_k(k);
    const double eta = params.eta_th;
    const double noise = noise_term(params, Scheme::Conventional);
    const double log_p = -eta * noise - static_cast<double>(k - 1) * std::log1p(eta / params.processing_gain);
    return checked(std::exp(log_p), "ps_conv");
}

double ps_const(std::uint64_t k, const SystemParams& params) {
    require_k(k);
    const double g_th = params.g_th();
    // With no threshold nobody defers and the scheme is conventional access.
    if (g_th == 0.0) return ps_conv(k, params);

    const double n = params.processing_gain;
    const double eta = params.eta_th;
    const double noise = noise_term(params, Scheme::AdaptiveConstant);
    const double others = static_cast<double>(k - 1);
    const CaseSplit split = case_split(params);
    // Probability that the desired gain clears eta (noise + W/N) when every
    // interferer sits at the threshold floor, W = (K-1) g_th.
    const double log_floor_capture = -eta * (others * g_th / n + noise);

    if (!split.case_a(k)) {
        const double log_p = log_floor_capture + others * std::log1p(-std::exp(-g_th) * eta / (n + eta));
        return checked(std::exp(log_p), "ps_const");
    }

    // Case A: condition on V, the number of interferers strictly above the
    // threshold. V = 0 leaves W at its floor, which any admitted desired
    // gain beats; V = v >= 1 makes W - (K-1) g_th Erlang(v).
    const double deferred = -std::expm1(-g_th);
    const double log_deferred = std::log(deferred);
    double p = std::exp(others * log_deferred);
    if (k == 1) return checked(p, "ps_const");

    const auto v_max = static_cast<unsigned>(k - 1);
    const double b = split.b(k, g_th);
    const numerics::ErlangTable below(v_max, b);
    const numerics::ErlangTable above(v_max, b * split.beta);
    const double floor_capture = std::exp(log_floor_capture);
    const double log_beta = std::log(split.beta);
    for (unsigned v = 1; v <= v_max; ++v) {
        const double dv = v;
        const double log_weight = log_binomial(k - 1, v) - dv * g_th + (others - dv) * log_deferred;
        const double inner = below.lower(v) + floor_capture * std::exp(-dv * log_beta) * above.upper(v);
        p += std::exp(log_weight) * inner;
    }
    return checked(p, "ps_const");
}

std::uint64_t inversion_k_max(const SystemParams& params) {
    const double noise = noise_term(params, Scheme::AdaptiveInversion);
    double x = 1.0 + params.processing_gain * (1.0 / params.eta_th - noise);
    if (!(x > 1.0)) return 0;
    x = std::min(x, 1e18);
    // Largest k with SINR = 1/(noise + (k-1)/N) > eta, i.e. k < x.
    const auto below = static_cast<std::uint64_t>(std::ceil(x)) - 1;
    if (params.inversion_boundary == InversionBoundary::SumLimit) return below;
    return static_cast<std::uint64_t>(std::floor(x)) - 1;
}

double ps_inv(std::uint64_t k, const SystemParams& params) {
    require_k(k);
    return k <= inversion_k_max(params) ? 1.0 : 0.0;
}

double ps(Scheme scheme, std::uint64_t k, const SystemParams& params) {
    switch (scheme) {
        case Scheme::Conventional: return ps_conv(k, params);
        case Scheme::AdaptiveConstant: return ps_const(k, params);
        case Scheme::AdaptiveInversion: return ps_inv(k, params);
    }
    return 0.0;
}

std::uint64_t throughput_k_limit(double lambda, const SystemParams& params) {
    return std::min(params.stations, numerics::poisson_truncation(lambda));
}

SuccessCurve::SuccessCurve(const SystemParams& params, Scheme scheme) : params_(params), scheme_(scheme) {}

double SuccessCurve::at(std::uint64_t k) {
    require_k(k);
    return upto(k)[k - 1];
}

std::span<const double> SuccessCurve::upto(std::uint64_t k_max) {
    if (values_.size() < k_max) {
        values_.reserve(k_max);
        for (std::uint64_t k = values_.size() + 1; k <= k_max; ++k) values_.push_back(ps(scheme_, k, params_));
    }
    return {values_.data(), static_cast<std::size_t>(k_max)};
}

double throughput_sum(double lambda, SuccessCurve& curve) {
    if (!(lambda > 0.0)) throw DomainError("throughput: lambda must be positive");
    const SystemParams& params = curve.params();
    const std::uint64_t limit = throughput_k_limit(lambda, params);
    const auto success = curve.upto(limit);
    const double log_lambda = std::log(lambda);
    double total = 0.0;
    for (std::uint64_t k = 1; k <= limit; ++k) {
        const double p = success[k - 1];
        if (p == 0.0) continue;
        const double no_collision = 1.0 - collision_prob(params.n_seq, k);
        const double pmf = std::exp(static_cast<double>(k) * log_lambda - lambda - numerics::log_factorial(k));
        total += static_cast<double>(k) * p * no_collision * pmf;
    }
    return total;
}

double throughput_sum(double lambda, const SystemParams& params, Scheme scheme) {
    SuccessCurve curve(params, scheme);
    return throughput_sum(lambda, curve);
}

double throughput_conv_closed(double lambda, const SystemParams& params) {
    if (!(lambda > 0.0)) throw DomainError("throughput: lambda must be positive");
    const double n = params.processing_gain;
    const double eta = params.eta_th;
    const double noise = noise_term(params, Scheme::Conventional);
    const double collision_exp =
        params.n_seq ? n * lambda / ((eta + n) * static_cast<double>(*params.n_seq)) : 0.0;
    return lambda * std::exp(-eta * (lambda / (eta + n) + noise)) * std::exp(-collision_exp);
}

double throughput_inv_closed(double lambda, const SystemParams& params) {
    if (!(lambda > 0.0)) throw DomainError("throughput: lambda must be positive");
    const std::uint64_t k_max = inversion_k_max(params);
    if (k_max == 0) return 0.0;
    const double keep = params.n_seq ? 1.0 - 1.0 / static_cast<double>(*params.n_seq) : 1.0;
    const double base = lambda * keep;
    // C = sum_{j=0}^{k_max-1} base^j / j!
    double c = 1.0;
    if (base > 0.0) {
        const double log_base = std::log(base);
        for (std::uint64_t j = 1; j < k_max; ++j)
            c += std::exp(static_cast<double>(j) * log_base - numerics::log_factorial(j));
    }
    return c * lambda * std::exp(-lambda);
}

double truncation_tail_bound(double lambda, const SystemParams& params) {
    const std::uint64_t limit = throughput_k_limit(lambda, params);
    double tail = 0.0;
    for (std::uint64_t k = limit + 1;; ++k) {
        const double p = numerics::poisson_pmf(k, lambda);
        tail += p;
        if (p < 1e-300 || p < tail * 1e-17) break;
    }
    return tail;
}

}  // namespace cdmara::analytic
