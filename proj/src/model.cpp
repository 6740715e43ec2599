#include "cdmara/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cdmara/numerics.hpp"

namespace cdmara {

std::string_view scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Conventional: return "conv";
        case Scheme::AdaptiveConstant: return "const";
        case Scheme::AdaptiveInversion: return "inv";
    }
    return "?";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
    if (name == "conv" || name == "conventional") return Scheme::Conventional;
    if (name == "const" || name == "constant") return Scheme::AdaptiveConstant;
    if (name == "inv" || name == "inversion") return Scheme::AdaptiveInversion;
    return std::nullopt;
}

std::string_view power_norm_name(PowerNorm p) {
    return p == PowerNorm::Received ? "received" : "average-tx";
}

std::optional<PowerNorm> parse_power_norm(std::string_view name) {
    if (name == "received") return PowerNorm::Received;
    if (name == "average-tx") return PowerNorm::AverageTx;
    return std::nullopt;
}

std::string_view inversion_boundary_name(InversionBoundary b) {
    return b == InversionBoundary::SumLimit ? "sum-limit" : "strict-floor";
}

std::optional<InversionBoundary> parse_inversion_boundary(std::string_view name) {
    if (name == "sum-limit") return InversionBoundary::SumLimit;
    if (name == "strict-floor") return InversionBoundary::StrictFloor;
    return std::nullopt;
}

double SystemParams::g_th() const { return gth_from_outage(outage); }

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
    std::ostringstream os;
    os << "invalid parameters:";
    for (const auto& p : problems) os << "\n  " << p;
    return os.str();
}

}  // namespace

ParamError::ParamError(std::vector<std::string> problems)
    : std::invalid_argument(join_problems(problems)), problems_(std::move(problems)) {}

SystemParams validate(const SystemParams& p) {
    std::vector<std::string> problems;
    auto num = [](double x) {
        std::ostringstream os;
        os << x;
        return os.str();
    };
    if (p.stations < 1) problems.push_back("stations (M) must be >= 1");
    if (!(p.processing_gain >= 1.0) || !std::isfinite(p.processing_gain))
        problems.push_back("processing gain (N) must be finite and >= 1, got " + num(p.processing_gain));
    if (p.n_seq && *p.n_seq < 1) problems.push_back("n_seq must be >= 1 or infinite, got 0");
    if (!(p.eta_th > 0.0) || !std::isfinite(p.eta_th))
        problems.push_back("eta_th must be positive and finite, got " + num(p.eta_th));
    if (!(p.snr > 0.0) || std::isnan(p.snr)) problems.push_back("snr must be positive, got " + num(p.snr));
    if (!(p.outage >= 0.0 && p.outage < 1.0))
        problems.push_back("outage must lie in [0, 1), got " + num(p.outage));
    if (!problems.empty()) throw ParamError(std::move(problems));
    return p;
}

double gth_from_outage(double outage) {
    if (!(outage >= 0.0 && outage < 1.0))
        throw DomainError("outage must lie in [0, 1), got " + std::to_string(outage));
    return -std::log1p(-outage);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

double mean_inverse_truncated_gain(double g_th) {
    if (!(g_th > 0.0)) return std::numeric_limits<double>::infinity();
    // E1(g_th) from the exponential tail, plus the atom (1 - e^{-g_th}) / g_th.
    // std::expint is Ei, and E1(x) = -Ei(-x).
    const double e1 = -std::expint(-g_th);
    return e1 + (-std::expm1(-g_th)) / g_th;
}

double noise_term(const SystemParams& params, Scheme scheme) {
    if (std::isinf(params.snr)) return 0.0;
    if (scheme == Scheme::AdaptiveInversion && params.power_norm == PowerNorm::AverageTx)
        return mean_inverse_truncated_gain(params.g_th()) / params.snr;
    return 1.0 / params.snr;
}

}  // namespace cdmara
