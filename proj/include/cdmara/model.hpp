#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cdmara {

/// Random access scheme: decides how transmit power follows the channel
/// gain and whether stations wait for the gain to clear a threshold.
enum class Scheme {
    Conventional,       ///< constant power, transmit immediately
    AdaptiveConstant,   ///< defer until g >= g_th, constant power
    AdaptiveInversion,  ///< defer until g >= g_th, power ~ 1/g (constant received power)
};

inline constexpr Scheme kAllSchemes[] = {Scheme::Conventional, Scheme::AdaptiveConstant,
                                         Scheme::AdaptiveInversion};

/// Short names used on the command line and in output files: conv, const, inv.
std::string_view scheme_name(Scheme s);
std::optional<Scheme> parse_scheme(std::string_view name);

/// How the SNR figure is tied to the channel-inversion transmit power.
enum class PowerNorm {
    Received,   ///< P_I T_p / N_0 = snr (received power fixed)
    AverageTx,  ///< E[P_I / g | transmit] T_p / N_0 = snr (average transmit power fixed)
};

std::string_view power_norm_name(PowerNorm p);
std::optional<PowerNorm> parse_power_norm(std::string_view name);

/// Success rule for the channel-inversion scheme, where the SINR is the
/// deterministic 1 / (noise + (K-1)/N).
enum class InversionBoundary {
    /// K < 1 + N(1/eta - noise), exactly the K for which SINR > eta. Equals
    /// the closed-form summation limit floor(.) unless the bound is an integer.
    SumLimit,
    /// K < floor(1 + N(1/eta - noise)): the strict piecewise rule.
    StrictFloor,
};

std::string_view inversion_boundary_name(InversionBoundary b);
std::optional<InversionBoundary> parse_inversion_boundary(std::string_view name);

/// Sequence pool size; nullopt means unlimited (no sequence collisions).
using SequenceCount = std::optional<std::uint64_t>;

/// Physical and protocol constants. Ratios are linear, never dB.
struct SystemParams {
    std::uint64_t stations = 8192;  ///< M, only used as the Poisson cap
    double processing_gain = 64.0;  ///< N
    SequenceCount n_seq = 128;      ///< N_seq
    double eta_th = 3.1622776601683795;  ///< minimum SINR, 5 dB
    double snr = 1000.0;                 ///< P T_p / N_0, 30 dB
    double outage = 0.7;                 ///< P_o = Pr{g < g_th}
    PowerNorm power_norm = PowerNorm::Received;
    InversionBoundary inversion_boundary = InversionBoundary::SumLimit;

    /// Transmission threshold, -ln(1 - outage).
    double g_th() const;

    bool operator==(const SystemParams&) const = default;
};

/// Thrown by validate(); carries one message per violated constraint.
class ParamError : public std::invalid_argument {
public:
    explicit ParamError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Checks every constraint and throws ParamError listing all violations.
/// Returns the params unchanged when valid, so validate is idempotent.
SystemParams validate(const SystemParams& params);

double gth_from_outage(double outage);
double db_to_linear(double db);
double linear_to_db(double linear);

/// E[1/g | g >= g_th] under the truncated-gain law: the exponential tail
/// above g_th plus the deferred mass 1 - e^{-g_th} sitting at g_th.
/// Infinite for g_th = 0.
double mean_inverse_truncated_gain(double g_th);

/// N_0 / (P T_p) as seen by `scheme`. For the received-power normalization
/// this is 1/snr for every scheme; the average-transmit normalization
/// rescales only the channel-inversion scheme.
double noise_term(const SystemParams& params, Scheme scheme);

/// A throughput sample: analytic (stderr 0) or simulated.
struct ThroughputPoint {
    enum class Source { Analytic, Simulated };
    double lambda = 0.0;
    double value = 0.0;
    Source source = Source::Analytic;
    double std_error = 0.0;
};

}  // namespace cdmara
