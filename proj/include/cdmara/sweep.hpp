#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdmara/model.hpp"

namespace cdmara::sweep {

struct MaxThroughput {
    double lambda_star = 0.0;
    double s_star = 0.0;
    /// False when the maximum still sat on the upper edge of the search
    /// range after one widening.
    bool bracketed = true;
};

/// max over lambda of the analytic throughput. Searches [0.01, 4 (N/eta + 10)],
/// widening the range once if the maximum lands on its upper edge.
MaxThroughput max_throughput(const SystemParams& params, Scheme scheme);

/// Collision-free maximum: max_throughput with an unlimited sequence pool.
MaxThroughput limit_throughput(const SystemParams& params, Scheme scheme);

struct SequenceFraction {
    std::uint64_t n_seq = 0;            ///< smallest probed power of two reaching the target
    std::optional<std::uint64_t> below; ///< previous power of two (misses the target)
    double crossing = 0.0;              ///< log2-linear interpolation of where the target is met
    bool reached = true;                ///< false if even 2^14 misses the target
    double limit = 0.0;                 ///< collision-free maximum
};

inline constexpr unsigned kMinSeqExponent = 1;
inline constexpr unsigned kMaxSeqExponent = 14;

/// Smallest n_seq in {2^1, ..., 2^14} whose maximum throughput reaches
/// `fraction` of the collision-free maximum.
SequenceFraction sequences_for_fraction(const SystemParams& params, Scheme scheme, double fraction);

/// Arrival rate in [lo, hi] where the analytic throughputs of `a` and `b`
/// cross, by bisection. nullopt if the difference does not change sign.
std::optional<double> crossover_lambda(const SystemParams& params, Scheme a, Scheme b, double lo, double hi);

enum class Axis { Lambda, Outage, NSeq, EtaDb };
enum class Mode { Analytic, Simulated, Both };

std::string_view axis_name(Axis a);
std::optional<Axis> parse_axis(std::string_view name);
std::string_view mode_name(Mode m);
std::optional<Mode> parse_mode(std::string_view name);

/// A one-dimensional parameter sweep. For the n_seq axis, +infinity stands
/// for an unlimited pool.
struct SweepSpec {
    std::vector<Scheme> schemes{std::begin(kAllSchemes), std::end(kAllSchemes)};
    Axis axis = Axis::Lambda;
    std::vector<double> values;
    SystemParams params;
    Mode mode = Mode::Analytic;
    std::uint64_t slots = 100000;
    std::uint64_t seed = 42;
    unsigned threads = 1;
};

/// Throws ParamError if the spec is unusable (empty scheme set, axis
/// values not strictly increasing, invalid fixed params).
void validate_spec(const SweepSpec& spec);

struct SweepRow {
    Scheme scheme = Scheme::Conventional;
    double axis_value = 0.0;
    SystemParams params;       ///< fully resolved parameters of this row
    double lambda = 0.0;       ///< evaluation point (lambda* on maximizing axes)
    bool maximized = false;
    std::optional<double> analytic;
    std::optional<double> simulated;
    double std_error = 0.0;
    std::optional<double> z;   ///< (simulated - analytic) / std_error, Both mode only
    std::uint64_t slots = 0;
    std::uint64_t seed = 0;
    bool degenerate = false;   ///< simulated sample too small or without variation
    std::string error;         ///< non-empty when this row failed
};

struct SweepResult {
    SweepSpec spec;
    std::vector<SweepRow> rows;
    /// Largest neglected Poisson tail mass over all analytic evaluations.
    double max_tail_bound = 0.0;
};

/// z-score with the degenerate case handled: a zero standard error gives
/// 0 on exact agreement and +infinity otherwise.
double z_score(double simulated, double analytic, double std_error);

/// Rows in axis order, schemes in the order given within each axis value.
/// Row i of the result simulates with seed derive_seed(spec.seed, i).
/// A failing row records its error and the sweep continues.
SweepResult run_sweep(const SweepSpec& spec);

}  // namespace cdmara::sweep
