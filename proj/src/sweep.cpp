#include "cdmara/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "cdmara/analytic.hpp"
#include "cdmara/numerics.hpp"
#include "cdmara/simulator.hpp"

namespace cdmara::sweep {

namespace {

constexpr double kLambdaLo = 0.01;
constexpr double kLambdaTol = 1e-4;
constexpr unsigned kGridPoints = 256;

}  // namespace

MaxThroughput max_throughput(const SystemParams& params, Scheme scheme) {
    analytic::SuccessCurve curve(params, scheme);
    auto objective = [&](double lambda) { return analytic::throughput_sum(lambda, curve); };

    double hi = 4.0 * (params.processing_gain / params.eta_th + 10.0);
    MaxThroughput result;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const auto best = numerics::maximize_1d(objective, kLambdaLo, hi, kLambdaTol, kGridPoints);
        const double edge = hi - (hi - kLambdaLo) / (kGridPoints - 1);
        result = {best.argmax, best.value, best.argmax < edge};
        if (result.bracketed) break;
        hi *= 2.0;
    }
    return result;
}

MaxThroughput limit_throughput(const SystemParams& params, Scheme scheme) {
    SystemParams unlimited = params;
    unlimited.n_seq = std::nullopt;
    return max_throughput(unlimited, scheme);
}

SequenceFraction sequences_for_fraction(const SystemParams& params, Scheme scheme, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw DomainError("fraction must lie in (0, 1)");
    SequenceFraction out;
    out.limit = limit_throughput(params, scheme).s_star;
    const double target = fraction * out.limit;

    auto max_at = [&](unsigned exponent) {
        SystemParams p = params;
        p.n_seq = std::uint64_t{1} << exponent;
        return max_throughput(p, scheme).s_star;
    };

    // Maximum throughput is nondecreasing in n_seq, so bisect the exponent.
    unsigned lo = kMinSeqExponent;
    unsigned hi = kMaxSeqExponent;
    if (max_at(hi) < target) {
        out.n_seq = std::uint64_t{1} << hi;
        out.below = std::uint64_t{1} << (hi - 1);
        out.crossing = static_cast<double>(out.n_seq);
        out.reached = false;
        return out;
    }
    while (lo < hi) {
        const unsigned mid = (lo + hi) / 2;
        if (max_at(mid) >= target)
            hi = mid;
        else
            lo = mid + 1;
    }
    out.n_seq = std::uint64_t{1} << lo;
    if (lo == kMinSeqExponent) {
        out.crossing = static_cast<double>(out.n_seq);
        return out;
    }
    out.below = std::uint64_t{1} << (lo - 1);
    const double m_lo = max_at(lo - 1);
    const double m_hi = max_at(lo);
    const double t = m_hi > m_lo ? (target - m_lo) / (m_hi - m_lo) : 1.0;
    out.crossing = std::exp2(static_cast<double>(lo - 1) + std::clamp(t, 0.0, 1.0));
    return out;
}

std::optional<double> crossover_lambda(const SystemParams& params, Scheme a, Scheme b, double lo, double hi) {
    analytic::SuccessCurve ca(params, a);
    analytic::SuccessCurve cb(params, b);
    auto diff = [&](double lambda) {
        return analytic::throughput_sum(lambda, ca) - analytic::throughput_sum(lambda, cb);
    };
    double f_lo = diff(lo);
    const double f_hi = diff(hi);
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if ((f_lo > 0) == (f_hi > 0)) return std::nullopt;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = diff(mid);
        if ((f_mid > 0) == (f_lo > 0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::string_view axis_name(Axis a) {
    switch (a) {
        case Axis::Lambda: return "lambda";
        case Axis::Outage: return "outage";
        case Axis::NSeq: return "n_seq";
        case Axis::EtaDb: return "eta_db";
    }
    return "?";
}

std::optional<Axis> parse_axis(std::string_view name) {
    if (name == "lambda") return Axis::Lambda;
    if (name == "outage") return Axis::Outage;
    if (name == "n_seq" || name == "nseq") return Axis::NSeq;
    if (name == "eta_db" || name == "eta-db") return Axis::EtaDb;
    return std::nullopt;
}

std::string_view mode_name(Mode m) {
    switch (m) {
        case Mode::Analytic: return "analytic";
        case Mode::Simulated: return "simulated";
        case Mode::Both: return "both";
    }
    return "?";
}

std::optional<Mode> parse_mode(std::string_view name) {
    if (name == "analytic") return Mode::Analytic;
    if (name == "simulated") return Mode::Simulated;
    if (name == "both") return Mode::Both;
    return std::nullopt;
}

void validate_spec(const SweepSpec& spec) {
    std::vector<std::string> problems;
    if (spec.schemes.empty()) problems.emplace_back("sweep needs at least one scheme");
    if (spec.values.empty()) problems.emplace_back("sweep needs at least one axis value");
    for (std::size_t i = 1; i < spec.values.size(); ++i) {
        if (!(spec.values[i] > spec.values[i - 1])) {
            problems.emplace_back("axis values must be strictly increasing");
            break;
        }
    }
    if (spec.mode != Mode::Analytic && spec.slots == 0) problems.emplace_back("slots must be >= 1");
    try {
        validate(spec.params);
    } catch (const ParamError& e) {
        problems.insert(problems.end(), e.problems().begin(), e.problems().end());
    }
    if (!problems.empty()) throw ParamError(std::move(problems));
}

double z_score(double simulated, double analytic, double std_error) {
    const double diff = simulated - analytic;
    if (std_error > 0.0) return diff / std_error;
    return diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
}

namespace {

SystemParams row_params(const SweepSpec& spec, double value) {
    SystemParams p = spec.params;
    switch (spec.axis) {
        case Axis::Lambda: break;
        case Axis::Outage: p.outage = value; break;
        case Axis::NSeq:
            if (std::isinf(value)) {
                p.n_seq = std::nullopt;
            } else {
                if (!(value >= 1.0) || value != std::floor(value))
                    throw ParamError({"n_seq axis values must be positive integers or inf"});
                p.n_seq = static_cast<std::uint64_t>(value);
            }
            break;
        case Axis::EtaDb: p.eta_th = db_to_linear(value); break;
    }
    return validate(p);
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec) {
    validate_spec(spec);
    SweepResult result;
    result.spec = spec;
    result.rows.reserve(spec.values.size() * spec.schemes.size());

    std::uint64_t index = 0;
    for (const double value : spec.values) {
        for (const Scheme scheme : spec.schemes) {
            SweepRow row;
            row.scheme = scheme;
            row.axis_value = value;
            row.params = spec.params;
            row.seed = numerics::derive_seed(spec.seed, index++);
            try {
                row.params = row_params(spec, value);
                double analytic_value = 0.0;
                if (spec.axis == Axis::Lambda) {
                    row.lambda = value;
                    analytic_value = analytic::throughput_sum(value, row.params, scheme);
                } else {
                    const auto best = max_throughput(row.params, scheme);
                    row.lambda = best.lambda_star;
                    row.maximized = true;
                    analytic_value = best.s_star;
                    if (!best.bracketed) row.error = "maximum at upper edge of lambda range";
                }
                result.max_tail_bound =
                    std::max(result.max_tail_bound, analytic::truncation_tail_bound(row.lambda, row.params));
                if (spec.mode != Mode::Simulated) row.analytic = analytic_value;
                if (spec.mode != Mode::Analytic) {
                    const auto est =
                        sim::estimate_throughput(row.params, scheme, row.lambda, spec.slots, row.seed, spec.threads);
                    row.simulated = est.mean;
                    row.std_error = est.std_error;
                    row.slots = est.slots;
                    row.degenerate = est.degenerate;
                }
                if (spec.mode == Mode::Both) row.z = z_score(*row.simulated, analytic_value, row.std_error);
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

}  // namespace cdmara::sweep
