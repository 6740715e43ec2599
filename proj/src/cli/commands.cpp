#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "cdmara/analytic.hpp"
#include "cdmara/cli.hpp"
#include "cdmara/numerics.hpp"
#include "cdmara/report.hpp"
#include "cdmara/simulator.hpp"

namespace cdmara::cli {

namespace {

using report::Cell;
using report::Table;

Cell opt_cell(const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; }

nlohmann::json base_meta(const RunConfig& config) {
    nlohmann::json meta;
    meta["config"] = config_json(config);
    meta["seed"] = config.seed;
    return meta;
}

// Writes to --output when given, else to `out`.
int emit(const RunConfig& config, std::ostream& out, std::ostream& err, const Table& table,
         const nlohmann::json& meta) {
    std::ofstream file;
    std::ostream* dest = &out;
    if (!config.output.empty()) {
        file.open(config.output, std::ios::binary);
        if (!file) {
            err << "error: cannot open output file " << config.output << "\n";
            return kExitUsage;
        }
        dest = &file;
    }
    if (config.format == Format::Csv)
        report::write_csv(*dest, table, meta);
    else
        report::write_json(*dest, table, meta);
    return kExitOk;
}

void require_positive_lambdas(const std::vector<double>& lambdas) {
    for (const double l : lambdas)
        if (!(l > 0.0) || !std::isfinite(l))
            throw ParamError({"lambda values must be positive and finite, got " + report::format_double(l)});
}

sweep::SweepSpec lambda_spec(const RunConfig& config, sweep::Mode mode) {
    require_positive_lambdas(config.lambdas);
    sweep::SweepSpec spec;
    spec.schemes = config.schemes;
    spec.axis = sweep::Axis::Lambda;
    spec.values = config.lambdas;
    spec.params = config.to_params();
    spec.mode = mode;
    spec.slots = config.slots;
    spec.seed = config.seed;
    spec.threads = config.threads;
    return spec;
}

int report_row_errors(const sweep::SweepResult& result, std::ostream& err) {
    int failures = 0;
    for (const auto& row : result.rows) {
        if (row.error.empty()) continue;
        ++failures;
        err << "error: " << scheme_name(row.scheme) << " at " << sweep::axis_name(result.spec.axis) << " = "
            << report::format_double(row.axis_value) << ": " << row.error << "\n";
    }
    return failures;
}

}  // namespace

int cmd_analytic(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const auto result = sweep::run_sweep(lambda_spec(config, sweep::Mode::Analytic));
    Table table{{"lambda", "scheme", "throughput"}, {}};
    for (const auto& row : result.rows)
        table.add_row({row.lambda, std::string(scheme_name(row.scheme)), opt_cell(row.analytic)});
    auto meta = base_meta(config);
    meta["truncation_tail_bound"] = result.max_tail_bound;
    const int failures = report_row_errors(result, err);
    const int rc = emit(config, out, err, table, meta);
    return rc != kExitOk ? rc : (failures ? kExitStatistical : kExitOk);
}

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const auto result = sweep::run_sweep(lambda_spec(config, sweep::Mode::Simulated));
    Table table{{"lambda", "scheme", "throughput", "stderr", "slots", "seed", "flag"}, {}};
    bool warned = false;
    for (const auto& row : result.rows) {
        std::string flag;
        if (row.degenerate) {
            flag = "stderr-undefined";
            if (!warned) err << "warning: fewer than 2 slots per point; stderr reported as 0\n";
            warned = true;
        }
        table.add_row({row.lambda, std::string(scheme_name(row.scheme)), opt_cell(row.simulated), row.std_error,
                       row.slots, row.seed, flag});
    }
    const int failures = report_row_errors(result, err);
    const int rc = emit(config, out, err, table, base_meta(config));
    return rc != kExitOk ? rc : (failures ? kExitStatistical : kExitOk);
}

int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err) {
    sweep::SweepSpec spec;
    spec.schemes = config.schemes;
    spec.axis = config.axis;
    spec.values = config.values;
    spec.params = config.to_params();
    spec.mode = config.mode;
    spec.slots = config.slots;
    spec.seed = config.seed;
    spec.threads = config.threads;
    if (spec.axis == sweep::Axis::Lambda) require_positive_lambdas(spec.values);
    const auto result = sweep::run_sweep(spec);
    auto meta = base_meta(config);
    meta["axis"] = sweep::axis_name(config.axis);
    meta["mode"] = sweep::mode_name(config.mode);
    meta["truncation_tail_bound"] = result.max_tail_bound;
    const int failures = report_row_errors(result, err);
    const int rc = emit(config, out, err, sweep_table(result.rows, config.axis, config.mode), meta);
    return rc != kExitOk ? rc : (failures ? kExitStatistical : kExitOk);
}

report::Table sweep_table(const std::vector<sweep::SweepRow>& rows, sweep::Axis axis, sweep::Mode mode) {
    const bool with_sim = mode != sweep::Mode::Analytic;
    Table table{{"scheme", "axis", "axis_value", "n_seq", "outage", "g_th", "eta_th", "eta_th_db", "snr", "snr_db",
                 "lambda", "maximized", "throughput_analytic"},
                {}};
    if (with_sim)
        for (const char* c : {"throughput_simulated", "stderr", "z", "slots", "seed"}) table.columns.emplace_back(c);
    table.columns.emplace_back("error");
    for (const auto& row : rows) {
        const auto& p = row.params;
        const bool simulated = row.simulated.has_value();
        std::vector<Cell> cells{std::string(scheme_name(row.scheme)), std::string(sweep::axis_name(axis)),
                                row.axis_value, p.n_seq ? Cell{*p.n_seq} : Cell{std::string("inf")}, p.outage,
                                (p.outage >= 0.0 && p.outage < 1.0) ? Cell{p.g_th()} : Cell{}, p.eta_th,
                                linear_to_db(p.eta_th), p.snr, linear_to_db(p.snr), row.lambda,
                                std::uint64_t{row.maximized ? 1u : 0u}, opt_cell(row.analytic)};
        if (with_sim) {
            cells.push_back(opt_cell(row.simulated));
            cells.push_back(simulated ? Cell{row.std_error} : Cell{});
            cells.push_back(opt_cell(row.z));
            cells.push_back(simulated ? Cell{row.slots} : Cell{});
            cells.push_back(simulated ? Cell{row.seed} : Cell{});
        }
        cells.push_back(row.error);
        table.add_row(std::move(cells));
    }
    return table;
}

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const SystemParams params = validate(config.to_params());
    SystemParams analytic_params = params;
    if (config.corrupt_noise != 1.0) {
        if (!(config.corrupt_noise > 0.0)) throw ParamError({"--corrupt-noise must be positive"});
        analytic_params.snr = params.snr / config.corrupt_noise;
        err << "note: analytic noise term scaled by " << report::format_double(config.corrupt_noise)
            << " (test hook)\n";
    }
    require_positive_lambdas(config.validate_lambdas);

    Table table{{"kind", "scheme", "k", "lambda", "analytic", "simulated", "stderr", "z", "pass"}, {}};
    constexpr double kZLimit = 4.0;
    double worst = 0.0;
    std::string worst_cell = "none";
    std::uint64_t cell = 0;
    auto record = [&](const std::string& kind, Scheme scheme, Cell k, Cell lambda, double analytic,
                      const sim::SimEstimate& est) {
        double se = est.std_error;
        // A Bernoulli sample with no variation says nothing about its spread;
        // judge it against the spread the analytic value implies.
        if (kind == "ps" && est.degenerate)
            se = std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(est.slots));
        const double z = sweep::z_score(est.mean, analytic, se);
        const bool pass = std::abs(z) < kZLimit;
        table.add_row({kind, std::string(scheme_name(scheme)), k, lambda, analytic, est.mean, se, z,
                       std::string(pass ? "yes" : "no")});
        if (std::abs(z) > worst || (std::isnan(z) && !std::isnan(worst))) {
            worst = std::abs(z);
            std::ostringstream os;
            os << kind << " " << scheme_name(scheme) << " ";
            if (kind == "ps")
                os << "k=" << std::get<std::uint64_t>(k);
            else
                os << "lambda=" << report::format_double(std::get<double>(lambda));
            worst_cell = os.str();
        }
    };

    for (const Scheme scheme : config.schemes) {
        for (const std::uint64_t k : config.ks) {
            const double analytic = analytic::ps(scheme, k, analytic_params);
            const auto est = sim::estimate_ps_given_k(params, scheme, k, config.trials,
                                                      numerics::derive_seed(config.seed, cell++), config.threads);
            record("ps", scheme, k, Cell{}, analytic, est);
        }
    }
    for (const Scheme scheme : config.schemes) {
        analytic::SuccessCurve curve(analytic_params, scheme);
        for (const double lambda : config.validate_lambdas) {
            const double analytic = analytic::throughput_sum(lambda, curve);
            const auto est = sim::estimate_throughput(params, scheme, lambda, config.slots,
                                                      numerics::derive_seed(config.seed, cell++), config.threads);
            record("throughput", scheme, Cell{}, lambda, analytic, est);
        }
    }

    // The closed form sums k up to floor(1 + N(1/eta - noise)) while the
    // piecewise success rule stops one short of it; show where they part.
    auto notes = nlohmann::json::array();
    if (std::find(config.schemes.begin(), config.schemes.end(), Scheme::AdaptiveInversion) != config.schemes.end()) {
        SystemParams sum_limit = params;
        sum_limit.inversion_boundary = InversionBoundary::SumLimit;
        const std::uint64_t k_edge = analytic::inversion_k_max(sum_limit);
        if (k_edge >= 1) {
            const double noise = noise_term(params, Scheme::AdaptiveInversion);
            const double sinr = 1.0 / (noise + static_cast<double>(k_edge - 1) / params.processing_gain);
            const bool probed = std::find(config.ks.begin(), config.ks.end(), k_edge) != config.ks.end();
            std::ostringstream os;
            os << "inversion boundary at k=" << k_edge << ": SINR = " << report::format_double(sinr)
               << (sinr > params.eta_th ? " > " : " <= ") << "eta_th = " << report::format_double(params.eta_th)
               << "; strict-floor rule (k < floor(1 + N(1/eta - noise))) gives p_s = 0, sum-limit rule gives p_s = 1"
               << "; active rule: " << inversion_boundary_name(params.inversion_boundary)
               << (probed ? " (probed above)" : "");
            notes.push_back(os.str());
            err << "note: " << os.str() << "\n";
        }
    }

    auto meta = base_meta(config);
    meta["trials"] = config.trials;
    meta["z_limit"] = kZLimit;
    meta["max_abs_z"] = std::isfinite(worst) ? nlohmann::json(worst) : nlohmann::json(report::format_double(worst));
    meta["worst_cell"] = worst_cell;
    meta["notes"] = notes;
    const int rc = emit(config, out, err, table, meta);
    if (rc != kExitOk) return rc;

    err << "max |z| = " << report::format_double(worst) << " (" << worst_cell << ")\n";
    if (!(worst < kZLimit)) {
        err << "validation FAILED: " << worst_cell << " exceeds |z| < " << kZLimit << "\n";
        return kExitStatistical;
    }
    err << "validation passed\n";
    return kExitOk;
}

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    RunConfig config;
    try {
        config = parse_args(argv);
    } catch (const HelpRequested& e) {
        out << e.what();
        return kExitOk;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        err << "run with --help for the list of commands and options\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        validate(config.to_params());
        if (config.command == "analytic") return cmd_analytic(config, out, err);
        if (config.command == "simulate") return cmd_simulate(config, out, err);
        if (config.command == "sweep") return cmd_sweep(config, out, err);
        if (config.command == "validate") return cmd_validate(config, out, err);
        if (config.command == "figures") return cmd_figures(config, out, err);
        err << "usage error: unknown command '" << config.command << "'\n";
        return kExitUsage;
    } catch (const ParamError& e) {
        for (const auto& p : e.problems()) err << "invalid parameter: " << p << "\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "invalid parameter: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitStatistical;
    }
}

}  // namespace cdmara::cli
