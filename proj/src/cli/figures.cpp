#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "cdmara/analytic.hpp"
#include "cdmara/cli.hpp"
#include "cdmara/numerics.hpp"
#include "cdmara/report.hpp"

namespace cdmara::cli {

namespace {

std::vector<double> grid(double start, double stop, double step) {
    std::vector<double> v;
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) v.push_back(start + static_cast<double>(i) * step);
    return v;
}

std::vector<double> nseq_grid() {
    std::vector<double> v;
    for (unsigned e = sweep::kMinSeqExponent; e <= sweep::kMaxSeqExponent; ++e) v.push_back(std::ldexp(1.0, e));
    v.push_back(INFINITY);
    return v;
}

nlohmann::json peak_json(const sweep::MaxThroughput& m) {
    return {{"lambda_star", m.lambda_star}, {"s_star", m.s_star}, {"bracketed", m.bracketed}};
}

struct FigureJob {
    std::string file;
    std::vector<sweep::SweepSpec> specs;
};

}  // namespace

int cmd_figures(const RunConfig& config, std::ostream& out, std::ostream& err) {
    namespace fs = std::filesystem;
    const auto started = std::chrono::steady_clock::now();
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec || !fs::is_directory(config.out_dir)) {
        err << "error: cannot create output directory " << config.out_dir << "\n";
        return kExitUsage;
    }

    // Fixed figure settings; everything else (N, M, snr, power norm,
    // boundary rule, slots, seed) comes from the config.
    SystemParams base = config.to_params();
    base.eta_th = db_to_linear(5.0);
    base.n_seq = 128;

    auto spec_for = [&](sweep::Axis axis, std::vector<double> values, SystemParams params) {
        sweep::SweepSpec s;
        s.axis = axis;
        s.values = std::move(values);
        s.params = params;
        s.mode = config.analytic_only ? sweep::Mode::Analytic : sweep::Mode::Both;
        s.slots = config.slots;
        s.threads = config.threads;
        return s;
    };
    auto with = [&](auto&& edit) {
        SystemParams p = base;
        edit(p);
        return p;
    };

    const auto lambda_grid = grid(0.25, 40.0, 0.25);
    std::vector<FigureJob> jobs;
    jobs.push_back({"fig3.csv", {spec_for(sweep::Axis::Lambda, lambda_grid, with([](auto& p) { p.outage = 0.2; }))}});
    jobs.push_back({"fig4.csv", {spec_for(sweep::Axis::Lambda, lambda_grid, with([](auto& p) { p.outage = 0.7; }))}});
    jobs.push_back({"fig5.csv", {spec_for(sweep::Axis::Outage, grid(0.0, 0.99, 0.01), base)}});
    {
        FigureJob fig6{"fig6.csv", {}};
        for (const std::uint64_t n : {64u, 128u, 256u})
            fig6.specs.push_back(spec_for(sweep::Axis::Lambda, lambda_grid, with([&](auto& p) {
                                              p.outage = 0.7;
                                              p.n_seq = n;
                                          })));
        jobs.push_back(std::move(fig6));
    }
    const std::pair<const char*, double> eta_figs[] = {{"fig7.csv", 1.0}, {"fig8.csv", 5.0}, {"fig9.csv", 10.0}};
    for (const auto& [file, eta_db] : eta_figs)
        jobs.push_back({file, {spec_for(sweep::Axis::NSeq, nseq_grid(), with([&](auto& p) {
                                             p.outage = 0.7;
                                             p.eta_th = db_to_linear(eta_db);
                                         }))}});

    // Seeds: each figure gets its own base so figures are independent of
    // one another and of the order they are produced in.
    std::uint64_t figure_index = 0;
    std::size_t rows_total = 0;
    std::size_t rows_ok_z = 0;
    std::size_t rows_failed = 0;
    double max_abs_z = 0.0;
    auto files = nlohmann::json::array();
    for (auto& job : jobs) {
        std::vector<sweep::SweepRow> rows;
        sweep::Axis axis = job.specs.front().axis;
        std::uint64_t part = 0;
        for (auto& spec : job.specs) {
            spec.seed = numerics::derive_seed(numerics::derive_seed(config.seed, figure_index), part++);
            auto result = sweep::run_sweep(spec);
            for (auto& row : result.rows) {
                if (!row.error.empty()) {
                    ++rows_failed;
                    err << "error: " << job.file << ": " << row.error << "\n";
                }
                if (row.z) {
                    ++rows_total;
                    if (std::abs(*row.z) < 4.0) ++rows_ok_z;
                    if (std::isfinite(*row.z)) max_abs_z = std::max(max_abs_z, std::abs(*row.z));
                }
                rows.push_back(std::move(row));
            }
        }
        ++figure_index;
        const fs::path path = fs::path(config.out_dir) / job.file;
        std::ofstream file(path, std::ios::binary);
        if (!file) {
            err << "error: cannot write " << path.string() << "\n";
            return kExitStatistical;
        }
        nlohmann::json meta;
        meta["config"] = config_json(config);
        meta["figure"] = job.file;
        report::write_csv(file, sweep_table(rows, axis, job.specs.front().mode), meta);
        files.push_back(job.file);
        err << "wrote " << path.string() << " (" << rows.size() << " rows)\n";
    }

    // Summary of the quantities the figures are read for, computed with the
    // refined maximizer rather than read off the grids.
    nlohmann::json summary;
    summary["tool"] = report::kToolName;
    summary["version"] = report::kToolVersion;
    summary["config"] = config_json(config);
    summary["files"] = files;

    for (const auto& [name, outage] : {std::pair{"fig3", 0.2}, std::pair{"fig4", 0.7}}) {
        const SystemParams p = with([&](auto& q) { q.outage = outage; });
        nlohmann::json fig;
        for (const Scheme s : kAllSchemes) fig[std::string(scheme_name(s))] = peak_json(sweep::max_throughput(p, s));
        summary[name] = fig;
    }
    {
        const SystemParams p = with([](auto& q) { q.outage = 0.2; });
        const auto cross = sweep::crossover_lambda(p, Scheme::AdaptiveInversion, Scheme::Conventional, 16.0, 30.0);
        summary["crossover_inv_below_conv_lambda"] = cross ? nlohmann::json(*cross) : nlohmann::json(nullptr);
    }
    {
        nlohmann::json fig5;
        double const_min = INFINITY;
        double const_min_at = 0.0;
        double inv_lo = INFINITY;
        double inv_hi = -INFINITY;
        for (const double po : grid(0.0, 0.99, 0.01)) {
            const SystemParams p = with([&](auto& q) { q.outage = po; });
            const double c = sweep::max_throughput(p, Scheme::AdaptiveConstant).s_star;
            if (c < const_min) {
                const_min = c;
                const_min_at = po;
            }
            const double inv = sweep::max_throughput(p, Scheme::AdaptiveInversion).s_star;
            inv_lo = std::min(inv_lo, inv);
            inv_hi = std::max(inv_hi, inv);
        }
        const double conv = sweep::max_throughput(base, Scheme::Conventional).s_star;
        fig5["conv_max"] = conv;
        fig5["const_min"] = const_min;
        fig5["const_min_outage"] = const_min_at;
        fig5["const_at_0_99"] =
            sweep::max_throughput(with([](auto& q) { q.outage = 0.99; }), Scheme::AdaptiveConstant).s_star;
        fig5["inv_max"] = inv_hi;
        fig5["inv_spread"] = inv_hi - inv_lo;
        fig5["inv_over_conv"] = inv_hi / conv;
        summary["fig5"] = fig5;
    }
    {
        nlohmann::json fig6;
        for (const std::uint64_t n : {64u, 128u, 256u}) {
            const SystemParams p = with([&](auto& q) {
                q.outage = 0.7;
                q.n_seq = n;
            });
            const double conv = sweep::max_throughput(p, Scheme::Conventional).s_star;
            fig6[std::to_string(n)] = {
                {"conv_max", conv},
                {"const_over_conv", sweep::max_throughput(p, Scheme::AdaptiveConstant).s_star / conv},
                {"inv_over_conv", sweep::max_throughput(p, Scheme::AdaptiveInversion).s_star / conv}};
        }
        summary["fig6"] = fig6;
    }
    {
        nlohmann::json limits;
        nlohmann::json seqs;
        for (const auto& [file, eta_db] : eta_figs) {
            const SystemParams p = with([&](auto& q) {
                q.outage = 0.7;
                q.eta_th = db_to_linear(eta_db);
            });
            nlohmann::json lim;
            nlohmann::json frac;
            for (const Scheme s : kAllSchemes) {
                lim[std::string(scheme_name(s))] = sweep::limit_throughput(p, s).s_star;
                const auto f = sweep::sequences_for_fraction(p, s, 0.8);
                frac[std::string(scheme_name(s))] = {{"n_seq", f.n_seq},
                                                     {"below", f.below ? nlohmann::json(*f.below) : nullptr},
                                                     {"crossing", f.crossing},
                                                     {"reached", f.reached}};
            }
            const std::string key = report::format_double(eta_db);
            limits[key] = lim;
            seqs[key] = frac;
        }
        summary["limits_by_eta_db"] = limits;
        summary["sequences_for_80_percent_by_eta_db"] = seqs;
    }

    const bool healthy = rows_total == 0 || static_cast<double>(rows_ok_z) >= 0.99 * static_cast<double>(rows_total);
    if (config.analytic_only) {
        summary["z_health"] = nullptr;
    } else {
        summary["z_health"] = {{"rows", rows_total},
                               {"rows_abs_z_below_4", rows_ok_z},
                               {"fraction_abs_z_below_4",
                                rows_total ? static_cast<double>(rows_ok_z) / static_cast<double>(rows_total) : 1.0},
                               {"max_abs_z", max_abs_z},
                               {"healthy", healthy}};
    }
    summary["failed_rows"] = rows_failed;
    summary["runtime_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    const fs::path summary_path = fs::path(config.out_dir) / "summary.json";
    std::ofstream file(summary_path, std::ios::binary);
    if (!file) {
        err << "error: cannot write " << summary_path.string() << "\n";
        return kExitStatistical;
    }
    file << summary.dump(2) << "\n";
    err << "wrote " << summary_path.string() << "\n";
    out << summary_path.string() << "\n";
    return (rows_failed == 0 && healthy) ? kExitOk : kExitStatistical;
}

}  // namespace cdmara::cli
