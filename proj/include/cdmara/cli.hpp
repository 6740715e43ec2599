#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdmara/model.hpp"
#include "cdmara/report.hpp"
#include "cdmara/sweep.hpp"

namespace cdmara::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitStatistical = 1;
inline constexpr int kExitUsage = 2;

enum class Format { Csv, Json };

/// Everything a command needs, fully resolved. dB values live only here;
/// to_params() converts them to the linear SystemParams.
struct RunConfig {
    std::string command;

    double eta_db = 5.0;
    double snr_db = 30.0;
    double outage = 0.7;
    SequenceCount n_seq = 128;
    std::uint64_t stations = 8192;
    double processing_gain = 64.0;
    PowerNorm power_norm = PowerNorm::Received;
    InversionBoundary inversion_boundary = InversionBoundary::SumLimit;

    std::vector<Scheme> schemes{std::begin(kAllSchemes), std::end(kAllSchemes)};
    std::vector<double> lambdas{18.1};

    sweep::Axis axis = sweep::Axis::Lambda;
    std::vector<double> values;
    sweep::Mode mode = sweep::Mode::Analytic;

    std::uint64_t slots = 100000;
    std::uint64_t seed = 42;
    unsigned threads = 0;  ///< 0 = hardware concurrency; never changes results

    Format format = Format::Csv;
    std::string output;  ///< empty = stdout

    // validate
    std::uint64_t trials = 1000000;
    std::vector<std::uint64_t> ks{1, 2, 5, 10, 20, 50};
    std::vector<double> validate_lambdas{5.0, 15.0, 25.0};
    double corrupt_noise = 1.0;  ///< test hook: scales the analytic noise term

    // figures
    std::string out_dir = "figures";
    bool analytic_only = false;

    bool operator==(const RunConfig&) const = default;

    SystemParams to_params() const;
};

/// Thrown for malformed command lines; the message is user-facing.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown by parse_args for --help; what() is the help text.
class HelpRequested : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses `start:stop:step` (inclusive of stop within 1e-9), a single
/// number, or a comma-separated list. "inf" is accepted as a list item.
std::vector<double> parse_range(const std::string& text);

/// Parses "all" or a comma-separated list of scheme names.
std::vector<Scheme> parse_schemes(const std::string& text);

/// argv[0] is the program name; argv[1] the subcommand.
RunConfig parse_args(const std::vector<std::string>& argv);

/// Command line (without the program name) that parses back to `config`.
std::vector<std::string> render_args(const RunConfig& config);

/// Resolved configuration as JSON, embedded in every output.
nlohmann::json config_json(const RunConfig& config);

/// One row per sweep row; simulation columns only when `mode` simulates.
report::Table sweep_table(const std::vector<sweep::SweepRow>& rows, sweep::Axis axis, sweep::Mode mode);

int cmd_analytic(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_figures(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full entry point: parse, validate, dispatch. Never throws.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace cdmara::cli
