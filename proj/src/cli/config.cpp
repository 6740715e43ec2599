#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "cdmara/cli.hpp"
#include "cdmara/report.hpp"

namespace cdmara::cli {

namespace {

enum Opt : unsigned {
    kScheme = 1u << 0,
    kLambda = 1u << 1,
    kSim = 1u << 2,  // --slots --seed
    kSweep = 1u << 3,
    kValidate = 1u << 4,
    kFigures = 1u << 5,
};

unsigned options_for(const std::string& command) {
    if (command == "analytic") return kScheme | kLambda;
    if (command == "simulate") return kScheme | kLambda | kSim;
    if (command == "sweep") return kScheme | kSweep | kSim;
    if (command == "validate") return kScheme | kSim | kValidate;
    if (command == "figures") return kSim | kFigures;
    return 0;
}

const std::vector<std::pair<std::string, std::string>> kCommands = {
    {"analytic", "Analytic throughput S(lambda) for each scheme"},
    {"simulate", "Monte Carlo throughput estimates with standard errors"},
    {"sweep", "Sweep lambda, outage, n_seq or eta_db (maximizing over lambda off the lambda axis)"},
    {"validate", "Compare analytic success probabilities and throughput against simulation"},
    {"figures", "Regenerate every figure table plus a summary.json"},
};

double parse_number(std::string_view text) {
    std::string s(text);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    if (s == "inf" || s == "+inf") return INFINITY;
    double value = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw UsageError("not a number: '" + s + "'");
    return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) parts.push_back(item);
    if (!text.empty() && text.back() == sep) parts.emplace_back();
    return parts;
}

template <typename T>
std::string join(const std::vector<T>& items, auto&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ',';
        out += fmt(items[i]);
    }
    return out;
}

std::string nseq_text(const SequenceCount& n) { return n ? std::to_string(*n) : "inf"; }

SequenceCount parse_nseq(const std::string& text) {
    if (text == "inf" || text == "infinite") return std::nullopt;
    const double v = parse_number(text);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e18) throw UsageError("--nseq must be a non-negative integer or inf");
    return static_cast<std::uint64_t>(v);
}

std::string schemes_text(const std::vector<Scheme>& schemes) {
    return join(schemes, [](Scheme s) { return std::string(scheme_name(s)); });
}

std::string format_name(Format f) { return f == Format::Csv ? "csv" : "json"; }

}  // namespace

SystemParams RunConfig::to_params() const {
    SystemParams p;
    p.stations = stations;
    p.processing_gain = processing_gain;
    p.n_seq = n_seq;
    p.eta_th = db_to_linear(eta_db);
    p.snr = db_to_linear(snr_db);
    p.outage = outage;
    p.power_norm = power_norm;
    p.inversion_boundary = inversion_boundary;
    return p;
}

std::vector<double> parse_range(const std::string& text) {
    if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw UsageError("range must be start:stop:step, got '" + text + "'");
        const double start = parse_number(parts[0]);
        const double stop = parse_number(parts[1]);
        const double step = parse_number(parts[2]);
        if (!std::isfinite(start) || !std::isfinite(stop) || !(step > 0.0) || !std::isfinite(step))
            throw UsageError("range needs finite start/stop and a positive step: '" + text + "'");
        if (stop < start) throw UsageError("range stop is below start: '" + text + "'");
        std::vector<double> out;
        const auto count = static_cast<std::uint64_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        if (count > 10000000) throw UsageError("range has too many points: '" + text + "'");
        for (std::uint64_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
        return out;
    }
    std::vector<double> out;
    for (const auto& item : split(text, ',')) out.push_back(parse_number(item));
    if (out.empty()) throw UsageError("empty value list");
    return out;
}

std::vector<Scheme> parse_schemes(const std::string& text) {
    if (text == "all") return {std::begin(kAllSchemes), std::end(kAllSchemes)};
    std::vector<Scheme> out;
    for (const auto& item : split(text, ',')) {
        const auto s = parse_scheme(item);
        if (!s) throw UsageError("unknown scheme '" + item + "' (expected conv, const, inv or all)");
        out.push_back(*s);
    }
    if (out.empty()) throw UsageError("empty scheme list");
    return out;
}

RunConfig parse_args(const std::vector<std::string>& argv) {
    const RunConfig defaults;
    RunConfig cfg;

    CLI::App app{"Throughput of CDM-based random access with SINR capture", "cdmara"};
    app.require_subcommand(1, 1);

    // Raw text for options needing custom parsing, pre-filled with defaults.
    std::string nseq = nseq_text(defaults.n_seq);
    std::string power_norm(power_norm_name(defaults.power_norm));
    std::string boundary(inversion_boundary_name(defaults.inversion_boundary));
    std::string format = format_name(defaults.format);
    std::string schemes = "all";
    std::string lambdas = join(defaults.lambdas, report::format_double);
    std::string axis(sweep::axis_name(defaults.axis));
    std::string values;
    std::string mode(sweep::mode_name(defaults.mode));
    std::string ks = join(defaults.ks, [](std::uint64_t k) { return std::to_string(k); });
    std::string validate_lambdas = join(defaults.validate_lambdas, report::format_double);

    for (const auto& [name, help] : kCommands) {
        CLI::App* sc = app.add_subcommand(name, help);
        sc->callback([&cfg, name = name] { cfg.command = name; });
        const unsigned opts = options_for(name);

        sc->add_option("--eta-db", cfg.eta_db, "Minimum SINR eta_th in dB")->capture_default_str();
        sc->add_option("--snr-db", cfg.snr_db, "Average P T_p / N_0 in dB")->capture_default_str();
        sc->add_option("--outage", cfg.outage, "Outage probability P_o in [0, 1)")->capture_default_str();
        sc->add_option("--nseq", nseq, "Number of sequences, or inf")->capture_default_str();
        sc->add_option("--stations", cfg.stations, "Number of remote stations M")->capture_default_str();
        sc->add_option("--processing-gain", cfg.processing_gain, "Processing gain N")->capture_default_str();
        sc->add_option("--power-norm", power_norm, "Channel-inversion power normalization: received | average-tx")
            ->capture_default_str();
        sc->add_option("--inv-boundary", boundary, "Channel-inversion success rule: sum-limit | strict-floor")
            ->capture_default_str();
        sc->add_option("--format", format, "Output format: csv | json")->capture_default_str();
        sc->add_option("--output,-o", cfg.output, "Output file (default stdout)");
        sc->add_option("--threads", cfg.threads, "Worker threads, 0 = all cores (results are identical)")
            ->capture_default_str();

        if (opts & kScheme) sc->add_option("--scheme", schemes, "all, or a list of conv,const,inv")->capture_default_str();
        if (opts & kLambda)
            sc->add_option("--lambda", lambdas, "Arrival rates: start:stop:step, a value or a list")->capture_default_str();
        if (opts & kSim) {
            sc->add_option("--slots", cfg.slots, "Simulated slots per point")->capture_default_str();
            sc->add_option("--seed", cfg.seed, "Base RNG seed")->capture_default_str();
        }
        if (opts & kSweep) {
            sc->add_option("--axis", axis, "lambda | outage | n_seq | eta_db")->capture_default_str();
            sc->add_option("--values", values, "Axis values: start:stop:step or a list (inf allowed for n_seq)")
                ->required();
            sc->add_option("--mode", mode, "analytic | simulated | both")->capture_default_str();
        }
        if (opts & kValidate) {
            sc->add_option("--k", ks, "Transmitter counts probed for p_s(k)")->capture_default_str();
            sc->add_option("--trials", cfg.trials, "Trials per p_s(k) cell")->capture_default_str();
            sc->add_option("--validate-lambda", validate_lambdas, "Arrival rates probed for S(lambda)")
                ->capture_default_str();
            sc->add_option("--corrupt-noise", cfg.corrupt_noise,
                           "Test hook: multiply the analytic noise term (checks that validation can fail)")
                ->capture_default_str();
        }
        if (opts & kFigures) {
            sc->add_option("--out-dir", cfg.out_dir, "Directory for fig*.csv and summary.json")->capture_default_str();
            sc->add_flag("--analytic-only", cfg.analytic_only, "Skip simulation columns");
        }
    }

    std::vector<const char*> raw;
    raw.reserve(argv.size());
    for (const auto& a : argv) raw.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(raw.size()), raw.data());
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        throw HelpRequested(subs.empty() ? app.help() : subs.front()->help());
    } catch (const CLI::CallForAllHelp&) {
        throw HelpRequested(app.help("", CLI::AppFormatMode::All));
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    cfg.n_seq = parse_nseq(nseq);
    const auto pn = parse_power_norm(power_norm);
    if (!pn) throw UsageError("--power-norm must be received or average-tx");
    cfg.power_norm = *pn;
    const auto ib = parse_inversion_boundary(boundary);
    if (!ib) throw UsageError("--inv-boundary must be sum-limit or strict-floor");
    cfg.inversion_boundary = *ib;
    if (format == "csv")
        cfg.format = Format::Csv;
    else if (format == "json")
        cfg.format = Format::Json;
    else
        throw UsageError("--format must be csv or json");
    cfg.schemes = parse_schemes(schemes);
    cfg.lambdas = parse_range(lambdas);
    const auto ax = sweep::parse_axis(axis);
    if (!ax) throw UsageError("--axis must be lambda, outage, n_seq or eta_db");
    cfg.axis = *ax;
    if (!values.empty()) cfg.values = parse_range(values);
    const auto md = sweep::parse_mode(mode);
    if (!md) throw UsageError("--mode must be analytic, simulated or both");
    cfg.mode = *md;
    cfg.ks.clear();
    for (const double k : parse_range(ks)) {
        if (!(k >= 1.0) || k != std::floor(k) || !std::isfinite(k)) throw UsageError("--k values must be integers >= 1");
        cfg.ks.push_back(static_cast<std::uint64_t>(k));
    }
    cfg.validate_lambdas = parse_range(validate_lambdas);
    return cfg;
}

std::vector<std::string> render_args(const RunConfig& c) {
    const unsigned opts = options_for(c.command);
    std::vector<std::string> args{c.command};
    auto add = [&](const std::string& flag, const std::string& value) { args.push_back(flag + "=" + value); };
    auto num = [](double x) { return report::format_double(x); };

    add("--eta-db", num(c.eta_db));
    add("--snr-db", num(c.snr_db));
    add("--outage", num(c.outage));
    add("--nseq", nseq_text(c.n_seq));
    add("--stations", std::to_string(c.stations));
    add("--processing-gain", num(c.processing_gain));
    add("--power-norm", std::string(power_norm_name(c.power_norm)));
    add("--inv-boundary", std::string(inversion_boundary_name(c.inversion_boundary)));
    add("--format", format_name(c.format));
    if (!c.output.empty()) add("--output", c.output);
    add("--threads", std::to_string(c.threads));
    if (opts & kScheme) add("--scheme", schemes_text(c.schemes));
    if (opts & kLambda) add("--lambda", join(c.lambdas, num));
    if (opts & kSim) {
        add("--slots", std::to_string(c.slots));
        add("--seed", std::to_string(c.seed));
    }
    if (opts & kSweep) {
        add("--axis", std::string(sweep::axis_name(c.axis)));
        add("--values", join(c.values, num));
        add("--mode", std::string(sweep::mode_name(c.mode)));
    }
    if (opts & kValidate) {
        add("--k", join(c.ks, [](std::uint64_t k) { return std::to_string(k); }));
        add("--trials", std::to_string(c.trials));
        add("--validate-lambda", join(c.validate_lambdas, num));
        add("--corrupt-noise", num(c.corrupt_noise));
    }
    if (opts & kFigures) {
        add("--out-dir", c.out_dir);
        if (c.analytic_only) args.emplace_back("--analytic-only");
    }
    return args;
}

nlohmann::json config_json(const RunConfig& c) {
    const SystemParams p = c.to_params();
    nlohmann::json j;
    j["command"] = c.command;
    j["stations"] = c.stations;
    j["processing_gain"] = c.processing_gain;
    j["n_seq"] = c.n_seq ? nlohmann::json(*c.n_seq) : nlohmann::json("inf");
    j["eta_th"] = p.eta_th;
    j["eta_th_db"] = c.eta_db;
    j["snr"] = p.snr;
    j["snr_db"] = c.snr_db;
    j["outage"] = c.outage;
    if (c.outage >= 0.0 && c.outage < 1.0) j["g_th"] = p.g_th();
    j["power_norm"] = power_norm_name(c.power_norm);
    j["inversion_boundary"] = inversion_boundary_name(c.inversion_boundary);
    j["slots"] = c.slots;
    j["seed"] = c.seed;
    // The worker count never changes results; leaving it out keeps outputs
    // byte-identical across --threads.
    auto args = render_args(c);
    std::erase_if(args, [](const std::string& a) { return a.rfind("--threads=", 0) == 0; });
    j["args"] = args;
    return j;
}

}  // namespace cdmara::cli
