// Copyright 2026 The sdiqrng Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SDIQRNG_CLI_HPP
#define SDIQRNG_CLI_HPP

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sdiqrng/certify.hpp"
#include "sdiqrng/constraints.hpp"
#include "sdiqrng/errors.hpp"
#include "sdiqrng/estimation.hpp"
#include "sdiqrng/extraction.hpp"
#include "sdiqrng/privacy.hpp"
#include "sdiqrng/protocol.hpp"
#include "sdiqrng/round_log_io.hpp"

/// The `sdiqrng` command line: simulate, estimate, certify, extract, figures.
namespace sdiqrng::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kData = 3,
    kPrivacyFail = 4,
    kNonConvergence = 5,
};

/// Missing or unwritable files.
struct FileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr const char *kOutDirVariable = "SDIQRNG_OUT_DIR";

/// Every knob a command may read. Only `seed` lacks a default.
struct RunConfig {
    double lambda = 0.99;
    double eta = 0.06;
    uint64_t n_rounds = 1000000;
    std::optional<uint64_t> seed;
    std::string strategy = "honest";
    std::string sync_model = "per_block";
    bool hide = true;
    double confidence = 0.99;
    std::string aggregate = "both";
    unsigned restarts = 64;
    unsigned threads = 1;
    std::string interval = "clopper_pearson";
    std::filesystem::path out_dir;

    void validate() const {
        protocol().validate();
        parse_strategy_id(strategy);
        parse_sync_model(sync_model);
        if (!(confidence > 0 && confidence < 1)) {
            throw DomainError("confidence must lie in (0, 1)");
        }
        if (aggregate != "both") {
            parse_aggregate(aggregate);
        }
        if (restarts == 0) {
            throw DomainError("restarts must be positive");
        }
        if (threads == 0) {
            throw DomainError("threads must be positive");
        }
        if (interval != "clopper_pearson" && interval != "poisson") {
            throw DomainError("interval must be clopper_pearson or poisson");
        }
    }

    ProtocolConfig protocol() const {
        ProtocolConfig p;
        p.lambda = lambda;
        p.channel_efficiency = eta;
        p.n_rounds = n_rounds;
        p.seed = seed.value_or(0);
        p.strategy_id = parse_strategy_id(strategy);
        p.sync_model = parse_sync_model(sync_model);
        return p;
    }

    DeviceStrategy device() const {
        switch (parse_strategy_id(strategy)) {
            case StrategyId::PrngOnly:
                return PrngOnly{};
            case StrategyId::ClassicalDeterministic:
                return ClassicalDeterministic{};
            case StrategyId::SharedSeedSync:
                return sync_attack_strategy(parse_sync_model(sync_model), hide);
            case StrategyId::LemmaAdversary:
                return LemmaAdversary{qrac_params()};
            default:
                return HonestQrac{};
        }
    }

    IntervalMethod interval_method() const {
        return interval == "poisson" ? IntervalMethod::Poisson : IntervalMethod::ClopperPearson;
    }
};

namespace detail {

/// Shortest decimal that reads back to the same double.
inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::filesystem::path default_out_dir() {
    const char *env = std::getenv(kOutDirVariable);
    return env != nullptr && *env != '\0' ? std::filesystem::path(env) : std::filesystem::path(".");
}

inline std::filesystem::path config_sidecar(const std::filesystem::path &log) {
    return std::filesystem::path(log.string() + ".config");
}

inline std::ofstream open_output(const std::filesystem::path &path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw FileError("cannot write " + path.string());
    }
    return out;
}

inline std::ifstream open_input(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw FileError("cannot read " + path.string());
    }
    return in;
}

/// The key=value echo that `simulate --config` reads back.
inline KeyValues simulate_echo(const RunConfig &c) {
    return {
        {"lambda", format_double(c.lambda)},
        {"eta", format_double(c.eta)},
        {"n", std::to_string(c.n_rounds)},
        {"seed", std::to_string(c.seed.value_or(0))},
        {"strategy", c.strategy},
        {"sync-model", c.sync_model},
        {"hide", c.hide ? "true" : "false"},
    };
}

/// Streams a log file into a tally.
inline Tally tally_file(const std::filesystem::path &log) {
    std::ifstream in = open_input(log);
    Tally t;
    for_each_logged_round(in, [&](const RoundRecord &r) { t.add(r); });
    if (t.unblocked == 0) {
        throw InsufficientData("no unblocked rounds in " + log.string());
    }
    return t;
}

/// Flags the command line may set, with the config file's values injected
/// ahead of the user's own arguments so the user's win.
inline std::vector<std::string> expand_config(const std::vector<std::string> &args) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        }
    }
    if (!path || args.empty()) {
        return args;
    }
    std::ifstream in = open_input(*path);
    KeyValues kv = read_key_values(in);
    std::vector<std::string> out;
    std::size_t sub = 0;
    while (sub < args.size() && args[sub].rfind("-", 0) == 0) {
        ++sub;
    }
    out.assign(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(std::min(sub + 1, args.size())));
    for (const auto &[k, v] : kv) {
        out.push_back("--" + k + "=" + v);
    }
    out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(std::min(sub + 1, args.size())), args.end());
    return out;
}

inline void add_common(CLI::App *cmd, RunConfig &c) {
    cmd->add_option("--config", "key=value file mirroring the long flags; flags win");
    cmd->add_option("--threads", c.threads, "Worker threads (1 = sequential reference)")->capture_default_str();
    cmd->add_option("--out-dir", c.out_dir, std::string("Output directory (default $") + kOutDirVariable + " or .)");
}

inline void add_certify_options(CLI::App *cmd, RunConfig &c) {
    cmd->add_option("--confidence", c.confidence, "Confidence level")->capture_default_str();
    cmd->add_option("--restarts", c.restarts, "Optimizer restarts per certification")->capture_default_str();
    cmd->add_option("--aggregate", c.aggregate, "worst_event, uniform_average or both")->capture_default_str();
}

// ---- simulate ----------------------------------------------------------------

inline int cmd_simulate(const RunConfig &c, const std::filesystem::path &log_path, std::ostream &out) {
    ProtocolConfig pc = c.protocol();
    DeviceStrategy device = c.device();
    std::ofstream log = open_output(log_path);
    write_round_header(log);
    uint64_t unblocked = 0, detected = 0;
    for_each_round(
        pc, device,
        [&](const RoundRecord &r) {
            write_round(log, r);
            unblocked += r.blocked ? 0 : 1;
            detected += r.b == Outcome::Empty ? 0 : 1;
        },
        c.threads);
    log.close();
    if (!log) {
        throw FileError("error writing " + log_path.string());
    }
    std::ofstream echo = open_output(config_sidecar(log_path));
    write_key_values(echo, simulate_echo(c));
    out << "log=" << log_path.string() << '\n'
        << "rounds=" << pc.n_rounds << '\n'
        << "unblocked_rounds=" << unblocked << '\n'
        << "detected_rounds=" << detected << '\n';
    return kOk;
}

// ---- estimate ----------------------------------------------------------------

inline void report_estimate(std::ostream &out, const Tally &t) {
    auto [raw, det] = conditional_tables(t);
    out << "unblocked_rounds=" << t.unblocked << '\n'
        << "blocked_rounds=" << t.blocked << '\n'
        << "detected_rounds=" << t.detected() << '\n'
        << "observed_efficiency=" << format_double(observed_efficiency(t)) << '\n'
        << "p_prime_av=" << format_double(p_prime_average(det)) << '\n';
    for (unsigned c = 0; c < 8; ++c) {
        Input x(c / 2);
        int z = static_cast<int>(c % 2);
        out << "p_" << x.str() << '_' << z << '=' << format_double(raw.p[c][0]) << ',' << format_double(raw.p[c][1])
            << ',' << format_double(raw.p[c][2]) << '\n';
    }
}

inline int cmd_estimate(const RunConfig &c, const std::filesystem::path &log_path,
                        const std::optional<std::filesystem::path> &bounds_path, std::ostream &out) {
    Tally t = tally_file(log_path);
    out << "# inputs\nlog=" << log_path.string() << "\nconfidence=" << format_double(c.confidence)
        << "\ninterval=" << c.interval << "\n# estimation (raw rows: b=0,b=1,empty)\n";
    report_estimate(out, t);
    if (bounds_path) {
        std::ofstream f = open_output(*bounds_path);
        write_bounds_csv(f, probability_bounds(t, c.confidence, c.interval_method()));
        out << "bounds=" << bounds_path->string() << '\n';
    }
    return kOk;
}

// ---- certify -----------------------------------------------------------------

inline int cmd_certify(const RunConfig &c, const std::filesystem::path &log_path, std::ostream &out) {
    Tally t = tally_file(log_path);
    auto [raw, det] = conditional_tables(t);
    SyncModel model = parse_sync_model(c.sync_model);
    double eta_obs = observed_efficiency(t);

    out << "# inputs\n"
        << "log=" << log_path.string() << '\n'
        << "lambda=" << format_double(c.lambda) << '\n'
        << "confidence=" << format_double(c.confidence) << '\n'
        << "sync-model=" << c.sync_model << '\n'
        << "aggregate=" << c.aggregate << '\n'
        << "restarts=" << c.restarts << '\n'
        << "# estimation\n";
    report_estimate(out, t);

    double pav = p_prime_average(det);
    PrivacyThreshold threshold = privacy_threshold(c.lambda, eta_obs, c.confidence, t.detected(), model);
    PrivacyVerdict verdict = shared_randomness_test(pav, threshold);
    out << "# privacy\n"
        << "threshold=" << format_double(verdict.threshold) << '\n'
        << "margin=" << format_double(verdict.margin) << '\n'
        << "verdict=" << (verdict.pass ? "pass" : "fail") << '\n'
        << "reason=" << verdict.reason << '\n';
    if (!verdict.pass) {
        out << "certified=none\n";
        return kPrivacyFail;
    }

    ProbabilityBounds pb = probability_bounds(t, c.confidence, IntervalMethod::ClopperPearson);
    out << "# bounds (clopper_pearson, simultaneous)\n";
    for (unsigned cell = 0; cell < 8; ++cell) {
        out << "bound_" << Input(cell / 2).str() << '_' << cell % 2 << '=' << format_double(pb.cells[cell].lo) << ','
            << format_double(pb.cells[cell].hi) << '\n';
    }
    ConstraintSet cs = ConstraintSet::from_bounds(pb);
    std::vector<Aggregate> aggregates;
    if (c.aggregate == "both") {
        aggregates = {Aggregate::WorstEvent, Aggregate::UniformAverage};
    } else {
        aggregates = {parse_aggregate(c.aggregate)};
    }
    out << "# certification\n";
    for (Aggregate a : aggregates) {
        CertifyOptions opt;
        opt.aggregate = a;
        opt.restarts = c.restarts;
        opt.threads = c.threads;
        opt.detection_efficiency = eta_obs;
        CertificationResult r = certify_min_entropy(cs, opt);
        std::string name(to_string(a));
        out << "bits_per_event." << name << '=' << format_double(r.bits_per_event) << '\n'
            << "bits_per_round." << name << '=' << format_double(r.bits_per_round) << '\n'
            << "agreeing_restarts." << name << '=' << r.diagnostics.agreeing_restarts << '/'
            << r.diagnostics.restarts << '\n'
            << "cap_binding." << name << '=' << (r.diagnostics.cap_binding ? "true" : "false") << '\n';
    }
    out << "certified=yes\n";
    return kOk;
}

// ---- extract -----------------------------------------------------------------

inline int cmd_extract(const RunConfig &c, const std::filesystem::path &log_path, std::ostream &out,
                       std::ostream &err) {
    std::ifstream in = open_input(log_path);
    RawString s;
    for_each_logged_round(in, [&](const RoundRecord &r) { s.add(r); });
    std::vector<uint8_t> vn = von_neumann(s);
    std::string stem = log_path.stem().string();
    std::filesystem::path raw_path = c.out_dir / (stem + ".raw.bin");
    std::filesystem::path vn_path = c.out_dir / (stem + ".vn.bin");
    std::filesystem::create_directories(c.out_dir);
    write_packed_bits(raw_path, s.bits);
    write_packed_bits(vn_path, vn);
    if (s.size() == 0) {
        err << "warning: no unblocked rounds; the raw string is empty\n";
    }
    out << "raw=" << raw_path.string() << '\n'
        << "raw_bits=" << s.size() << '\n'
        << "raw_detected_0=" << s.detected_zero << '\n'
        << "raw_detected_1=" << s.detected_one << '\n'
        << "raw_empty_as_0=" << s.empty_as_zero << '\n'
        << "extracted=" << vn_path.string() << '\n'
        << "extracted_bits=" << vn.size() << '\n';
    return kOk;
}

// ---- figures -----------------------------------------------------------------

struct FigureArgs {
    std::string id;
    double delta = 1e-4;
    double alpha_min = 0.50;
    double alpha_max = 0.86;
    double alpha_step = 0.005;
    std::vector<std::string> modes{"vector", "worst_case", "average"};
    std::vector<double> etas{0.06, 0.5, 0.001};
    double beta_step = 0.001;
    std::optional<std::filesystem::path> log;
};

inline constexpr const char *kFigureIds = "indicators, thresholds, probabilities";

inline int figure_indicators(const RunConfig &c, const FigureArgs &f, std::ostream &out) {
    std::vector<double> grid = alpha_grid(f.alpha_min, f.alpha_max, f.alpha_step);
    CertifyOptions opt;
    opt.restarts = c.restarts;
    opt.threads = c.threads;
    if (c.aggregate != "both") {
        opt.aggregate = parse_aggregate(c.aggregate);
    }
    for (const auto &m : f.modes) {
        IndicatorMode mode = parse_indicator_mode(m);
        auto curve = indicator_scan(mode, grid, f.delta, opt);
        std::filesystem::path path = c.out_dir / ("indicators_" + m + ".csv");
        std::ofstream file = open_output(path);
        file << "alpha,bits\n";
        for (const auto &p : curve) {
            file << format_double(p.alpha) << ',' << format_double(p.bits) << '\n';
        }
        ZeroCrossing z = zero_crossing(curve);
        out << "curve=" << path.string() << '\n';
        if (z.found) {
            out << "crossing." << m << '=' << format_double(z.last_zero) << ',' << format_double(z.first_positive)
                << '\n';
        } else {
            out << "crossing." << m << "=none\n";
        }
    }
    return kOk;
}

inline int figure_thresholds(const RunConfig &c, const FigureArgs &f, std::ostream &out) {
    SyncModel model = parse_sync_model(c.sync_model);
    std::filesystem::path path = c.out_dir / "thresholds.csv";
    std::ofstream file = open_output(path);
    file << "beta,eta,threshold\n";
    auto steps = static_cast<long>(std::floor(1 / f.beta_step + 1e-9));
    for (double eta : f.etas) {
        for (long i = 0; i < steps; ++i) {
            double beta = static_cast<double>(i) * f.beta_step;
            // The curve is the n -> infinity threshold; no statistical margin.
            PrivacyThreshold t = privacy_threshold(beta, eta, c.confidence, 1, model);
            file << format_double(beta) << ',' << format_double(eta) << ',' << format_double(t.threshold) << '\n';
        }
    }
    out << "thresholds=" << path.string() << '\n';
    return kOk;
}

inline int figure_probabilities(const RunConfig &c, const FigureArgs &f, std::ostream &out) {
    if (!f.log) {
        throw DomainError("figures probabilities needs --log");
    }
    Tally t = tally_file(*f.log);
    ProbabilityBounds pb = probability_bounds(t, c.confidence, c.interval_method());
    std::filesystem::path path = c.out_dir / "probabilities.csv";
    std::ofstream file = open_output(path);
    file << "x,z,p_lo,p_hat,p_hi,n_detected,p_theory\n";
    double theory = std::cos(std::numbers::pi / 8) * std::cos(std::numbers::pi / 8);
    for (unsigned cell = 0; cell < 8; ++cell) {
        const Interval &iv = pb.cells[cell];
        file << Input(cell / 2).str() << ',' << cell % 2 << ',' << format_double(iv.lo) << ','
             << format_double(iv.hat) << ',' << format_double(iv.hi) << ',' << pb.n_detected[cell] << ','
             << format_double(theory) << '\n';
    }
    out << "probabilities=" << path.string() << '\n';
    return kOk;
}

inline int cmd_figures(const RunConfig &c, const FigureArgs &f, std::ostream &out) {
    if (f.id == "indicators") {
        return figure_indicators(c, f, out);
    }
    if (f.id == "thresholds") {
        return figure_thresholds(c, f, out);
    }
    if (f.id == "probabilities") {
        return figure_probabilities(c, f, out);
    }
    throw DomainError("unknown figure id '" + f.id + "' (expected " + kFigureIds + ")");
}

}  // namespace detail

/// Runs one command; `args` excludes the program name. Returns the exit code.
inline int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app("Semi-device-independent QRNG protocol simulator and certifier", "sdiqrng");
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    RunConfig c;
    std::filesystem::path log_path;
    std::optional<std::filesystem::path> bounds_path;
    detail::FigureArgs fig;

    auto *sim = app.add_subcommand("simulate", "Run the protocol and write a round log");
    detail::add_common(sim, c);
    sim->add_option("--lambda", c.lambda, "Blocking threshold")->capture_default_str();
    sim->add_option("--eta", c.eta, "Channel detection efficiency")->capture_default_str();
    sim->add_option("--n", c.n_rounds, "Rounds")->capture_default_str();
    sim->add_option("--seed", c.seed, "Master seed")->required();
    sim->add_option("--strategy", c.strategy, "honest, prng, classical, sync or lemma")->capture_default_str();
    sim->add_option("--sync-model", c.sync_model, "per_block or per_run")->capture_default_str();
    sim->add_option("--hide", c.hide, "Sync attack hides resync rounds as no-detection")->capture_default_str();
    sim->add_option("--out", log_path, "Log file (default <out-dir>/rounds.csv)");

    auto *est = app.add_subcommand("estimate", "Conditional tables and probability bounds of a log");
    detail::add_common(est, c);
    est->add_option("--log", log_path, "Round log")->required();
    est->add_option("--confidence", c.confidence, "Confidence level")->capture_default_str();
    est->add_option("--interval", c.interval, "clopper_pearson or poisson")->capture_default_str();
    est->add_option("--bounds", bounds_path, "Write per-cell bounds CSV here");

    auto *cert = app.add_subcommand("certify", "Privacy test, then min-entropy certification");
    detail::add_common(cert, c);
    cert->add_option("--log", log_path, "Round log")->required();
    cert->add_option("--lambda", c.lambda, "Blocking rate used by the privacy test (default: log's echo, else 0.99)");
    cert->add_option("--sync-model", c.sync_model, "per_block or per_run")->capture_default_str();
    detail::add_certify_options(cert, c);

    auto *ext = app.add_subcommand("extract", "Raw string and von Neumann output as packed bits");
    detail::add_common(ext, c);
    ext->add_option("--log", log_path, "Round log")->required();

    auto *figs = app.add_subcommand("figures", "Emit figure data as CSV");
    detail::add_common(figs, c);
    figs->add_option("id", fig.id, std::string("Figure: ") + detail::kFigureIds)->required();
    figs->add_option("--delta", fig.delta, "Constraint width for indicator curves")->capture_default_str();
    figs->add_option("--alpha-min", fig.alpha_min)->capture_default_str();
    figs->add_option("--alpha-max", fig.alpha_max)->capture_default_str();
    figs->add_option("--alpha-step", fig.alpha_step)->capture_default_str();
    figs->add_option("--modes", fig.modes, "Indicator modes")->delimiter(',')->multi_option_policy(
        CLI::MultiOptionPolicy::TakeAll);
    figs->add_option("--eta", fig.etas, "Efficiencies for the threshold curves")->delimiter(',')->multi_option_policy(
        CLI::MultiOptionPolicy::TakeAll);
    figs->add_option("--beta-step", fig.beta_step)->capture_default_str();
    figs->add_option("--log", fig.log, "Round log for the probabilities figure");
    figs->add_option("--sync-model", c.sync_model, "per_block or per_run")->capture_default_str();
    figs->add_option("--interval", c.interval, "Error bars: clopper_pearson or poisson")->default_str("poisson");
    detail::add_certify_options(figs, c);

    try {
        std::vector<std::string> expanded = detail::expand_config(args);
        // CLI11 consumes a reversed vector.
        std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp &e) {
        out << app.help(app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name());
        return kOk;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const FileError &e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const sdiqrng::ParseError &e) {
        err << "error: config: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (figs->parsed() && figs->count("--interval") == 0) {
            c.interval = "poisson";
        }
        if (c.out_dir.empty()) {
            c.out_dir = detail::default_out_dir();
        }
        if (cert->parsed() && cert->count("--lambda") == 0) {
            std::ifstream echo(detail::config_sidecar(log_path));
            if (echo) {
                KeyValues kv = read_key_values(echo);
                if (auto it = kv.find("lambda"); it != kv.end()) {
                    c.lambda = std::stod(it->second);
                }
            }
        }
        c.validate();
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (sim->parsed()) {
            if (log_path.empty()) {
                log_path = c.out_dir / "rounds.csv";
            }
            return detail::cmd_simulate(c, log_path, out);
        }
        if (est->parsed()) {
            return detail::cmd_estimate(c, log_path, bounds_path, out);
        }
        if (cert->parsed()) {
            return detail::cmd_certify(c, log_path, out);
        }
        if (ext->parsed()) {
            return detail::cmd_extract(c, log_path, out, err);
        }
        return detail::cmd_figures(c, fig, out);
    } catch (const NonConvergence &e) {
        err << "error: optimizer did not converge: " << e.what() << '\n';
        return kNonConvergence;
    } catch (const sdiqrng::ParseError &e) {
        err << "error: parse: " << e.what() << '\n';
        return kData;
    } catch (const InsufficientData &e) {
        err << "error: insufficient data: " << e.what() << '\n';
        return kData;
    } catch (const InfeasibleConstraints &e) {
        err << "error: " << e.what() << '\n';
        return kData;
    } catch (const FileError &e) {
        err << "error: " << e.what() << '\n';
        return kData;
    } catch (const DomainError &e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace sdiqrng::cli

#endif
