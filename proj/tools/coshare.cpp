#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "coshare/collaboration.hpp"
#include "coshare/errors.hpp"
#include "coshare/event.hpp"
#include "coshare/experiment.hpp"
#include "coshare/stats.hpp"
#include "coshare/synth.hpp"
#include "coshare/text.hpp"

namespace {

using namespace coshare;

// ---- shared plumbing -------------------------------------------------

Dataset load_dataset(const std::string& path, const FormatDescriptor& format = {}) {
    if (path == "-") return parse_log(std::cin, format).dataset;
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return parse_log(in, format).dataset;
}

// Writes through either a file or stdout ("-").
class OutputTarget {
public:
    explicit OutputTarget(const std::string& target) {
        if (target == "-") return;
        file_.open(target);
        if (!file_) throw DataError("cannot write " + target);
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

std::ofstream open_file(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

// ---- ingest ----------------------------------------------------------

struct IngestFlags {
    std::string input;
    std::string output = "-";
    bool epoch = false;
    bool keep_reserved = false;
    bool keep_small = false;
    std::vector<int> columns = {0, 1, 2, 3};
    std::string delimiter = ",";
};

int cmd_ingest(const IngestFlags& flags) {
    if (flags.columns.size() != 4)
        throw ConfigError("--columns needs contributor,source,port,timestamp");
    if (flags.delimiter.size() != 1)
        throw ConfigError("--delimiter must be one character");
    FormatDescriptor format;
    format.col_contributor = flags.columns[0];
    format.col_source = flags.columns[1];
    format.col_port = flags.columns[2];
    format.col_timestamp = flags.columns[3];
    format.delimiter = flags.delimiter[0];
    if (flags.epoch) format.ts_format = FormatDescriptor::TimestampFormat::epoch_seconds;

    std::unique_ptr<std::ifstream> file;
    std::istream* in = &std::cin;
    if (flags.input != "-") {
        file = std::make_unique<std::ifstream>(flags.input);
        if (!*file) throw DataError("cannot open " + flags.input);
        in = file.get();
    }
    ParseResult parsed = parse_log(*in, format);
    std::cerr << "parsed " << parsed.report.accepted << " of " << parsed.report.lines
              << " lines";
    for (const auto& [reason, count] : parsed.report.rejected_by_reason)
        std::cerr << "; " << reason << ": " << count;
    std::cerr << '\n';

    Dataset dataset = std::move(parsed.dataset);
    if (!flags.keep_reserved) {
        auto [cleaned, report] = clean(dataset);
        dataset = std::move(cleaned);
        std::cerr << "cleaned " << report.removed() << " events (" << report.non_routable
                  << " reserved-block, " << report.invalid_port << " bad-port)\n";
    }
    if (!flags.keep_small) {
        auto [filtered, report] = filter_contributors(dataset);
        dataset = std::move(filtered);
        std::cerr << "dropped " << report.single_event_contributors
                  << " single-event and " << report.single_day_contributors
                  << " single-day contributors (" << report.events_removed << " events)\n";
    }

    OutputTarget out(flags.output);
    serialize(dataset, out.stream());
    std::cerr << "kept " << dataset.size() << " events from " << dataset.victim_count()
              << " contributors over " << dataset.days() << " days\n";
    return 0;
}

// ---- synth -----------------------------------------------------------

struct SynthFlags {
    SynthConfig config;
    std::string output = "-";
};

int cmd_synth(const SynthFlags& flags) {
    Dataset dataset = generate(flags.config);
    OutputTarget out(flags.output);
    serialize(dataset, out.stream());

    SynthFidelityReport fidelity = describe(dataset);
    std::cerr << "generated " << fidelity.events << " events: " << fidelity.victims
              << " victims, " << fidelity.attackers << " sources, " << fidelity.days
              << " days\n";
    std::cerr << "victim mix rare/light/heavy: " << format_double(fidelity.victim_rare_frac)
              << '/' << format_double(fidelity.victim_light_frac) << '/'
              << format_double(fidelity.victim_heavy_frac) << '\n';
    return 0;
}

// ---- stats -----------------------------------------------------------

struct StatsFlags {
    std::string input;
    std::string out_dir = ".";
    std::vector<std::string> which = {"all"};
    int day = 0; // 0 = busiest day
    std::string time_unit = "hours";
};

void write_cdf(const std::filesystem::path& path, const EmpiricalCdf& cdf) {
    auto out = open_file(path);
    out << "value,cdf\n";
    const std::size_t n = cdf.size();
    for (std::size_t i = 0; i < n; ++i)
        out << format_double(cdf.samples()[i]) << ','
            << format_double(static_cast<double>(i + 1) / static_cast<double>(n)) << '\n';
}

int cmd_stats(const StatsFlags& flags) {
    bool all = false, daily = false, entropy = false, interarrival = false, shared = false;
    for (const std::string& w : flags.which) {
        if (w == "all") all = true;
        else if (w == "daily") daily = true;
        else if (w == "entropy") entropy = true;
        else if (w == "interarrival") interarrival = true;
        else if (w == "shared-unique") shared = true;
        else throw ConfigError("unknown statistic: " + w);
    }
    if (flags.time_unit != "hours" && flags.time_unit != "seconds")
        throw ConfigError("--time-unit must be hours or seconds");

    Dataset dataset = load_dataset(flags.input);
    const std::filesystem::path dir(flags.out_dir);
    std::filesystem::create_directories(dir);

    if (all || daily) {
        auto out = open_file(dir / "daily.csv");
        out << "day,total_attacks,unique_targets,unique_sources\n";
        for (const DailyStats& row : daily_stats(dataset))
            out << row.day << ',' << row.total_attacks << ',' << row.unique_targets << ','
                << row.unique_sources << '\n';
    }
    if (all || entropy) {
        write_cdf(dir / "entropy_port.csv", entropy_cdf(dataset, EntropyField::port));
        write_cdf(dir / "entropy_source.csv", entropy_cdf(dataset, EntropyField::source));
        write_cdf(dir / "entropy_target.csv", entropy_cdf(dataset, EntropyField::target));
    }
    if (all || interarrival) {
        const TimeUnit unit =
            flags.time_unit == "hours" ? TimeUnit::hours : TimeUnit::seconds;
        const std::pair<Grouping, const char*> groupings[] = {
            {Grouping::all, "all"},
            {Grouping::same_ip, "same_ip"},
            {Grouping::same_slash24, "same_slash24"},
            {Grouping::same_slash8, "same_slash8"},
        };
        for (const auto& [grouping, name] : groupings)
            write_cdf(dir / ("interarrival_" + std::string(name) + "_" + flags.time_unit +
                             ".csv"),
                      interarrival_cdf(dataset, grouping, unit));
    }
    if (all || shared) {
        int day = flags.day;
        if (day == 0) { // busiest day by attack count
            std::size_t best = 0;
            for (const DailyStats& row : daily_stats(dataset))
                if (row.total_attacks > best) {
                    best = row.total_attacks;
                    day = row.day;
                }
        }
        const std::pair<Perspective, const char*> views[] = {
            {Perspective::victim, "victim"},
            {Perspective::source, "source"},
        };
        for (const auto& [perspective, name] : views) {
            auto out = open_file(dir / ("shared_unique_" + std::string(name) + ".csv"));
            out << "kind,value,cdf\n";
            if (day == 0) continue; // empty dataset: headers only
            SharedUniqueCdfs cdfs = shared_unique_cdf(dataset, day, perspective);
            const std::pair<const EmpiricalCdf*, const char*> kinds[] = {
                {&cdfs.common, "common"}, {&cdfs.unique, "unique"}};
            for (const auto& [cdf, kind] : kinds) {
                const std::size_t n = cdf->size();
                for (std::size_t i = 0; i < n; ++i)
                    out << kind << ',' << format_double(cdf->samples()[i]) << ','
                        << format_double(static_cast<double>(i + 1) /
                                         static_cast<double>(n))
                        << '\n';
            }
        }
    }
    std::cerr << "stats written to " << dir.string() << '\n';
    return 0;
}

// ---- experiment / sweep-alpha ----------------------------------------

struct ExperimentFlags {
    ExperimentConfig config;
    std::vector<std::string> metrics = {"intersection_size"};
    std::vector<std::string> strategies = {"intersection_with_data", "union_with_data"};
    std::string mode = "plaintext";
    std::string policy = "history_before";
    std::size_t budget = 0; // 0 = threshold listing only
};

void add_experiment_options(CLI::App* cmd, ExperimentFlags& flags) {
    ExperimentConfig& c = flags.config;
    cmd->add_option("--dataset", c.dataset_path,
                    "attack log CSV; omitted = synthesize via the --synth-* knobs");
    cmd->add_option("--synth-victims", c.synth.n_victims, "synthetic victim count");
    cmd->add_option("--synth-attackers", c.synth.n_attackers, "synthetic attacker pool");
    cmd->add_option("--synth-days", c.synth.n_days, "synthetic day span");
    cmd->add_option("--synth-hitlists", c.synth.hitlist_count, "coordinated target lists");
    cmd->add_option("--synth-hitlist-size", c.synth.hitlist_size, "victims per hit-list");
    cmd->add_option("--synth-seed", c.synth.rng_seed, "generator seed");

    cmd->add_option("--sample-size", c.sample_size, "victims sampled per iteration");
    cmd->add_option("--iterations", c.iterations, "independent iterations");
    cmd->add_option("--alpha", c.prediction.alpha, "EWMA smoothing factor");
    cmd->add_option("--t-train", c.prediction.t_train, "training window, days");
    cmd->add_option("--t-test", c.prediction.t_test, "test window, days");
    cmd->add_option("--threshold", c.prediction.threshold, "minimum score to list");
    cmd->add_option("--budget", flags.budget, "max watchlist length (0 = unlimited)");
    cmd->add_option("--metrics", flags.metrics, "benefit metrics")
        ->delimiter(',')
        ->check(CLI::IsMember({"intersection_size", "jaccard", "pearson", "cosine"}));
    cmd->add_option("--strategies", flags.strategies, "sharing strategies")
        ->delimiter(',')
        ->check(CLI::IsMember(
            {"intersection", "intersection_with_data", "union_with_data"}));
    cmd->add_option("--mode", flags.mode, "benefit computation mode")
        ->check(CLI::IsMember({"plaintext", "private"}));
    cmd->add_option("--window-policy", flags.policy, "benefit/sharing window")
        ->check(CLI::IsMember({"history_before", "train_window"}));
    cmd->add_option("--pair-fraction", c.pair_fraction, "fraction of pairs to partner");
    cmd->add_option("--refresh-days", c.partner_refresh_days,
                    "re-select partners every N days");
    cmd->add_option("--first-day", c.first_day, "first prediction day");
    cmd->add_option("--last-day", c.last_day, "last prediction day");
    cmd->add_option("--wol-length", c.wol_length, "worst-offender list length");
    cmd->add_option("--seed", c.rng_seed, "experiment seed");
    cmd->add_option("--threads", c.threads, "worker threads (0 = hardware)");
    cmd->add_option("--out", c.output_dir, "report directory");
}

ExperimentConfig resolve(const ExperimentFlags& flags) {
    ExperimentConfig config = flags.config;
    config.metrics.clear();
    for (const std::string& name : flags.metrics) {
        auto metric = benefit_metric_from(name);
        if (!metric) throw ConfigError("unknown metric: " + name);
        config.metrics.push_back(*metric);
    }
    config.strategies.clear();
    for (const std::string& name : flags.strategies) {
        auto strategy = sharing_strategy_from(name);
        if (!strategy) throw ConfigError("unknown strategy: " + name);
        config.strategies.push_back(*strategy);
    }
    auto mode = benefit_mode_from(flags.mode);
    if (!mode) throw ConfigError("unknown mode: " + flags.mode);
    config.mode = *mode;
    auto policy = window_policy_from(flags.policy);
    if (!policy) throw ConfigError("unknown window policy: " + flags.policy);
    config.window_policy = *policy;
    if (flags.budget > 0) config.prediction.budget = flags.budget;
    return config;
}

int cmd_experiment(const ExperimentFlags& flags) {
    ExperimentConfig config = resolve(flags);
    RunReport report = run_experiment(config);
    write_report(report, config.output_dir);

    for (const SummaryRow& row : report.summary)
        if (row.scope == "collaborators")
            std::cerr << row.metric << " + " << row.strategy << ": mean I "
                      << (row.improvement.defined
                              ? format_double(row.improvement.mean)
                              : std::string("undefined"))
                      << " over " << row.improvement.defined << " victim-days\n";
    std::cerr << "report written to " << config.output_dir << " in "
              << format_double(report.wall_seconds) << "s\n";
    std::cout << config.output_dir << '\n';
    return 0;
}

struct SweepFlags {
    ExperimentFlags experiment;
    std::vector<double> alphas;
    std::string output = "-";
};

int cmd_sweep(const SweepFlags& flags) {
    ExperimentConfig config = resolve(flags.experiment);
    Dataset dataset = config.dataset_path.empty() ? generate(config.synth)
                                                  : load_dataset(config.dataset_path);
    SweepResult result = sweep_alpha(dataset, config, flags.alphas);
    if (result.duplicates_dropped)
        std::cerr << "warning: duplicate alpha values were dropped\n";
    OutputTarget out(flags.output);
    sweep_csv(out.stream(), result);
    return 0;
}

// ---- bench -----------------------------------------------------------

struct BenchFlags {
    std::vector<std::size_t> sizes = {1, 10, 100, 200};
    std::size_t repetitions = 5;
    std::size_t projection_n = 100;
    std::string output = "-";
};

int cmd_bench(const BenchFlags& flags) {
    std::vector<BenchRow> rows =
        bench_protocols(flags.sizes, flags.repetitions, flags.projection_n);
    OutputTarget out(flags.output);
    bench_csv(out.stream(), rows);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"collaborative predictive blacklisting simulator"};
    app.require_subcommand(0, 1);
    app.set_config("--config", "",
                   "key=value file; a [subcommand] section binds that subcommand's "
                   "options, and command-line flags win");

    IngestFlags ingest_flags;
    CLI::App* ingest = app.add_subcommand(
        "ingest", "parse, clean, and canonicalize an attack log");
    ingest->add_option("input", ingest_flags.input, "log file, or - for stdin")
        ->required();
    ingest->add_option("-o,--out", ingest_flags.output, "output file, or - for stdout");
    ingest->add_flag("--epoch", ingest_flags.epoch, "timestamps are epoch seconds");
    ingest->add_option("--columns", ingest_flags.columns,
                       "contributor,source,port,timestamp column indexes")
        ->delimiter(',');
    ingest->add_option("--delimiter", ingest_flags.delimiter, "field separator");
    ingest->add_flag("--keep-reserved", ingest_flags.keep_reserved,
                     "skip reserved-block cleaning");
    ingest->add_flag("--keep-small-contributors", ingest_flags.keep_small,
                     "skip the small-contributor filter");

    SynthFlags synth_flags;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic attack log");
    synth->add_option("--victims", synth_flags.config.n_victims, "victim count");
    synth->add_option("--attackers", synth_flags.config.n_attackers, "attacker pool");
    synth->add_option("--days", synth_flags.config.n_days, "day span");
    synth->add_option("--hitlists", synth_flags.config.hitlist_count,
                      "coordinated target lists");
    synth->add_option("--hitlist-size", synth_flags.config.hitlist_size,
                      "victims per hit-list");
    synth->add_option("--burst-window", synth_flags.config.burst_window_seconds,
                      "sweep burst window, seconds");
    synth->add_option("--seed", synth_flags.config.rng_seed, "generator seed");
    synth->add_option("-o,--out", synth_flags.output, "output file, or - for stdout");

    StatsFlags stats_flags;
    CLI::App* stats = app.add_subcommand("stats", "dataset statistics as CSV files");
    stats->add_option("input", stats_flags.input, "log file, or - for stdin")->required();
    stats->add_option("--out", stats_flags.out_dir, "output directory");
    stats->add_option("--which", stats_flags.which,
                      "all, daily, entropy, interarrival, shared-unique")
        ->delimiter(',');
    stats->add_option("--day", stats_flags.day,
                      "day for the shared/unique split (default: busiest)");
    stats->add_option("--time-unit", stats_flags.time_unit,
                      "interarrival unit: hours or seconds");

    ExperimentFlags experiment_flags;
    CLI::App* experiment = app.add_subcommand(
        "experiment", "run the collaboration experiment and write its report");
    add_experiment_options(experiment, experiment_flags);

    SweepFlags sweep_flags;
    CLI::App* sweep = app.add_subcommand(
        "sweep-alpha", "baseline-only prediction sweep over alpha values");
    add_experiment_options(sweep, sweep_flags.experiment);
    sweep->add_option("--alphas", sweep_flags.alphas, "alpha values to sweep")
        ->delimiter(',')
        ->required();
    sweep->add_option("--sweep-out", sweep_flags.output, "CSV file, or - for stdout");

    BenchFlags bench_flags;
    CLI::App* bench = app.add_subcommand(
        "bench", "wall-clock micro-benchmark of the private protocols");
    bench->add_option("--sizes", bench_flags.sizes, "set sizes")->delimiter(',');
    bench->add_option("--reps", bench_flags.repetitions, "repetitions per size");
    bench->add_option("--projection-n", bench_flags.projection_n,
                      "party count for the all-pairs projection");
    bench->add_option("-o,--out", bench_flags.output, "output file, or - for stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand(ingest)) return cmd_ingest(ingest_flags);
        if (app.got_subcommand(synth)) return cmd_synth(synth_flags);
        if (app.got_subcommand(stats)) return cmd_stats(stats_flags);
        if (app.got_subcommand(experiment)) return cmd_experiment(experiment_flags);
        if (app.got_subcommand(sweep)) return cmd_sweep(sweep_flags);
        if (app.got_subcommand(bench)) return cmd_bench(bench_flags);
        std::cerr << app.help();
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const InputError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}
