#include "coshare/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "json.hpp"

#include "coshare/errors.hpp"
#include "coshare/protocol.hpp"
#include "coshare/rng.hpp"
#include "coshare/text.hpp"

namespace coshare {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string arm_name(BenefitMetric metric, SharingStrategy strategy) {
    return std::string(to_string(metric)) + "|" + std::string(to_string(strategy));
}

// One victim-day improvement datum, kept per collaboration arm so the
// all-entities and collaborators-only views can both be aggregated.
struct ImprovementRow {
    int day = 0;
    std::string metric;
    std::string strategy;
    bool collaborator = false;
    std::optional<double> value;
};

struct IterationResult {
    std::vector<VictimDayOutcome> outcomes;
    std::vector<BoundsRow> bound_rows;
    std::vector<RoundRow> round_rows;
    std::vector<ImprovementRow> improvements;
};

std::vector<Ipv4> sorted_union(std::vector<Ipv4> ips) {
    std::sort(ips.begin(), ips.end());
    ips.erase(std::unique(ips.begin(), ips.end()), ips.end());
    return ips;
}

IterationResult run_iteration(const Dataset& dataset, const ExperimentConfig& config,
                              std::size_t index) {
    IterationResult result;
    Rng rng(config.rng_seed + index);

    const std::vector<std::string> all = dataset.victims();
    std::vector<std::string> sampled;
    for (std::size_t i : rng.sample_indices(all.size(), config.sample_size))
        sampled.push_back(all[i]);
    std::sort(sampled.begin(), sampled.end());

    // Restrict to the sampled victims but keep the parent timeline so
    // day numbers agree across iterations.
    std::vector<std::size_t> positions;
    for (const std::string& v : sampled) {
        auto span = dataset.victim_events(v);
        positions.insert(positions.end(), span.begin(), span.end());
    }
    std::sort(positions.begin(), positions.end());
    std::vector<AttackEvent> sub_events;
    sub_events.reserve(positions.size());
    for (std::size_t p : positions) sub_events.push_back(dataset.events()[p]);
    const Dataset sub(std::move(sub_events), dataset.timeline());
    const Timeline& timeline = sub.timeline();

    std::map<std::string, std::vector<AttackEvent>> logs;
    for (const std::string& v : sampled) logs.emplace(v, victim_log(sub, v));

    const PredictionParams& params = config.prediction;
    std::map<BenefitMetric, PartnershipRound> current_round, previous_round;

    for (int day = config.first_day; day <= config.last_day; ++day) {
        const DayRange train = training_window(params, day);
        const DayRange test{day, day + params.t_test - 1};

        std::map<std::string, std::vector<Ipv4>> actual;
        std::vector<Ipv4> universe;
        for (const std::string& v : sampled) {
            actual.emplace(v, source_set(sub, v, test).ips);
            const auto& train_ips = source_set(sub, v, train).ips;
            universe.insert(universe.end(), train_ips.begin(), train_ips.end());
            universe.insert(universe.end(), actual[v].begin(), actual[v].end());
        }
        universe = sorted_union(std::move(universe));

        for (const std::string& v : sampled)
            result.bound_rows.push_back({index, bounds(sub, v, day, params)});

        auto push_outcome = [&](const std::string& v, std::string arm, std::string metric,
                                std::string strategy, const Watchlist& wl,
                                bool collaborator) {
            VictimDayOutcome row;
            row.iteration = index;
            row.day = day;
            row.victim = v;
            row.arm = std::move(arm);
            row.metric = std::move(metric);
            row.strategy = std::move(strategy);
            row.counts = score(wl, actual[v], universe);
            row.collaborator = collaborator;
            result.outcomes.push_back(std::move(row));
            return result.outcomes.back().counts;
        };

        std::map<std::string, std::size_t> baseline_tp;
        std::map<std::string, ConfusionCounts> baseline_counts;
        for (const std::string& v : sampled) {
            Watchlist wl = predict(ewma_scores(logs[v], timeline, params, day), params, v, day);
            const ConfusionCounts& c = push_outcome(v, "baseline", "", "", wl, false);
            baseline_tp[v] = c.tp;
            baseline_counts[v] = c;
        }
        for (const std::string& v : sampled)
            push_outcome(v, "lwol", "", "",
                         lwol(logs[v], timeline, train, config.wol_length, v, day), false);
        const Watchlist global = gwol(sub.events(), timeline, train, config.wol_length, day);
        for (const std::string& v : sampled)
            push_outcome(v, "gwol", "", "", Watchlist{v, day, global.entries}, false);

        const DayRange share_window = benefit_window(config.window_policy, day,
                                                     params.t_train);
        for (BenefitMetric metric : config.metrics) {
            const bool refresh = current_round.find(metric) == current_round.end() ||
                                 (day - config.first_day) % config.partner_refresh_days == 0;
            if (refresh) {
                BenefitMatrix matrix = benefit_matrix(sub, metric, config.mode, day,
                                                      config.window_policy, params.t_train);
                PartnershipRound round = select_partners(matrix, config.pair_fraction,
                                                         config.strategies.front());
                auto it = current_round.find(metric);
                if (it != current_round.end()) previous_round[metric] = std::move(it->second);
                current_round[metric] = std::move(round);
            } else {
                previous_round[metric] = current_round[metric];
            }
            const PartnershipRound& round = current_round[metric];

            RoundRow round_row;
            round_row.iteration = index;
            round_row.day = day;
            round_row.metric = std::string(to_string(metric));
            const RoundStats stats = round_stats(round);
            round_row.collaborators = stats.collaborators;
            round_row.mean_coalition_size = stats.mean_coalition_size;
            auto prev = previous_round.find(metric);
            if (prev != previous_round.end())
                round_row.stability = coalition_stability(prev->second, round);
            result.round_rows.push_back(std::move(round_row));

            for (SharingStrategy strategy : config.strategies) {
                std::map<std::string, std::vector<SharedPayload>> received;
                for (const VictimPair& pair : round.pairs) {
                    ShareResult exchange = share(logs[pair.a], logs[pair.b], timeline,
                                                 strategy, share_window);
                    received[pair.a].push_back(std::move(exchange.to_first));
                    received[pair.b].push_back(std::move(exchange.to_second));
                }

                const std::string metric_name(to_string(metric));
                const std::string strategy_name(to_string(strategy));
                const std::string arm = arm_name(metric, strategy);
                for (const std::string& v : sampled) {
                    const auto* partners = round.partners_of(v);
                    const bool collaborator = partners && !partners->empty();
                    ConfusionCounts counts;
                    if (collaborator) {
                        AugmentedLog aug = augment(v, logs[v], received[v]);
                        Watchlist wl = predict(ewma_scores(aug.events(), timeline, params, day),
                                               params, v, day);
                        counts = push_outcome(v, arm, metric_name, strategy_name, wl, true);
                    } else {
                        // No partners means nothing received: the run is
                        // the baseline run.
                        VictimDayOutcome row;
                        row.iteration = index;
                        row.day = day;
                        row.victim = v;
                        row.arm = arm;
                        row.metric = metric_name;
                        row.strategy = strategy_name;
                        row.counts = baseline_counts[v];
                        row.collaborator = false;
                        counts = row.counts;
                        result.outcomes.push_back(std::move(row));
                    }
                    result.improvements.push_back({day, metric_name, strategy_name,
                                                   collaborator,
                                                   improvement(baseline_tp[v], counts.tp)});
                }
            }
        }
    }
    return result;
}

// Accumulators for the per-day series and the run summary.
struct DayAccumulator {
    double tp = 0.0, fp = 0.0;
    double fpr_sum = 0.0, tpr_sum = 0.0;
    std::size_t roc_points = 0;
    std::size_t rows = 0;
};

void series_for_arm(std::vector<SeriesPoint>& series, const std::string& arm,
                    const std::map<int, DayAccumulator>& days, std::size_t iterations) {
    for (const char* name : {"tp", "fp"})
        for (const auto& [day, acc] : days)
            series.push_back({std::string(name) + ":" + arm, day,
                              (name[0] == 't' ? acc.tp : acc.fp) /
                                  static_cast<double>(iterations)});
    for (const auto& [day, acc] : days)
        if (acc.roc_points > 0)
            series.push_back({"fpr:" + arm, day,
                              acc.fpr_sum / static_cast<double>(acc.roc_points)});
    for (const auto& [day, acc] : days)
        if (acc.roc_points > 0)
            series.push_back({"tpr:" + arm, day,
                              acc.tpr_sum / static_cast<double>(acc.roc_points)});
}

} // namespace

void ExperimentConfig::validate(std::size_t dataset_victims) const {
    if (sample_size < 2)
        throw ConfigError("experiment: sample_size must be at least 2");
    if (sample_size > dataset_victims)
        throw ConfigError("experiment: sample_size " + std::to_string(sample_size) +
                          " exceeds the dataset's " + std::to_string(dataset_victims) +
                          " victims");
    if (iterations < 1) throw ConfigError("experiment: iterations must be at least 1");
    prediction.validate();
    if (metrics.empty()) throw ConfigError("experiment: no benefit metric configured");
    if (strategies.empty()) throw ConfigError("experiment: no sharing strategy configured");
    if (!(pair_fraction > 0.0) || pair_fraction > 1.0)
        throw ConfigError("experiment: pair_fraction must be in (0, 1]");
    if (partner_refresh_days < 1)
        throw ConfigError("experiment: partner_refresh_days must be at least 1");
    if (first_day > last_day)
        throw ConfigError("experiment: day range is empty");
    if (first_day - prediction.t_train < 1)
        throw ConfigError("experiment: day " + std::to_string(first_day) + " leaves fewer than " +
                          std::to_string(prediction.t_train) + " training days of history");
    if (wol_length < 1)
        throw ConfigError("experiment: wol_length must be at least 1");
}

RunReport run_experiment(const Dataset& dataset, const ExperimentConfig& config) {
    config.validate(dataset.victim_count());
    const auto started = std::chrono::steady_clock::now();

    std::vector<IterationResult> results(config.iterations);
    unsigned workers = config.threads > 0 ? config.threads
                                          : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(
        std::min<std::size_t>(workers, config.iterations));

    if (workers <= 1) {
        for (std::size_t i = 0; i < config.iterations; ++i)
            results[i] = run_iteration(dataset, config, i);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_lock;
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= config.iterations) return;
                try {
                    results[i] = run_iteration(dataset, config, i);
                } catch (...) {
                    std::lock_guard guard(failure_lock);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    RunReport report;
    report.config = config;
    std::vector<ImprovementRow> improvements;
    for (IterationResult& r : results) {
        report.outcomes.insert(report.outcomes.end(),
                               std::make_move_iterator(r.outcomes.begin()),
                               std::make_move_iterator(r.outcomes.end()));
        report.bound_rows.insert(report.bound_rows.end(),
                                 std::make_move_iterator(r.bound_rows.begin()),
                                 std::make_move_iterator(r.bound_rows.end()));
        report.round_rows.insert(report.round_rows.end(),
                                 std::make_move_iterator(r.round_rows.begin()),
                                 std::make_move_iterator(r.round_rows.end()));
        improvements.insert(improvements.end(),
                            std::make_move_iterator(r.improvements.begin()),
                            std::make_move_iterator(r.improvements.end()));
    }

    // Per-day series and pooled ROC means, one entry per arm in a fixed
    // order: the reference arms, then each metric x strategy.
    std::vector<std::string> arms = {"baseline", "lwol", "gwol"};
    for (BenefitMetric m : config.metrics)
        for (SharingStrategy s : config.strategies) arms.push_back(arm_name(m, s));

    std::map<std::string, std::map<int, DayAccumulator>> per_arm;
    for (const VictimDayOutcome& row : report.outcomes) {
        DayAccumulator& acc = per_arm[row.arm][row.day];
        acc.tp += static_cast<double>(row.counts.tp);
        acc.fp += static_cast<double>(row.counts.fp);
        ++acc.rows;
        if (auto point = roc_point(row.counts)) {
            acc.fpr_sum += point->fpr;
            acc.tpr_sum += point->tpr;
            ++acc.roc_points;
        }
    }
    for (const std::string& arm : arms) {
        series_for_arm(report.series, arm, per_arm[arm], config.iterations);

        RocSummary roc;
        roc.arm = arm;
        for (const auto& [day, acc] : per_arm[arm]) {
            roc.mean_fpr += acc.fpr_sum;
            roc.mean_tpr += acc.tpr_sum;
            roc.points += acc.roc_points;
        }
        if (roc.points > 0) {
            roc.mean_fpr /= static_cast<double>(roc.points);
            roc.mean_tpr /= static_cast<double>(roc.points);
        }
        report.roc.push_back(std::move(roc));
    }

    // Improvement series (all entities and collaborators only).
    for (BenefitMetric m : config.metrics) {
        for (SharingStrategy s : config.strategies) {
            const std::string arm = arm_name(m, s);
            const std::string metric_name(to_string(m));
            const std::string strategy_name(to_string(s));
            std::map<int, std::pair<double, std::size_t>> all_days, collab_days;
            for (const ImprovementRow& row : improvements) {
                if (row.metric != metric_name || row.strategy != strategy_name) continue;
                if (!row.value) continue;
                all_days[row.day].first += *row.value;
                ++all_days[row.day].second;
                if (row.collaborator) {
                    collab_days[row.day].first += *row.value;
                    ++collab_days[row.day].second;
                }
            }
            for (const auto& [day, sum_count] : all_days)
                report.series.push_back({"mean_i_all:" + arm, day,
                                         sum_count.first /
                                             static_cast<double>(sum_count.second)});
            for (const auto& [day, sum_count] : collab_days)
                report.series.push_back({"mean_i_collaborators:" + arm, day,
                                         sum_count.first /
                                             static_cast<double>(sum_count.second)});
        }
    }

    // Partnership series per metric.
    for (BenefitMetric m : config.metrics) {
        const std::string name(to_string(m));
        std::map<int, std::pair<double, std::size_t>> size_days, collab_days, stab_days;
        for (const RoundRow& row : report.round_rows) {
            if (row.metric != name) continue;
            collab_days[row.day].first += static_cast<double>(row.collaborators);
            ++collab_days[row.day].second;
            size_days[row.day].first += row.mean_coalition_size;
            ++size_days[row.day].second;
            if (row.stability) {
                stab_days[row.day].first += *row.stability;
                ++stab_days[row.day].second;
            }
        }
        for (const auto& [day, sc] : collab_days)
            report.series.push_back({"collaborators:" + name, day,
                                     sc.first / static_cast<double>(sc.second)});
        for (const auto& [day, sc] : size_days)
            report.series.push_back({"coalition_size:" + name, day,
                                     sc.first / static_cast<double>(sc.second)});
        for (const auto& [day, sc] : stab_days)
            report.series.push_back({"stability:" + name, day,
                                     sc.first / static_cast<double>(sc.second)});
    }

    // Run summary per metric x strategy x scope.
    for (BenefitMetric m : config.metrics) {
        const std::string metric_name(to_string(m));
        double collab_sum = 0.0, size_sum = 0.0;
        std::size_t round_count = 0;
        for (const RoundRow& row : report.round_rows) {
            if (row.metric != metric_name) continue;
            collab_sum += static_cast<double>(row.collaborators);
            size_sum += row.mean_coalition_size;
            ++round_count;
        }
        const double mean_collaborators =
            round_count ? collab_sum / static_cast<double>(round_count) : 0.0;
        const double mean_coalition =
            round_count ? size_sum / static_cast<double>(round_count) : 0.0;

        for (SharingStrategy s : config.strategies) {
            const std::string strategy_name(to_string(s));
            std::vector<std::optional<double>> all_values, collab_values;
            for (const ImprovementRow& row : improvements) {
                if (row.metric != metric_name || row.strategy != strategy_name) continue;
                all_values.push_back(row.value);
                if (row.collaborator) collab_values.push_back(row.value);
            }
            auto push_summary = [&](const char* scope,
                                    const std::vector<std::optional<double>>& values) {
                SummaryRow row;
                row.metric = metric_name;
                row.strategy = strategy_name;
                row.scope = scope;
                row.improvement = summarize_improvements(values);
                row.mean_collaborators = mean_collaborators;
                row.mean_coalition_size = mean_coalition;
                report.summary.push_back(std::move(row));
            };
            push_summary("all", all_values);
            push_summary("collaborators", collab_values);
        }
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

RunReport run_experiment(const ExperimentConfig& config) {
    if (config.dataset_path.empty()) return run_experiment(generate(config.synth), config);
    std::ifstream in(config.dataset_path);
    if (!in) throw DataError("cannot open dataset: " + config.dataset_path);
    ParseResult parsed = parse_log(in);
    return run_experiment(parsed.dataset, config);
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

} // namespace

void write_report(const RunReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    {
        auto out = open_csv(dir / "confusion.csv");
        out << "iteration,day,victim,arm,metric,strategy,tp,fp,tn,fn,universe_size,"
               "collaborator\n";
        for (const VictimDayOutcome& row : report.outcomes)
            out << row.iteration << ',' << row.day << ',' << row.victim << ',' << row.arm
                << ',' << row.metric << ',' << row.strategy << ',' << row.counts.tp << ','
                << row.counts.fp << ',' << row.counts.tn << ',' << row.counts.fn << ','
                << row.counts.universe_size << ',' << (row.collaborator ? 1 : 0) << '\n';
    }
    {
        auto out = open_csv(dir / "bounds.csv");
        out << "iteration,day,victim,lub,gub\n";
        for (const BoundsRow& row : report.bound_rows)
            out << row.iteration << ',' << row.report.test_day << ',' << row.report.victim
                << ',' << row.report.lub << ',' << row.report.gub << '\n';
    }
    {
        auto out = open_csv(dir / "rounds.csv");
        out << "iteration,day,metric,collaborators,mean_coalition_size,stability\n";
        for (const RoundRow& row : report.round_rows) {
            out << row.iteration << ',' << row.day << ',' << row.metric << ','
                << row.collaborators << ',' << format_double(row.mean_coalition_size) << ',';
            if (row.stability) out << format_double(*row.stability);
            out << '\n';
        }
    }
    {
        auto out = open_csv(dir / "series.csv");
        out << "series,day,value\n";
        for (const SeriesPoint& point : report.series)
            out << point.series << ',' << point.day << ',' << format_double(point.value)
                << '\n';
    }
    {
        auto out = open_csv(dir / "summary.csv");
        summary_csv(out, report.summary);
    }
    {
        auto out = open_csv(dir / "roc.csv");
        out << "arm,mean_fpr,mean_tpr,points\n";
        for (const RocSummary& row : report.roc)
            out << row.arm << ',' << format_double(row.mean_fpr) << ','
                << format_double(row.mean_tpr) << ',' << row.points << '\n';
    }

    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["seed_rule"] = "iteration i uses rng_seed + i";
    const ExperimentConfig& c = report.config;
    nlohmann::json cfg;
    cfg["dataset_path"] = c.dataset_path;
    if (c.dataset_path.empty()) {
        cfg["synth"] = {{"n_victims", c.synth.n_victims},
                        {"n_attackers", c.synth.n_attackers},
                        {"n_days", c.synth.n_days},
                        {"hitlist_count", c.synth.hitlist_count},
                        {"hitlist_size", c.synth.hitlist_size},
                        {"rng_seed", c.synth.rng_seed}};
    }
    cfg["sample_size"] = c.sample_size;
    cfg["iterations"] = c.iterations;
    cfg["alpha"] = c.prediction.alpha;
    cfg["t_train"] = c.prediction.t_train;
    cfg["t_test"] = c.prediction.t_test;
    cfg["threshold"] = c.prediction.threshold;
    if (c.prediction.budget) cfg["budget"] = *c.prediction.budget;
    std::vector<std::string> metric_names, strategy_names;
    for (BenefitMetric m : c.metrics) metric_names.emplace_back(to_string(m));
    for (SharingStrategy s : c.strategies) strategy_names.emplace_back(to_string(s));
    cfg["metrics"] = metric_names;
    cfg["strategies"] = strategy_names;
    cfg["mode"] = std::string(to_string(c.mode));
    cfg["window_policy"] = std::string(to_string(c.window_policy));
    cfg["pair_fraction"] = c.pair_fraction;
    cfg["partner_refresh_days"] = c.partner_refresh_days;
    cfg["first_day"] = c.first_day;
    cfg["last_day"] = c.last_day;
    cfg["wol_length"] = c.wol_length;
    cfg["rng_seed"] = c.rng_seed;
    manifest["config"] = cfg;
    manifest["outputs"] = {"confusion.csv", "bounds.csv", "rounds.csv",
                           "series.csv",    "summary.csv", "roc.csv"};
    manifest["timing"] = {{"wall_seconds", report.wall_seconds}};

    std::ofstream out(dir / "manifest.json");
    if (!out) throw DataError("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
}

SweepResult sweep_alpha(const Dataset& dataset, const ExperimentConfig& config,
                        std::vector<double> alphas) {
    config.validate(dataset.victim_count());
    if (alphas.empty()) throw ConfigError("sweep: no alpha values given");
    for (double a : alphas)
        if (!(a > 0.0) || a > 1.0)
            throw ConfigError("sweep: alpha " + format_double(a) + " outside (0, 1]");

    SweepResult result;
    std::vector<double> unique_alphas;
    for (double a : alphas) {
        if (std::find(unique_alphas.begin(), unique_alphas.end(), a) != unique_alphas.end())
            result.duplicates_dropped = true;
        else
            unique_alphas.push_back(a);
    }

    const std::vector<std::string> all = dataset.victims();
    for (double alpha : unique_alphas) {
        for (const char* listing : {"threshold", "budget"}) {
            PredictionParams params = config.prediction;
            params.alpha = alpha;
            if (listing[0] == 'b') {
                params.threshold = 0.0;
                params.budget = config.wol_length;
            }

            std::map<int, std::pair<double, double>> day_totals; // day -> (tp, fp)
            for (std::size_t i = 0; i < config.iterations; ++i) {
                Rng rng(config.rng_seed + i);
                std::vector<std::string> sampled;
                for (std::size_t idx : rng.sample_indices(all.size(), config.sample_size))
                    sampled.push_back(all[idx]);
                std::sort(sampled.begin(), sampled.end());

                for (const std::string& v : sampled) {
                    std::vector<AttackEvent> log = victim_log(dataset, v);
                    for (int day = config.first_day; day <= config.last_day; ++day) {
                        Watchlist wl = predict(
                            ewma_scores(log, dataset.timeline(), params, day), params, v, day);
                        const DayRange test{day, day + params.t_test - 1};
                        const std::vector<Ipv4>& hit = source_set(dataset, v, test).ips;
                        std::size_t tp = 0;
                        for (const WatchlistEntry& e : wl.entries)
                            if (std::binary_search(hit.begin(), hit.end(), e.source_ip)) ++tp;
                        day_totals[day].first += static_cast<double>(tp);
                        day_totals[day].second += static_cast<double>(wl.entries.size() - tp);
                    }
                }
            }
            for (const auto& [day, totals] : day_totals)
                result.rows.push_back({alpha, listing, day,
                                       totals.first / static_cast<double>(config.iterations),
                                       totals.second /
                                           static_cast<double>(config.iterations)});
        }
    }
    return result;
}

void sweep_csv(std::ostream& out, const SweepResult& result) {
    out << "alpha,listing,day,mean_tp,mean_fp\n";
    for (const SweepRow& row : result.rows)
        out << format_double(row.alpha) << ',' << row.listing << ',' << row.day << ','
            << format_double(row.mean_tp) << ',' << format_double(row.mean_fp) << '\n';
}

namespace {

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

} // namespace

std::vector<BenchRow> bench_protocols(const std::vector<std::size_t>& sizes,
                                      std::size_t repetitions, std::size_t projection_n) {
    if (repetitions < 1) throw ConfigError("bench: repetitions must be at least 1");
    for (std::size_t size : sizes)
        if (size > 1u << 20) throw ConfigError("bench: set size too large");

    std::vector<BenchRow> rows;
    const double pair_count =
        static_cast<double>(projection_n) * static_cast<double>(projection_n - 1) / 2.0;

    for (std::size_t size : sizes) {
        // Inputs are fixed per size so repetitions time the protocol,
        // not the generator; about half the elements overlap.
        Rng rng(8800 + size);
        auto draw_exact = [&rng](std::size_t n, std::vector<Ipv4> seeded) {
            std::vector<Ipv4> ips = std::move(seeded);
            while (ips.size() < n) {
                ips.push_back(static_cast<Ipv4>(rng.next()));
                std::sort(ips.begin(), ips.end());
                ips.erase(std::unique(ips.begin(), ips.end()), ips.end());
            }
            return ips;
        };
        std::vector<Ipv4> server_ips = draw_exact(size, {});
        std::vector<Ipv4> shared(server_ips.begin(),
                                 server_ips.begin() + static_cast<std::ptrdiff_t>(size / 2));
        std::vector<Ipv4> client_ips = draw_exact(size, std::move(shared));
        AssociatedData records;
        std::int64_t stamp = 0;
        for (Ipv4 ip : server_ips) records[ip].push_back({++stamp, 22});
        const SourceSet server_set{"server", server_ips, DayRange{0, 0}};
        const SourceSet client_set{"client", client_ips, DayRange{0, 0}};

        struct Arm {
            const char* name;
            int which; // 0 psi_ca, 1 psi, 2 psi_dt, 3 pjs
        };
        for (const Arm& arm : {Arm{"psi_ca", 0}, Arm{"psi", 1}, Arm{"psi_dt", 2},
                               Arm{"pjs", 3}}) {
            if (arm.which == 3 && size == 0) continue; // jaccard of two empty sets
            std::vector<double> times_ms;
            for (std::size_t rep = 0; rep < repetitions; ++rep) {
                const auto start = std::chrono::steady_clock::now();
                DuplexChannel channel;
                PartySession client = PartySession::client(client_set);
                PartySession server = arm.which == 2
                                          ? PartySession::server_with_data(server_set, records)
                                          : PartySession::server(server_set);
                switch (arm.which) {
                case 0: psi_ca(server, client, channel); break;
                case 1: psi(server, client, channel); break;
                case 2: psi_dt(server, client, channel); break;
                default: pjs(server, client, channel); break;
                }
                times_ms.push_back(std::chrono::duration<double, std::milli>(
                                       std::chrono::steady_clock::now() - start)
                                       .count());
            }
            BenchRow row;
            row.protocol = arm.name;
            row.set_size = size;
            row.repetitions = repetitions;
            row.mean_ms = std::accumulate(times_ms.begin(), times_ms.end(), 0.0) /
                          static_cast<double>(times_ms.size());
            row.median_ms = median(times_ms);
            row.all_pairs_seconds = row.median_ms * pair_count / 1000.0;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void bench_csv(std::ostream& out, std::span<const BenchRow> rows) {
    out << "protocol,set_size,repetitions,mean_ms,median_ms,all_pairs_seconds\n";
    for (const BenchRow& row : rows)
        out << row.protocol << ',' << row.set_size << ',' << row.repetitions << ','
            << format_double(row.mean_ms) << ',' << format_double(row.median_ms) << ','
            << format_double(row.all_pairs_seconds) << '\n';
}

} // namespace coshare
