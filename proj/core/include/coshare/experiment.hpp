#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coshare/collaboration.hpp"
#include "coshare/evaluation.hpp"
#include "coshare/event.hpp"
#include "coshare/predictor.hpp"
#include "coshare/synth.hpp"

namespace coshare {

/// The full simulation: sample victims, roll prediction over a day
/// range, estimate pairwise benefits, partner the top pairs, share,
/// re-predict on the augmented logs, and score everything against the
/// next day's ground truth.

struct ExperimentConfig {
    // Dataset source: a log file, or the synthetic generator when the
    // path is empty.
    std::string dataset_path;
    SynthConfig synth;

    std::size_t sample_size = 100;
    std::size_t iterations = 100;
    PredictionParams prediction; // alpha 0.9, 5-day training, 1-day test

    std::vector<BenefitMetric> metrics = {BenefitMetric::intersection_size};
    std::vector<SharingStrategy> strategies = {SharingStrategy::intersection_with_data,
                                               SharingStrategy::union_with_data};
    BenefitMode mode = BenefitMode::plaintext;
    WindowPolicy window_policy = WindowPolicy::history_before;
    double pair_fraction = 0.01;
    int partner_refresh_days = 1; // re-select partners every this many days

    int first_day = 6;
    int last_day = 12;

    std::size_t wol_length = 10; // k for the worst-offender reference lists
    std::uint64_t rng_seed = 1;
    unsigned threads = 0; // 0 = hardware concurrency
    std::string output_dir = "runs/latest";

    /// Raises ConfigError on out-of-range fields; `dataset_victims` is
    /// checked against sample_size.
    void validate(std::size_t dataset_victims) const;
};

/// One victim scored on one day under one arm: "baseline", "lwol",
/// "gwol", or a collaboration arm where metric/strategy are set.
struct VictimDayOutcome {
    std::size_t iteration = 0;
    int day = 0;
    std::string victim;
    std::string arm;
    std::string metric;   // empty outside collaboration arms
    std::string strategy; // empty outside collaboration arms
    ConfusionCounts counts;
    bool collaborator = false;
};

struct BoundsRow {
    std::size_t iteration = 0;
    BoundsReport report;
};

/// Per-day partnership outcome for one benefit metric.
struct RoundRow {
    std::size_t iteration = 0;
    int day = 0;
    std::string metric;
    std::size_t collaborators = 0;
    double mean_coalition_size = 0.0;
    std::optional<double> stability; // vs the previous day's round
};

/// Plot-ready series point: mean over iterations of a per-day value.
struct SeriesPoint {
    std::string series;
    int day = 0;
    double value = 0.0;
};

/// Mean ROC position of one arm, pooled over every defined victim-day.
struct RocSummary {
    std::string arm;
    double mean_fpr = 0.0;
    double mean_tpr = 0.0;
    std::size_t points = 0;
};

struct RunReport {
    ExperimentConfig config; // as run
    std::vector<VictimDayOutcome> outcomes;
    std::vector<BoundsRow> bound_rows;
    std::vector<RoundRow> round_rows;
    std::vector<SeriesPoint> series;
    std::vector<SummaryRow> summary;
    std::vector<RocSummary> roc;
    double wall_seconds = 0.0; // timing only; never part of the CSVs
};

/// Runs the experiment on an already-loaded dataset. Deterministic for
/// a fixed config: iteration i draws its sample with seed
/// rng_seed + i, and results are merged in iteration order regardless
/// of scheduling.
RunReport run_experiment(const Dataset& dataset, const ExperimentConfig& config);

/// Resolves the dataset source (file or synthesis) and runs.
RunReport run_experiment(const ExperimentConfig& config);

/// Writes confusion.csv, bounds.csv, rounds.csv, series.csv,
/// summary.csv, roc.csv, and manifest.json under `dir`.
void write_report(const RunReport& report, const std::filesystem::path& dir);

/// Prediction-parameter sweep: baseline-only runs, one per alpha, each
/// reporting the mean over iterations of the per-day summed true
/// positives. Every alpha is evaluated under both listing rules:
/// "threshold" as configured, and "budget" (top-k with k = wol_length).
struct SweepRow {
    double alpha = 0.0;
    std::string listing; // "threshold" or "budget"
    int day = 0;
    double mean_tp = 0.0;
    double mean_fp = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool duplicates_dropped = false;
};

SweepResult sweep_alpha(const Dataset& dataset, const ExperimentConfig& config,
                        std::vector<double> alphas);

void sweep_csv(std::ostream& out, const SweepResult& result);

/// Wall-clock micro-benchmark of the private protocols on random
/// equal-size inputs, plus the projected cost of running one protocol
/// across all pairs of `projection_n` parties.
struct BenchRow {
    std::string protocol;
    std::size_t set_size = 0;
    std::size_t repetitions = 0;
    double mean_ms = 0.0;
    double median_ms = 0.0;
    double all_pairs_seconds = 0.0;
};

std::vector<BenchRow> bench_protocols(const std::vector<std::size_t>& sizes,
                                      std::size_t repetitions,
                                      std::size_t projection_n = 100);

void bench_csv(std::ostream& out, std::span<const BenchRow> rows);

} // namespace coshare
