#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coshare/collaboration.hpp"
#include "coshare/event.hpp"
#include "coshare/predictor.hpp"

namespace coshare {

/// Prediction scoring: confusion counts over a per-victim universe,
/// the local/global upper bounds any prediction is judged against, the
/// improvement ratio, ROC coordinates, coalition statistics, and the
/// two significance tests used on the aggregate results.

struct ConfusionCounts {
    std::string victim;
    int test_day = 0;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::size_t universe_size = 0;
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Scores a watchlist against the sources that actually attacked.
/// `actual` and `universe` are sorted unique address lists; every
/// listed or actual source must lie in the universe (InputError
/// otherwise). tn fills up the rest of the universe.
ConfusionCounts score(const Watchlist& watchlist, const std::vector<Ipv4>& actual,
                      const std::vector<Ipv4>& universe);

/// Ceilings for correct predictions on one victim-day: lub counts test
/// attackers the victim itself saw in training; gub counts those any
/// sampled victim saw in training. No prediction trained on the
/// sampled population's data can beat gub; one trained only on local
/// data cannot beat lub.
struct BoundsReport {
    std::string victim;
    int test_day = 0;
    std::size_t lub = 0;
    std::size_t gub = 0;
    friend bool operator==(const BoundsReport&, const BoundsReport&) = default;
};

BoundsReport bounds(const Dataset& sampled, const std::string& victim, int test_day,
                    const PredictionParams& params);

/// (tp_collab - tp_baseline) / tp_baseline; empty when the baseline
/// made no correct prediction (the ratio is undefined, not zero).
std::optional<double> improvement(std::size_t tp_baseline, std::size_t tp_collab);

/// Aggregate of improvement ratios: mean/min/max over the defined ones
/// plus how many were undefined and left out.
struct ImprovementStats {
    std::size_t defined = 0;
    std::size_t undefined = 0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

ImprovementStats summarize_improvements(std::span<const std::optional<double>> values);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

/// (fp/(fp+tn), tp/(tp+fn)); empty when either denominator is zero.
std::optional<RocPoint> roc_point(const ConfusionCounts& counts);

/// Mean, over victims with partners in `earlier`, of the fraction of
/// those partners kept in `later`. Empty when no victim had partners.
std::optional<double> coalition_stability(const PartnershipRound& earlier,
                                          const PartnershipRound& later);

/// How many victims collaborate in a round, and their mean coalition
/// size (zero when nobody collaborates).
struct RoundStats {
    std::size_t collaborators = 0;
    double mean_coalition_size = 0.0;
};

RoundStats round_stats(const PartnershipRound& round);

/// Welch's unequal-variance t test, two-sided. Each sample needs at
/// least two values and nonzero variance (InputError otherwise).
struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Pearson's chi-square test of independence on a contingency table
/// (rows are groups, columns are outcomes). Requires a rectangular
/// table, at least 2x2, non-negative entries, and strictly positive
/// expected counts (InputError otherwise).
struct ChiSquareResult {
    double chi2 = 0.0;
    int df = 0;
    double p = 1.0;
};

ChiSquareResult chi_square_test(const std::vector<std::vector<double>>& table);

/// Distribution building blocks behind the p-values, exposed so their
/// accuracy is directly testable against reference values.
double regularized_incomplete_beta(double a, double b, double x);
double regularized_gamma_q(double s, double x);

/// CSV writers: one row per victim-day.
void confusion_csv(std::ostream& out, std::span<const ConfusionCounts> rows);
void bounds_csv(std::ostream& out, std::span<const BoundsReport> rows);
/// fpr/tpr columns are left empty where the point is undefined.
void roc_csv(std::ostream& out, std::span<const ConfusionCounts> rows);

/// One line of the final comparison: a benefit metric + sharing
/// strategy and what they achieved. `scope` labels which population the
/// improvement covers ("all" or "collaborators").
struct SummaryRow {
    std::string metric;
    std::string strategy;
    std::string scope;
    ImprovementStats improvement;
    double mean_collaborators = 0.0;
    double mean_coalition_size = 0.0;
};

void summary_csv(std::ostream& out, std::span<const SummaryRow> rows);

} // namespace coshare
