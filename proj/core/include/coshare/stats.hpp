#pragma once

#include <cstdint>
#include <vector>

#include "coshare/event.hpp"

namespace coshare {

/// Per-day traffic summary.
struct DailyStats {
    int day = 0;
    std::size_t total_attacks = 0;
    std::size_t unique_targets = 0;
    std::size_t unique_sources = 0;
};

/// Exact empirical CDF: the full sorted sample, no binning.
class EmpiricalCdf {
public:
    EmpiricalCdf() = default;
    explicit EmpiricalCdf(std::vector<double> samples);

    /// F(x) = fraction of samples <= x. Zero for an empty CDF.
    double operator()(double x) const;

    const std::vector<double>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    double min() const;
    double max() const;
    /// Linear-interpolation quantile of order q in [0,1].
    double quantile(double q) const;

private:
    std::vector<double> samples_; // sorted ascending
};

/// One DailyStats per day 1..T; empty for an empty dataset.
std::vector<DailyStats> daily_stats(const Dataset& dataset);

/// Per-entity common/unique source split for one day.
struct SharedUniqueCdfs {
    EmpiricalCdf common;
    EmpiricalCdf unique;
};

enum class Perspective { victim, source };

/// For each entity active on `day`: how many of its counterpart
/// addresses that day are shared with at least one other entity
/// (common) versus seen by it alone (unique). perspective=victim splits
/// each victim's sources; perspective=source splits each source's
/// victims. Raises InputError for a day outside the dataset span.
SharedUniqueCdfs shared_unique_cdf(const Dataset& dataset, int day, Perspective perspective);

enum class EntropyField { port, source, target };

/// Shannon entropy (base 2) of the field's per-day distribution; one
/// sample per day with at least one attack.
EmpiricalCdf entropy_cdf(const Dataset& dataset, EntropyField field);

enum class Grouping { all, same_ip, same_slash24, same_slash8 };
enum class TimeUnit { seconds, hours };

/// Gaps between consecutive events within each group, as a CDF. Groups
/// with fewer than two events contribute no samples.
EmpiricalCdf interarrival_cdf(const Dataset& dataset, Grouping grouping, TimeUnit unit);

} // namespace coshare
