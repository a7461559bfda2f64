#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coshare/event.hpp"
#include "coshare/similarity.hpp"

namespace coshare {

/// The collaboration pipeline: estimate pairwise benefit, pick the
/// top-scoring partnerships, exchange data under a sharing strategy,
/// and merge what each victim received into its training log.

enum class BenefitMetric { intersection_size, jaccard, pearson, cosine };
/// plaintext computes metrics directly; private_protocol routes each
/// pair through the set protocols (identical values, leakage bounded
/// by their transcripts).
enum class BenefitMode { plaintext, private_protocol };
/// history_before: all days before the current one; train_window: only
/// the t_train days a predictor will look at.
enum class WindowPolicy { history_before, train_window };
enum class SharingStrategy { intersection, intersection_with_data, union_with_data };

std::string_view to_string(BenefitMetric metric);
std::string_view to_string(BenefitMode mode);
std::string_view to_string(WindowPolicy policy);
std::string_view to_string(SharingStrategy strategy);
std::optional<BenefitMetric> benefit_metric_from(std::string_view name);
std::optional<BenefitMode> benefit_mode_from(std::string_view name);
std::optional<WindowPolicy> window_policy_from(std::string_view name);
std::optional<SharingStrategy> sharing_strategy_from(std::string_view name);

/// Days a policy admits when standing on `day`.
DayRange benefit_window(WindowPolicy policy, int day, int t_train);

/// Symmetric pairwise benefit scores. A cell is empty when the metric
/// is undefined for that pair (constant or empty vectors); empty cells
/// are never selected.
struct BenefitMatrix {
    std::vector<std::string> victims; // row/column order
    std::vector<std::optional<double>> cells; // n*n, row-major
    BenefitMetric metric = BenefitMetric::intersection_size;
    BenefitMode mode = BenefitMode::plaintext;
    int computed_at = 0; // day the estimate stands on

    std::size_t size() const { return victims.size(); }
    const std::optional<double>& at(std::size_t i, std::size_t j) const {
        return cells[i * victims.size() + j];
    }
};

/// Scores every unordered victim pair on the window the policy gives.
/// Pearson/cosine agree a vector range per pair under `ranges`.
/// Raises InputError with fewer than two victims.
BenefitMatrix benefit_matrix(const Dataset& dataset, BenefitMetric metric, BenefitMode mode,
                             int day, WindowPolicy policy, int t_train,
                             const RangePolicy& ranges = RangePolicy::observed_blocks());

/// Unordered pair of contributor ids, stored with a < b.
struct VictimPair {
    std::string a, b;
    friend bool operator==(const VictimPair&, const VictimPair&) = default;
    friend auto operator<=>(const VictimPair&, const VictimPair&) = default;
};

/// One day's partnership selection and the strategy its pairs will use.
struct PartnershipRound {
    int day = 0;
    SharingStrategy strategy = SharingStrategy::union_with_data;
    std::vector<VictimPair> pairs; // sorted
    std::map<std::string, std::vector<std::string>> coalitions; // victim -> sorted partners
    bool all_scores_missing = false; // nothing was selectable

    const std::vector<std::string>* partners_of(const std::string& victim) const;
};

/// Picks the ceil(fraction * n(n-1)/2) highest-scoring pairs; score
/// ties break by lexicographic pair id, empty cells are skipped, and
/// the count is capped at the number of scoreable pairs. fraction must
/// lie in (0, 1] (ConfigError otherwise).
PartnershipRound select_partners(const BenefitMatrix& matrix, double fraction,
                                 SharingStrategy strategy);

/// What one party hands its partner: addresses only under the plain
/// intersection strategy, events under the *_with_data strategies.
struct SharedPayload {
    std::vector<Ipv4> common_sources;
    std::vector<AttackEvent> events;
};

struct ShareResult {
    SharedPayload to_first;  // what the first log's owner receives
    SharedPayload to_second; // what the second log's owner receives
};

/// Executes one pairwise exchange over the events dated inside
/// `window`:
///   intersection           -> both sides get the common source list;
///   intersection_with_data -> each side gets the counterpart's events
///                             from common sources;
///   union_with_data        -> each side gets all counterpart events.
ShareResult share(std::span<const AttackEvent> log_a, std::span<const AttackEvent> log_b,
                  const Timeline& timeline, SharingStrategy strategy, DayRange window);

struct AugmentedEvent {
    AttackEvent event;
    bool foreign = false; // received through sharing, never re-shared
    friend bool operator==(const AugmentedEvent&, const AugmentedEvent&) = default;
};

/// One victim's training log after merging partner payloads.
struct AugmentedLog {
    std::string victim;
    std::vector<AugmentedEvent> entries;

    /// Flat event view for scoring (native and foreign alike).
    std::vector<AttackEvent> events() const;
    std::size_t foreign_count() const;
};

/// Merges received events into the victim's own log, dropping any
/// received event whose (source_ip, timestamp, port) key is already
/// present (own events always win; earlier payloads beat later ones).
AugmentedLog augment(std::string victim, std::span<const AttackEvent> own,
                     std::span<const SharedPayload> received);

/// Materializes one contributor's events in dataset order.
std::vector<AttackEvent> victim_log(const Dataset& dataset, const std::string& victim);

/// Audit rows (victim_a, victim_b, metric, score, selected); score is
/// empty for undefined cells, selected reflects `round` when given.
void benefit_csv(std::ostream& out, const BenefitMatrix& matrix,
                 const PartnershipRound* round = nullptr);

} // namespace coshare
