#include "coshare/collaboration.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <tuple>

#include "coshare/errors.hpp"
#include "coshare/protocol.hpp"
#include "coshare/text.hpp"

namespace coshare {

std::string_view to_string(BenefitMetric metric) {
    switch (metric) {
    case BenefitMetric::intersection_size: return "intersection_size";
    case BenefitMetric::jaccard: return "jaccard";
    case BenefitMetric::pearson: return "pearson";
    case BenefitMetric::cosine: return "cosine";
    }
    return "?";
}

std::string_view to_string(BenefitMode mode) {
    return mode == BenefitMode::plaintext ? "plaintext" : "private";
}

std::string_view to_string(WindowPolicy policy) {
    return policy == WindowPolicy::history_before ? "history_before" : "train_window";
}

std::string_view to_string(SharingStrategy strategy) {
    switch (strategy) {
    case SharingStrategy::intersection: return "intersection";
    case SharingStrategy::intersection_with_data: return "intersection_with_data";
    case SharingStrategy::union_with_data: return "union_with_data";
    }
    return "?";
}

std::optional<BenefitMetric> benefit_metric_from(std::string_view name) {
    for (auto m : {BenefitMetric::intersection_size, BenefitMetric::jaccard,
                   BenefitMetric::pearson, BenefitMetric::cosine})
        if (name == to_string(m)) return m;
    return std::nullopt;
}

std::optional<BenefitMode> benefit_mode_from(std::string_view name) {
    for (auto m : {BenefitMode::plaintext, BenefitMode::private_protocol})
        if (name == to_string(m)) return m;
    return std::nullopt;
}

std::optional<WindowPolicy> window_policy_from(std::string_view name) {
    for (auto p : {WindowPolicy::history_before, WindowPolicy::train_window})
        if (name == to_string(p)) return p;
    return std::nullopt;
}

std::optional<SharingStrategy> sharing_strategy_from(std::string_view name) {
    for (auto s : {SharingStrategy::intersection, SharingStrategy::intersection_with_data,
                   SharingStrategy::union_with_data})
        if (name == to_string(s)) return s;
    return std::nullopt;
}

DayRange benefit_window(WindowPolicy policy, int day, int t_train) {
    if (policy == WindowPolicy::train_window) return DayRange{day - t_train, day - 1};
    return DayRange{1, day - 1};
}

namespace {

std::optional<double> plaintext_cell(const SourceSet& a, const SourceSet& b,
                                     BenefitMetric metric, const RangePolicy& ranges) {
    try {
        switch (metric) {
        case BenefitMetric::intersection_size:
            return static_cast<double>(intersection_size(a, b));
        case BenefitMetric::jaccard:
            return jaccard(a, b);
        case BenefitMetric::pearson:
        case BenefitMetric::cosine: {
            IpRange range = agree_range(a, b, ranges);
            BinaryAttackVector u = to_vector(a, range);
            BinaryAttackVector v = to_vector(b, range);
            return metric == BenefitMetric::pearson ? pearson(u, v) : cosine(u, v);
        }
        }
    } catch (const InputError&) {
        // Undefined for this pair (empty or constant vectors); the cell
        // stays empty and select_partners skips it.
    }
    return std::nullopt;
}

std::optional<double> private_cell(const SourceSet& a, const SourceSet& b,
                                   BenefitMetric metric, const RangePolicy& ranges) {
    try {
        switch (metric) {
        case BenefitMetric::intersection_size: {
            auto server = PartySession::server(a);
            auto client = PartySession::client(b);
            DuplexChannel channel;
            return static_cast<double>(psi_ca(server, client, channel));
        }
        case BenefitMetric::jaccard: {
            auto server = PartySession::server(a);
            auto client = PartySession::client(b);
            DuplexChannel channel;
            return pjs(server, client, channel);
        }
        case BenefitMetric::pearson:
        case BenefitMetric::cosine: {
            IpRange range = agree_range(a, b, ranges);
            BinaryAttackVector u = to_vector(a, range);
            BinaryAttackVector v = to_vector(b, range);
            return simulated_private_correlation(u, v,
                                                 metric == BenefitMetric::pearson
                                                     ? CorrelationMetric::pearson
                                                     : CorrelationMetric::cosine);
        }
        }
    } catch (const InputError&) {
    }
    return std::nullopt;
}

} // namespace

BenefitMatrix benefit_matrix(const Dataset& dataset, BenefitMetric metric, BenefitMode mode,
                             int day, WindowPolicy policy, int t_train,
                             const RangePolicy& ranges) {
    BenefitMatrix matrix;
    matrix.victims = dataset.victims();
    matrix.metric = metric;
    matrix.mode = mode;
    matrix.computed_at = day;
    const std::size_t n = matrix.victims.size();
    if (n < 2) throw InputError("benefit_matrix: need at least two victims");
    matrix.cells.assign(n * n, std::nullopt);

    DayRange window = benefit_window(policy, day, t_train);
    std::vector<SourceSet> sets;
    sets.reserve(n);
    for (const std::string& victim : matrix.victims)
        sets.push_back(source_set(dataset, victim, window));

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            std::optional<double> cell =
                mode == BenefitMode::plaintext
                    ? plaintext_cell(sets[i], sets[j], metric, ranges)
                    : private_cell(sets[i], sets[j], metric, ranges);
            matrix.cells[i * n + j] = cell;
            matrix.cells[j * n + i] = cell;
        }
    }
    return matrix;
}

const std::vector<std::string>* PartnershipRound::partners_of(const std::string& victim) const {
    auto it = coalitions.find(victim);
    return it == coalitions.end() ? nullptr : &it->second;
}

PartnershipRound select_partners(const BenefitMatrix& matrix, double fraction,
                                 SharingStrategy strategy) {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw ConfigError("select_partners: fraction must be in (0, 1]");

    const std::size_t n = matrix.size();
    struct Candidate {
        double score;
        VictimPair pair;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (matrix.at(i, j)) {
                VictimPair pair{matrix.victims[i], matrix.victims[j]};
                if (pair.b < pair.a) std::swap(pair.a, pair.b);
                candidates.push_back(Candidate{*matrix.at(i, j), std::move(pair)});
            }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.pair < y.pair;
    });

    const std::size_t total_pairs = n * (n - 1) / 2;
    std::size_t want =
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total_pairs)));
    want = std::min(want, candidates.size());

    PartnershipRound round;
    round.day = matrix.computed_at;
    round.strategy = strategy;
    round.all_scores_missing = candidates.empty();
    for (std::size_t k = 0; k < want; ++k) round.pairs.push_back(candidates[k].pair);
    std::sort(round.pairs.begin(), round.pairs.end());
    for (const VictimPair& pair : round.pairs) {
        round.coalitions[pair.a].push_back(pair.b);
        round.coalitions[pair.b].push_back(pair.a);
    }
    for (auto& [victim, partners] : round.coalitions)
        std::sort(partners.begin(), partners.end());
    return round;
}

namespace {

std::vector<AttackEvent> window_events(std::span<const AttackEvent> log,
                                       const Timeline& timeline, DayRange window) {
    std::vector<AttackEvent> out;
    for (const AttackEvent& e : log)
        if (window.contains(timeline.day_of(e.timestamp))) out.push_back(e);
    return out;
}

std::vector<Ipv4> sources_of(const std::vector<AttackEvent>& events) {
    std::vector<Ipv4> ips;
    ips.reserve(events.size());
    for (const AttackEvent& e : events) ips.push_back(e.source_ip);
    std::sort(ips.begin(), ips.end());
    ips.erase(std::unique(ips.begin(), ips.end()), ips.end());
    return ips;
}

std::vector<AttackEvent> filter_by_source(const std::vector<AttackEvent>& events,
                                          const std::vector<Ipv4>& allowed) {
    std::vector<AttackEvent> out;
    for (const AttackEvent& e : events)
        if (std::binary_search(allowed.begin(), allowed.end(), e.source_ip))
            out.push_back(e);
    return out;
}

} // namespace

ShareResult share(std::span<const AttackEvent> log_a, std::span<const AttackEvent> log_b,
                  const Timeline& timeline, SharingStrategy strategy, DayRange window) {
    std::vector<AttackEvent> a_events = window_events(log_a, timeline, window);
    std::vector<AttackEvent> b_events = window_events(log_b, timeline, window);

    ShareResult result;
    switch (strategy) {
    case SharingStrategy::intersection: {
        std::vector<Ipv4> a_ips = sources_of(a_events);
        std::vector<Ipv4> b_ips = sources_of(b_events);
        std::vector<Ipv4> common;
        std::set_intersection(a_ips.begin(), a_ips.end(), b_ips.begin(), b_ips.end(),
                              std::back_inserter(common));
        result.to_first.common_sources = common;
        result.to_second.common_sources = std::move(common);
        break;
    }
    case SharingStrategy::intersection_with_data: {
        std::vector<Ipv4> a_ips = sources_of(a_events);
        std::vector<Ipv4> b_ips = sources_of(b_events);
        std::vector<Ipv4> common;
        std::set_intersection(a_ips.begin(), a_ips.end(), b_ips.begin(), b_ips.end(),
                              std::back_inserter(common));
        result.to_first.events = filter_by_source(b_events, common);
        result.to_second.events = filter_by_source(a_events, common);
        break;
    }
    case SharingStrategy::union_with_data:
        result.to_first.events = std::move(b_events);
        result.to_second.events = std::move(a_events);
        break;
    }
    return result;
}

std::vector<AttackEvent> AugmentedLog::events() const {
    std::vector<AttackEvent> out;
    out.reserve(entries.size());
    for (const AugmentedEvent& e : entries) out.push_back(e.event);
    return out;
}

std::size_t AugmentedLog::foreign_count() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(),
                      [](const AugmentedEvent& e) { return e.foreign; }));
}

AugmentedLog augment(std::string victim, std::span<const AttackEvent> own,
                     std::span<const SharedPayload> received) {
    AugmentedLog log;
    log.victim = std::move(victim);
    log.entries.reserve(own.size());

    std::set<std::tuple<Ipv4, std::int64_t, int>> seen;
    for (const AttackEvent& e : own) {
        seen.emplace(e.source_ip, e.timestamp, e.target_port);
        log.entries.push_back(AugmentedEvent{e, false});
    }
    for (const SharedPayload& payload : received)
        for (const AttackEvent& e : payload.events)
            if (seen.emplace(e.source_ip, e.timestamp, e.target_port).second)
                log.entries.push_back(AugmentedEvent{e, true});

    std::sort(log.entries.begin(), log.entries.end(),
              [](const AugmentedEvent& x, const AugmentedEvent& y) {
                  return std::tie(x.event.timestamp, x.event.source_ip, x.event.target_port,
                                  x.foreign, x.event.contributor) <
                         std::tie(y.event.timestamp, y.event.source_ip, y.event.target_port,
                                  y.foreign, y.event.contributor);
              });
    return log;
}

std::vector<AttackEvent> victim_log(const Dataset& dataset, const std::string& victim) {
    std::vector<AttackEvent> log;
    auto positions = dataset.victim_events(victim);
    log.reserve(positions.size());
    for (std::size_t pos : positions) log.push_back(dataset.events()[pos]);
    return log;
}

void benefit_csv(std::ostream& out, const BenefitMatrix& matrix,
                 const PartnershipRound* round) {
    out << "victim_a,victim_b,metric,score,selected\n";
    const std::size_t n = matrix.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            VictimPair pair{matrix.victims[i], matrix.victims[j]};
            if (pair.b < pair.a) std::swap(pair.a, pair.b);
            bool selected = round && std::binary_search(round->pairs.begin(),
                                                        round->pairs.end(), pair);
            out << pair.a << ',' << pair.b << ',' << to_string(matrix.metric) << ',';
            if (matrix.at(i, j)) out << format_double(*matrix.at(i, j));
            out << ',' << (selected ? 1 : 0) << '\n';
        }
    }
}

} // namespace coshare
