#include "coshare/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <unordered_set>

#include "coshare/errors.hpp"
#include "coshare/rng.hpp"
#include "coshare/stats.hpp"

namespace coshare {

namespace {

// Dataset epoch: all generated logs start on this UTC midnight.
constexpr std::int64_t kEpoch = 1356998400; // 2013-01-01 00:00:00

// Victim intensity classes. Rates are clamped so that class membership
// survives Poisson noise and hit-list extras: rare victims stay below
// 10 attacks/day on average, light inside (10,100), heavy above 100.
enum class VictimClass { rare, light, heavy };

struct ClassParams {
    double log_mean, log_sigma, lo, hi;
};

ClassParams params_for(VictimClass c) {
    switch (c) {
        case VictimClass::rare: return {0.9, 0.7, 0.3, 5.5};
        case VictimClass::light: return {3.5, 0.4, 15.0, 85.0};
        case VictimClass::heavy: return {5.3, 0.35, 115.0, 550.0};
    }
    return {};
}

// Stealth attackers: one private victim, mean daily rate in [0.3, 8].
constexpr double kStealthLo = 0.3, kStealthHi = 8.0;
// Heavy hitters: bulk traffic at one light/heavy victim, [12, 22]/day
// (floor high enough that Poisson noise cannot drag a heavy hitter's
// realized average under the 10/day class boundary), plus a thin
// coordination slice over their hit-list.
constexpr double kBulkLo = 12.0, kBulkHi = 22.0;

struct Victim {
    std::string id;
    VictimClass cls = VictimClass::rare;
    double rate = 0;          // target total attacks/day
    double stealth_demand = 0; // remainder served by private stealth attackers
    double hh_capacity = 0;   // rate still assignable to heavy-hitter bulk
};

struct Attacker {
    Ipv4 ip = 0;
    int port = 0;
    bool heavy = false;
    std::size_t victim = 0; // single bulk/private target
    double rate = 0;        // bulk attacks/day at `victim`
    std::size_t crew = SIZE_MAX; // hit-list index, SIZE_MAX = none
};

constexpr int kPorts[] = {22, 23, 80, 135, 139, 443, 445, 1433, 3306, 3389, 5900, 8080};

Ipv4 fresh_public_ip(Rng& rng, std::unordered_set<Ipv4>& used) {
    const ReservedBlocks& reserved = ReservedBlocks::defaults();
    while (true) {
        Ipv4 ip = static_cast<Ipv4>(rng.next() >> 32);
        if (reserved.match(ip)) continue;
        if (!used.insert(ip).second) continue;
        return ip;
    }
}

std::string victim_id(std::size_t index, int width) {
    std::string digits = std::to_string(index + 1); // 1-based, at most `width` digits
    std::string out = "v";
    out.append(static_cast<std::size_t>(width) - digits.size(), '0');
    out += digits;
    return out;
}

} // namespace

void SynthConfig::validate() const {
    if (n_victims == 0) throw ConfigError("synth: n_victims must be positive");
    if (n_attackers == 0) throw ConfigError("synth: n_attackers must be positive");
    if (n_days <= 0) throw ConfigError("synth: n_days must be positive");
    if (burst_window_seconds <= 0 || burst_window_seconds > 86400)
        throw ConfigError("synth: burst_window_seconds must be in (0, 86400]");

    auto in_unit = [](double f) { return f >= 0.0 && f <= 1.0; };
    if (!in_unit(victim_rare_frac) || !in_unit(victim_light_frac) ||
        !in_unit(victim_heavy_frac) || !in_unit(attacker_stealth_frac) ||
        !in_unit(attacker_heavy_frac))
        throw ConfigError("synth: profile fractions must lie in [0,1]");
    if (std::abs(victim_rare_frac + victim_light_frac + victim_heavy_frac - 1.0) > 1e-9)
        throw ConfigError("synth: victim profile mix must sum to 1");
    if (std::abs(attacker_stealth_frac + attacker_heavy_frac - 1.0) > 1e-9)
        throw ConfigError("synth: attacker profile mix must sum to 1");

    if (hitlist_count > 0) {
        if (hitlist_size < 2)
            throw ConfigError("synth: hit-lists need at least two victims");
        if (hitlist_size > n_victims)
            throw ConfigError("synth: hitlist_size exceeds n_victims");
    }
}

Dataset generate(const SynthConfig& config) { return generate_detailed(config).dataset; }

SynthOutput generate_detailed(const SynthConfig& config) {
    config.validate();
    Rng rng(config.rng_seed);

    // --- Victims: exact class quotas, then a clamped log-normal rate. ---
    const std::size_t n = config.n_victims;
    std::size_t n_heavy = static_cast<std::size_t>(std::llround(config.victim_heavy_frac * n));
    std::size_t n_light = static_cast<std::size_t>(std::llround(config.victim_light_frac * n));
    n_heavy = std::min(n_heavy, n);
    n_light = std::min(n_light, n - n_heavy);

    std::vector<VictimClass> classes(n, VictimClass::rare);
    for (std::size_t i = 0; i < n_heavy; ++i) classes[i] = VictimClass::heavy;
    for (std::size_t i = 0; i < n_light; ++i) classes[n_heavy + i] = VictimClass::light;
    rng.shuffle(classes);

    const int id_width = static_cast<int>(std::to_string(n).size());
    std::vector<Victim> victims(n);
    double total_demand = 0;
    for (std::size_t v = 0; v < n; ++v) {
        ClassParams p = params_for(classes[v]);
        victims[v].id = victim_id(v, id_width);
        victims[v].cls = classes[v];
        victims[v].rate = std::clamp(rng.lognormal(p.log_mean, p.log_sigma), p.lo, p.hi);
        victims[v].stealth_demand = victims[v].rate;
        // Only light/heavy victims can absorb a >=12/day bulk attacker.
        victims[v].hh_capacity =
            classes[v] == VictimClass::rare ? 0.0 : 0.85 * victims[v].rate;
        total_demand += victims[v].rate;
    }

    // --- Hit-lists: sampled victim groups, correlated by crew bursts. ---
    std::vector<std::vector<std::size_t>> hitlists(config.hitlist_count);
    for (auto& list : hitlists) list = rng.sample_indices(n, config.hitlist_size);

    // --- Attackers. Victims' demand is served by stealth attackers
    // (one private victim each, small rates) plus heavy hitters (bulk
    // at one light/heavy victim, optional hit-list sweeps). We pick the
    // heavy-hitter count k so that the resulting stealth:heavy COUNT
    // ratio lands on the configured mix. Stealth counts are shaped by
    // per-victim demand (many victims need just one small attacker), so
    // no closed form works; instead simulate placement with mean rates
    // and scan k for the best fit. ---
    constexpr double kIncludeMean = 0.65; // mean of U[0.5, 0.8]
    const double mean_stealth = (kStealthLo + kStealthHi) / 2;
    const double mean_bulk = (kBulkLo + kBulkHi) / 2;
    const double q = config.attacker_heavy_frac;
    const std::size_t n_lists = hitlists.size();

    auto stealth_parts = [&](double demand) {
        demand = std::max(demand, kStealthLo);
        return std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(demand / mean_stealth)));
    };

    // Deterministic dry run: place k heavy hitters greedily (largest
    // remaining capacity first), then count the stealth attackers the
    // leftover demand would need. Returns {heavy placed, stealth count}.
    auto simulate = [&](std::size_t k) -> std::pair<std::size_t, std::size_t> {
        std::vector<double> cap(n), load(n, 0);
        for (std::size_t v = 0; v < n; ++v) cap[v] = victims[v].hh_capacity;
        std::size_t placed = 0;
        for (std::size_t h = 0; h < k; ++h) {
            std::size_t best = n;
            for (std::size_t v = 0; v < n; ++v)
                if (cap[v] >= kBulkLo && (best == n || cap[v] > cap[best])) best = v;
            if (best == n) break;
            double rate = std::min(mean_bulk, cap[best]);
            cap[best] -= rate;
            load[best] += rate;
            if (n_lists > 0)
                for (std::size_t v : hitlists[placed % n_lists]) load[v] += kIncludeMean;
            ++placed;
        }
        std::size_t n_st = 0;
        for (std::size_t v = 0; v < n; ++v)
            n_st += stealth_parts(victims[v].rate - load[v]);
        return {placed, n_st};
    };

    std::size_t hh_target = 0;
    if (q > 0.0) {
        double best_err = -1;
        std::size_t upper =
            static_cast<std::size_t>(total_demand / kBulkLo) + 2;
        for (std::size_t k = 0; k <= upper; ++k) {
            auto [placed, n_st] = simulate(k);
            if (placed < k) break; // capacity exhausted; larger k changes nothing
            double err = std::abs((1 - q) * static_cast<double>(placed) -
                                  q * static_cast<double>(n_st));
            if (best_err < 0 || err < best_err) {
                best_err = err;
                hh_target = k;
            }
        }
    }

    std::vector<Attacker> attackers;
    std::unordered_set<Ipv4> used_ips;

    // Real heavy-hitter placement, same greedy order as the dry run.
    for (std::size_t h = 0; h < hh_target; ++h) {
        std::size_t best = n;
        for (std::size_t v = 0; v < n; ++v)
            if (victims[v].hh_capacity >= kBulkLo &&
                (best == n || victims[v].hh_capacity > victims[best].hh_capacity))
                best = v;
        if (best == n) break;
        double rate = rng.uniform(kBulkLo, std::min(kBulkHi, victims[best].hh_capacity));
        victims[best].hh_capacity -= rate;
        victims[best].stealth_demand -= rate;
        Attacker a;
        a.ip = fresh_public_ip(rng, used_ips);
        a.port = kPorts[rng.below(std::size(kPorts))];
        a.heavy = true;
        a.victim = best;
        a.rate = rate;
        attackers.push_back(a);
    }
    const std::size_t n_hh = attackers.size();

    // Crews: round-robin heavy hitters over the hit-lists; each heavy
    // hitter coordinates on at most one list. The expected coordination
    // load per victim comes off its stealth demand, so hit-list
    // membership does not shift a victim's class.
    if (n_lists > 0) {
        for (std::size_t h = 0; h < n_hh; ++h) {
            attackers[h].crew = h % n_lists;
            for (std::size_t v : hitlists[attackers[h].crew])
                victims[v].stealth_demand -= kIncludeMean;
        }
    }

    // Stealth attackers: split each victim's remaining demand into the
    // same number of parts the dry run assumed, with jittered rates.
    for (std::size_t v = 0; v < n; ++v) {
        double demand = std::max(victims[v].stealth_demand, kStealthLo);
        std::size_t parts = stealth_parts(demand);
        std::vector<double> weights(parts);
        double sum = 0;
        for (double& w : weights) {
            w = 0.75 + 0.5 * rng.unit();
            sum += w;
        }
        for (double w : weights) {
            Attacker a;
            a.ip = fresh_public_ip(rng, used_ips);
            a.port = kPorts[rng.below(std::size(kPorts))];
            a.victim = v;
            a.rate = demand * w / sum;
            attackers.push_back(a);
        }
    }

    if (attackers.size() > config.n_attackers)
        throw ConfigError("synth: demand needs " + std::to_string(attackers.size()) +
                          " attackers but n_attackers is " +
                          std::to_string(config.n_attackers));

    // --- Event emission. ---
    std::vector<AttackEvent> events;
    events.reserve(static_cast<std::size_t>(total_demand * config.n_days * 1.1));
    const std::int64_t window = config.burst_window_seconds;

    auto emit_burst = [&](const Attacker& a, std::size_t victim, std::int64_t day_start,
                          std::size_t count) {
        std::int64_t start =
            day_start + rng.below(static_cast<std::uint64_t>(86400 - window) + 1);
        for (std::size_t i = 0; i < count; ++i)
            events.push_back(AttackEvent{victims[victim].id, a.ip, a.port,
                                         start + static_cast<std::int64_t>(
                                                     rng.below(static_cast<std::uint64_t>(window)))});
    };

    for (int day = 0; day < config.n_days; ++day) {
        const std::int64_t day_start = kEpoch + std::int64_t{day} * 86400;
        for (const Attacker& a : attackers) {
            // Bulk/private traffic, in short bursts of 1-4 events.
            std::size_t quota = rng.poisson(a.rate);
            while (quota > 0) {
                std::size_t burst = std::min<std::size_t>(quota, 1 + rng.below(4));
                emit_burst(a, a.victim, day_start, burst);
                quota -= burst;
            }
            // One coordinated sweep per day over the crew's hit-list:
            // every listed victim gets one probe with the same
            // per-burst inclusion probability.
            if (a.crew != SIZE_MAX) {
                std::int64_t sweep =
                    day_start + rng.below(static_cast<std::uint64_t>(86400 - window) + 1);
                double p_inc = rng.uniform(0.5, 0.8);
                for (std::size_t v : hitlists[a.crew]) {
                    if (rng.unit() >= p_inc) continue;
                    events.push_back(AttackEvent{
                        victims[v].id, a.ip, a.port,
                        sweep + static_cast<std::int64_t>(
                                    rng.below(static_cast<std::uint64_t>(window)))});
                }
            }
        }
    }

    // Canonical order: chronological, ties broken by victim then source.
    std::sort(events.begin(), events.end(),
              [](const AttackEvent& x, const AttackEvent& y) {
                  return std::tie(x.timestamp, x.contributor, x.source_ip, x.target_port) <
                         std::tie(y.timestamp, y.contributor, y.source_ip, y.target_port);
              });

    SynthOutput out;
    out.dataset = Dataset(std::move(events));
    out.hitlists.reserve(hitlists.size());
    for (const auto& list : hitlists) {
        std::vector<std::string> ids;
        for (std::size_t v : list) ids.push_back(victims[v].id);
        std::sort(ids.begin(), ids.end());
        out.hitlists.push_back(std::move(ids));
    }
    return out;
}

SynthFidelityReport describe(const Dataset& dataset) {
    SynthFidelityReport r;
    if (dataset.empty()) return r;

    r.events = dataset.size();
    r.days = dataset.days();
    r.victims = dataset.victim_count();

    const double days = static_cast<double>(r.days);
    std::size_t rare = 0, light = 0, heavy = 0;
    for (const std::string& v : dataset.victims()) {
        double per_day = static_cast<double>(dataset.victim_events(v).size()) / days;
        if (per_day < 10)
            ++rare;
        else if (per_day <= 100)
            ++light;
        else
            ++heavy;
    }
    r.victim_rare_frac = static_cast<double>(rare) / static_cast<double>(r.victims);
    r.victim_light_frac = static_cast<double>(light) / static_cast<double>(r.victims);
    r.victim_heavy_frac = static_cast<double>(heavy) / static_cast<double>(r.victims);

    std::map<Ipv4, std::size_t> per_source;
    for (const AttackEvent& e : dataset.events()) ++per_source[e.source_ip];
    r.attackers = per_source.size();
    std::size_t stealth = 0;
    for (const auto& [_, count] : per_source)
        if (static_cast<double>(count) / days < 10) ++stealth;
    r.attacker_stealth_frac = static_cast<double>(stealth) / static_cast<double>(r.attackers);
    r.attacker_heavy_frac = 1.0 - r.attacker_stealth_frac;

    // Common/unique source split on the busiest day.
    auto daily = daily_stats(dataset);
    int busiest = 1;
    for (const DailyStats& d : daily)
        if (d.total_attacks > daily[static_cast<std::size_t>(busiest) - 1].total_attacks)
            busiest = d.day;
    SharedUniqueCdfs split = shared_unique_cdf(dataset, busiest, Perspective::victim);
    auto mean = [](const EmpiricalCdf& cdf) {
        if (cdf.empty()) return 0.0;
        double s = 0;
        for (double x : cdf.samples()) s += x;
        return s / static_cast<double>(cdf.size());
    };
    r.mean_common_sources = mean(split.common);
    r.mean_unique_sources = mean(split.unique);
    return r;
}

} // namespace coshare
