// Release gate: ten end-to-end checks covering protocol correctness,
// leakage structure, prediction bounds, synthetic collaboration gains,
// statistics, timing, and determinism. Each check prints exactly one
// PASS/FAIL line; the process exits with the number of failures.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "coshare/collaboration.hpp"
#include "coshare/errors.hpp"
#include "coshare/evaluation.hpp"
#include "coshare/event.hpp"
#include "coshare/experiment.hpp"
#include "coshare/predictor.hpp"
#include "coshare/protocol.hpp"
#include "coshare/rng.hpp"
#include "coshare/similarity.hpp"
#include "coshare/stats.hpp"
#include "coshare/synth.hpp"

namespace {

using namespace coshare;
using Clock = std::chrono::steady_clock;

struct CheckResult {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double value, int precision = 4) {
    std::ostringstream out;
    out.precision(precision);
    out << std::fixed << value;
    return out.str();
}

// ---- randomized inputs -------------------------------------------------

// Distinct random addresses, sorted.
std::vector<Ipv4> draw_distinct(Rng& rng, std::size_t n) {
    std::vector<Ipv4> ips;
    ips.reserve(n);
    while (ips.size() < n) {
        while (ips.size() < n) ips.push_back(static_cast<Ipv4>(rng.next()));
        std::sort(ips.begin(), ips.end());
        ips.erase(std::unique(ips.begin(), ips.end()), ips.end());
    }
    return ips;
}

struct SetPair {
    SourceSet client, server;
    std::vector<Ipv4> expected; // sorted intersection
};

SetPair random_set_pair(Rng& rng, std::size_t max_size) {
    const std::size_t na = rng.below(max_size + 1);
    const std::size_t nb = rng.below(max_size + 1);
    const std::size_t overlap = rng.below(std::min(na, nb) + 1);
    std::vector<Ipv4> pool = draw_distinct(rng, na + nb - overlap);
    // Shuffle so the shared slice is not the numerically smallest one.
    for (std::size_t i = pool.size(); i > 1; --i)
        std::swap(pool[i - 1], pool[rng.below(i)]);
    std::vector<Ipv4> a(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(na));
    std::vector<Ipv4> b(pool.begin() + static_cast<std::ptrdiff_t>(na - overlap),
                        pool.begin() + static_cast<std::ptrdiff_t>(nb + na - overlap));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<Ipv4> expected;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(expected));
    return {SourceSet{"client", std::move(a), DayRange{1, 5}},
            SourceSet{"server", std::move(b), DayRange{1, 5}}, std::move(expected)};
}

AssociatedData records_for(const SourceSet& set, Rng& rng) {
    AssociatedData records;
    for (Ipv4 ip : set.ips) {
        std::vector<AssociatedRecord> bundle(1 + rng.below(2));
        for (std::size_t i = 0; i < bundle.size(); ++i)
            bundle[i] = {static_cast<std::int64_t>(1357000000 + rng.below(86400)),
                         static_cast<int>(1 + rng.below(65535))};
        records[ip] = std::move(bundle);
    }
    return records;
}

// ---- 1: protocol outputs equal their plaintext oracles ------------------

std::string one_protocol_trial(std::uint64_t seed) {
    Rng rng(seed);
    SetPair inputs = random_set_pair(rng, 500);
    const AssociatedData records = records_for(inputs.server, rng);

    {
        DuplexChannel channel;
        PartySession server = PartySession::server(inputs.server);
        PartySession client = PartySession::client(inputs.client);
        if (psi(server, client, channel) != inputs.expected)
            return "psi mismatch at seed " + std::to_string(seed);
    }
    {
        DuplexChannel channel;
        PartySession server = PartySession::server(inputs.server);
        PartySession client = PartySession::client(inputs.client);
        const std::size_t count = psi_ca(server, client, channel);
        if (count != inputs.expected.size() ||
            count != intersection_size(inputs.client, inputs.server))
            return "psi_ca mismatch at seed " + std::to_string(seed);
    }
    {
        DuplexChannel channel;
        PartySession server = PartySession::server(inputs.server);
        PartySession client = PartySession::client(inputs.client);
        bool private_threw = false, plain_threw = false;
        double private_value = 0, plain_value = 0;
        try {
            private_value = pjs(server, client, channel);
        } catch (const InputError&) {
            private_threw = true;
        }
        try {
            plain_value = jaccard(inputs.client, inputs.server);
        } catch (const InputError&) {
            plain_threw = true;
        }
        if (private_threw != plain_threw ||
            (!private_threw && private_value != plain_value))
            return "pjs mismatch at seed " + std::to_string(seed);
    }
    {
        DuplexChannel channel;
        PartySession server = PartySession::server_with_data(inputs.server, records);
        PartySession client = PartySession::client(inputs.client);
        std::vector<PsiDtItem> expected_items;
        for (Ipv4 ip : inputs.expected)
            expected_items.push_back({ip, records.at(ip)});
        if (psi_dt(server, client, channel) != expected_items)
            return "psi_dt mismatch at seed " + std::to_string(seed);
    }
    return "";
}

CheckResult check_protocol_oracles() {
    const auto start = Clock::now();
    const std::size_t trials = 1000;
    std::vector<std::string> errors(trials);
    std::atomic<std::size_t> next{0};
    const std::size_t workers =
        std::max<std::size_t>(1, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t t = next.fetch_add(1); t < trials; t = next.fetch_add(1))
                errors[t] = one_protocol_trial(41000 + t);
        });
    for (std::thread& worker : pool) worker.join();

    std::size_t mismatches = 0;
    std::string first;
    for (const std::string& e : errors)
        if (!e.empty() && mismatches++ == 0) first = e;
    const double elapsed = seconds_since(start);
    if (mismatches > 0)
        return {false, std::to_string(mismatches) + " mismatches, first: " + first};
    if (elapsed >= 600)
        return {false, "suite took " + fmt(elapsed, 1) + "s, budget 600s"};
    return {true, "1000 trials x 4 protocols, sizes 0-500, 0 mismatches, " +
                      fmt(elapsed, 1) + "s"};
}

// ---- 2: transcripts leak sizes only -------------------------------------

// True when the byte pattern occurs in any payload of the channel.
bool payloads_contain(const DuplexChannel& channel, const std::array<std::uint8_t, 4>& pat) {
    for (const DuplexChannel::Message& m : channel.messages())
        if (std::search(m.payload.begin(), m.payload.end(), pat.begin(), pat.end()) !=
            m.payload.end())
            return true;
    return false;
}

bool payloads_contain_text(const DuplexChannel& channel, const std::string& text) {
    for (const DuplexChannel::Message& m : channel.messages())
        if (std::search(m.payload.begin(), m.payload.end(), text.begin(), text.end()) !=
            m.payload.end())
            return true;
    return false;
}

void run_by_index(std::size_t which, const SourceSet& client_set,
                  const SourceSet& server_set, const AssociatedData& records,
                  DuplexChannel& channel) {
    PartySession server = which == 2
                              ? PartySession::server_with_data(server_set, records)
                              : PartySession::server(server_set);
    PartySession client = PartySession::client(client_set);
    switch (which) {
        case 0: psi_ca(server, client, channel); break;
        case 1: psi(server, client, channel); break;
        case 2: psi_dt(server, client, channel); break;
        default: pjs(server, client, channel); break;
    }
}

CheckResult check_transcript_structure() {
    const char* names[] = {"psi_ca", "psi", "psi_dt", "pjs"};
    for (std::size_t run = 0; run < 200; ++run) {
        Rng rng(42000 + run);
        const std::size_t which = run % 4;
        std::size_t na = rng.below(41), nb = rng.below(41);
        if (which == 3 && na == 0 && nb == 0) na = 1; // jaccard undefined on two empties

        // Same sizes, independently drawn content.
        std::vector<Ipv4> pool = draw_distinct(rng, 2 * (na + nb));
        auto cut = [&pool](std::size_t from, std::size_t n) {
            std::vector<Ipv4> ips(pool.begin() + static_cast<std::ptrdiff_t>(from),
                                  pool.begin() + static_cast<std::ptrdiff_t>(from + n));
            std::sort(ips.begin(), ips.end());
            return ips;
        };
        SourceSet a1{"a", cut(0, na), DayRange{1, 3}};
        SourceSet b1{"b", cut(na, nb), DayRange{1, 3}};
        SourceSet a2{"a", cut(na + nb, na), DayRange{1, 3}};
        SourceSet b2{"b", cut(2 * na + nb, nb), DayRange{1, 3}};
        AssociatedData r1, r2; // one record per element: equal-size bundles
        for (Ipv4 ip : b1.ips) r1[ip] = {{1357000000, 22}};
        for (Ipv4 ip : b2.ips) r2[ip] = {{1357000000, 22}};

        DuplexChannel c1, c2;
        run_by_index(which, a1, b1, r1, c1);
        run_by_index(which, a2, b2, r2, c2);
        if (leakage_profile(c1.transcript()) != leakage_profile(c2.transcript()))
            return {false, std::string(names[which]) +
                               " transcripts differ for equal-size inputs at run " +
                               std::to_string(run)};

        // No payload may carry an input address, in wire byte order or as
        // text. A 4-byte pattern can collide with ciphertext by chance, so
        // a hit only counts when it survives two fresh re-runs (a real
        // leak repeats every run; a collision does not).
        std::vector<Ipv4> run_inputs = a1.ips;
        run_inputs.insert(run_inputs.end(), b1.ips.begin(), b1.ips.end());
        for (Ipv4 ip : run_inputs) {
            const std::array<std::uint8_t, 4> be{
                static_cast<std::uint8_t>(ip >> 24), static_cast<std::uint8_t>(ip >> 16),
                static_cast<std::uint8_t>(ip >> 8), static_cast<std::uint8_t>(ip)};
            if (payloads_contain_text(c1, format_ipv4(ip)))
                return {false, "payload carries a dotted-quad input address at run " +
                                   std::to_string(run)};
            if (!payloads_contain(c1, be)) continue;
            bool persistent = true;
            for (int again = 0; again < 2 && persistent; ++again) {
                DuplexChannel retry;
                run_by_index(which, a1, b1, r1, retry);
                persistent = payloads_contain(retry, be);
            }
            if (persistent)
                return {false, "payload carries raw input address " + format_ipv4(ip) +
                                   " at run " + std::to_string(run)};
        }
    }
    return {true, "200 runs: equal-size inputs give identical structure, "
                  "payloads never carry input addresses"};
}

// ---- 3: true positives never beat the knowledge bounds ------------------

CheckResult check_knowledge_bounds() {
    std::size_t rows_checked = 0;
    for (std::uint64_t seed : {21, 22, 23}) {
        ExperimentConfig config;
        config.synth.n_victims = 60;
        config.synth.n_attackers = 500;
        config.synth.rng_seed = seed;
        config.sample_size = 25;
        config.iterations = 4;
        config.metrics = {BenefitMetric::intersection_size, BenefitMetric::jaccard};
        config.strategies = {SharingStrategy::intersection,
                             SharingStrategy::intersection_with_data,
                             SharingStrategy::union_with_data};
        config.pair_fraction = 0.05;
        config.first_day = 6;
        config.last_day = 10;
        config.rng_seed = 31 + seed;
        RunReport report = run_experiment(config);

        std::map<std::tuple<std::size_t, std::string, int>, std::pair<std::size_t, std::size_t>>
            limits;
        for (const BoundsRow& row : report.bound_rows)
            limits[{row.iteration, row.report.victim, row.report.test_day}] = {
                row.report.lub, row.report.gub};
        for (const VictimDayOutcome& outcome : report.outcomes) {
            const auto it = limits.find({outcome.iteration, outcome.victim, outcome.day});
            if (it == limits.end())
                return {false, "missing bound row for " + outcome.victim + " day " +
                                   std::to_string(outcome.day)};
            const auto [lub, gub] = it->second;
            const bool local = outcome.arm == "baseline" || outcome.arm == "lwol";
            const std::size_t cap = local ? lub : gub;
            if (outcome.counts.tp > cap)
                return {false, outcome.arm + " tp " + std::to_string(outcome.counts.tp) +
                                   " beats its bound " + std::to_string(cap) + " for " +
                                   outcome.victim + " day " + std::to_string(outcome.day)};
            ++rows_checked;
        }
    }
    return {true, std::to_string(rows_checked) + " victim-day outcomes within bounds, "
                  "0 violations"};
}

// ---- 4 + 5: synthetic collaboration gains and ROC direction -------------

struct QualitativeRuns {
    bool ran = false;
    std::string error;
    double seconds = 0;
    // metric|strategy -> per-seed collaborator-scope mean improvement
    std::map<std::string, std::vector<double>> improvements;
    // arm -> per-seed (mean_fpr, mean_tpr)
    std::map<std::string, std::vector<std::pair<double, double>>> roc;
};

const QualitativeRuns& qualitative_runs() {
    static const QualitativeRuns cached = [] {
        QualitativeRuns runs;
        const auto start = Clock::now();
        try {
            for (std::uint64_t seed = 1; seed <= 10; ++seed) {
                ExperimentConfig config; // default generator profile
                config.synth.rng_seed = seed;
                config.sample_size = 100;
                config.iterations = 100;
                config.metrics = {BenefitMetric::intersection_size, BenefitMetric::jaccard};
                config.strategies = {SharingStrategy::intersection_with_data,
                                     SharingStrategy::union_with_data};
                config.pair_fraction = 0.01;
                config.first_day = 6;
                config.last_day = 12;
                config.rng_seed = 1000 + seed;
                RunReport report = run_experiment(config);
                for (const SummaryRow& row : report.summary)
                    if (row.scope == "collaborators" && row.improvement.defined > 0)
                        runs.improvements[row.metric + "|" + row.strategy].push_back(
                            row.improvement.mean);
                for (const RocSummary& arm : report.roc)
                    if (arm.points > 0)
                        runs.roc[arm.arm].push_back({arm.mean_fpr, arm.mean_tpr});
            }
            runs.ran = true;
        } catch (const std::exception& e) {
            runs.error = e.what();
        }
        runs.seconds = seconds_since(start);
        return runs;
    }();
    return cached;
}

double mean_of(const std::vector<double>& values) {
    double sum = 0;
    for (double v : values) sum += v;
    return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

CheckResult check_sharing_gains() {
    const QualitativeRuns& runs = qualitative_runs();
    if (!runs.ran) return {false, "experiment runs failed: " + runs.error};
    if (runs.seconds >= 1800)
        return {false, "10-seed suite took " + fmt(runs.seconds, 0) + "s, budget 1800s"};

    std::map<std::string, double> mean_i;
    for (const auto& [arm, values] : runs.improvements) {
        if (values.size() != 10)
            return {false, arm + " has improvement means for only " +
                               std::to_string(values.size()) + " of 10 seeds"};
        mean_i[arm] = mean_of(values);
    }
    for (const char* arm : {"intersection_size|intersection_with_data",
                            "intersection_size|union_with_data",
                            "jaccard|intersection_with_data", "jaccard|union_with_data"})
        if (!mean_i.count(arm)) return {false, std::string("missing arm ") + arm};

    const double isect_i = mean_i["intersection_size|intersection_with_data"];
    const double isect_u = mean_i["intersection_size|union_with_data"];
    const double jac_i = mean_i["jaccard|intersection_with_data"];
    const double jac_u = mean_i["jaccard|union_with_data"];
    if (isect_i <= 0 || isect_u <= 0)
        return {false, "overlap-count metric shows no gain: mean I " + fmt(isect_i) +
                           " / " + fmt(isect_u)};
    if (isect_i < 0.8 * isect_u)
        return {false, "intersection sharing falls under 0.8x union sharing: " +
                           fmt(isect_i) + " vs " + fmt(isect_u)};
    if (jac_i < 0.8 * jac_u)
        return {false, "intersection sharing falls under 0.8x union sharing (jaccard): " +
                           fmt(jac_i) + " vs " + fmt(jac_u)};
    return {true, "10 seeds x 100 iterations: mean I " + fmt(isect_i) + "/" +
                      fmt(isect_u) + " (overlap count), " + fmt(jac_i) + "/" + fmt(jac_u) +
                      " (jaccard), ratios >= 0.8, " + fmt(runs.seconds, 0) + "s"};
}

CheckResult check_roc_direction() {
    const QualitativeRuns& runs = qualitative_runs();
    if (!runs.ran) return {false, "experiment runs failed: " + runs.error};
    const auto base_it = runs.roc.find("baseline");
    if (base_it == runs.roc.end()) return {false, "no baseline ROC points"};
    double base_fpr = 0, base_tpr = 0;
    for (const auto& [fpr, tpr] : base_it->second) {
        base_fpr += fpr;
        base_tpr += tpr;
    }
    base_fpr /= static_cast<double>(base_it->second.size());
    base_tpr /= static_cast<double>(base_it->second.size());

    std::string detail;
    for (const auto& [arm, points] : runs.roc) {
        if (arm == "baseline" || arm == "lwol" || arm == "gwol") continue;
        double fpr = 0, tpr = 0;
        for (const auto& [f, t] : points) {
            fpr += f;
            tpr += t;
        }
        fpr /= static_cast<double>(points.size());
        tpr /= static_cast<double>(points.size());
        if (tpr < base_tpr)
            return {false, arm + " mean TPR " + fmt(tpr) + " under baseline " +
                               fmt(base_tpr)};
        if (fpr > base_fpr + 0.02)
            return {false, arm + " mean FPR " + fmt(fpr) + " exceeds baseline " +
                               fmt(base_fpr) + " + 0.02"};
        detail += (detail.empty() ? "" : ", ") + arm + " (" + fmt(fpr) + "," + fmt(tpr) + ")";
    }
    return {true, "baseline (" + fmt(base_fpr) + "," + fmt(base_tpr) +
                      "); every strategy raises TPR within the FPR allowance: " + detail};
}

// ---- 6: recency-weighted scoring ----------------------------------------

CheckResult check_ewma_scoring() {
    PredictionParams params; // alpha 0.9, five-day window
    const Timeline timeline{0, 6};
    const Ipv4 ip = 167837964; // 10.1.2.12
    std::vector<AttackEvent> events = {{"v", ip, 22, 0},
                                       {"v", ip, 22, 4 * 86400 + 30}};
    const auto scores = ewma_scores(events, timeline, params, 6);
    const auto it = scores.find(ip);
    if (it == scores.end()) return {false, "attacked-on-days-1-and-5 source not scored"};
    if (std::abs(it->second - 0.90009) > 1e-12)
        return {false, "score " + std::to_string(it->second) + " is not 0.90009"};

    for (std::uint64_t t = 0; t < 10000; ++t) {
        Rng rng(46000 + t);
        std::vector<AttackEvent> log;
        for (int day = 1; day <= 5; ++day)
            if (rng.below(2) == 1)
                log.push_back({"v", ip, 22,
                               static_cast<std::int64_t>(day - 1) * 86400 +
                                   static_cast<std::int64_t>(rng.below(86400))});
        const auto before = ewma_scores(log, timeline, params, 6);
        const double s0 = before.count(ip) ? before.at(ip) : 0.0;
        log.push_back({"v", ip, 22,
                       static_cast<std::int64_t>(rng.below(5)) * 86400 +
                           static_cast<std::int64_t>(rng.below(86400))});
        const auto after = ewma_scores(log, timeline, params, 6);
        const double s1 = after.count(ip) ? after.at(ip) : 0.0;
        if (s1 < s0)
            return {false, "adding an event lowered the score at trial " +
                               std::to_string(t)};
    }
    return {true, "hand case 0.90009 to 1e-12; 10000 add-one-event trials monotone"};
}

// ---- 7: partnership selection count and order ---------------------------

std::string pad3(std::size_t i) {
    std::string s = std::to_string(i);
    return std::string(3 - s.size(), '0') + s;
}

BenefitMatrix random_matrix(Rng& rng, std::size_t n, bool with_gaps) {
    BenefitMatrix matrix;
    for (std::size_t i = 0; i < n; ++i) matrix.victims.push_back("v" + pad3(i));
    matrix.cells.assign(n * n, std::nullopt);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (with_gaps && rng.below(5) == 0) continue; // unscoreable pair
            // A coarse value pool forces score ties.
            const double value = static_cast<double>(rng.below(8)) / 4.0;
            matrix.cells[i * n + j] = value;
            matrix.cells[j * n + i] = value;
        }
    return matrix;
}

std::vector<VictimPair> selection_oracle(const BenefitMatrix& matrix, double fraction) {
    struct Scored {
        double value;
        VictimPair pair;
    };
    std::vector<Scored> scored;
    const std::size_t n = matrix.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (matrix.at(i, j))
                scored.push_back({*matrix.at(i, j), {matrix.victims[i], matrix.victims[j]}});
    std::sort(scored.begin(), scored.end(), [](const Scored& x, const Scored& y) {
        if (x.value != y.value) return x.value > y.value;
        return x.pair < y.pair;
    });
    const double total = static_cast<double>(n * (n - 1) / 2);
    const std::size_t want = static_cast<std::size_t>(std::ceil(fraction * total));
    scored.resize(std::min(want, scored.size()));
    std::vector<VictimPair> pairs;
    for (const Scored& s : scored) pairs.push_back(s.pair);
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

CheckResult check_partner_selection() {
    Rng rng(47000);
    BenefitMatrix hundred = random_matrix(rng, 100, false);
    const PartnershipRound round =
        select_partners(hundred, 0.01, SharingStrategy::union_with_data);
    if (round.pairs.size() != 50)
        return {false, "n=100 fraction=0.01 picked " + std::to_string(round.pairs.size()) +
                           " pairs, want exactly 50"};

    for (std::uint64_t t = 0; t < 100; ++t) {
        Rng mr(47100 + t);
        const std::size_t n = 4 + mr.below(22);
        const double fraction = static_cast<double>(1 + mr.below(100)) / 100.0;
        BenefitMatrix matrix = random_matrix(mr, n, true);
        const PartnershipRound got =
            select_partners(matrix, fraction, SharingStrategy::union_with_data);
        if (got.pairs != selection_oracle(matrix, fraction))
            return {false, "selection disagrees with the sort oracle at trial " +
                               std::to_string(t)};
    }
    return {true, "n=100 fraction=0.01 -> exactly 50 pairs; 100 random matrices match "
                  "the full-sort oracle"};
}

// ---- 8: statistics ------------------------------------------------------

struct WelchCase {
    std::vector<double> a, b;
    double t, p;
};
const std::vector<WelchCase> welch_cases = {
#include "oracle/welch_cases.inc"
};

struct Chi2Case {
    std::vector<std::vector<double>> table;
    double chi2;
    int df;
    double p;
};
const std::vector<Chi2Case> chi2_cases = {
#include "oracle/chi2_cases.inc"
};

bool within(double got, double ref, double tolerance) {
    return std::abs(got - ref) <= tolerance * std::max(1.0, std::abs(ref));
}

CheckResult check_statistics() {
    std::vector<AttackEvent> uniform;
    for (int port : {1000, 2000, 3000, 4000}) uniform.push_back({"v", 1, port, 100});
    const EmpiricalCdf port_entropy = entropy_cdf(Dataset(uniform), EntropyField::port);
    if (port_entropy.size() != 1 || port_entropy.samples()[0] != 2.0)
        return {false, "uniform-over-4 port entropy is not exactly 2 bits"};

    for (std::size_t i = 0; i < welch_cases.size(); ++i) {
        const WelchCase& c = welch_cases[i];
        const TTestResult got = welch_t_test(c.a, c.b);
        if (!within(got.t, c.t, 1e-6) || !within(got.p, c.p, 1e-6))
            return {false, "welch t-test strays from the oracle at case " +
                               std::to_string(i)};
    }
    for (std::size_t i = 0; i < chi2_cases.size(); ++i) {
        const Chi2Case& c = chi2_cases[i];
        const ChiSquareResult got = chi_square_test(c.table);
        if (!within(got.chi2, c.chi2, 1e-6) || got.df != c.df || !within(got.p, c.p, 1e-6))
            return {false, "chi-square strays from the oracle at case " +
                               std::to_string(i)};
    }

    const ChiSquareResult three_by_two =
        chi_square_test({{10, 20}, {30, 40}, {50, 60}});
    if (three_by_two.df != 2)
        return {false, "3x2 table df is " + std::to_string(three_by_two.df) + ", want 2"};
    return {true, "uniform entropy exact; " + std::to_string(welch_cases.size()) +
                      " welch and " + std::to_string(chi2_cases.size()) +
                      " chi-square cases within 1e-6; 3x2 df = 2"};
}

// ---- 9: protocol timing --------------------------------------------------

CheckResult check_protocol_timing() {
    const std::vector<BenchRow> rows = bench_protocols({200}, 3, 100);
    std::string detail;
    for (const BenchRow& row : rows) {
        if (row.protocol != "psi_ca" && row.protocol != "psi") continue;
        if (row.median_ms >= 5000)
            return {false, row.protocol + " at 200 elements took " +
                               fmt(row.median_ms, 0) + "ms, budget 5000ms"};
        if (row.all_pairs_seconds >= 600)
            return {false, row.protocol + " all-pairs projection " +
                               fmt(row.all_pairs_seconds, 0) + "s, budget 600s"};
        detail += (detail.empty() ? "" : ", ") + row.protocol + " " +
                  fmt(row.median_ms, 0) + "ms (all-pairs " +
                  fmt(row.all_pairs_seconds, 0) + "s)";
    }
    return {true, "200-element runs: " + detail};
}

// ---- 10: byte-identical reruns --------------------------------------------

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

CheckResult check_determinism() {
    ExperimentConfig config;
    config.synth.n_victims = 40;
    config.synth.n_attackers = 300;
    config.synth.rng_seed = 5;
    config.sample_size = 20;
    config.iterations = 4;
    config.metrics = {BenefitMetric::intersection_size, BenefitMetric::jaccard};
    config.strategies = {SharingStrategy::intersection_with_data,
                         SharingStrategy::union_with_data};
    config.pair_fraction = 0.1;
    config.first_day = 6;
    config.last_day = 8;
    config.rng_seed = 99;

    const auto base = std::filesystem::temp_directory_path();
    const auto dir_a = base / "coshare_accept_a";
    const auto dir_b = base / "coshare_accept_b";
    config.threads = 3;
    config.output_dir = dir_a.string();
    RunReport first = run_experiment(config);
    write_report(first, config.output_dir);
    config.threads = 1; // scheduling must not reach the reports
    config.output_dir = dir_b.string();
    RunReport second = run_experiment(config);
    write_report(second, config.output_dir);

    const char* names[] = {"confusion.csv", "bounds.csv",  "rounds.csv",
                           "series.csv",    "summary.csv", "roc.csv"};
    for (const char* name : names) {
        const std::string a = slurp(dir_a / name), b = slurp(dir_b / name);
        if (a.empty()) return {false, std::string(name) + " is empty"};
        if (a != b) return {false, std::string(name) + " differs between identical runs"};
    }
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
    return {true, "two runs (3 threads vs 1) produced byte-identical reports"};
}

} // namespace

int main() {
    const std::pair<const char*, CheckResult (*)()> checks[] = {
        {"protocol-oracle equivalence", check_protocol_oracles},
        {"transcript structure", check_transcript_structure},
        {"knowledge bounds", check_knowledge_bounds},
        {"synthetic sharing gains", check_sharing_gains},
        {"roc direction", check_roc_direction},
        {"recency-weighted scoring", check_ewma_scoring},
        {"partner selection", check_partner_selection},
        {"statistical tests", check_statistics},
        {"protocol timing", check_protocol_timing},
        {"report determinism", check_determinism},
    };

    int failures = 0;
    int index = 0;
    for (const auto& [name, run] : checks) {
        ++index;
        CheckResult result;
        try {
            result = run();
        } catch (const std::exception& e) {
            result = {false, std::string("unexpected exception: ") + e.what()};
        }
        if (!result.pass) ++failures;
        std::cout << (result.pass ? "PASS" : "FAIL") << "  " << index << "/10 " << name
                  << ": " << result.detail << '\n'
                  << std::flush;
    }
    std::cout << (failures == 0 ? "acceptance: all 10 checks passed"
                                : "acceptance: " + std::to_string(failures) +
                                      " of 10 checks failed")
              << '\n';
    return failures;
}
