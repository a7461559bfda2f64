#include "coshare/collaboration.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>
#include <vector>

#include "doctest.h"

#include "coshare/errors.hpp"
#include "coshare/rng.hpp"

using namespace coshare;

namespace {

constexpr std::int64_t kT0 = 1356998400; // 2013-01-01 00:00:00 UTC

AttackEvent hit(std::string victim, Ipv4 source, int day, int offset = 0, int port = 22) {
    return AttackEvent{std::move(victim), source, port,
                       kT0 + std::int64_t{day - 1} * 86400 + offset};
}

Dataset random_dataset(Rng& rng, std::size_t victims, std::size_t events_per_victim,
                       int days) {
    std::vector<AttackEvent> events;
    for (std::size_t v = 0; v < victims; ++v) {
        std::string id = "v" + std::to_string(10 + v);
        for (std::size_t i = 0; i < events_per_victim; ++i)
            events.push_back(hit(id, static_cast<Ipv4>(rng.below(40)),
                                 static_cast<int>(1 + rng.below(static_cast<std::uint64_t>(days))),
                                 static_cast<int>(rng.below(86400))));
    }
    return Dataset(std::move(events));
}

std::set<std::tuple<Ipv4, std::int64_t, int>> key_set(const std::vector<AttackEvent>& events) {
    std::set<std::tuple<Ipv4, std::int64_t, int>> keys;
    for (const auto& e : events) keys.emplace(e.source_ip, e.timestamp, e.target_port);
    return keys;
}

} // namespace

TEST_CASE("benefit window policies") {
    CHECK(benefit_window(WindowPolicy::history_before, 6, 5) == DayRange{1, 5});
    CHECK(benefit_window(WindowPolicy::history_before, 9, 5) == DayRange{1, 8});
    CHECK(benefit_window(WindowPolicy::train_window, 9, 5) == DayRange{4, 8});
}

TEST_CASE("name round-trips for config parsing") {
    for (auto m : {BenefitMetric::intersection_size, BenefitMetric::jaccard,
                   BenefitMetric::pearson, BenefitMetric::cosine})
        CHECK(benefit_metric_from(to_string(m)) == m);
    for (auto s : {SharingStrategy::intersection, SharingStrategy::intersection_with_data,
                   SharingStrategy::union_with_data})
        CHECK(sharing_strategy_from(to_string(s)) == s);
    CHECK(benefit_mode_from("private") == BenefitMode::private_protocol);
    CHECK(window_policy_from("train_window") == WindowPolicy::train_window);
    CHECK_FALSE(benefit_metric_from("euclidean").has_value());
}

TEST_CASE("two-victim intersection matrix fills the off-diagonal") {
    Dataset data({hit("a", 1, 1), hit("a", 2, 2), hit("b", 2, 1), hit("b", 3, 2)});
    auto matrix = benefit_matrix(data, BenefitMetric::intersection_size, BenefitMode::plaintext,
                                 3, WindowPolicy::history_before, 5);
    REQUIRE(matrix.size() == 2);
    CHECK(matrix.at(0, 1) == 1.0);
    CHECK(matrix.at(1, 0) == 1.0);
    CHECK_FALSE(matrix.at(0, 0).has_value()); // diagonal never computed
}

TEST_CASE("benefit matrix requires at least two victims") {
    Dataset data({hit("only", 1, 1)});
    CHECK_THROWS_AS(benefit_matrix(data, BenefitMetric::jaccard, BenefitMode::plaintext, 2,
                                   WindowPolicy::history_before, 5),
                    InputError);
}

TEST_CASE("pearson on a degenerate victim is recorded as missing") {
    // Victim c shares every address block with nobody: its vector over
    // the pair's agreed range with an empty-set victim is constant.
    Dataset data({hit("a", 1, 1), hit("b", 1, 1), hit("b", 2, 1), hit("c", 500, 2)});
    // Pair (a, c): a has sources on day 1 only, c on day 2 only; over
    // window {1,1} c's set is empty, so its vector is all-zero.
    auto matrix = benefit_matrix(data, BenefitMetric::pearson, BenefitMode::plaintext, 2,
                                 WindowPolicy::history_before, 5);
    std::size_t c_index = 2; // victims sorted: a, b, c
    REQUIRE(matrix.victims[c_index] == "c");
    CHECK_FALSE(matrix.at(0, c_index).has_value());
    CHECK_FALSE(matrix.at(1, c_index).has_value());
    CHECK(matrix.at(0, 1).has_value());
}

TEST_CASE("private mode reproduces the plaintext matrix exactly") {
    Rng rng(31415);
    Dataset data = random_dataset(rng, 5, 40, 6);
    for (auto metric : {BenefitMetric::intersection_size, BenefitMetric::jaccard,
                        BenefitMetric::pearson, BenefitMetric::cosine}) {
        for (auto policy : {WindowPolicy::history_before, WindowPolicy::train_window}) {
            auto plain = benefit_matrix(data, metric, BenefitMode::plaintext, 6, policy, 5);
            auto priv = benefit_matrix(data, metric, BenefitMode::private_protocol, 6, policy, 5);
            CHECK(plain.victims == priv.victims);
            CHECK(plain.cells == priv.cells); // bit-for-bit, including missing cells
        }
    }
}

TEST_CASE("matrix over n victims scores n(n-1)/2 pairs") {
    Rng rng(7);
    Dataset data = random_dataset(rng, 25, 30, 6);
    auto matrix = benefit_matrix(data, BenefitMetric::intersection_size, BenefitMode::plaintext,
                                 6, WindowPolicy::history_before, 5);
    std::size_t computed = 0;
    for (std::size_t i = 0; i < matrix.size(); ++i)
        for (std::size_t j = i + 1; j < matrix.size(); ++j)
            if (matrix.at(i, j).has_value()) ++computed;
    CHECK(computed == 25 * 24 / 2);
}

TEST_CASE("select_partners picks the strict maximum first") {
    BenefitMatrix matrix;
    matrix.victims = {"a", "b", "c"};
    matrix.cells.assign(9, std::nullopt);
    auto set = [&](std::size_t i, std::size_t j, double v) {
        matrix.cells[i * 3 + j] = v;
        matrix.cells[j * 3 + i] = v;
    };
    set(0, 1, 1.0);
    set(0, 2, 5.0);
    set(1, 2, 3.0);
    auto round = select_partners(matrix, 0.01, SharingStrategy::union_with_data);
    REQUIRE(round.pairs.size() == 1); // ceil(0.01 * 3) = 1
    CHECK(round.pairs[0] == VictimPair{"a", "c"});
    CHECK(round.coalitions.at("a") == std::vector<std::string>{"c"});
    CHECK(round.partners_of("b") == nullptr);
}

TEST_CASE("score ties break by lexicographic pair id") {
    BenefitMatrix matrix;
    matrix.victims = {"a", "b", "c"};
    matrix.cells.assign(9, std::nullopt);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j) {
            matrix.cells[i * 3 + j] = 2.0;
            matrix.cells[j * 3 + i] = 2.0;
        }
    auto round = select_partners(matrix, 0.5, SharingStrategy::union_with_data);
    REQUIRE(round.pairs.size() == 2); // ceil(0.5 * 3)
    CHECK(round.pairs[0] == VictimPair{"a", "b"});
    CHECK(round.pairs[1] == VictimPair{"a", "c"});
}

TEST_CASE("missing scores are never selected and may empty the round") {
    BenefitMatrix matrix;
    matrix.victims = {"a", "b", "c"};
    matrix.cells.assign(9, std::nullopt);
    auto round = select_partners(matrix, 1.0, SharingStrategy::union_with_data);
    CHECK(round.pairs.empty());
    CHECK(round.all_scores_missing);

    matrix.cells[0 * 3 + 1] = 4.0;
    matrix.cells[1 * 3 + 0] = 4.0;
    round = select_partners(matrix, 1.0, SharingStrategy::union_with_data);
    CHECK_FALSE(round.all_scores_missing);
    REQUIRE(round.pairs.size() == 1); // capped at the one scoreable pair
    CHECK(round.pairs[0] == VictimPair{"a", "b"});
}

TEST_CASE("fraction outside (0,1] is rejected") {
    BenefitMatrix matrix;
    matrix.victims = {"a", "b"};
    matrix.cells.assign(4, 1.0);
    CHECK_THROWS_AS(select_partners(matrix, 0.0, SharingStrategy::union_with_data),
                    ConfigError);
    CHECK_THROWS_AS(select_partners(matrix, 1.5, SharingStrategy::union_with_data),
                    ConfigError);
}

TEST_CASE("selection equals a brute-force sort of all pairs") {
    Rng rng(2718);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 4 + rng.below(16);
        BenefitMatrix matrix;
        for (std::size_t v = 0; v < n; ++v)
            matrix.victims.push_back("v" + std::to_string(100 + v));
        matrix.cells.assign(n * n, std::nullopt);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (rng.unit() < 0.85) {
                    double score = rng.unit();
                    matrix.cells[i * n + j] = score;
                    matrix.cells[j * n + i] = score;
                }
        double fraction = 0.05 + 0.9 * rng.unit();

        std::vector<std::pair<double, VictimPair>> all;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (matrix.at(i, j))
                    all.push_back({*matrix.at(i, j),
                                   VictimPair{matrix.victims[i], matrix.victims[j]}});
        std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
            if (x.first != y.first) return x.first > y.first;
            return x.second < y.second;
        });
        std::size_t want = static_cast<std::size_t>(
            std::ceil(fraction * static_cast<double>(n * (n - 1) / 2)));
        want = std::min(want, all.size());
        std::vector<VictimPair> expected;
        for (std::size_t k = 0; k < want; ++k) expected.push_back(all[k].second);
        std::sort(expected.begin(), expected.end());

        auto round = select_partners(matrix, fraction, SharingStrategy::union_with_data);
        CHECK(round.pairs == expected);
    }
}

TEST_CASE("selection is invariant under positive affine rescaling") {
    Rng rng(161803);
    std::size_t n = 12;
    BenefitMatrix matrix;
    for (std::size_t v = 0; v < n; ++v) matrix.victims.push_back("w" + std::to_string(10 + v));
    matrix.cells.assign(n * n, std::nullopt);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double score = rng.unit();
            matrix.cells[i * n + j] = score;
            matrix.cells[j * n + i] = score;
        }
    BenefitMatrix scaled = matrix;
    for (auto& cell : scaled.cells)
        if (cell) cell = 2.0 * *cell + 0.25; // exact in binary floating point

    auto base = select_partners(matrix, 0.1, SharingStrategy::union_with_data);
    auto rescaled = select_partners(scaled, 0.1, SharingStrategy::union_with_data);
    CHECK(base.pairs == rescaled.pairs);
}

TEST_CASE("intersection_with_data delivers the counterpart's common-source events") {
    // a saw source 1 at t1 and source 2 at t2; b saw source 1 at t3.
    std::vector<AttackEvent> log_a{hit("a", 1, 1, 100), hit("a", 2, 2, 200)};
    std::vector<AttackEvent> log_b{hit("b", 1, 3, 300)};
    Timeline tl{kT0, 5};
    auto result = share(log_a, log_b, tl, SharingStrategy::intersection_with_data,
                        DayRange{1, 4});
    REQUIRE(result.to_first.events.size() == 1);
    CHECK(result.to_first.events[0] == log_b[0]); // a receives 1@t3
    REQUIRE(result.to_second.events.size() == 1);
    CHECK(result.to_second.events[0] == log_a[0]); // b receives 1@t1
    CHECK(result.to_first.common_sources.empty()); // addresses only under plain intersection
}

TEST_CASE("disjoint source sets share nothing under intersection_with_data") {
    std::vector<AttackEvent> log_a{hit("a", 1, 1)};
    std::vector<AttackEvent> log_b{hit("b", 2, 1)};
    Timeline tl{kT0, 5};
    auto result = share(log_a, log_b, tl, SharingStrategy::intersection_with_data,
                        DayRange{1, 4});
    CHECK(result.to_first.events.empty());
    CHECK(result.to_second.events.empty());
}

TEST_CASE("union_with_data exchanges the full windowed logs") {
    std::vector<AttackEvent> log_a{hit("a", 1, 1), hit("a", 2, 2), hit("a", 3, 5)};
    std::vector<AttackEvent> log_b{hit("b", 9, 3)};
    Timeline tl{kT0, 6};
    auto result = share(log_a, log_b, tl, SharingStrategy::union_with_data, DayRange{1, 4});
    CHECK(result.to_first.events == std::vector<AttackEvent>{log_b[0]});
    // a's day-5 event sits outside the window and must not leave a.
    CHECK(result.to_second.events == std::vector<AttackEvent>{log_a[0], log_a[1]});
}

TEST_CASE("plain intersection shares addresses only") {
    std::vector<AttackEvent> log_a{hit("a", 1, 1), hit("a", 2, 1)};
    std::vector<AttackEvent> log_b{hit("b", 2, 2), hit("b", 3, 2)};
    Timeline tl{kT0, 5};
    auto result = share(log_a, log_b, tl, SharingStrategy::intersection, DayRange{1, 4});
    CHECK(result.to_first.common_sources == std::vector<Ipv4>{2});
    CHECK(result.to_second.common_sources == std::vector<Ipv4>{2});
    CHECK(result.to_first.events.empty());
    CHECK(result.to_second.events.empty());
}

TEST_CASE("sharing is symmetric and intersection data is a subset of union data") {
    Rng rng(777);
    Timeline tl{kT0, 8};
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<AttackEvent> log_a, log_b;
        for (int i = 0; i < 25; ++i) {
            log_a.push_back(hit("a", static_cast<Ipv4>(rng.below(15)),
                                static_cast<int>(1 + rng.below(7)), i));
            log_b.push_back(hit("b", static_cast<Ipv4>(rng.below(15)),
                                static_cast<int>(1 + rng.below(7)), i));
        }
        DayRange window{1, 6};

        auto forward = share(log_a, log_b, tl, SharingStrategy::intersection_with_data, window);
        auto backward = share(log_b, log_a, tl, SharingStrategy::intersection_with_data, window);
        CHECK(forward.to_first.events == backward.to_second.events);
        CHECK(forward.to_second.events == backward.to_first.events);

        auto unioned = share(log_a, log_b, tl, SharingStrategy::union_with_data, window);
        auto inter_keys = key_set(forward.to_first.events);
        auto union_keys = key_set(unioned.to_first.events);
        CHECK(std::includes(union_keys.begin(), union_keys.end(), inter_keys.begin(),
                            inter_keys.end()));

        // Leakage contract: every delivered event's source is common.
        std::set<Ipv4> a_ips, b_ips;
        for (const auto& e : log_a)
            if (window.contains(tl.day_of(e.timestamp))) a_ips.insert(e.source_ip);
        for (const auto& e : log_b)
            if (window.contains(tl.day_of(e.timestamp))) b_ips.insert(e.source_ip);
        for (const auto& e : forward.to_first.events) {
            CHECK(a_ips.count(e.source_ip) == 1);
            CHECK(b_ips.count(e.source_ip) == 1);
        }
        for (const auto& e : forward.to_second.events) {
            CHECK(a_ips.count(e.source_ip) == 1);
            CHECK(b_ips.count(e.source_ip) == 1);
        }
    }
}

TEST_CASE("augmenting with an empty coalition returns the own log") {
    std::vector<AttackEvent> own{hit("a", 1, 1), hit("a", 2, 2)};
    auto log = augment("a", own, {});
    CHECK(log.victim == "a");
    CHECK(log.events() == own);
    CHECK(log.foreign_count() == 0);
}

TEST_CASE("duplicate events from two partners are merged once") {
    std::vector<AttackEvent> own{hit("a", 1, 1)};
    AttackEvent dup = hit("b", 7, 2, 500);
    AttackEvent dup_from_c = hit("c", 7, 2, 500); // same (source, time, port) key
    std::vector<SharedPayload> received(2);
    received[0].events = {dup};
    received[1].events = {dup_from_c};
    auto log = augment("a", own, received);
    CHECK(log.entries.size() == 2);
    CHECK(log.foreign_count() == 1);
    // First payload wins the key.
    CHECK(log.entries[1].event.contributor == "b");
    CHECK(log.entries[1].foreign);
}

TEST_CASE("own events outrank identical received ones") {
    AttackEvent mine = hit("a", 7, 2, 500);
    AttackEvent theirs = hit("b", 7, 2, 500);
    std::vector<AttackEvent> own{mine};
    std::vector<SharedPayload> received(1);
    received[0].events = {theirs};
    auto log = augment("a", own, received);
    REQUIRE(log.entries.size() == 1);
    CHECK(log.entries[0].event.contributor == "a");
    CHECK_FALSE(log.entries[0].foreign);
}

TEST_CASE("augmented size equals the brute-force deduplicated union") {
    Rng rng(888);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<AttackEvent> own;
        std::vector<SharedPayload> received(2);
        for (int i = 0; i < 20; ++i) {
            own.push_back(hit("a", static_cast<Ipv4>(rng.below(10)),
                              static_cast<int>(1 + rng.below(4)),
                              static_cast<int>(rng.below(50))));
            received[0].events.push_back(hit("b", static_cast<Ipv4>(rng.below(10)),
                                             static_cast<int>(1 + rng.below(4)),
                                             static_cast<int>(rng.below(50))));
            received[1].events.push_back(hit("c", static_cast<Ipv4>(rng.below(10)),
                                             static_cast<int>(1 + rng.below(4)),
                                             static_cast<int>(rng.below(50))));
        }
        auto keys = key_set(own);
        auto k1 = key_set(received[0].events);
        auto k2 = key_set(received[1].events);
        keys.insert(k1.begin(), k1.end());
        keys.insert(k2.begin(), k2.end());

        auto log = augment("a", own, received);
        // Own events are kept verbatim (even same-key ones), received
        // ones dedup against everything seen before.
        std::size_t own_extra = own.size() - key_set(own).size();
        CHECK(log.entries.size() == keys.size() + own_extra);
        CHECK(log.foreign_count() == log.entries.size() - own.size());
    }
}

TEST_CASE("victim_log extracts one contributor's events in order") {
    Dataset data({hit("a", 1, 1), hit("b", 2, 1, 50), hit("a", 3, 2)});
    auto log = victim_log(data, "a");
    REQUIRE(log.size() == 2);
    CHECK(log[0].source_ip == 1);
    CHECK(log[1].source_ip == 3);
    CHECK(victim_log(data, "nobody").empty());
}

TEST_CASE("audit csv lists every pair with score and selection flag") {
    Dataset data({hit("a", 1, 1), hit("b", 1, 1), hit("c", 9, 1)});
    auto matrix = benefit_matrix(data, BenefitMetric::intersection_size, BenefitMode::plaintext,
                                 2, WindowPolicy::history_before, 5);
    auto round = select_partners(matrix, 0.3, SharingStrategy::union_with_data);
    std::ostringstream out;
    benefit_csv(out, matrix, &round);
    CHECK(out.str() == "victim_a,victim_b,metric,score,selected\n"
                       "a,b,intersection_size,1,1\n"
                       "a,c,intersection_size,0,0\n"
                       "b,c,intersection_size,0,0\n");
}
