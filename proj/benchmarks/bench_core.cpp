#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include <benchmark/benchmark.h>

#include "coshare/predictor.hpp"
#include "coshare/protocol.hpp"
#include "coshare/rng.hpp"
#include "coshare/similarity.hpp"

namespace {

using namespace coshare;

// Two source sets of the requested size with roughly half their
// addresses in common, regenerated identically for every benchmark so
// repetitions measure the same work.
std::pair<SourceSet, SourceSet> overlapping_sets(std::size_t size) {
    Rng rng(4200 + static_cast<std::uint64_t>(size));
    auto draw = [&rng, size] {
        std::vector<Ipv4> ips;
        while (ips.size() < size) {
            ips.push_back(static_cast<Ipv4>(rng.next()));
            std::sort(ips.begin(), ips.end());
            ips.erase(std::unique(ips.begin(), ips.end()), ips.end());
        }
        return ips;
    };
    std::vector<Ipv4> a = draw();
    std::vector<Ipv4> b = draw();
    std::copy_n(a.begin(), size / 2, b.begin());
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    while (b.size() < size) {
        b.push_back(static_cast<Ipv4>(rng.next()));
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
    }
    return {SourceSet{"a", std::move(a), DayRange{1, 5}},
            SourceSet{"b", std::move(b), DayRange{1, 5}}};
}

void psi_ca_round(benchmark::State& state) {
    auto [client_set, server_set] = overlapping_sets(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        DuplexChannel channel;
        PartySession server = PartySession::server(server_set);
        PartySession client = PartySession::client(client_set);
        benchmark::DoNotOptimize(psi_ca(server, client, channel));
    }
}

void psi_round(benchmark::State& state) {
    auto [client_set, server_set] = overlapping_sets(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        DuplexChannel channel;
        PartySession server = PartySession::server(server_set);
        PartySession client = PartySession::client(client_set);
        benchmark::DoNotOptimize(psi(server, client, channel));
    }
}

void psi_dt_round(benchmark::State& state) {
    auto [client_set, server_set] = overlapping_sets(static_cast<std::size_t>(state.range(0)));
    AssociatedData records;
    for (Ipv4 ip : server_set.ips) records[ip] = {{1357000000, 22}};
    for (auto _ : state) {
        DuplexChannel channel;
        PartySession server = PartySession::server_with_data(server_set, records);
        PartySession client = PartySession::client(client_set);
        benchmark::DoNotOptimize(psi_dt(server, client, channel));
    }
}

void pjs_round(benchmark::State& state) {
    auto [client_set, server_set] = overlapping_sets(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        DuplexChannel channel;
        PartySession server = PartySession::server(server_set);
        PartySession client = PartySession::client(client_set);
        benchmark::DoNotOptimize(pjs(server, client, channel));
    }
}

void set_intersection_size(benchmark::State& state) {
    auto [a, b] = overlapping_sets(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(intersection_size(a, b));
}

void set_jaccard(benchmark::State& state) {
    auto [a, b] = overlapping_sets(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(jaccard(a, b));
}

void vector_pearson(benchmark::State& state) {
    auto [a, b] = overlapping_sets(static_cast<std::size_t>(state.range(0)));
    IpRange range = agree_range(a, b, RangePolicy::observed_blocks());
    BinaryAttackVector u = to_vector(a, range);
    BinaryAttackVector v = to_vector(b, range);
    for (auto _ : state) benchmark::DoNotOptimize(pearson(u, v));
}

void vector_cosine(benchmark::State& state) {
    auto [a, b] = overlapping_sets(static_cast<std::size_t>(state.range(0)));
    IpRange range = agree_range(a, b, RangePolicy::observed_blocks());
    BinaryAttackVector u = to_vector(a, range);
    BinaryAttackVector v = to_vector(b, range);
    for (auto _ : state) benchmark::DoNotOptimize(cosine(u, v));
}

void ewma_watchlist(benchmark::State& state) {
    const int days = static_cast<int>(state.range(0));
    Rng rng(99);
    std::vector<AttackEvent> events;
    for (int day = 1; day <= days; ++day)
        for (int i = 0; i < 40; ++i)
            events.push_back({"v", static_cast<Ipv4>(rng.below(200)), 22,
                              static_cast<std::int64_t>(day - 1) * 86400 + i * 60});
    const Dataset dataset(std::move(events));
    PredictionParams params;
    params.t_train = days;
    params.threshold = 0.1;
    for (auto _ : state) {
        auto scores = ewma_scores(dataset.events(), dataset.timeline(), params, days + 1);
        Watchlist list = predict(scores, params, "v", days + 1);
        benchmark::DoNotOptimize(list);
    }
}

BENCHMARK(psi_ca_round)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(psi_round)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(psi_dt_round)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(pjs_round)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK(set_intersection_size)->Arg(1024);
BENCHMARK(set_jaccard)->Arg(1024);
BENCHMARK(vector_pearson)->Arg(1024);
BENCHMARK(vector_cosine)->Arg(1024);

BENCHMARK(ewma_watchlist)->Arg(5)->Arg(30);

} // namespace

BENCHMARK_MAIN();
