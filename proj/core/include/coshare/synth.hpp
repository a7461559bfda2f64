#pragma once

#include <cstdint>
#include <vector>

#include "coshare/event.hpp"

namespace coshare {

/// Knobs for the synthetic attack-log generator. Fractions describe the
/// marginal intensity profiles the output should exhibit: victims split
/// into rare (<10 attacks/day), light (10-100), and heavy (>100)
/// classes; attackers into stealth (<10 attacks/day) and heavy hitters.
struct SynthConfig {
    std::size_t n_victims = 100;
    std::size_t n_attackers = 1000; // pool capacity, not an exact count
    int n_days = 14;

    double victim_rare_frac = 0.87;
    double victim_light_frac = 0.11;
    double victim_heavy_frac = 0.02;

    double attacker_stealth_frac = 0.8;
    double attacker_heavy_frac = 0.2;

    std::size_t hitlist_count = 10; // coordinated target lists
    std::size_t hitlist_size = 5;   // victims per list
    int burst_window_seconds = 180;

    std::uint64_t rng_seed = 1;

    /// Raises ConfigError on out-of-range fields or mixes not summing
    /// to one.
    void validate() const;
};

/// Produces a seeded synthetic dataset matching the config's marginal
/// profiles. Deterministic: equal configs give identical datasets.
/// Raises ConfigError for infeasible configs (hit-lists larger than the
/// victim population, or demand exceeding the attacker pool).
///
/// Shape of the output:
///   - every victim is served by private stealth attackers, so victim
///     pairs share no sources unless a hit-list links them;
///   - heavy hitters direct the bulk of their traffic at one light or
///     heavy victim and, when assigned to a hit-list crew, additionally
///     sweep that list in sub-burst_window coordinated bursts, hitting
///     each listed victim with probability ~0.5-0.8 per burst. Those
///     partial sweeps are what collaborative prediction can exploit.
Dataset generate(const SynthConfig& config);

/// generate() plus the ground-truth coordination layout, for tests and
/// experiment diagnostics that need to know which victims were linked.
struct SynthOutput {
    Dataset dataset;
    std::vector<std::vector<std::string>> hitlists; // victim ids per list
};

SynthOutput generate_detailed(const SynthConfig& config);

/// Empirical marginals of a dataset, in the generator's own units, for
/// comparing output against a SynthConfig.
struct SynthFidelityReport {
    std::size_t victims = 0;
    std::size_t attackers = 0; // distinct source addresses
    std::size_t events = 0;
    int days = 0;

    // Victim mix by average attacks/day: <10, 10-100, >100.
    double victim_rare_frac = 0;
    double victim_light_frac = 0;
    double victim_heavy_frac = 0;

    // Attacker mix by average attacks/day: <10 vs >=10.
    double attacker_stealth_frac = 0;
    double attacker_heavy_frac = 0;

    // Mean per-victim source split on the busiest day, as in the
    // shared/unique CDFs: sources also seen by another victim that day
    // vs seen by this victim alone.
    double mean_common_sources = 0;
    double mean_unique_sources = 0;
};

SynthFidelityReport describe(const Dataset& dataset);

} // namespace coshare
