#include "coshare/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "coshare/errors.hpp"

namespace coshare {

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : samples_(std::move(samples)) {
    std::sort(samples_.begin(), samples_.end());
}

double EmpiricalCdf::operator()(double x) const {
    if (samples_.empty()) return 0.0;
    auto it = std::upper_bound(samples_.begin(), samples_.end(), x);
    return static_cast<double>(it - samples_.begin()) / static_cast<double>(samples_.size());
}

double EmpiricalCdf::min() const {
    if (samples_.empty()) throw InputError("EmpiricalCdf: no samples");
    return samples_.front();
}

double EmpiricalCdf::max() const {
    if (samples_.empty()) throw InputError("EmpiricalCdf: no samples");
    return samples_.back();
}

double EmpiricalCdf::quantile(double q) const {
    if (samples_.empty()) throw InputError("EmpiricalCdf: no samples");
    if (q < 0.0 || q > 1.0) throw InputError("EmpiricalCdf: quantile order outside [0,1]");
    if (samples_.size() == 1) return samples_[0];
    double pos = q * static_cast<double>(samples_.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= samples_.size()) return samples_.back();
    double frac = pos - static_cast<double>(lo);
    return samples_[lo] + frac * (samples_[lo + 1] - samples_[lo]);
}

std::vector<DailyStats> daily_stats(const Dataset& dataset) {
    if (dataset.empty()) return {};
    std::vector<DailyStats> out(static_cast<std::size_t>(dataset.days()));
    std::vector<std::set<std::string>> targets(out.size());
    std::vector<std::set<Ipv4>> sources(out.size());
    for (std::size_t d = 0; d < out.size(); ++d) out[d].day = static_cast<int>(d) + 1;
    for (const AttackEvent& e : dataset.events()) {
        std::size_t d = static_cast<std::size_t>(dataset.day_of(e)) - 1;
        ++out[d].total_attacks;
        targets[d].insert(e.contributor);
        sources[d].insert(e.source_ip);
    }
    for (std::size_t d = 0; d < out.size(); ++d) {
        out[d].unique_targets = targets[d].size();
        out[d].unique_sources = sources[d].size();
    }
    return out;
}

SharedUniqueCdfs shared_unique_cdf(const Dataset& dataset, int day, Perspective perspective) {
    if (day < 1 || day > dataset.days())
        throw InputError("shared_unique_cdf: day outside dataset span");

    // entity -> distinct counterpart keys on that day. For the victim
    // perspective entities are victims and counterparts sources; the
    // source perspective swaps the roles.
    std::map<std::string, std::set<std::string>> seen;
    for (const AttackEvent& e : dataset.events()) {
        if (dataset.day_of(e) != day) continue;
        if (perspective == Perspective::victim)
            seen[e.contributor].insert(format_ipv4(e.source_ip));
        else
            seen[format_ipv4(e.source_ip)].insert(e.contributor);
    }

    // How many entities saw each counterpart today.
    std::unordered_map<std::string, int> holders;
    for (const auto& [entity, keys] : seen)
        for (const std::string& k : keys) ++holders[k];

    std::vector<double> common, unique;
    common.reserve(seen.size());
    unique.reserve(seen.size());
    for (const auto& [entity, keys] : seen) {
        double c = 0, u = 0;
        for (const std::string& k : keys)
            (holders[k] > 1 ? c : u) += 1;
        common.push_back(c);
        unique.push_back(u);
    }
    return SharedUniqueCdfs{EmpiricalCdf(std::move(common)), EmpiricalCdf(std::move(unique))};
}

EmpiricalCdf entropy_cdf(const Dataset& dataset, EntropyField field) {
    if (dataset.empty()) return EmpiricalCdf{};
    // Per day: value -> attack count. Keys are stringified for the
    // target field; numeric fields use their value directly.
    std::vector<std::map<std::string, std::size_t>> counts(
        static_cast<std::size_t>(dataset.days()));
    std::vector<std::size_t> totals(counts.size(), 0);
    for (const AttackEvent& e : dataset.events()) {
        std::size_t d = static_cast<std::size_t>(dataset.day_of(e)) - 1;
        std::string key;
        switch (field) {
            case EntropyField::port: key = std::to_string(e.target_port); break;
            case EntropyField::source: key = format_ipv4(e.source_ip); break;
            case EntropyField::target: key = e.contributor; break;
        }
        ++counts[d][key];
        ++totals[d];
    }
    std::vector<double> entropies;
    for (std::size_t d = 0; d < counts.size(); ++d) {
        if (totals[d] == 0) continue; // empty day: no sample
        double h = 0;
        for (const auto& [_, n] : counts[d]) {
            double p = static_cast<double>(n) / static_cast<double>(totals[d]);
            h -= p * std::log2(p);
        }
        entropies.push_back(h);
    }
    return EmpiricalCdf(std::move(entropies));
}

EmpiricalCdf interarrival_cdf(const Dataset& dataset, Grouping grouping, TimeUnit unit) {
    std::map<Ipv4, std::vector<std::int64_t>> groups;
    for (const AttackEvent& e : dataset.events()) {
        Ipv4 key = 0;
        switch (grouping) {
            case Grouping::all: key = 0; break;
            case Grouping::same_ip: key = e.source_ip; break;
            case Grouping::same_slash24: key = slash24_of(e.source_ip); break;
            case Grouping::same_slash8: key = slash8_of(e.source_ip); break;
        }
        groups[key].push_back(e.timestamp);
    }
    std::vector<double> gaps;
    const double scale = unit == TimeUnit::seconds ? 1.0 : 1.0 / 3600.0;
    for (auto& [_, times] : groups) {
        if (times.size() < 2) continue;
        std::sort(times.begin(), times.end());
        for (std::size_t i = 1; i < times.size(); ++i)
            gaps.push_back(static_cast<double>(times[i] - times[i - 1]) * scale);
    }
    return EmpiricalCdf(std::move(gaps));
}

} // namespace coshare
