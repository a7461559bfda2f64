#include "coshare/similarity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "coshare/errors.hpp"

namespace coshare {

IpRange IpRange::of(std::vector<Ipv4Block> blocks) {
    if (blocks.empty()) throw InputError("IpRange: no blocks");
    std::sort(blocks.begin(), blocks.end(),
              [](const Ipv4Block& a, const Ipv4Block& b) { return a.first() < b.first(); });
    for (std::size_t i = 1; i < blocks.size(); ++i) {
        if (blocks[i].first() <= blocks[i - 1].last())
            throw InputError("IpRange: overlapping blocks " + blocks[i - 1].to_string() +
                             " and " + blocks[i].to_string());
    }
    IpRange range;
    range.blocks_ = std::move(blocks);
    range.starts_.reserve(range.blocks_.size());
    for (const Ipv4Block& b : range.blocks_) {
        range.starts_.push_back(range.total_);
        range.total_ += b.address_count();
    }
    return range;
}

std::optional<std::uint64_t> IpRange::index_of(Ipv4 ip) const {
    // Last block whose first address is <= ip.
    auto it = std::upper_bound(blocks_.begin(), blocks_.end(), ip,
                               [](Ipv4 v, const Ipv4Block& b) { return v < b.first(); });
    if (it == blocks_.begin()) return std::nullopt;
    --it;
    if (ip > it->last()) return std::nullopt;
    std::size_t i = static_cast<std::size_t>(it - blocks_.begin());
    return starts_[i] + (ip - it->first());
}

Ipv4 IpRange::address_at(std::uint64_t index) const {
    auto it = std::upper_bound(starts_.begin(), starts_.end(), index);
    std::size_t i = static_cast<std::size_t>(it - starts_.begin()) - 1;
    return static_cast<Ipv4>(blocks_[i].first() + (index - starts_[i]));
}

std::uint64_t BinaryAttackVector::popcount() const {
    std::uint64_t n = 0;
    for (std::uint64_t w : words) n += static_cast<std::uint64_t>(std::popcount(w));
    return n;
}

RangePolicy RangePolicy::public_list(std::vector<Ipv4Block> blocks) {
    RangePolicy p;
    p.kind = Kind::public_list;
    p.blocks = std::move(blocks);
    return p;
}

RangePolicy RangePolicy::observed_blocks(int prefix_len) {
    RangePolicy p;
    p.kind = Kind::observed_blocks;
    p.prefix_len = prefix_len;
    return p;
}

std::size_t intersection_size(const SourceSet& a, const SourceSet& b) {
    // Both lists are sorted and unique; single merge pass.
    std::size_t n = 0;
    auto ia = a.ips.begin(), ib = b.ips.begin();
    while (ia != a.ips.end() && ib != b.ips.end()) {
        if (*ia < *ib)
            ++ia;
        else if (*ib < *ia)
            ++ib;
        else {
            ++n;
            ++ia;
            ++ib;
        }
    }
    return n;
}

double jaccard(const SourceSet& a, const SourceSet& b) {
    if (a.empty() && b.empty()) throw InputError("jaccard: both sets empty");
    std::size_t inter = intersection_size(a, b);
    return static_cast<double>(inter) /
           static_cast<double>(a.size() + b.size() - inter);
}

IpRange agree_range(const SourceSet& a, const SourceSet& b, const RangePolicy& policy) {
    if (policy.kind == RangePolicy::Kind::public_list) {
        if (policy.blocks.empty()) throw InputError("agree_range: empty public block list");
        return IpRange::of(policy.blocks);
    }

    if (policy.prefix_len < 1 || policy.prefix_len > 32)
        throw InputError("agree_range: prefix length out of range");
    const Ipv4 mask = ~Ipv4{0} << (32 - policy.prefix_len);
    std::vector<Ipv4> bases;
    bases.reserve(a.size() + b.size());
    for (Ipv4 ip : a.ips) bases.push_back(ip & mask);
    for (Ipv4 ip : b.ips) bases.push_back(ip & mask);
    std::sort(bases.begin(), bases.end());
    bases.erase(std::unique(bases.begin(), bases.end()), bases.end());
    if (bases.empty()) throw InputError("agree_range: no observed addresses");

    std::vector<Ipv4Block> blocks;
    blocks.reserve(bases.size());
    for (Ipv4 base : bases) blocks.push_back(Ipv4Block{base, policy.prefix_len});
    return IpRange::of(std::move(blocks));
}

BinaryAttackVector to_vector(const SourceSet& set, const IpRange& range) {
    BinaryAttackVector v;
    v.range = range;
    v.words.assign(static_cast<std::size_t>((range.address_count() + 63) / 64), 0);
    for (Ipv4 ip : set.ips) {
        if (std::optional<std::uint64_t> idx = range.index_of(ip))
            v.words[*idx >> 6] |= std::uint64_t{1} << (*idx & 63);
        else
            ++v.outside_range;
    }
    return v;
}

namespace {

struct PairCounts {
    std::uint64_t n = 0;   // vector length
    std::uint64_t n11 = 0; // both set
    std::uint64_t nu = 0;  // set in u
    std::uint64_t nv = 0;  // set in v
};

PairCounts count_pair(const BinaryAttackVector& u, const BinaryAttackVector& v,
                      const char* op) {
    if (u.range != v.range)
        throw InputError(std::string(op) + ": vectors built over different ranges");
    PairCounts c;
    c.n = u.size();
    for (std::size_t i = 0; i < u.words.size(); ++i) {
        c.n11 += static_cast<std::uint64_t>(std::popcount(u.words[i] & v.words[i]));
        c.nu += static_cast<std::uint64_t>(std::popcount(u.words[i]));
        c.nv += static_cast<std::uint64_t>(std::popcount(v.words[i]));
    }
    return c;
}

} // namespace

double pearson(const BinaryAttackVector& u, const BinaryAttackVector& v) {
    PairCounts c = count_pair(u, v, "pearson");
    if (c.nu == 0 || c.nu == c.n || c.nv == 0 || c.nv == c.n)
        throw InputError("pearson: constant vector has no defined correlation");
    // For 0/1 entries the covariance reduces to counts:
    //   N·Σuv − Σu·Σv = N·n11 − nu·nv,  N²σ² = n1(N−n1).
    // Products stay exact in 128-bit for any 32-bit address range.
    using I128 = __int128;
    using U128 = unsigned __int128;
    I128 num = I128(c.n) * I128(c.n11) - I128(c.nu) * I128(c.nv);
    U128 d1 = U128(c.nu) * U128(c.n - c.nu);
    U128 d2 = U128(c.nv) * U128(c.n - c.nv);
    // Cauchy-Schwarz equality means perfect (anti-)correlation; decide
    // it on the exact integers so identical vectors give exactly ±1.
    U128 num_abs = num < 0 ? U128(-num) : U128(num);
    if (num_abs * num_abs == d1 * d2) return num < 0 ? -1.0 : 1.0;
    double denom = std::sqrt(static_cast<double>(d1)) * std::sqrt(static_cast<double>(d2));
    return static_cast<double>(num) / denom;
}

double cosine(const BinaryAttackVector& u, const BinaryAttackVector& v) {
    PairCounts c = count_pair(u, v, "cosine");
    if (c.nu == 0 || c.nv == 0) throw InputError("cosine: zero vector has no defined angle");
    return static_cast<double>(c.n11) /
           std::sqrt(static_cast<double>(c.nu) * static_cast<double>(c.nv));
}

} // namespace coshare
