#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "coshare/event.hpp"
#include "coshare/ip.hpp"

namespace coshare {

/// An agreed address range: sorted, disjoint CIDR blocks. Binary attack
/// vectors are defined bit-for-address over the concatenated blocks.
class IpRange {
public:
    /// Validates, sorts, and indexes the blocks. Raises InputError on an
    /// empty list or overlapping blocks.
    static IpRange of(std::vector<Ipv4Block> blocks);

    const std::vector<Ipv4Block>& blocks() const { return blocks_; }
    std::uint64_t address_count() const { return total_; }

    /// Position of `ip` within the concatenated range, or nullopt if the
    /// address lies in none of the blocks.
    std::optional<std::uint64_t> index_of(Ipv4 ip) const;

    /// Address at position `index` (inverse of index_of).
    Ipv4 address_at(std::uint64_t index) const;

    friend bool operator==(const IpRange&, const IpRange&) = default;

private:
    std::vector<Ipv4Block> blocks_;
    std::vector<std::uint64_t> starts_; // starts_[i] = index of blocks_[i]'s first address
    std::uint64_t total_ = 0;
};

/// Dense packed bit vector over an IpRange: bit l = 1 iff the l-th
/// address of the range attacked at least once in the window.
struct BinaryAttackVector {
    IpRange range;
    std::vector<std::uint64_t> words; // LSB-first packing, trailing bits zero
    std::uint64_t outside_range = 0;  // set addresses that fell in no block

    std::uint64_t size() const { return range.address_count(); }
    bool test(std::uint64_t index) const {
        return (words[index >> 6] >> (index & 63)) & 1u;
    }
    std::uint64_t popcount() const;
};

/// How two parties fix the address range before exchanging vectors.
struct RangePolicy {
    /// Use a configured public block list verbatim.
    static RangePolicy public_list(std::vector<Ipv4Block> blocks);
    /// Union of the /prefix_len blocks containing either party's
    /// addresses. Simple, but reveals block-level presence to whoever
    /// computes it — use only where that leak is acceptable.
    static RangePolicy observed_blocks(int prefix_len = 24);

    enum class Kind { public_list, observed_blocks };
    Kind kind = Kind::observed_blocks;
    std::vector<Ipv4Block> blocks; // public_list only
    int prefix_len = 24;           // observed_blocks only
};

/// |a ∩ b| over the sorted unique address lists.
std::size_t intersection_size(const SourceSet& a, const SourceSet& b);

/// |a ∩ b| / |a ∪ b|. Raises InputError when both sets are empty.
double jaccard(const SourceSet& a, const SourceSet& b);

/// Resolves the address range two parties will build vectors over.
/// Raises InputError if the policy yields an empty range.
IpRange agree_range(const SourceSet& a, const SourceSet& b, const RangePolicy& policy);

/// Projects a source set onto a range. Addresses outside the range are
/// skipped and counted in the result's outside_range.
BinaryAttackVector to_vector(const SourceSet& set, const IpRange& range);

/// Population Pearson correlation of two equal-range binary vectors:
/// (N·n11 − n1·n1') / √(n1(N−n1)) / √(n1'(N−n1')). Raises InputError on
/// mismatched ranges or a constant vector (σ = 0).
double pearson(const BinaryAttackVector& u, const BinaryAttackVector& v);

/// Cosine similarity n11 / √(n1·n1'). Raises InputError on mismatched
/// ranges or an all-zero vector.
double cosine(const BinaryAttackVector& u, const BinaryAttackVector& v);

} // namespace coshare
