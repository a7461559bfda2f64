#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coshare {

/// IPv4 address in host byte order.
using Ipv4 = std::uint32_t;

/// Parses dotted-quad notation. Octets may carry leading zeros
/// ("211.144.119.042" reads as 211.144.119.42). Returns nullopt on
/// anything that is not four in-range decimal octets.
std::optional<Ipv4> parse_ipv4(std::string_view text);

/// Canonical dotted-quad form: decimal octets, no zero padding.
std::string format_ipv4(Ipv4 ip);

/// A CIDR block: base address plus prefix length.
struct Ipv4Block {
    Ipv4 base = 0;
    int prefix_len = 32;

    static std::optional<Ipv4Block> parse(std::string_view cidr);

    bool contains(Ipv4 ip) const {
        if (prefix_len == 0) return true;
        const Ipv4 mask = ~Ipv4{0} << (32 - prefix_len);
        return (ip & mask) == (base & mask);
    }
    std::uint64_t address_count() const { return std::uint64_t{1} << (32 - prefix_len); }
    Ipv4 first() const {
        if (prefix_len == 0) return 0;
        return base & (~Ipv4{0} << (32 - prefix_len));
    }
    Ipv4 last() const { return static_cast<Ipv4>(first() + address_count() - 1); }

    std::string to_string() const;

    friend bool operator==(const Ipv4Block&, const Ipv4Block&) = default;
};

/// Address blocks excluded from cleaned datasets. The default list is
/// the IANA IPv4 special-purpose registry plus multicast and 240/4.
struct ReservedBlocks {
    struct Entry {
        Ipv4Block block;
        std::string name;
    };
    std::vector<Entry> entries;

    static const ReservedBlocks& defaults();

    /// Returns the first matching entry, or nullptr for a routable address.
    const Entry* match(Ipv4 ip) const;
};

inline Ipv4 slash24_of(Ipv4 ip) { return ip & 0xFFFFFF00u; }
inline Ipv4 slash8_of(Ipv4 ip) { return ip & 0xFF000000u; }

} // namespace coshare
