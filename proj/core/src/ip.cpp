#include "coshare/ip.hpp"

#include <charconv>

namespace coshare {

std::optional<Ipv4> parse_ipv4(std::string_view text) {
    Ipv4 value = 0;
    int octet_index = 0;
    std::size_t pos = 0;
    while (octet_index < 4) {
        std::size_t start = pos;
        unsigned octet = 0;
        int digits = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            octet = octet * 10 + static_cast<unsigned>(text[pos] - '0');
            ++digits;
            ++pos;
            if (octet > 255 || digits > 3) return std::nullopt;
        }
        if (digits == 0) return std::nullopt;
        (void)start;
        value = (value << 8) | octet;
        ++octet_index;
        if (octet_index < 4) {
            if (pos >= text.size() || text[pos] != '.') return std::nullopt;
            ++pos;
        }
    }
    if (pos != text.size()) return std::nullopt;
    return value;
}

std::string format_ipv4(Ipv4 ip) {
    char buf[20];
    char* p = buf;
    for (int shift = 24; shift >= 0; shift -= 8) {
        unsigned octet = (ip >> shift) & 0xFFu;
        auto [end, ec] = std::to_chars(p, buf + sizeof(buf), octet);
        p = end;
        if (shift != 0) *p++ = '.';
    }
    return std::string(buf, p);
}

std::optional<Ipv4Block> Ipv4Block::parse(std::string_view cidr) {
    auto slash = cidr.find('/');
    if (slash == std::string_view::npos) {
        auto ip = parse_ipv4(cidr);
        if (!ip) return std::nullopt;
        return Ipv4Block{*ip, 32};
    }
    auto ip = parse_ipv4(cidr.substr(0, slash));
    if (!ip) return std::nullopt;
    int len = 0;
    auto tail = cidr.substr(slash + 1);
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), len);
    if (ec != std::errc{} || ptr != tail.data() + tail.size()) return std::nullopt;
    if (len < 0 || len > 32) return std::nullopt;
    return Ipv4Block{*ip, len};
}

std::string Ipv4Block::to_string() const {
    return format_ipv4(first()) + "/" + std::to_string(prefix_len);
}

const ReservedBlocks& ReservedBlocks::defaults() {
    static const ReservedBlocks list{{
        {{0x00000000u, 8}, "this-network"},
        {{0x0A000000u, 8}, "private-10"},
        {{0x64400000u, 10}, "shared-cgn"},
        {{0x7F000000u, 8}, "loopback"},
        {{0xA9FE0000u, 16}, "link-local"},
        {{0xAC100000u, 12}, "private-172"},
        {{0xC0000000u, 24}, "ietf-protocol"},
        {{0xC0000200u, 24}, "test-net-1"},
        {{0xC0586300u, 24}, "6to4-relay"},
        {{0xC0A80000u, 16}, "private-192"},
        {{0xC6120000u, 15}, "benchmark"},
        {{0xC6336400u, 24}, "test-net-2"},
        {{0xCB007100u, 24}, "test-net-3"},
        {{0xE0000000u, 4}, "multicast"},
        {{0xF0000000u, 4}, "reserved-240"},
    }};
    return list;
}

const ReservedBlocks::Entry* ReservedBlocks::match(Ipv4 ip) const {
    for (const auto& entry : entries) {
        if (entry.block.contains(ip)) return &entry;
    }
    return nullptr;
}

} // namespace coshare
