#include "coshare/protocol.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>
#include <unordered_map>

#include <sodium.h>

#include "coshare/errors.hpp"

namespace coshare {

namespace {

constexpr std::size_t kPoint = crypto_core_ristretto255_BYTES;        // 32
constexpr std::size_t kScalar = crypto_core_ristretto255_SCALARBYTES; // 32
constexpr std::size_t kTag = 32;
constexpr std::size_t kBoxOverhead = crypto_secretbox_MACBYTES; // 16

void ensure_sodium() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        if (sodium_init() < 0) throw ProtocolError("libsodium initialization failed");
    });
}

void be32(std::uint32_t v, std::uint8_t* out) {
    out[0] = static_cast<std::uint8_t>(v >> 24);
    out[1] = static_cast<std::uint8_t>(v >> 16);
    out[2] = static_cast<std::uint8_t>(v >> 8);
    out[3] = static_cast<std::uint8_t>(v);
}

std::uint32_t rd32(const std::uint8_t* in) {
    return (std::uint32_t{in[0]} << 24) | (std::uint32_t{in[1]} << 16) |
           (std::uint32_t{in[2]} << 8) | std::uint32_t{in[3]};
}

void be64(std::uint64_t v, std::uint8_t* out) {
    be32(static_cast<std::uint32_t>(v >> 32), out);
    be32(static_cast<std::uint32_t>(v), out + 4);
}

std::uint64_t rd64(const std::uint8_t* in) {
    return (std::uint64_t{rd32(in)} << 32) | rd32(in + 4);
}

using Point = std::array<std::uint8_t, kPoint>;
using Scalar = std::array<std::uint8_t, kScalar>;
using Tag = std::array<std::uint8_t, kTag>;

struct TagHash {
    std::size_t operator()(const Tag& t) const {
        std::size_t h;
        std::memcpy(&h, t.data(), sizeof(h));
        return h;
    }
};

// Domain-separated BLAKE2b.
void labeled_hash(std::uint8_t* out, std::size_t out_len, const char* label,
                  const std::uint8_t* msg, std::size_t msg_len) {
    crypto_generichash(out, out_len, msg, msg_len,
                       reinterpret_cast<const unsigned char*>(label), std::strlen(label));
}

/// Hash an address onto the group: 64-byte expansion, then the
/// ristretto255 from-hash map (uniform over the group).
Point hash_to_group(Ipv4 ip, const GroupParams& params) {
    std::uint8_t msg[4];
    be32(ip, msg);
    std::uint8_t wide[64];
    labeled_hash(wide, sizeof(wide), params.hash_label.c_str(), msg, sizeof(msg));
    Point p;
    crypto_core_ristretto255_from_hash(p.data(), wide);
    return p;
}

Point mult(const Scalar& k, const Point& p) {
    Point out;
    if (crypto_scalarmult_ristretto255(out.data(), k.data(), p.data()) != 0)
        throw ProtocolError("group operation failed (degenerate element)");
    return out;
}

Tag tag_of(const Point& p) {
    Tag t;
    labeled_hash(t.data(), t.size(), "coshare-tag-v1", p.data(), p.size());
    return t;
}

std::array<std::uint8_t, crypto_secretbox_KEYBYTES> record_key(const Point& p) {
    std::array<std::uint8_t, crypto_secretbox_KEYBYTES> key;
    labeled_hash(key.data(), key.size(), "coshare-key-v1", p.data(), p.size());
    return key;
}

Scalar fresh_secret() {
    ensure_sodium();
    Scalar s;
    do {
        crypto_core_ristretto255_scalar_random(s.data());
    } while (sodium_is_zero(s.data(), s.size()));
    return s;
}

// Fisher-Yates with sodium's CSPRNG: protocol randomness is independent
// of the simulator's seeded streams.
std::vector<std::size_t> random_permutation(std::size_t n) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = randombytes_uniform(static_cast<std::uint32_t>(i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

std::vector<std::uint8_t> encode_records(const std::vector<AssociatedRecord>& records) {
    std::vector<std::uint8_t> out(4 + records.size() * 12);
    be32(static_cast<std::uint32_t>(records.size()), out.data());
    for (std::size_t i = 0; i < records.size(); ++i) {
        be64(static_cast<std::uint64_t>(records[i].timestamp), out.data() + 4 + i * 12);
        be32(static_cast<std::uint32_t>(records[i].port), out.data() + 4 + i * 12 + 8);
    }
    return out;
}

std::vector<AssociatedRecord> decode_records(const std::uint8_t* data, std::size_t len) {
    if (len < 4) throw ProtocolError("psi_dt: truncated record bundle");
    std::uint32_t n = rd32(data);
    if (len != 4 + std::size_t{n} * 12) throw ProtocolError("psi_dt: malformed record bundle");
    std::vector<AssociatedRecord> out(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        out[i].timestamp = static_cast<std::int64_t>(rd64(data + 4 + i * 12));
        out[i].port = static_cast<int>(rd32(data + 4 + i * 12 + 8));
    }
    return out;
}

} // namespace

const GroupParams& GroupParams::defaults() {
    static const GroupParams params;
    return params;
}

std::array<std::uint8_t, 32> GroupParams::digest() const {
    ensure_sodium();
    std::string desc = group_name + "\x1f" + hash_label;
    std::array<std::uint8_t, 32> d;
    labeled_hash(d.data(), d.size(), "coshare-params-v1",
                 reinterpret_cast<const std::uint8_t*>(desc.data()), desc.size());
    return d;
}

void DuplexChannel::send(Direction direction, MessageKind kind,
                         std::vector<std::uint8_t> payload, std::size_t element_count) {
    if (fail_after_ && sent_ >= *fail_after_)
        throw ProtocolError("channel failure injected after " + std::to_string(sent_) +
                            " messages");
    ++sent_;
    log_.push_back(Message{direction, kind, std::move(payload), element_count});
}

DuplexChannel::Message DuplexChannel::receive(Direction expected) {
    std::size_t& cursor = expected == Direction::client_to_server ? next_c2s_ : next_s2c_;
    for (std::size_t i = cursor; i < log_.size(); ++i) {
        if (log_[i].direction != expected) continue;
        cursor = i + 1;
        return log_[i];
    }
    throw ProtocolError("receive: no pending message in requested direction");
}

Transcript DuplexChannel::transcript() const {
    Transcript t;
    t.reserve(log_.size());
    for (const Message& m : log_)
        t.push_back(TranscriptEntry{m.direction, m.kind, m.payload.size(), m.element_count});
    return t;
}

void DuplexChannel::clear() {
    log_.clear();
    next_c2s_ = next_s2c_ = 0;
    sent_ = 0;
    fail_after_.reset();
}

void DuplexChannel::write_replay(std::ostream& out) const {
    for (const Message& m : log_) {
        std::uint8_t header[6];
        be32(static_cast<std::uint32_t>(m.payload.size() + 2), header);
        header[4] = static_cast<std::uint8_t>(m.direction);
        header[5] = static_cast<std::uint8_t>(m.kind);
        out.write(reinterpret_cast<const char*>(header), sizeof(header));
        out.write(reinterpret_cast<const char*>(m.payload.data()),
                  static_cast<std::streamsize>(m.payload.size()));
    }
    if (!out) throw DataError("write_replay: write failure");
}

std::vector<DuplexChannel::ReplayFrame> DuplexChannel::read_replay(std::istream& in) {
    std::vector<ReplayFrame> frames;
    std::uint8_t header[6];
    while (in.read(reinterpret_cast<char*>(header), 4)) {
        std::uint32_t length = rd32(header);
        if (length < 2) throw DataError("read_replay: frame shorter than its envelope");
        if (!in.read(reinterpret_cast<char*>(header + 4), 2))
            throw DataError("read_replay: truncated frame header");
        ReplayFrame f;
        f.direction = static_cast<Direction>(header[4]);
        f.kind = static_cast<MessageKind>(header[5]);
        f.payload.resize(length - 2);
        if (!in.read(reinterpret_cast<char*>(f.payload.data()),
                     static_cast<std::streamsize>(f.payload.size())))
            throw DataError("read_replay: truncated frame payload");
        frames.push_back(std::move(f));
    }
    return frames;
}

PartySession::PartySession(Role role, SourceSet input, AssociatedData associated,
                           GroupParams params)
    : role_(role), input_(std::move(input)), associated_(std::move(associated)),
      params_(std::move(params)) {
    Scalar s = fresh_secret();
    std::copy(s.begin(), s.end(), key_.begin());
}

PartySession PartySession::client(SourceSet input, const GroupParams& params) {
    return PartySession(Role::client, std::move(input), {}, params);
}

PartySession PartySession::server(SourceSet input, const GroupParams& params) {
    return PartySession(Role::server, std::move(input), {}, params);
}

PartySession PartySession::server_with_data(SourceSet input, AssociatedData records,
                                            const GroupParams& params) {
    return PartySession(Role::server, std::move(input), std::move(records), params);
}

namespace {

enum class Variant { psi, psi_ca, psi_dt };

struct RunResult {
    std::size_t count = 0;             // psi_ca
    std::vector<Ipv4> members;         // psi
    std::vector<PsiDtItem> items;      // psi_dt
};

// The DH-style exchange shared by psi, psi_ca, and psi_dt. The caller
// is the in-process scheduler: it advances each side's step in order
// over the shared channel.
RunResult run_exchange(PartySession& server, PartySession& client, DuplexChannel& channel,
                       Variant variant) {
    ensure_sodium();
    if (server.role() != PartySession::Role::server ||
        client.role() != PartySession::Role::client)
        throw ProtocolError("sessions passed with swapped roles");

    if (variant == Variant::psi_dt)
        for (Ipv4 ip : server.input().ips)
            if (!server.associated_data().count(ip))
                throw InputError("psi_dt: server lacks records for " + format_ipv4(ip));

    // Handshake: both directions carry the group-params digest.
    auto client_digest = client.params().digest();
    channel.send(Direction::client_to_server,
                 MessageKind::handshake,
                 std::vector<std::uint8_t>(client_digest.begin(), client_digest.end()), 0);
    auto seen = channel.receive(Direction::client_to_server);
    auto server_digest = server.params().digest();
    if (seen.payload != std::vector<std::uint8_t>(server_digest.begin(), server_digest.end()))
        throw ProtocolError("handshake: group parameters differ");
    channel.send(Direction::server_to_client, MessageKind::handshake,
                 std::vector<std::uint8_t>(server_digest.begin(), server_digest.end()), 0);
    auto echo = channel.receive(Direction::server_to_client);
    if (echo.payload != std::vector<std::uint8_t>(client_digest.begin(), client_digest.end()))
        throw ProtocolError("handshake: group parameters differ");

    const std::vector<Ipv4>& c_items = client.input().ips;
    const std::vector<Ipv4>& s_items = server.input().ips;

    // Client blinds every element under one fresh exponent.
    Scalar r = fresh_secret();
    std::vector<std::uint8_t> blinded(c_items.size() * kPoint);
    for (std::size_t i = 0; i < c_items.size(); ++i) {
        Point p = mult(r, hash_to_group(c_items[i], client.params()));
        std::copy(p.begin(), p.end(), blinded.begin() + static_cast<std::ptrdiff_t>(i * kPoint));
    }
    channel.send(Direction::client_to_server, MessageKind::blinded_elements,
                 std::move(blinded), c_items.size());

    // Server exponentiates the client's points; psi_ca additionally
    // shuffles so the client cannot attribute matches.
    auto incoming = channel.receive(Direction::client_to_server);
    if (incoming.payload.size() != c_items.size() * kPoint)
        throw ProtocolError("blinded-element payload has unexpected size");
    Scalar k;
    std::copy(server.secret_key().begin(), server.secret_key().end(), k.begin());
    std::vector<std::size_t> eval_perm(c_items.size());
    for (std::size_t i = 0; i < eval_perm.size(); ++i) eval_perm[i] = i;
    if (variant == Variant::psi_ca) eval_perm = random_permutation(c_items.size());
    std::vector<std::uint8_t> evaluated(c_items.size() * kPoint);
    for (std::size_t i = 0; i < c_items.size(); ++i) {
        Point p;
        std::copy_n(incoming.payload.begin() + static_cast<std::ptrdiff_t>(i * kPoint), kPoint,
                    p.begin());
        Point q = mult(k, p);
        std::copy(q.begin(), q.end(),
                  evaluated.begin() + static_cast<std::ptrdiff_t>(eval_perm[i] * kPoint));
    }
    channel.send(Direction::server_to_client, MessageKind::evaluated_elements,
                 std::move(evaluated), c_items.size());

    // Server's own elements go out as opaque tags, always shuffled, so
    // their transmission order leaks nothing about the sorted inputs.
    std::vector<std::size_t> tag_perm = random_permutation(s_items.size());
    std::vector<std::uint8_t> tags(s_items.size() * kTag);
    std::vector<Point> s_points(s_items.size());
    for (std::size_t j = 0; j < s_items.size(); ++j) {
        s_points[j] = mult(k, hash_to_group(s_items[j], server.params()));
        Tag t = tag_of(s_points[j]);
        std::copy(t.begin(), t.end(),
                  tags.begin() + static_cast<std::ptrdiff_t>(tag_perm[j] * kTag));
    }
    channel.send(Direction::server_to_client, MessageKind::server_elements, std::move(tags),
                 s_items.size());

    if (variant == Variant::psi_dt) {
        // Per-item bundles, keyed by the doubly-blinded element and sent
        // in tag order. The zero nonce is safe: every key is used once
        // (fresh server exponent per session).
        std::vector<std::vector<std::uint8_t>> boxes(s_items.size());
        for (std::size_t j = 0; j < s_items.size(); ++j) {
            auto plain = encode_records(server.associated_data().at(s_items[j]));
            std::vector<std::uint8_t> box(plain.size() + kBoxOverhead);
            std::uint8_t nonce[crypto_secretbox_NONCEBYTES] = {0};
            crypto_secretbox_easy(box.data(), plain.data(), plain.size(), nonce,
                                  record_key(s_points[j]).data());
            boxes[tag_perm[j]] = std::move(box);
        }
        std::vector<std::uint8_t> bundle;
        for (const auto& box : boxes) {
            std::uint8_t len[4];
            be32(static_cast<std::uint32_t>(box.size()), len);
            bundle.insert(bundle.end(), len, len + 4);
            bundle.insert(bundle.end(), box.begin(), box.end());
        }
        channel.send(Direction::server_to_client, MessageKind::data_ciphertexts,
                     std::move(bundle), s_items.size());
    }

    // Client unblinds and matches.
    auto eval_msg = channel.receive(Direction::server_to_client);
    auto tags_msg = channel.receive(Direction::server_to_client);
    if (eval_msg.payload.size() != c_items.size() * kPoint ||
        tags_msg.payload.size() != s_items.size() * kTag)
        throw ProtocolError("evaluated/tag payload has unexpected size");

    Scalar r_inv;
    if (crypto_core_ristretto255_scalar_invert(r_inv.data(), r.data()) != 0)
        throw ProtocolError("blinding exponent not invertible");

    std::unordered_map<Tag, std::size_t, TagHash> tag_index;
    tag_index.reserve(s_items.size() * 2);
    for (std::size_t j = 0; j < s_items.size(); ++j) {
        Tag t;
        std::copy_n(tags_msg.payload.begin() + static_cast<std::ptrdiff_t>(j * kTag), kTag,
                    t.begin());
        tag_index.emplace(t, j);
    }

    RunResult result;
    std::vector<std::uint8_t> match_bitmap((s_items.size() + 7) / 8, 0);
    struct Match {
        Ipv4 ip;
        std::size_t slot; // server tag position
        Point point;      // doubly-exponentiated element, keys the records
    };
    std::vector<Match> matches;
    for (std::size_t i = 0; i < c_items.size(); ++i) {
        Point b;
        std::copy_n(eval_msg.payload.begin() + static_cast<std::ptrdiff_t>(i * kPoint), kPoint,
                    b.begin());
        Point u = mult(r_inv, b);
        auto hit = tag_index.find(tag_of(u));
        if (hit == tag_index.end()) continue;
        ++result.count;
        match_bitmap[hit->second / 8] |=
            static_cast<std::uint8_t>(1u << (hit->second % 8));
        // Without the shuffle, slot i of the reply is the client's own
        // element i, so the match is attributable.
        if (variant != Variant::psi_ca) matches.push_back(Match{c_items[i], hit->second, u});
    }
    std::sort(matches.begin(), matches.end(),
              [](const Match& a, const Match& b) { return a.ip < b.ip; });
    for (const Match& m : matches) result.members.push_back(m.ip);

    if (variant == Variant::psi_dt) {
        auto boxes_msg = channel.receive(Direction::server_to_client);
        // Split the bundle back into per-slot ciphertexts.
        std::vector<std::pair<std::size_t, std::size_t>> spans(s_items.size()); // offset,len
        std::size_t off = 0;
        for (std::size_t j = 0; j < s_items.size(); ++j) {
            if (off + 4 > boxes_msg.payload.size())
                throw ProtocolError("psi_dt: ciphertext bundle truncated");
            std::uint32_t len = rd32(boxes_msg.payload.data() + off);
            off += 4;
            if (off + len > boxes_msg.payload.size())
                throw ProtocolError("psi_dt: ciphertext bundle truncated");
            spans[j] = {off, len};
            off += len;
        }
        for (const Match& m : matches) {
            auto [box_off, box_len] = spans[m.slot];
            if (box_len < kBoxOverhead) throw ProtocolError("psi_dt: ciphertext too short");
            std::vector<std::uint8_t> plain(box_len - kBoxOverhead);
            std::uint8_t nonce[crypto_secretbox_NONCEBYTES] = {0};
            if (crypto_secretbox_open_easy(plain.data(), boxes_msg.payload.data() + box_off,
                                           box_len, nonce, record_key(m.point).data()) != 0)
                throw ProtocolError("psi_dt: record decryption failed on a matched item");
            PsiDtItem item;
            item.ip = m.ip;
            item.records = decode_records(plain.data(), plain.size());
            result.items.push_back(std::move(item));
        }
    }

    // Mutual reporting. Count protocols report an 8-byte value; member
    // protocols report a fixed-width bitmap over the server's permuted
    // tag slots, so the report length depends only on |S|.
    if (variant == Variant::psi_ca) {
        std::vector<std::uint8_t> report(8);
        be64(result.count, report.data());
        channel.send(Direction::client_to_server, MessageKind::output_report,
                     std::move(report), 1);
    } else {
        channel.send(Direction::client_to_server, MessageKind::output_report,
                     std::move(match_bitmap), s_items.size());
    }
    channel.receive(Direction::client_to_server);

    return result;
}

} // namespace

std::size_t psi_ca(PartySession& server, PartySession& client, DuplexChannel& channel) {
    return run_exchange(server, client, channel, Variant::psi_ca).count;
}

std::vector<Ipv4> psi(PartySession& server, PartySession& client, DuplexChannel& channel) {
    return run_exchange(server, client, channel, Variant::psi).members;
}

std::vector<PsiDtItem> psi_dt(PartySession& server, PartySession& client,
                              DuplexChannel& channel) {
    return run_exchange(server, client, channel, Variant::psi_dt).items;
}

double pjs(PartySession& server, PartySession& client, DuplexChannel& channel) {
    if (server.input().empty() && client.input().empty())
        throw InputError("pjs: both sets empty");
    std::size_t inter = run_exchange(server, client, channel, Variant::psi_ca).count;
    // |S| and |C| are inherent leakage of the exchange (element counts),
    // so the ratio costs nothing extra.
    return static_cast<double>(inter) /
           static_cast<double>(server.input().size() + client.input().size() - inter);
}

double simulated_private_correlation(const BinaryAttackVector& u, const BinaryAttackVector& v,
                                     CorrelationMetric metric, Transcript* transcript) {
    double value = metric == CorrelationMetric::pearson ? pearson(u, v) : cosine(u, v);
    if (transcript) {
        // Ideal world: the evaluator learns two length-N inputs and
        // publishes one 8-byte result; nothing crosses a visible wire.
        transcript->push_back(TranscriptEntry{Direction::client_to_server,
                                              MessageKind::ideal_input, 0,
                                              static_cast<std::size_t>(u.size())});
        transcript->push_back(TranscriptEntry{Direction::server_to_client,
                                              MessageKind::ideal_output, 8, 1});
    }
    return value;
}

LeakageProfile leakage_profile(const Transcript& transcript) {
    LeakageProfile profile;
    profile.message_count = transcript.size();
    profile.steps = transcript;
    return profile;
}

} // namespace coshare
