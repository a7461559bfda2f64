#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coshare/event.hpp"
#include "coshare/similarity.hpp"

namespace coshare {

/// Two-party set protocols in the honest-but-curious model, built on a
/// prime-order group (ristretto255): both parties blind their elements
/// under secret exponents, so each run reveals only set sizes, the
/// protocol's defined output, and nothing about non-matching elements.

/// Prime-order group description. The concrete group is ristretto255
/// (order ~2^252, prime); hash-to-group maps arbitrary bytes onto the
/// group via a 64-byte hash expansion. Parties must agree on the digest
/// before exchanging elements.
struct GroupParams {
    std::string group_name = "ristretto255";
    std::string hash_label = "coshare-h2g-v1";

    static const GroupParams& defaults();
    std::array<std::uint8_t, 32> digest() const;

    friend bool operator==(const GroupParams&, const GroupParams&) = default;
};

enum class Direction : std::uint8_t { client_to_server = 0, server_to_client = 1 };

enum class MessageKind : std::uint8_t {
    handshake = 1,         // group-params digest
    blinded_elements = 2,  // client's H(c_i)^r, 32 bytes each
    evaluated_elements = 3, // server's (H(c_i)^r)^k, 32 bytes each
    server_elements = 4,   // tags H'(H(s_j)^k), 32 bytes each, shuffled
    data_ciphertexts = 5,  // per-item encrypted record bundles (psi_dt)
    output_report = 6,     // client's mutual report of the output
    ideal_input = 7,       // simulated-functionality input marker
    ideal_output = 8,      // simulated-functionality output marker
};

/// Size-only view of one message: what an observer of the wire learns.
struct TranscriptEntry {
    Direction direction;
    MessageKind kind;
    std::size_t payload_bytes = 0;
    std::size_t element_count = 0;

    friend bool operator==(const TranscriptEntry&, const TranscriptEntry&) = default;
};

/// Append-only leakage record of a protocol run.
using Transcript = std::vector<TranscriptEntry>;

/// In-process duplex channel. Captures every message for transcript
/// extraction, replay serialization, and payload inspection in tests.
/// Supports failure injection: the (n+1)-th send after fail_after(n)
/// raises ProtocolError, aborting the run.
class DuplexChannel {
public:
    struct Message {
        Direction direction;
        MessageKind kind;
        std::vector<std::uint8_t> payload;
        std::size_t element_count = 0;
    };

    void send(Direction direction, MessageKind kind, std::vector<std::uint8_t> payload,
              std::size_t element_count);
    /// Pops the oldest undelivered message toward `to`; ProtocolError if
    /// none is pending (protocol logic bug or injected failure upstream).
    Message receive(Direction expected);

    void fail_after(std::size_t messages) { fail_after_ = messages; }

    const std::vector<Message>& messages() const { return log_; }
    Transcript transcript() const;
    void clear();

    /// Length-prefixed binary framing: per message a 4-byte big-endian
    /// length (covering direction, kind, and payload), 1-byte direction,
    /// 1-byte kind, then the payload.
    void write_replay(std::ostream& out) const;
    struct ReplayFrame {
        Direction direction;
        MessageKind kind;
        std::vector<std::uint8_t> payload;
    };
    static std::vector<ReplayFrame> read_replay(std::istream& in);

private:
    std::vector<Message> log_;
    std::size_t next_c2s_ = 0, next_s2c_ = 0;
    std::optional<std::size_t> fail_after_;
    std::size_t sent_ = 0;
};

struct AssociatedRecord {
    std::int64_t timestamp = 0;
    int port = 0;
    friend bool operator==(const AssociatedRecord&, const AssociatedRecord&) = default;
};
using AssociatedData = std::map<Ipv4, std::vector<AssociatedRecord>>;

/// One protocol endpoint: a role, an input set, and a fresh uniform
/// secret exponent in [1, group order). The exponent never leaves the
/// session; use one session pair per run.
class PartySession {
public:
    enum class Role { client, server };

    static PartySession client(SourceSet input,
                               const GroupParams& params = GroupParams::defaults());
    static PartySession server(SourceSet input,
                               const GroupParams& params = GroupParams::defaults());
    static PartySession server_with_data(SourceSet input, AssociatedData records,
                                         const GroupParams& params = GroupParams::defaults());

    Role role() const { return role_; }
    const SourceSet& input() const { return input_; }
    const AssociatedData& associated_data() const { return associated_; }
    const GroupParams& params() const { return params_; }
    /// Exposed so tests can assert the key never appears on the wire.
    const std::array<std::uint8_t, 32>& secret_key() const { return key_; }

private:
    PartySession(Role role, SourceSet input, AssociatedData associated, GroupParams params);

    Role role_;
    SourceSet input_;
    AssociatedData associated_;
    GroupParams params_;
    std::array<std::uint8_t, 32> key_;
};

/// Private set-intersection cardinality: the client learns |S ∩ C| (the
/// server's reply is shuffled so matches cannot be attributed), then
/// reports the count back. Equals intersection_size exactly.
std::size_t psi_ca(PartySession& server, PartySession& client, DuplexChannel& channel);

/// Private set intersection: as psi_ca but without the shuffle, so the
/// client can attribute matches to its own elements. Returns S ∩ C
/// sorted; the client reports the matches as a bitmap over the server's
/// (permuted) element positions, keeping the report size-independent of
/// the intersection.
std::vector<Ipv4> psi(PartySession& server, PartySession& client, DuplexChannel& channel);

/// PSI with data transfer: the server attaches its records for every
/// element; the client decrypts exactly the records of S ∩ C. Each
/// record bundle is encrypted under a key derived from the element's
/// blinded form, so non-matching bundles stay opaque. Raises InputError
/// before any message if the server lacks records for some element.
struct PsiDtItem {
    Ipv4 ip = 0;
    std::vector<AssociatedRecord> records;
    friend bool operator==(const PsiDtItem&, const PsiDtItem&) = default;
};
std::vector<PsiDtItem> psi_dt(PartySession& server, PartySession& client,
                              DuplexChannel& channel);

/// Private Jaccard similarity: one psi_ca run plus the set sizes the
/// exchange inherently reveals. Equals plaintext jaccard exactly.
/// Raises InputError when both sets are empty.
double pjs(PartySession& server, PartySession& client, DuplexChannel& channel);

/// Ideal-functionality stand-in for the correlation metrics: a trusted
/// evaluator returns the plaintext value; the transcript records only
/// the vector length and that an 8-byte result was output.
enum class CorrelationMetric { pearson, cosine };
double simulated_private_correlation(const BinaryAttackVector& u, const BinaryAttackVector& v,
                                     CorrelationMetric metric,
                                     Transcript* transcript = nullptr);

/// Structural summary of a transcript: nothing but sizes.
struct LeakageProfile {
    std::size_t message_count = 0;
    Transcript steps;
    friend bool operator==(const LeakageProfile&, const LeakageProfile&) = default;
};
LeakageProfile leakage_profile(const Transcript& transcript);

} // namespace coshare
