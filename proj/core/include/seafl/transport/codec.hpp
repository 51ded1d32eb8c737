#pragma once

// Wire protocol v1 message bodies. All integers are little-endian, points are
// 33-byte compressed encodings, signatures are raw 64-byte (r, s).
//
//   participation   t(4) [sig(64)]
//   masked update   t(4) y(4d) [cm(33)] [sig(64)]
//   node aggregate  t(4) |L|(4) [digest(32)] a(4d) [r_lane(32)] [sig(64)]
//   round result    t(4) count(4) w(4d) [x_t(33)]
//   key announce    user/node: kx(33) [sig_pk(33)]; server: sig_pk(33)
//   setup ct        user(4) flags(1) [rho_ct(48)] [seed_ct(48)]
//   reconcile       t(4) count(4) users(4*count) fwd(4) {user(4) participation}* [sig(64)]
//
// Bracketed fields are governed by WireFormat. Signatures cover
// SigningInput(type, sender, body-without-signature).

#include "seafl/common/bytes.hpp"
#include "seafl/protocol/config.hpp"
#include "seafl/protocol/messages.hpp"

namespace seafl::transport {

using protocol::MessageType;
using protocol::PartyId;
using protocol::WireFormat;

Bytes SigningInput(MessageType type, const PartyId& sender, ByteSpan unsigned_body);

Bytes EncodeKeyAnnounce(const protocol::KeyAnnounce& msg);
protocol::KeyAnnounce DecodeKeyAnnounce(ByteSpan body, protocol::Role sender_role,
                                        const WireFormat& wf);

Bytes EncodeSetupCiphertext(const protocol::SetupCiphertext& msg);
protocol::SetupCiphertext DecodeSetupCiphertext(ByteSpan body);

Bytes EncodeParticipation(const protocol::ParticipationMsg& msg, const WireFormat& wf);
Bytes EncodeParticipationUnsigned(const protocol::ParticipationMsg& msg, const WireFormat& wf);
protocol::ParticipationMsg DecodeParticipation(ByteSpan body, const WireFormat& wf);

// Throws kLengthMismatch when y does not have wf.d elements.
Bytes EncodeMaskedUpdate(const protocol::MaskedUpdate& msg, const WireFormat& wf);
Bytes EncodeMaskedUpdateUnsigned(const protocol::MaskedUpdate& msg, const WireFormat& wf);
// Throws kLengthMismatch when the body size does not match wf.
protocol::MaskedUpdate DecodeMaskedUpdate(ByteSpan body, const WireFormat& wf);

Bytes EncodeNodeAggregate(const protocol::AggregatedMaskMsg& msg, const WireFormat& wf);
Bytes EncodeNodeAggregateUnsigned(const protocol::AggregatedMaskMsg& msg, const WireFormat& wf);
protocol::AggregatedMaskMsg DecodeNodeAggregate(ByteSpan body, const WireFormat& wf);

Bytes EncodeRoundResult(const protocol::RoundResult& msg, const WireFormat& wf);
// Throws kMalformedFrame on any size inconsistency.
protocol::RoundResult DecodeRoundResult(ByteSpan body, const WireFormat& wf);

Bytes EncodeReconcileRequest(const protocol::ReconcileRequest& msg, const WireFormat& wf);
Bytes EncodeReconcileRequestUnsigned(const protocol::ReconcileRequest& msg, const WireFormat& wf);
protocol::ReconcileRequest DecodeReconcileRequest(ByteSpan body, const WireFormat& wf);

}  // namespace seafl::transport
