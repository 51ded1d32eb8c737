#include "seafl/transport/codec.hpp"

#include <algorithm>
#include <string>

#include "seafl/common/error.hpp"

namespace seafl::transport {
namespace {

using crypto::kPointBytes;
using crypto::kScalarBytes;
using protocol::GradientVector;
using crypto::kSignatureBytes;

constexpr size_t kAeCiphertextBytes = 48;  // 32-byte payload + 16-byte tag
constexpr uint8_t kSetupHasRho = 0x01;
constexpr uint8_t kSetupHasSeed = 0x02;

class Reader {
 public:
  Reader(ByteSpan data, ErrorCode on_short) : data_(data), on_short_(on_short) {}

  ByteSpan Take(size_t n, const char* field) {
    if (data_.size() - pos_ < n) {
      Fail(on_short_, std::string("truncated body reading ") + field);
    }
    ByteSpan out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  uint32_t U32(const char* field) { return LoadU32Le(Take(4, field).data()); }

  template <size_t N>
  std::array<uint8_t, N> Fixed(const char* field) {
    std::array<uint8_t, N> out{};
    const ByteSpan s = Take(N, field);
    std::copy(s.begin(), s.end(), out.begin());
    return out;
  }

  size_t remaining() const { return data_.size() - pos_; }

  void ExpectEnd(const char* what) const {
    if (remaining() != 0) Fail(on_short_, std::string("trailing bytes after ") + what);
  }

 private:
  ByteSpan data_;
  size_t pos_ = 0;
  ErrorCode on_short_;
};

void AppendVector(Bytes& out, std::span<const uint32_t> v) {
  const size_t off = out.size();
  out.resize(off + 4 * v.size());
  for (size_t i = 0; i < v.size(); ++i) StoreU32Le(out.data() + off + 4 * i, v[i]);
}

std::vector<uint32_t> ReadVector(Reader& r, size_t d, const char* field) {
  const ByteSpan s = r.Take(4 * d, field);
  std::vector<uint32_t> v(d);
  for (size_t i = 0; i < d; ++i) v[i] = LoadU32Le(s.data() + 4 * i);
  return v;
}

void AppendSignature(Bytes& out, const std::optional<crypto::Signature>& sigma, const char* what) {
  if (!sigma) Fail(ErrorCode::kBadSignature, std::string(what) + ": malicious mode requires a signature");
  Append(out, *sigma);
}

void CheckLen(size_t got, size_t want, const char* what) {
  if (got != want) {
    Fail(ErrorCode::kLengthMismatch, std::string(what) + ": vector has " + std::to_string(got) +
                                         " elements, expected " + std::to_string(want));
  }
}

commit::Commitment ReadCommitment(Reader& r) {
  const auto enc = r.Fixed<kPointBytes>("commitment");
  auto p = crypto::Point::TryDecode(enc);
  if (!p) Fail(ErrorCode::kMalformedFrame, "commitment is not a valid point");
  return {std::move(*p)};
}

size_t MaskedUpdateSize(const WireFormat& wf) {
  return 4 + 4 * size_t{wf.d} + (wf.integrity ? kPointBytes : 0) + (wf.malicious ? kSignatureBytes : 0);
}

size_t NodeAggregateSize(const WireFormat& wf) {
  return 8 + (wf.list_digest ? 32 : 0) + 4 * size_t{wf.d} + (wf.integrity ? kScalarBytes : 0) +
         (wf.malicious ? kSignatureBytes : 0);
}

}  // namespace

Bytes SigningInput(MessageType type, const PartyId& sender, ByteSpan unsigned_body) {
  Bytes out;
  out.reserve(6 + unsigned_body.size());
  out.push_back(static_cast<uint8_t>(type));
  out.push_back(static_cast<uint8_t>(sender.role));
  AppendU32Le(out, sender.index);
  Append(out, unsigned_body);
  return out;
}

// ---- key announce ----

Bytes EncodeKeyAnnounce(const protocol::KeyAnnounce& msg) {
  Bytes out;
  if (msg.kx_public) Append(out, *msg.kx_public);
  if (msg.sig_public) Append(out, *msg.sig_public);
  return out;
}

protocol::KeyAnnounce DecodeKeyAnnounce(ByteSpan body, protocol::Role sender_role,
                                        const WireFormat& wf) {
  Reader r(body, ErrorCode::kMalformedFrame);
  protocol::KeyAnnounce msg;
  if (sender_role == protocol::Role::kServer) {
    msg.sig_public = r.Fixed<kPointBytes>("server sig key");
  } else {
    msg.kx_public = r.Fixed<kPointBytes>("kx key");
    if (wf.malicious) msg.sig_public = r.Fixed<kPointBytes>("sig key");
  }
  r.ExpectEnd("key announce");
  return msg;
}

// ---- setup ciphertext ----

Bytes EncodeSetupCiphertext(const protocol::SetupCiphertext& msg) {
  if ((!msg.rho_ct.empty() && msg.rho_ct.size() != kAeCiphertextBytes) ||
      (!msg.seed_ct.empty() && msg.seed_ct.size() != kAeCiphertextBytes)) {
    Fail(ErrorCode::kLengthMismatch, "setup ciphertext must be 48 bytes");
  }
  Bytes out;
  AppendU32Le(out, msg.user);
  uint8_t flags = 0;
  if (!msg.rho_ct.empty()) flags |= kSetupHasRho;
  if (!msg.seed_ct.empty()) flags |= kSetupHasSeed;
  out.push_back(flags);
  Append(out, msg.rho_ct);
  Append(out, msg.seed_ct);
  return out;
}

protocol::SetupCiphertext DecodeSetupCiphertext(ByteSpan body) {
  Reader r(body, ErrorCode::kMalformedFrame);
  protocol::SetupCiphertext msg;
  msg.user = r.U32("user");
  const uint8_t flags = r.Take(1, "flags")[0];
  if ((flags & ~(kSetupHasRho | kSetupHasSeed)) != 0) {
    Fail(ErrorCode::kMalformedFrame, "setup ciphertext: unknown flags");
  }
  if (flags & kSetupHasRho) {
    const ByteSpan s = r.Take(kAeCiphertextBytes, "rho ciphertext");
    msg.rho_ct.assign(s.begin(), s.end());
  }
  if (flags & kSetupHasSeed) {
    const ByteSpan s = r.Take(kAeCiphertextBytes, "seed ciphertext");
    msg.seed_ct.assign(s.begin(), s.end());
  }
  r.ExpectEnd("setup ciphertext");
  return msg;
}

// ---- participation ----

Bytes EncodeParticipationUnsigned(const protocol::ParticipationMsg& msg, const WireFormat&) {
  Bytes out;
  AppendU32Le(out, msg.t);
  return out;
}

Bytes EncodeParticipation(const protocol::ParticipationMsg& msg, const WireFormat& wf) {
  Bytes out = EncodeParticipationUnsigned(msg, wf);
  if (wf.malicious) AppendSignature(out, msg.sigma, "participation");
  return out;
}

protocol::ParticipationMsg DecodeParticipation(ByteSpan body, const WireFormat& wf) {
  Reader r(body, ErrorCode::kMalformedFrame);
  protocol::ParticipationMsg msg;
  msg.t = r.U32("t");
  if (wf.malicious) msg.sigma = r.Fixed<kSignatureBytes>("signature");
  r.ExpectEnd("participation");
  return msg;
}

// ---- masked update ----

Bytes EncodeMaskedUpdateUnsigned(const protocol::MaskedUpdate& msg, const WireFormat& wf) {
  CheckLen(msg.y.size(), wf.d, "masked update");
  Bytes out;
  out.reserve(MaskedUpdateSize(wf));
  AppendU32Le(out, msg.t);
  AppendVector(out, msg.y.elems);
  if (wf.integrity) {
    if (!msg.cm) Fail(ErrorCode::kMalformedFrame, "masked update: integrity mode requires a commitment");
    Append(out, msg.cm->point.Encode());
  }
  return out;
}

Bytes EncodeMaskedUpdate(const protocol::MaskedUpdate& msg, const WireFormat& wf) {
  Bytes out = EncodeMaskedUpdateUnsigned(msg, wf);
  if (wf.malicious) AppendSignature(out, msg.sigma, "masked update");
  return out;
}

protocol::MaskedUpdate DecodeMaskedUpdate(ByteSpan body, const WireFormat& wf) {
  if (body.size() != MaskedUpdateSize(wf)) {
    Fail(ErrorCode::kLengthMismatch, "masked update body is " + std::to_string(body.size()) +
                                         " bytes, expected " + std::to_string(MaskedUpdateSize(wf)));
  }
  Reader r(body, ErrorCode::kMalformedFrame);
  protocol::MaskedUpdate msg;
  msg.t = r.U32("t");
  msg.y = GradientVector(ReadVector(r, wf.d, "y"));
  if (wf.integrity) msg.cm = ReadCommitment(r);
  if (wf.malicious) msg.sigma = r.Fixed<kSignatureBytes>("signature");
  r.ExpectEnd("masked update");
  return msg;
}

// ---- node aggregate ----

Bytes EncodeNodeAggregateUnsigned(const protocol::AggregatedMaskMsg& msg, const WireFormat& wf) {
  CheckLen(msg.a.size(), wf.d, "node aggregate");
  Bytes out;
  out.reserve(NodeAggregateSize(wf));
  AppendU32Le(out, msg.t);
  AppendU32Le(out, msg.list_len);
  if (wf.list_digest) {
    if (!msg.list_digest) Fail(ErrorCode::kMalformedFrame, "node aggregate: digest mode requires a list digest");
    Append(out, *msg.list_digest);
  }
  AppendVector(out, msg.a.elems);
  if (wf.integrity) {
    if (!msg.a.r_lane) Fail(ErrorCode::kMalformedFrame, "node aggregate: integrity mode requires an r-lane sum");
    Append(out, msg.a.r_lane->bytes());
  }
  return out;
}

Bytes EncodeNodeAggregate(const protocol::AggregatedMaskMsg& msg, const WireFormat& wf) {
  Bytes out = EncodeNodeAggregateUnsigned(msg, wf);
  if (wf.malicious) AppendSignature(out, msg.sigma, "node aggregate");
  return out;
}

protocol::AggregatedMaskMsg DecodeNodeAggregate(ByteSpan body, const WireFormat& wf) {
  if (body.size() != NodeAggregateSize(wf)) {
    Fail(ErrorCode::kLengthMismatch, "node aggregate body is " + std::to_string(body.size()) +
                                         " bytes, expected " + std::to_string(NodeAggregateSize(wf)));
  }
  Reader r(body, ErrorCode::kMalformedFrame);
  protocol::AggregatedMaskMsg msg;
  msg.t = r.U32("t");
  msg.list_len = r.U32("list_len");
  if (wf.list_digest) msg.list_digest = r.Fixed<32>("list digest");
  msg.a.elems = ReadVector(r, wf.d, "a");
  if (wf.integrity) {
    const auto s = r.Fixed<kScalarBytes>("r-lane sum");
    try {
      msg.a.r_lane = crypto::Scalar::FromCanonical(s);
    } catch (const Error&) {
      Fail(ErrorCode::kMalformedFrame, "node aggregate: r-lane sum not reduced");
    }
  }
  if (wf.malicious) msg.sigma = r.Fixed<kSignatureBytes>("signature");
  r.ExpectEnd("node aggregate");
  return msg;
}

// ---- round result ----

Bytes EncodeRoundResult(const protocol::RoundResult& msg, const WireFormat& wf) {
  CheckLen(msg.w.size(), wf.d, "round result");
  Bytes out;
  AppendU32Le(out, msg.t);
  AppendU32Le(out, msg.contributor_count);
  AppendVector(out, msg.w.elems);
  if (wf.integrity) {
    if (!msg.proof) Fail(ErrorCode::kMalformedFrame, "round result: integrity mode requires a proof");
    Append(out, msg.proof->x.Encode());
  }
  return out;
}

protocol::RoundResult DecodeRoundResult(ByteSpan body, const WireFormat& wf) {
  Reader r(body, ErrorCode::kMalformedFrame);
  protocol::RoundResult msg;
  msg.t = r.U32("t");
  msg.contributor_count = r.U32("count");
  msg.w = GradientVector(ReadVector(r, wf.d, "w"));
  if (wf.integrity) {
    const auto enc = r.Fixed<kPointBytes>("proof");
    auto p = crypto::Point::TryDecode(enc);
    if (!p) Fail(ErrorCode::kMalformedFrame, "round result: proof is not a valid point");
    msg.proof = commit::AggregationProof{std::move(*p), msg.t};
  }
  r.ExpectEnd("round result");
  return msg;
}

// ---- reconcile request ----

Bytes EncodeReconcileRequestUnsigned(const protocol::ReconcileRequest& msg, const WireFormat& wf) {
  Bytes out;
  AppendU32Le(out, msg.t);
  AppendU32Le(out, static_cast<uint32_t>(msg.user_list.size()));
  for (uint32_t u : msg.user_list) AppendU32Le(out, u);
  AppendU32Le(out, static_cast<uint32_t>(msg.forwarded.size()));
  for (const auto& f : msg.forwarded) {
    AppendU32Le(out, f.user);
    Append(out, EncodeParticipation(f.msg, wf));
  }
  return out;
}

Bytes EncodeReconcileRequest(const protocol::ReconcileRequest& msg, const WireFormat& wf) {
  Bytes out = EncodeReconcileRequestUnsigned(msg, wf);
  if (wf.malicious) AppendSignature(out, msg.sigma, "reconcile request");
  return out;
}

protocol::ReconcileRequest DecodeReconcileRequest(ByteSpan body, const WireFormat& wf) {
  Reader r(body, ErrorCode::kMalformedFrame);
  protocol::ReconcileRequest msg;
  msg.t = r.U32("t");
  const uint32_t count = r.U32("user count");
  if (count > r.remaining() / 4) Fail(ErrorCode::kMalformedFrame, "reconcile: user count too large");
  msg.user_list.reserve(count);
  for (uint32_t i = 0; i < count; ++i) msg.user_list.push_back(r.U32("user"));
  const uint32_t fwd = r.U32("forward count");
  const size_t part_size = 4 + (wf.malicious ? kSignatureBytes : 0);
  if (fwd > r.remaining() / (4 + part_size)) Fail(ErrorCode::kMalformedFrame, "reconcile: forward count too large");
  for (uint32_t i = 0; i < fwd; ++i) {
    protocol::RelayedParticipation f;
    f.user = r.U32("forwarded user");
    f.msg = DecodeParticipation(r.Take(part_size, "forwarded participation"), wf);
    msg.forwarded.push_back(std::move(f));
  }
  if (wf.malicious) msg.sigma = r.Fixed<kSignatureBytes>("signature");
  r.ExpectEnd("reconcile request");
  return msg;
}

}  // namespace seafl::transport
