#include <chrono>
#include <functional>
#include <thread>

#include <gtest/gtest.h>

#include "seafl/common/error.hpp"
#include "seafl/transport/codec.hpp"
#include "seafl/transport/frame.hpp"
#include "seafl/transport/sim.hpp"
#include "seafl/transport/tcp.hpp"
#include "test_support.hpp"

namespace seafl::transport {
namespace {

using namespace protocol;
using seafl::testing::Gen;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInternal;
}

WireFormat Wf(uint32_t d, bool mal, bool integ = false, bool digest = false) { return {d, mal, integ, digest}; }

// Body sizes straight from the layout table, independent of the encoder.
size_t UpdateSize(const WireFormat& wf) { return 4 + 4 * wf.d + (wf.integrity ? 33 : 0) + (wf.malicious ? 64 : 0); }
size_t AggregateSize(const WireFormat& wf) {
  return 8 + (wf.list_digest ? 32 : 0) + 4 * wf.d + (wf.integrity ? 32 : 0) + (wf.malicious ? 64 : 0);
}
size_t ParticipationSize(const WireFormat& wf) { return 4 + (wf.malicious ? 64 : 0); }

Signature RandomSig(Gen& g) {
  Signature s;
  g.rng().Fill(s);
  return s;
}

crypto::Point RandomPoint(Gen& g) { return crypto::Point::BaseMul(g.Scalar()); }

ParticipationMsg RandomParticipation(Gen& g, const WireFormat& wf) {
  ParticipationMsg m{g.U32(), std::nullopt};
  if (wf.malicious) m.sigma = RandomSig(g);
  return m;
}

MaskedUpdate RandomUpdate(Gen& g, const WireFormat& wf) {
  MaskedUpdate m;
  m.t = g.U32();
  m.y = GradientVector(g.Words(wf.d));
  if (wf.integrity) m.cm = commit::Commitment{RandomPoint(g)};
  if (wf.malicious) m.sigma = RandomSig(g);
  return m;
}

AggregatedMaskMsg RandomAggregate(Gen& g, const WireFormat& wf) {
  AggregatedMaskMsg m;
  m.t = g.U32();
  m.list_len = g.U32();
  if (wf.list_digest) {
    crypto::Digest dg;
    g.rng().Fill(dg);
    m.list_digest = dg;
  }
  m.a.elems = g.Words(wf.d);
  if (wf.integrity) m.a.r_lane = g.Scalar();
  if (wf.malicious) m.sigma = RandomSig(g);
  return m;
}

RoundResult RandomResult(Gen& g, const WireFormat& wf) {
  RoundResult m;
  m.t = g.U32();
  m.contributor_count = g.U32();
  m.w = GradientVector(g.Words(wf.d));
  // The proof's iteration is implied by the result's t on the wire.
  if (wf.integrity) m.proof = commit::AggregationProof{RandomPoint(g), m.t};
  return m;
}

ReconcileRequest RandomReconcile(Gen& g, const WireFormat& wf) {
  ReconcileRequest m;
  m.t = g.U32();
  for (uint32_t i = 0, n = g.Range(0, 6); i < n; ++i) m.user_list.push_back(g.U32());
  for (uint32_t i = 0, n = g.Range(0, 4); i < n; ++i) m.forwarded.push_back({g.U32(), RandomParticipation(g, wf)});
  if (wf.malicious) m.sigma = RandomSig(g);
  return m;
}

std::vector<WireFormat> AllFormats(uint32_t d) {
  std::vector<WireFormat> out;
  for (int bits = 0; bits < 8; ++bits) out.push_back(Wf(d, bits & 1, bits & 2, bits & 4));
  return out;
}

// ---- sizes ----

TEST(WireSize, SemiHonestUpdateOfOneElement) {
  MaskedUpdate m{1, GradientVector(1), std::nullopt, std::nullopt};
  EXPECT_EQ(EncodeMaskedUpdate(m, Wf(1, false)).size(), 8u);
}

TEST(WireSize, NodeAggregateAtSixteenThousand) {
  Gen g(1);
  EXPECT_EQ(EncodeNodeAggregate(RandomAggregate(g, Wf(16000, false)), Wf(16000, false)).size(), 64008u);
  EXPECT_EQ(EncodeNodeAggregate(RandomAggregate(g, Wf(16000, true)), Wf(16000, true)).size(), 64072u);
}

TEST(WireSize, ParticipationAndSignature) {
  Gen g(2);
  EXPECT_EQ(EncodeParticipation(RandomParticipation(g, Wf(1, false)), Wf(1, false)).size(), 4u);
  EXPECT_EQ(EncodeParticipation(RandomParticipation(g, Wf(1, true)), Wf(1, true)).size(), 68u);
  EXPECT_EQ(crypto::kSignatureBytes, 64u);
}

TEST(WireSize, SemiHonestUserRoundTotal) {
  // One update to the server plus one participation to each of k = 3 nodes.
  Gen g(3);
  const auto wf = Wf(16000, false);
  const size_t total = EncodeMaskedUpdate(RandomUpdate(g, wf), wf).size() +
                       3 * EncodeParticipation(RandomParticipation(g, wf), wf).size();
  EXPECT_EQ(total, 64016u);
}

TEST(WireSize, EveryFormatMatchesLayoutTable) {
  Gen g(4);
  for (uint32_t d : {1u, 7u, 300u}) {
    for (const auto& wf : AllFormats(d)) {
      EXPECT_EQ(EncodeMaskedUpdate(RandomUpdate(g, wf), wf).size(), UpdateSize(wf));
      EXPECT_EQ(EncodeNodeAggregate(RandomAggregate(g, wf), wf).size(), AggregateSize(wf));
      EXPECT_EQ(EncodeParticipation(RandomParticipation(g, wf), wf).size(), ParticipationSize(wf));
      EXPECT_EQ(EncodeRoundResult(RandomResult(g, wf), wf).size(), 8 + 4 * d + (wf.integrity ? 33u : 0u));
    }
  }
}

// ---- round trips ----

TEST(Codec, RandomMessagesRoundTripUnderEveryFormat) {
  Gen g(5);
  for (int trial = 0; trial < 20; ++trial) {
    for (const auto& wf : AllFormats(g.Range(1, 40))) {
      const auto p = RandomParticipation(g, wf);
      EXPECT_EQ(DecodeParticipation(EncodeParticipation(p, wf), wf), p);
      const auto u = RandomUpdate(g, wf);
      EXPECT_EQ(DecodeMaskedUpdate(EncodeMaskedUpdate(u, wf), wf), u);
      const auto a = RandomAggregate(g, wf);
      EXPECT_EQ(DecodeNodeAggregate(EncodeNodeAggregate(a, wf), wf), a);
      const auto r = RandomResult(g, wf);
      EXPECT_EQ(DecodeRoundResult(EncodeRoundResult(r, wf), wf), r);
      const auto c = RandomReconcile(g, wf);
      EXPECT_EQ(DecodeReconcileRequest(EncodeReconcileRequest(c, wf), wf), c);
    }
  }
}

TEST(Codec, KeyAnnounceAndSetupCiphertext) {
  Gen g(6);
  const KeyAnnounce user{RandomPoint(g).Encode(), RandomPoint(g).Encode()};
  EXPECT_EQ(EncodeKeyAnnounce(user).size(), 66u);
  EXPECT_EQ(DecodeKeyAnnounce(EncodeKeyAnnounce(user), Role::kUser, Wf(1, true)), user);
  const KeyAnnounce sh{RandomPoint(g).Encode(), std::nullopt};
  EXPECT_EQ(DecodeKeyAnnounce(EncodeKeyAnnounce(sh), Role::kNode, Wf(1, false)), sh);
  const KeyAnnounce server{std::nullopt, RandomPoint(g).Encode()};
  EXPECT_EQ(DecodeKeyAnnounce(EncodeKeyAnnounce(server), Role::kServer, Wf(1, true)), server);

  for (int flags = 0; flags < 4; ++flags) {
    SetupCiphertext ct{g.U32(), flags & 1 ? g.Blob(48) : Bytes{}, flags & 2 ? g.Blob(48) : Bytes{}};
    const Bytes body = EncodeSetupCiphertext(ct);
    EXPECT_EQ(body.size(), 5u + ct.rho_ct.size() + ct.seed_ct.size());
    EXPECT_EQ(DecodeSetupCiphertext(body), ct);
  }
  EXPECT_EQ(CodeOf([&] { EncodeSetupCiphertext({0, g.Blob(47), {}}); }), ErrorCode::kLengthMismatch);
}

TEST(Codec, SigningInputBindsTypeAndSender) {
  const Bytes body = {1, 2, 3};
  const auto a = SigningInput(MessageType::kParticipation, UserId(1), body);
  EXPECT_NE(a, SigningInput(MessageType::kMaskedUpdate, UserId(1), body));
  EXPECT_NE(a, SigningInput(MessageType::kParticipation, UserId(2), body));
  EXPECT_NE(a, SigningInput(MessageType::kParticipation, NodeId(1), body));
  // type || role || ordinal_le32 || body
  EXPECT_EQ(a, (Bytes{0x03, 0x01, 1, 0, 0, 0, 1, 2, 3}));
}

TEST(Codec, EveryTruncationIsRejected) {
  Gen g(7);
  for (const auto& wf : AllFormats(5)) {
    const Bytes bodies[] = {EncodeParticipation(RandomParticipation(g, wf), wf),
                            EncodeMaskedUpdate(RandomUpdate(g, wf), wf),
                            EncodeNodeAggregate(RandomAggregate(g, wf), wf),
                            EncodeRoundResult(RandomResult(g, wf), wf)};
    const std::function<void(ByteSpan)> decoders[] = {
        [&](ByteSpan b) { DecodeParticipation(b, wf); }, [&](ByteSpan b) { DecodeMaskedUpdate(b, wf); },
        [&](ByteSpan b) { DecodeNodeAggregate(b, wf); }, [&](ByteSpan b) { DecodeRoundResult(b, wf); }};
    for (int m = 0; m < 4; ++m) {
      for (size_t cut = 0; cut < bodies[m].size(); ++cut) {
        const ByteSpan prefix(bodies[m].data(), cut);
        EXPECT_THROW(decoders[m](prefix), Error) << "message " << m << " cut " << cut;
      }
      Bytes longer = bodies[m];
      longer.push_back(0);
      EXPECT_THROW(decoders[m](longer), Error);
    }
  }
}

TEST(Codec, TruncatedRoundResultIsMalformed) {
  Gen g(8);
  const auto wf = Wf(4, false, true);
  Bytes body = EncodeRoundResult(RandomResult(g, wf), wf);
  body.pop_back();
  EXPECT_EQ(CodeOf([&] { DecodeRoundResult(body, wf); }), ErrorCode::kMalformedFrame);
}

TEST(Codec, StructuralErrors) {
  Gen g(9);
  const auto wf = Wf(3, true, true);
  auto u = RandomUpdate(g, wf);
  u.y.elems.pop_back();
  EXPECT_EQ(CodeOf([&] { EncodeMaskedUpdate(u, wf); }), ErrorCode::kLengthMismatch);
  auto nocm = RandomUpdate(g, wf);
  nocm.cm.reset();
  EXPECT_EQ(CodeOf([&] { EncodeMaskedUpdate(nocm, wf); }), ErrorCode::kMalformedFrame);
  auto nosig = RandomUpdate(g, wf);
  nosig.sigma.reset();
  EXPECT_EQ(CodeOf([&] { EncodeMaskedUpdate(nosig, wf); }), ErrorCode::kBadSignature);

  // An off-curve commitment.
  Bytes body = EncodeMaskedUpdate(RandomUpdate(g, wf), wf);
  body[4 + 12] = 0x05;
  EXPECT_EQ(CodeOf([&] { DecodeMaskedUpdate(body, wf); }), ErrorCode::kMalformedFrame);

  // r-lane at or above the group order.
  Bytes agg = EncodeNodeAggregate(RandomAggregate(g, wf), wf);
  std::fill(agg.begin() + 8 + 12, agg.begin() + 8 + 12 + 32, 0xFF);
  EXPECT_EQ(CodeOf([&] { DecodeNodeAggregate(agg, wf); }), ErrorCode::kMalformedFrame);

  Bytes ct = EncodeSetupCiphertext({1, g.Blob(48), {}});
  ct[4] = 0x80;
  EXPECT_EQ(CodeOf([&] { DecodeSetupCiphertext(ct); }), ErrorCode::kMalformedFrame);

  Bytes rec = {1, 0, 0, 0, 0xFF, 0xFF, 0xFF, 0xFF};
  EXPECT_EQ(CodeOf([&] { DecodeReconcileRequest(rec, Wf(1, false)); }), ErrorCode::kMalformedFrame);
}

// ---- framing ----

Frame RandomFrame(Gen& g) {
  const Role roles[] = {Role::kUser, Role::kNode, Role::kServer};
  return Frame{static_cast<MessageType>(g.Range(1, 7)), {roles[g.Range(0, 2)], g.U32()}, g.Blob(g.Range(0, 300))};
}

TEST(Frame, HeaderLayout) {
  const Frame f{MessageType::kMaskedUpdate, NodeId(0x01020304), {9, 8}};
  const Bytes wire = EncodeFrame(f);
  EXPECT_EQ(wire, (Bytes{8, 0, 0, 0, 0x04, 0x02, 0x04, 0x03, 0x02, 0x01, 9, 8}));
  EXPECT_EQ(f.WireSize(), wire.size());
  EXPECT_EQ(DecodeFrame(wire), f);
}

TEST(Frame, PipeRoundTripWithPartialReads) {
  Gen g(10);
  for (size_t chunk : {size_t{1}, size_t{3}, size_t{7}, SIZE_MAX}) {
    MemoryPipe pipe(chunk);
    std::vector<Frame> sent;
    for (int i = 0; i < 20; ++i) {
      sent.push_back(RandomFrame(g));
      FrameWrite(pipe, sent.back());
    }
    for (const auto& f : sent) EXPECT_EQ(FrameRead(pipe), f);
    EXPECT_EQ(pipe.buffered(), 0u);
    EXPECT_EQ(CodeOf([&] { FrameRead(pipe); }), ErrorCode::kConnectionClosed);
  }
}

TEST(Frame, ConcatenatedFramesSplitCleanly) {
  Gen g(11);
  const Frame a = RandomFrame(g), b = RandomFrame(g);
  Bytes both = EncodeFrame(a);
  const Bytes tail = EncodeFrame(b);
  both.insert(both.end(), tail.begin(), tail.end());
  MemoryPipe pipe(5);
  pipe.WriteAll(both);
  EXPECT_EQ(FrameRead(pipe), a);
  EXPECT_EQ(FrameRead(pipe), b);
}

TEST(Frame, Rejections) {
  Gen g(12);
  Bytes big = EncodeFrame({MessageType::kMaskedUpdate, UserId(0), g.Blob(100)});
  EXPECT_EQ(CodeOf([&] { DecodeFrame(big, 50); }), ErrorCode::kFrameTooLarge);
  MemoryPipe pipe;
  pipe.WriteAll(big);
  EXPECT_EQ(CodeOf([&] { FrameRead(pipe, 50); }), ErrorCode::kFrameTooLarge);

  Bytes bad_type = EncodeFrame({MessageType::kMaskedUpdate, UserId(0), {}});
  bad_type[4] = 0x7F;
  EXPECT_EQ(CodeOf([&] { DecodeFrame(bad_type); }), ErrorCode::kMalformedFrame);
  Bytes bad_role = EncodeFrame({MessageType::kMaskedUpdate, UserId(0), {}});
  bad_role[5] = 0x09;
  EXPECT_EQ(CodeOf([&] { DecodeFrame(bad_role); }), ErrorCode::kMalformedFrame);
  EXPECT_EQ(CodeOf([&] { DecodeFrame(Bytes{1, 0, 0, 0, 4}); }), ErrorCode::kMalformedFrame);

  MemoryPipe cut;
  const Bytes full = EncodeFrame({MessageType::kParticipation, UserId(1), {1, 2, 3}});
  cut.WriteAll(ByteSpan(full.data(), full.size() - 1));
  EXPECT_EQ(CodeOf([&] { FrameRead(cut); }), ErrorCode::kConnectionClosed);
}

// ---- simulated network ----

TEST(Sim, PerLinkFifoUnderJitter) {
  SimPolicy policy;
  policy.seed = 13;
  policy.jitter_us = 5000;
  SimNetwork net(policy);
  for (uint32_t i = 0; i < 50; ++i) ASSERT_TRUE(net.Send(ServerId(), {MessageType::kParticipation, UserId(i % 2), {static_cast<uint8_t>(i)}}));
  std::map<uint32_t, int> last;
  SimTime prev = 0;
  int got = 0;
  while (auto d = net.Next(UINT64_MAX)) {
    EXPECT_GE(d->at, prev);
    prev = d->at;
    const int seq = d->frame.body[0];
    auto it = last.find(d->frame.sender.index);
    if (it != last.end()) {
      EXPECT_GT(seq, it->second);
    }
    last[d->frame.sender.index] = seq;
    ++got;
  }
  EXPECT_EQ(got, 50);
}

TEST(Sim, OfflineAndDropsAndCounters) {
  SimPolicy policy;
  policy.drop_if = [](const PartyId& from, const PartyId&, const Frame&) { return from == UserId(2); };
  SimNetwork net(policy);
  net.SetOnline(UserId(1), false);
  const Frame f0{MessageType::kParticipation, UserId(0), {1, 2, 3, 4}};
  const Frame f1{MessageType::kParticipation, UserId(1), {1, 2, 3, 4}};
  const Frame f2{MessageType::kParticipation, UserId(2), {1, 2, 3, 4}};
  EXPECT_TRUE(net.Send(NodeId(0), f0));
  EXPECT_FALSE(net.Send(NodeId(0), f1));
  EXPECT_FALSE(net.Send(NodeId(0), f2));
  EXPECT_EQ(net.Outbound(UserId(0)).body_bytes, 4u);
  EXPECT_EQ(net.Outbound(UserId(0)).frame_bytes, 14u);
  EXPECT_EQ(net.Outbound(UserId(1)).frames, 0u);
  EXPECT_EQ(net.Outbound(UserId(2)).body_bytes, 4u);

  // A receiver that goes offline before delivery never sees the frame.
  net.SetOnline(NodeId(0), false);
  EXPECT_FALSE(net.Next(UINT64_MAX).has_value());
}

TEST(Sim, DeadlineBoundsDelivery) {
  SimPolicy policy;
  policy.base_delay_us = 100;
  policy.extra_delay = [](const PartyId& from, const PartyId&, const Frame&) -> SimTime {
    return from == UserId(1) ? 10000 : 0;
  };
  SimNetwork net(policy);
  net.Send(ServerId(), {MessageType::kParticipation, UserId(0), {}});
  net.Send(ServerId(), {MessageType::kParticipation, UserId(1), {}});
  ASSERT_TRUE(net.Next(1000).has_value());
  EXPECT_FALSE(net.Next(1000).has_value());
  EXPECT_EQ(*net.NextTime(), 10100u);
  net.Clear();
  EXPECT_FALSE(net.NextTime().has_value());
}

// ---- tcp ----

TEST(Tcp, LoopbackFramesArriveInOrder) {
  TcpListener listener({"127.0.0.1", 0});
  ASSERT_NE(listener.port(), 0);
  Inbox inbox;
  std::unique_ptr<Connection> server_side;
  std::thread acceptor([&] { server_side = std::make_unique<Connection>(1, listener.Accept(std::chrono::seconds(5)), inbox); });
  Inbox client_inbox;
  Connection client(2, TcpStream::Connect({"127.0.0.1", listener.port()}, std::chrono::seconds(5)), client_inbox);
  acceptor.join();

  Gen g(14);
  std::vector<Frame> sent;
  for (int i = 0; i < 30; ++i) {
    sent.push_back(RandomFrame(g));
    client.Send(sent.back());
  }
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
  for (const auto& f : sent) {
    auto item = inbox.PopUntil(deadline);
    ASSERT_TRUE(item && item->frame);
    EXPECT_EQ(item->connection, 1u);
    EXPECT_EQ(*item->frame, f);
  }
  size_t body = 0;
  for (const auto& f : sent) body += f.body.size();
  EXPECT_EQ(client.body_bytes_sent().load(), body);

  client.Close();
  auto closed = inbox.PopUntil(std::chrono::steady_clock::now() + std::chrono::seconds(5));
  ASSERT_TRUE(closed.has_value());
  EXPECT_FALSE(closed->frame.has_value());
}

TEST(Tcp, EndpointsAndTimeouts) {
  EXPECT_EQ(ParseEndpoint("10.0.0.1:8080").port, 8080);
  EXPECT_EQ(ParseEndpoint("localhost:1").host, "localhost");
  EXPECT_EQ(CodeOf([] { ParseEndpoint("nope"); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(CodeOf([] { ParseEndpoint("h:70000"); }), ErrorCode::kInvalidConfig);
  TcpListener listener({"127.0.0.1", 0});
  EXPECT_EQ(CodeOf([&] { listener.Accept(std::chrono::milliseconds(50)); }), ErrorCode::kTimeout);
  Inbox inbox;
  EXPECT_FALSE(inbox.PopUntil(std::chrono::steady_clock::now() + std::chrono::milliseconds(10)).has_value());
}

}  // namespace
}  // namespace seafl::transport
