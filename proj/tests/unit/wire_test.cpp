#include <doctest.h>

#include <fstream>
#include <random>

#include "twp/wire.hpp"

using namespace twp;

namespace {

std::vector<uint8_t> read_golden(const char* name) {
  std::ifstream in(std::string(TWP_GOLDEN_DIR) + "/" + name,
                   std::ios::binary);
  REQUIRE(in.good());
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
}

LogRecord random_record(std::mt19937_64& rng) {
  LogRecord r;
  r.timestamp_ms = rng();
  r.seq = static_cast<uint32_t>(rng());
  r.kind = static_cast<MessageType>(rng() % 3);
  r.dir = static_cast<Direction>(rng() % 2);
  r.src = static_cast<NodeId>(rng() % 256);
  do {
    r.dst = static_cast<NodeId>(rng() % 256);
  } while (r.dst == r.src);
  return r;
}

}  // namespace

TEST_CASE("message encoding is the fixed 6-byte layout") {
  auto b0 = encode_message({1, MessageType::Ping, 0});
  CHECK(b0 == std::array<uint8_t, 6>{0x01, 0x00, 0x00, 0x00, 0x00, 0x00});

  auto b1 = encode_message({1, MessageType::Ack, 258});
  CHECK(b1 == std::array<uint8_t, 6>{0x01, 0x02, 0x02, 0x01, 0x00, 0x00});
}

TEST_CASE("message decoding") {
  std::vector<uint8_t> good{0x01, 0x01, 0x05, 0x00, 0x00, 0x00};
  TwpMessage m = decode_message(good);
  CHECK(m.kind == MessageType::PingAck);
  CHECK(m.seq == 5);

  std::vector<uint8_t> short_buf{0x01, 0x01, 0x05, 0x00, 0x00};
  CHECK_THROWS_AS(decode_message(short_buf), CodecError);
  try {
    decode_message(short_buf);
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::WrongLength);
  }

  std::vector<uint8_t> bad_version{0x02, 0x00, 0x00, 0x00, 0x00, 0x00};
  try {
    decode_message(bad_version);
    FAIL("expected BadVersion");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::BadVersion);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }

  std::vector<uint8_t> bad_type{0x01, 0x07, 0x00, 0x00, 0x00, 0x00};
  try {
    decode_message(bad_type);
    FAIL("expected BadType");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::BadType);
  }
}

TEST_CASE("record encoding matches the byte-layout oracle") {
  // Oracle bytes assembled by hand from the layout: u64 ts LE, u32 seq LE,
  // kind byte (bit 7 = direction), src, dst.
  LogRecord r1{0, 0, MessageType::Ping, Direction::Send, 0, 1};
  std::array<uint8_t, 15> expect1{0, 0, 0, 0, 0, 0, 0, 0,
                                  0, 0, 0, 0, 0x00, 0x00, 0x01};
  CHECK(encode_record(r1) == expect1);

  LogRecord r2{1, 258, MessageType::Ack, Direction::Recv, 5, 7};
  std::array<uint8_t, 15> expect2{0x01, 0, 0, 0, 0, 0, 0, 0,
                                  0x02, 0x01, 0, 0, 0x82, 0x05, 0x07};
  CHECK(encode_record(r2) == expect2);

  CHECK(decode_record(expect2) == r2);
}

TEST_CASE("record errors") {
  LogRecord self{0, 0, MessageType::Ping, Direction::Send, 3, 3};
  CHECK_THROWS_AS(encode_record(self), CodecError);

  std::vector<uint8_t> bytes(15, 0);
  bytes[12] = 0x05;  // type 5 does not exist
  bytes[14] = 1;
  try {
    decode_record(bytes);
    FAIL("expected BadType");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::BadType);
  }

  std::vector<uint8_t> fourteen(14, 0);
  CHECK_THROWS_AS(decode_record(fourteen), CodecError);
}

TEST_CASE("record stream decoding reports the offset of a truncated tail") {
  std::vector<uint8_t> bytes;
  append_record(bytes, {10, 1, MessageType::Ping, Direction::Send, 0, 1});
  append_record(bytes, {20, 2, MessageType::Ack, Direction::Recv, 1, 0});
  auto records = decode_record_stream(bytes);
  REQUIRE(records.size() == 2);
  CHECK(records[1].timestamp_ms == 20);

  bytes.resize(bytes.size() - 1);  // 14-byte tail
  try {
    decode_record_stream(bytes);
    FAIL("expected WrongLength");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::WrongLength);
    CHECK(e.offset() == 15);
    CHECK(std::string(e.what()).find("15") != std::string::npos);
  }
}

TEST_CASE("round-trip identity over random messages and records") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20000; ++i) {
    TwpMessage m{1, static_cast<MessageType>(rng() % 3),
                 static_cast<uint32_t>(rng())};
    CHECK(decode_message(encode_message(m)) == m);

    LogRecord r = random_record(rng);
    auto bytes = encode_record(r);
    CHECK(bytes.size() == kRecordSize);
    CHECK(decode_record(bytes) == r);
  }
}

TEST_CASE("codec golden files") {
  auto msg_bytes = read_golden("messages.bin");
  REQUIRE(msg_bytes.size() == 3 * kMessageSize);
  std::vector<TwpMessage> expected_msgs{
      {1, MessageType::Ping, 0},
      {1, MessageType::PingAck, 5},
      {1, MessageType::Ack, 258},
  };
  for (std::size_t i = 0; i < expected_msgs.size(); ++i) {
    std::span<const uint8_t> one(msg_bytes.data() + i * kMessageSize,
                                 kMessageSize);
    CHECK(decode_message(one) == expected_msgs[i]);
    auto enc = encode_message(expected_msgs[i]);
    CHECK(std::equal(enc.begin(), enc.end(), one.begin()));
  }

  auto rec_bytes = read_golden("records.twplog");
  REQUIRE(rec_bytes.size() % kRecordSize == 0);
  std::vector<LogRecord> expected_recs{
      {0, 0, MessageType::Ping, Direction::Send, 0, 1},
      {1, 258, MessageType::Ack, Direction::Recv, 5, 7},
      {0x0102030405060708ull, 0xDEADBEEFu, MessageType::PingAck,
       Direction::Send, 255, 0},
      {1717171717171ull, 0xFFFFFFFFu, MessageType::Ping, Direction::Recv, 3,
       2},
  };
  auto decoded = decode_record_stream(rec_bytes);
  CHECK(decoded == expected_recs);
  std::vector<uint8_t> reencoded;
  for (const auto& r : expected_recs) append_record(reencoded, r);
  CHECK(reencoded == rec_bytes);
}

TEST_CASE("seq_less_than is serial-number arithmetic") {
  CHECK(seq_less_than(0, 1));
  CHECK(seq_less_than(0xFFFFFFFFu, 0));
  CHECK_FALSE(seq_less_than(0, 0x80000000u));
  CHECK_FALSE(seq_less_than(0x80000000u, 0));

  std::mt19937_64 rng(11);
  for (int i = 0; i < 100000; ++i) {
    uint32_t a = static_cast<uint32_t>(rng());
    uint32_t b = static_cast<uint32_t>(rng());
    CHECK_FALSE(seq_less_than(a, a));
    if (a != b && b - a != 0x80000000u) {
      CHECK(seq_less_than(a, b) != seq_less_than(b, a));
    }
  }
}
