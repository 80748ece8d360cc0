#include <gtest/gtest.h>

#include "kvbench/error.hpp"
#include "kvbench/resp.hpp"
#include "kvbench/rng.hpp"

using namespace kvbench;
using namespace kvbench::resp;

namespace {

std::string random_bytes(Xoshiro256& rng, size_t max_len) {
  std::string s(rng() % (max_len + 1), '\0');
  for (auto& c : s) c = static_cast<char>(rng() & 0xff);
  return s;
}

Command random_command(Xoshiro256& rng) {
  switch (rng() % 5) {
    case 0: return Command::get(random_bytes(rng, 40));
    case 1: return Command::set(random_bytes(rng, 40), random_bytes(rng, 300));
    case 2: return Command::info(random_bytes(rng, 10));
    case 3: return Command::auth(random_bytes(rng, 20));
    default: return Command::ping();
  }
}

}  // namespace

TEST(Resp, EncodesSetAsBulkArray) {
  std::string out;
  encode_command(Command::set("key:1", "v"), out);
  EXPECT_EQ(out, "*3\r\n$3\r\nSET\r\n$5\r\nkey:1\r\n$1\r\nv\r\n");
  out.clear();
  encode_command(Command::get("a"), out);
  EXPECT_EQ(out, "*2\r\n$3\r\nGET\r\n$1\r\na\r\n");
  out.clear();
  encode_command(Command::info(), out);
  EXPECT_EQ(out, "*1\r\n$4\r\nINFO\r\n");
}

TEST(Resp, ParsesEveryReplyType) {
  size_t used = 0;
  auto r = parse_reply("+OK\r\n", used);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->kind, ReplyKind::kSimpleString);
  EXPECT_EQ(r->payload, "OK");
  EXPECT_EQ(used, 5u);

  r = parse_reply("$5\r\nhello\r\n", used);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->kind, ReplyKind::kBulkString);
  EXPECT_EQ(r->payload, "hello");
  EXPECT_EQ(used, 11u);

  r = parse_reply("$-1\r\n", used);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->kind, ReplyKind::kNil);

  r = parse_reply("-ERR bad thing\r\n", used);
  ASSERT_TRUE(r);
  EXPECT_TRUE(r->is_error());
  EXPECT_EQ(r->payload, "ERR bad thing");

  r = parse_reply(":-42\r\n", used);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->kind, ReplyKind::kInteger);
  EXPECT_EQ(r->integer, -42);

  r = parse_reply("$0\r\n\r\n", used);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->payload, "");
}

TEST(Resp, IncompleteFramesWait) {
  const std::string full = "$5\r\nhello\r\n";
  for (size_t n = 0; n < full.size(); ++n) {
    size_t used = 0;
    EXPECT_FALSE(parse_reply(std::string_view(full).substr(0, n), used)) << n;
  }
}

TEST(Resp, MalformedRepliesDesync) {
  size_t used = 0;
  for (const char* bad : {"?garbage\r\n", "$abc\r\n", "$3\r\nabcXY", "*1\r\n$1\r\na\r\n", ":12x\r\n", "$-7\r\n"}) {
    try {
      parse_reply(bad, used);
      ADD_FAILURE() << "accepted " << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kProtocolDesync) << bad;
    }
  }
}

TEST(Resp, CommandRoundTripProperty) {
  Xoshiro256 rng(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<Command> cmds;
    const size_t n = 1 + rng() % 8;
    for (size_t i = 0; i < n; ++i) cmds.push_back(random_command(rng));
    const std::string wire = encode_batch(cmds);
    size_t pos = 0;
    for (const auto& expected : cmds) {
      size_t used = 0;
      auto args = parse_request(std::string_view(wire).substr(pos), used);
      ASSERT_TRUE(args);
      auto cmd = to_command(*args);
      ASSERT_TRUE(cmd);
      auto want = expected;
      if (want.kind == CommandKind::kInfo && want.key.empty()) want.key.clear();
      EXPECT_EQ(*cmd, want);
      pos += used;
    }
    EXPECT_EQ(pos, wire.size());
  }
}

TEST(Resp, ReplyRoundTripProperty) {
  Xoshiro256 rng(99);
  for (int trial = 0; trial < 2000; ++trial) {
    Reply r;
    switch (rng() % 5) {
      case 0: r.kind = ReplyKind::kSimpleString; r.payload = "OK"; break;
      case 1: r.kind = ReplyKind::kBulkString; r.payload = random_bytes(rng, 200); break;
      case 2: r.kind = ReplyKind::kError; r.payload = "ERR x" + std::to_string(rng() % 1000); break;
      case 3: r.kind = ReplyKind::kInteger; r.integer = static_cast<int64_t>(rng()); break;
      default: r.kind = ReplyKind::kNil; break;
    }
    std::string wire;
    encode_reply(r, wire);
    size_t used = 0;
    auto back = parse_reply(wire, used);
    ASSERT_TRUE(back);
    EXPECT_EQ(used, wire.size());
    EXPECT_EQ(back->kind, r.kind);
    EXPECT_EQ(back->payload, r.payload);
    EXPECT_EQ(back->integer, r.integer);
  }
}

TEST(Resp, SplitAtEveryByteStillParses) {
  std::string wire;
  for (int i = 0; i < 5; ++i) encode_command(Command::set("k" + std::to_string(i), std::string(i * 3, 'x')), wire);
  for (size_t cut = 0; cut <= wire.size(); ++cut) {
    std::string buf = wire.substr(0, cut);
    size_t parsed = 0;
    size_t pos = 0;
    auto drain = [&] {
      for (;;) {
        size_t used = 0;
        auto a = parse_request(std::string_view(buf).substr(pos), used);
        if (!a) break;
        pos += used;
        ++parsed;
      }
    };
    drain();
    buf += wire.substr(cut);
    drain();
    EXPECT_EQ(parsed, 5u) << "cut " << cut;
  }
}

TEST(Resp, UnknownCommandsAreNotMapped) {
  std::vector<std::string> args = {"DEL", "x"};
  EXPECT_FALSE(to_command(args));
  args = {"get"};
  EXPECT_FALSE(to_command(args));
  args = {"get", "k"};
  EXPECT_EQ(*to_command(args), Command::get("k"));
}

TEST(Resp, BatchBoundedByDepth) {
  CommandBatch b(2);
  b.add(Command::get("a"));
  b.append(CommandKind::kSet).key = "b";
  EXPECT_TRUE(b.full());
  EXPECT_THROW(b.add(Command::ping()), Error);
  EXPECT_EQ(b.commands()[1].key, "b");
  b.clear();
  EXPECT_TRUE(b.empty());
  EXPECT_THROW(CommandBatch(0), Error);
}
