#include <gtest/gtest.h>

#include "kvbench/connection.hpp"
#include "kvbench/mock_server.hpp"

using namespace kvbench;
using namespace kvbench::resp;

namespace {

uint16_t unused_port() {
  // A server that has stopped leaves its port closed.
  mock::MockServer s;
  const auto p = s.port();
  s.stop();
  return p;
}

ErrorCode open_error(const Endpoint& ep) {
  try {
    Connection::open(ep);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "open succeeded";
  return ErrorCode::kIo;
}

}  // namespace

TEST(Connection, SetGetRoundTrip) {
  mock::MockServer server;
  auto conn = Connection::open(server.endpoint());
  auto r = conn.execute_one(Command::set("k", "value"));
  EXPECT_EQ(r.kind, ReplyKind::kSimpleString);
  r = conn.execute_one(Command::get("k"));
  EXPECT_EQ(r.kind, ReplyKind::kBulkString);
  EXPECT_EQ(r.payload, "value");
  EXPECT_GT(r.rtt.count(), 0);
  EXPECT_EQ(conn.counters().commands_sent, 2u);
  EXPECT_EQ(conn.counters().replies_received, 2u);
  EXPECT_EQ(conn.counters().in_flight(), 0u);
  EXPECT_EQ(server.value("k"), "value");
}

class ReplyMatrix : public ::testing::TestWithParam<size_t> {};

TEST_P(ReplyMatrix, OkBulkNilErrorInOneBatch) {
  const size_t depth = GetParam();
  mock::MockOptions opts;
  opts.error_key = "boom";
  mock::MockServer server(opts);
  auto conn = Connection::open(server.endpoint());
  CommandBatch batch(depth);
  std::vector<ReplyKind> expected;
  for (size_t i = 0; batch.size() < depth; ++i) {
    const std::string key = "k" + std::to_string(i);
    switch (i % 4) {
      case 0:
        batch.add(Command::set(key, "v" + key));
        expected.push_back(ReplyKind::kSimpleString);
        break;
      case 1:
        batch.add(Command::get("k" + std::to_string(i - 1)));
        expected.push_back(ReplyKind::kBulkString);
        break;
      case 2:
        batch.add(Command::get("absent"));
        expected.push_back(ReplyKind::kNil);
        break;
      default:
        batch.add(Command::get("boom"));
        expected.push_back(ReplyKind::kError);
        break;
    }
  }
  const auto replies = execute_batch(conn, batch);
  ASSERT_EQ(replies.size(), depth);
  size_t errors = 0;
  for (size_t i = 0; i < depth; ++i) {
    EXPECT_EQ(replies[i].kind, expected[i]) << "slot " << i;
    if (expected[i] == ReplyKind::kBulkString) EXPECT_EQ(replies[i].payload, "vk" + std::to_string(i - 1));
    errors += expected[i] == ReplyKind::kError;
  }
  EXPECT_EQ(conn.counters().error_replies, errors);
  EXPECT_EQ(conn.counters().commands_sent, conn.counters().replies_received);
  EXPECT_TRUE(conn.usable());
}

TEST_P(ReplyMatrix, DesyncMarksConnectionUnusable) {
  const size_t depth = GetParam();
  mock::MockOptions opts;
  opts.desync_key = "bad";
  mock::MockServer server(opts);
  auto conn = Connection::open(server.endpoint());
  CommandBatch batch(depth);
  for (size_t i = 0; i + 1 < depth; ++i) batch.add(Command::get("k" + std::to_string(i)));
  batch.add(Command::get("bad"));
  try {
    execute_batch(conn, batch);
    FAIL() << "desync not detected";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProtocolDesync);
  }
  EXPECT_FALSE(conn.usable());
  EXPECT_THROW(conn.execute_one(Command::ping()), Error);
}

INSTANTIATE_TEST_SUITE_P(Depths, ReplyMatrix, ::testing::Values(1, 8, 64));

TEST(Connection, RefusedWhenNothingListens) {
  Endpoint ep;
  ep.port = unused_port();
  EXPECT_EQ(open_error(ep), ErrorCode::kConnectRefused);
}

TEST(Connection, UnresolvableHost) {
  Endpoint ep;
  ep.host = "no-such-host.invalid";
  EXPECT_EQ(open_error(ep), ErrorCode::kResolveFailure);
}

TEST(Connection, AuthSuccessAndFailure) {
  mock::MockOptions opts;
  opts.password = "s3cret";
  mock::MockServer server(opts);
  auto ep = server.endpoint();
  ep.password = "wrong";
  EXPECT_EQ(open_error(ep), ErrorCode::kAuthFailure);
  ep.password = "s3cret";
  auto conn = Connection::open(ep);
  EXPECT_EQ(conn.execute_one(Command::set("a", "b")).kind, ReplyKind::kSimpleString);

  ep.password.reset();
  auto anon = Connection::open(ep);
  auto r = anon.execute_one(Command::get("a"));
  EXPECT_TRUE(r.is_error());
  EXPECT_NE(r.payload.find("NOAUTH"), std::string::npos);
}

TEST(Connection, ServerClosingIsReset) {
  mock::MockOptions opts;
  opts.max_clients = 1;
  mock::MockServer server(opts);
  auto first = Connection::open(server.endpoint());
  auto second = Connection::open(server.endpoint());
  auto r = second.execute_one(Command::ping());
  EXPECT_TRUE(r.is_error());
  EXPECT_NE(r.payload.find("max number of clients"), std::string::npos);
  EXPECT_THROW(second.execute_one(Command::ping()), Error);
  EXPECT_FALSE(second.usable());
}

TEST(Connection, InfoParsing) {
  const auto m = parse_info("# Server\r\nredis_version:7.2.4\r\n\r\n# Memory\r\nused_memory:1048576\r\nnocolon\r\n"
                            "used_cpu_sys:1.25\r\nkey:with:colons\r\n");
  EXPECT_EQ(m.at("redis_version"), "7.2.4");
  EXPECT_EQ(m.at("used_memory"), "1048576");
  EXPECT_EQ(m.at("used_cpu_sys"), "1.25");
  EXPECT_EQ(m.at("key"), "with:colons");
  EXPECT_EQ(m.count("nocolon"), 0u);
  EXPECT_EQ(m.count("# Server"), 0u);
}

TEST(Connection, FetchInfoFromMock) {
  mock::MockServer server;
  auto conn = Connection::open(server.endpoint());
  conn.execute_one(Command::set("x", std::string(100, 'a')));
  const auto info = fetch_info(conn);
  ASSERT_TRUE(info.count("used_memory"));
  EXPECT_GT(std::stoull(info.at("used_memory")), 1u << 20);
  EXPECT_TRUE(info.count("used_cpu_sys"));
  EXPECT_TRUE(info.count("used_cpu_user"));
}

TEST(Connection, InfoErrorRaisesInfoUnavailable) {
  mock::MockOptions opts;
  opts.info_error_section = "all";
  mock::MockServer server(opts);
  auto conn = Connection::open(server.endpoint());
  try {
    fetch_info(conn, "all");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfoUnavailable);
  }
  EXPECT_TRUE(conn.usable());
}

TEST(Connection, EndpointValidation) {
  Endpoint ep;
  ep.port = 0;
  EXPECT_THROW(ep.validate(), Error);
  ep.port = 1;
  ep.host = "";
  EXPECT_THROW(ep.validate(), Error);
  Endpoint ok;
  EXPECT_EQ(ok.to_string(), "127.0.0.1:6379");
}
