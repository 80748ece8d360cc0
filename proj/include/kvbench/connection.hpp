#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kvbench/error.hpp"
#include "kvbench/resp.hpp"

namespace kvbench::resp {

struct Endpoint {
  std::string host = "127.0.0.1";
  uint16_t port = 6379;
  std::chrono::milliseconds connect_timeout{2000};
  std::optional<std::string> password;
  // Upper bound on a blocked read or write once connected.
  std::chrono::milliseconds io_timeout{30000};

  void validate() const;
  std::string to_string() const;
};

// Cumulative command/reply accounting for one connection. After an abort,
// in_flight() holds the commands whose replies never arrived.
struct ConnectionCounters {
  uint64_t commands_sent = 0;
  uint64_t replies_received = 0;
  uint64_t error_replies = 0;

  uint64_t in_flight() const noexcept { return commands_sent - replies_received; }
};

using InfoMap = std::map<std::string, std::string>;

// Single-owner TCP connection speaking RESP2. Movable, not copyable. Once a
// reset or desync is observed the connection is marked unusable and every
// further call throws.
class Connection {
 public:
  static Connection open(const Endpoint& endpoint);

  Connection(Connection&& other) noexcept;
  Connection& operator=(Connection&& other) noexcept;
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;
  ~Connection();

  // Writes the whole batch, then reads exactly one reply per command, in
  // order. Server errors come back as kError replies; transport and framing
  // failures throw.
  void execute(std::span<const Command> batch, std::vector<Reply>& replies);
  std::vector<Reply> execute(std::span<const Command> batch);
  Reply execute_one(const Command& cmd);

  InfoMap fetch_info(const std::string& section = {});

  bool usable() const noexcept { return fd_ >= 0 && usable_; }
  const ConnectionCounters& counters() const noexcept { return counters_; }
  void close() noexcept;

 private:
  explicit Connection(int fd) : fd_(fd) {}

  [[noreturn]] void fail(ErrorCode code, const std::string& what);
  void write_all(std::string_view data);
  void fill_read_buffer();

  int fd_ = -1;
  bool usable_ = true;
  std::string wbuf_;
  std::string rbuf_;
  size_t rpos_ = 0;
  ConnectionCounters counters_;
};

std::vector<Reply> execute_batch(Connection& conn, const CommandBatch& batch);

InfoMap fetch_info(Connection& conn, const std::string& section = {});

// Parses an INFO body ("field:value" lines, '#' comments) into a map.
InfoMap parse_info(std::string_view body);

}  // namespace kvbench::resp
