#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kvbench::resp {

enum class CommandKind { kGet, kSet, kInfo, kAuth, kPing };

const char* to_string(CommandKind kind);

// For INFO the section travels in `key` (empty means no argument); for AUTH
// the password does.
struct Command {
  CommandKind kind = CommandKind::kPing;
  std::string key;
  std::string value;

  static Command get(std::string key) { return {CommandKind::kGet, std::move(key), {}}; }
  static Command set(std::string key, std::string value) {
    return {CommandKind::kSet, std::move(key), std::move(value)};
  }
  static Command info(std::string section = {}) { return {CommandKind::kInfo, std::move(section), {}}; }
  static Command auth(std::string password) { return {CommandKind::kAuth, std::move(password), {}}; }
  static Command ping() { return {CommandKind::kPing, {}, {}}; }

  friend bool operator==(const Command&, const Command&) = default;
};

enum class ReplyKind { kSimpleString, kBulkString, kError, kInteger, kNil };

const char* to_string(ReplyKind kind);

struct Reply {
  ReplyKind kind = ReplyKind::kNil;
  std::string payload;  // simple/bulk body, or the server's error text verbatim
  int64_t integer = 0;
  std::chrono::nanoseconds rtt{0};

  bool is_error() const noexcept { return kind == ReplyKind::kError; }
};

// Appends the RESP2 array-of-bulk-strings framing of `cmd` to `out`.
void encode_command(const Command& cmd, std::string& out);
std::string encode_batch(std::span<const Command> commands);

// Appends the RESP2 encoding of a reply (server side of the codec).
void encode_reply(const Reply& reply, std::string& out);

// Incremental decoders. Both return std::nullopt when `buf` does not yet hold
// a complete frame and throw Error(kProtocolDesync) on malformed input. On
// success `consumed` is set to the frame length.
std::optional<Reply> parse_reply(std::string_view buf, size_t& consumed);
std::optional<std::vector<std::string>> parse_request(std::string_view buf, size_t& consumed);

// Maps a decoded request array back to a Command; nullopt for commands the
// toolkit does not speak.
std::optional<Command> to_command(std::span<const std::string> args);

// Ordered batch of pipelined commands bounded by the configured depth.
// Slots are reused across batches so steady-state filling does not allocate.
class CommandBatch {
 public:
  explicit CommandBatch(size_t depth);

  size_t depth() const noexcept { return depth_; }
  size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  bool full() const noexcept { return size_ == depth_; }

  // Returns the next free slot; throws when the batch is already full.
  Command& append(CommandKind kind);
  void add(Command cmd);
  void clear() noexcept { size_ = 0; }

  std::span<const Command> commands() const noexcept { return {slots_.data(), size_}; }

 private:
  size_t depth_;
  size_t size_ = 0;
  std::vector<Command> slots_;
};

}  // namespace kvbench::resp
