#include "kvbench/resp.hpp"

#include <cctype>
#include <charconv>

#include "kvbench/error.hpp"

namespace kvbench::resp {
namespace {

constexpr int64_t kMaxBulkLength = 512LL * 1024 * 1024;

[[noreturn]] void desync(const std::string& what) {
  throw Error(ErrorCode::kProtocolDesync, "protocol desync: " + what);
}

void append_bulk(std::string_view s, std::string& out) {
  out += '$';
  out += std::to_string(s.size());
  out += "\r\n";
  out.append(s);
  out += "\r\n";
}

// Finds the CRLF-terminated line starting at `pos`. Returns npos if the
// terminator has not arrived yet.
size_t find_line_end(std::string_view buf, size_t pos) {
  const size_t cr = buf.find('\r', pos);
  if (cr == std::string_view::npos || cr + 1 >= buf.size()) return std::string_view::npos;
  if (buf[cr + 1] != '\n') desync("bare CR in line");
  return cr;
}

int64_t parse_int(std::string_view text) {
  int64_t v = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty()) {
    desync("bad integer '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

const char* to_string(CommandKind kind) {
  switch (kind) {
    case CommandKind::kGet: return "GET";
    case CommandKind::kSet: return "SET";
    case CommandKind::kInfo: return "INFO";
    case CommandKind::kAuth: return "AUTH";
    case CommandKind::kPing: return "PING";
  }
  return "?";
}

const char* to_string(ReplyKind kind) {
  switch (kind) {
    case ReplyKind::kSimpleString: return "simple-string";
    case ReplyKind::kBulkString: return "bulk-string";
    case ReplyKind::kError: return "error";
    case ReplyKind::kInteger: return "integer";
    case ReplyKind::kNil: return "nil";
  }
  return "?";
}

void encode_command(const Command& cmd, std::string& out) {
  switch (cmd.kind) {
    case CommandKind::kGet:
      out += "*2\r\n$3\r\nGET\r\n";
      append_bulk(cmd.key, out);
      break;
    case CommandKind::kSet:
      out += "*3\r\n$3\r\nSET\r\n";
      append_bulk(cmd.key, out);
      append_bulk(cmd.value, out);
      break;
    case CommandKind::kInfo:
      if (cmd.key.empty()) {
        out += "*1\r\n$4\r\nINFO\r\n";
      } else {
        out += "*2\r\n$4\r\nINFO\r\n";
        append_bulk(cmd.key, out);
      }
      break;
    case CommandKind::kAuth:
      out += "*2\r\n$4\r\nAUTH\r\n";
      append_bulk(cmd.key, out);
      break;
    case CommandKind::kPing:
      out += "*1\r\n$4\r\nPING\r\n";
      break;
  }
}

std::string encode_batch(std::span<const Command> commands) {
  std::string out;
  for (const auto& c : commands) encode_command(c, out);
  return out;
}

void encode_reply(const Reply& reply, std::string& out) {
  switch (reply.kind) {
    case ReplyKind::kSimpleString:
      out += '+';
      out += reply.payload;
      out += "\r\n";
      break;
    case ReplyKind::kError:
      out += '-';
      out += reply.payload;
      out += "\r\n";
      break;
    case ReplyKind::kInteger:
      out += ':';
      out += std::to_string(reply.integer);
      out += "\r\n";
      break;
    case ReplyKind::kBulkString:
      append_bulk(reply.payload, out);
      break;
    case ReplyKind::kNil:
      out += "$-1\r\n";
      break;
  }
}

std::optional<Reply> parse_reply(std::string_view buf, size_t& consumed) {
  if (buf.empty()) return std::nullopt;
  const size_t eol = find_line_end(buf, 1);
  if (eol == std::string_view::npos) return std::nullopt;
  const std::string_view line = buf.substr(1, eol - 1);
  Reply r;
  switch (buf[0]) {
    case '+':
      r.kind = ReplyKind::kSimpleString;
      r.payload.assign(line);
      consumed = eol + 2;
      return r;
    case '-':
      r.kind = ReplyKind::kError;
      r.payload.assign(line);
      consumed = eol + 2;
      return r;
    case ':':
      r.kind = ReplyKind::kInteger;
      r.integer = parse_int(line);
      consumed = eol + 2;
      return r;
    case '$': {
      const int64_t len = parse_int(line);
      if (len == -1) {
        r.kind = ReplyKind::kNil;
        consumed = eol + 2;
        return r;
      }
      if (len < 0 || len > kMaxBulkLength) desync("bad bulk length " + std::to_string(len));
      const size_t body = eol + 2;
      const size_t need = body + static_cast<size_t>(len) + 2;
      if (buf.size() < need) return std::nullopt;
      if (buf[need - 2] != '\r' || buf[need - 1] != '\n') desync("bulk string not CRLF-terminated");
      r.kind = ReplyKind::kBulkString;
      r.payload.assign(buf.substr(body, static_cast<size_t>(len)));
      consumed = need;
      return r;
    }
    default:
      desync(std::string("unexpected reply type byte 0x") +
             "0123456789abcdef"[(static_cast<unsigned char>(buf[0]) >> 4) & 0xf] +
             "0123456789abcdef"[static_cast<unsigned char>(buf[0]) & 0xf]);
  }
}

std::optional<std::vector<std::string>> parse_request(std::string_view buf, size_t& consumed) {
  if (buf.empty()) return std::nullopt;
  if (buf[0] != '*') desync("request is not an array");
  size_t eol = find_line_end(buf, 1);
  if (eol == std::string_view::npos) return std::nullopt;
  const int64_t n = parse_int(buf.substr(1, eol - 1));
  if (n < 1 || n > 1024 * 1024) desync("bad array length");
  std::vector<std::string> args;
  args.reserve(static_cast<size_t>(n));
  size_t pos = eol + 2;
  for (int64_t i = 0; i < n; ++i) {
    if (pos >= buf.size()) return std::nullopt;
    if (buf[pos] != '$') desync("array element is not a bulk string");
    eol = find_line_end(buf, pos + 1);
    if (eol == std::string_view::npos) return std::nullopt;
    const int64_t len = parse_int(buf.substr(pos + 1, eol - pos - 1));
    if (len < 0 || len > kMaxBulkLength) desync("bad bulk length");
    const size_t body = eol + 2;
    const size_t end = body + static_cast<size_t>(len) + 2;
    if (buf.size() < end) return std::nullopt;
    if (buf[end - 2] != '\r' || buf[end - 1] != '\n') desync("bulk string not CRLF-terminated");
    args.emplace_back(buf.substr(body, static_cast<size_t>(len)));
    pos = end;
  }
  consumed = pos;
  return args;
}

std::optional<Command> to_command(std::span<const std::string> args) {
  if (args.empty()) return std::nullopt;
  std::string name = args[0];
  for (auto& ch : name) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  if (name == "GET" && args.size() == 2) return Command::get(args[1]);
  if (name == "SET" && args.size() == 3) return Command::set(args[1], args[2]);
  if (name == "INFO" && args.size() == 1) return Command::info();
  if (name == "INFO" && args.size() == 2) return Command::info(args[1]);
  if (name == "AUTH" && args.size() == 2) return Command::auth(args[1]);
  if (name == "PING" && args.size() == 1) return Command::ping();
  return std::nullopt;
}

CommandBatch::CommandBatch(size_t depth) : depth_(depth) {
  if (depth_ == 0) invalid_parameter("pipeline depth must be >= 1");
  slots_.resize(depth_);
}

Command& CommandBatch::append(CommandKind kind) {
  if (full()) invalid_parameter("command batch exceeds pipeline depth " + std::to_string(depth_));
  Command& slot = slots_[size_++];
  slot.kind = kind;
  slot.key.clear();
  slot.value.clear();
  return slot;
}

void CommandBatch::add(Command cmd) {
  Command& slot = append(cmd.kind);
  slot = std::move(cmd);
}

}  // namespace kvbench::resp
