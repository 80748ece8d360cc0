#include "kvbench/connection.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <utility>

namespace kvbench::resp {
namespace {

using Clock = std::chrono::steady_clock;

std::string errno_text(int err) { return std::strerror(err); }

timeval to_timeval(std::chrono::milliseconds ms) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(ms.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((ms.count() % 1000) * 1000);
  return tv;
}

// Non-blocking connect bounded by `timeout`; returns a connected blocking fd.
int connect_with_timeout(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  if (int rc = ::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw Error(ErrorCode::kResolveFailure,
                "cannot resolve " + ep.host + ": " + ::gai_strerror(rc));
  }
  ErrorCode last_code = ErrorCode::kConnectRefused;
  std::string last_what = "no usable address for " + ep.to_string();
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    const int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
    int err = rc == 0 ? 0 : errno;
    if (err == EINPROGRESS) {
      pollfd pfd{fd, POLLOUT, 0};
      rc = ::poll(&pfd, 1, static_cast<int>(ep.connect_timeout.count()));
      if (rc == 0) {
        err = ETIMEDOUT;
      } else if (rc < 0) {
        err = errno;
      } else {
        socklen_t len = sizeof(err);
        ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
      }
    }
    if (err == 0) {
      ::fcntl(fd, F_SETFL, flags);
      break;
    }
    ::close(fd);
    fd = -1;
    if (err == ETIMEDOUT) {
      last_code = ErrorCode::kConnectTimeout;
      last_what = "connect to " + ep.to_string() + " timed out after " +
                  std::to_string(ep.connect_timeout.count()) + " ms";
    } else {
      last_code = err == ECONNREFUSED ? ErrorCode::kConnectRefused : ErrorCode::kIo;
      last_what = "connect to " + ep.to_string() + " failed: " + errno_text(err);
    }
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw Error(last_code, last_what);

  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  const timeval tv = to_timeval(ep.io_timeout);
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
  return fd;
}

}  // namespace

void Endpoint::validate() const {
  if (host.empty()) invalid_parameter("endpoint: empty host");
  if (port == 0) invalid_parameter("endpoint: port must be in 1..65535");
  if (connect_timeout.count() <= 0) invalid_parameter("endpoint: connect_timeout must be > 0");
  if (io_timeout.count() <= 0) invalid_parameter("endpoint: io_timeout must be > 0");
}

std::string Endpoint::to_string() const { return host + ":" + std::to_string(port); }

Connection Connection::open(const Endpoint& endpoint) {
  endpoint.validate();
  Connection conn(connect_with_timeout(endpoint));
  if (endpoint.password) {
    Reply r;
    try {
      r = conn.execute_one(Command::auth(*endpoint.password));
    } catch (const Error& e) {
      throw Error(ErrorCode::kAuthFailure, std::string("AUTH failed: ") + e.what());
    }
    if (r.is_error()) throw Error(ErrorCode::kAuthFailure, "AUTH rejected: " + r.payload);
  }
  return conn;
}

Connection::Connection(Connection&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)),
      usable_(other.usable_),
      wbuf_(std::move(other.wbuf_)),
      rbuf_(std::move(other.rbuf_)),
      rpos_(other.rpos_),
      counters_(other.counters_) {}

Connection& Connection::operator=(Connection&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
    usable_ = other.usable_;
    wbuf_ = std::move(other.wbuf_);
    rbuf_ = std::move(other.rbuf_);
    rpos_ = other.rpos_;
    counters_ = other.counters_;
  }
  return *this;
}

Connection::~Connection() { close(); }

void Connection::close() noexcept {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Connection::fail(ErrorCode code, const std::string& what) {
  usable_ = false;
  throw Error(code, what);
}

void Connection::write_all(std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(ErrorCode::kConnectionReset, "write failed: " + errno_text(errno));
    }
    data.remove_prefix(static_cast<size_t>(n));
  }
}

void Connection::fill_read_buffer() {
  if (rpos_ > 0 && rpos_ == rbuf_.size()) {
    rbuf_.clear();
    rpos_ = 0;
  } else if (rpos_ > 65536) {
    rbuf_.erase(0, rpos_);
    rpos_ = 0;
  }
  char chunk[16384];
  for (;;) {
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n > 0) {
      rbuf_.append(chunk, static_cast<size_t>(n));
      return;
    }
    if (n == 0) fail(ErrorCode::kConnectionReset, "connection closed by peer");
    if (errno == EINTR) continue;
    if (errno == EAGAIN || errno == EWOULDBLOCK) {
      fail(ErrorCode::kConnectionReset, "read timed out");
    }
    fail(ErrorCode::kConnectionReset, "read failed: " + errno_text(errno));
  }
}

void Connection::execute(std::span<const Command> batch, std::vector<Reply>& replies) {
  if (!usable()) throw Error(ErrorCode::kConnectionReset, "connection is not usable");
  replies.clear();
  if (batch.empty()) return;
  wbuf_.clear();
  for (const auto& c : batch) encode_command(c, wbuf_);

  const auto start = Clock::now();
  counters_.commands_sent += batch.size();
  write_all(wbuf_);

  while (replies.size() < batch.size()) {
    size_t consumed = 0;
    std::optional<Reply> reply;
    try {
      reply = parse_reply(std::string_view(rbuf_).substr(rpos_), consumed);
    } catch (const Error&) {
      usable_ = false;
      throw;
    }
    if (!reply) {
      fill_read_buffer();
      continue;
    }
    rpos_ += consumed;
    reply->rtt = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
    if (reply->rtt.count() <= 0) reply->rtt = std::chrono::nanoseconds{1};
    ++counters_.replies_received;
    if (reply->is_error()) ++counters_.error_replies;
    replies.push_back(std::move(*reply));
  }
}

std::vector<Reply> Connection::execute(std::span<const Command> batch) {
  std::vector<Reply> out;
  out.reserve(batch.size());
  execute(batch, out);
  return out;
}

Reply Connection::execute_one(const Command& cmd) {
  auto replies = execute(std::span<const Command>(&cmd, 1));
  return std::move(replies.front());
}

InfoMap Connection::fetch_info(const std::string& section) {
  Reply r = execute_one(Command::info(section));
  if (r.is_error()) throw Error(ErrorCode::kInfoUnavailable, "INFO unavailable: " + r.payload);
  if (r.kind != ReplyKind::kBulkString && r.kind != ReplyKind::kSimpleString) {
    throw Error(ErrorCode::kInfoUnavailable,
                std::string("INFO returned unexpected ") + to_string(r.kind) + " reply");
  }
  return parse_info(r.payload);
}

std::vector<Reply> execute_batch(Connection& conn, const CommandBatch& batch) {
  return conn.execute(batch.commands());
}

InfoMap fetch_info(Connection& conn, const std::string& section) {
  return conn.fetch_info(section);
}

InfoMap parse_info(std::string_view body) {
  InfoMap out;
  while (!body.empty()) {
    size_t nl = body.find('\n');
    std::string_view line = body.substr(0, nl);
    body = nl == std::string_view::npos ? std::string_view{} : body.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const size_t colon = line.find(':');
    if (colon == std::string_view::npos || colon == 0) continue;
    out.emplace(std::string(line.substr(0, colon)), std::string(line.substr(colon + 1)));
  }
  return out;
}

}  // namespace kvbench::resp
