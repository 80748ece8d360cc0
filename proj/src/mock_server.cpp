#include "kvbench/mock_server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/resource.h>
#include <sys/socket.h>
#include <unistd.h>

#include <fcntl.h>

#include <cerrno>
#include <cstdio>

#include "kvbench/error.hpp"

namespace kvbench::mock {

struct MockServer::Client {
  int fd = -1;
  std::mutex trace_mu;
  std::vector<std::string> trace;
};

namespace {

double timeval_seconds(const timeval& tv) {
  return static_cast<double>(tv.tv_sec) + static_cast<double>(tv.tv_usec) / 1e6;
}

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<size_t>(n));
  }
  return true;
}

resp::Reply simple(std::string text) { return {resp::ReplyKind::kSimpleString, std::move(text), 0, {}}; }
resp::Reply error(std::string text) { return {resp::ReplyKind::kError, std::move(text), 0, {}}; }

}  // namespace

MockServer::MockServer(MockOptions options) : options_(std::move(options)) {
  read_only_ = options_.read_only;
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (listen_fd_ < 0) throw Error(ErrorCode::kIo, "mock: socket() failed");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listen_fd_, 1024) != 0) {
    ::close(listen_fd_);
    throw Error(ErrorCode::kIo, "mock: bind/listen failed");
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  if (::pipe2(wake_pipe_, O_CLOEXEC) != 0) {
    ::close(listen_fd_);
    throw Error(ErrorCode::kIo, "mock: pipe failed");
  }
  acceptor_ = std::thread([this] { accept_loop(); });
}

MockServer::~MockServer() { stop(); }

resp::Endpoint MockServer::endpoint() const {
  resp::Endpoint ep;
  ep.host = "127.0.0.1";
  ep.port = port_;
  ep.connect_timeout = std::chrono::milliseconds(2000);
  ep.io_timeout = std::chrono::milliseconds(10000);
  ep.password = options_.password;
  return ep;
}

void MockServer::stop() {
  if (stopping_.exchange(true)) return;
  const char byte = 'x';
  [[maybe_unused]] auto n = ::write(wake_pipe_[1], &byte, 1);
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lock(clients_mu_);
    for (auto& c : clients_) {
      if (c->fd >= 0) ::shutdown(c->fd, SHUT_RDWR);
    }
  }
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
  ::close(listen_fd_);
  ::close(wake_pipe_[0]);
  ::close(wake_pipe_[1]);
}

void MockServer::accept_loop() {
  for (;;) {
    pollfd fds[2] = {{listen_fd_, POLLIN, 0}, {wake_pipe_[0], POLLIN, 0}};
    if (::poll(fds, 2, -1) < 0) {
      if (errno == EINTR) continue;
      return;
    }
    if (fds[1].revents != 0 || stopping_) return;
    if ((fds[0].revents & POLLIN) == 0) continue;
    const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    auto client = std::make_shared<Client>();
    client->fd = fd;
    ++accepted_;
    std::lock_guard lock(clients_mu_);
    clients_.push_back(client);
    workers_.emplace_back([this, client] { serve(client); });
  }
}

void MockServer::serve(std::shared_ptr<Client> client) {
  const size_t live = ++live_clients_;
  const int fd = client->fd;
  auto finish = [&] {
    --live_clients_;
    std::lock_guard lock(clients_mu_);
    ::close(fd);
    client->fd = -1;
  };
  if (options_.max_clients != 0 && live > options_.max_clients) {
    send_all(fd, "-ERR max number of clients reached\r\n");
    finish();
    return;
  }

  bool authed = !options_.password.has_value();
  std::string in;
  std::string out;
  char chunk[16384];
  for (;;) {
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      break;
    }
    in.append(chunk, static_cast<size_t>(n));
    out.clear();
    size_t pos = 0;
    bool close_after = false;
    for (;;) {
      size_t consumed = 0;
      std::optional<std::vector<std::string>> args;
      try {
        args = resp::parse_request(std::string_view(in).substr(pos), consumed);
      } catch (const Error&) {
        out += "-ERR Protocol error\r\n";
        close_after = true;
        break;
      }
      if (!args) break;
      pos += consumed;
      ++commands_;
      const auto cmd = resp::to_command(*args);
      if (!cmd) {
        resp::encode_reply(error("ERR unknown command '" + (*args)[0] + "'"), out);
        continue;
      }
      if (cmd->kind == resp::CommandKind::kAuth) {
        if (!options_.password) {
          resp::encode_reply(error("ERR Client sent AUTH, but no password is set"), out);
        } else if (cmd->key == *options_.password) {
          authed = true;
          resp::encode_reply(simple("OK"), out);
        } else {
          resp::encode_reply(error("WRONGPASS invalid username-password pair"), out);
        }
        continue;
      }
      if (!authed) {
        resp::encode_reply(error("NOAUTH Authentication required."), out);
        continue;
      }
      const bool keyed = cmd->kind == resp::CommandKind::kGet || cmd->kind == resp::CommandKind::kSet;
      if (keyed && options_.record_traces) {
        std::lock_guard lock(client->trace_mu);
        client->trace.push_back(cmd->key);
      }
      if (keyed && !options_.desync_key.empty() && cmd->key == options_.desync_key) {
        out += "?garbage\r\n";
        continue;
      }
      if (keyed && !options_.error_key.empty() && cmd->key == options_.error_key) {
        resp::encode_reply(error("ERR injected failure"), out);
        continue;
      }
      switch (cmd->kind) {
        case resp::CommandKind::kPing:
          resp::encode_reply(simple("PONG"), out);
          break;
        case resp::CommandKind::kSet: {
          ++sets_;
          if (read_only_) {
            resp::encode_reply(error("READONLY You can't write against a read only replica."), out);
            break;
          }
          {
            std::lock_guard lock(data_mu_);
            auto [it, inserted] = data_.try_emplace(cmd->key);
            if (inserted) {
              data_bytes_ += cmd->key.size();
            } else {
              data_bytes_ -= it->second.size();
            }
            data_bytes_ += cmd->value.size();
            it->second = cmd->value;
          }
          resp::encode_reply(simple("OK"), out);
          break;
        }
        case resp::CommandKind::kGet: {
          ++gets_;
          resp::Reply r;
          {
            std::lock_guard lock(data_mu_);
            auto it = data_.find(cmd->key);
            if (it != data_.end()) r = {resp::ReplyKind::kBulkString, it->second, 0, {}};
          }
          resp::encode_reply(r, out);
          break;
        }
        case resp::CommandKind::kInfo: {
          if (options_.info_unavailable ||
              (!options_.info_error_section.empty() && cmd->key == options_.info_error_section)) {
            resp::encode_reply(error("ERR unsupported INFO section"), out);
            break;
          }
          std::string body = options_.info_body ? *options_.info_body : default_info();
          resp::encode_reply({resp::ReplyKind::kBulkString, std::move(body), 0, {}}, out);
          break;
        }
        case resp::CommandKind::kAuth:
          break;
      }
    }
    in.erase(0, pos);
    if (!out.empty() && !send_all(fd, out)) break;
    if (close_after) break;
  }
  finish();
}

std::string MockServer::default_info() const {
  rusage usage{};
  ::getrusage(RUSAGE_SELF, &usage);
  size_t keys = 0;
  uint64_t bytes = 0;
  {
    std::lock_guard lock(data_mu_);
    keys = data_.size();
    bytes = data_bytes_;
  }
  // Rough per-entry overhead so used_memory tracks the key count.
  const uint64_t used = 1048576 + bytes + keys * 64;
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "# Server\r\nredis_version:7.2.7\r\nredis_mode:standalone\r\n\r\n"
                "# Clients\r\nconnected_clients:%zu\r\n\r\n"
                "# Memory\r\nused_memory:%llu\r\n\r\n"
                "# CPU\r\nused_cpu_sys:%.6f\r\nused_cpu_user:%.6f\r\n\r\n"
                "# Keyspace\r\ndb0:keys=%zu,expires=0\r\n",
                live_clients_.load(), static_cast<unsigned long long>(used),
                timeval_seconds(usage.ru_stime), timeval_seconds(usage.ru_utime), keys);
  return buf;
}

size_t MockServer::key_count() const {
  std::lock_guard lock(data_mu_);
  return data_.size();
}

std::optional<std::string> MockServer::value(const std::string& key) const {
  std::lock_guard lock(data_mu_);
  auto it = data_.find(key);
  if (it == data_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::vector<std::string>> MockServer::traces() const {
  std::vector<std::vector<std::string>> out;
  std::lock_guard lock(clients_mu_);
  for (const auto& c : clients_) {
    std::lock_guard tl(c->trace_mu);
    out.push_back(c->trace);
  }
  return out;
}

void MockServer::clear() {
  std::lock_guard lock(data_mu_);
  data_.clear();
  data_bytes_ = 0;
}

}  // namespace kvbench::mock
