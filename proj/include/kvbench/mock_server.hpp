#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "kvbench/connection.hpp"

namespace kvbench::mock {

struct MockOptions {
  // When set, every command except AUTH is refused until AUTH succeeds.
  std::optional<std::string> password;
  // SET replies with a READONLY error.
  bool read_only = false;
  // Clients beyond this count get a maxclients error and are closed (0 = off).
  size_t max_clients = 0;
  // Any GET/SET touching this key gets an unparseable frame back.
  std::string desync_key;
  // Any GET/SET touching this key gets an error reply.
  std::string error_key;
  // Fixed INFO body; by default the server reports its own state.
  std::optional<std::string> info_body;
  // INFO with this section name gets an error reply.
  std::string info_error_section;
  bool info_unavailable = false;  // every INFO answers with an error
  // Record the key of every GET/SET, per connection, in arrival order.
  bool record_traces = false;
};

// In-process RESP2 server on 127.0.0.1 with an ephemeral port. One thread
// per client; the key space is a mutex-guarded hash map.
class MockServer {
 public:
  explicit MockServer(MockOptions options = {});
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  uint16_t port() const noexcept { return port_; }
  resp::Endpoint endpoint() const;

  size_t key_count() const;
  std::optional<std::string> value(const std::string& key) const;
  uint64_t sets() const noexcept { return sets_.load(); }
  uint64_t gets() const noexcept { return gets_.load(); }
  uint64_t commands() const noexcept { return commands_.load(); }
  size_t connections_accepted() const noexcept { return accepted_.load(); }

  // Per-connection key traces in accept order (requires record_traces).
  std::vector<std::vector<std::string>> traces() const;

  void clear();
  // Toggles write rejection while clients are connected.
  void set_read_only(bool on) { read_only_ = on; }
  void stop();

 private:
  struct Client;

  void accept_loop();
  void serve(std::shared_ptr<Client> client);
  std::string default_info() const;

  MockOptions options_;
  int listen_fd_ = -1;
  int wake_pipe_[2] = {-1, -1};
  uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;

  mutable std::mutex clients_mu_;
  std::vector<std::shared_ptr<Client>> clients_;
  std::vector<std::thread> workers_;
  std::atomic<size_t> live_clients_{0};
  std::atomic<size_t> accepted_{0};

  mutable std::mutex data_mu_;
  std::unordered_map<std::string, std::string> data_;
  uint64_t data_bytes_ = 0;

  std::atomic<uint64_t> sets_{0};
  std::atomic<uint64_t> gets_{0};
  std::atomic<uint64_t> commands_{0};
  std::atomic<bool> read_only_{false};
};

}  // namespace kvbench::mock
