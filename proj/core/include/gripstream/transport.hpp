#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace gripstream {

inline constexpr std::uint16_t kDefaultPort = 7332;

// Destination for an encoded glove stream. write() either sends every byte or
// throws TransportError.
class ByteSink {
 public:
  virtual ~ByteSink() = default;
  virtual void write(std::span<const std::uint8_t> bytes) = 0;
  virtual void flush() {}
};

class MemorySink final : public ByteSink {
 public:
  void write(std::span<const std::uint8_t> bytes) override;
  std::vector<std::uint8_t> bytes() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::uint8_t> bytes_;
};

class FileSink final : public ByteSink {
 public:
  explicit FileSink(const std::string& path);
  void write(std::span<const std::uint8_t> bytes) override;
  void flush() override;

 private:
  std::string path_;
  std::ofstream out_;
};

// Connected stream socket. Move-only; closes on destruction.
class TcpStream final : public ByteSink {
 public:
  TcpStream() = default;
  explicit TcpStream(int fd) : fd_(fd) {}
  TcpStream(TcpStream&& other) noexcept;
  TcpStream& operator=(TcpStream&& other) noexcept;
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;
  ~TcpStream() override;

  // Connects to 127.0.0.1:port.
  static TcpStream connect_loopback(std::uint16_t port);

  void write(std::span<const std::uint8_t> bytes) override;
  // Blocks until data arrives. Returns 0 on orderly shutdown by the peer.
  std::size_t read(std::span<std::uint8_t> buffer);
  void shutdown_write();
  bool is_open() const { return fd_ >= 0; }

 private:
  void close();
  int fd_ = -1;
};

// Listening socket bound to 127.0.0.1.
class TcpListener {
 public:
  // port 0 picks an ephemeral port; see port().
  explicit TcpListener(std::uint16_t port);
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;
  ~TcpListener();

  std::uint16_t port() const { return port_; }
  TcpStream accept();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

}  // namespace gripstream
