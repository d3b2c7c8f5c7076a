#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gripstream/alerting.hpp"
#include "gripstream/ingest.hpp"
#include "gripstream/model.hpp"

namespace gripstream::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Entry point shared by the executable and the tests. Data goes to `out`,
// diagnostics and alerts-as-bell to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct ServeOptions {
  std::uint16_t port = 7332;
  unsigned connections = 2;
  std::filesystem::path out_dir;
  std::string subject = "anon";
  std::string condition = "baseline";
  Side dominant_side = Side::Right;
  DeviceConfig device;
  AlertPolicy policy;
  bool bell = true;
};

struct ServeResult {
  std::vector<Session> sessions;
  std::vector<AlertEvent> alerts;
  std::vector<FileManifest> manifests;
};

// Accepts `connections` glove streams on the loopback port, ingesting and
// monitoring each on its own thread; records every session once its
// connection closes. on_listening receives the bound port.
ServeResult serve(const ServeOptions& options, std::ostream& out, std::ostream& err,
                  const std::function<void(std::uint16_t)>& on_listening = {});

}  // namespace gripstream::cli
