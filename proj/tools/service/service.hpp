#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>

namespace survcontour::service {

struct Config {
  std::string host = "0.0.0.0";
  int port = 8080;  // 0 binds an ephemeral port
  std::filesystem::path data_dir = "survcontour-data";
  int workers = 2;
  std::size_t max_upload_mb = 50;

  // PORT, DATA_DIR, WORKERS and MAX_UPLOAD_MB override the defaults.
  static Config from_env();
};

// HTTP facade over the engine: dataset upload, asynchronous fits, payload retrieval.
class Service {
 public:
  explicit Service(Config config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds, serves on a background thread and returns the bound port.
  int start();
  // Serves on the calling thread until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string sha256_hex(std::string_view bytes);

}  // namespace survcontour::service
