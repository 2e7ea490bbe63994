#include <csignal>
#include <iostream>

#include "service.hpp"

namespace {
survcontour::service::Service* running = nullptr;
}

int main() {
  try {
    const auto config = survcontour::service::Config::from_env();
    survcontour::service::Service service(config);
    running = &service;
    std::signal(SIGINT, [](int) { running->stop(); });
    std::signal(SIGTERM, [](int) { running->stop(); });
    std::cerr << "survcontour-server listening on " << config.host << ":" << config.port << " (data in "
              << config.data_dir << ")\n";
    service.run();
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
