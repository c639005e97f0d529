#pragma once

#include "gpdiag/json_io.hpp"

#include <memory>
#include <string>

namespace gpdiag {

struct ServiceConfig {
  std::string bind = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "gpdiag-data";
  int threads = 0;  // fit workers; 0 = thread_cap()
};

struct HttpResponse {
  int status = 200;
  json body;
};

/// Session store and request handlers, independent of the HTTP transport so
/// they can be driven directly. Every mutating request is appended to
/// data_dir/events.jsonl and replayed on construction.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Dispatches method + path (with optional query string) + JSON body text.
  HttpResponse handle(const std::string& method, const std::string& target, const std::string& body);
  /// Blocks until no fit is running in any session.
  void wait_idle();
  json openapi() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Polynomial trend over the lattice coordinates of grid data, standardized.
/// kind: ns_linear, ns_quadratic, ew_linear or ew_quadratic; north-south is the
/// second lattice axis.
Eigen::VectorXd synthetic_covariate(const Dataset& grid_data, const std::string& kind);

/// Serves `Service` over HTTP until the process is stopped.
int run_server(const ServiceConfig& config);

}  // namespace gpdiag
