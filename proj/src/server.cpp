#include "gpdiag/service.hpp"

#include "httplib.h"

#include <iostream>

namespace gpdiag {

int run_server(const ServiceConfig& config) {
  Service service(config);
  httplib::Server server;
  auto forward = [&](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse r = service.handle(req.method, req.target, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Get(".*", forward);
  server.Post(".*", forward);
  if (!server.bind_to_port(config.bind, config.port)) {
    std::cerr << "gpdiag: cannot bind " << config.bind << ':' << config.port << '\n';
    return 3;
  }
  std::cerr << "gpdiag: serving on http://" << config.bind << ':' << config.port << " (data in " << config.data_dir
            << ")\n";
  return server.listen_after_bind() ? 0 : 3;
}

}  // namespace gpdiag
