#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "httplib.h"
#include "service.h"

int main(int argc, char** argv) {
  CLI::App app{"linrank HTTP service"};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir = LINRANK_DEFAULT_STATIC_DIR;
  linrank::service::ServiceOptions options;
  app.add_option("--host", host, "Listen address");
  app.add_option("--port", port, "Listen port")->check(CLI::Range(1, 65535));
  app.add_option("--static-dir", static_dir, "Directory served at /");
  app.add_option("--workers", options.workers, "Solver worker threads")->check(CLI::PositiveNumber);
  app.add_option("--max-rows", options.max_rows, "Largest accepted upload, in tuples")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  linrank::service::Service service(options);
  httplib::Server server;
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    const linrank::service::Response r = service.Handle(req.method, req.path, req.body);
    res.status = r.status;
    if (!r.body.empty()) res.set_content(r.body, r.content_type);
  };
  server.Post(R"(/datasets(/.*)?)", forward);
  server.Get(R"(/datasets/.*)", forward);
  server.Delete(R"(/datasets/.*)", forward);
  server.Get(R"(/jobs/.*)", forward);
  server.Delete(R"(/jobs/.*)", forward);
  if (!server.set_mount_point("/", static_dir)) {
    std::cerr << "warning: static directory " << static_dir << " not found\n";
  }
  std::cout << "listening on http://" << host << ':' << port << std::endl;
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot listen on " << host << ':' << port << '\n';
    return 1;
  }
  return 0;
}
