#pragma once

#include <memory>
#include <string>
#include <string_view>

#include <json.hpp>

#include "moira/service.h"

namespace moira {

struct HttpReply {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// Routes of the HTTP API:
//   POST /sessions                 {user, role, device, area?}
//   POST /sessions/{id}/messages   {kind, body, conversation?, in_reply_to?}
//   GET  /sessions/{id}
//   GET  /kb/facts?pattern=s,p,o   (* or ?x for a wildcard)
//   POST /kb/model                 CE text
//   GET  /conversations/{id}
HttpReply handle_http(Service& service, std::string_view method,
                      std::string_view target, const std::string& body);

nlohmann::json to_json(const Session& session, bool with_inbox = true);
nlohmann::json to_json(const Fact& fact);
std::string url_decode(std::string_view s);

// HTTP and WebSocket (/sessions/{id}/stream) on one port.
class Server {
 public:
  Server(Service& service, const std::string& address, unsigned short port,
         int threads = 2);
  ~Server();
  // Non-blocking: starts the worker threads.
  void start();
  void stop();
  // Blocks until stop() (or SIGINT/SIGTERM when `handle_signals`).
  void wait(bool handle_signals = false);
  unsigned short port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace moira
