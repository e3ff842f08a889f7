#include "moira/server.h"

#include <csignal>
#include <deque>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast.hpp>

#include "moira/ce_parser.h"
#include "moira/message_json.h"
#include "moira/text.h"

namespace moira {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

HttpReply reply_json(int status, const json& j) {
  return HttpReply{status, "application/json", j.dump()};
}

HttpReply error_reply(int status, const std::string& message) {
  return reply_json(status, {{"error", message}});
}

std::vector<std::string> path_parts(std::string_view path) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) out.push_back(url_decode(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(url_decode(cur));
  return out;
}

std::string query_param(std::string_view query, std::string_view key) {
  std::size_t pos = 0;
  while (pos <= query.size()) {
    std::size_t amp = query.find('&', pos);
    if (amp == std::string_view::npos) amp = query.size();
    std::string_view pair = query.substr(pos, amp - pos);
    std::size_t eq = pair.find('=');
    if (pair.substr(0, eq) == key)
      return eq == std::string_view::npos ? std::string() : url_decode(pair.substr(eq + 1));
    pos = amp + 1;
  }
  return {};
}

std::optional<std::string> pattern_slot(std::string s) {
  std::string t(trim(s));
  if (t.empty() || t == "*" || t.front() == '?') return std::nullopt;
  if (t.size() >= 2 && (t.front() == '\'' || t.front() == '"') && t.back() == t.front())
    t = t.substr(1, t.size() - 2);
  return t;
}

Post post_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("expected a JSON object");
  Post p;
  if (j.contains("kind")) {
    auto kind = parse_message_kind(j.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown kind");
    p.kind = *kind;
  }
  if (j.contains("body")) p.body = body_from_json(j.at("body"));
  if (j.contains("text")) p.body.text = j.at("text").get<std::string>();
  if (j.contains("ce")) p.body.ce = j.at("ce").get<std::string>();
  if (j.contains("ref")) p.body.ref = j.at("ref").get<std::string>();
  p.conversation = j.value("conversation", "");
  if (j.contains("in_reply_to") && j.at("in_reply_to").is_string())
    p.in_reply_to = j.at("in_reply_to").get<std::string>();
  return p;
}

json messages_json(const std::vector<Message>& ms) {
  json arr = json::array();
  for (const auto& m : ms) arr.push_back(to_json(m));
  return arr;
}

}  // namespace

std::string url_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
      out += static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16));
      i += 2;
    } else if (s[i] == '+') {
      out += ' ';
    } else {
      out += s[i];
    }
  }
  return out;
}

json to_json(const Session& s, bool with_inbox) {
  json j = {{"id", s.id},          {"user", s.user},
            {"role", s.role},      {"device", s.device},
            {"area", s.area},      {"conversations", s.conversations},
            {"score", s.score},    {"observe", s.observe}};
  if (with_inbox) j["inbox"] = messages_json(s.inbox);
  return j;
}

json to_json(const Fact& f) {
  std::string kind = f.object.kind == Term::Kind::kInstance  ? "instance"
                     : f.object.kind == Term::Kind::kConcept ? "concept"
                                                             : "literal";
  json j = {{"id", f.id},
            {"subject", f.subject},
            {"property", f.property},
            {"object", {{"kind", kind}, {"text", f.object.text}}}};
  if (const auto* t = std::get_if<Told>(&f.provenance)) {
    j["provenance"] = {{"told", {{"source", t->source},
                                 {"conversation", t->conversation},
                                 {"timestamp", t->timestamp}}}};
  } else {
    const auto& i = std::get<Inferred>(f.provenance);
    j["provenance"] = {{"inferred", {{"rule", i.rule}, {"premises", i.premises}}}};
  }
  return j;
}

HttpReply handle_http(Service& service, std::string_view method,
                      std::string_view target, const std::string& body) {
  std::string_view path = target;
  std::string_view query;
  if (auto q = target.find('?'); q != std::string_view::npos) {
    path = target.substr(0, q);
    query = target.substr(q + 1);
  }
  auto parts = path_parts(path);
  try {
    if (parts.size() == 1 && parts[0] == "sessions") {
      if (method != "POST") return error_reply(405, "use POST");
      json j = json::parse(body);
      Session s = service.create_session(j.value("user", ""), j.value("role", ""),
                                         j.value("device", "phone"), j.value("area", ""));
      return reply_json(201, to_json(s, false));
    }
    if (parts.size() == 2 && parts[0] == "sessions") {
      if (method != "GET") return error_reply(405, "use GET");
      auto s = service.session(parts[1]);
      if (!s) return error_reply(404, "unknown session '" + parts[1] + "'");
      return reply_json(200, to_json(*s));
    }
    if (parts.size() == 3 && parts[0] == "sessions" && parts[2] == "messages") {
      if (method != "POST") return error_reply(405, "use POST");
      if (!service.session(parts[1])) return error_reply(404, "unknown session '" + parts[1] + "'");
      Post p = post_from_json(json::parse(body));
      return reply_json(200, messages_json(service.post(parts[1], p)));
    }
    if (parts.size() == 2 && parts[0] == "kb" && parts[1] == "facts") {
      if (method != "GET") return error_reply(405, "use GET");
      std::string pattern = query_param(query, "pattern");
      std::vector<std::string> slots;
      std::string cur;
      for (char c : pattern) {
        if (c == ',') {
          slots.push_back(cur);
          cur.clear();
        } else {
          cur += c;
        }
      }
      slots.push_back(cur);
      if (!pattern.empty() && slots.size() != 3)
        return error_reply(400, "pattern is subject,property,object");
      slots.resize(3);
      FactPattern fp;
      fp.subject = pattern_slot(slots[0]);
      fp.property = pattern_slot(slots[1]);
      fp.object = pattern_slot(slots[2]);
      json arr = json::array();
      for (const auto& f : service.query(fp)) arr.push_back(to_json(f));
      return reply_json(200, arr);
    }
    if (parts.size() == 2 && parts[0] == "kb" && parts[1] == "model") {
      if (method != "POST") return error_reply(405, "use POST");
      service.load_model(body, "model upload");
      return reply_json(200, {{"ok", true}});
    }
    if (parts.size() == 2 && parts[0] == "conversations") {
      if (method != "GET") return error_reply(405, "use GET");
      auto c = service.conversation(parts[1]);
      if (!c) return error_reply(404, "unknown conversation '" + parts[1] + "'");
      return reply_json(200, to_json(*c));
    }
    return error_reply(404, "no route for " + std::string(path));
  } catch (const json::exception& e) {
    return error_reply(400, e.what());
  } catch (const std::invalid_argument& e) {
    return error_reply(400, e.what());
  } catch (const ModelError& e) {
    return error_reply(400, e.what());
  } catch (const ServiceError& e) {
    return error_reply(400, e.what());
  } catch (const CeParseError& e) {
    return error_reply(400, e.what());
  } catch (const std::exception& e) {
    return error_reply(500, e.what());
  }
}

namespace {

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, Service& service, std::string session)
      : ws_(std::move(socket)), service_(service), session_(std::move(session)) {}

  ~WsSession() {
    if (listener_) service_.remove_listener(listener_);
  }

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    std::weak_ptr<WsSession> weak = shared_from_this();
    auto executor = ws_.get_executor();
    std::string me = session_;
    listener_ = service_.add_listener([weak, executor, me](const std::string& s, const Message& m) {
      if (s != me) return;
      std::string text = to_json(m).dump();
      net::post(executor, [weak, text = std::move(text)]() mutable {
        if (auto self = weak.lock()) self->send(std::move(text));
      });
    });
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      if (listener_) service_.remove_listener(listener_);
      listener_ = 0;
      return;
    }
    std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    // Posts may also arrive over the socket; replies come back through the
    // listener like everything else.
    try {
      service_.post(session_, post_from_json(json::parse(text)));
    } catch (const std::exception& e) {
      send(json{{"error", e.what()}}.dump());
    }
    do_read();
  }

  void send(std::string text) {
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) do_write();
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()),
                    beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) return;
    queue_.pop_front();
    if (!queue_.empty()) do_write();
  }

  websocket::stream<beast::tcp_stream> ws_;
  Service& service_;
  std::string session_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  int listener_ = 0;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, Service& service)
      : stream_(std::move(socket)), service_(service) {}

  void run() {
    net::dispatch(stream_.get_executor(),
                  beast::bind_front_handler(&HttpSession::do_read, shared_from_this()));
  }

 private:
  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(60));
    http::async_read(stream_, buffer_, req_,
                     beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (ec) return;
    std::string target(req_.target());
    if (websocket::is_upgrade(req_)) {
      auto parts = path_parts(target.substr(0, target.find('?')));
      if (parts.size() == 3 && parts[0] == "sessions" && parts[2] == "stream" &&
          service_.session(parts[1])) {
        stream_.expires_never();
        std::make_shared<WsSession>(stream_.release_socket(), service_, parts[1])
            ->run(std::move(req_));
        return;
      }
    }
    HttpReply r = handle_http(service_, std::string(req_.method_string()), target, req_.body());
    auto res = std::make_shared<http::response<http::string_body>>(
        static_cast<http::status>(r.status), req_.version());
    res->set(http::field::server, "moira");
    res->set(http::field::content_type, r.content_type);
    res->set(http::field::access_control_allow_origin, "*");
    res->keep_alive(req_.keep_alive());
    res->body() = std::move(r.body);
    res->prepare_payload();
    res_ = res;
    http::async_write(stream_, *res_,
                      beast::bind_front_handler(&HttpSession::on_write, shared_from_this(),
                                                res_->keep_alive()));
  }

  void on_write(bool keep_alive, beast::error_code ec, std::size_t) {
    if (ec) return;
    res_.reset();
    if (!keep_alive) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    do_read();
  }

  beast::tcp_stream stream_;
  Service& service_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  std::shared_ptr<http::response<http::string_body>> res_;
};

class Acceptor : public std::enable_shared_from_this<Acceptor> {
 public:
  Acceptor(net::io_context& ioc, tcp::endpoint endpoint, Service& service)
      : ioc_(ioc), acceptor_(net::make_strand(ioc)), service_(service) {
    acceptor_.open(endpoint.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(endpoint);
    acceptor_.listen(net::socket_base::max_listen_connections);
  }

  void run() { do_accept(); }
  unsigned short port() const { return acceptor_.local_endpoint().port(); }
  void close() {
    beast::error_code ec;
    acceptor_.close(ec);
  }

 private:
  void do_accept() {
    acceptor_.async_accept(net::make_strand(ioc_),
                           beast::bind_front_handler(&Acceptor::on_accept, shared_from_this()));
  }

  void on_accept(beast::error_code ec, tcp::socket socket) {
    if (ec == net::error::operation_aborted) return;
    if (!ec) std::make_shared<HttpSession>(std::move(socket), service_)->run();
    do_accept();
  }

  net::io_context& ioc_;
  tcp::acceptor acceptor_;
  Service& service_;
};

}  // namespace

struct Server::Impl {
  Impl(Service& service, const std::string& address, unsigned short port, int threads)
      : ioc(threads),
        acceptor(std::make_shared<Acceptor>(
            ioc, tcp::endpoint(net::ip::make_address(address), port), service)),
        thread_count(threads < 1 ? 1 : threads) {}

  net::io_context ioc;
  std::shared_ptr<Acceptor> acceptor;
  int thread_count;
  std::vector<std::thread> threads;
};

Server::Server(Service& service, const std::string& address, unsigned short port,
               int threads)
    : impl_(std::make_unique<Impl>(service, address, port, threads)) {}

Server::~Server() { stop(); }

void Server::start() {
  impl_->acceptor->run();
  for (int i = 0; i < impl_->thread_count; ++i)
    impl_->threads.emplace_back([this] { impl_->ioc.run(); });
}

void Server::stop() {
  if (!impl_) return;
  impl_->acceptor->close();
  impl_->ioc.stop();
  for (auto& t : impl_->threads) {
    if (t.joinable()) t.join();
  }
  impl_->threads.clear();
}

void Server::wait(bool handle_signals) {
  std::optional<net::signal_set> signals;
  if (handle_signals) {
    signals.emplace(impl_->ioc, SIGINT, SIGTERM);
    signals->async_wait([this](beast::error_code, int) {
      impl_->acceptor->close();
      impl_->ioc.stop();
    });
  }
  for (auto& t : impl_->threads) {
    if (t.joinable()) t.join();
  }
  impl_->threads.clear();
}

unsigned short Server::port() const { return impl_->acceptor->port(); }

}  // namespace moira
