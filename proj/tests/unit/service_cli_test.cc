#include <doctest.h>

#include <chrono>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast.hpp>
#include <httplib.h>

#include "fixtures.h"
#include "moira/cli.h"
#include "moira/message_json.h"
#include "moira/server.h"
#include "moira/service.h"

using namespace moira;
using namespace moira::testing;

namespace {

bool saw(const std::vector<Message>& inbox, MessageKind kind, std::string_view text = "") {
  for (const auto& m : inbox)
    if (m.kind == kind && m.body.text.find(text) != std::string::npos) return true;
  return false;
}

CliOptions cli_options() {
  CliOptions o;
  o.data_dir = data_dir();
  return o;
}

}  // namespace

TEST_CASE("service: report, accept, fusion, tasking and audiences") {
  auto svc = scenario_service();
  Session patrol = svc->create_session("Border Patrol", "patrol", "phone", "North Road");
  Session analyst = svc->create_session("Analyst", "analyst", "phone");
  auto first = svc->post(patrol.id, Post{MessageKind::kNlInput, MessageBody{.text = kSpotReport}, "", {}});
  REQUIRE(saw(first, MessageKind::kCeConfirmRequest));
  CHECK(svc->query(FactPattern{.subject = "v48"}).empty());
  svc->post(patrol.id, Post{MessageKind::kConfirmAccept, {}, "", {}});

  CHECK_FALSE(svc->query(FactPattern{.subject = "v48"}).empty());
  CHECK_FALSE(svc->query(FactPattern{.subject = "SS_v48"}).empty());
  auto assigned = svc->query(FactPattern{.subject = "TS_SS_v48", .property = "is assigned to"});
  REQUIRE(assigned.size() == 1);
  CHECK(assigned[0].object.text == "uav1");

  Session p = *svc->session(patrol.id);
  Session a = *svc->session(analyst.id);
  CHECK(p.score == 6);
  CHECK(a.score == 0);
  CHECK(saw(p.inbox, MessageKind::kGist, "Be on the lookout for"));
  CHECK_FALSE(saw(p.inbox, MessageKind::kGist, "John Smith"));
  CHECK(saw(a.inbox, MessageKind::kGist, "has been tasked to localize"));
  CHECK_FALSE(saw(a.inbox, MessageKind::kGist, "Be on the lookout for"));
  // Machine-to-machine Tells reach the observer only.
  bool analyst_sees_fusion = false, patrol_sees_fusion = false;
  for (const auto& m : a.inbox) analyst_sees_fusion |= m.sender == kFusion;
  for (const auto& m : p.inbox) patrol_sees_fusion |= m.sender == kFusion;
  CHECK(analyst_sees_fusion);
  CHECK_FALSE(patrol_sees_fusion);
}

TEST_CASE("service: session score is the sum of accepted scores") {
  auto svc = scenario_service();
  Session s = svc->create_session("Border Patrol", "patrol", "phone");
  svc->post(s.id, Post{MessageKind::kNlInput, MessageBody{.text = "red car heading north"}, "", {}});
  svc->post(s.id, Post{MessageKind::kConfirmAccept, {}, "", {}});
  int after_one = svc->session(s.id)->score;
  CHECK(after_one == 4);
  svc->post(s.id, Post{MessageKind::kNlInput, MessageBody{.text = "blue car"}, "", {}});
  svc->post(s.id, Post{MessageKind::kConfirmAccept, {}, "", {}});
  CHECK(svc->session(s.id)->score == after_one + 2);
  // Pending, never accepted: earns nothing.
  svc->post(s.id, Post{MessageKind::kNlInput, MessageBody{.text = "green car"}, "", {}});
  CHECK(svc->session(s.id)->score == after_one + 2);
  // Nothing understood: nothing to accept.
  auto none = svc->post(s.id, Post{MessageKind::kNlInput, MessageBody{.text = "zzqx wvvt"}, "", {}});
  CHECK(saw(none, MessageKind::kCeConfirmRequest, "nothing in that was understood"));
  auto refused = svc->post(s.id, Post{MessageKind::kConfirmAccept, {}, "", {}});
  CHECK(saw(refused, MessageKind::kError));
  CHECK(svc->session(s.id)->score == after_one + 2);
}

TEST_CASE("service: model upload is all-or-nothing") {
  auto svc = scenario_service();
  auto before = svc->kb_snapshot();
  CHECK_THROWS(svc->load_model("conceptualise a ~ drone ~ D that is an asset.\n"
                               "the vehicle v48 has the direction south as colour.",
                               "upload"));
  CHECK(svc->kb_snapshot().equivalent(before));
  svc->load_model("conceptualise a ~ drone ~ D that is an asset.", "upload");
  CHECK(svc->kb_snapshot().model().has_concept("drone"));
}

TEST_CASE("service: unknown sessions and roles are errors") {
  auto svc = scenario_service();
  CHECK_THROWS_AS(svc->create_session("x", "pirate", "phone"), ServiceError);
  CHECK_THROWS_AS(svc->post("nope", Post{}), ServiceError);
  CHECK_THROWS_AS(svc->set_asset_available("nope", false), ServiceError);
}

TEST_CASE("service: an assigned asset going down is re-matched") {
  auto svc = scenario_service();
  Session s = svc->create_session("Border Patrol", "patrol", "phone", "North Road");
  svc->create_session("Commander", "analyst", "phone");
  svc->load_model("the asset cam1 covers the spatial area 'North Road'.", "catalogue update");
  svc->post(s.id, Post{MessageKind::kNlInput, MessageBody{.text = kSpotReport}, "", {}});
  svc->post(s.id, Post{MessageKind::kConfirmAccept, {}, "", {}});
  auto first = svc->query(FactPattern{.subject = "TS_SS_v48", .property = "is assigned to"});
  REQUIRE(first.size() == 1);
  CHECK(first[0].object.text == "uav1");
  svc->set_asset_available("uav1", false);
  auto assigned = svc->query(FactPattern{.subject = "TS_SS_v48", .property = "is assigned to"});
  bool other = false;
  for (const auto& f : assigned) other |= f.object.text != "uav1";
  CHECK(other);
}

TEST_CASE("cli: interpret text and json") {
  CliOptions o = cli_options();
  std::istringstream in("red car heading north\n");
  std::ostringstream out, err;
  CHECK(cmd_interpret(o, in, out, err) == 0);
  CHECK(out.str().find("the colour red as colour") != std::string::npos);
  o.format = "json";
  std::istringstream in2("red car heading north\n");
  std::ostringstream out2;
  CHECK(cmd_interpret(o, in2, out2, err) == 0);
  auto j = nlohmann::json::parse(out2.str());
  CHECK(j["rows"][0]["score"] == 4);
}

TEST_CASE("cli: bad files exit 1") {
  CliOptions o = cli_options();
  o.models = {data_dir() / "does-not-exist.ce"};
  std::istringstream in("red car\n");
  std::ostringstream out, err;
  CHECK(cmd_interpret(o, in, out, err) == 1);
  CHECK_FALSE(err.str().empty());
  CliOptions bad = cli_options();
  bad.input = data_dir() / "no-such-input.txt";
  std::ostringstream out2, err2;
  CHECK(cmd_interpret(bad, in, out2, err2) == 1);
}

TEST_CASE("cli: rules prints inferred facts with because") {
  CliOptions o = cli_options();
  std::istringstream in(std::string(kIntel) +
                        "\nthere is a vehicle named v48 that has DEF456 as registration.\n");
  std::ostringstream out, err;
  CHECK(cmd_rules(o, in, out, err) == 0);
  CHECK(out.str().find("SS_v48") != std::string::npos);
  CHECK(out.str().find("because") != std::string::npos);
}

TEST_CASE("cli: repl confirm flow") {
  CliOptions o = cli_options();
  o.user = "Border Patrol";
  o.area = "North Road";
  std::istringstream in(std::string("tell ") + kIntel + "\n" + kSpotReport +
                        "\naccept\nscore\nquit\n");
  std::ostringstream out, err;
  CHECK(cmd_repl(o, in, out, err) == 0);
  CHECK(out.str().find("CeConfirmRequest") != std::string::npos);
  CHECK(out.str().find("score: 6") != std::string::npos);
  CHECK(out.str().find("Be on the lookout for") != std::string::npos);
}

TEST_CASE("cli: serve rejects a malformed listen address") {
  CliOptions o = cli_options();
  o.listen = "localhost";
  std::ostringstream out, err;
  CHECK(cmd_serve(o, out, err) == 2);
}

TEST_CASE("http routes") {
  auto svc = scenario_service();
  auto created = handle_http(*svc, "POST", "/sessions",
                             R"({"user":"Border Patrol","role":"patrol","area":"North Road"})");
  REQUIRE(created.status == 201);
  std::string id = nlohmann::json::parse(created.body)["id"];
  CHECK(handle_http(*svc, "GET", "/sessions/" + id, "").status == 200);
  CHECK(handle_http(*svc, "GET", "/sessions/zzz", "").status == 404);
  CHECK(handle_http(*svc, "DELETE", "/sessions", "").status == 405);
  CHECK(handle_http(*svc, "POST", "/sessions/" + id + "/messages", "{not json").status == 400);
  CHECK(handle_http(*svc, "POST", "/sessions/" + id + "/messages", R"({"kind":"Shout"})").status ==
        400);
  CHECK(handle_http(*svc, "GET", "/nowhere", "").status == 404);

  nlohmann::json report = {{"kind", "NlInput"}, {"text", kSpotReport}};
  auto r = handle_http(*svc, "POST", "/sessions/" + id + "/messages", report.dump());
  REQUIRE(r.status == 200);
  auto ms = nlohmann::json::parse(r.body);
  REQUIRE(ms.is_array());
  CHECK(ms.back()["kind"] == "CeConfirmRequest");
  std::string conv = ms.back()["conversation"];
  handle_http(*svc, "POST", "/sessions/" + id + "/messages", R"({"kind":"ConfirmAccept"})");
  auto facts = handle_http(*svc, "GET", "/kb/facts?pattern=v48,*,*", "");
  CHECK(nlohmann::json::parse(facts.body).size() >= 4);
  CHECK(handle_http(*svc, "GET", "/kb/facts?pattern=v48,*", "").status == 400);
  CHECK(handle_http(*svc, "GET", "/conversations/" + conv, "").status == 200);
  CHECK(handle_http(*svc, "POST", "/kb/model", "conceptualise a ~ drone ~ D that is an asset.").status ==
        200);
  CHECK(handle_http(*svc, "POST", "/kb/model", "this is not CE").status == 400);
}

TEST_CASE("live server: HTTP and WebSocket") {
  namespace beast = boost::beast;
  namespace websocket = beast::websocket;
  namespace net = boost::asio;
  auto svc = scenario_service();
  Server server(*svc, "127.0.0.1", 0, 2);
  server.start();
  unsigned short port = server.port();
  REQUIRE(port != 0);

  httplib::Client client("127.0.0.1", port);
  auto created = client.Post("/sessions", R"({"user":"Border Patrol","role":"patrol"})",
                             "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  std::string id = nlohmann::json::parse(created->body)["id"];

  net::io_context ioc;
  net::ip::tcp::resolver resolver(ioc);
  websocket::stream<net::ip::tcp::socket> ws(ioc);
  net::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
  ws.handshake("127.0.0.1", "/sessions/" + id + "/stream");
  nlohmann::json post = {{"kind", "NlInput"}, {"text", "red car heading north"}};
  ws.write(net::buffer(post.dump()));
  bool confirm = false;
  for (int i = 0; i < 5 && !confirm; ++i) {
    beast::flat_buffer buf;
    ws.read(buf);
    auto j = nlohmann::json::parse(beast::buffers_to_string(buf.data()));
    confirm = j.value("kind", "") == "CeConfirmRequest";
  }
  CHECK(confirm);
  ws.close(websocket::close_code::normal);

  auto got = client.Get("/sessions/" + id);
  REQUIRE(got);
  CHECK(got->status == 200);
  server.stop();
}
