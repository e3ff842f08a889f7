#include "moira/message_json.h"

#include <stdexcept>

namespace moira {

using nlohmann::json;

json to_json(const GistDescriptor& g) {
  json segs = json::array();
  for (const auto& s : g.segments) segs.push_back({{"icon", s.icon}, {"caption", s.caption}});
  return {{"text", g.text},
          {"segments", segs},
          {"source_ids", g.source_ids},
          {"template", g.template_name}};
}

GistDescriptor gist_from_json(const json& j) {
  GistDescriptor g;
  g.text = j.value("text", "");
  if (j.contains("segments")) {
    for (const auto& s : j.at("segments"))
      g.segments.push_back({s.value("icon", ""), s.value("caption", "")});
  }
  g.source_ids = j.value("source_ids", std::vector<std::string>{});
  g.template_name = j.value("template", "");
  return g;
}

json to_json(const MessageBody& b) {
  json j = json::object();
  if (!b.text.empty()) j["text"] = b.text;
  if (!b.ce.empty()) j["ce"] = b.ce;
  if (b.gist) j["gist"] = to_json(*b.gist);
  if (!b.ref.empty()) j["ref"] = b.ref;
  if (b.score) j["score"] = *b.score;
  if (!b.missing.empty()) j["missing"] = b.missing;
  if (!b.unmatched.empty()) j["unmatched"] = b.unmatched;
  if (!b.error.empty()) j["error"] = b.error;
  if (b.standing) j["standing"] = true;
  return j;
}

MessageBody body_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("body must be an object");
  MessageBody b;
  b.text = j.value("text", "");
  b.ce = j.value("ce", "");
  if (j.contains("gist") && !j.at("gist").is_null()) b.gist = gist_from_json(j.at("gist"));
  b.ref = j.value("ref", "");
  if (j.contains("score") && !j.at("score").is_null()) b.score = j.at("score").get<int>();
  b.missing = j.value("missing", std::vector<std::string>{});
  b.unmatched = j.value("unmatched", std::vector<std::string>{});
  b.error = j.value("error", "");
  b.standing = j.value("standing", false);
  return b;
}

json to_json(const Message& m) {
  json j = {{"id", m.id},
            {"conversation", m.conversation},
            {"sender", m.sender},
            {"audience", m.audience},
            {"kind", std::string(to_string(m.kind))},
            {"body", to_json(m.body)},
            {"timestamp", m.timestamp}};
  j["in_reply_to"] = m.in_reply_to ? json(*m.in_reply_to) : json(nullptr);
  return j;
}

Message message_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("message must be an object");
  try {
    Message m;
    m.id = j.value("id", "");
    m.conversation = j.value("conversation", "");
    m.sender = j.value("sender", "");
    m.audience = j.value("audience", std::vector<std::string>{});
    auto kind = parse_message_kind(j.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown kind '" + j.at("kind").get<std::string>() + "'");
    m.kind = *kind;
    if (j.contains("body")) m.body = body_from_json(j.at("body"));
    if (j.contains("in_reply_to") && !j.at("in_reply_to").is_null())
      m.in_reply_to = j.at("in_reply_to").get<std::string>();
    m.timestamp = j.value("timestamp", "");
    return m;
  } catch (const json::exception& e) {
    throw std::invalid_argument(e.what());
  }
}

json to_json(const Conversation& c) {
  json transcript = json::array();
  for (const auto& m : c.transcript) transcript.push_back(to_json(m));
  json history = json::array();
  for (auto i : c.history) history.push_back(std::string(to_string(i)));
  json j = {{"id", c.id},
            {"participants", c.participants},
            {"interaction", std::string(to_string(c.position.interaction))},
            {"phase", std::string(to_string(c.position.phase))},
            {"history", history},
            {"transcript", transcript},
            {"outcome", c.outcome}};
  if (!c.pending.empty()) j["pending"] = true;
  if (!c.topic.empty()) j["topic"] = c.topic;
  return j;
}

}  // namespace moira
