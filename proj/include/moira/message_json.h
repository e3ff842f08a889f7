#pragma once

#include <json.hpp>

#include "moira/gist.h"
#include "moira/protocol.h"

namespace moira {

// Wire form: {id, conversation, sender, audience, kind, body, in_reply_to,
// timestamp}. Empty body fields are omitted.
nlohmann::json to_json(const GistDescriptor& gist);
GistDescriptor gist_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MessageBody& body);
MessageBody body_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Message& message);
// Throws std::invalid_argument on a malformed envelope.
Message message_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Conversation& conversation);

}  // namespace moira
