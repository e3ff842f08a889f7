#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "moira/ce_ast.h"
#include "moira/fusion.h"
#include "moira/gist.h"
#include "moira/interpreter.h"
#include "moira/knowledge_base.h"

namespace moira {

// Illegal (kind, state) pair. The conversation is left untouched.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MessageKind {
  kNlInput,
  kCeConfirmRequest,
  kConfirmAccept,
  kConfirmCorrect,
  kAsk,
  kTell,
  kGist,
  kExpandRequest,
  kExpand,
  kWhy,
  kBecause,
  kError,  // outbound only
};

inline constexpr MessageKind kAllMessageKinds[] = {
    MessageKind::kNlInput,       MessageKind::kCeConfirmRequest,
    MessageKind::kConfirmAccept, MessageKind::kConfirmCorrect,
    MessageKind::kAsk,           MessageKind::kTell,
    MessageKind::kGist,          MessageKind::kExpandRequest,
    MessageKind::kExpand,        MessageKind::kWhy,
    MessageKind::kBecause,       MessageKind::kError};

std::string_view to_string(MessageKind kind);
std::optional<MessageKind> parse_message_kind(std::string_view text);

struct MessageBody {
  std::string text;  // NL text, gist text, or Ask patterns (one per line)
  std::string ce;    // canonical CE text
  std::optional<GistDescriptor> gist;
  std::string ref;  // gist id, fact id or instance id
  std::optional<int> score;
  std::vector<std::string> missing;    // counter-Ask slots
  std::vector<std::string> unmatched;  // words the interpreter skipped
  std::string error;
  bool standing = false;  // Ask: keep telling future matches

  bool operator==(const MessageBody&) const = default;
};

struct Message {
  std::string id;
  std::string conversation;
  std::string sender;
  std::vector<std::string> audience;
  MessageKind kind = MessageKind::kNlInput;
  MessageBody body;
  std::optional<std::string> in_reply_to;
  std::string timestamp;

  bool operator==(const Message&) const = default;
};

enum class Interaction { kConfirm, kAskTell, kGistExpand, kWhy };

std::string_view to_string(Interaction interaction);
std::optional<Interaction> parse_interaction(std::string_view text);

enum class Phase {
  kAwaitingRequest,   // Confirm opened, no CE offered yet
  kAwaitingDecision,  // Confirm: CE offered, accept or correct expected
  kConfirmed,         // Confirm done
  kAwaitingAnswer,    // AskTell: counter-Ask outstanding
  kAnswered,          // AskTell settled
  kGistSent,          // GistExpand settled
  kExpanded,          // GistExpand settled, at least one Expand
  kExplained,         // Why done
};

std::string_view to_string(Phase phase);

struct Position {
  Interaction interaction = Interaction::kConfirm;
  Phase phase = Phase::kAwaitingRequest;

  bool operator==(const Position&) const = default;
  auto operator<=>(const Position&) const = default;
};

// Phases an interaction may be in.
bool phase_belongs(Interaction interaction, Phase phase);
bool is_settled(Phase phase);
// Interaction a message kind opens or belongs to; nullopt for outbound-only
// kinds (Expand, Because, Error).
std::optional<Interaction> interaction_of(MessageKind kind);

// Figure-5 flow as data.
struct TransitionTable {
  std::set<Interaction> starts;
  std::map<Interaction, std::set<Interaction>> next;

  bool can_start(Interaction i) const { return starts.count(i) > 0; }
  bool can_follow(Interaction from, Interaction to) const;
};

// Lines "start A B ..." and "A -> B"; `--` comments.
TransitionTable parse_transitions(std::string_view text);
const TransitionTable& default_transitions();

// Positions reachable by receiving `kind`: empty means protocol violation.
// `current` is nullopt for a conversation that has not started.
std::vector<Position> allowed_moves(const std::optional<Position>& current,
                                    MessageKind kind,
                                    const TransitionTable& table);

struct Conversation {
  std::string id;
  std::vector<std::string> participants;
  Position position;
  std::vector<Interaction> history;  // interactions in order entered
  std::vector<Message> transcript;
  GistContext context;  // initiator's role and device
  std::string topic;    // free tag set by the host, e.g. "authorize"

  // Confirm
  std::string pending_text;
  std::vector<CeStatement> pending;
  std::optional<int> pending_score;
  std::optional<int> confirmed_score;
  // Outcome of the latest settled interaction (CE text).
  std::string outcome;
  // AskTell counter-Ask bookkeeping
  std::vector<std::string> awaiting_ids;
  std::vector<int> subscriptions;

  bool operator==(const Conversation&) const = default;
};

struct ProtocolConfig {
  TransitionTable transitions = default_transitions();
  std::string agent = "Moira";
  // Concepts hidden from NL matching of spot reports.
  std::set<std::string> excluded_concepts = {
      "detectable thing", "intelligence capability", "task priority"};
  // Counter-Ask slots per concept after a Tell.
  std::map<std::string, std::vector<std::string>> mandatory = {
      {"vehicle", {"registration", "direction of travel"}}};
  // Empty: every source may Tell.
  std::set<std::string> trusted_sources;
  std::vector<GistTemplate> templates;
};

// Creates the conversation for an opening message; throws ProtocolError for
// Why/Because or any kind that cannot start one.
Conversation start_conversation(std::string id, std::string initiator,
                                const Message& opener,
                                const TransitionTable& table);

// Outgoing messages for one incoming message. Content problems (bad CE,
// unknown reference) come back as an Error message with the conversation
// unchanged; illegal moves throw ProtocolError, also leaving it unchanged.
class ProtocolEngine {
 public:
  using Clock = std::function<std::string()>;
  // Receives Tells for standing Asks: (conversation id, message).
  using Pusher = std::function<void(const std::string&, Message)>;

  ProtocolEngine(KnowledgeBase& kb, GistStore& gists, ProtocolConfig config,
                 SubscriptionHub* hub = nullptr);

  void set_clock(Clock clock) { clock_ = std::move(clock); }
  void set_pusher(Pusher pusher) { pusher_ = std::move(pusher); }

  const ProtocolConfig& config() const { return config_; }
  KnowledgeBase& kb() { return kb_; }
  GistStore& gists() { return gists_; }

  // start_conversation + step on the opener.
  std::pair<Conversation, std::vector<Message>> begin(
      std::string initiator, Message opener,
      const GistContext& context = {});
  std::vector<Message> step(Conversation& conversation, Message message);

  // Stores a gist of `statements` and returns the Gist message (not yet
  // part of any conversation).
  Message make_gist(std::span<const CeStatement> statements,
                    const GistContext& context, std::string sender,
                    std::vector<std::string> audience);
  // CeConfirmRequest carrying `statements` (used to open agent-initiated
  // confirmations such as tasking authorisation).
  Message make_confirm_request(std::span<const CeStatement> statements,
                               const GistContext& context, std::string sender,
                               std::vector<std::string> audience);

  std::string next_message_id();
  std::string next_conversation_id();
  std::string now() const { return clock_ ? clock_() : std::string(); }
  // Drops standing Ask subscriptions of a conversation.
  void close(Conversation& conversation);

 private:
  std::vector<Message> handle(Conversation& c, const Message& m);
  std::vector<Message> on_nl_input(Conversation& c, const Message& m);
  std::vector<Message> on_confirm_request(Conversation& c, const Message& m);
  std::vector<Message> on_correct(Conversation& c, const Message& m);
  std::vector<Message> on_accept(Conversation& c, const Message& m);
  std::vector<Message> on_ask(Conversation& c, const Message& m);
  std::vector<Message> on_tell(Conversation& c, const Message& m);
  std::vector<Message> on_gist(Conversation& c, const Message& m);
  std::vector<Message> on_expand_request(Conversation& c, const Message& m);
  std::vector<Message> on_why(Conversation& c, const Message& m);

  Message reply(const Conversation& c, const Message& to, MessageKind kind,
                MessageBody body);
  Message request_for(Conversation& c, const Message& to);
  std::vector<std::string> missing_slots(const std::string& id) const;

  KnowledgeBase& kb_;
  GistStore& gists_;
  ProtocolConfig config_;
  SubscriptionHub* hub_;
  Clock clock_;
  Pusher pusher_;
  long message_counter_ = 0;
  long conversation_counter_ = 0;
};

// "it's a truck not a saloon" applied to `text`; nullopt when `correction`
// is not of that form.
std::optional<std::string> apply_correction(std::string_view text,
                                            std::string_view correction);

// Ask patterns, one per line (";" also separates).
std::vector<RulePattern> parse_query(std::string_view text);

// Feeds the messages of `transcript` not sent by the engine's agent through
// a fresh conversation on `engine`. Returns the rebuilt conversation.
Conversation replay(ProtocolEngine& engine,
                    const std::vector<Message>& transcript,
                    const GistContext& context = {});

}  // namespace moira
