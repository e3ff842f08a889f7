#include "moira/protocol.h"

#include <algorithm>
#include <memory>
#include <regex>
#include <sstream>

#include "moira/assertion.h"
#include "moira/ce_parser.h"
#include "moira/text.h"

namespace moira {
namespace {

constexpr std::string_view kDefaultTransitions = R"(
start Confirm AskTell GistExpand
Confirm -> AskTell
AskTell -> GistExpand
AskTell -> Why
GistExpand -> Why
GistExpand -> AskTell
Why -> AskTell
)";

// Where each opening kind lands.
std::vector<Position> opener_positions(MessageKind kind) {
  switch (kind) {
    case MessageKind::kNlInput:
    case MessageKind::kCeConfirmRequest:
      return {{Interaction::kConfirm, Phase::kAwaitingDecision}};
    case MessageKind::kAsk:
      return {{Interaction::kAskTell, Phase::kAnswered}};
    case MessageKind::kTell:
      return {{Interaction::kAskTell, Phase::kAnswered},
              {Interaction::kAskTell, Phase::kAwaitingAnswer}};
    case MessageKind::kGist:
      return {{Interaction::kGistExpand, Phase::kGistSent}};
    case MessageKind::kExpandRequest:
      return {{Interaction::kGistExpand, Phase::kExpanded}};
    case MessageKind::kWhy:
      return {{Interaction::kWhy, Phase::kExplained}};
    default:
      return {};
  }
}

std::vector<Position> inner_moves(Position at, MessageKind kind) {
  using I = Interaction;
  using P = Phase;
  switch (at.interaction) {
    case I::kConfirm:
      if (at.phase != P::kAwaitingDecision) return {};
      if (kind == MessageKind::kConfirmCorrect) return {{I::kConfirm, P::kAwaitingDecision}};
      if (kind == MessageKind::kConfirmAccept) return {{I::kConfirm, P::kConfirmed}};
      return {};
    case I::kAskTell:
      if (kind == MessageKind::kAsk && at.phase == P::kAnswered)
        return {{I::kAskTell, P::kAnswered}};
      if (kind == MessageKind::kTell)
        return {{I::kAskTell, P::kAnswered}, {I::kAskTell, P::kAwaitingAnswer}};
      return {};
    case I::kGistExpand:
      if (kind == MessageKind::kGist) return {{I::kGistExpand, P::kGistSent}};
      if (kind == MessageKind::kExpandRequest) return {{I::kGistExpand, P::kExpanded}};
      return {};
    case I::kWhy:
      if (kind == MessageKind::kWhy) return {{I::kWhy, P::kExplained}};
      return {};
  }
  return {};
}

std::vector<std::string> heads(std::span<const CeStatement> statements) {
  std::vector<std::string> out;
  for (const auto& s : statements) {
    if (auto h = head_of(s)) {
      if (std::find(out.begin(), out.end(), h->id) == out.end()) out.push_back(h->id);
    }
  }
  return out;
}

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '\'' || c == '-' ||
         (static_cast<unsigned char>(c) & 0x80);
}

}  // namespace

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::kNlInput: return "NlInput";
    case MessageKind::kCeConfirmRequest: return "CeConfirmRequest";
    case MessageKind::kConfirmAccept: return "ConfirmAccept";
    case MessageKind::kConfirmCorrect: return "ConfirmCorrect";
    case MessageKind::kAsk: return "Ask";
    case MessageKind::kTell: return "Tell";
    case MessageKind::kGist: return "Gist";
    case MessageKind::kExpandRequest: return "ExpandRequest";
    case MessageKind::kExpand: return "Expand";
    case MessageKind::kWhy: return "Why";
    case MessageKind::kBecause: return "Because";
    case MessageKind::kError: return "Error";
  }
  return "Error";
}

std::optional<MessageKind> parse_message_kind(std::string_view text) {
  for (MessageKind k : kAllMessageKinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Interaction interaction) {
  switch (interaction) {
    case Interaction::kConfirm: return "Confirm";
    case Interaction::kAskTell: return "AskTell";
    case Interaction::kGistExpand: return "GistExpand";
    case Interaction::kWhy: return "Why";
  }
  return "Confirm";
}

std::optional<Interaction> parse_interaction(std::string_view text) {
  for (Interaction i : {Interaction::kConfirm, Interaction::kAskTell,
                        Interaction::kGistExpand, Interaction::kWhy}) {
    if (to_string(i) == text) return i;
  }
  return std::nullopt;
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::kAwaitingRequest: return "AwaitingRequest";
    case Phase::kAwaitingDecision: return "AwaitingDecision";
    case Phase::kConfirmed: return "Confirmed";
    case Phase::kAwaitingAnswer: return "AwaitingAnswer";
    case Phase::kAnswered: return "Answered";
    case Phase::kGistSent: return "GistSent";
    case Phase::kExpanded: return "Expanded";
    case Phase::kExplained: return "Explained";
  }
  return "AwaitingRequest";
}

bool phase_belongs(Interaction interaction, Phase phase) {
  switch (interaction) {
    case Interaction::kConfirm:
      return phase == Phase::kAwaitingRequest || phase == Phase::kAwaitingDecision ||
             phase == Phase::kConfirmed;
    case Interaction::kAskTell:
      return phase == Phase::kAwaitingAnswer || phase == Phase::kAnswered;
    case Interaction::kGistExpand:
      return phase == Phase::kGistSent || phase == Phase::kExpanded;
    case Interaction::kWhy:
      return phase == Phase::kExplained;
  }
  return false;
}

bool is_settled(Phase phase) {
  return phase == Phase::kConfirmed || phase == Phase::kAnswered ||
         phase == Phase::kGistSent || phase == Phase::kExpanded ||
         phase == Phase::kExplained;
}

std::optional<Interaction> interaction_of(MessageKind kind) {
  switch (kind) {
    case MessageKind::kNlInput:
    case MessageKind::kCeConfirmRequest:
    case MessageKind::kConfirmAccept:
    case MessageKind::kConfirmCorrect:
      return Interaction::kConfirm;
    case MessageKind::kAsk:
    case MessageKind::kTell:
      return Interaction::kAskTell;
    case MessageKind::kGist:
    case MessageKind::kExpandRequest:
      return Interaction::kGistExpand;
    case MessageKind::kWhy:
      return Interaction::kWhy;
    default:
      return std::nullopt;
  }
}

bool TransitionTable::can_follow(Interaction from, Interaction to) const {
  auto it = next.find(from);
  return it != next.end() && it->second.count(to) > 0;
}

TransitionTable parse_transitions(std::string_view text) {
  TransitionTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  auto interaction = [&](const std::string& word) {
    auto i = parse_interaction(word);
    if (!i) {
      throw std::invalid_argument("transitions line " + std::to_string(n) +
                                  ": unknown interaction '" + word + "'");
    }
    return *i;
  };
  while (std::getline(in, line)) {
    ++n;
    if (auto c = line.find("--"); c != std::string::npos) line.erase(c);
    auto words = split_ws(line);
    if (words.empty()) continue;
    if (words[0] == "start") {
      for (std::size_t i = 1; i < words.size(); ++i) table.starts.insert(interaction(words[i]));
    } else if (words.size() == 3 && words[1] == "->") {
      table.next[interaction(words[0])].insert(interaction(words[2]));
    } else {
      throw std::invalid_argument("transitions line " + std::to_string(n) +
                                  ": expected 'start ...' or 'A -> B'");
    }
  }
  return table;
}

const TransitionTable& default_transitions() {
  static const TransitionTable table = parse_transitions(kDefaultTransitions);
  return table;
}

std::vector<Position> allowed_moves(const std::optional<Position>& current,
                                    MessageKind kind,
                                    const TransitionTable& table) {
  auto target = interaction_of(kind);
  if (!target) return {};
  if (!current) {
    return table.can_start(*target) ? opener_positions(kind) : std::vector<Position>{};
  }
  if (current->interaction == *target) {
    auto moves = inner_moves(*current, kind);
    if (!moves.empty()) return moves;
  }
  if (current->interaction != *target && is_settled(current->phase) &&
      table.can_follow(current->interaction, *target)) {
    return opener_positions(kind);
  }
  return {};
}

Conversation start_conversation(std::string id, std::string initiator,
                                const Message& opener,
                                const TransitionTable& table) {
  auto moves = allowed_moves(std::nullopt, opener.kind, table);
  if (moves.empty()) {
    throw ProtocolError("a conversation cannot start with " +
                        std::string(to_string(opener.kind)));
  }
  Conversation c;
  c.id = std::move(id);
  c.participants.push_back(std::move(initiator));
  for (const auto& a : opener.audience) {
    if (std::find(c.participants.begin(), c.participants.end(), a) == c.participants.end())
      c.participants.push_back(a);
  }
  c.position = {*interaction_of(opener.kind),
                moves.front().interaction == Interaction::kConfirm
                    ? Phase::kAwaitingRequest
                    : moves.front().phase};
  return c;
}

std::optional<std::string> apply_correction(std::string_view text,
                                            std::string_view correction) {
  static const std::regex form(
      R"(^\s*(?:it'?s|it is|its)\s+(?:an?\s+)?(.+?)\s*,?\s+not\s+(?:an?\s+)?(.+?)\s*[.!]?\s*$)",
      std::regex::icase);
  std::smatch m;
  std::string c(correction);
  if (!std::regex_match(c, m, form)) return std::nullopt;
  std::string right = m[1].str();
  std::string wrong = fold(m[2].str());
  std::string src(text);
  std::string folded = fold(src);
  std::string out;
  bool replaced = false;
  std::size_t i = 0;
  while (i < src.size()) {
    bool at_start = i == 0 || !word_char(src[i - 1]);
    std::size_t end = i + wrong.size();
    if (at_start && folded.compare(i, wrong.size(), wrong) == 0 &&
        (end == src.size() || !word_char(src[end]))) {
      out += right;
      i = end;
      replaced = true;
      continue;
    }
    out += src[i++];
  }
  if (!replaced) out += (out.empty() ? "" : " ") + right;
  return out;
}

std::vector<RulePattern> parse_query(std::string_view text) {
  std::vector<RulePattern> out;
  std::string line;
  int n = 0;
  auto flush = [&] {
    ++n;
    auto t = trim(line);
    if (!t.empty()) out.push_back(parse_pattern(t, n));
    line.clear();
  };
  for (char ch : text) {
    if (ch == '\n' || ch == ';') {
      flush();
    } else {
      line += ch;
    }
  }
  flush();
  if (out.empty()) throw RuleError(1, "empty query");
  return out;
}

ProtocolEngine::ProtocolEngine(KnowledgeBase& kb, GistStore& gists,
                               ProtocolConfig config, SubscriptionHub* hub)
    : kb_(kb), gists_(gists), config_(std::move(config)), hub_(hub) {}

std::string ProtocolEngine::next_message_id() {
  return "m" + std::to_string(++message_counter_);
}

std::string ProtocolEngine::next_conversation_id() {
  return "c" + std::to_string(++conversation_counter_);
}

std::pair<Conversation, std::vector<Message>> ProtocolEngine::begin(
    std::string initiator, Message opener, const GistContext& context) {
  std::string id = opener.conversation.empty() ? next_conversation_id()
                                               : opener.conversation;
  Conversation c = start_conversation(id, std::move(initiator), opener,
                                      config_.transitions);
  c.context = context;
  auto out = step(c, std::move(opener));
  if (c.transcript.empty()) {
    std::string why = out.empty() ? "opening message rejected" : out.front().body.error;
    throw ProtocolError(why);
  }
  return {std::move(c), std::move(out)};
}

std::vector<Message> ProtocolEngine::step(Conversation& c, Message m) {
  std::optional<Position> at;
  if (!c.transcript.empty()) at = c.position;
  auto moves = allowed_moves(at, m.kind, config_.transitions);
  if (moves.empty()) {
    throw ProtocolError(std::string(to_string(m.kind)) + " is not allowed in " +
                        std::string(to_string(c.position.interaction)) + "/" +
                        std::string(to_string(c.position.phase)));
  }
  if (m.id.empty()) m.id = next_message_id();
  if (m.timestamp.empty()) m.timestamp = now();
  m.conversation = c.id;
  if (m.audience.empty()) {
    for (const auto& p : c.participants) {
      if (p != m.sender) m.audience.push_back(p);
    }
    if (m.audience.empty()) m.audience.push_back(config_.agent);
  }
  Interaction target = *interaction_of(m.kind);
  bool opening = !at || at->interaction != target || inner_moves(*at, m.kind).empty();
  if (!opening && !m.in_reply_to && !c.transcript.empty()) {
    m.in_reply_to = c.transcript.back().id;
  }
  if (std::find(c.participants.begin(), c.participants.end(), m.sender) ==
      c.participants.end()) {
    c.participants.push_back(m.sender);
  }

  Conversation backup = c;
  std::vector<Message> out;
  try {
    if (opening) {
      c.history.push_back(target);
      c.position = {target, target == Interaction::kConfirm ? Phase::kAwaitingRequest
                                                             : moves.front().phase};
    }
    c.transcript.push_back(m);
    out = handle(c, c.transcript.back());
  } catch (...) {
    c = std::move(backup);
    throw;
  }
  if (out.size() == 1 && out.front().kind == MessageKind::kError) {
    c = std::move(backup);
    return out;
  }
  if (std::find(moves.begin(), moves.end(), c.position) == moves.end()) {
    c = std::move(backup);
    throw std::logic_error("protocol engine reached an unlisted position");
  }
  for (const auto& o : out) c.transcript.push_back(o);
  return out;
}

Message ProtocolEngine::reply(const Conversation& c, const Message& to,
                              MessageKind kind, MessageBody body) {
  Message r;
  r.id = next_message_id();
  r.conversation = c.id;
  r.sender = config_.agent;
  r.audience = {to.sender};
  r.kind = kind;
  r.body = std::move(body);
  r.in_reply_to = to.id;
  r.timestamp = now();
  return r;
}

std::vector<Message> ProtocolEngine::handle(Conversation& c, const Message& m) {
  switch (m.kind) {
    case MessageKind::kNlInput: return on_nl_input(c, m);
    case MessageKind::kCeConfirmRequest: return on_confirm_request(c, m);
    case MessageKind::kConfirmCorrect: return on_correct(c, m);
    case MessageKind::kConfirmAccept: return on_accept(c, m);
    case MessageKind::kAsk: return on_ask(c, m);
    case MessageKind::kTell: return on_tell(c, m);
    case MessageKind::kGist: return on_gist(c, m);
    case MessageKind::kExpandRequest: return on_expand_request(c, m);
    case MessageKind::kWhy: return on_why(c, m);
    default:
      throw ProtocolError(std::string(to_string(m.kind)) + " is outbound only");
  }
}

Message ProtocolEngine::request_for(Conversation& c, const Message& to) {
  InterpreterOptions opts;
  opts.excluded_concepts = config_.excluded_concepts;
  Interpretation ip = interpret(c.pending_text, kb_, opts);
  c.pending = ip.statements;
  c.pending_score = ip.score;
  c.position.phase = Phase::kAwaitingDecision;

  MessageBody body;
  GistContext ctx = c.context;
  ctx.purpose = "confirm";
  body.gist = gist(kb_, c.pending, config_.templates, ctx);
  body.text = body.gist->text;
  if (c.pending.empty()) body.text = "nothing in that was understood; please correct or rephrase";
  body.ce = render_statements(c.pending, RenderStyle::kMultiLine);
  body.score = ip.score;
  for (const auto& u : ip.unmatched_words) body.unmatched.push_back(u.text);
  return reply(c, to, MessageKind::kCeConfirmRequest, std::move(body));
}

std::vector<Message> ProtocolEngine::on_nl_input(Conversation& c, const Message& m) {
  c.pending_text = m.body.text;
  return {request_for(c, m)};
}

std::vector<Message> ProtocolEngine::on_confirm_request(Conversation& c,
                                                        const Message& m) {
  try {
    auto statements = parse_statements(m.body.ce, parse_options(kb_));
    validate_statements(kb_, statements);
    c.pending = std::move(statements);
  } catch (const std::exception& e) {
    MessageBody body;
    body.error = e.what();
    return {reply(c, m, MessageKind::kError, std::move(body))};
  }
  c.pending_text.clear();
  c.pending_score = m.body.score;
  c.position.phase = Phase::kAwaitingDecision;
  return {};
}

std::vector<Message> ProtocolEngine::on_correct(Conversation& c, const Message& m) {
  MessageBody err;
  if (!m.body.ce.empty()) {
    // Edited CE: the offered statements change, the score preview does not.
    try {
      auto statements = parse_statements(m.body.ce, parse_options(kb_));
      validate_statements(kb_, statements);
      c.pending = std::move(statements);
    } catch (const std::exception& e) {
      err.error = e.what();
      return {reply(c, m, MessageKind::kError, std::move(err))};
    }
    MessageBody body;
    GistContext ctx = c.context;
    ctx.purpose = "confirm";
    body.gist = gist(kb_, c.pending, config_.templates, ctx);
    body.text = body.gist->text;
    body.ce = render_statements(c.pending, RenderStyle::kMultiLine);
    body.score = c.pending_score;
    return {reply(c, m, MessageKind::kCeConfirmRequest, std::move(body))};
  }
  if (trim(m.body.text).empty()) {
    err.error = "correction carries neither text nor CE";
    return {reply(c, m, MessageKind::kError, std::move(err))};
  }
  if (auto revised = apply_correction(c.pending_text, m.body.text)) {
    if (c.pending_text.empty()) {
      err.error = "no reported text to correct";
      return {reply(c, m, MessageKind::kError, std::move(err))};
    }
    c.pending_text = *revised;
  } else {
    c.pending_text = m.body.text;
  }
  return {request_for(c, m)};
}

std::vector<Message> ProtocolEngine::on_accept(Conversation& c, const Message& m) {
  if (c.pending.empty()) throw ProtocolError("accept with no pending CE");
  try {
    assert_statements(kb_, c.pending, Told{m.sender, c.id, m.timestamp});
  } catch (const std::exception& e) {
    MessageBody body;
    body.error = e.what();
    return {reply(c, m, MessageKind::kError, std::move(body))};
  }
  c.outcome = render_statements(c.pending, RenderStyle::kMultiLine);
  c.confirmed_score = c.pending_score;
  c.pending.clear();
  c.pending_score.reset();
  c.position.phase = Phase::kConfirmed;
  return {};
}

std::vector<Message> ProtocolEngine::on_ask(Conversation& c, const Message& m) {
  std::vector<RulePattern> query;
  try {
    query = parse_query(m.body.text);
  } catch (const std::exception& e) {
    MessageBody body;
    body.error = e.what();
    return {reply(c, m, MessageKind::kError, std::move(body))};
  }
  auto answer = [query](const KnowledgeBase& kb) {
    std::vector<std::string> ids;
    const RulePattern& first = query.front();
    for (const auto& s : solve(kb, query)) {
      std::string id;
      if (first.subject.kind == RuleTerm::Kind::kVariable) {
        auto it = s.bindings.find(first.subject.text);
        if (it == s.bindings.end() || it->second.kind != Term::Kind::kInstance) continue;
        id = it->second.text;
      } else {
        id = first.subject.text;
      }
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
    return ids;
  };
  auto ids = answer(kb_);
  std::vector<CeStatement> statements;
  for (const auto& id : ids) statements.push_back(describe_instance(kb_, id));

  MessageBody body;
  body.ce = render_statements(statements, RenderStyle::kMultiLine);
  if (statements.empty()) body.text = "nothing matches";
  body.standing = m.body.standing;

  if (m.body.standing && hub_) {
    auto told = std::make_shared<std::set<std::string>>(ids.begin(), ids.end());
    std::string conv = c.id;
    std::string asker = m.sender;
    std::string ask_id = m.id;
    int sub = hub_->subscribe(
        kb_, FactPattern{}, [this, told, conv, asker, ask_id, answer](const std::vector<Fact>&) {
          if (!pusher_) return;
          std::vector<CeStatement> fresh;
          for (const auto& id : answer(kb_)) {
            if (told->insert(id).second) fresh.push_back(describe_instance(kb_, id));
          }
          if (fresh.empty()) return;
          Message t;
          t.id = next_message_id();
          t.conversation = conv;
          t.sender = config_.agent;
          t.audience = {asker};
          t.kind = MessageKind::kTell;
          t.body.ce = render_statements(fresh, RenderStyle::kMultiLine);
          t.body.standing = true;
          t.in_reply_to = ask_id;
          t.timestamp = now();
          pusher_(conv, std::move(t));
        });
    c.subscriptions.push_back(sub);
  }
  c.outcome = body.ce;
  c.position.phase = Phase::kAnswered;
  return {reply(c, m, MessageKind::kTell, std::move(body))};
}

std::vector<std::string> ProtocolEngine::missing_slots(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& [concept_name, slots] : config_.mandatory) {
    if (!kb_.instance_has_type(id, concept_name)) continue;
    for (const auto& slot : slots) {
      FactPattern fp;
      fp.subject = id;
      fp.property = slot;
      if (kb_.query(fp).empty() &&
          std::find(out.begin(), out.end(), slot) == out.end()) {
        out.push_back(slot);
      }
    }
  }
  return out;
}

std::vector<Message> ProtocolEngine::on_tell(Conversation& c, const Message& m) {
  MessageBody err;
  if (!config_.trusted_sources.empty() && !config_.trusted_sources.count(m.sender)) {
    err.error = "'" + m.sender + "' may not tell facts";
    return {reply(c, m, MessageKind::kError, std::move(err))};
  }
  std::vector<CeStatement> statements;
  try {
    statements = parse_statements(m.body.ce, parse_options(kb_));
    assert_statements(kb_, statements, Told{m.sender, c.id, m.timestamp});
  } catch (const std::exception& e) {
    err.error = e.what();
    return {reply(c, m, MessageKind::kError, std::move(err))};
  }
  c.outcome = render_statements(statements, RenderStyle::kMultiLine);

  // Re-check anything told in this conversation that still lacks slots.
  std::vector<std::string> subjects = c.awaiting_ids;
  for (const auto& h : heads(statements)) {
    if (std::find(subjects.begin(), subjects.end(), h) == subjects.end())
      subjects.push_back(h);
  }
  c.awaiting_ids.clear();
  std::vector<std::string> lines;
  MessageBody ask;
  for (const auto& id : subjects) {
    auto missing = missing_slots(id);
    if (missing.empty()) continue;
    c.awaiting_ids.push_back(id);
    int n = 0;
    for (const auto& slot : missing) {
      const PropertyDef* p = kb_.resolve_property(id, slot);
      std::string var = "?x" + std::to_string(++n);
      std::string subject = render_name(id);
      if (p && p->form == PropertyForm::kVerb) {
        lines.push_back(subject + " " + slot + " " + var);
      } else {
        lines.push_back(subject + " has " + var + " as " + slot);
      }
      if (std::find(ask.missing.begin(), ask.missing.end(), slot) == ask.missing.end())
        ask.missing.push_back(slot);
    }
    if (ask.ref.empty()) ask.ref = id;
  }
  if (c.awaiting_ids.empty()) {
    c.position.phase = Phase::kAnswered;
    return {};
  }
  ask.text = join(lines, "\n");
  c.position.phase = Phase::kAwaitingAnswer;
  return {reply(c, m, MessageKind::kAsk, std::move(ask))};
}

std::vector<Message> ProtocolEngine::on_gist(Conversation& c, const Message& m) {
  if (!gists_.find(m.body.ref)) {
    MessageBody err;
    err.error = "unknown gist '" + m.body.ref + "'";
    return {reply(c, m, MessageKind::kError, std::move(err))};
  }
  c.position.phase = Phase::kGistSent;
  return {};
}

std::vector<Message> ProtocolEngine::on_expand_request(Conversation& c,
                                                       const Message& m) {
  auto entry = gists_.find(m.body.ref);
  if (!entry) {
    MessageBody err;
    err.error = "unknown gist '" + m.body.ref + "'";
    return {reply(c, m, MessageKind::kError, std::move(err))};
  }
  MessageBody body;
  body.ce = entry->ce_text;
  body.ref = entry->id;
  c.outcome = entry->ce_text;
  c.position.phase = Phase::kExpanded;
  return {reply(c, m, MessageKind::kExpand, std::move(body))};
}

std::vector<Message> ProtocolEngine::on_why(Conversation& c, const Message& m) {
  std::string ref(trim(m.body.ref.empty() ? m.body.text : m.body.ref));
  std::string fact_id;
  if (kb_.find_fact(ref)) {
    fact_id = ref;
  } else if (const Instance* inst = kb_.find_instance(ref)) {
    FactPattern fp;
    fp.subject = inst->id;
    auto facts = kb_.query(fp);
    auto inferred = std::find_if(facts.begin(), facts.end(),
                                 [](const Fact& f) { return f.is_inferred(); });
    if (inferred != facts.end()) {
      fact_id = inferred->id;
    } else if (!facts.empty()) {
      fact_id = facts.front().id;
    }
  }
  if (fact_id.empty()) {
    MessageBody err;
    err.error = "nothing is known about '" + ref + "'";
    return {reply(c, m, MessageKind::kError, std::move(err))};
  }
  Rationale r = rationale(kb_, fact_id);
  MessageBody body;
  body.ce = r.text;
  body.ref = fact_id;
  c.outcome = r.text;
  c.position.phase = Phase::kExplained;
  return {reply(c, m, MessageKind::kBecause, std::move(body))};
}

Message ProtocolEngine::make_gist(std::span<const CeStatement> statements,
                                  const GistContext& context, std::string sender,
                                  std::vector<std::string> audience) {
  GistDescriptor d = gist(kb_, statements, config_.templates, context);
  Message m;
  m.id = next_message_id();
  m.sender = std::move(sender);
  m.audience = std::move(audience);
  m.kind = MessageKind::kGist;
  m.body.text = d.text;
  m.body.gist = d;
  m.body.ref = gists_.put(std::move(d), {statements.begin(), statements.end()});
  m.timestamp = now();
  return m;
}

Message ProtocolEngine::make_confirm_request(std::span<const CeStatement> statements,
                                             const GistContext& context,
                                             std::string sender,
                                             std::vector<std::string> audience) {
  Message m;
  m.id = next_message_id();
  m.sender = std::move(sender);
  m.audience = std::move(audience);
  m.kind = MessageKind::kCeConfirmRequest;
  m.body.gist = gist(kb_, statements, config_.templates, context);
  m.body.text = m.body.gist->text;
  m.body.ce = render_statements(statements, RenderStyle::kMultiLine);
  m.timestamp = now();
  return m;
}

void ProtocolEngine::close(Conversation& c) {
  if (hub_) {
    for (int id : c.subscriptions) hub_->unsubscribe(id);
  }
  c.subscriptions.clear();
}

Conversation replay(ProtocolEngine& engine, const std::vector<Message>& transcript,
                    const GistContext& context) {
  std::optional<Conversation> c;
  for (const auto& m : transcript) {
    if (m.sender == engine.config().agent) continue;
    Message in = m;
    if (!c) {
      auto [conv, out] = engine.begin(m.sender, std::move(in), context);
      c = std::move(conv);
    } else {
      engine.step(*c, std::move(in));
    }
  }
  if (!c) throw ProtocolError("transcript has no incoming messages");
  return *c;
}

}  // namespace moira
