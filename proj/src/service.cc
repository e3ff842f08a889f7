#include "moira/service.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "moira/assertion.h"
#include "moira/ce_parser.h"
#include "moira/persistence.h"

namespace moira {
namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ServiceError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

void add_unique(std::vector<std::string>& v, const std::string& x) {
  if (!contains(v, x)) v.push_back(x);
}

}  // namespace

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ServiceConfig default_config(const std::filesystem::path& data_dir) {
  ServiceConfig c;
  c.models = {data_dir / "models" / "core.ce", data_dir / "models" / "tasking.ce"};
  c.rules = data_dir / "rules" / "fusion.rules";
  c.templates = data_dir / "templates" / "gists.tpl";
  c.catalogue = data_dir / "catalogue" / "assets.ce";
  c.transitions = data_dir / "protocol" / "transitions.txt";
  return c;
}

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  if (!config_.kb_path.empty() && std::filesystem::exists(config_.kb_path)) {
    kb_ = restore_file(config_.kb_path);
  } else {
    for (const auto& m : config_.models) {
      try {
        load_ce(kb_, slurp(m), Told{m.filename().string(), "", ""});
      } catch (const ModelError& e) {
        throw ServiceError(m.string() + ":" + e.what());
      }
    }
    if (!config_.catalogue.empty()) {
      try {
        load_ce(kb_, slurp(config_.catalogue), Told{"catalogue", "", ""});
      } catch (const ModelError& e) {
        throw ServiceError(config_.catalogue.string() + ":" + e.what());
      }
    }
  }
  if (!config_.rules.empty()) {
    try {
      rules_ = parse_rules(slurp(config_.rules));
      validate_rules(rules_, kb_.model());
    } catch (const std::exception& e) {
      throw ServiceError(config_.rules.string() + ": " + e.what());
    }
  }
  std::vector<GistTemplate> templates;
  if (!config_.templates.empty()) {
    try {
      templates = parse_templates(slurp(config_.templates));
      validate_templates(templates, kb_.model());
    } catch (const std::exception& e) {
      throw ServiceError(config_.templates.string() + ": " + e.what());
    }
  }
  ProtocolConfig pc;
  pc.templates = std::move(templates);
  if (!config_.transitions.empty()) pc.transitions = parse_transitions(slurp(config_.transitions));
  engine_ = std::make_unique<ProtocolEngine>(kb_, gists_, std::move(pc), &hub_);
  init();
}

Service::Service(KnowledgeBase kb, std::vector<Rule> rules,
                 std::vector<GistTemplate> templates, ServiceConfig config)
    : config_(std::move(config)), kb_(std::move(kb)), rules_(std::move(rules)) {
  ProtocolConfig pc;
  pc.templates = std::move(templates);
  if (!config_.transitions.empty()) pc.transitions = parse_transitions(slurp(config_.transitions));
  engine_ = std::make_unique<ProtocolEngine>(kb_, gists_, std::move(pc), &hub_);
  init();
}

Service::~Service() = default;

void Service::init() {
  clock_ = utc_now;
  engine_->set_clock([this] { return now(); });
  engine_->set_pusher([this](const std::string& conv, Message m) {
    pushed_.push_back({conv, std::move(m)});
  });
  catalogue_.load(assets_from_kb(kb_));
}

void Service::set_clock(Clock clock) {
  std::lock_guard<std::mutex> lock(mu_);
  clock_ = std::move(clock);
}

std::string Service::now() const { return clock_ ? clock_() : utc_now(); }

Session Service::create_session(const std::string& user, const std::string& role,
                                const std::string& device, const std::string& area) {
  std::lock_guard<std::mutex> lock(mu_);
  if (!config_.roles.count(role)) throw ServiceError("unknown role '" + role + "'");
  if (user.empty()) throw ServiceError("user must not be empty");
  Session s;
  s.id = "s" + std::to_string(++session_counter_);
  s.user = user;
  s.role = role;
  s.device = device.empty() ? "phone" : device;
  s.area = area;
  s.observe = config_.observer_roles.count(role) > 0;
  sessions_[s.id] = s;
  return s;
}

Session* Service::find_session(const std::string& id) {
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : &it->second;
}

std::vector<std::string> Service::observers() const {
  std::vector<std::string> out;
  for (const auto& [id, s] : sessions_) {
    if (s.observe) add_unique(out, s.user);
  }
  return out;
}

void Service::deliver(const Message& m, std::vector<Message>* mine,
                      const std::string& me) {
  // An empty `me` collects every delivered message once.
  bool collected = false;
  for (auto& [id, s] : sessions_) {
    if (!contains(m.audience, s.user)) continue;
    s.inbox.push_back(m);
    add_unique(s.conversations, m.conversation);
    if (mine && (id == me || (me.empty() && !collected))) {
      mine->push_back(m);
      collected = true;
    }
    for (const auto& [lid, l] : listeners_) l(id, m);
  }
}

void Service::deliver_all(const std::vector<Message>& ms, std::vector<Message>* mine,
                          const std::string& me) {
  for (const auto& m : ms) deliver(m, mine, me);
}

Conversation* Service::pick_conversation(Session& s, const Post& post) {
  // Observers watch conversations but only post into ones they started or
  // were addressed in first.
  auto primary = [&](const Conversation& c) {
    if (!c.participants.empty() && c.participants.front() == s.user) return true;
    return !c.transcript.empty() && !c.transcript.front().audience.empty() &&
           c.transcript.front().audience.front() == s.user;
  };
  auto usable = [&](Conversation& c) {
    return primary(c) &&
           !allowed_moves(c.position, post.kind, engine_->config().transitions).empty();
  };
  if (!post.conversation.empty()) {
    auto it = conversations_.find(post.conversation);
    if (it == conversations_.end())
      throw ProtocolError("unknown conversation '" + post.conversation + "'");
    if (!contains(it->second.participants, s.user) &&
        !contains(s.conversations, post.conversation))
      throw ProtocolError("not a participant of '" + post.conversation + "'");
    return &it->second;
  }
  if (post.kind == MessageKind::kExpandRequest && !post.body.ref.empty()) {
    for (auto it = conversation_order_.rbegin(); it != conversation_order_.rend(); ++it) {
      Conversation& c = conversations_.at(*it);
      if (!contains(s.conversations, c.id)) continue;
      bool has = std::any_of(c.transcript.begin(), c.transcript.end(), [&](const Message& m) {
        return m.kind == MessageKind::kGist && m.body.ref == post.body.ref;
      });
      if (has && !allowed_moves(c.position, post.kind, engine_->config().transitions).empty()) {
        if (!contains(c.participants, s.user)) c.participants.push_back(s.user);
        return &c;
      }
    }
  }
  for (auto it = s.conversations.rbegin(); it != s.conversations.rend(); ++it) {
    auto c = conversations_.find(*it);
    if (c == conversations_.end()) continue;
    if (usable(c->second)) return &c->second;
  }
  return nullptr;
}

Conversation& Service::open(const std::string& initiator, Message opener,
                            const GistContext& context, std::vector<Message>* mine,
                            const std::string& me) {
  auto [conv, out] = engine_->begin(initiator, std::move(opener), context);
  std::string id = conv.id;
  conversation_order_.push_back(id);
  auto& stored = conversations_[id] = std::move(conv);
  deliver(stored.transcript.front(), mine, me);
  deliver_all(out, mine, me);
  return stored;
}

void Service::machine_tell(const std::string& from, const std::string& to,
                           std::span<const CeStatement> statements,
                           std::vector<Message>* mine, const std::string& me) {
  Message tell;
  tell.sender = from;
  tell.audience = {to};
  for (const auto& o : observers()) add_unique(tell.audience, o);
  tell.kind = MessageKind::kTell;
  tell.body.ce = render_statements(statements, RenderStyle::kMultiLine);
  Conversation& c = open(from, std::move(tell), {}, mine, me);
  c.topic = "machine";
}

void Service::publish_since(std::size_t fact_mark) {
  std::vector<std::string> ids;
  for (std::size_t i = fact_mark; i < kb_.facts().size(); ++i) ids.push_back(kb_.facts()[i].id);
  if (ids.empty()) return;
  hub_.publish(kb_, ids);
}

void Service::after_commit(Session& s, std::size_t fact_mark,
                           std::vector<Message>* mine) {
  RunResult r = run_rules(kb_, rules_, config_.max_rule_rounds);
  publish_since(fact_mark);
  auto pushed = std::move(pushed_);
  pushed_.clear();
  for (auto& [conv, m] : pushed) {
    auto it = conversations_.find(conv);
    if (it == conversations_.end()) continue;
    it->second.transcript.push_back(m);
    deliver(m, mine, s.id);
  }
  for (const auto& id : r.new_instance_ids) {
    if (!kb_.instance_has_type(id, "suspect sighting")) continue;
    std::vector<CeStatement> st{describe_instance(kb_, id)};
    machine_tell(std::string(kFusion), std::string(kSam), st, mine, s.id);
    run_tasking(id, &s, mine, s.id);
  }
}

void Service::run_tasking(const std::string& trigger, Session* reporter,
                          std::vector<Message>* mine, const std::string& me) {
  Task task = build_task(kb_, trigger);
  if (reporter) task_reporter_[task.id] = reporter->id;
  auto ranked = catalogue_.match(kb_, task);
  if (!ranked.empty()) {
    if (config_.tasking.mode_for(task.priority) == TaskingMode::kAuthorize) {
      offer(task, ranked, 0, reporter, mine, me);
      return;
    }
    for (const auto& a : ranked) {
      if (catalogue_.try_assign(a.id, task.id)) {
        commit_assignment(task, a, reporter, mine, me);
        return;
      }
    }
  }
  // Nothing can take it: record the task and say so.
  std::vector<CeStatement> st{task_statement(task), trigger_statement(kb_, task)};
  std::size_t mark = kb_.facts().size();
  try {
    assert_statements(kb_, st, Told{std::string(kSam), "", now()});
  } catch (const std::exception&) {
  }
  publish_since(mark);
  Message tell;
  tell.sender = std::string(kSam);
  if (reporter) tell.audience.push_back(reporter->user);
  for (const auto& o : observers()) add_unique(tell.audience, o);
  if (tell.audience.empty()) return;
  tell.kind = MessageKind::kTell;
  tell.body.text = "no available asset can serve task " + task.id;
  tell.body.ce = render_statements(st, RenderStyle::kMultiLine);
  Conversation& c = open(std::string(kSam), std::move(tell), {}, mine, me);
  c.topic = "machine";
}

void Service::offer(const Task& task, const std::vector<Asset>& ranked,
                    std::size_t index, Session* reporter, std::vector<Message>* mine,
                    const std::string& me) {
  std::vector<CeStatement> st{task_statement(task), trigger_statement(kb_, task),
                              assignment_statement(task, ranked[index].id)};
  std::vector<std::string> audience;
  GistContext ctx;
  for (const auto& [id, s] : sessions_) {
    if (!config_.authoriser_roles.count(s.role)) continue;
    if (audience.empty()) ctx = {s.role, s.device, "authorize"};
    add_unique(audience, s.user);
  }
  if (audience.empty() && reporter) {
    audience.push_back(reporter->user);
    ctx = {reporter->role, reporter->device, "authorize"};
  }
  ctx.purpose = "authorize";
  for (const auto& o : observers()) add_unique(audience, o);
  Message req = engine_->make_confirm_request(st, ctx, std::string(kSam), audience);
  Conversation& c = open(std::string(kSam), std::move(req), ctx, mine, me);
  c.topic = "authorize";
  offers_[c.id] = Offer{task, ranked, index, reporter ? reporter->id : std::string()};
}

void Service::commit_assignment(const Task& task, const Asset& asset, Session* reporter,
                                std::vector<Message>* mine, const std::string& me) {
  std::vector<CeStatement> st{task_statement(task), trigger_statement(kb_, task),
                              assignment_statement(task, asset.id)};
  std::size_t mark = kb_.facts().size();
  assert_statements(kb_, st, Told{std::string(kSam), "", now()});
  publish_since(mark);

  std::vector<CeStatement> listing{task_statement(task)};
  if (reporter) {
    GistContext ctx{reporter->role, reporter->device, "notify"};
    std::vector<std::string> audience{reporter->user};
    for (const auto& o : observers()) add_unique(audience, o);
    Message g = engine_->make_gist(listing, ctx, std::string(kSam), audience);
    open(std::string(kSam), std::move(g), ctx, mine, me);
  }
  std::set<std::string> done;
  for (const auto& [id, s] : sessions_) {
    if (!config_.lookout_roles.count(s.role) || done.count(s.user)) continue;
    done.insert(s.user);
    GistContext ctx{s.role, s.device, "lookout"};
    Message g = engine_->make_gist(listing, ctx, std::string(kSam), {s.user});
    open(std::string(kSam), std::move(g), ctx, mine, me);
  }
}

std::vector<Message> Service::post(const std::string& session_id, const Post& post) {
  std::lock_guard<std::mutex> lock(mu_);
  Session* s = find_session(session_id);
  if (!s) throw ServiceError("unknown session '" + session_id + "'");
  std::vector<Message> mine;
  Message m;
  m.sender = s->user;
  m.kind = post.kind;
  m.body = post.body;
  m.in_reply_to = post.in_reply_to;
  m.timestamp = now();
  std::size_t mark = kb_.facts().size();
  Conversation* c = nullptr;
  try {
    c = pick_conversation(*s, post);
    if (!c) {
      GistContext ctx{s->role, s->device, ""};
      Conversation& opened = open(s->user, std::move(m), ctx, &mine, s->id);
      add_unique(s->conversations, opened.id);
    } else if (offers_.count(c->id) && (post.kind == MessageKind::kConfirmAccept ||
                                        post.kind == MessageKind::kConfirmCorrect)) {
      Offer offer = offers_.at(c->id);
      std::size_t index = offer.index;
      bool accepted = false;
      if (post.kind == MessageKind::kConfirmAccept &&
          catalogue_.try_assign(offer.ranked[index].id, offer.task.id)) {
        auto out = engine_->step(*c, m);
        deliver_all(out, &mine, s->id);
        accepted = c->position.phase == Phase::kConfirmed;
        if (!accepted) catalogue_.release(offer.ranked[index].id);
      }
      if (accepted) {
        offers_.erase(c->id);
        Session* reporter = find_session(offer.reporter);
        commit_assignment(offer.task, offer.ranked[index], reporter, &mine, s->id);
      } else {
        // Rejected or taken meanwhile: offer the next asset that is free.
        std::size_t next = index + 1;
        while (next < offer.ranked.size() &&
               !(catalogue_.find(offer.ranked[next].id) &&
                 catalogue_.find(offer.ranked[next].id)->available))
          ++next;
        if (next >= offer.ranked.size()) {
          throw ProtocolError("no further asset is available for " + offer.task.id);
        }
        std::vector<CeStatement> st{task_statement(offer.task),
                                    trigger_statement(kb_, offer.task),
                                    assignment_statement(offer.task, offer.ranked[next].id)};
        Message correct = m;
        correct.kind = MessageKind::kConfirmCorrect;
        correct.body = {};
        correct.body.ce = render_statements(st, RenderStyle::kMultiLine);
        auto out = engine_->step(*c, correct);
        for (auto& o : out) o.audience = c->transcript.front().audience;
        deliver_all(out, &mine, s->id);
        offers_[c->id].index = next;
      }
    } else {
      std::vector<CeStatement> pending = c->pending;
      bool accepting = post.kind == MessageKind::kConfirmAccept;
      auto out = engine_->step(*c, m);
      deliver_all(out, &mine, s->id);
      bool ok = std::none_of(out.begin(), out.end(), [](const Message& o) {
        return o.kind == MessageKind::kError;
      });
      if (accepting && ok && c->position.phase == Phase::kConfirmed) {
        s->score += c->confirmed_score.value_or(0);
        if (!s->area.empty()) {
          // The reporter's area locates what they reported.
          for (const auto& st : pending) {
            const auto* n = std::get_if<NewInstance>(&st.body);
            if (!n || !kb_.has_instance(n->id) || !kb_.has_instance(s->area)) continue;
            FactPattern fp;
            fp.subject = n->id;
            fp.property = "is located in";
            const PropertyDef* located = kb_.resolve_property(n->id, "is located in");
            if (!located || !kb_.query(fp).empty()) continue;
            try {
              kb_.assert_fact(n->id, located->key(), Term::instance(s->area),
                              Told{s->user, c->id, m.timestamp});
            } catch (const ModelError&) {
            }
          }
        }
      }
    }
  } catch (const ProtocolError& e) {
    Message err;
    err.id = engine_->next_message_id();
    err.conversation = c ? c->id : std::string();
    err.sender = std::string(kMoira);
    err.audience = {s->user};
    err.kind = MessageKind::kError;
    err.body.error = e.what();
    err.timestamp = now();
    deliver(err, &mine, s->id);
  }
  if (kb_.facts().size() > mark) {
    after_commit(*s, mark, &mine);
    persist_locked();
  }
  return mine;
}

std::vector<Message> Service::set_asset_available(const std::string& asset_id,
                                                  bool available) {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<Message> all;
  if (!catalogue_.find(asset_id)) throw ServiceError("unknown asset '" + asset_id + "'");
  std::string dropped = catalogue_.set_available(asset_id, available);
  if (available || dropped.empty()) return all;
  // Re-match the orphaned task.
  FactPattern fp;
  fp.subject = dropped;
  fp.property = "is triggered by";
  auto trig = kb_.query(fp);
  if (trig.empty()) return all;
  Session* reporter = nullptr;
  if (auto it = task_reporter_.find(dropped); it != task_reporter_.end())
    reporter = find_session(it->second);
  std::size_t mark = kb_.facts().size();
  run_tasking(trig.front().object.text, reporter, &all, "");
  if (kb_.facts().size() > mark) persist_locked();
  return all;
}

std::optional<Session> Service::session(const std::string& id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

std::optional<Conversation> Service::conversation(const std::string& id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = conversations_.find(id);
  if (it == conversations_.end()) return std::nullopt;
  return it->second;
}

std::vector<Conversation> Service::conversations() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<Conversation> out;
  for (const auto& id : conversation_order_) out.push_back(conversations_.at(id));
  return out;
}

std::vector<Fact> Service::query(const FactPattern& pattern) const {
  std::lock_guard<std::mutex> lock(mu_);
  return kb_.query(pattern);
}

void Service::load_model(const std::string& text, const std::string& source) {
  std::lock_guard<std::mutex> lock(mu_);
  std::size_t mark = kb_.facts().size();
  load_ce(kb_, text, Told{source, "", now()});
  // Descriptions come from the KB; known assets keep their tasking state.
  auto current = catalogue_.snapshot();
  std::vector<Asset> fresh = assets_from_kb(kb_);
  for (auto& a : fresh) {
    auto known = std::find_if(current.begin(), current.end(),
                              [&](const Asset& c) { return c.id == a.id; });
    if (known == current.end()) continue;
    a.available = known->available;
    a.tasked_with = known->tasked_with;
  }
  catalogue_.load(std::move(fresh));
  publish_since(mark);
  persist_locked();
}

KnowledgeBase Service::kb_snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return kb_;
}

int Service::add_listener(Listener listener) {
  std::lock_guard<std::mutex> lock(mu_);
  int id = next_listener_++;
  listeners_[id] = std::move(listener);
  return id;
}

void Service::remove_listener(int id) {
  std::lock_guard<std::mutex> lock(mu_);
  listeners_.erase(id);
}

void Service::persist_locked() const {
  if (config_.kb_path.empty()) return;
  persist_file(kb_, config_.kb_path);
}

void Service::save() const {
  std::lock_guard<std::mutex> lock(mu_);
  persist_locked();
}

}  // namespace moira
