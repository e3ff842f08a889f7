#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "moira/fusion.h"
#include "moira/gist.h"
#include "moira/knowledge_base.h"
#include "moira/protocol.h"
#include "moira/tasking.h"

namespace moira {

class ServiceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kMoira = "Moira";
inline constexpr std::string_view kSam = "Sam";
inline constexpr std::string_view kFusion = "Fusion";

struct ServiceConfig {
  std::vector<std::filesystem::path> models;
  std::filesystem::path rules;
  std::filesystem::path templates;
  std::filesystem::path catalogue;
  std::filesystem::path transitions;  // empty: built-in table
  std::filesystem::path kb_path;      // empty: no persistence
  std::string listen = "127.0.0.1:8080";
  std::set<std::string> roles = {"patrol", "analyst", "commander", "restricted"};
  // Roles that see machine-to-machine traffic (grey bubbles).
  std::set<std::string> observer_roles = {"analyst"};
  // Roles that receive authorisation requests; the reporter otherwise.
  std::set<std::string> authoriser_roles = {"commander"};
  // Roles that receive lookout gists.
  std::set<std::string> lookout_roles = {"patrol"};
  TaskingConfig tasking;
  int max_rule_rounds = 64;
};

// Standard layout under a data directory: models/*.ce, rules/fusion.rules,
// templates/gists.tpl, catalogue/assets.ce, protocol/transitions.txt.
ServiceConfig default_config(const std::filesystem::path& data_dir);

struct Session {
  std::string id;
  std::string user;
  std::string role;
  std::string device;
  std::string area;  // where the user reports from, may be empty
  std::vector<std::string> conversations;
  int score = 0;
  bool observe = false;
  std::vector<Message> inbox;  // everything delivered, in order
};

// What a session posts. Without `conversation` the service picks the most
// recent conversation that accepts the kind, else opens a new one.
struct Post {
  MessageKind kind = MessageKind::kNlInput;
  MessageBody body;
  std::string conversation;
  std::optional<std::string> in_reply_to;
};

class Service {
 public:
  using Listener = std::function<void(const std::string& session, const Message&)>;
  using Clock = std::function<std::string()>;

  // Loads models, catalogue, rules and templates (or restores kb_path).
  explicit Service(ServiceConfig config);
  Service(KnowledgeBase kb, std::vector<Rule> rules,
          std::vector<GistTemplate> templates, ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void set_clock(Clock clock);

  Session create_session(const std::string& user, const std::string& role,
                         const std::string& device, const std::string& area = "");
  // Messages delivered to this session while handling the post.
  std::vector<Message> post(const std::string& session_id, const Post& post);

  std::optional<Session> session(const std::string& id) const;
  std::optional<Conversation> conversation(const std::string& id) const;
  std::vector<Conversation> conversations() const;
  std::vector<Fact> query(const FactPattern& pattern) const;
  // CE model/fact upload; all-or-nothing.
  void load_model(const std::string& text, const std::string& source);
  KnowledgeBase kb_snapshot() const;
  std::vector<Asset> assets() const { return catalogue_.snapshot(); }
  // Marks an asset (un)available; a tasked asset going down is re-matched.
  std::vector<Message> set_asset_available(const std::string& asset_id, bool available);

  int add_listener(Listener listener);
  void remove_listener(int id);
  void save() const;

  const ServiceConfig& config() const { return config_; }

 private:
  void init();
  std::string now() const;
  Session* find_session(const std::string& id);
  std::vector<std::string> observers() const;
  void deliver(const Message& m, std::vector<Message>* mine, const std::string& me);
  void deliver_all(const std::vector<Message>& ms, std::vector<Message>* mine,
                   const std::string& me);
  Conversation* pick_conversation(Session& s, const Post& post);
  void after_commit(Session& s, std::size_t fact_mark, std::vector<Message>* mine);
  void publish_since(std::size_t fact_mark);
  void run_tasking(const std::string& trigger, Session* reporter,
                   std::vector<Message>* mine, const std::string& me);
  void offer(const Task& task, const std::vector<Asset>& ranked, std::size_t index,
             Session* reporter, std::vector<Message>* mine, const std::string& me);
  void commit_assignment(const Task& task, const Asset& asset, Session* reporter,
                         std::vector<Message>* mine, const std::string& me);
  Conversation& open(const std::string& initiator, Message opener,
                     const GistContext& context, std::vector<Message>* mine,
                     const std::string& me);
  void machine_tell(const std::string& from, const std::string& to,
                    std::span<const CeStatement> statements,
                    std::vector<Message>* mine, const std::string& me);
  void persist_locked() const;

  ServiceConfig config_;
  mutable std::mutex mu_;
  KnowledgeBase kb_;
  std::vector<Rule> rules_;
  GistStore gists_;
  SubscriptionHub hub_;
  AssetCatalogue catalogue_;
  std::unique_ptr<ProtocolEngine> engine_;
  Clock clock_;
  std::map<std::string, Session> sessions_;
  std::map<std::string, Conversation> conversations_;
  std::vector<std::string> conversation_order_;
  // Authorisation conversations: conversation -> (task, ranked, index).
  struct Offer {
    Task task;
    std::vector<Asset> ranked;
    std::size_t index = 0;
    std::string reporter;
  };
  std::map<std::string, Offer> offers_;
  std::map<std::string, std::string> task_reporter_;  // task -> session
  std::map<int, Listener> listeners_;
  int next_listener_ = 1;
  long session_counter_ = 0;
  // Standing-ask pushes raised while a commit is in progress.
  std::vector<std::pair<std::string, Message>> pushed_;
};

std::string utc_now();

}  // namespace moira
