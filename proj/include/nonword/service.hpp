#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nonword/corpus.hpp"
#include "nonword/lm.hpp"
#include "nonword/pipeline.hpp"
#include "nonword/ranker.hpp"
#include "nonword/study.hpp"

namespace httplib {
class Server;
}

namespace nonword {

// Key/value service configuration:
//
//   bind = 127.0.0.1:8080
//   generator = sv
//   models.sv.path = models/sv.posgram
//   lexicon.path = data/lexicon/sv_words.txt
//   lexicon.exclusions = data/lexicon/sv_exclusions.txt
//   store.path = sessions.jsonl
//   generate.pool_size = 10000
//   generate.workers = 1
//
// Relative paths resolve against the config file's directory.
struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string generator = "sv";
  std::map<std::string, std::filesystem::path> model_paths;
  std::filesystem::path lexicon_path;
  std::filesystem::path exclusions_path;
  std::filesystem::path store_path;
  std::size_t pool_size = 10000;
  unsigned workers = 1;

  static ServiceConfig parse(std::istream& in, const std::filesystem::path& base_dir = {});
  static ServiceConfig load(const std::filesystem::path& path);
};

// Persistence for study lists and their trial logs. Trials are append-only.
class SessionStore {
 public:
  virtual ~SessionStore() = default;

  // Stores the list and returns its new id.
  virtual std::string create_study(const StudyList& list) = 0;
  // The stored JSON text, exactly as first serialized.
  virtual std::optional<std::string> study_json(const std::string& id) const = 0;
  virtual std::size_t append_trials(const std::string& id, std::span<const TrialRecord> records) = 0;
  virtual std::vector<TrialRecord> trials(const std::string& id) const = 0;

  std::optional<StudyList> study(const std::string& id) const;
};

// Single-file store: an append-only JSON-lines journal replayed on open.
// An empty path keeps everything in memory.
class JournalSessionStore : public SessionStore {
 public:
  explicit JournalSessionStore(std::filesystem::path path = {});

  std::string create_study(const StudyList& list) override;
  std::optional<std::string> study_json(const std::string& id) const override;
  std::size_t append_trials(const std::string& id, std::span<const TrialRecord> records) override;
  std::vector<TrialRecord> trials(const std::string& id) const override;

 private:
  struct Session {
    std::string study_json;
    std::vector<TrialRecord> trials;
  };

  void append_line(const nlohmann::json& event);

  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Session> sessions_;
  std::size_t next_id_ = 1;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;

  std::string text() const { return body.dump(); }
};

struct LoadedModel {
  std::string id;
  std::filesystem::path path;
  std::shared_ptr<const PositionalNgramModel> model;
};

inline constexpr std::size_t kMaxGenerateCount = 1000;

// The REST API. Handlers take raw request bodies and return status + JSON
// so they can be exercised without a socket; mount() wires them into an
// HTTP server under /api/v1.
class Service {
 public:
  Service(const ServiceConfig& config, SessionStore& store);
  Service(std::vector<LoadedModel> models, std::string generator, Lexicon lexicon, SessionStore& store,
          std::size_t pool_size = 10000, unsigned workers = 1);

  ApiResponse generate(const std::string& body);
  ApiResponse create_study(const std::string& body);
  ApiResponse get_study(const std::string& id) const;
  ApiResponse post_trials(const std::string& body);
  ApiResponse analysis(const std::string& session) const;
  ApiResponse models() const;

  void mount(httplib::Server& server);

 private:
  const LoadedModel* find_model(const std::string& id) const;
  GenerateResult exhaustive_cached(std::size_t length);
  std::vector<Candidate> sampled_pool(std::size_t length, std::size_t size, std::uint64_t seed,
                                      FilterReport& report) const;

  std::vector<LoadedModel> models_;
  std::string generator_;
  Lexicon lexicon_;
  SessionStore& store_;
  std::size_t pool_size_;
  unsigned workers_;

  std::mutex cache_mutex_;
  std::map<std::size_t, GenerateResult> exhaustive_cache_;
};

}  // namespace nonword
