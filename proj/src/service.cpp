#include "nonword/service.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "httplib.h"
#include "nonword/errors.hpp"
#include "nonword/generator.hpp"

namespace nonword {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  std::filesystem::path p(value);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

ApiResponse error(int status, const std::string& message, const std::string& field = {}) {
  json body{{"error", message}};
  if (!field.empty()) body["field"] = field;
  return {status, std::move(body)};
}

std::optional<json> parse_body(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

std::uint64_t draw_seed() {
  std::random_device rd;
  const std::uint64_t hi = rd();
  const std::uint64_t lo = rd();
  return ((hi << 32) | lo) & ((1ull << 53) - 1);  // exact in a JSON double
}

json report_json(const FilterReport& r) {
  return {{"input_count", r.input_count},
          {"removed_lexicon", r.removed_lexicon},
          {"removed_exclusion", r.removed_exclusion},
          {"removed_low_probability", r.removed_low_probability},
          {"unscorable", r.unscorable},
          {"output_count", r.output_count}};
}

// Reads an optional bounded integer field; returns an error response on a
// bad value.
std::optional<ApiResponse> read_int(const json& j, const char* field, long long lo, long long hi,
                                    std::optional<long long>& out) {
  if (!j.contains(field) || j.at(field).is_null()) return std::nullopt;
  const auto& v = j.at(field);
  if (!v.is_number_integer()) return error(400, std::string(field) + " must be an integer", field);
  const long long n = v.is_number_unsigned() && v.get<unsigned long long>() > static_cast<unsigned long long>(hi)
                          ? hi + 1
                          : v.get<long long>();
  if (n < lo || n > hi) {
    return error(400, std::string(field) + " must be between " + std::to_string(lo) + " and " + std::to_string(hi),
                 field);
  }
  out = n;
  return std::nullopt;
}

std::optional<ApiResponse> read_seed(const json& j, std::uint64_t& seed) {
  if (!j.contains("seed") || j.at("seed").is_null()) {
    seed = draw_seed();
    return std::nullopt;
  }
  const auto& v = j.at("seed");
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
    return error(400, "seed must be a non-negative integer", "seed");
  }
  seed = v.get<std::uint64_t>();
  return std::nullopt;
}

std::vector<std::string> string_array(const json& j, const std::string& field) {
  if (!j.is_array()) throw InputFormatError(field + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw InputFormatError(field + " must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

ServiceConfig ServiceConfig::parse(std::istream& in, const std::filesystem::path& base_dir) {
  ServiceConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    const auto eq = content.find('=');
    const std::string where = "config line " + std::to_string(line_no);
    if (eq == std::string_view::npos) throw InputFormatError(where + ": expected key = value");
    const std::string key(trim(content.substr(0, eq)));
    std::string value(trim(content.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    try {
      if (key == "bind") {
        const auto colon = value.rfind(':');
        if (colon == std::string::npos) throw InputFormatError(where + ": bind must be host:port");
        config.host = value.substr(0, colon);
        config.port = std::stoi(value.substr(colon + 1));
      } else if (key == "generator") {
        config.generator = value;
      } else if (key == "lexicon.path") {
        config.lexicon_path = resolve(base_dir, value);
      } else if (key == "lexicon.exclusions") {
        config.exclusions_path = resolve(base_dir, value);
      } else if (key == "store.path") {
        config.store_path = resolve(base_dir, value);
      } else if (key == "generate.pool_size") {
        config.pool_size = std::stoul(value);
      } else if (key == "generate.workers") {
        config.workers = static_cast<unsigned>(std::stoul(value));
      } else if (key.rfind("models.", 0) == 0 && key.size() > 12 && key.substr(key.size() - 5) == ".path") {
        config.model_paths[key.substr(7, key.size() - 12)] = resolve(base_dir, value);
      } else {
        throw InputFormatError(where + ": unknown key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw InputFormatError(where + ": bad value for '" + key + "'");
    }
  }
  return config;
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputFormatError("cannot open config " + path.string());
  return parse(in, path.parent_path());
}

std::optional<StudyList> SessionStore::study(const std::string& id) const {
  auto text = study_json(id);
  if (!text) return std::nullopt;
  return study_list_from_json(json::parse(*text));
}

JournalSessionStore::JournalSessionStore(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.empty() || !std::filesystem::exists(path_)) return;
  std::ifstream in(path_);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json event = json::parse(line, nullptr, false);
    if (event.is_discarded()) {
      throw InputFormatError("session journal " + path_.string() + " line " + std::to_string(line_no) +
                             " is not JSON");
    }
    const auto type = event.value("type", "");
    const auto id = event.value("id", "");
    if (type == "study") {
      sessions_[id].study_json = event.at("study").get<std::string>();
      next_id_ = std::max(next_id_, std::stoul(id.substr(1)) + 1);
    } else if (type == "trials") {
      auto& trials = sessions_.at(id).trials;
      for (const auto& t : event.at("trials")) trials.push_back(trial_from_json(t));
    }
  }
}

void JournalSessionStore::append_line(const json& event) {
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::app);
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw Error("cannot write session journal " + path_.string());
}

std::string JournalSessionStore::create_study(const StudyList& list) {
  std::unique_lock lock(mutex_);
  char id[16];
  std::snprintf(id, sizeof id, "s%06zu", next_id_++);
  const std::string text = to_json(list).dump();
  append_line({{"type", "study"}, {"id", id}, {"study", text}});
  sessions_[id].study_json = text;
  return id;
}

std::optional<std::string> JournalSessionStore::study_json(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second.study_json;
}

std::size_t JournalSessionStore::append_trials(const std::string& id, std::span<const TrialRecord> records) {
  std::unique_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error("unknown session '" + id + "'");
  json batch = json::array();
  for (const auto& r : records) batch.push_back(to_json(r));
  append_line({{"type", "trials"}, {"id", id}, {"trials", batch}});
  it->second.trials.insert(it->second.trials.end(), records.begin(), records.end());
  return it->second.trials.size();
}

std::vector<TrialRecord> JournalSessionStore::trials(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return {};
  return it->second.trials;
}

Service::Service(std::vector<LoadedModel> models, std::string generator, Lexicon lexicon, SessionStore& store,
                 std::size_t pool_size, unsigned workers)
    : models_(std::move(models)),
      generator_(std::move(generator)),
      lexicon_(std::move(lexicon)),
      store_(store),
      pool_size_(pool_size),
      workers_(workers) {
  std::sort(models_.begin(), models_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
}

namespace {

std::vector<LoadedModel> load_models(const ServiceConfig& config) {
  std::vector<LoadedModel> out;
  for (const auto& [id, path] : config.model_paths) {
    std::ifstream in(path);
    if (!in) throw InputFormatError("cannot open model '" + id + "' at " + path.string());
    out.push_back({id, path, std::make_shared<const PositionalNgramModel>(PositionalNgramModel::deserialize(in))});
  }
  return out;
}

Lexicon load_configured_lexicon(const ServiceConfig& config) {
  if (config.lexicon_path.empty()) return {};
  std::ifstream words(config.lexicon_path);
  if (!words) throw InputFormatError("cannot open lexicon " + config.lexicon_path.string());
  if (config.exclusions_path.empty()) return load_lexicon(words);
  std::ifstream exclusions(config.exclusions_path);
  if (!exclusions) throw InputFormatError("cannot open exclusions " + config.exclusions_path.string());
  return load_lexicon(words, exclusions);
}

}  // namespace

Service::Service(const ServiceConfig& config, SessionStore& store)
    : Service(load_models(config), config.generator, load_configured_lexicon(config), store, config.pool_size,
              config.workers) {}

const LoadedModel* Service::find_model(const std::string& id) const {
  for (const auto& m : models_) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

GenerateResult Service::exhaustive_cached(std::size_t length) {
  std::lock_guard lock(cache_mutex_);
  auto it = exhaustive_cache_.find(length);
  if (it == exhaustive_cache_.end()) {
    const auto* base = find_model(generator_);
    it = exhaustive_cache_
             .emplace(length, exhaustive_pool({base->id, base->model.get()}, lexicon_, length,
                                              std::max(pool_size_, kMaxGenerateCount)))
             .first;
  }
  return it->second;
}

std::vector<Candidate> Service::sampled_pool(std::size_t length, std::size_t size, std::uint64_t seed,
                                             FilterReport& report) const {
  const auto* base = find_model(generator_);
  auto filtered = filter_lexicon(sample_batch_sharded(*base->model, length, size, seed, workers_), lexicon_);
  report = filtered.report;
  return std::move(filtered.candidates);
}

ApiResponse Service::generate(const std::string& body) {
  const auto j = parse_body(body);
  if (!j) return error(400, "request body must be a JSON object");
  std::optional<long long> length, count;
  if (auto e = read_int(*j, "length", static_cast<long long>(kMinLength), static_cast<long long>(kMaxLength), length))
    return *e;
  if (auto e = read_int(*j, "count", 1, static_cast<long long>(kMaxGenerateCount), count)) return *e;
  if (!length) return error(400, "length is required", "length");
  if (!count) count = 20;
  std::uint64_t seed = 0;
  if (auto e = read_seed(*j, seed)) return *e;

  std::optional<RankingModel> l1;
  std::string l1_id;
  if (j->contains("l1_model") && !j->at("l1_model").is_null()) {
    if (!j->at("l1_model").is_string()) return error(400, "l1_model must be a string", "l1_model");
    l1_id = j->at("l1_model").get<std::string>();
    const auto* m = find_model(l1_id);
    if (!m) return error(404, "unknown model '" + l1_id + "'", "l1_model");
    l1 = RankingModel{m->id, m->model.get()};
  }
  const auto* base = find_model(generator_);
  if (!base) return error(404, "generator model '" + generator_ + "' is not loaded");

  GenerateResult result;
  try {
    const auto n = static_cast<std::size_t>(*count);
    if (static_cast<std::size_t>(*length) <= kMaxExhaustiveLength) {
      result = finish_ranking(exhaustive_cached(static_cast<std::size_t>(*length)), l1, n);
    } else {
      GenerateOptions options;
      options.length = static_cast<std::size_t>(*length);
      options.count = n;
      options.seed = seed;
      options.pool_size = pool_size_;
      options.workers = workers_;
      result = generate_nonwords({base->id, base->model.get()}, l1, lexicon_, options);
    }
  } catch (const GenerationExhausted& e) {
    return error(503, e.what());
  }

  json words = json::array();
  for (std::size_t i = 0; i < result.ranked.items.size(); ++i) {
    words.push_back({{"text", result.ranked.items[i].text}, {"score", result.ranked.score_at(i)}, {"rank", i + 1}});
  }
  return {200,
          {{"seed", seed},
           {"length", *length},
           {"count", *count},
           {"model", generator_},
           {"l1_model", l1 ? json(l1_id) : json(nullptr)},
           {"words", words},
           {"filter_report", report_json(result.report)}}};
}

ApiResponse Service::create_study(const std::string& body) {
  const auto j = parse_body(body);
  if (!j) return error(400, "request body must be a JSON object");
  if (!j->contains("design") || !j->at("design").is_string()) return error(400, "design is required", "design");
  const auto design = parse_design(j->at("design").get<std::string>());
  if (!design) return error(400, "design must be 'perception' or 'lexical_decision'", "design");
  std::uint64_t seed = 0;
  if (auto e = read_seed(*j, seed)) return *e;
  const json params = j->value("parameters", json::object());
  if (!params.is_object()) return error(400, "parameters must be an object", "parameters");

  std::optional<long long> length, pool, k, depth;
  for (auto [field, lo, hi, out] : {std::tuple{"length", 6LL, 11LL, &length}, std::tuple{"pool", 1LL, 100000LL, &pool},
                                    std::tuple{"k", 1LL, 1000LL, &k}, std::tuple{"depth", 1LL, 100000LL, &depth}}) {
    if (auto e = read_int(params, field, lo, hi, *out)) return *e;
  }
  const std::size_t len = static_cast<std::size_t>(length.value_or(6));
  const std::size_t pool_size = static_cast<std::size_t>(pool.value_or(static_cast<long long>(pool_size_)));
  const std::size_t top = static_cast<std::size_t>(k.value_or(20));
  Rng rng = Rng::derive(seed, 1);

  StudyList list;
  try {
    if (*design == StudyDesign::Perception) {
      if (params.contains("groups")) {
        const auto& groups = params.at("groups");
        if (!groups.is_array() || groups.size() != 3) return error(400, "groups must hold three lists", "groups");
        list = build_perception_list(string_array(groups[0], "groups"), string_array(groups[1], "groups"),
                                     string_array(groups[2], "groups"));
      } else {
        const std::string target_id = params.value("target", generator_);
        const std::string other_id = params.value("other", "ar");
        const auto* target = find_model(target_id);
        const auto* other = find_model(other_id);
        if (!target) return error(404, "unknown model '" + target_id + "'", "target");
        if (!other) return error(404, "unknown model '" + other_id + "'", "other");
        FilterReport report;
        auto candidates = sampled_pool(len, pool_size, seed, report);
        auto by_target = rank(candidates, *target->model, target->id);
        auto by_other = rank(std::move(candidates), *other->model, other->id);
        const auto g = build_perception_groups(by_target, by_other, top,
                                               static_cast<std::size_t>(depth.value_or(1000)), rng);
        list = build_perception_list(g.g1, g.g2, g.g3);
      }
    } else {
      std::vector<TaggedList> lists;
      std::vector<std::string> fillers;
      if (params.contains("lists")) {
        if (!params.at("lists").is_array()) return error(400, "lists must be an array", "lists");
        for (const auto& entry : params.at("lists")) {
          if (!entry.is_object() || !entry.contains("tag") || !entry.at("tag").is_string() || !entry.contains("texts")) {
            return error(400, "each list needs a tag and texts", "lists");
          }
          lists.push_back({entry.at("tag").get<std::string>(), string_array(entry.at("texts"), "lists")});
        }
        if (!params.contains("fillers")) return error(400, "fillers are required", "fillers");
        fillers = string_array(params.at("fillers"), "fillers");
      } else {
        json sources = params.value("models", json::array({{{"tag", "SV"}, {"model", "sv"}},
                                                           {{"tag", "DE"}, {"model", "de"}},
                                                           {{"tag", "EN"}, {"model", "en"}}}));
        if (!sources.is_array() || sources.empty()) return error(400, "models must be a non-empty array", "models");
        FilterReport report;
        const auto candidates = sampled_pool(len, pool_size, seed, report);
        std::vector<RankedList> rankings;
        std::vector<std::string> tags;
        for (const auto& source : sources) {
          const std::string id = source.value("model", "");
          const auto* m = find_model(id);
          if (!m) return error(404, "unknown model '" + id + "'", "models");
          rankings.push_back(rank(candidates, *m->model, m->id));
          tags.push_back(source.value("tag", id));
        }
        const auto picked = select_disjoint_top(rankings, top);
        for (std::size_t i = 0; i < picked.size(); ++i) lists.push_back({tags[i], picked[i].texts()});
        fillers = sample_without_replacement(lexicon_.words_of_length(len), top, rng);
      }
      list = build_decision_blocks(lists, fillers, rng);
    }
  } catch (const GenerationExhausted& e) {
    return error(503, e.what());
  } catch (const Error& e) {
    return error(400, e.what());
  }
  list.seed = seed;
  const std::string id = store_.create_study(list);
  return {200, {{"id", id}, {"study", json::parse(*store_.study_json(id))}}};
}

ApiResponse Service::get_study(const std::string& id) const {
  auto text = store_.study_json(id);
  if (!text) return error(404, "unknown study '" + id + "'");
  return {200, json::parse(*text)};
}

ApiResponse Service::post_trials(const std::string& body) {
  const auto j = parse_body(body);
  if (!j) return error(400, "request body must be a JSON object");
  if (!j->contains("session") || !j->at("session").is_string()) return error(400, "session is required", "session");
  if (!j->contains("trials") || !j->at("trials").is_array()) return error(400, "trials must be an array", "trials");
  const std::string session = j->at("session").get<std::string>();
  std::vector<TrialRecord> records;
  try {
    for (const auto& t : j->at("trials")) records.push_back(trial_from_json(t));
  } catch (const InputFormatError& e) {
    return error(400, e.what(), "trials");
  }
  const auto list = store_.study(session);
  if (!list) return error(404, "unknown session '" + session + "'", "session");
  for (const auto& r : records) {
    if (!list->contains(r.word)) return error(409, "word '" + r.word + "' is not in the session's study list", "trials");
  }
  const auto total = store_.append_trials(session, records);
  return {200, {{"session", session}, {"accepted", records.size()}, {"total", total}}};
}

ApiResponse Service::analysis(const std::string& session) const {
  if (!store_.study_json(session)) return error(404, "unknown session '" + session + "'");
  const auto records = store_.trials(session);
  json body = records.empty() ? json{{"groups", json::array()}} : to_json(analyze(records));
  body["session"] = session;
  body["trial_count"] = records.size();
  return {200, body};
}

ApiResponse Service::models() const {
  json list = json::array();
  for (const auto& m : models_) {
    list.push_back({{"id", m.id},
                    {"order", m.model->order()},
                    {"alphabet", m.model->alphabet().to_utf8()},
                    {"contexts", m.model->context_count()},
                    {"path", m.path.string()},
                    {"generator", m.id == generator_}});
  }
  return {200, {{"models", list}}};
}

void Service::mount(httplib::Server& server) {
  auto send = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.text(), "application/json");
  };
  server.Post("/api/v1/generate",
              [this, send](const httplib::Request& req, httplib::Response& res) { send(res, generate(req.body)); });
  server.Post("/api/v1/study",
              [this, send](const httplib::Request& req, httplib::Response& res) { send(res, create_study(req.body)); });
  server.Get(R"(/api/v1/study/([A-Za-z0-9_-]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_study(req.matches[1]));
  });
  server.Post("/api/v1/trials",
              [this, send](const httplib::Request& req, httplib::Response& res) { send(res, post_trials(req.body)); });
  server.Get(R"(/api/v1/analysis/([A-Za-z0-9_-]+))",
             [this, send](const httplib::Request& req, httplib::Response& res) { send(res, analysis(req.matches[1])); });
  server.Get("/api/v1/models",
             [this, send](const httplib::Request&, httplib::Response& res) { send(res, models()); });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(json{{"error", what}}.dump(), "application/json");
  });
}

}  // namespace nonword
