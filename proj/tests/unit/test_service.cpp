#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "nonword/errors.hpp"
#include "nonword/service.hpp"
#include "support.hpp"

using namespace nonword;
using nlohmann::json;

namespace {

ServiceConfig desk_config(std::size_t pool_size = 2000) {
  auto config = ServiceConfig::load(testing::data_dir().parent_path() / "config" / "service.conf");
  config.pool_size = pool_size;
  return config;
}

std::vector<std::string> read_lines(const std::string& name) {
  std::ifstream in(testing::fixtures_dir() / "stimuli" / name);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

json fixture_study_request() {
  return {{"design", "lexical_decision"},
          {"seed", 5},
          {"parameters",
           {{"lists", {{{"tag", "DE"}, {"texts", read_lines("de.txt")}},
                       {{"tag", "EN"}, {"texts", read_lines("en.txt")}},
                       {{"tag", "SV"}, {"texts", read_lines("sv.txt")}}}},
            {"fillers", read_lines("fi.txt")}}}};
}

json control_trials_json() {
  std::ifstream in(testing::fixtures_dir() / "control_trials.csv");
  json out = json::array();
  for (const auto& r : read_trials_csv(in)) out.push_back(to_json(r));
  return out;
}

// Models and lexicon are loaded once; each test gets its own store.
struct Desk {
  JournalSessionStore store;
  Service service;
  Desk() : service(desk_config(), store) {}
};

// A real HTTP server on an ephemeral localhost port.
class LiveServer {
 public:
  explicit LiveServer(Service& service) {
    service.mount(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LiveServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(120, 0);
    return c;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(
      "# comment\n"
      "bind = 0.0.0.0:9000\n"
      "generator = de\n"
      "models.de.path = models/de.posgram\n"
      "models.sv_big.path = \"/abs/sv.posgram\"\n"
      "lexicon.path = lex.txt\n"
      "store.path = s.jsonl\n"
      "generate.pool_size = 500\n"
      "generate.workers = 4\n");
  const auto c = ServiceConfig::parse(in, "/etc/nonword");
  CHECK(c.host == "0.0.0.0");
  CHECK(c.port == 9000);
  CHECK(c.generator == "de");
  CHECK(c.model_paths.at("de") == "/etc/nonword/models/de.posgram");
  CHECK(c.model_paths.at("sv_big") == "/abs/sv.posgram");
  CHECK(c.lexicon_path == "/etc/nonword/lex.txt");
  CHECK(c.store_path == "/etc/nonword/s.jsonl");
  CHECK(c.pool_size == 500);
  CHECK(c.workers == 4);

  for (const char* bad : {"colour = blue\n", "bind = localhost\n", "generate.pool_size = lots\n", "just words\n"}) {
    std::istringstream b(bad);
    CHECK_THROWS_AS(ServiceConfig::parse(b), InputFormatError);
  }
  CHECK_THROWS_AS(ServiceConfig::load("/nonexistent/service.conf"), InputFormatError);
}

TEST_CASE("models endpoint") {
  Desk desk;
  const auto r = desk.service.models();
  CHECK(r.status == 200);
  std::set<std::string> ids;
  for (const auto& m : r.body["models"]) {
    ids.insert(m["id"]);
    // metadata agrees with the model file header
    std::ifstream in(m["path"].get<std::string>());
    std::string header;
    std::getline(in, header);
    CHECK(header == "posgram v1 order=" + std::to_string(m["order"].get<int>()) +
                        " alphabet=" + m["alphabet"].get<std::string>());
    CHECK(m["generator"] == (m["id"] == "sv"));
  }
  CHECK(ids == std::set<std::string>{"ar", "de", "en", "sv"});

  JournalSessionStore store;
  Service empty(ServiceConfig{}, store);
  CHECK(empty.models().body["models"] == json::array());
  CHECK(empty.generate(R"({"length":6,"seed":1})").status == 404);
}

TEST_CASE("generate: determinism and schema") {
  Desk desk;
  const auto a = desk.service.generate(R"({"length":6,"count":20,"seed":42})");
  const auto b = desk.service.generate(R"({"length":6,"count":20,"seed":42})");
  REQUIRE(a.status == 200);
  CHECK(a.text() == b.text());
  CHECK(a.body["seed"] == 42);
  CHECK(a.body["length"] == 6);
  CHECK(a.body["count"] == 20);
  CHECK(a.body["model"] == "sv");
  CHECK(a.body["l1_model"].is_null());
  REQUIRE(a.body["words"].size() == 20);
  double prev = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& w = a.body["words"][i];
    CHECK(w["rank"] == i + 1);
    CHECK(utf8::decode(w["text"].get<std::string>()).size() == 6);
    CHECK_FALSE(testing::sv_lexicon().contains(w["text"].get<std::string>()));
    if (i) CHECK(w["score"].get<double>() <= prev);
    prev = w["score"];
  }
  const auto& report = a.body["filter_report"];
  CHECK(report["input_count"].get<std::uint64_t>() ==
        report["output_count"].get<std::uint64_t>() + report["removed_lexicon"].get<std::uint64_t>() +
            report["removed_exclusion"].get<std::uint64_t>() + report["removed_low_probability"].get<std::uint64_t>());

  CHECK(desk.service.generate(R"({"length":6,"count":20,"seed":43})").text() != a.text());

  // default count, drawn seed echoed back and reusable
  const auto drawn = desk.service.generate(R"({"length":7})");
  REQUIRE(drawn.status == 200);
  CHECK(drawn.body["words"].size() == 20);
  const auto seed = drawn.body["seed"].get<std::uint64_t>();
  CHECK(seed < (std::uint64_t{1} << 53));
  CHECK(desk.service.generate(json{{"length", 7}, {"seed", seed}}.dump()).text() == drawn.text());

  // short words come from the exhaustive pool
  const auto four = desk.service.generate(R"({"length":3,"count":5,"seed":1})");
  REQUIRE(four.status == 200);
  CHECK(four.body["words"].size() == 5);
  CHECK(utf8::decode(four.body["words"][0]["text"].get<std::string>()).size() == 3);
}

TEST_CASE("generate: re-ranking by a first-language model") {
  Desk desk;
  const auto plain = desk.service.generate(R"({"length":6,"count":20,"seed":42})");
  const auto ar = desk.service.generate(R"({"length":6,"count":20,"seed":42,"l1_model":"ar"})");
  REQUIRE(ar.status == 200);
  CHECK(ar.body["l1_model"] == "ar");
  CHECK(ar.body["words"].size() == 20);
  std::set<std::string> keys_plain, keys_ar;
  for (const auto& [k, _] : plain.body.items()) keys_plain.insert(k);
  for (const auto& [k, _] : ar.body.items()) keys_ar.insert(k);
  CHECK(keys_plain == keys_ar);
  std::vector<std::string> wp, wa;
  for (const auto& w : plain.body["words"]) wp.push_back(w["text"]);
  for (const auto& w : ar.body["words"]) wa.push_back(w["text"]);
  CHECK(wp != wa);
}

TEST_CASE("generate: bad requests") {
  Desk desk;
  auto r = desk.service.generate(R"({"length":12,"count":20,"seed":1})");
  CHECK(r.status == 400);
  CHECK(r.body["field"] == "length");
  CHECK(r.body["error"].get<std::string>().find("between 2 and 11") != std::string::npos);
  CHECK(desk.service.generate(R"({"length":1})").body["field"] == "length");
  CHECK(desk.service.generate(R"({"count":5})").status == 400);
  CHECK(desk.service.generate(R"({"length":6,"count":0})").body["field"] == "count");
  CHECK(desk.service.generate(R"({"length":6,"count":1001})").body["field"] == "count");
  CHECK(desk.service.generate(R"({"length":"six"})").status == 400);
  CHECK(desk.service.generate(R"({"length":6,"seed":-3})").body["field"] == "seed");
  CHECK(desk.service.generate(R"({"length":6,"l1_model":7})").status == 400);
  CHECK(desk.service.generate("not json").status == 400);
  CHECK(desk.service.generate("[1,2]").status == 400);
  r = desk.service.generate(R"({"length":6,"l1_model":"tlh"})");
  CHECK(r.status == 404);
  CHECK(r.body["field"] == "l1_model");
}

TEST_CASE("studies: create, fetch, errors") {
  Desk desk;
  const auto perception = desk.service.create_study(
      R"({"design":"perception","seed":3,"parameters":{"groups":[["a1","a2"],["b1","b2"],["c1","c2"]]}})");
  REQUIRE(perception.status == 200);
  const std::string pid = perception.body["id"];
  CHECK(perception.body["study"]["design"] == "perception");
  CHECK(perception.body["study"]["items"].size() == 6);
  CHECK(perception.body["study"]["items"][1]["text"] == "b1");

  const auto decision = desk.service.create_study(fixture_study_request().dump());
  REQUIRE(decision.status == 200);
  const std::string did = decision.body["id"];
  CHECK(did != pid);
  CHECK(decision.body["study"]["items"].size() == 160);
  CHECK(decision.body["study"]["block_size"] == 4);

  // re-fetching returns exactly the stored bytes
  const auto fetched = desk.service.get_study(did);
  CHECK(fetched.status == 200);
  CHECK(fetched.text() == decision.body["study"].dump());
  CHECK(fetched.text() == *desk.store.study_json(did));
  CHECK(desk.service.get_study(pid).body == perception.body["study"]);

  CHECK(desk.service.get_study("s999999").status == 404);
  CHECK(desk.service.create_study(R"({"design":"survey"})").status == 400);
  CHECK(desk.service.create_study(R"({"seed":1})").body["field"] == "design");
  CHECK(desk.service.create_study(R"({"design":"perception","parameters":{"groups":[["a"],["b"]]}})").status == 400);
  CHECK(desk.service.create_study(R"({"design":"perception","parameters":{"groups":[["a"],["b","c"],["d"]]}})")
            .status == 400);
  CHECK(desk.service.create_study(R"({"design":"perception","parameters":{"other":"tlh"}})").status == 404);
  CHECK(desk.service.create_study(R"({"design":"lexical_decision","parameters":{"lists":[{"tag":"DE","texts":["a"]}]}})")
            .body["field"] == "fillers");
}

TEST_CASE("studies: generated from the loaded models") {
  Desk desk;
  const auto p = desk.service.create_study(R"({"design":"perception","seed":11,"parameters":{"k":10,"depth":1000}})");
  REQUIRE(p.status == 200);
  const auto& items = p.body["study"]["items"];
  REQUIRE(items.size() == 30);
  std::set<std::string> texts;
  for (std::size_t i = 0; i < items.size(); ++i) {
    CHECK(items[i]["group"] == std::array<const char*, 3>{"g1", "g2", "g3"}[i % 3]);
    texts.insert(items[i]["text"].get<std::string>());
  }
  CHECK(texts.size() == 30);
  CHECK(desk.service.create_study(R"({"design":"perception","seed":11,"parameters":{"k":10,"depth":1000}})")
            .body["study"] == p.body["study"]);

  const auto d = desk.service.create_study(R"({"design":"lexical_decision","seed":11,"parameters":{"k":8}})");
  REQUIRE(d.status == 200);
  const auto& blocks = d.body["study"]["items"];
  REQUIRE(blocks.size() == 32);
  for (std::size_t b = 0; b < 8; ++b) {
    std::multiset<std::string> tags;
    for (std::size_t j = 0; j < 4; ++j) {
      const auto& item = blocks[4 * b + j];
      CHECK(item["block"] == b);
      tags.insert(item["group"].get<std::string>());
      const std::string text = item["text"];
      CHECK(testing::sv_lexicon().is_word(text) == (item["group"] == "FI"));
    }
    CHECK(tags == std::multiset<std::string>{"DE", "EN", "FI", "SV"});
  }
}

TEST_CASE("trials and analysis") {
  Desk desk;
  const auto study = desk.service.create_study(fixture_study_request().dump());
  const std::string id = study.body["id"];

  CHECK(desk.service.analysis(id).body["groups"] == json::array());
  CHECK(desk.service.analysis(id).body["trial_count"] == 0);

  const auto trials = control_trials_json();
  json first_half = json::array(), second_half = json::array();
  for (std::size_t i = 0; i < trials.size(); ++i) (i % 2 ? second_half : first_half).push_back(trials[i]);
  auto r = desk.service.post_trials(json{{"session", id}, {"trials", first_half}}.dump());
  CHECK(r.status == 200);
  CHECK(r.body["accepted"] == first_half.size());
  CHECK(r.body["total"] == first_half.size());
  r = desk.service.post_trials(json{{"session", id}, {"trials", second_half}}.dump());
  CHECK(r.body["total"] == trials.size());

  const auto a = desk.service.analysis(id);
  REQUIRE(a.status == 200);
  CHECK(a.body["session"] == id);
  CHECK(a.body["trial_count"] == trials.size());
  REQUIRE(a.body["groups"].size() == 1);
  const auto& navg = a.body["groups"][0]["nAvg"];
  CHECK(std::abs(navg["DE"].get<double>() - 1.10) <= 0.005);
  CHECK(std::abs(navg["EN"].get<double>() - 0.94) <= 0.005);
  CHECK(std::abs(navg["SV"].get<double>() - 1.23) <= 0.005);
  CHECK(std::abs(navg["FI"].get<double>() - 0.72) <= 0.005);

  // rejected batches leave the log untouched
  auto foreign = trials[0];
  foreign["word"] = "blorkel";
  r = desk.service.post_trials(json{{"session", id}, {"trials", {trials[1], foreign}}}.dump());
  CHECK(r.status == 409);
  auto broken = trials[0];
  broken["response"] = "maybe";
  CHECK(desk.service.post_trials(json{{"session", id}, {"trials", {broken}}}.dump()).status == 400);
  broken = trials[0];
  broken.erase("rt_seconds");
  CHECK(desk.service.post_trials(json{{"session", id}, {"trials", {broken}}}.dump()).status == 400);
  CHECK(desk.service.post_trials(json{{"session", id}, {"trials", "none"}}.dump()).status == 400);
  CHECK(desk.service.post_trials(json{{"trials", json::array()}}.dump()).body["field"] == "session");
  CHECK(desk.service.post_trials(json{{"session", "s999999"}, {"trials", {trials[0]}}}.dump()).status == 404);
  CHECK(desk.store.trials(id).size() == trials.size());

  CHECK(desk.service.analysis("s999999").status == 404);
}

TEST_CASE("journal replay") {
  testing::TempDir dir;
  const auto path = dir / "sessions.jsonl";
  std::string id;
  std::string text;
  {
    JournalSessionStore store(path);
    StudyList list = build_perception_list({"åsna"}, {"b"}, {"c"});
    list.seed = 12;
    id = store.create_study(list);
    text = *store.study_json(id);
    const std::vector<TrialRecord> records = {{"R1", "de", Proficiency::Advanced, "åsna", StimulusGroup::SV,
                                               Response::Reject, 1.25}};
    CHECK(store.append_trials(id, records) == 1);
    CHECK(store.append_trials(id, records) == 2);
    CHECK(store.create_study(list) == "s000002");
  }
  JournalSessionStore reopened(path);
  CHECK(reopened.study_json(id) == text);
  REQUIRE(reopened.trials(id).size() == 2);
  CHECK(reopened.trials(id)[1].word == "åsna");
  CHECK(reopened.trials(id)[1].rt_seconds == 1.25);
  CHECK(reopened.study(id)->seed == 12);
  CHECK(reopened.create_study(build_perception_list({"x"}, {"y"}, {"z"})) == "s000003");
  CHECK_FALSE(reopened.study_json("s000099"));

  testing::write_file(dir / "bad.jsonl", "{\"type\":\"study\"\nnot json\n");
  CHECK_THROWS_AS(JournalSessionStore(dir / "bad.jsonl"), InputFormatError);
}

TEST_CASE("concurrent writers keep every trial") {
  JournalSessionStore store;
  const auto id = store.create_study(build_perception_list({"a"}, {"b"}, {"c"}));
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 100; ++i) {
        const std::vector<TrialRecord> one = {{"R" + std::to_string(t), "sv", Proficiency::Advanced, "a",
                                               StimulusGroup::FI, Response::Accept, 1.0 + i}};
        store.append_trials(id, one);
        (void)store.trials(id);
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(store.trials(id).size() == 800);
}

TEST_CASE("the contract over HTTP") {
  Desk desk;
  LiveServer live(desk.service);
  auto client = live.client();

  auto r = client.Post("/api/v1/generate", R"({"length":6,"count":20,"seed":42})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->get_header_value("Content-Type") == "application/json");
  auto again = client.Post("/api/v1/generate", R"({"length":6,"count":20,"seed":42})", "application/json");
  REQUIRE(again);
  CHECK(again->body == r->body);

  r = client.Post("/api/v1/generate", R"({"length":12,"count":20})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 400);
  CHECK(json::parse(r->body)["field"] == "length");

  r = client.Post("/api/v1/generate", R"({"length":6,"l1_model":"xx"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 404);

  r = client.Get("/api/v1/models");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(json::parse(r->body)["models"].size() == 4);

  r = client.Post("/api/v1/study", fixture_study_request().dump(), "application/json");
  REQUIRE(r);
  REQUIRE(r->status == 200);
  const std::string id = json::parse(r->body)["id"];
  const auto stored = json::parse(r->body)["study"].dump();
  r = client.Get("/api/v1/study/" + id);
  REQUIRE(r);
  CHECK(r->body == stored);
  r = client.Get("/api/v1/study/nope");
  REQUIRE(r);
  CHECK(r->status == 404);

  r = client.Post("/api/v1/trials", json{{"session", id}, {"trials", control_trials_json()}}.dump(),
                  "application/json");
  REQUIRE(r);
  CHECK(r->status == 200);
  r = client.Get("/api/v1/analysis/" + id);
  REQUIRE(r);
  REQUIRE(r->status == 200);
  const auto navg = json::parse(r->body)["groups"][0]["nAvg"];
  CHECK(std::abs(navg["DE"].get<double>() - 1.10) <= 0.005);
  CHECK(std::abs(navg["EN"].get<double>() - 0.94) <= 0.005);
  CHECK(std::abs(navg["SV"].get<double>() - 1.23) <= 0.005);
  CHECK(std::abs(navg["FI"].get<double>() - 0.72) <= 0.005);

  r = client.Get("/api/v1/nothing-here");
  REQUIRE(r);
  CHECK(r->status == 404);
}
