#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "nonword/corpus.hpp"
#include "nonword/lm.hpp"
#include "nonword/rng.hpp"
#include "nonword/text.hpp"

namespace testing {

namespace fs = std::filesystem;

inline fs::path data_dir() { return NONWORD_DATA_DIR; }
inline fs::path fixtures_dir() { return NONWORD_FIXTURES_DIR; }
inline fs::path cli_path() { return NONWORD_CLI; }

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int n = 0;
    path_ = fs::temp_directory_path() /
            ("nonword-test-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

// Desk models trained from the shipped word lists, loaded once.
inline const nonword::PositionalNgramModel& desk_model(const std::string& id) {
  static std::map<std::string, std::unique_ptr<nonword::PositionalNgramModel>> cache;
  auto& slot = cache[id];
  if (!slot) {
    std::ifstream in(data_dir() / "models" / (id + ".posgram"));
    slot = std::make_unique<nonword::PositionalNgramModel>(nonword::PositionalNgramModel::deserialize(in));
  }
  return *slot;
}

inline const nonword::Lexicon& sv_lexicon() {
  static const nonword::Lexicon lexicon = [] {
    std::ifstream words(data_dir() / "lexicon" / "sv_words.txt");
    std::ifstream exclusions(data_dir() / "lexicon" / "sv_exclusions.txt");
    return nonword::load_lexicon(words, exclusions);
  }();
  return lexicon;
}

inline std::string random_word(nonword::Rng& rng, const nonword::Alphabet& alphabet, std::size_t length) {
  std::u32string w;
  for (std::size_t i = 0; i < length; ++i) w += alphabet.at(rng.below(alphabet.size()));
  return nonword::utf8::encode(w);
}

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'') {
      q += "'\\''";
    } else {
      q += c;
    }
  }
  return q + "'";
}

// Runs `command` through the shell with stdin from `input`.
inline CommandResult run_shell(const std::string& command, const std::string& input = {}) {
  TempDir tmp;
  write_file(tmp / "in", input);
  const std::string full = "(" + command + ") < " + shell_quote((tmp / "in").string()) + " > " +
                           shell_quote((tmp / "out").string()) + " 2> " + shell_quote((tmp / "err").string());
  const int status = std::system(full.c_str());
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(tmp / "out");
  r.err = read_file(tmp / "err");
  return r;
}

inline CommandResult run_cli(const std::vector<std::string>& args, const std::string& input = {}) {
  std::string command = shell_quote(cli_path().string());
  for (const auto& a : args) command += " " + shell_quote(a);
  return run_shell(command, input);
}

}  // namespace testing
