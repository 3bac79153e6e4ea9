#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nonword {

// Base of every error the library throws. Callers that only care about
// success/failure catch this; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed caller input: undecodable UTF-8, bad CSV, bad config.
class InputFormatError : public Error {
 public:
  InputFormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  explicit InputFormatError(const std::string& what) : Error(what) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_ = 0;
};

class TransliterationError : public Error {
 public:
  TransliterationError(char32_t character, std::size_t offset);
  char32_t character() const { return character_; }
  std::size_t offset() const { return offset_; }

 private:
  char32_t character_;
  std::size_t offset_;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class ScoringError : public Error {
 public:
  using Error::Error;
};

// Model file header/version mismatch or corrupt entry.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line, std::size_t offset)
      : Error(what + " (line " + std::to_string(line) + ", byte " + std::to_string(offset) + ")"),
        line_(line),
        offset_(offset) {}
  std::size_t line() const { return line_; }
  std::size_t offset() const { return offset_; }

 private:
  std::size_t line_;
  std::size_t offset_;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class GenerationExhausted : public Error {
 public:
  using Error::Error;
};

// A batch ran out of attempts; carries the distinct words produced so far.
class PartialResultError : public GenerationExhausted {
 public:
  PartialResultError(const std::string& what, std::vector<std::string> generated)
      : GenerationExhausted(what), generated_(std::move(generated)) {}
  const std::vector<std::string>& generated() const { return generated_; }

 private:
  std::vector<std::string> generated_;
};

class RankingError : public Error {
 public:
  RankingError(const std::string& what, std::vector<std::string> offenders)
      : Error(what), offenders_(std::move(offenders)) {}
  const std::vector<std::string>& offenders() const { return offenders_; }

 private:
  std::vector<std::string> offenders_;
};

class SelectionError : public Error {
 public:
  using Error::Error;
};

class ConstructionError : public Error {
 public:
  using Error::Error;
};

class AnalysisError : public Error {
 public:
  using Error::Error;
};

}  // namespace nonword
