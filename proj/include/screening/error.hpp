#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace screening {

/// Base of every exception thrown by the library. The category is a short
/// machine-greppable tag ("corpus", "config", "training", ...).
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

class CorpusError : public Error {
 public:
  explicit CorpusError(const std::string& message) : Error("corpus", message) {}
};

class FetchError : public Error {
 public:
  explicit FetchError(const std::string& message) : Error("fetch", message) {}
};

class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& message) : Error("training", message) {}
};

class SamplingError : public Error {
 public:
  explicit SamplingError(const std::string& message) : Error("sampling", message) {}
};

class ModelError : public Error {
 public:
  explicit ModelError(const std::string& message) : Error("model", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class EvaluationError : public Error {
 public:
  explicit EvaluationError(const std::string& message) : Error("evaluation", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

/// Rethrows `e` as the same category with `context` prepended to the message.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& context) {
  const std::string message = context + ": " + e.what();
  const auto& c = e.category();
  if (c == "corpus") throw CorpusError(message);
  if (c == "fetch") throw FetchError(message);
  if (c == "training") throw TrainingError(message);
  if (c == "sampling") throw SamplingError(message);
  if (c == "model") throw ModelError(message);
  if (c == "config") throw ConfigError(message);
  if (c == "evaluation") throw EvaluationError(message);
  if (c == "io") throw IoError(message);
  throw Error(c, message);
}

}  // namespace screening
