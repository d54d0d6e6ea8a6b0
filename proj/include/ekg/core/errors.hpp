#pragma once

#include <stdexcept>
#include <string>

namespace ekg {

// Error taxonomy. Each exception carries a small kind enum so callers can
// branch without matching message strings.

enum class ExtractionErrorKind { Unparsable, SchemaViolation };

class ExtractionError : public std::runtime_error {
 public:
  ExtractionError(ExtractionErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ExtractionErrorKind kind() const { return kind_; }

 private:
  ExtractionErrorKind kind_;
};

enum class BackendErrorKind { Transport, Dim, NoFixture };

class BackendError : public std::runtime_error {
 public:
  BackendError(BackendErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  BackendErrorKind kind() const { return kind_; }

 private:
  BackendErrorKind kind_;
};

enum class RetrievalErrorKind { EmptyStore, UnknownAnchor };

class RetrievalError : public std::runtime_error {
 public:
  RetrievalError(RetrievalErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  RetrievalErrorKind kind() const { return kind_; }

 private:
  RetrievalErrorKind kind_;
};

enum class AnswerErrorKind { Unparsable, OutOfRange };

class AnswerError : public std::runtime_error {
 public:
  AnswerError(AnswerErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  AnswerErrorKind kind() const { return kind_; }

 private:
  AnswerErrorKind kind_;
};

// Persistence / input-file errors. `record` names the first bad record
// (file:line) when known.
class StoreError : public std::runtime_error {
 public:
  explicit StoreError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ekg
