#pragma once

#include <stdexcept>
#include <string>

namespace vlcot {

// Error categories map 1:1 onto CLI exit codes (usage=1, data=2, backend=3).
enum class ErrorKind { usage = 1, data = 2, backend = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& msg) : Error(ErrorKind::usage, msg) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(ErrorKind::data, msg) {}
};

class BackendError : public Error {
 public:
  explicit BackendError(const std::string& msg) : Error(ErrorKind::backend, msg) {}
};

}  // namespace vlcot
