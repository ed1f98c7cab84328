#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rrm {

/// Coarse failure classes; the CLI maps them to exit codes 2, 3 and 1.
enum class ErrorKind { input, state, internal };

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

/// Bad user input: malformed files, unknown names, out-of-range parameters.
class InputError : public Error {
  public:
    explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

/// The filesystem or an artifact is in a state that forbids the operation.
class StateError : public Error {
  public:
    explicit StateError(const std::string& what) : Error(ErrorKind::state, what) {}
};

class ParseError : public InputError {
  public:
    ParseError(const std::string& what, std::size_t offset)
        : InputError(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

  private:
    std::size_t offset_;
};

}  // namespace rrm
