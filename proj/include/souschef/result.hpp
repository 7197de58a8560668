#pragma once

#include <stdexcept>
#include <utility>
#include <variant>

namespace souschef {

// Minimal value-or-error carrier. Every fallible operation in the project
// returns one of these instead of throwing across module boundaries.
template <typename T, typename E>
class [[nodiscard]] Result {
 public:
  Result(T value) : data_(std::in_place_index<0>, std::move(value)) {}
  Result(E error) : data_(std::in_place_index<1>, std::move(error)) {}

  bool ok() const { return data_.index() == 0; }
  explicit operator bool() const { return ok(); }

  T& value() & {
    require_ok();
    return std::get<0>(data_);
  }
  const T& value() const& {
    require_ok();
    return std::get<0>(data_);
  }
  T&& value() && {
    require_ok();
    return std::get<0>(std::move(data_));
  }

  const E& error() const {
    if (ok()) throw std::logic_error("Result holds a value, not an error");
    return std::get<1>(data_);
  }

  const T& operator*() const& { return value(); }
  const T* operator->() const { return &value(); }

 private:
  void require_ok() const {
    if (!ok()) throw std::logic_error("Result holds an error, not a value");
  }

  std::variant<T, E> data_;
};

// Shared error type for document loaders (scenes, recipes, configs, mock
// scenario files). Geometry keeps its own error enum because its codes are
// part of that module's contract.
struct DocError {
  enum class Code { Parse, Invariant, Duplicate, Io };
  Code code = Code::Parse;
  std::string field;    // offending key, when known
  std::string message;
};

inline const char* to_string(DocError::Code c) {
  switch (c) {
    case DocError::Code::Parse: return "ParseError";
    case DocError::Code::Invariant: return "InvariantViolation";
    case DocError::Code::Duplicate: return "DuplicateName";
    case DocError::Code::Io: return "IoError";
  }
  return "?";
}

}  // namespace souschef
