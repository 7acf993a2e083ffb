#pragma once

#include <stdexcept>
#include <string>

namespace decprov {

enum class Errc {
  DanglingReference,
  TemporalViolation,
  DuplicateId,
  UnknownId,
  IoFailure,
  ParseError,
  MalformedPattern,
  MalformedRule,
  CategoryMismatch,
  BadWindow,
  InvalidSpec,
  WindowOutOfRange,
  UnknownThread,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace decprov
