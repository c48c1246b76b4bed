#pragma once

#include <stdexcept>
#include <string>

namespace rdg {

/// Base of every error the library throws. `code()` is the short machine
/// string echoed in ERROR wire messages.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define RDG_DEFINE_ERROR(Name, code_str)                              \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(code_str, what) {} \
  }

RDG_DEFINE_ERROR(NotFoundError, "not_found");
RDG_DEFINE_ERROR(ArgumentError, "argument");
RDG_DEFINE_ERROR(LoadError, "load");
RDG_DEFINE_ERROR(StateError, "state");
RDG_DEFINE_ERROR(RoleError, "role");
RDG_DEFINE_ERROR(GuessLimitError, "guess_limit");
RDG_DEFINE_ERROR(ClockExpiredError, "clock_expired");
RDG_DEFINE_ERROR(UnsupportedError, "unsupported");
RDG_DEFINE_ERROR(ButtonError, "button");
RDG_DEFINE_ERROR(AuthError, "auth");
RDG_DEFINE_ERROR(ValidationError, "validation");
RDG_DEFINE_ERROR(ReplayError, "replay");
RDG_DEFINE_ERROR(ProtocolError, "protocol");
RDG_DEFINE_ERROR(QueueError, "queue");
RDG_DEFINE_ERROR(SeqError, "seq");
RDG_DEFINE_ERROR(StorageError, "storage");

#undef RDG_DEFINE_ERROR

}  // namespace rdg
