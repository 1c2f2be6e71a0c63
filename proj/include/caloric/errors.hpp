#pragma once

#include <stdexcept>
#include <string>

namespace caloric {

// Every failure carries the module and operation that raised it, so the CLI
// can report "module.op: message" and map it to an exit code.
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string op, std::string message)
      : std::runtime_error("[" + module + "." + op + "] " + message),
        module_(std::move(module)),
        op_(std::move(op)),
        message_(std::move(message)) {}

  const std::string& module_name() const { return module_; }
  const std::string& op_name() const { return op_; }
  const std::string& message() const { return message_; }

 private:
  std::string module_;
  std::string op_;
  std::string message_;
};

// Usage errors (bad config, bad arguments) map to exit code 1; certificate
// failures are not errors and map to exit code 2 at the CLI layer.
class UsageError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] inline void raise(const std::string& module, const std::string& op,
                               const std::string& message) {
  throw Error(module, op, message);
}

}  // namespace caloric
