#ifndef BASISGUARD_ERROR_HPP
#define BASISGUARD_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace basisguard {

// All library failures throw this; `code()` is a stable machine-checkable
// name ("NonFiniteInput", "BadCheckpoint", ...), `what()` adds detail.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace basisguard

#endif
