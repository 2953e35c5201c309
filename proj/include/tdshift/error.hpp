#pragma once

#include <stdexcept>
#include <string>

namespace tdshift {

// Every failure raised by the library carries a short machine-readable code
// ("empty-sample", "space-mismatch", ...) plus a human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace tdshift
