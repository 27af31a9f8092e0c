#pragma once

#include <stdexcept>
#include <string>

namespace infrew {

/// Analysis error carrying a short machine-readable code such as
/// "invalid-position" or "not-left-linear".
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

} // namespace infrew
