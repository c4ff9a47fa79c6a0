#pragma once

#include <stdexcept>
#include <string>

namespace gw {

// Error carrying the module it originated from, so the CLI can emit
// module-qualified single-line diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& message)
      : std::runtime_error(message), module_(std::move(module)) {}

  const std::string& module() const { return module_; }

  std::string qualified() const {
    return module_ + ": " + std::string(what());
  }

 private:
  std::string module_;
};

}  // namespace gw
