#pragma once

#include <stdexcept>
#include <string>

namespace scw {

// Mathematical precondition failures map to CLI exit code 2,
// enumeration/closure budget overruns to exit code 3.
class precondition_error : public std::runtime_error {
 public:
  explicit precondition_error(const std::string& what) : std::runtime_error(what) {}
};

class budget_error : public std::runtime_error {
 public:
  explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

class parse_error : public std::runtime_error {
 public:
  explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace scw
