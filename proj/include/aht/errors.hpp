#pragma once

#include <stdexcept>
#include <string>

namespace aht {

// A search or enumeration would exceed its configured node budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent run or strategy configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace aht
