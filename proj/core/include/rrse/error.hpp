#pragma once

#include <stdexcept>
#include <string>

namespace rrse {

// Every recoverable failure in the library is reported as rrse::Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rrse
