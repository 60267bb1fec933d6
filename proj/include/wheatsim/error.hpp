#pragma once

#include <stdexcept>
#include <string>

namespace wheatsim {

// Values mirror the WS_ERR_* codes of the C API.
enum class ErrorCode {
    invalid_argument = 1,
    io = 2,
    parse = 3,
    validation = 4,
    numerical = 5,
    market = 6,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace wheatsim
