#pragma once

#include <stdexcept>
#include <string>

namespace endow {

enum class ErrorCode {
    Rejected,
    Domain,
    NumericOverflow,
    Degenerate,
    GridTooCoarse,
    RegressionSingular,
    Diverged,
    ZeroVol,
    Schema,
    Io,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library. `detail` carries the machine-readable
/// part (violated condition, JSON path, stage name).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string detail, const std::string& message = {});

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }
    const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string detail_;
    std::string message_;
};

/// Process exit code for the CLI: 2 for configuration problems, 3 for
/// numerical failures, 1 for I/O.
int exit_code_for(ErrorCode code);

}  // namespace endow
