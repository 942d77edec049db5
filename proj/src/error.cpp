#include "endow/error.hpp"

namespace endow {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::Rejected: return "REJECTED";
        case ErrorCode::Domain: return "DOMAIN";
        case ErrorCode::NumericOverflow: return "NUMERIC_OVERFLOW";
        case ErrorCode::Degenerate: return "DEGENERATE";
        case ErrorCode::GridTooCoarse: return "GRID_TOO_COARSE";
        case ErrorCode::RegressionSingular: return "REGRESSION_SINGULAR";
        case ErrorCode::Diverged: return "DIVERGED";
        case ErrorCode::ZeroVol: return "ZERO_VOL";
        case ErrorCode::Schema: return "SCHEMA";
        case ErrorCode::Io: return "IO";
    }
    return "UNKNOWN";
}

namespace {
std::string compose(ErrorCode code, const std::string& detail, const std::string& message) {
    std::string out = std::string(to_string(code)) + "(" + detail + ")";
    if (!message.empty()) out += ": " + message;
    return out;
}
}  // namespace

Error::Error(ErrorCode code, std::string detail, const std::string& message)
    : std::runtime_error(compose(code, detail, message)), code_(code), detail_(std::move(detail)), message_(message) {}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::Rejected:
        case ErrorCode::Schema:
        case ErrorCode::Domain:
            return 2;
        case ErrorCode::Io:
            return 1;
        default:
            return 3;
    }
}

}  // namespace endow
