#include "ripplekit/error.hpp"

namespace ripplekit {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::parse: return "parse error";
        case ErrorKind::invalid_argument: return "invalid argument";
        case ErrorKind::degenerate_stats: return "degenerate statistics";
        case ErrorKind::invalid_pair: return "invalid pair";
        case ErrorKind::size_limit: return "size limit exceeded";
        case ErrorKind::dimension_mismatch: return "dimension mismatch";
        case ErrorKind::calibration: return "calibration error";
        case ErrorKind::capacity: return "capacity error";
        case ErrorKind::config: return "configuration error";
        case ErrorKind::io: return "i/o error";
    }
    return "error";
}

}  // namespace ripplekit
