#include "mctl/error.hpp"

namespace mctl {

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(what), kind_(kind) {}

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::Input: return "input error";
    case ErrorKind::Config: return "config error";
    case ErrorKind::Numeric: return "numeric error";
    }
    return "error";
}

} // namespace mctl
