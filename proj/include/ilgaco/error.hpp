#pragma once

#include <stdexcept>
#include <string>

namespace ilgaco {

// Error taxonomy shared by the whole library. The CLI maps kinds to exit
// codes: Numeric -> 3, everything else -> 2.
enum class ErrorKind {
    Validation,  // bad user input (config fields, out-of-range arguments)
    Dimension,   // shape mismatch between tensors
    Domain,      // mathematically invalid argument (e.g. temperature <= 0)
    Usage,       // API called out of contract (e.g. duplicate factor)
    Format,      // malformed or truncated file
    Numeric,     // non-finite value where a finite one is required
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg)
        : std::runtime_error(std::move(msg)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_validation(std::string msg) { throw Error(ErrorKind::Validation, std::move(msg)); }
[[noreturn]] inline void throw_dimension(std::string msg) { throw Error(ErrorKind::Dimension, std::move(msg)); }
[[noreturn]] inline void throw_domain(std::string msg) { throw Error(ErrorKind::Domain, std::move(msg)); }
[[noreturn]] inline void throw_usage(std::string msg) { throw Error(ErrorKind::Usage, std::move(msg)); }
[[noreturn]] inline void throw_format(std::string msg) { throw Error(ErrorKind::Format, std::move(msg)); }
[[noreturn]] inline void throw_numeric(std::string msg) { throw Error(ErrorKind::Numeric, std::move(msg)); }

// Non-fatal warnings (e.g. memory capacity too small for one sample per
// cell). Tests can swap the handler to capture messages.
using WarnHandler = void (*)(const std::string&);

WarnHandler set_warn_handler(WarnHandler handler);  // returns previous
void warn(const std::string& msg);

}  // namespace ilgaco
