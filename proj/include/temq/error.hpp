#pragma once

#include <stdexcept>
#include <string>

namespace temq {

enum class Errc {
    invalid_argument,
    invalid_params,
    empty_sequence,
    degenerate_density,
    nyquist_violation,
    numerical_failure,
    undefined_nmse,
    config,
    io,
};

inline const char* to_string(Errc code)
{
    switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::invalid_params: return "invalid-params";
    case Errc::empty_sequence: return "empty-sequence";
    case Errc::degenerate_density: return "degenerate-density";
    case Errc::nyquist_violation: return "nyquist-violation";
    case Errc::numerical_failure: return "numerical-failure";
    case Errc::undefined_nmse: return "undefined-nmse";
    case Errc::config: return "config";
    case Errc::io: return "io";
    }
    return "unknown";
}

/// Library-wide exception. The code is what callers (and the CLI exit status) branch on.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    Errc code() const noexcept { return code_; }

    /// Re-throwable copy with a context prefix, same code.
    Error with_context(const std::string& context) const
    {
        Error e(*this);
        e.context_ = context + ": " + std::runtime_error::what();
        return e;
    }

    const char* what() const noexcept override
    {
        return context_.empty() ? std::runtime_error::what() : context_.c_str();
    }

private:
    Errc code_;
    std::string context_;
};

inline void require(bool condition, Errc code, const std::string& message)
{
    if (!condition) throw Error(code, message);
}

} // namespace temq
