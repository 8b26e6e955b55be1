#pragma once

#include <stdexcept>
#include <string>

namespace cavity
{

enum class ErrorKind
{
    invalid_geometry,
    resolution,
    domain,
    incompatible_grid,
    launch_position,
    numeric_degeneracy,
    model_domain,
    numeric_inconsistency,
    undefined_q,
};

inline const char *to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::invalid_geometry: return "invalid geometry";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::domain: return "domain";
    case ErrorKind::incompatible_grid: return "incompatible grid";
    case ErrorKind::launch_position: return "launch position";
    case ErrorKind::numeric_degeneracy: return "numeric degeneracy";
    case ErrorKind::model_domain: return "model domain";
    case ErrorKind::numeric_inconsistency: return "numeric inconsistency";
    case ErrorKind::undefined_q: return "undefined Q";
    }
    return "error";
}

// Single exception type for the toolkit; callers switch on kind() where the
// distinction matters (the CLI maps kinds onto exit codes).
class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string &what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace cavity
