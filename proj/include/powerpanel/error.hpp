#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace powerpanel {

// Failure categories surfaced by the library. Each stage throws Error with
// the category that names the violated contract.
enum class ErrorKind {
    io,
    schema,
    uniqueness,
    config,
    empty_window,
    design,
    labeling,
    input,
    window,
    undefined_score,
    degenerate_separation,
    singular_model,
    precision,
    capacity,
    mixing_failure,
    catalogue,
    range,
    span,
    mapping,
    dependency,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace powerpanel
