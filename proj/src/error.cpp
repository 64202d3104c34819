#include "powerpanel/error.hpp"

namespace powerpanel {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::io: return "io";
        case ErrorKind::schema: return "schema";
        case ErrorKind::uniqueness: return "uniqueness";
        case ErrorKind::config: return "config";
        case ErrorKind::empty_window: return "empty-window";
        case ErrorKind::design: return "design";
        case ErrorKind::labeling: return "labeling";
        case ErrorKind::input: return "input";
        case ErrorKind::window: return "window";
        case ErrorKind::undefined_score: return "undefined-score";
        case ErrorKind::degenerate_separation: return "degenerate-separation";
        case ErrorKind::singular_model: return "singular-model";
        case ErrorKind::precision: return "precision";
        case ErrorKind::capacity: return "capacity";
        case ErrorKind::mixing_failure: return "mixing-failure";
        case ErrorKind::catalogue: return "catalogue";
        case ErrorKind::range: return "range";
        case ErrorKind::span: return "span";
        case ErrorKind::mapping: return "mapping";
        case ErrorKind::dependency: return "dependency";
    }
    return "unknown";
}

}  // namespace powerpanel
