#include "xtract/error.hpp"

namespace xtract {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::method_not_found: return "MethodNotFound";
    case ErrorCode::ambiguous_method: return "AmbiguousMethod";
    case ErrorCode::empty_range: return "EmptyRange";
    case ErrorCode::not_aligned: return "NotAligned";
    case ErrorCode::method_too_large: return "MethodTooLarge";
    case ErrorCode::provider_unreachable: return "ProviderUnreachable";
    case ErrorCode::plan_conflict: return "PlanConflict";
    case ErrorCode::stale_unit: return "StaleUnit";
    case ErrorCode::render_error: return "RenderError";
    case ErrorCode::insufficient_samples: return "InsufficientSamples";
    case ErrorCode::empty_oracle: return "EmptyOracle";
    case ErrorCode::invalid_config: return "InvalidConfig";
    }
    return "Unknown";
}

}  // namespace xtract
