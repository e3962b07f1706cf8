#pragma once

#include "json.hpp"

#include "spseg/evaluation.hpp"
#include "spseg/pipeline.hpp"

namespace spseg {

inline constexpr const char* kDiagnosticsSchemaId = "spseg.diagnostics/1";

/// Keys are emitted in sorted order. Wall-clock fields are included only
/// when `with_timing` is set, so the default output is reproducible.
nlohmann::json to_json(const PipelineConfig& config);
nlohmann::json to_json(const Diagnostics& diag, const PipelineConfig& config, bool with_timing = false);
nlohmann::json to_json(const EvalReport& report);

}  // namespace spseg
