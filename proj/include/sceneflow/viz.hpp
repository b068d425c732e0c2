#pragma once

#include <optional>

#include "sceneflow/io_formats.hpp"
#include "sceneflow/types.hpp"

namespace sceneflow {

// Color wheel rendering of a flow field: hue encodes direction, distance from
// white encodes magnitude normalized by max_magnitude (zero motion is pure
// white). Invalid pixels render black. Without max_magnitude, the 99th
// percentile of valid magnitudes is used (floor 1e-6).
Image8 flow_to_color(const FlowField& flow,
                     std::optional<double> max_magnitude = std::nullopt);

// Grayscale end-point-error map: intensity = min(|est - gt| / cap, 1) scaled
// to 0..255; pixels outside `valid` (or with invalid flow) render 0.
Image8 error_heatmap(const FlowField& est, const FlowField& gt,
                     const BinaryMask& valid, double cap);

// Normalization used by flow_to_color's automatic mode.
double flow_magnitude_percentile(const FlowField& flow, double percentile);

}  // namespace sceneflow
