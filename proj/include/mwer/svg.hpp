#pragma once

#include "mwer/streaming.hpp"

#include <string>
#include <vector>

namespace mwer {

// One row per partial alignment: words as dots at their center time,
// colored by category, with a tick at audio_sent.
std::string diagram_svg(const std::vector<PartialAlignmentRow>& rows);

// Stacked per-bin category fractions.
std::string histogram_svg(const StreamingHistogram& histogram);

} // namespace mwer
