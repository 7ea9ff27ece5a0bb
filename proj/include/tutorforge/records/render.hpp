#pragma once

#include <string>

#include "tutorforge/records/document.hpp"

namespace tutorforge::records {

/// Plain-text rendering for terminals. Hover explanations become indented
/// sub-lines starting with "> ".
std::string render_text(const ResponseDocument& doc);

}  // namespace tutorforge::records
