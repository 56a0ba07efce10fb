#pragma once

#include <functional>
#include <string>

namespace vct {

using WarningHandler = std::function<void(const std::string&)>;

/// Installs the sink for non-fatal warnings and returns the previous one.
/// The default sink writes "warning: <msg>" to stderr. Passing an empty
/// handler restores the default.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(const std::string& message);

}  // namespace vct
