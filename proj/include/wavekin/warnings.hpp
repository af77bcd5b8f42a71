#pragma once

#include <functional>
#include <string>

namespace wavekin {

// Process-wide sink for non-fatal diagnostics (regularized singular nodes,
// untrusted approximations, ...). Default handler writes to stderr.
void warn(const std::string& message);
void set_warning_handler(std::function<void(const std::string&)> handler);

} // namespace wavekin
