#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pia::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Named properties accepted wherever a formula is expected.
const std::map<std::string, std::string>& property_registry();

/// Registry text for `name_or_text`, or the argument itself.
std::string resolve_property(const std::string& name_or_text);

/// Exit code for an exception: 2 config, 3 unsupported fragment,
/// 4 resource cap, 1 otherwise.
int exit_code_for(const std::exception& e);

/// Runs one command; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pia::cli
