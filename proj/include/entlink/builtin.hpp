#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace entlink::harness {

enum class BuiltinKind { Scenario, Sweep, Plan };

struct BuiltinFile {
  std::string_view name;
  BuiltinKind kind;
  std::string_view text;
};

/// Files from scenarios/ compiled into the binary.
std::span<const BuiltinFile> builtin_files();
std::optional<std::string_view> builtin_text(BuiltinKind kind, std::string_view name);

/// Text of a built-in with that name, otherwise the contents of the file at
/// `name_or_path`.
std::string resolve_input(BuiltinKind kind, std::string_view name_or_path);

}  // namespace entlink::harness
