#include "entlink/builtin.hpp"

#include <fstream>
#include <sstream>

#include "entlink/errors.hpp"

namespace entlink::harness {

// Generated from scenarios/ at configure time.
extern const BuiltinFile kBuiltinFiles[];
extern const std::size_t kBuiltinCount;

std::span<const BuiltinFile> builtin_files() { return {kBuiltinFiles, kBuiltinCount}; }

std::optional<std::string_view> builtin_text(BuiltinKind kind, std::string_view name) {
  for (const auto& f : builtin_files())
    if (f.kind == kind && f.name == name) return f.text;
  return std::nullopt;
}

std::string resolve_input(BuiltinKind kind, std::string_view name_or_path) {
  if (auto text = builtin_text(kind, name_or_path)) return std::string(*text);
  std::ifstream in{std::string(name_or_path)};
  if (!in) throw ValidationError("no built-in named '" + std::string(name_or_path) + "' and no such file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace entlink::harness
