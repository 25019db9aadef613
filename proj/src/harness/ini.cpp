#include "ini.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <charconv>
#include <sstream>

namespace entlink::harness::ini {

Tree parse(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) throw ParseError("empty file", 0);
  Tree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(e.message(), e.line());
  }
  return tree;
}

double to_double(std::string_view value, const std::string& field) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end || value.empty())
    throw ValidationError("field '" + field + "': expected a number, got '" + std::string(value) + "'");
  return out;
}

std::uint64_t to_uint(std::string_view value, const std::string& field) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end || value.empty())
    throw ValidationError("field '" + field + "': expected a nonnegative integer, got '" +
                          std::string(value) + "'");
  return out;
}

}  // namespace entlink::harness::ini
