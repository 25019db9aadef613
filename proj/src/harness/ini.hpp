#pragma once

// Small helpers shared by the INI-based file formats (scenarios, sweeps,
// plan specs): boost property_tree does the parsing, these add strict
// value conversion and unknown-key rejection.

#include <boost/property_tree/ptree.hpp>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace entlink::harness::ini {

using Tree = boost::property_tree::ptree;

Tree parse(std::string_view text);

double to_double(std::string_view value, const std::string& field);
std::uint64_t to_uint(std::string_view value, const std::string& field);

template <typename T>
struct Field {
  std::string section;  // "" for top-level keys
  std::string key;
  std::function<void(T&, std::string_view, const std::string&)> set;
  std::function<std::string(const T&)> get;

  std::string path() const { return section.empty() ? key : section + "." + key; }
};

template <typename T, typename Member>
Field<T> number(std::string section, std::string key, Member T::*m);

// Applies every key in `tree` through `fields`; unknown sections or keys
// raise ValidationError naming them.
template <typename T>
void apply(const Tree& tree, const std::vector<Field<T>>& fields, T& out);

template <typename T>
std::string write(const std::vector<Field<T>>& fields, const T& value);

}  // namespace entlink::harness::ini

#include "ini_impl.hpp"
