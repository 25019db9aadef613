#pragma once

#include <map>
#include <sstream>

#include "entlink/errors.hpp"
#include "entlink/format.hpp"

namespace entlink::harness::ini {

template <typename T, typename Member>
Field<T> number(std::string section, std::string key, Member T::*m) {
  Field<T> f;
  f.section = std::move(section);
  f.key = std::move(key);
  f.set = [m](T& t, std::string_view v, const std::string& path) {
    if constexpr (std::is_same_v<Member, double>) t.*m = to_double(v, path);
    else if constexpr (std::is_same_v<Member, std::uint64_t>) t.*m = to_uint(v, path);
    else t.*m = std::string(v);
  };
  f.get = [m](const T& t) {
    if constexpr (std::is_same_v<Member, double>) return format_number(t.*m);
    else if constexpr (std::is_same_v<Member, std::uint64_t>) return std::to_string(t.*m);
    else return std::string(t.*m);
  };
  return f;
}

template <typename T>
void apply(const Tree& tree, const std::vector<Field<T>>& fields, T& out) {
  std::map<std::string, const Field<T>*> index;
  std::map<std::string, bool> sections;
  for (const auto& f : fields) {
    index[f.path()] = &f;
    if (!f.section.empty()) sections[f.section] = true;
  }
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      const auto it = index.find(name);
      if (it == index.end() || !it->second->section.empty())
        throw ValidationError("unknown key '" + name + "'");
      it->second->set(out, node.data(), name);
      continue;
    }
    if (!sections.count(name)) throw ValidationError("unknown section [" + name + "]");
    for (const auto& [key, leaf] : node) {
      const std::string path = name + "." + key;
      const auto it = index.find(path);
      if (it == index.end()) throw ValidationError("unknown key '" + key + "' in [" + name + "]");
      it->second->set(out, leaf.data(), path);
    }
  }
}

template <typename T>
std::string write(const std::vector<Field<T>>& fields, const T& value) {
  std::ostringstream out;
  std::string current;
  for (const auto& f : fields) {
    if (f.section != current) {
      current = f.section;
      out << "\n[" << current << "]\n";
    }
    out << f.key << " = " << f.get(value) << '\n';
  }
  return out.str();
}

}  // namespace entlink::harness::ini
