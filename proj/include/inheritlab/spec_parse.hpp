#pragma once

// "name:key=value,key=value" strings used by the registries and the CLI.

#include <map>
#include <string>

#include "inheritlab/errors.hpp"

namespace inheritlab {

struct ParsedSpec {
  std::string name;
  std::map<std::string, std::string> args;

  bool has(const std::string& key) const { return args.count(key) != 0; }
  double number(const std::string& key, double fallback) const {
    auto it = args.find(key);
    if (it == args.end()) return fallback;
    try {
      std::size_t used = 0;
      double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument(it->second);
      return v;
    } catch (const std::exception&) {
      throw InvalidInput("parameter '" + key + "' is not a number: '" + it->second + "'");
    }
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    auto it = args.find(key);
    return it == args.end() ? fallback : it->second;
  }
};

inline ParsedSpec parse_spec(const std::string& spec) {
  ParsedSpec out;
  auto colon = spec.find(':');
  out.name = spec.substr(0, colon);
  if (colon == std::string::npos) return out;
  std::string rest = spec.substr(colon + 1);
  std::size_t pos = 0;
  while (pos <= rest.size()) {
    auto comma = rest.find(',', pos);
    std::string item = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!item.empty()) {
      auto eq = item.find('=');
      if (eq == std::string::npos) throw InvalidInput("malformed parameter '" + item + "' in '" + spec + "'");
      out.args[item.substr(0, eq)] = item.substr(eq + 1);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace inheritlab
