#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "spde4/errors.hpp"

namespace spde4::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <class T>
T parse_integer(const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ValidationError("expected an integer, got '" + text + "'");
  return value;
}

double parse_real(const std::string& text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ValidationError("expected a finite number, got '" + text + "'");
  }
  return value;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::string real_text(double v) { return fmt::format("{:.17g}", v); }

template <class T>
std::string join(const std::vector<T>& v, const std::function<std::string(const T&)>& f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += f(v[i]);
  }
  return out;
}

struct Key {
  std::string section;
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Key integer_key(std::string section, std::string name, T RunConfig::*member) {
  return {std::move(section), std::move(name),
          [member](RunConfig& c, const std::string& v) { c.*member = parse_integer<T>(v); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

Key real_key(std::string section, std::string name, double RunConfig::*member) {
  return {std::move(section), std::move(name),
          [member](RunConfig& c, const std::string& v) { c.*member = parse_real(v); },
          [member](const RunConfig& c) { return real_text(c.*member); }};
}

Key word_key(std::string section, std::string name, std::string RunConfig::*member) {
  return {std::move(section), std::move(name), [member](RunConfig& c, const std::string& v) { c.*member = v; },
          [member](const RunConfig& c) { return c.*member; }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back(integer_key("problem", "d", &RunConfig::d));
    k.push_back(real_key("problem", "T", &RunConfig::T));
    k.push_back({"problem", "w0",
                 [](RunConfig& c, const std::string& v) {
                   c.w0_mode.clear();
                   for (const auto& item : split_list(v)) c.w0_mode.push_back(parse_integer<int>(item));
                 },
                 [](const RunConfig& c) {
                   return join<int>(c.w0_mode, [](const int& i) { return std::to_string(i); });
                 }});
    k.push_back(integer_key("grids", "n_star", &RunConfig::n_star));
    k.push_back(integer_key("grids", "j_star", &RunConfig::j_star));
    k.push_back(integer_key("grids", "degree", &RunConfig::degree));
    k.push_back(integer_key("grids", "elements", &RunConfig::elements));
    k.push_back(integer_key("grids", "steps", &RunConfig::steps));
    k.push_back(integer_key("grids", "cutoff", &RunConfig::cutoff));
    k.push_back(word_key("sweep", "parameter", &RunConfig::parameter));
    k.push_back({"sweep", "values",
                 [](RunConfig& c, const std::string& v) {
                   c.values.clear();
                   for (const auto& item : split_list(v)) c.values.push_back(parse_real(item));
                 },
                 [](const RunConfig& c) { return join<double>(c.values, [](const double& x) { return real_text(x); }); }});
    k.push_back(word_key("mode", "kind", &RunConfig::kind));
    k.push_back(integer_key("mode", "replicates", &RunConfig::replicates));
    k.push_back(integer_key("mode", "bootstrap_resamples", &RunConfig::bootstrap_resamples));
    k.push_back(integer_key("mode", "workers", &RunConfig::workers));
    k.push_back(integer_key("seeds", "master", &RunConfig::master));
    k.push_back(integer_key("guards", "dof_threshold", &RunConfig::dof_threshold));
    k.push_back(integer_key("guards", "eigen_threshold", &RunConfig::eigen_threshold));
    k.push_back(real_key("guards", "iterative_tolerance", &RunConfig::iterative_tolerance));
    k.push_back(integer_key("guards", "max_quadrature_points", &RunConfig::max_quadrature_points));
    k.push_back(word_key("output", "directory", &RunConfig::directory));
    return k;
  }();
  return table;
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig config;
  std::map<std::pair<std::string, std::string>, const Key*> lookup;
  std::set<std::string> sections;
  for (const auto& k : keys()) {
    lookup[{k.section, k.name}] = &k;
    sections.insert(k.section);
  }
  std::set<std::pair<std::string, std::string>> seen;
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto fail = [&](const std::string& what) {
      throw ValidationError(fmt::format("{}:{}: {}", source, line_no, what));
    };
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!sections.count(section)) fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    if (section.empty()) fail("key outside any section");
    const std::string name = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto it = lookup.find({section, name});
    if (it == lookup.end()) fail("unknown key '" + name + "' in [" + section + "]");
    if (!seen.insert({section, name}).second) fail("repeated key '" + name + "'");
    try {
      it->second->set(config, value);
    } catch (const ValidationError& e) {
      fail(name + ": " + e.what());
    }
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path);
  return parse_config(in, path);
}

std::string to_ini(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& k : keys()) {
    if (k.section != section) {
      if (!section.empty()) out += "\n";
      section = k.section;
      out += "[" + section + "]\n";
    }
    const std::string v = k.get(config);
    out += v.empty() ? k.name + " =\n" : k.name + " = " + v + "\n";
  }
  return out;
}

}  // namespace spde4::cli
