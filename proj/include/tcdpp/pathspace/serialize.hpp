#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tcdpp/core/scalar.hpp"
#include "tcdpp/pathspace/path.hpp"

namespace tcdpp {

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline std::string header_value(const std::string& line, const std::string& key) {
  for (const auto& tok : split(line, ' ')) {
    auto eq = tok.find('=');
    if (eq != std::string::npos && tok.substr(0, eq) == key) return tok.substr(eq + 1);
  }
  throw Error("path header lacks '" + key + "'");
}

}  // namespace detail

// Header line, then one CSV row (k, t_k, v_1..v_d) per grid index. Numbers
// use the shortest round-trip form, so reading back is bit-exact.
inline void write_path_csv(std::ostream& os, const Path& p) {
  os << "# path step=" << format_double(p.grid().step()) << " steps=" << p.grid().steps() << " components=";
  for (std::size_t ci = 0; ci < p.components(); ++ci) {
    const auto& c = p.component(ci);
    if (ci) os << ';';
    os << kind_name(c.kind) << ':' << c.dim;
    if (c.nondecreasing) os << ":nd";
    if (c.kind == PathKind::ControlClass) os << ":L" << c.labels << ":N" << format_double(c.neutral);
  }
  os << '\n' << "k,t_k";
  for (std::size_t i = 1; i <= p.dim(); ++i) os << ",v_" << i;
  os << '\n';
  for (std::size_t k = 0; k < p.grid().size(); ++k) {
    os << k << ',' << format_double(p.grid().time(k));
    for (std::size_t i = 0; i < p.dim(); ++i) os << ',' << format_double(p(k, i));
    os << '\n';
  }
}

inline Path read_path_csv(std::istream& is) {
  std::string header, cols, line;
  if (!std::getline(is, header) || header.rfind("# path", 0) != 0) throw Error("missing path header");
  std::getline(is, cols);
  TimeGrid g(parse_double(detail::header_value(header, "step")),
             std::stoul(detail::header_value(header, "steps")));
  std::vector<Component> comps;
  for (const auto& spec : detail::split(detail::header_value(header, "components"), ';')) {
    auto parts = detail::split(spec, ':');
    if (parts.size() < 2) throw Error("bad component spec '" + spec + "'");
    Component c;
    c.kind = parse_kind(parts[0]);
    c.dim = std::stoul(parts[1]);
    for (std::size_t i = 2; i < parts.size(); ++i) {
      if (parts[i] == "nd") c.nondecreasing = true;
      else if (parts[i][0] == 'L') c.labels = std::stoul(parts[i].substr(1));
      else if (parts[i][0] == 'N') c.neutral = parse_double(parts[i].substr(1));
    }
    comps.push_back(std::move(c));
  }
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!std::getline(is, line)) throw Error("path CSV truncated");
    auto f = detail::split(line, ',');
    std::size_t col = 2;
    for (auto& c : comps)
      for (std::size_t i = 0; i < c.dim; ++i) c.values.push_back(parse_double(f.at(col++)));
  }
  return Path(g, std::move(comps));
}

inline std::string to_csv(const Path& p) {
  std::ostringstream os;
  write_path_csv(os, p);
  return os.str();
}

inline Path path_from_csv(const std::string& s) {
  std::istringstream is(s);
  return read_path_csv(is);
}

}  // namespace tcdpp
