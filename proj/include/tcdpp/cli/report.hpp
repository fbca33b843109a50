#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tcdpp/core/errors.hpp"
#include "tcdpp/core/scalar.hpp"

namespace tcdpp::cli {

inline constexpr const char* kVersion = "0.1.0";

inline std::string flag(bool b) { return b ? "1" : "0"; }

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) {
    if (row.size() != header.size()) throw InvariantError("row width does not match the header");
    rows.push_back(std::move(row));
  }

  void write_csv(std::ostream& os) const {
    auto line = [&os](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        const auto& c = cells[i];
        if (c.find_first_of(",\"\n") == std::string::npos) {
          os << c;
        } else {
          os << '"';
          for (char ch : c) os << (ch == '"' ? "\"\"" : std::string(1, ch));
          os << '"';
        }
      }
      os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
  }

  std::string csv() const {
    std::ostringstream os;
    write_csv(os);
    return os.str();
  }
};

// Result of one suite: a table for the CSV plus the list of failed checks.
struct Outcome {
  std::string name;
  Table table;
  std::vector<std::string> failures;
  std::vector<std::pair<std::string, std::string>> summary;  // key facts for the manifest

  bool pass() const { return failures.empty(); }
  void fail(std::string why) { failures.push_back(std::move(why)); }
  void note(std::string key, std::string value) { summary.emplace_back(std::move(key), std::move(value)); }
};

// Numbers may be written as fractions, e.g. 1/256.
inline double parse_number(const std::string& key, const std::string& s) {
  auto one = [&](const std::string& t) {
    double x = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(x))
      throw UsageError("bad number for '" + key + "': " + s);
    return x;
  };
  auto slash = s.find('/');
  if (slash == std::string::npos) return one(s);
  double d = one(s.substr(slash + 1));
  if (d == 0) throw UsageError("zero denominator for '" + key + "'");
  return one(s.substr(0, slash)) / d;
}

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Flat key = value file; '#' starts a comment.
class Config {
 public:
  Config() = default;

  static Config parse(std::istream& is, const std::vector<std::string>& valid) {
    Config c;
    std::string line;
    std::size_t no = 0;
    while (std::getline(is, line)) {
      ++no;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      line = trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) throw UsageError("line " + std::to_string(no) + ": expected key = value");
      std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
      if (std::find(valid.begin(), valid.end(), k) == valid.end()) {
        std::string all;
        for (const auto& x : valid) all += (all.empty() ? "" : ", ") + x;
        throw UsageError("unknown key '" + k + "'; valid keys: " + all);
      }
      if (c.values_.count(k)) throw UsageError("duplicate key '" + k + "'");
      c.values_[k] = v;
      c.order_.push_back(k);
    }
    return c;
  }

  static Config load(const std::string& path, const std::vector<std::string>& valid) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config " + path);
    return parse(in, valid);
  }

  bool has(const std::string& k) const { return values_.count(k) > 0; }
  void set(const std::string& k, const std::string& v) {
    if (!has(k)) order_.push_back(k);
    values_[k] = v;
  }
  std::string text(const std::string& k, const std::string& def) const { return has(k) ? values_.at(k) : def; }
  double number(const std::string& k, double def) const { return has(k) ? parse_number(k, values_.at(k)) : def; }

  std::size_t count(const std::string& k, std::size_t def) const {
    double x = number(k, static_cast<double>(def));
    if (x < 0 || x != std::floor(x)) throw UsageError("'" + k + "' must be a nonnegative integer");
    return static_cast<std::size_t>(x);
  }

  std::vector<double> numbers(const std::string& k, std::vector<double> def) const {
    if (!has(k)) return def;
    std::vector<double> out;
    for (const auto& t : list(k)) out.push_back(parse_number(k, t));
    return out;
  }

  std::vector<std::string> list(const std::string& k) const {
    std::vector<std::string> out;
    std::stringstream ss(values_.at(k));
    std::string t;
    while (std::getline(ss, t, ',')) {
      t = trim(t);
      if (!t.empty()) out.push_back(t);
    }
    return out;
  }

  std::uint64_t seed() const {
    if (!has("seed")) throw UsageError("a seed is required");
    const auto& s = values_.at("seed");
    std::uint64_t x = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) throw UsageError("bad seed: " + s);
    return x;
  }

  // In file order.
  std::vector<std::pair<std::string, std::string>> entries() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : order_) out.emplace_back(k, values_.at(k));
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

// "name:arg" splitter for selector values like ball_exit:0.5.
inline std::pair<std::string, std::string> selector(const std::string& s) {
  auto c = s.find(':');
  if (c == std::string::npos) return {s, ""};
  return {s.substr(0, c), s.substr(c + 1)};
}

struct Series {
  std::string label;
  std::vector<double> x, y;
  std::string color = "#1f77b4";
};

// Minimal line plot. Optional output, never read back.
inline void write_svg(std::ostream& os, const std::string& title, const std::vector<Series>& series) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]), x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]), y1 = std::max(y1, s.y[i]);
    }
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  const double W = 640, H = 400, m = 50;
  auto px = [&](double x) { return m + (x - x0) / (x1 - x0) * (W - 2 * m); };
  auto py = [&](double y) { return H - m - (y - y0) / (y1 - y0) * (H - 2 * m); };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<text x=\"" << m << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
  os << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << W - 2 * m << "\" height=\"" << H - 2 * m
     << "\" fill=\"none\" stroke=\"#888\"/>\n";
  os << "<text x=\"" << m << "\" y=\"" << H - 20 << "\" font-size=\"11\">" << format_double(x0) << "</text>\n";
  os << "<text x=\"" << W - m << "\" y=\"" << H - 20 << "\" font-size=\"11\" text-anchor=\"end\">"
     << format_double(x1) << "</text>\n";
  os << "<text x=\"4\" y=\"" << H - m << "\" font-size=\"11\">" << format_double(y0) << "</text>\n";
  os << "<text x=\"4\" y=\"" << m + 10 << "\" font-size=\"11\">" << format_double(y1) << "</text>\n";
  double ly = m + 16;
  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) os << (i ? " " : "") << px(s.x[i]) << ',' << py(s.y[i]);
    os << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size() && s.x.size() < 40; ++i)
      os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
    os << "<text x=\"" << W - m - 120 << "\" y=\"" << ly << "\" font-size=\"12\" fill=\"" << s.color << "\">"
       << s.label << "</text>\n";
    ly += 16;
  }
  os << "</svg>\n";
}

}  // namespace tcdpp::cli
