#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "srd/common.hpp"

namespace srd {

/// 12 significant digits, "." decimal point, independent of the locale.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), width_(header.size()) {
    write(header);
  }

  void write(const std::vector<std::string>& fields) {
    if (fields.size() != width_) throw std::logic_error("CsvWriter: row width does not match header");
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << quote(fields[i]);
    }
    out_ << '\n';
  }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  }

  std::ostream& out_;
  std::size_t width_;
};

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw domain_error("not a number: '" + s + "'");
  return v;
}

/// Grid specs: "lin:a:b:n", "log:a:b:n" (log-spaced, a, b > 0) or an
/// explicit comma-separated list.
inline std::vector<double> parse_grid(const std::string& spec) {
  if (spec.rfind("lin:", 0) == 0 || spec.rfind("log:", 0) == 0) {
    const auto parts = split(spec, ':');
    if (parts.size() != 4) throw domain_error("grid spec must look like lin:a:b:n or log:a:b:n");
    const double a = parse_double(parts[1]);
    const double b = parse_double(parts[2]);
    const double nd = parse_double(parts[3]);
    const int n = static_cast<int>(nd);
    if (n < 1 || nd != n) throw domain_error("grid point count must be a positive integer");
    const bool log = parts[0] == "log";
    if (log && !(a > 0.0 && b > 0.0)) throw domain_error("log grid ends must be > 0");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
      const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
      g[i] = log ? std::exp(std::log(a) + t * (std::log(b) - std::log(a))) : a + t * (b - a);
    }
    if (n > 1) g.back() = b;
    return g;
  }
  std::vector<double> g;
  for (const auto& item : split(spec, ',')) g.push_back(parse_double(item));
  if (g.empty()) throw domain_error("empty grid");
  return g;
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string tool_version;
  std::string timestamp;
  std::vector<std::pair<std::string, std::string>> config;  // canonical, sorted by key
};

inline RunManifest make_manifest(std::string command, std::vector<std::pair<std::string, std::string>> config,
                                 std::uint64_t seed, std::string version) {
  std::sort(config.begin(), config.end());
  std::string canonical = command + '\n';
  for (const auto& [k, v] : config) canonical += k + '=' + v + '\n';
  return {std::move(command), hex64(fnv1a(canonical)), seed, std::move(version), utc_timestamp(),
          std::move(config)};
}

/// key=value lines; the config block can be fed back through --config.
inline void write_manifest(std::ostream& out, const RunManifest& m) {
  out << "# run manifest\n";
  out << "command=" << m.command << '\n';
  out << "config_hash=" << m.config_hash << '\n';
  out << "seed=" << m.seed << '\n';
  out << "tool_version=" << m.tool_version << '\n';
  out << "timestamp=" << m.timestamp << '\n';
  out << "# configuration\n";
  for (const auto& [k, v] : m.config) out << k << '=' << v << '\n';
}

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// Minimal line plot; axes are linear unless log_x / log_y is set.
inline void write_svg(std::ostream& out, const std::vector<SvgSeries>& series, const std::string& x_label,
                      const std::string& y_label, bool log_x = false, bool log_y = false) {
  const double w = 640;
  const double h = 420;
  const double ml = 70;
  const double mr = 150;
  const double mt = 20;
  const double mb = 50;
  auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      if ((log_x && x <= 0) || (log_y && y <= 0) || !std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, tx(x));
      x1 = std::max(x1, tx(x));
      y0 = std::min(y0, ty(y));
      y1 = std::max(y1, ty(y));
    }
  if (!(x1 > x0)) { x0 -= 1; x1 += 1; }
  if (!(y1 > y0)) { y0 -= 1; y1 += 1; }
  auto px = [&](double x) { return ml + (tx(x) - x0) / (x1 - x0) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (ty(y) - y0) / (y1 - y0) * (h - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << (w - ml - mr) << "\" height=\""
      << (h - mt - mb) << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (ml + (w - ml - mr) / 2) << "\" y=\"" << (h - 12)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << (mt + (h - mt - mb) / 2) << "\" font-size=\"13\" transform=\"rotate(-90 16 "
      << (mt + (h - mt - mb) / 2) << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
  auto tick = [&](double v, bool log) { return format_number(log ? std::pow(10.0, v) : v); };
  out << "<text x=\"" << ml << "\" y=\"" << (h - mb + 16) << "\" font-size=\"11\">" << tick(x0, log_x) << "</text>\n";
  out << "<text x=\"" << (w - mr) << "\" y=\"" << (h - mb + 16) << "\" font-size=\"11\" text-anchor=\"end\">"
      << tick(x1, log_x) << "</text>\n";
  out << "<text x=\"" << (ml - 4) << "\" y=\"" << (h - mb) << "\" font-size=\"11\" text-anchor=\"end\">"
      << tick(y0, log_y) << "</text>\n";
  out << "<text x=\"" << (ml - 4) << "\" y=\"" << (mt + 10) << "\" font-size=\"11\" text-anchor=\"end\">"
      << tick(y1, log_y) << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = colors[i % 7];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : series[i].points) {
      if ((log_x && x <= 0) || (log_y && y <= 0) || !std::isfinite(x) || !std::isfinite(y)) continue;
      out << format_number(px(x)) << ',' << format_number(py(y)) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << (w - mr + 10) << "\" y=\"" << (mt + 16 + 18 * i) << "\" font-size=\"12\" fill=\""
        << color << "\">" << series[i].label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace srd
