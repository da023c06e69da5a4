#include "report_io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace approx::cli {

std::string format_shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void CsvWriter::add_row(std::vector<Cell> cells) {
  if (cells.size() != columns_.size())
    throw std::invalid_argument("CsvWriter: row width mismatch");
  rows_.push_back(std::move(cells));
}

std::string CsvWriter::text() const {
  std::ostringstream os;
  os << "# " << note_ << "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
  os << "\n";
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ",";
      if (std::holds_alternative<double>(row[i]))
        os << format_shortest(std::get<double>(row[i]));
      else if (std::holds_alternative<long long>(row[i]))
        os << std::get<long long>(row[i]);
      else
        os << std::get<std::string>(row[i]);
    }
    os << "\n";
  }
  return os.str();
}

void CsvWriter::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text();
}

namespace {

struct AxisScale {
  double lo = 0.0, hi = 1.0;
  double to_px(double v, double px_lo, double px_hi) const {
    const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
    return px_lo + t * (px_hi - px_lo);
  }
};

AxisScale fit_axis(const std::vector<SvgSeries>& series, bool is_x) {
  AxisScale ax;
  bool first = true;
  for (const auto& s : series) {
    const auto& vs = is_x ? s.xs : s.ys;
    for (double v : vs) {
      if (!std::isfinite(v)) continue;
      if (first) {
        ax.lo = ax.hi = v;
        first = false;
      } else {
        ax.lo = std::min(ax.lo, v);
        ax.hi = std::max(ax.hi, v);
      }
    }
  }
  if (first) return ax;
  if (ax.hi == ax.lo) {
    ax.lo -= 0.5;
    ax.hi += 0.5;
  }
  const double pad = 0.05 * (ax.hi - ax.lo);
  ax.lo -= pad;
  ax.hi += pad;
  return ax;
}

}  // namespace

void write_svg_lines(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series) {
  const double w = 720, h = 480;
  const double ml = 70, mr = 20, mt = 40, mb = 50;
  const AxisScale ax = fit_axis(series, true);
  const AxisScale ay = fit_axis(series, false);

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  os << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
     << "</text>\n";

  // Axes and ticks.
  os << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
     << h - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double tx = ax.lo + (ax.hi - ax.lo) * i / 5.0;
    const double px = ax.to_px(tx, ml, w - mr);
    os << "<line x1=\"" << px << "\" y1=\"" << h - mb << "\" x2=\"" << px << "\" y2=\""
       << h - mb + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px << "\" y=\"" << h - mb + 20
       << "\" text-anchor=\"middle\" font-size=\"11\">" << format_shortest(tx) << "</text>\n";
    const double ty = ay.lo + (ay.hi - ay.lo) * i / 5.0;
    const double py = ay.to_px(ty, h - mb, mt);
    os << "<line x1=\"" << ml - 5 << "\" y1=\"" << py << "\" x2=\"" << ml << "\" y2=\"" << py
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << py + 4
       << "\" text-anchor=\"end\" font-size=\"11\">" << format_shortest(ty) << "</text>\n";
  }
  os << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 12
     << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
  os << "<text x=\"16\" y=\"" << (mt + h - mb) / 2
     << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
     << (mt + h - mb) / 2 << ")\">" << y_label << "</text>\n";

  // Series polylines plus a small legend.
  double legend_y = mt + 10;
  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
      os << ax.to_px(s.xs[i], ml, w - mr) << "," << ay.to_px(s.ys[i], h - mb, mt) << " ";
    }
    os << "\"/>\n";
    os << "<rect x=\"" << w - mr - 150 << "\" y=\"" << legend_y - 9
       << "\" width=\"12\" height=\"12\" fill=\"" << s.color << "\"/>\n";
    os << "<text x=\"" << w - mr - 132 << "\" y=\"" << legend_y + 2 << "\" font-size=\"12\">"
       << s.name << "</text>\n";
    legend_y += 18;
  }
  os << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << os.str();
}

std::uint64_t fnv1a_64(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return fnv1a_64(buf.str());
}

namespace {
std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}
}  // namespace

RunManifest::RunManifest(std::string tool_version, std::string config_toml)
    : tool_version_(std::move(tool_version)), config_toml_(std::move(config_toml)) {}

void RunManifest::add_stage(const std::string& name, double milliseconds) {
  stages_.emplace_back(name, milliseconds);
}

void RunManifest::add_output(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("manifest: missing output " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  outputs_.push_back({path, bytes.size(), hex64(fnv1a_64(bytes))});
}

void RunManifest::set_outcome(int exit_code, const std::vector<std::string>& failures) {
  exit_code_ = exit_code;
  failures_ = failures;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["tool_version"] = tool_version_;
  j["config_toml"] = config_toml_;
  j["exit_code"] = exit_code_;
  j["failures"] = failures_;
  j["stages"] = nlohmann::json::array();
  for (const auto& [name, ms] : stages_) j["stages"].push_back({{"name", name}, {"ms", ms}});
  j["outputs"] = nlohmann::json::array();
  for (const auto& o : outputs_)
    j["outputs"].push_back({{"path", o.path}, {"bytes", o.bytes}, {"fnv64", o.fnv64_hex}});
  return j;
}

void RunManifest::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json().dump(2) << "\n";
}

int verify_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) {
    std::fprintf(stderr, "verify: cannot open %s\n", manifest_path.c_str());
    return 2;
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "verify: bad manifest: %s\n", e.what());
    return 2;
  }
  int rc = 0;
  for (const auto& o : j.at("outputs")) {
    const std::string path = o.at("path").get<std::string>();
    const std::string want = o.at("fnv64").get<std::string>();
    try {
      const std::string got = hex64(fnv1a_file(path));
      if (got != want) {
        std::fprintf(stderr, "verify: hash mismatch for %s (want %s, got %s)\n", path.c_str(),
                     want.c_str(), got.c_str());
        rc = 2;
      } else {
        std::printf("verify: ok %s\n", path.c_str());
      }
    } catch (const std::exception& e) {
      std::fprintf(stderr, "verify: %s\n", e.what());
      rc = 2;
    }
  }
  return rc;
}

StageTimer::StageTimer()
    : start_ns_(static_cast<std::uint64_t>(
          std::chrono::duration_cast<std::chrono::nanoseconds>(
              std::chrono::steady_clock::now().time_since_epoch())
              .count())) {}

double StageTimer::elapsed_ms() const {
  const auto now = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::steady_clock::now().time_since_epoch())
          .count());
  return static_cast<double>(now - start_ns_) / 1e6;
}

}  // namespace approx::cli
