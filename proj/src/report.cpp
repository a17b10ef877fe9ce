#include "fpld/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include "fpld/config.hpp"
#include "fpld/error.hpp"

namespace fpld {

std::string csv_text(const std::vector<ResultRow>& rows, bool with_suboptimality) {
  std::ostringstream out;
  out << "experiment_id,sweep_name,sweep_value,policy,seed,kl,upper_bound,lower_bound";
  if (with_suboptimality) out << ",suboptimality_ratio";
  out << '\n';
  for (const ResultRow& r : rows) {
    out << r.experiment_id << ',' << r.sweep_name << ',' << format_double(r.sweep_value) << ','
        << r.policy << ',' << r.seed << ',' << format_double(r.kl) << ','
        << format_double(r.upper_bound) << ',' << format_double(r.lower_bound);
    if (with_suboptimality) out << ',' << format_double(r.suboptimality_ratio);
    out << '\n';
  }
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

std::string manifest_text(const std::string& subcommand, const std::string& config_path,
                          const std::string& output_dir, const std::string& resolved) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  std::ostringstream out;
  out << "# fpld run manifest\n"
      << "# subcommand: " << subcommand << '\n'
      << "# tool_version: " << kToolVersion << '\n'
      << "# timestamp: " << stamp << '\n'
      << "# config: " << (config_path.empty() ? "(flags only)" : config_path) << '\n'
      << "# output_dir: " << output_dir << '\n'
      << "[resolved]\n"
      << resolved;
  return out.str();
}

namespace {

struct Series {
  std::vector<double> x, y, err;
};

const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

}  // namespace

std::string svg_plot(const std::vector<PointSummary>& points, const std::string& sweep_name,
                     const std::string& title) {
  std::map<std::string, Series> series;
  Series upper, lower;
  for (const PointSummary& p : points) {
    if (p.sweep_name != sweep_name) continue;
    auto& s = series[p.policy];
    s.x.push_back(p.sweep_value);
    s.y.push_back(p.mean);
    s.err.push_back(p.stderr_);
    if (std::isfinite(p.upper_bound) && p.upper_bound > 0) {
      upper.x.push_back(p.sweep_value);
      upper.y.push_back(p.upper_bound);
    }
    if (std::isfinite(p.lower_bound) && p.lower_bound > 0) {
      lower.x.push_back(p.sweep_value);
      lower.y.push_back(p.lower_bound);
    }
  }
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  auto extend = [&](const Series& s) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      if (s.y[i] > 0) {
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
    }
  };
  for (const auto& [name, s] : series) extend(s);
  extend(upper);
  extend(lower);
  if (!(xmax > xmin)) xmax = xmin + 1;
  if (!(ymax > ymin)) ymax = ymin * 10 + 1e-300;

  const double W = 640, H = 420, left = 70, right = 160, top = 40, bottom = 50;
  const double ly0 = std::log10(ymin), ly1 = std::log10(ymax);
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (W - left - right); };
  auto py = [&](double y) {
    const double t = (std::log10(std::max(y, ymin)) - ly0) / std::max(ly1 - ly0, 1e-12);
    return H - bottom - t * (H - top - bottom);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n"
      << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right
      << "\" y2=\"" << H - bottom << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << H - bottom << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << (W - right + left) / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\">" << sweep_name << "</text>\n";
  for (int d = static_cast<int>(std::floor(ly0)); d <= static_cast<int>(std::ceil(ly1)); ++d) {
    const double y = std::pow(10.0, d);
    if (y < ymin * 0.999 || y > ymax * 1.001) continue;
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">1e" << d
        << "</text>\n";
  }
  auto polyline = [&](const Series& s, const char* color, const char* dash) {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-dasharray=\"" << dash
        << "\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    out << "\"/>\n";
  };
  int k = 0;
  double legend_y = top + 10;
  auto legend = [&](const std::string& name, const char* color) {
    out << "<line x1=\"" << W - right + 10 << "\" y1=\"" << legend_y << "\" x2=\""
        << W - right + 30 << "\" y2=\"" << legend_y << "\" stroke=\"" << color << "\"/>\n"
        << "<text x=\"" << W - right + 36 << "\" y=\"" << legend_y + 4 << "\">" << name
        << "</text>\n";
    legend_y += 18;
  };
  for (const auto& [name, s] : series) {
    const char* color = kColors[k++ % 6];
    polyline(s, color, "none");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << "<line x1=\"" << px(s.x[i]) << "\" y1=\"" << py(s.y[i] - s.err[i]) << "\" x2=\""
          << px(s.x[i]) << "\" y2=\"" << py(s.y[i] + s.err[i]) << "\" stroke=\"" << color
          << "\"/>\n";
    }
    legend(name, color);
  }
  if (!upper.x.empty()) {
    polyline(upper, "#555555", "6,3");
    legend("upper bound", "#555555");
  }
  if (!lower.x.empty()) {
    polyline(lower, "#999999", "2,3");
    legend("lower bound", "#999999");
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace fpld
