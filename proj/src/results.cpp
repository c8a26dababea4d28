#include "semibandit/results.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "semibandit/config.hpp"

#ifndef SEMIBANDIT_VERSION
#define SEMIBANDIT_VERSION "unknown"
#endif

namespace semibandit {

namespace fs = std::filesystem;

const char* code_version() { return SEMIBANDIT_VERSION; }

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw IoError("malformed number '" + s + "'");
  return x;
}

void ensure_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const fs::path probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out || !(out << "ok")) throw IoError("output directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("error while writing " + path.string());
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

void check_label(const std::string& s) {
  if (s.find_first_of(",\n\"") != std::string::npos) throw IoError("label '" + s + "' cannot be written to CSV");
}

}  // namespace

void write_raw_csv(const fs::path& path, std::span<const RegretCurve> curves) {
  auto out = open_out(path);
  out << "policy,setting,n_arms,dim,gamma_mult,rep,seed,t,cum_regret\n";
  std::string prefix;
  for (const auto& c : curves) {
    check_label(c.meta.policy);
    check_label(c.meta.setting);
    prefix = c.meta.policy + ',' + c.meta.setting + ',' + std::to_string(c.meta.n_arms) + ',' +
             std::to_string(c.meta.dim) + ',' + format_double(c.meta.gamma_mult) + ',' +
             std::to_string(c.meta.rep + 1) + ',' + std::to_string(c.meta.seed) + ',';
    for (std::size_t i = 0; i < c.steps.size(); ++i) {
      out << prefix << c.steps[i] << ',' << format_double(c.values[i]) << '\n';
    }
  }
  close_out(out, path);
}

void write_agg_csv(const fs::path& path, std::span<const AggregateBand> bands) {
  auto out = open_out(path);
  out << "policy,setting,gamma_mult,t,median,q1,q3\n";
  for (const auto& b : bands) {
    check_label(b.policy);
    check_label(b.setting);
    const std::string prefix = b.policy + ',' + b.setting + ',' + format_double(b.gamma_mult) + ',';
    for (std::size_t i = 0; i < b.steps.size(); ++i) {
      out << prefix << b.steps[i] << ',' << format_double(b.median[i]) << ',' << format_double(b.q1[i]) << ','
          << format_double(b.q3[i]) << '\n';
    }
  }
  close_out(out, path);
}

void write_summary_csv(const fs::path& path, std::span<const AggregateBand> bands, const ExperimentConfig& config) {
  std::map<std::string, const EnvironmentSpec*> envs;
  for (const auto& e : config.environments) envs[e.label()] = &e;
  auto out = open_out(path);
  out << "policy,n_arms,dim,setting,best_gamma,median_RT\n";
  for (const auto& b : best_bands(bands)) {
    const auto it = envs.find(b.setting);
    const std::size_t n = it == envs.end() ? 0 : it->second->n_arms;
    const std::size_t d = it == envs.end() ? 0 : it->second->dim;
    out << b.policy << ',' << n << ',' << d << ',' << b.setting << ',' << format_double(b.gamma_mult) << ','
        << format_double(b.median.back()) << '\n';
  }
  close_out(out, path);
}

void write_failures(const fs::path& path, std::span<const FailureRecord> failures) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& f : failures) {
    doc.push_back({{"policy", f.meta.policy},
                   {"setting", f.meta.setting},
                   {"gamma_mult", f.meta.gamma_mult},
                   {"rep", f.meta.rep + 1},
                   {"seed", f.meta.seed},
                   {"error", f.message}});
  }
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  close_out(out, path);
}

void write_run_json(const fs::path& path, const ExperimentConfig& config, const SweepResult& result,
                    const WarningLog* log) {
  nlohmann::json doc;
  doc["code_version"] = code_version();
  doc["config"] = config_to_json(config);
  nlohmann::json seeds = nlohmann::json::array();
  for (std::size_t e = 0; e < config.environments.size(); ++e)
    for (std::size_t r = 0; r < config.n_reps; ++r)
      seeds.push_back({{"setting", config.environments[e].label()},
                       {"rep", r + 1},
                       {"seed", replication_seed(config.master_seed, e, r)}});
  doc["replication_seeds"] = seeds;
  doc["curves"] = result.curves.size();
  doc["failures"] = result.failures.size();
  std::vector<std::string> warnings;
  if (log) warnings = log->messages();
  std::sort(warnings.begin(), warnings.end());
  doc["warnings"] = warnings;
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  close_out(out, path);
}

void write_results(const fs::path& dir, const SweepResult& result, std::span<const AggregateBand> bands,
                   const ExperimentConfig& config, const WarningLog* log) {
  ensure_writable(dir);
  write_raw_csv(dir / "raw.csv", result.curves);
  write_agg_csv(dir / "agg.csv", bands);
  write_summary_csv(dir / "summary.csv", bands, config);
  write_failures(dir / "failures.json", result.failures);
  write_run_json(dir / "run.json", config, result, log);
}

std::vector<AggregateBand> read_agg_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"policy", "setting", "gamma_mult",
                                                                                  "t", "median", "q1", "q3"}) {
    throw IoError(path.string() + " does not start with the agg.csv header");
  }
  std::vector<AggregateBand> bands;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected 7 fields");
    const double gamma = parse_double(f[2]);
    if (bands.empty() || bands.back().policy != f[0] || bands.back().setting != f[1] ||
        bands.back().gamma_mult != gamma) {
      AggregateBand b;
      b.policy = f[0];
      b.setting = f[1];
      b.gamma_mult = gamma;
      bands.push_back(std::move(b));
    }
    auto& b = bands.back();
    b.steps.push_back(static_cast<std::size_t>(std::stoull(f[3])));
    b.median.push_back(parse_double(f[4]));
    b.q1.push_back(parse_double(f[5]));
    b.q3.push_back(parse_double(f[6]));
  }
  // Grid position within each (policy, setting), in file order.
  std::map<std::pair<std::string, std::string>, std::size_t> next;
  for (auto& b : bands) b.gamma_index = next[{b.policy, b.setting}]++;
  return bands;
}

// ---------------------------------------------------------------------------
// SVG

namespace {

constexpr double kWidth = 820, kHeight = 500;
constexpr double kLeft = 80, kRight = 180, kTop = 50, kBottom = 60;

std::string fixed2(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string policy_color(const std::string& policy, std::size_t order) {
  static const std::map<std::string, std::string> known{
      {"GBOSE", "#d62728"}, {"TS", "#1f77b4"}, {"SemiTS", "#2ca02c"}, {"ActionTS", "#ff7f0e"}};
  static const char* palette[] = {"#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  if (auto it = known.find(policy); it != known.end()) return it->second;
  return palette[order % std::size(palette)];
}

std::string nice_label(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

std::string render_svg(std::span<const AggregateBand> bands, const std::string& title) {
  if (bands.empty()) throw std::invalid_argument("render_svg: no bands");
  double t_max = 1.0, y_max = 0.0;
  for (const auto& b : bands) {
    if (!b.steps.empty()) t_max = std::max(t_max, static_cast<double>(b.steps.back()));
    for (double v : b.q3) y_max = std::max(y_max, v);
    for (double v : b.median) y_max = std::max(y_max, v);
  }
  if (!(y_max > 0.0)) y_max = 1.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double t) { return kLeft + (t - 1.0) / std::max(1.0, t_max - 1.0) * plot_w; };
  auto sy = [&](double v) { return kTop + (1.0 - v / y_max) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fixed2(kLeft + plot_w / 2) << "\" y=\"25\" text-anchor=\"middle\" font-size=\"15\">"
      << xml_escape(title) << "</text>\n";

  // Axes with five ticks each.
  svg << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
  svg << "<line x1=\"" << fixed2(kLeft) << "\" y1=\"" << fixed2(kTop + plot_h) << "\" x2=\"" << fixed2(kLeft + plot_w)
      << "\" y2=\"" << fixed2(kTop + plot_h) << "\"/>\n";
  svg << "<line x1=\"" << fixed2(kLeft) << "\" y1=\"" << fixed2(kTop) << "\" x2=\"" << fixed2(kLeft) << "\" y2=\""
      << fixed2(kTop + plot_h) << "\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double t = 1.0 + (t_max - 1.0) * k / 4.0;
    const double v = y_max * k / 4.0;
    svg << "<line x1=\"" << fixed2(sx(t)) << "\" y1=\"" << fixed2(kTop + plot_h) << "\" x2=\"" << fixed2(sx(t))
        << "\" y2=\"" << fixed2(kTop + plot_h + 5) << "\"/>\n";
    svg << "<line x1=\"" << fixed2(kLeft - 5) << "\" y1=\"" << fixed2(sy(v)) << "\" x2=\"" << fixed2(kLeft)
        << "\" y2=\"" << fixed2(sy(v)) << "\"/>\n";
  }
  svg << "</g>\n<g class=\"tick-labels\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double t = 1.0 + (t_max - 1.0) * k / 4.0;
    const double v = y_max * k / 4.0;
    svg << "<text x=\"" << fixed2(sx(t)) << "\" y=\"" << fixed2(kTop + plot_h + 18)
        << "\" text-anchor=\"middle\">" << nice_label(std::round(t)) << "</text>\n";
    svg << "<text x=\"" << fixed2(kLeft - 8) << "\" y=\"" << fixed2(sy(v) + 4) << "\" text-anchor=\"end\">"
        << nice_label(v) << "</text>\n";
  }
  svg << "<text x=\"" << fixed2(kLeft + plot_w / 2) << "\" y=\"" << fixed2(kHeight - 15)
      << "\" text-anchor=\"middle\">t</text>\n";
  svg << "<text x=\"20\" y=\"" << fixed2(kTop + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << fixed2(kTop + plot_h / 2) << ")\">cumulative regret</text>\n</g>\n";

  auto path = [&](const AggregateBand& b, const Vector& values, const std::string& color, bool dashed,
                  const char* role) {
    svg << "<path class=\"" << role << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
        << (dashed ? "1" : "2") << '"';
    if (dashed) svg << " stroke-dasharray=\"5,4\"";
    svg << " d=\"";
    for (std::size_t i = 0; i < b.steps.size(); ++i) {
      svg << (i == 0 ? "M" : " L") << fixed2(sx(static_cast<double>(b.steps[i]))) << ',' << fixed2(sy(values[i]));
    }
    svg << "\"/>\n";
  };

  svg << "<g class=\"curves\">\n";
  for (std::size_t i = 0; i < bands.size(); ++i) {
    const auto color = policy_color(bands[i].policy, i);
    path(bands[i], bands[i].median, color, false, "median");
    path(bands[i], bands[i].q1, color, true, "q1");
    path(bands[i], bands[i].q3, color, true, "q3");
  }
  svg << "</g>\n<g class=\"legend\">\n";
  for (std::size_t i = 0; i < bands.size(); ++i) {
    const auto color = policy_color(bands[i].policy, i);
    const double y = kTop + 10 + 20.0 * static_cast<double>(i);
    const double x = kWidth - kRight + 20;
    svg << "<line x1=\"" << fixed2(x) << "\" y1=\"" << fixed2(y) << "\" x2=\"" << fixed2(x + 25) << "\" y2=\""
        << fixed2(y) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fixed2(x + 32) << "\" y=\"" << fixed2(y + 4) << "\">" << xml_escape(bands[i].policy)
        << " (γ×" << nice_label(bands[i].gamma_mult) << ")</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

std::vector<fs::path> render_figures(std::span<const AggregateBand> bands, const fs::path& dir) {
  if (bands.empty()) throw std::invalid_argument("render_figures: no bands");
  const auto best = best_bands(bands);
  std::vector<std::string> settings;
  for (const auto& b : best)
    if (std::find(settings.begin(), settings.end(), b.setting) == settings.end()) settings.push_back(b.setting);

  ensure_writable(dir);
  std::vector<fs::path> written;
  for (const auto& setting : settings) {
    std::vector<AggregateBand> group;
    for (const auto& b : best)
      if (b.setting == setting) group.push_back(b);
    std::string file = "regret_";
    for (char c : setting) file.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_');
    file += ".svg";
    const fs::path path = dir / file;
    auto out = open_out(path);
    out << render_svg(group, "Cumulative regret, " + setting + " (median solid, quartiles dashed)");
    close_out(out, path);
    written.push_back(path);
  }
  return written;
}

}  // namespace semibandit
