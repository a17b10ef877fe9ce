#include "fpld/config.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fpld/error.hpp"

namespace fpld {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(',');
    out.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

template <class T, class Fn>
std::string join(const std::vector<T>& xs, Fn fmt) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ',';
    out += fmt(xs[i]);
  }
  return out;
}

const char* mode_name(SimMode m) {
  switch (m) {
    case SimMode::kVanilla: return "vanilla";
    case SimMode::kRefine: return "refine";
    case SimMode::kRefineFixedStep: return "refine_fixed_step";
  }
  return "vanilla";
}

}  // namespace

std::optional<std::string> Config::get(const std::string& key) {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  used_.insert(key);
  return it->second;
}

void Config::set(const std::string& key, std::string value) { values_[key] = std::move(value); }

std::vector<std::string> Config::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (!used_.count(k)) out.push_back(k);
  }
  return out;
}

Config parse_config(std::string_view text) {
  Config cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        throw InvalidParameter("config line " + std::to_string(lineno) + ": unterminated section");
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidParameter("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key(trim(s.substr(0, eq)));
    std::string value(trim(s.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) throw InvalidParameter("config line " + std::to_string(lineno) + ": empty key");
    if (cfg.contains(key)) {
      throw InvalidParameter("config line " + std::to_string(lineno) + ": duplicate key " + key);
    }
    cfg.set(key, value);
  }
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

double parse_double(std::string_view s) {
  const std::string str(trim(s));
  if (str == "inf" || str == "infinity") return INFINITY;
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(str.c_str(), &end);
  if (str.empty() || end != str.c_str() + str.size() || errno == ERANGE) {
    throw InvalidParameter("not a number: '" + str + "'");
  }
  return x;
}

long long parse_int(std::string_view s) {
  s = trim(s);
  long long x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidParameter("not an integer: '" + std::string(s) + "'");
  }
  return x;
}

std::vector<double> parse_double_list(std::string_view s) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  for (auto part : split_commas(s)) out.push_back(parse_double(part));
  return out;
}

std::vector<int> parse_int_list(std::string_view s) {
  std::vector<int> out;
  if (trim(s).empty()) return out;
  for (auto part : split_commas(s)) out.push_back(static_cast<int>(parse_int(part)));
  return out;
}

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void apply_sim_config(Config& cfg, SimConfig& sim) {
  if (auto v = cfg.get("experiment_id")) sim.experiment_id = *v;
  if (auto v = cfg.get("V")) sim.V = static_cast<int>(parse_int(*v));
  if (auto v = cfg.get("K")) sim.K = static_cast<int>(parse_int(*v));
  if (auto v = cfg.get("n")) sim.n = parse_double(*v);
  if (auto v = cfg.get("m")) sim.m = static_cast<int>(parse_int(*v));
  if (auto v = cfg.get("T")) sim.T = static_cast<int>(parse_int(*v));
  if (auto v = cfg.get("T0")) sim.T0 = static_cast<int>(parse_int(*v));
  if (auto v = cfg.get("L")) sim.L = parse_double(*v);
  if (auto v = cfg.get("L_list")) sim.L_list = parse_double_list(*v);
  if (auto v = cfg.get("bits")) sim.bits = static_cast<int>(parse_int(*v));
  if (auto v = cfg.get("bits_list")) sim.bits_list = parse_int_list(*v);
  if (auto v = cfg.get("mode")) {
    if (*v == "vanilla") {
      sim.mode = SimMode::kVanilla;
    } else if (*v == "refine") {
      sim.mode = SimMode::kRefine;
    } else if (*v == "refine_fixed_step") {
      sim.mode = SimMode::kRefineFixedStep;
    } else {
      throw InvalidParameter("unknown mode '" + *v + "'");
    }
  }
  if (auto v = cfg.get("truth_scale")) sim.truth_scale = parse_double(*v);
  if (auto v = cfg.get("truth_margin")) sim.truth_margin = parse_double(*v);
  if (auto v = cfg.get("gamma")) sim.gamma = parse_double(*v);
  if (auto v = cfg.get("truth_seed")) sim.truth_seed = static_cast<std::uint64_t>(parse_int(*v));
  if (auto v = cfg.get("jobs")) sim.jobs = static_cast<int>(parse_int(*v));

  // Either an explicit list or a count starting at `seed`.
  if (auto v = cfg.get("seed_list")) {
    sim.seeds.clear();
    for (int s : parse_int_list(*v)) sim.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  const auto base = cfg.get("seed");
  const auto count = cfg.get("seed_count");
  if (count) {
    const long long first = base ? parse_int(*base) : 0;
    const long long n = parse_int(*count);
    if (n < 1) throw InvalidParameter("seed_count must be >= 1");
    sim.seeds.clear();
    for (long long s = 0; s < n; ++s) sim.seeds.push_back(static_cast<std::uint64_t>(first + s));
  }
}

std::string sim_config_text(const SimConfig& sim) {
  std::ostringstream out;
  out << "experiment_id = " << sim.experiment_id << '\n'
      << "V = " << sim.V << '\n'
      << "K = " << sim.K << '\n'
      << "n = " << format_double(sim.n) << '\n'
      << "m = " << sim.m << '\n'
      << "T = " << sim.T << '\n'
      << "T0 = " << sim.T0 << '\n'
      << "L = " << format_double(sim.L) << '\n'
      << "L_list = " << join(sim.L_list, format_double) << '\n'
      << "bits = " << sim.bits << '\n'
      << "bits_list = " << join(sim.bits_list, [](int b) { return std::to_string(b); }) << '\n'
      << "mode = " << mode_name(sim.mode) << '\n'
      << "truth_scale = " << format_double(sim.truth_scale) << '\n'
      << "truth_margin = " << format_double(sim.truth_margin) << '\n'
      << "gamma = " << format_double(sim.gamma) << '\n'
      << "truth_seed = " << sim.truth_seed << '\n'
      << "jobs = " << sim.jobs << '\n'
      << "seed_list = " << join(sim.seeds, [](std::uint64_t s) { return std::to_string(s); })
      << '\n';
  return out.str();
}

}  // namespace fpld
