#include "ebdiff/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <sstream>

#include "ebdiff/errors.hpp"

namespace ebdiff {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Shortest text that parses back to the same double.
std::string fmt_double(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::string short_double(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

double parse_double(const std::string& text, const std::string& key, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError("'" + key + "' expects a number, got '" + text + "'", line);
  }
}

long parse_long(const std::string& text, const std::string& key, int line) {
  long v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("'" + key + "' expects an integer, got '" + text + "'", line);
  }
  return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& key, int line) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("'" + key + "' expects a non-negative integer, got '" + text + "'", line);
  }
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& key, int line) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_double(item, key, line));
  return out;
}

bool parse_bool(const std::string& text, const std::string& key, int line) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ParseError("'" + key + "' expects true/false, got '" + text + "'", line);
}

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (j) s += ',';
    s += fmt_double(xs[j]);
  }
  return s;
}

std::string schedule_text(const ThresholdSchedule& s) {
  if (s.is_constant()) return fmt_double(s.breakpoints().front().second);
  std::string out;
  for (std::size_t j = 0; j < s.breakpoints().size(); ++j) {
    if (j) out += ';';
    out += std::to_string(s.breakpoints()[j].first) + '=' + fmt_double(s.breakpoints()[j].second);
  }
  return out;
}

const char* topology_name(TopologyKind k) {
  switch (k) {
    case TopologyKind::kRandomGeometric:
      return "rgg";
    case TopologyKind::kPath:
      return "path";
    case TopologyKind::kComplete:
      return "complete";
    case TopologyKind::kFile:
      return "file";
  }
  return "?";
}

}  // namespace

std::string AlgorithmSpec::label() const {
  if (algorithm != Algorithm::kEbAtc || !schedule) return to_string(algorithm);
  return "EB-ATC(delta=" +
         (schedule->is_constant() ? short_double(schedule->breakpoints().front().second)
                                  : schedule_text(*schedule)) +
         ")";
}

std::string AlgorithmSpec::slug() const {
  switch (algorithm) {
    case Algorithm::kAtc:
      return "atc";
    case Algorithm::kNonCoop:
      return "noncoop";
    case Algorithm::kEbAtc:
      break;
  }
  if (!schedule) return "ebatc";
  if (schedule->is_constant()) {
    return "ebatc_d" + short_double(schedule->breakpoints().front().second);
  }
  std::string s = "ebatc_sched";
  for (const auto& [start, v] : schedule->breakpoints()) s += "_" + std::to_string(start) + "-" + short_double(v);
  return s;
}

std::vector<AlgorithmSpec> parse_algorithms(const std::string& text,
                                            const std::vector<double>& deltas) {
  std::vector<AlgorithmSpec> out;
  for (const auto& item : split(text, ',')) {
    const auto colon = item.find(':');
    const std::string name = trim(item.substr(0, colon));
    if (name == "ATC" && colon == std::string::npos) {
      out.push_back({Algorithm::kAtc, std::nullopt});
    } else if (name == "NONCOOP" && colon == std::string::npos) {
      out.push_back({Algorithm::kNonCoop, std::nullopt});
    } else if (name == "EB-ATC") {
      if (colon == std::string::npos) {
        for (double d : deltas) out.push_back({Algorithm::kEbAtc, ThresholdSchedule::constant(d)});
        continue;
      }
      const std::string arg = trim(item.substr(colon + 1));
      if (arg.find('=') == std::string::npos) {
        out.push_back({Algorithm::kEbAtc,
                       ThresholdSchedule::constant(parse_double(arg, "algorithms", 0))});
        continue;
      }
      std::vector<std::pair<long, double>> bps;
      for (const auto& piece : split(arg, ';')) {
        const auto eq = piece.find('=');
        if (eq == std::string::npos) throw ParseError("bad schedule piece '" + piece + "'");
        bps.emplace_back(parse_long(trim(piece.substr(0, eq)), "algorithms", 0),
                         parse_double(trim(piece.substr(eq + 1)), "algorithms", 0));
      }
      out.push_back({Algorithm::kEbAtc, ThresholdSchedule::piecewise(std::move(bps))});
    } else {
      throw ParseError("unknown algorithm '" + item + "'");
    }
  }
  return out;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.algorithms = parse_algorithms("ATC,NONCOOP,EB-ATC", {1e-3, 1e-2, 1e-1});
  return c;
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::resolved() const {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("nodes", std::to_string(nodes));
  kv.emplace_back("dim", std::to_string(dim));
  kv.emplace_back("horizon", std::to_string(horizon));
  kv.emplace_back("replicas", std::to_string(replicas));
  kv.emplace_back("topology", topology_name(topology));
  kv.emplace_back("topology_radius", fmt_double(topology_radius));
  kv.emplace_back("topology_seed", std::to_string(topology_seed));
  kv.emplace_back("topology_file", topology_file);
  kv.emplace_back("sigma2_u_min", fmt_double(regressor_power.lo));
  kv.emplace_back("sigma2_u_max", fmt_double(regressor_power.hi));
  kv.emplace_back("noise_db_min", fmt_double(noise_db.lo));
  kv.emplace_back("noise_db_max", fmt_double(noise_db.hi));
  kv.emplace_back("regressor_cov_diag", join(regressor_cov_diag));
  kv.emplace_back("mu", fmt_double(mu));
  std::string algs;
  for (std::size_t j = 0; j < algorithms.size(); ++j) {
    if (j) algs += ',';
    const auto& a = algorithms[j];
    algs += to_string(a.algorithm);
    if (a.schedule) algs += ":" + schedule_text(*a.schedule);
  }
  kv.emplace_back("algorithms", algs);
  kv.emplace_back("trigger_weight_diag", join(trigger_weight_diag));
  kv.emplace_back("seed", std::to_string(seed));
  kv.emplace_back("out", out_dir);
  kv.emplace_back("window_fraction", fmt_double(window_fraction));
  kv.emplace_back("f_cap", std::to_string(f_cap));
  kv.emplace_back("trace", trace ? "true" : "false");
  return kv;
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t j = 0; j < size; ++j) {
    h ^= p[j];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : resolved()) {
    if (k == "out") continue;  // where results go does not change them
    const std::string line = k + "=" + v + "\n";
    h = fnv1a(line.data(), line.size(), h);
  }
  return h;
}

TriggerPolicy ExperimentConfig::policy_for(const AlgorithmSpec& spec) const {
  ThresholdSchedule schedule =
      spec.schedule ? *spec.schedule : ThresholdSchedule::constant(0.0);
  if (trigger_weight_diag.empty()) return TriggerPolicy::identity(dim, std::move(schedule));
  Matrix y = Matrix::Zero(dim, dim);
  for (int m = 0; m < dim; ++m) y(m, m) = trigger_weight_diag[m];
  return TriggerPolicy(std::move(y), std::move(schedule));
}

void validate_config(const ExperimentConfig& c) {
  std::vector<std::string> problems;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  };
  check(c.nodes >= 1, "nodes must be >= 1");
  check(c.dim >= 1, "dim must be >= 1");
  check(c.horizon >= 1, "horizon must be >= 1");
  check(c.replicas >= 1, "replicas must be >= 1");
  if (c.topology == TopologyKind::kRandomGeometric) {
    check(c.topology_radius > 0.0 && c.topology_radius <= std::sqrt(2.0),
          "topology_radius must lie in (0, sqrt(2)]");
  }
  if (c.topology == TopologyKind::kFile) {
    check(!c.topology_file.empty(), "topology=file needs topology_file");
    check(c.topology_file.empty() || std::filesystem::exists(c.topology_file),
          "topology_file '" + c.topology_file + "' does not exist");
  }
  check(c.regressor_power.lo > 0.0 && c.regressor_power.lo <= c.regressor_power.hi,
        "sigma2_u range must satisfy 0 < min <= max");
  check(c.noise_db.lo <= c.noise_db.hi, "noise dB range must satisfy min <= max");
  check(c.regressor_cov_diag.empty() || static_cast<int>(c.regressor_cov_diag.size()) == c.dim,
        "regressor_cov_diag needs exactly dim entries");
  check(std::all_of(c.regressor_cov_diag.begin(), c.regressor_cov_diag.end(),
                    [](double x) { return x > 0.0; }),
        "regressor_cov_diag entries must be > 0");
  check(c.mu > 0.0 && std::isfinite(c.mu), "mu must be > 0");
  check(!c.algorithms.empty(), "algorithms must name at least one algorithm");
  check(c.trigger_weight_diag.empty() || static_cast<int>(c.trigger_weight_diag.size()) == c.dim,
        "trigger_weight_diag needs exactly dim entries");
  check(std::all_of(c.trigger_weight_diag.begin(), c.trigger_weight_diag.end(),
                    [](double x) { return x >= 0.0; }),
        "trigger_weight_diag entries must be >= 0");
  check(c.window_fraction > 0.0 && c.window_fraction <= 1.0,
        "window_fraction must lie in (0, 1]");
  check(c.horizon < 1 ||
            std::floor(c.window_fraction * static_cast<double>(c.horizon) + 1e-9) >= 1,
        "horizon too short for the steady-state window");
  check(c.f_cap >= 1, "f_cap must be >= 1");
  check(!c.out_dir.empty(), "out must be non-empty");
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ValidationError(msg);
  }
}

ExperimentConfig parse_config(std::istream& in, const std::string& base_dir) {
  ExperimentConfig c = default_config();
  std::vector<double> deltas{1e-3, 1e-2, 1e-1};
  std::optional<std::pair<std::string, int>> algorithms_text;
  std::map<std::string, int> seen;

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash_pos = raw.find('#');
    const std::string line = trim(raw.substr(0, hash_pos));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (seen.count(key)) {
      throw ParseError("duplicate key '" + key + "' (first on line " +
                           std::to_string(seen[key]) + ")",
                       line_no);
    }
    seen[key] = line_no;

    if (key == "nodes") {
      c.nodes = static_cast<int>(parse_long(value, key, line_no));
    } else if (key == "dim") {
      c.dim = static_cast<int>(parse_long(value, key, line_no));
    } else if (key == "horizon") {
      c.horizon = parse_long(value, key, line_no);
    } else if (key == "replicas") {
      c.replicas = parse_long(value, key, line_no);
    } else if (key == "topology") {
      if (value == "rgg") c.topology = TopologyKind::kRandomGeometric;
      else if (value == "path") c.topology = TopologyKind::kPath;
      else if (value == "complete") c.topology = TopologyKind::kComplete;
      else if (value == "file") c.topology = TopologyKind::kFile;
      else throw ParseError("unknown topology '" + value + "'", line_no);
    } else if (key == "topology_radius") {
      c.topology_radius = parse_double(value, key, line_no);
    } else if (key == "topology_seed") {
      c.topology_seed = parse_u64(value, key, line_no);
    } else if (key == "topology_file") {
      std::filesystem::path p(value);
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      c.topology_file = p.lexically_normal().string();
    } else if (key == "sigma2_u_min") {
      c.regressor_power.lo = parse_double(value, key, line_no);
    } else if (key == "sigma2_u_max") {
      c.regressor_power.hi = parse_double(value, key, line_no);
    } else if (key == "noise_db_min") {
      c.noise_db.lo = parse_double(value, key, line_no);
    } else if (key == "noise_db_max") {
      c.noise_db.hi = parse_double(value, key, line_no);
    } else if (key == "regressor_cov_diag") {
      c.regressor_cov_diag = parse_list(value, key, line_no);
    } else if (key == "mu") {
      c.mu = parse_double(value, key, line_no);
    } else if (key == "algorithms") {
      algorithms_text = std::make_pair(value, line_no);
    } else if (key == "deltas") {
      deltas = parse_list(value, key, line_no);
    } else if (key == "trigger_weight_diag") {
      c.trigger_weight_diag = parse_list(value, key, line_no);
    } else if (key == "seed") {
      c.seed = parse_u64(value, key, line_no);
    } else if (key == "out") {
      c.out_dir = value;
    } else if (key == "window_fraction") {
      c.window_fraction = parse_double(value, key, line_no);
    } else if (key == "f_cap") {
      c.f_cap = static_cast<int>(parse_long(value, key, line_no));
    } else if (key == "trace") {
      c.trace = parse_bool(value, key, line_no);
    } else {
      throw ParseError("unknown key '" + key + "'", line_no);
    }
  }

  const int alg_line = algorithms_text ? algorithms_text->second
                                       : (seen.count("deltas") ? seen["deltas"] : 0);
  try {
    c.algorithms = parse_algorithms(algorithms_text ? algorithms_text->first
                                                    : std::string("ATC,NONCOOP,EB-ATC"),
                                    deltas);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), alg_line);
  } catch (const InvalidRange& e) {
    throw ParseError(e.what(), alg_line);
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config '" + path + "'");
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(in, dir.empty() ? "." : dir.string());
}

}  // namespace ebdiff
