#include "chartbench/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include "chartbench/diagnostics.hpp"
#include "chartbench/errors.hpp"
#include "chartbench/readout.hpp"

namespace chartbench {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size() || !std::isfinite(v))
    throw InvalidArgument("config: '" + key + "' expects a number, got '" + text + "'");
  return v;
}

long long to_integer(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size())
    throw InvalidArgument("config: '" + key + "' expects an integer, got '" + text + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "on" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "off" || text == "no") return false;
  throw InvalidArgument("config: '" + key + "' expects true/false, got '" + text + "'");
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_same_v<T, Method>)
      out += std::string(to_string(values[i]));
    else
      out += std::to_string(values[i]);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> entries(const RunConfig& c) {
  return {
      {"n", std::to_string(c.n)},
      {"width", fmt(c.width)},
      {"height", fmt(c.height)},
      {"inner_radius", fmt(c.inner_radius)},
      {"growth", fmt(c.growth)},
      {"seed", std::to_string(c.seed)},
      {"beta", c.beta.to_string()},
      {"alpha", fmt(c.alpha)},
      {"isomap_k", std::to_string(c.isomap_k)},
      {"umap_k", std::to_string(c.umap_k)},
      {"umap_epochs", std::to_string(c.umap_epochs)},
      {"umap_seed", std::to_string(c.umap_seed)},
      {"ridge", c.ridge ? fmt(*c.ridge) : "default"},
      {"dims", join(c.dims)},
      {"methods", join(c.methods)},
      {"recon_dims", join(c.recon_dims)},
      {"pair_base", std::to_string(c.pair_base)},
      {"pair_partners", std::to_string(c.pair_first) + ":" + std::to_string(c.pair_last)},
      {"novelty_window", std::to_string(c.novelty_window)},
      {"beta_grid", c.beta_grid.to_string()},
      {"tau", fmt(c.tau)},
      {"out_dir", c.out_dir.string()},
      {"plots", c.plots ? "true" : "false"},
      {"threads", std::to_string(c.threads)},
  };
}

}  // namespace

LogGrid LogGrid::parse(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw InvalidArgument("beta grid must be lo:hi:count, got '" + text + "'");
  LogGrid g;
  g.lo = to_double("beta_grid", parts[0]);
  g.hi = to_double("beta_grid", parts[1]);
  g.count = static_cast<int>(to_integer("beta_grid", parts[2]));
  if (!(g.lo > 0) || !(g.hi > g.lo) || g.count < 3)
    throw InvalidArgument("beta grid needs 0 < lo < hi and count >= 3, got '" + text + "'");
  return g;
}

std::string LogGrid::to_string() const { return fmt(lo) + ":" + fmt(hi) + ":" + std::to_string(count); }

std::vector<double> LogGrid::values() const { return log_spaced(lo, hi, count); }

std::vector<Index> parse_index_list(const std::string& text) {
  std::vector<Index> out;
  for (const auto& part : split(text, ',')) out.push_back(static_cast<Index>(to_integer("list", part)));
  if (out.empty()) throw InvalidArgument("empty index list");
  return out;
}

std::pair<Index, Index> parse_index_range(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw InvalidArgument("range must be first:last, got '" + text + "'");
  const Index a = static_cast<Index>(to_integer("range", parts[0]));
  const Index b = static_cast<Index>(to_integer("range", parts[1]));
  if (b < a) throw InvalidArgument("range end precedes start: '" + text + "'");
  return {a, b};
}

std::vector<Method> parse_method_list(const std::string& text) {
  std::vector<Method> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_method(part));
  if (out.empty()) throw InvalidArgument("empty method list");
  return out;
}

RunConfig::RunConfig() : dims(default_scan_dims()) {}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  auto positive_int = [&](int& slot) {
    const long long v = to_integer(key, value);
    if (v < 1 || v > 1'000'000'000) throw InvalidArgument("config: '" + key + "' must be a positive integer");
    slot = static_cast<int>(v);
  };
  auto seed_value = [&]() {
    const long long v = to_integer(key, value);
    if (v < 0) throw InvalidArgument("config: '" + key + "' must be non-negative");
    return static_cast<std::uint64_t>(v);
  };

  if (key == "n") {
    n = static_cast<Index>(to_integer(key, value));
  } else if (key == "width") {
    width = to_double(key, value);
  } else if (key == "height") {
    height = to_double(key, value);
  } else if (key == "inner_radius") {
    inner_radius = to_double(key, value);
  } else if (key == "growth") {
    growth = to_double(key, value);
  } else if (key == "seed") {
    seed = seed_value();
  } else if (key == "beta") {
    beta = BetaRule::parse(value);
  } else if (key == "alpha") {
    alpha = to_double(key, value);
  } else if (key == "isomap_k") {
    positive_int(isomap_k);
  } else if (key == "umap_k") {
    positive_int(umap_k);
  } else if (key == "umap_epochs") {
    positive_int(umap_epochs);
  } else if (key == "umap_seed") {
    umap_seed = seed_value();
  } else if (key == "ridge") {
    if (value == "default")
      ridge.reset();
    else
      ridge = to_double(key, value);
  } else if (key == "dims") {
    dims = parse_index_list(value);
  } else if (key == "methods") {
    methods = parse_method_list(value);
  } else if (key == "recon_dims") {
    recon_dims = parse_index_list(value);
  } else if (key == "pair_base") {
    pair_base = static_cast<Index>(to_integer(key, value));
  } else if (key == "pair_partners") {
    std::tie(pair_first, pair_last) = parse_index_range(value);
  } else if (key == "novelty_window") {
    positive_int(novelty_window);
  } else if (key == "beta_grid") {
    beta_grid = LogGrid::parse(value);
  } else if (key == "tau") {
    tau = to_double(key, value);
  } else if (key == "out_dir") {
    if (value.empty()) throw InvalidArgument("config: 'out_dir' must not be empty");
    out_dir = value;
  } else if (key == "plots") {
    plots = to_bool(key, value);
  } else if (key == "threads") {
    const long long v = to_integer(key, value);
    if (v < 0 || v > 4096) throw InvalidArgument("config: 'threads' must lie in [0, 4096]");
    threads = static_cast<int>(v);
  } else {
    throw InvalidArgument("config: unknown key '" + key + "'");
  }
}

void RunConfig::validate() const {
  if (n < 4) throw InvalidArgument("config: n must be >= 4");
  if (!(width > 0) || !(height > 0)) throw InvalidArgument("config: width and height must be positive");
  SpiralParams{inner_radius, growth}.validate();
  KernelConfig{beta, alpha}.validate();
  if (isomap_k >= n) throw InvalidArgument("config: isomap_k must be < n");
  if (umap_k < 2 || umap_k >= n) throw InvalidArgument("config: umap_k must lie in [2, n)");
  if (ridge && !(*ridge >= 0)) throw InvalidArgument("config: ridge must be >= 0");
  for (Index d : dims)
    if (d < 1) throw InvalidArgument("config: dims must be >= 1");
  for (Index d : recon_dims)
    if (std::find(dims.begin(), dims.end(), d) == dims.end())
      throw InvalidArgument("config: recon_dims entry " + std::to_string(d) + " is not in dims");
  if (methods.empty()) throw InvalidArgument("config: no methods selected");
  if (pair_base < 0 || pair_first < 0) throw InvalidArgument("config: pair modes must be >= 0");
  if (!(tau > 0 && tau < 1)) throw InvalidArgument("config: tau must lie in (0, 1)");
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries(*this)) out += k + " = " + v + "\n";
  return out;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : entries(*this)) j[k] = v;
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& json) {
  if (!json.is_object()) throw InvalidArgument("config JSON must be an object");
  RunConfig c;
  for (const auto& [k, v] : json.items()) {
    if (v.is_string())
      c.set(k, v.get<std::string>());
    else if (v.is_boolean())
      c.set(k, v.get<bool>() ? "true" : "false");
    else if (v.is_number_integer())
      c.set(k, std::to_string(v.get<long long>()));
    else if (v.is_number())
      c.set(k, fmt(v.get<double>()));
    else
      throw InvalidArgument("config JSON: unsupported value for '" + k + "'");
  }
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    c.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const std::string head = trim(text);
  if (!head.empty() && head.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("config " + path.string() + ": " + e.what());
    }
    return RunConfig::from_json(j.contains("config") ? j.at("config") : j);
  }
  return parse_config_text(text);
}

}  // namespace chartbench
