#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kadsim/client.hpp"
#include "kadsim/network.hpp"

namespace kadsim {

enum class WorkloadKind : std::uint8_t { Sampling, Seeding, Hops };

inline const char* workload_name(WorkloadKind k) {
  switch (k) {
    case WorkloadKind::Sampling: return "sampling";
    case WorkloadKind::Seeding: return "seeding";
    case WorkloadKind::Hops: return "hops";
  }
  return "?";
}

struct MsRange {
  double min_ms = 0;
  double max_ms = 0;
};

// Fully resolved experiment description. Delay values are kept in
// milliseconds here (the unit of the config surface) and converted to the
// integer microseconds the simulator runs on by network()/dht().
struct ExperimentConfig {
  // [netsim]
  std::uint32_t nodes = 12000;
  double fast_error_rate = 0.10;
  double slow_error_rate = 0.0;
  MsRange conn_delay_ms{100, 260};
  MsRange fast_delay_ms{10, 50};
  MsRange slow_delay_ms{500, 1000};
  double gamma_ms = 0.0;
  bool gamma_persist = false;
  // [client]
  int k = 20;
  int alpha = 3;
  int beta = 20;
  int stall_limit = 4;
  int store_window = 10;
  // [workload]
  std::optional<WorkloadKind> kind;
  std::uint32_t samples = 1000;
  std::optional<std::uint32_t> queries;  // per-set lookups; kind-dependent default
  std::uint32_t sets = 100;
  std::uint32_t seeders = 1;
  bool fixed_origin = false;
  std::uint64_t block_id = 1;
  // [cli]
  std::uint64_t seed = 1;
  std::uint32_t repeat = 1;
  std::string out = "out";

  // Value lookups per set: 80 for the sampling workload unless set
  // explicitly, 200 for the hop-distribution workload.
  std::uint32_t resolved_queries() const {
    if (queries) return *queries;
    return (kind && *kind == WorkloadKind::Hops) ? 200 : 80;
  }

  static std::uint64_t ms_to_us(double ms) {
    return static_cast<std::uint64_t>(std::llround(ms * 1000.0));
  }

  NetworkParams network() const {
    NetworkParams p;
    p.node_count = nodes;
    p.fast_error_rate = fast_error_rate;
    p.slow_error_rate = slow_error_rate;
    p.conn_delay = {ms_to_us(conn_delay_ms.min_ms), ms_to_us(conn_delay_ms.max_ms)};
    p.fast_delay = {ms_to_us(fast_delay_ms.min_ms), ms_to_us(fast_delay_ms.max_ms)};
    p.slow_delay = {ms_to_us(slow_delay_ms.min_ms), ms_to_us(slow_delay_ms.max_ms)};
    p.gamma_us = ms_to_us(gamma_ms);
    p.gamma_persist = gamma_persist;
    return p;
  }

  DhtParams dht() const {
    DhtParams p;
    p.k = k;
    p.alpha = alpha;
    p.beta = beta;
    p.stall_limit = stall_limit;
    p.store_window = store_window;
    return p;
  }

  void validate() const {
    if (!kind) throw ConfigError("experiment kind is required (--experiment or [workload] kind)");
    auto ms_ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
    for (const MsRange* r : {&conn_delay_ms, &fast_delay_ms, &slow_delay_ms}) {
      if (!ms_ok(r->min_ms) || !ms_ok(r->max_ms)) throw ConfigError("delay values must be finite and >= 0");
      if (r->min_ms > r->max_ms) throw ConfigError("delay range is inverted");
    }
    if (!ms_ok(gamma_ms)) throw ConfigError("gamma_ms must be finite and >= 0");
    if (repeat < 1) throw ConfigError("repeat must be >= 1");
    if (out.empty()) throw ConfigError("out directory must not be empty");
    network().validate();
    dht().validate();
  }

  std::string experiment_id(std::uint64_t run_seed) const {
    return std::string(workload_name(*kind)) + "-n" + std::to_string(nodes) +
           "-seed" + std::to_string(run_seed);
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline double parse_double(std::string_view v, const std::string& key) {
  double out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("invalid number for " + key + ": '" + std::string(v) + "'");
  }
  return out;
}

template <class Int>
inline Int parse_int(std::string_view v, const std::string& key) {
  Int out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("invalid integer for " + key + ": '" + std::string(v) + "'");
  }
  return out;
}

inline bool parse_bool(std::string_view v, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + std::string(v) + "'");
}

inline MsRange parse_range(std::string_view v, const std::string& key) {
  std::size_t colon = v.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("invalid range for " + key + " (expected MIN:MAX): '" +
                      std::string(v) + "'");
  }
  MsRange r;
  r.min_ms = parse_double(trim(v.substr(0, colon)), key);
  r.max_ms = parse_double(trim(v.substr(colon + 1)), key);
  return r;
}

}  // namespace detail

inline WorkloadKind parse_workload(std::string_view v) {
  if (v == "sampling") return WorkloadKind::Sampling;
  if (v == "seeding") return WorkloadKind::Seeding;
  if (v == "hops") return WorkloadKind::Hops;
  throw ConfigError("unknown experiment kind: '" + std::string(v) +
                    "' (expected sampling, seeding or hops)");
}

// Applies a config file onto `cfg`. Flat key = value lines under [section]
// headers; '#' starts a comment; unknown sections and keys are errors.
inline void parse_config_text(std::string_view text, ExperimentConfig& cfg) {
  using namespace detail;
  std::string section;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "netsim" && section != "client" && section != "workload" &&
          section != "cli") {
        throw ConfigError("unknown section [" + section + "]");
      }
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = std::string(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    std::string qual = section.empty() ? key : section + "." + key;

    if (section == "netsim") {
      if (key == "node_count") cfg.nodes = parse_int<std::uint32_t>(value, qual);
      else if (key == "fast_error_rate") cfg.fast_error_rate = parse_double(value, qual);
      else if (key == "slow_error_rate") cfg.slow_error_rate = parse_double(value, qual);
      else if (key == "conn_delay_ms") cfg.conn_delay_ms = parse_range(value, qual);
      else if (key == "fast_delay_ms") cfg.fast_delay_ms = parse_range(value, qual);
      else if (key == "slow_delay_ms") cfg.slow_delay_ms = parse_range(value, qual);
      else if (key == "gamma_ms") cfg.gamma_ms = parse_double(value, qual);
      else if (key == "gamma_persist") cfg.gamma_persist = parse_bool(value, qual);
      else throw ConfigError("unknown key: " + qual);
    } else if (section == "client") {
      if (key == "k") cfg.k = parse_int<int>(value, qual);
      else if (key == "alpha") cfg.alpha = parse_int<int>(value, qual);
      else if (key == "beta") cfg.beta = parse_int<int>(value, qual);
      else if (key == "stall_limit") cfg.stall_limit = parse_int<int>(value, qual);
      else if (key == "store_window") cfg.store_window = parse_int<int>(value, qual);
      else throw ConfigError("unknown key: " + qual);
    } else if (section == "workload") {
      if (key == "kind") cfg.kind = parse_workload(value);
      else if (key == "samples") cfg.samples = parse_int<std::uint32_t>(value, qual);
      else if (key == "queries") cfg.queries = parse_int<std::uint32_t>(value, qual);
      else if (key == "sets") cfg.sets = parse_int<std::uint32_t>(value, qual);
      else if (key == "seeders") cfg.seeders = parse_int<std::uint32_t>(value, qual);
      else if (key == "origin_policy") {
        if (value == "random") cfg.fixed_origin = false;
        else if (value == "fixed") cfg.fixed_origin = true;
        else throw ConfigError("invalid origin_policy: '" + std::string(value) + "'");
      }
      else if (key == "block_id") cfg.block_id = parse_int<std::uint64_t>(value, qual);
      else throw ConfigError("unknown key: " + qual);
    } else if (section == "cli") {
      if (key == "seed") cfg.seed = parse_int<std::uint64_t>(value, qual);
      else if (key == "repeat") cfg.repeat = parse_int<std::uint32_t>(value, qual);
      else if (key == "out") cfg.out = std::string(value);
      else throw ConfigError("unknown key: " + qual);
    } else {
      throw ConfigError("key outside of a section: " + key);
    }
  }
}

// Canonical serialization: parsing the output reproduces the configuration
// exactly, so the echoed file doubles as a rerun recipe.
inline std::string serialize_config(const ExperimentConfig& cfg) {
  auto num = [](double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
  };
  auto range = [&](const MsRange& r) {
    return num(r.min_ms) + ":" + num(r.max_ms);
  };
  std::string s;
  s += "[netsim]\n";
  s += "node_count = " + std::to_string(cfg.nodes) + "\n";
  s += "fast_error_rate = " + num(cfg.fast_error_rate) + "\n";
  s += "slow_error_rate = " + num(cfg.slow_error_rate) + "\n";
  s += "conn_delay_ms = " + range(cfg.conn_delay_ms) + "\n";
  s += "fast_delay_ms = " + range(cfg.fast_delay_ms) + "\n";
  s += "slow_delay_ms = " + range(cfg.slow_delay_ms) + "\n";
  s += "gamma_ms = " + num(cfg.gamma_ms) + "\n";
  s += "gamma_persist = " + std::string(cfg.gamma_persist ? "true" : "false") + "\n";
  s += "\n[client]\n";
  s += "k = " + std::to_string(cfg.k) + "\n";
  s += "alpha = " + std::to_string(cfg.alpha) + "\n";
  s += "beta = " + std::to_string(cfg.beta) + "\n";
  s += "stall_limit = " + std::to_string(cfg.stall_limit) + "\n";
  s += "store_window = " + std::to_string(cfg.store_window) + "\n";
  s += "\n[workload]\n";
  s += "kind = " + std::string(cfg.kind ? workload_name(*cfg.kind) : "") + "\n";
  s += "samples = " + std::to_string(cfg.samples) + "\n";
  s += "queries = " + std::to_string(cfg.resolved_queries()) + "\n";
  s += "sets = " + std::to_string(cfg.sets) + "\n";
  s += "seeders = " + std::to_string(cfg.seeders) + "\n";
  s += "origin_policy = " + std::string(cfg.fixed_origin ? "fixed" : "random") + "\n";
  s += "block_id = " + std::to_string(cfg.block_id) + "\n";
  s += "\n[cli]\n";
  s += "seed = " + std::to_string(cfg.seed) + "\n";
  s += "repeat = " + std::to_string(cfg.repeat) + "\n";
  s += "out = " + cfg.out + "\n";
  return s;
}

}  // namespace kadsim
