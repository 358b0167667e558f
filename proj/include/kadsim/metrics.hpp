#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "kadsim/client.hpp"

namespace kadsim {

using ordered_json = nlohmann::ordered_json;

// Microseconds rendered as milliseconds with three decimals. All export
// formatting goes through integer arithmetic so identical runs produce
// identical bytes.
inline std::string ms_string(std::uint64_t us) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%llu.%03llu",
                static_cast<unsigned long long>(us / 1000),
                static_cast<unsigned long long>(us % 1000));
  return buf;
}

inline std::string double_string(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("double_string: to_chars");
  return std::string(buf, ptr);
}

// Empirical CDF over integer-valued observations (hop counts, or durations
// in microseconds). Ties are collapsed: one point per distinct value.
struct Cdf {
  enum class ValueKind : std::uint8_t { Count, Millis };

  std::string metric;
  ValueKind kind = ValueKind::Count;
  std::vector<std::uint64_t> values;      // strictly increasing
  std::vector<std::uint64_t> cum_counts;  // cumulative, last == total
  std::uint64_t total = 0;

  double fraction(std::size_t i) const {
    return double(cum_counts[i]) / double(total);
  }

  // Nearest-rank percentile: the smallest value whose cumulative fraction
  // reaches p.
  std::uint64_t percentile(double p) const {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (fraction(i) >= p) return values[i];
    }
    return values.back();
  }
};

inline Cdf make_cdf(std::string metric, Cdf::ValueKind kind,
                    std::vector<std::uint64_t> observations) {
  if (observations.empty()) {
    throw std::invalid_argument("make_cdf: no observations");
  }
  std::sort(observations.begin(), observations.end());
  Cdf cdf;
  cdf.metric = std::move(metric);
  cdf.kind = kind;
  cdf.total = observations.size();
  for (std::size_t i = 0; i < observations.size(); ++i) {
    if (cdf.values.empty() || cdf.values.back() != observations[i]) {
      cdf.values.push_back(observations[i]);
      cdf.cum_counts.push_back(0);
    }
    cdf.cum_counts.back() = i + 1;  // running total up to and including i
  }
  return cdf;
}

inline std::string cdf_value_string(const Cdf& cdf, std::size_t i) {
  if (cdf.kind == Cdf::ValueKind::Millis) return ms_string(cdf.values[i]);
  return std::to_string(cdf.values[i]);
}

inline void export_cdf(const Cdf& cdf, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("export_cdf: cannot open " + path);
  out << "metric_name,value,cumulative_fraction\n";
  for (std::size_t i = 0; i < cdf.values.size(); ++i) {
    out << cdf.metric << ',' << cdf_value_string(cdf, i) << ','
        << double_string(cdf.fraction(i)) << '\n';
  }
  if (!out) throw std::runtime_error("export_cdf: write failed: " + path);
}

// Per-operation CSV, one row per record in op_id order.
inline void export_records(const std::vector<OpRecord>& records,
                           const std::vector<U256>& ids,
                           const std::string& experiment_id,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("export_records: cannot open " + path);
  out << "experiment_id,set_id,op_id,op_type,key_hex,origin_hex,hops,"
         "contacted,failed_fast,failed_slow,start_ms,end_ms,duration_ms,"
         "success,replicas\n";
  for (const OpRecord& r : records) {
    out << experiment_id << ',' << r.set_id << ',' << r.op_id << ','
        << op_type_name(r.op_type) << ',' << r.key.hex() << ','
        << ids[r.origin].hex() << ',' << r.hops << ',' << r.hops << ','
        << r.failed_fast << ',' << r.failed_slow << ','
        << ms_string(r.start_us) << ',' << ms_string(r.end_us) << ','
        << ms_string(r.end_us - r.start_us) << ','
        << (r.success ? "true" : "false") << ',' << r.stored_on.size()
        << '\n';
  }
  if (!out) throw std::runtime_error("export_records: write failed: " + path);
}

// Percentile summary of a distribution, rendered into fixed JSON keys.
inline ordered_json summary_json(const Cdf& cdf) {
  auto value = [&](double p) -> ordered_json {
    std::uint64_t v = cdf.percentile(p);
    if (cdf.kind == Cdf::ValueKind::Millis) return double(v) / 1000.0;
    return v;
  };
  ordered_json j;
  j["p50"] = value(0.50);
  j["p90"] = value(0.90);
  j["p99"] = value(0.99);
  j["max"] = cdf.kind == Cdf::ValueKind::Millis
                 ? ordered_json(double(cdf.values.back()) / 1000.0)
                 : ordered_json(cdf.values.back());
  return j;
}

inline ordered_json summary_with_mean_json(const Cdf& cdf, double mean) {
  ordered_json j;
  j["mean"] = mean;
  for (auto& [key, val] : summary_json(cdf).items()) j[key] = val;
  return j;
}

}  // namespace kadsim
