#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "kadsim/block.hpp"
#include "kadsim/client.hpp"
#include "kadsim/config.hpp"
#include "kadsim/experiments.hpp"
#include "kadsim/metrics.hpp"
#include "kadsim/network.hpp"

namespace kadsim {

// Everything a single run produces, with the file names it was written
// under. `aggregate` matches aggregate.json byte for byte when serialized
// with dump(2).
struct RunOutput {
  std::string experiment_id;
  std::filesystem::path dir;
  ordered_json aggregate;
  std::string summary_line;
};

namespace detail {

inline ordered_json config_json(const ExperimentConfig& cfg) {
  auto range = [](const MsRange& r) {
    return ordered_json{{"min_ms", r.min_ms}, {"max_ms", r.max_ms}};
  };
  ordered_json j;
  j["netsim"] = {
      {"node_count", cfg.nodes},
      {"fast_error_rate", cfg.fast_error_rate},
      {"slow_error_rate", cfg.slow_error_rate},
      {"conn_delay_ms", range(cfg.conn_delay_ms)},
      {"fast_delay_ms", range(cfg.fast_delay_ms)},
      {"slow_delay_ms", range(cfg.slow_delay_ms)},
      {"gamma_ms", cfg.gamma_ms},
      {"gamma_persist", cfg.gamma_persist},
  };
  j["client"] = {{"k", cfg.k}, {"alpha", cfg.alpha}, {"beta", cfg.beta},
                 {"stall_limit", cfg.stall_limit},
                 {"store_window", cfg.store_window}};
  j["workload"] = {
      {"kind", workload_name(*cfg.kind)},
      {"samples", cfg.samples},
      {"queries", cfg.resolved_queries()},
      {"sets", cfg.sets},
      {"seeders", cfg.seeders},
      {"origin_policy", cfg.fixed_origin ? "fixed" : "random"},
      {"block_id", cfg.block_id},
  };
  j["cli"] = {{"seed", cfg.seed}, {"repeat", cfg.repeat}, {"out", cfg.out}};
  return j;
}

inline ordered_json distribution_json(const std::vector<std::uint64_t>& xs,
                                      Cdf::ValueKind kind) {
  Cdf cdf = make_cdf("x", kind, xs);
  ordered_json j = summary_json(cdf);
  long double total = 0;
  for (auto v : xs) total += static_cast<long double>(v);
  double mean = static_cast<double>(total / static_cast<long double>(xs.size()));
  if (kind == Cdf::ValueKind::Millis) mean /= 1000.0;
  ordered_json out;
  out["mean"] = mean;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = it.value();
  return out;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + p.string());
  f << text;
  if (!f) throw std::runtime_error("write failed: " + p.string());
}

}  // namespace detail

// Runs one experiment at one seed and writes ops.csv, the per-metric CDF
// files, aggregate.json and a canonical config echo into `dir`.
inline RunOutput run_experiment(const ExperimentConfig& cfg, std::uint64_t run_seed,
                                const std::filesystem::path& dir) {
  cfg.validate();
  std::filesystem::create_directories(dir);

  NetworkParams net_params = cfg.network();
  DhtParams dht = cfg.dht();
  auto net = std::make_unique<Network>(net_params, run_seed);
  net->build_tables(dht.k);
  DasBlock block = build_block(cfg.block_id);

  RunOutput out;
  out.experiment_id = cfg.experiment_id(run_seed);
  out.dir = dir;

  ordered_json& agg = out.aggregate;
  agg["experiment_id"] = out.experiment_id;
  agg["kind"] = workload_name(*cfg.kind);
  agg["seed"] = run_seed;
  agg["config"] = detail::config_json(cfg);

  std::vector<OpRecord> records;
  std::vector<std::uint64_t> hops, durations;
  std::uint64_t slot_duration_us = 0;

  if (*cfg.kind == WorkloadKind::Seeding) {
    SeedingSpec spec;
    spec.sample_count = cfg.samples;
    spec.seeders = cfg.seeders;
    spec.validate(block, net->size());
    SeedingResult res = run_seeding(*net, dht, block, spec, run_seed);
    records = std::move(res.records);
    slot_duration_us = res.total_duration_us;

    std::vector<std::uint64_t> replicas;
    replicas.reserve(records.size());
    for (const auto& r : records) replicas.push_back(r.stored_on.size());
    std::vector<std::uint64_t> stored = net->stored_per_node();

    agg["total_duration_ms"] = static_cast<double>(res.total_duration_us) / 1000.0;
    agg["replicas"] = detail::distribution_json(replicas, Cdf::ValueKind::Count);
    agg["stored_per_node"] = detail::distribution_json(stored, Cdf::ValueKind::Count);
    agg["contact_load"] = detail::distribution_json(net->loads(), Cdf::ValueKind::Count);
  } else {
    SamplingSpec spec;
    spec.queries = cfg.resolved_queries();
    spec.sets = cfg.sets;
    spec.random_origin_per_set = !cfg.fixed_origin;
    spec.validate(block);
    SamplingResult res = run_sampling(*net, dht, block, spec, run_seed);
    records = std::move(res.records);
    slot_duration_us = *std::max_element(res.set_duration_us.begin(),
                                         res.set_duration_us.end());

    Cdf set_cdf = make_cdf("set_duration_ms", Cdf::ValueKind::Millis, res.set_duration_us);
    export_cdf(set_cdf, dir / "cdf_set_duration.csv");
    agg["set_duration_ms"] = detail::distribution_json(res.set_duration_us,
                                                       Cdf::ValueKind::Millis);
  }

  hops.reserve(records.size());
  durations.reserve(records.size());
  std::uint64_t success_count = 0;
  for (const auto& r : records) {
    hops.push_back(r.hops);
    durations.push_back(r.end_us - r.start_us);
    if (r.success) ++success_count;
  }
  Cdf hop_cdf = make_cdf("hops", Cdf::ValueKind::Count, hops);
  Cdf dur_cdf = make_cdf("op_duration_ms", Cdf::ValueKind::Millis, durations);
  SlotBudget slot = slot_budget_check(slot_duration_us);

  agg["records"] = records.size();
  agg["success_count"] = success_count;
  agg["hops"] = detail::distribution_json(hops, Cdf::ValueKind::Count);
  agg["op_duration_ms"] = detail::distribution_json(durations, Cdf::ValueKind::Millis);
  agg["slot"] = {
      {"duration_ms", static_cast<double>(slot.duration_us) / 1000.0},
      {"slot_ms", static_cast<double>(slot.slot_us) / 1000.0},
      {"ratio", slot.ratio()},
      {"fits", slot.fits()},
  };

  export_records(records, net->ids(), out.experiment_id, dir / "ops.csv");
  export_cdf(hop_cdf, dir / "cdf_hops.csv");
  export_cdf(dur_cdf, dir / "cdf_op_duration.csv");
  detail::write_file(dir / "config.cfg", serialize_config(cfg));
  detail::write_file(dir / "aggregate.json", agg.dump(2) + "\n");

  out.summary_line = out.experiment_id +
      ": hops p50=" + std::to_string(hop_cdf.percentile(0.50)) +
      " p99=" + std::to_string(hop_cdf.percentile(0.99)) +
      " duration_ms p50=" + ms_string(dur_cdf.percentile(0.50)) +
      " p99=" + ms_string(dur_cdf.percentile(0.99)) +
      " slot_ratio=" + double_string(slot.ratio());
  return out;
}

// Full CLI run: honors `repeat` by running seeds seed..seed+repeat-1, each
// into its own run-<seed> subdirectory when repeat > 1.
inline std::vector<RunOutput> run_configured(const ExperimentConfig& cfg) {
  std::vector<RunOutput> outs;
  std::filesystem::path base = cfg.out;
  for (std::uint32_t i = 0; i < cfg.repeat; ++i) {
    std::uint64_t run_seed = cfg.seed + i;
    std::filesystem::path dir =
        cfg.repeat > 1 ? base / ("run-" + std::to_string(run_seed)) : base;
    outs.push_back(run_experiment(cfg, run_seed, dir));
  }
  return outs;
}

}  // namespace kadsim
