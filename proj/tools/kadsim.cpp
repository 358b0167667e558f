#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "kadsim/kadsim.hpp"

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw kadsim::ConfigError("cannot read config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace kadsim;

  CLI::App app{
      "Deterministic discrete-event simulator of a Kademlia DHT under "
      "data-availability sampling and seeding workloads"};

  std::string config_path, experiment, conn_delay, fast_delay, slow_delay, out_dir;
  std::uint32_t nodes{}, samples{}, queries{}, sets{}, seeders{}, repeat{};
  int k{}, alpha{}, beta{};
  double fast_error{}, slow_error{}, gamma_ms{};
  std::uint64_t seed{};

  app.add_option("--config", config_path, "Config file; flags override its values");
  app.add_option("--experiment", experiment, "Workload kind: sampling, seeding or hops");
  app.add_option("--nodes", nodes, "Number of DHT nodes");
  app.add_option("--k", k, "Bucket size / replication factor");
  app.add_option("--alpha", alpha, "Lookup parallelism");
  app.add_option("--beta", beta, "Closest entries returned per query");
  app.add_option("--fast-error-rate", fast_error, "Probability of a fast failure per connection");
  app.add_option("--slow-error-rate", slow_error, "Probability of a slow failure per connection");
  app.add_option("--delay-ms", conn_delay, "Successful connection delay range MIN:MAX in ms");
  app.add_option("--fast-delay-ms", fast_delay, "Fast-failure delay range MIN:MAX in ms");
  app.add_option("--slow-delay-ms", slow_delay, "Slow-failure delay range MIN:MAX in ms");
  app.add_option("--gamma-ms", gamma_ms, "Per-contact congestion surcharge in ms");
  app.add_option("--samples", samples, "Samples to seed (seeding workload)");
  app.add_option("--queries", queries, "Value lookups per sampling set");
  app.add_option("--sets", sets, "Sampling sets to run");
  app.add_option("--seeders", seeders, "Nodes sharing the seeding work");
  app.add_option("--seed", seed, "Base RNG seed");
  app.add_option("--repeat", repeat, "Independent runs at seed, seed+1, ...");
  app.add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    ExperimentConfig cfg;
    if (app.count("--config")) parse_config_text(read_text_file(config_path), cfg);
    if (app.count("--experiment")) cfg.kind = parse_workload(experiment);
    if (app.count("--nodes")) cfg.nodes = nodes;
    if (app.count("--k")) cfg.k = k;
    if (app.count("--alpha")) cfg.alpha = alpha;
    if (app.count("--beta")) cfg.beta = beta;
    if (app.count("--fast-error-rate")) cfg.fast_error_rate = fast_error;
    if (app.count("--slow-error-rate")) cfg.slow_error_rate = slow_error;
    if (app.count("--delay-ms")) cfg.conn_delay_ms = detail::parse_range(conn_delay, "--delay-ms");
    if (app.count("--fast-delay-ms")) cfg.fast_delay_ms = detail::parse_range(fast_delay, "--fast-delay-ms");
    if (app.count("--slow-delay-ms")) cfg.slow_delay_ms = detail::parse_range(slow_delay, "--slow-delay-ms");
    if (app.count("--gamma-ms")) cfg.gamma_ms = gamma_ms;
    if (app.count("--samples")) cfg.samples = samples;
    if (app.count("--queries")) cfg.queries = queries;
    if (app.count("--sets")) cfg.sets = sets;
    if (app.count("--seeders")) cfg.seeders = seeders;
    if (app.count("--seed")) cfg.seed = seed;
    if (app.count("--repeat")) cfg.repeat = repeat;
    if (app.count("--out")) cfg.out = out_dir;

    cfg.validate();
    for (const RunOutput& run : run_configured(cfg)) {
      std::puts(run.summary_line.c_str());
    }
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
