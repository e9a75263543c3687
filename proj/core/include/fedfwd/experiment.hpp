#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fedfwd/federation.hpp"

namespace fedfwd {

enum class DatasetKind { kMnist, kCifar10 };

/// Everything a run needs, mirroring the JSON config schema one to one.
/// Defaults are the full-scale experiment settings.
struct ExperimentConfig {
  DatasetKind dataset = DatasetKind::kMnist;  // "dataset": "mnist" | "cifar10"
  std::filesystem::path data_dir = "data";    // "data_dir"
  TrainerKind trainer = TrainerKind::kFF;     // "trainer": "ff" | "bp"
  LossKind loss = LossKind::kFF;              // "loss": "ff" | "symba"
  std::size_t depth = 3;                      // hidden layers
  std::size_t width = 500;                    // units per hidden layer
  bool iid = true;                            // iid or label-shard partition
  std::size_t m_clients = 100;
  double fraction = 0.1;                      // participation per round, (0,1]
  std::size_t rounds = 1500;
  std::size_t local_epochs = 3;
  std::size_t batch_size = 10;
  double lr = 0.003;
  double theta = 2.0;
  double symba_alpha = 1.0;
  std::uint64_t seed = 42;
  std::filesystem::path output_csv = "metrics.csv";
};

/// Strict JSON parse over the defaults above: every key must be one of the
/// documented config keys with the documented type. Unknown key or
/// out-of-range value throws ConfigError naming the key and bounds.
ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// Range checks alone (reused after flag overrides). Throws ConfigError.
void validate_config(const ExperimentConfig& config);

struct DataSplits {
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> test;
};

/// MNIST: data_dir/{train,t10k}-{images-idx3,labels-idx1}-ubyte.
/// CIFAR-10: data_dir/data_batch_{1..5}.bin and data_dir/test_batch.bin.
DataSplits load_dataset(DatasetKind kind, const std::filesystem::path& data_dir);

/// Execution knobs that are not experiment definition (they never change
/// the trained numbers except wall_seconds, and are therefore CLI-level
/// options rather than config keys).
struct ExperimentOptions {
  std::size_t parallel_clients = 1;
  bool include_first_layer = true;
  std::size_t shards_per_client = 2;  // non-iid partition granularity
  std::function<double()> clock;      // injectable for byte-stable CSVs
  std::function<void(const RoundMetrics&)> on_round;  // progress reporting
};

/// Partition from stream [seed, partition], model from [seed, init], then
/// config.rounds federated rounds. The span overload skips file loading.
RoundState run_experiment(const ExperimentConfig& config, std::span<const LabeledSample> train,
                          std::span<const LabeledSample> test,
                          const ExperimentOptions& opt = {});
RoundState run_experiment(const ExperimentConfig& config, const ExperimentOptions& opt = {});

struct TimingRow {
  std::size_t batch_size = 0;
  double ff_seconds = 0.0;  // median wall seconds per global round
  double bp_seconds = 0.0;
};

/// Wall-clock cost of one global round of training (no evaluation) for both
/// trainers at each batch size. Dataset, partition, and layer shapes are
/// shared across all measurements; each measurement starts from a fresh
/// init and runs one warmup round plus timed_rounds timed rounds, reporting
/// the median.
std::vector<TimingRow> time_rounds(const ExperimentConfig& config,
                                   std::span<const std::size_t> batch_sizes,
                                   std::span<const LabeledSample> train,
                                   std::size_t timed_rounds = 3,
                                   const ExperimentOptions& opt = {});
std::vector<TimingRow> time_rounds(const ExperimentConfig& config,
                                   std::span<const std::size_t> batch_sizes,
                                   std::size_t timed_rounds = 3,
                                   const ExperimentOptions& opt = {});

}  // namespace fedfwd
