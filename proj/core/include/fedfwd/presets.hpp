#pragma once

#include <string>
#include <vector>

#include "fedfwd/experiment.hpp"

namespace fedfwd {

/// One fully specified experiment inside a preset; output_csv is prefilled
/// with a name derived from the run's parameters.
struct PresetRun {
  std::string name;
  ExperimentConfig config;
};

/// A timing sweep: one dataset/config timed at several batch sizes.
struct TimingSpec {
  std::string name;
  ExperimentConfig config;
  std::vector<std::size_t> batches;
};

struct Preset {
  std::string name;
  std::string description;
  std::vector<PresetRun> runs;
  std::vector<TimingSpec> timings;
};

/// Named experiment bundles at full scale (100 clients, 1500 rounds,
/// width 500):
///   table1  MNIST accuracy grid: depth {2,3} x trainer {ff,bp} x {iid,non-iid}
///   table3  the same grid on CIFAR-10
///   table2  per-round training-time sweep over batch sizes, both datasets
///   symba   MNIST non-iid stability: depth {2,3,4} x loss {ff,symba}
/// Throws ConfigError for an unknown name.
Preset get_preset(const std::string& name);

std::vector<std::string> preset_names();

}  // namespace fedfwd
