#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fedfwd/checkpoint.hpp"
#include "fedfwd/dataset.hpp"
#include "fedfwd/metrics.hpp"
#include "fedfwd/partition.hpp"
#include "fedfwd/rng.hpp"

namespace fedfwd {

enum class TrainerKind { kFF, kBP };
enum class Weighting { kBySampleCount, kUniform };

/// Orchestration parameters for the federated loop.
struct FederationConfig {
  std::size_t m_clients = 100;
  double participation_fraction = 0.1;  // in (0, 1]
  std::size_t global_rounds = 1500;
  std::size_t local_epochs = 3;
  Weighting weighting = Weighting::kBySampleCount;
  TrainerKind trainer_kind = TrainerKind::kFF;
  std::uint64_t seed = 42;
};

/// ceil(fraction * m) distinct client ids, uniform without replacement,
/// returned in ascending order. fraction must be in (0, 1].
std::vector<std::size_t> sample_clients(std::size_t m, double fraction, RngStream& rng);

/// Parameter-wise weighted average. weighting == kBySampleCount uses
/// n_k / sum(n); kUniform uses 1/k. All models must hold the same kind and
/// shapes; counts must be positive. The reduction anchors on the first model
/// and sums weighted differences with compensated accumulation, so k copies
/// of one model aggregate to that model bitwise and client order changes the
/// result by at most rounding noise.
AnyModel aggregate(std::span<const AnyModel> client_models,
                   std::span<const std::size_t> client_sample_counts, Weighting weighting);

/// Everything a round needs besides FederationConfig: the data, the
/// partition, the local hyperparameters, and the execution knobs.
struct RoundEnv {
  std::span<const LabeledSample> train;
  std::span<const LabeledSample> test;
  const ClientPartition* partition = nullptr;
  FFHyper ff_hyper;
  BPHyper bp_hyper;
  bool include_first_layer = true;  // FF prediction: count the first layer's goodness
  std::size_t parallel_clients = 1; // worker threads for local training
  /// Monotonic seconds used for wall_seconds; swap in a constant clock to
  /// make metrics byte-reproducible. Null means std::chrono::steady_clock.
  std::function<double()> clock;
  /// Called with each appended metrics row (round 0 included); may be null.
  std::function<void(const RoundMetrics&)> on_round;
};

struct RoundState {
  std::size_t round_index = 0;  // rounds completed so far
  AnyModel model;
  std::vector<RoundMetrics> history;
};

/// One FedAvg round: sample ceil(fraction*m) clients from stream
/// [seed, sampling, round]; each trains a copy of the global model on its
/// partition with stream [seed, train, round, client]; aggregate in
/// ascending client-id order; evaluate on the full test set; append a
/// metrics row. mean_train_loss is the unweighted mean of the sampled
/// clients' local losses. Clients may run on parallel_clients threads; the
/// result is identical to the sequential schedule.
void run_round(RoundState& state, const FederationConfig& config, const RoundEnv& env);

/// Fresh model from stream [seed, init], a round-0 evaluation row (loss
/// 0, no sampled clients), then global_rounds rounds. Bitwise deterministic
/// for a fixed seed. hidden_widths sizes the model; input_dim comes from the
/// training data.
RoundState run_federation(const FederationConfig& config, const RoundEnv& env,
                          std::span<const std::size_t> hidden_widths, double theta,
                          int num_labels);

/// run_round without the evaluation pass, for wall-clock measurements of
/// training cost alone. Returns the seconds the round took and appends no
/// metrics row (env.test may be empty).
double train_round_seconds(RoundState& state, const FederationConfig& config,
                           const RoundEnv& env);

}  // namespace fedfwd
