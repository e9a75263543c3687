#include "fedfwd/federation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <variant>

#include "fedfwd/errors.hpp"
#include "fedfwd/evaluate.hpp"

namespace fedfwd {

namespace {

double steady_seconds() {
  const auto now = std::chrono::steady_clock::now().time_since_epoch();
  return std::chrono::duration<double>(now).count();
}

struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double term) {
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      comp += (sum - t) + term;
    } else {
      comp += (term - t) + sum;
    }
    sum = t;
  }

  double value() const { return sum + comp; }
};

// result = anchor + sum_i w_i * (model_i - anchor), entry-wise compensated.
// Zero differences contribute exactly zero, so identical inputs reproduce
// the anchor bitwise.
std::vector<AffineLayer> aggregate_layers(
    std::span<const std::vector<AffineLayer>*> models, std::span<const double> weights) {
  const std::vector<AffineLayer>& anchor = *models[0];
  std::vector<AffineLayer> out = anchor;
  for (std::size_t k = 0; k < anchor.size(); ++k) {
    auto out_w = out[k].weights.data();
    const auto anchor_w = anchor[k].weights.data();
    for (std::size_t e = 0; e < out_w.size(); ++e) {
      NeumaierSum acc;
      for (std::size_t i = 0; i < models.size(); ++i) {
        acc.add(weights[i] * ((*models[i])[k].weights.data()[e] - anchor_w[e]));
      }
      out_w[e] = anchor_w[e] + acc.value();
    }
    for (std::size_t e = 0; e < out[k].bias.size(); ++e) {
      NeumaierSum acc;
      for (std::size_t i = 0; i < models.size(); ++i) {
        acc.add(weights[i] * ((*models[i])[k].bias[e] - anchor[k].bias[e]));
      }
      out[k].bias[e] = anchor[k].bias[e] + acc.value();
    }
  }
  return out;
}

std::vector<double> normalized_weights(std::span<const std::size_t> counts,
                                       Weighting weighting) {
  std::vector<double> w(counts.size());
  if (weighting == Weighting::kUniform) {
    const double inv = 1.0 / static_cast<double>(counts.size());
    for (double& x : w) x = inv;
    return w;
  }
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    w[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return w;
}

}  // namespace

std::vector<std::size_t> sample_clients(std::size_t m, double fraction, RngStream& rng) {
  if (m == 0) throw std::invalid_argument("sample_clients: no clients");
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw std::invalid_argument("sample_clients: fraction must be in (0, 1]");
  }
  const auto k = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(m)));

  // Partial Fisher-Yates: after i swaps the prefix holds a uniform
  // without-replacement draw of size i.
  std::vector<std::size_t> ids(m);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_below(m - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

AnyModel aggregate(std::span<const AnyModel> client_models,
                   std::span<const std::size_t> client_sample_counts, Weighting weighting) {
  if (client_models.empty()) throw std::invalid_argument("aggregate: no models");
  if (client_models.size() != client_sample_counts.size()) {
    throw std::invalid_argument("aggregate: one sample count per model required");
  }
  for (std::size_t c : client_sample_counts) {
    if (c == 0) throw std::invalid_argument("aggregate: sample counts must be positive");
  }

  const std::vector<double> weights = normalized_weights(client_sample_counts, weighting);

  const bool is_ff = std::holds_alternative<FFModel>(client_models[0]);
  std::vector<const std::vector<AffineLayer>*> stacks;
  stacks.reserve(client_models.size());
  for (const AnyModel& m : client_models) {
    if (std::holds_alternative<FFModel>(m) != is_ff) {
      throw std::invalid_argument("aggregate: mixed model kinds");
    }
    stacks.push_back(is_ff ? &std::get<FFModel>(m).layers : &std::get<BPModel>(m).layers);
    if (!same_shapes(*stacks.front(), *stacks.back())) {
      throw ShapeError("aggregate: client models differ in shape");
    }
  }

  std::vector<AffineLayer> layers = aggregate_layers(stacks, weights);
  if (is_ff) {
    FFModel out = std::get<FFModel>(client_models[0]);
    out.layers = std::move(layers);
    return out;
  }
  BPModel out = std::get<BPModel>(client_models[0]);
  out.layers = std::move(layers);
  return out;
}

namespace {

struct ClientJob {
  std::size_t client_id = 0;
  AnyModel model;  // trained copy
  double mean_loss = 0.0;
  std::size_t sample_count = 0;
};

ClientJob train_client(const AnyModel& global, const FederationConfig& config,
                       const RoundEnv& env, std::size_t round_index, std::size_t client_id) {
  ClientJob job;
  job.client_id = client_id;
  const std::vector<std::size_t>& indices = env.partition->assignments[client_id];
  job.sample_count = indices.size();
  SampleView view(env.train, indices);
  RngStream stream(config.seed,
                   {stream_purpose::kTrain, static_cast<std::uint64_t>(round_index),
                    static_cast<std::uint64_t>(client_id)});
  if (config.trainer_kind == TrainerKind::kFF) {
    FFTrainResult r = local_train_ff(std::get<FFModel>(global), view, env.ff_hyper, stream);
    job.model = std::move(r.model);
    job.mean_loss = r.mean_loss;
  } else {
    BPTrainResult r = local_train_bp(std::get<BPModel>(global), view, env.bp_hyper, stream);
    job.model = std::move(r.model);
    job.mean_loss = r.mean_loss;
  }
  return job;
}

// Sampling + local training + aggregation; returns the sampled ids and the
// unweighted mean of the clients' local losses.
std::pair<std::vector<std::size_t>, double> advance_round(RoundState& state,
                                                          const FederationConfig& config,
                                                          const RoundEnv& env) {
  if (env.partition == nullptr) throw std::invalid_argument("run_round: null partition");
  if (env.partition->assignments.size() != config.m_clients) {
    throw std::invalid_argument("run_round: partition size does not match m_clients");
  }
  const std::size_t round_index = state.round_index + 1;  // 1-based round ids
  RngStream sampling_stream(config.seed, {stream_purpose::kSampling,
                                          static_cast<std::uint64_t>(round_index)});
  std::vector<std::size_t> selected =
      sample_clients(config.m_clients, config.participation_fraction, sampling_stream);

  std::vector<ClientJob> jobs(selected.size());
  const std::size_t workers =
      std::max<std::size_t>(1, std::min(env.parallel_clients, selected.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < selected.size(); ++i) {
      jobs[i] = train_client(state.model, config, env, round_index, selected[i]);
    }
  } else {
    // Slot i is owned by exactly one worker; results land in sampled order,
    // so the later reduction is schedule-independent.
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= selected.size()) return;
          jobs[i] = train_client(state.model, config, env, round_index, selected[i]);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  std::vector<AnyModel> models;
  std::vector<std::size_t> counts;
  models.reserve(jobs.size());
  counts.reserve(jobs.size());
  double loss_sum = 0.0;
  for (ClientJob& job : jobs) {
    models.push_back(std::move(job.model));
    counts.push_back(job.sample_count);
    loss_sum += job.mean_loss;
  }
  state.model = aggregate(models, counts, config.weighting);
  state.round_index = round_index;
  return {std::move(selected), loss_sum / static_cast<double>(jobs.size())};
}

}  // namespace

void run_round(RoundState& state, const FederationConfig& config, const RoundEnv& env) {
  const auto clock = env.clock ? env.clock : steady_seconds;
  const double t0 = clock();
  auto [selected, mean_loss] = advance_round(state, config, env);

  RoundMetrics row;
  row.round = state.round_index;
  row.mean_train_loss = mean_loss;
  row.sampled_clients = std::move(selected);
  row.test_accuracy = std::holds_alternative<FFModel>(state.model)
                          ? evaluate_ff(std::get<FFModel>(state.model), env.test,
                                        env.include_first_layer)
                          : evaluate_bp(std::get<BPModel>(state.model), env.test);
  row.wall_seconds = clock() - t0;
  state.history.push_back(std::move(row));
  if (env.on_round) env.on_round(state.history.back());
}

double train_round_seconds(RoundState& state, const FederationConfig& config,
                           const RoundEnv& env) {
  const auto clock = env.clock ? env.clock : steady_seconds;
  const double t0 = clock();
  advance_round(state, config, env);
  return clock() - t0;
}

RoundState run_federation(const FederationConfig& config, const RoundEnv& env,
                          std::span<const std::size_t> hidden_widths, double theta,
                          int num_labels) {
  if (env.train.empty()) throw std::invalid_argument("run_federation: empty training set");
  const auto clock = env.clock ? env.clock : steady_seconds;
  const double t0 = clock();

  const std::size_t input_dim = env.train[0].pixels.size();
  RngStream init_stream(config.seed, {stream_purpose::kInit});
  RoundState state;
  if (config.trainer_kind == TrainerKind::kFF) {
    state.model = init_ff_model(input_dim, hidden_widths, theta, num_labels, init_stream);
  } else {
    BPModel m = init_bp_model(input_dim, hidden_widths, num_labels, init_stream);
    state.model = std::move(m);
  }

  RoundMetrics init_row;
  init_row.round = 0;
  init_row.test_accuracy = std::holds_alternative<FFModel>(state.model)
                               ? evaluate_ff(std::get<FFModel>(state.model), env.test,
                                             env.include_first_layer)
                               : evaluate_bp(std::get<BPModel>(state.model), env.test);
  init_row.wall_seconds = clock() - t0;
  state.history.push_back(std::move(init_row));
  if (env.on_round) env.on_round(state.history.back());

  for (std::size_t r = 0; r < config.global_rounds; ++r) {
    run_round(state, config, env);
  }
  return state;
}

}  // namespace fedfwd
