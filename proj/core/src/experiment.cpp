#include "fedfwd/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fedfwd/errors.hpp"

namespace fedfwd {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& key, const std::string& detail) {
  throw ConfigError("config key '" + key + "': " + detail);
}

std::string expect_string(const json& j, const std::string& key) {
  if (!j.is_string()) bad_key(key, "expected a string");
  return j.get<std::string>();
}

double expect_number(const json& j, const std::string& key) {
  if (!j.is_number()) bad_key(key, "expected a number");
  return j.get<double>();
}

std::size_t expect_count(const json& j, const std::string& key) {
  if (!j.is_number_unsigned()) bad_key(key, "expected a non-negative integer");
  return j.get<std::size_t>();
}

void apply_key(ExperimentConfig& c, const std::string& key, const json& value) {
  if (key == "dataset") {
    const std::string v = expect_string(value, key);
    if (v == "mnist") c.dataset = DatasetKind::kMnist;
    else if (v == "cifar10") c.dataset = DatasetKind::kCifar10;
    else bad_key(key, "must be 'mnist' or 'cifar10', got '" + v + "'");
  } else if (key == "data_dir") {
    c.data_dir = expect_string(value, key);
  } else if (key == "trainer") {
    const std::string v = expect_string(value, key);
    if (v == "ff") c.trainer = TrainerKind::kFF;
    else if (v == "bp") c.trainer = TrainerKind::kBP;
    else bad_key(key, "must be 'ff' or 'bp', got '" + v + "'");
  } else if (key == "loss") {
    const std::string v = expect_string(value, key);
    if (v == "ff") c.loss = LossKind::kFF;
    else if (v == "symba") c.loss = LossKind::kSymBa;
    else bad_key(key, "must be 'ff' or 'symba', got '" + v + "'");
  } else if (key == "depth") {
    c.depth = expect_count(value, key);
  } else if (key == "width") {
    c.width = expect_count(value, key);
  } else if (key == "iid") {
    if (!value.is_boolean()) bad_key(key, "expected true or false");
    c.iid = value.get<bool>();
  } else if (key == "m_clients") {
    c.m_clients = expect_count(value, key);
  } else if (key == "fraction") {
    c.fraction = expect_number(value, key);
  } else if (key == "rounds") {
    c.rounds = expect_count(value, key);
  } else if (key == "local_epochs") {
    c.local_epochs = expect_count(value, key);
  } else if (key == "batch_size") {
    c.batch_size = expect_count(value, key);
  } else if (key == "lr") {
    c.lr = expect_number(value, key);
  } else if (key == "theta") {
    c.theta = expect_number(value, key);
  } else if (key == "symba_alpha") {
    c.symba_alpha = expect_number(value, key);
  } else if (key == "seed") {
    if (!value.is_number_unsigned()) bad_key(key, "expected a non-negative integer");
    c.seed = value.get<std::uint64_t>();
  } else if (key == "output_csv") {
    c.output_csv = expect_string(value, key);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig config;
  for (const auto& [key, value] : root.items()) {
    apply_key(config, key, value);
  }
  validate_config(config);
  return config;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void validate_config(const ExperimentConfig& config) {
  const auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(config.depth >= 1 && config.depth <= 16, "depth must be in [1, 16]");
  require(config.width >= 1 && config.width <= 8192, "width must be in [1, 8192]");
  require(config.m_clients >= 1 && config.m_clients <= 1000000,
          "m_clients must be in [1, 1000000]");
  require(std::isfinite(config.fraction) && config.fraction > 0.0 && config.fraction <= 1.0,
          "fraction must be in (0, 1]");
  require(config.rounds <= 10000000, "rounds must be at most 10000000");
  require(config.local_epochs >= 1 && config.local_epochs <= 1000,
          "local_epochs must be in [1, 1000]");
  require(config.batch_size >= 1 && config.batch_size <= 1000000,
          "batch_size must be in [1, 1000000]");
  require(std::isfinite(config.lr) && config.lr >= 0.0 && config.lr <= 1000.0,
          "lr must be in [0, 1000]");
  require(std::isfinite(config.theta) && config.theta >= 0.0 && config.theta <= 1e6,
          "theta must be in [0, 1e6]");
  require(std::isfinite(config.symba_alpha) && config.symba_alpha > 0.0 &&
              config.symba_alpha <= 1e6,
          "symba_alpha must be in (0, 1e6]");
  require(!config.data_dir.empty(), "data_dir must not be empty");
  require(!config.output_csv.empty(), "output_csv must not be empty");
}

DataSplits load_dataset(DatasetKind kind, const std::filesystem::path& data_dir) {
  DataSplits splits;
  if (kind == DatasetKind::kMnist) {
    splits.train = load_mnist(data_dir / "train-images-idx3-ubyte",
                              data_dir / "train-labels-idx1-ubyte");
    splits.test = load_mnist(data_dir / "t10k-images-idx3-ubyte",
                             data_dir / "t10k-labels-idx1-ubyte");
    return splits;
  }
  std::vector<std::filesystem::path> train_batches;
  for (int i = 1; i <= 5; ++i) {
    train_batches.push_back(data_dir / ("data_batch_" + std::to_string(i) + ".bin"));
  }
  splits.train = load_cifar10(train_batches);
  const std::filesystem::path test_batch[] = {data_dir / "test_batch.bin"};
  splits.test = load_cifar10(test_batch);
  return splits;
}

namespace {

ClientPartition make_partition(const ExperimentConfig& config,
                               std::span<const LabeledSample> train,
                               std::size_t shards_per_client) {
  RngStream stream(config.seed, {stream_purpose::kPartition});
  if (config.iid) return partition_iid(train.size(), config.m_clients, stream);
  return partition_noniid(train, config.m_clients, shards_per_client, stream);
}

FederationConfig make_federation_config(const ExperimentConfig& config) {
  FederationConfig fed;
  fed.m_clients = config.m_clients;
  fed.participation_fraction = config.fraction;
  fed.global_rounds = config.rounds;
  fed.local_epochs = config.local_epochs;
  fed.weighting = Weighting::kBySampleCount;
  fed.trainer_kind = config.trainer;
  fed.seed = config.seed;
  return fed;
}

RoundEnv make_env(const ExperimentConfig& config, std::span<const LabeledSample> train,
                  std::span<const LabeledSample> test, const ClientPartition& partition,
                  const ExperimentOptions& opt) {
  RoundEnv env;
  env.train = train;
  env.test = test;
  env.partition = &partition;
  env.ff_hyper.lr = config.lr;
  env.ff_hyper.batch_size = config.batch_size;
  env.ff_hyper.local_epochs = config.local_epochs;
  env.ff_hyper.loss_kind = config.loss;
  env.ff_hyper.symba_alpha = config.symba_alpha;
  env.bp_hyper.lr = config.lr;
  env.bp_hyper.batch_size = config.batch_size;
  env.bp_hyper.local_epochs = config.local_epochs;
  env.include_first_layer = opt.include_first_layer;
  env.parallel_clients = opt.parallel_clients;
  env.clock = opt.clock;
  env.on_round = opt.on_round;
  return env;
}

}  // namespace

RoundState run_experiment(const ExperimentConfig& config, std::span<const LabeledSample> train,
                          std::span<const LabeledSample> test, const ExperimentOptions& opt) {
  validate_config(config);
  if (opt.shards_per_client == 0) {
    throw std::invalid_argument("run_experiment: shards_per_client must be >= 1");
  }
  const ClientPartition partition = make_partition(config, train, opt.shards_per_client);
  const FederationConfig fed = make_federation_config(config);
  const RoundEnv env = make_env(config, train, test, partition, opt);
  const std::vector<std::size_t> widths(config.depth, config.width);
  return run_federation(fed, env, widths, config.theta, kNumClasses);
}

RoundState run_experiment(const ExperimentConfig& config, const ExperimentOptions& opt) {
  const DataSplits data = load_dataset(config.dataset, config.data_dir);
  return run_experiment(config, data.train, data.test, opt);
}

std::vector<TimingRow> time_rounds(const ExperimentConfig& config,
                                   std::span<const std::size_t> batch_sizes,
                                   std::span<const LabeledSample> train,
                                   std::size_t timed_rounds, const ExperimentOptions& opt) {
  validate_config(config);
  if (batch_sizes.empty()) throw std::invalid_argument("time_rounds: no batch sizes");
  if (timed_rounds == 0) throw std::invalid_argument("time_rounds: timed_rounds must be >= 1");

  // One dataset, one partition, one layer layout for every measurement;
  // only trainer kind and batch size vary.
  const ClientPartition partition = make_partition(config, train, opt.shards_per_client);
  const std::vector<std::size_t> widths(config.depth, config.width);

  std::vector<TimingRow> table;
  for (std::size_t batch : batch_sizes) {
    TimingRow row;
    row.batch_size = batch;
    for (const TrainerKind trainer : {TrainerKind::kFF, TrainerKind::kBP}) {
      ExperimentConfig variant = config;
      variant.trainer = trainer;
      variant.batch_size = batch;
      FederationConfig fed = make_federation_config(variant);
      const RoundEnv env = make_env(variant, train, {}, partition, opt);

      RngStream init_stream(fed.seed, {stream_purpose::kInit});
      RoundState state;
      if (trainer == TrainerKind::kFF) {
        state.model =
            init_ff_model(train[0].pixels.size(), widths, variant.theta, kNumClasses,
                          init_stream);
      } else {
        state.model =
            init_bp_model(train[0].pixels.size(), widths, kNumClasses, init_stream);
      }

      train_round_seconds(state, fed, env);  // warmup
      std::vector<double> seconds(timed_rounds);
      for (double& s : seconds) s = train_round_seconds(state, fed, env);
      std::sort(seconds.begin(), seconds.end());
      const double median = timed_rounds % 2 == 1
                                ? seconds[timed_rounds / 2]
                                : 0.5 * (seconds[timed_rounds / 2 - 1] +
                                         seconds[timed_rounds / 2]);
      (trainer == TrainerKind::kFF ? row.ff_seconds : row.bp_seconds) = median;
    }
    table.push_back(row);
  }
  return table;
}

std::vector<TimingRow> time_rounds(const ExperimentConfig& config,
                                   std::span<const std::size_t> batch_sizes,
                                   std::size_t timed_rounds, const ExperimentOptions& opt) {
  const DataSplits data = load_dataset(config.dataset, config.data_dir);
  return time_rounds(config, batch_sizes, data.train, timed_rounds, opt);
}

}  // namespace fedfwd
