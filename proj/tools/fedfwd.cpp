#include <charconv>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedfwd/checkpoint.hpp"
#include "fedfwd/dataset_synth.hpp"
#include "fedfwd/errors.hpp"
#include "fedfwd/experiment.hpp"
#include "fedfwd/metrics.hpp"
#include "fedfwd/presets.hpp"

namespace {

using namespace fedfwd;

std::string fixed6(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 6);
  return std::string(buf, res.ptr);
}

// Config fields that may be set from the command line; a flag given on the
// command line wins over the config file, which wins over defaults.
struct Overrides {
  std::optional<std::string> dataset, trainer, loss, data_dir, output_csv;
  std::optional<std::size_t> depth, width, m_clients, rounds, local_epochs, batch_size;
  std::optional<bool> iid;
  std::optional<double> fraction, lr, theta, symba_alpha;
  std::optional<std::uint64_t> seed;
};

void add_override_flags(CLI::App& cmd, Overrides& ov) {
  cmd.add_option("--dataset", ov.dataset, "mnist or cifar10")
      ->check(CLI::IsMember({"mnist", "cifar10"}));
  cmd.add_option("--data-dir", ov.data_dir, "Directory holding the dataset files");
  cmd.add_option("--trainer", ov.trainer, "ff or bp")->check(CLI::IsMember({"ff", "bp"}));
  cmd.add_option("--loss", ov.loss, "ff or symba (forward-forward trainer only)")
      ->check(CLI::IsMember({"ff", "symba"}));
  cmd.add_option("--depth", ov.depth, "Hidden layer count");
  cmd.add_option("--width", ov.width, "Units per hidden layer");
  cmd.add_option("--iid", ov.iid, "true: uniform split; false: label shards");
  cmd.add_option("--m-clients", ov.m_clients, "Number of clients");
  cmd.add_option("--fraction", ov.fraction, "Participating fraction per round, (0,1]");
  cmd.add_option("--rounds", ov.rounds, "Global rounds");
  cmd.add_option("--local-epochs", ov.local_epochs, "Local epochs per round");
  cmd.add_option("--batch-size", ov.batch_size, "Local mini-batch size");
  cmd.add_option("--lr", ov.lr, "Local SGD learning rate");
  cmd.add_option("--theta", ov.theta, "Goodness threshold");
  cmd.add_option("--symba-alpha", ov.symba_alpha, "Scale of the pairwise loss");
  cmd.add_option("--seed", ov.seed, "Root seed for every random stream");
  cmd.add_option("--output-csv", ov.output_csv, "Metrics CSV path");
}

void apply_overrides(ExperimentConfig& c, const Overrides& ov) {
  if (ov.dataset) {
    c.dataset = *ov.dataset == "mnist" ? DatasetKind::kMnist : DatasetKind::kCifar10;
  }
  if (ov.data_dir) c.data_dir = *ov.data_dir;
  if (ov.trainer) c.trainer = *ov.trainer == "ff" ? TrainerKind::kFF : TrainerKind::kBP;
  if (ov.loss) c.loss = *ov.loss == "ff" ? LossKind::kFF : LossKind::kSymBa;
  if (ov.depth) c.depth = *ov.depth;
  if (ov.width) c.width = *ov.width;
  if (ov.iid) c.iid = *ov.iid;
  if (ov.m_clients) c.m_clients = *ov.m_clients;
  if (ov.fraction) c.fraction = *ov.fraction;
  if (ov.rounds) c.rounds = *ov.rounds;
  if (ov.local_epochs) c.local_epochs = *ov.local_epochs;
  if (ov.batch_size) c.batch_size = *ov.batch_size;
  if (ov.lr) c.lr = *ov.lr;
  if (ov.theta) c.theta = *ov.theta;
  if (ov.symba_alpha) c.symba_alpha = *ov.symba_alpha;
  if (ov.seed) c.seed = *ov.seed;
  if (ov.output_csv) c.output_csv = *ov.output_csv;
  validate_config(c);
}

struct ExecFlags {
  std::size_t parallel = 1;
  bool zero_wall = false;
  bool verbose = false;
};

void add_exec_flags(CLI::App& cmd, ExecFlags& ex) {
  cmd.add_option("--parallel", ex.parallel,
                 "Worker threads for client training (results are identical)");
  cmd.add_flag("--zero-wall", ex.zero_wall,
               "Report wall_seconds as 0 so metrics files are byte-reproducible");
  cmd.add_flag("-v,--verbose", ex.verbose, "Print each round's metrics to stderr");
}

ExperimentOptions make_options(const ExecFlags& ex) {
  ExperimentOptions opt;
  opt.parallel_clients = ex.parallel == 0 ? 1 : ex.parallel;
  if (ex.zero_wall) opt.clock = [] { return 0.0; };
  if (ex.verbose) {
    opt.on_round = [](const RoundMetrics& m) {
      std::cerr << "round " << m.round << ": accuracy " << fixed6(m.test_accuracy)
                << ", train loss " << fixed6(m.mean_train_loss) << ", "
                << fixed6(m.wall_seconds) << " s\n";
    };
  }
  return opt;
}

int cmd_run(const std::string& config_path, const Overrides& ov, const ExecFlags& ex,
            const std::string& save_model) {
  ExperimentConfig config;
  if (!config_path.empty()) config = parse_config_file(config_path);
  apply_overrides(config, ov);

  const RoundState state = run_experiment(config, make_options(ex));
  write_metrics(state.history, config.output_csv);
  if (!save_model.empty()) save_checkpoint(save_model, state.model);

  const RoundMetrics& last = state.history.back();
  std::cout << "final test accuracy " << fixed6(last.test_accuracy) << " after "
            << state.round_index << " round(s); metrics written to "
            << config.output_csv.string() << "\n";
  return 0;
}

int cmd_time(const std::string& config_path, const Overrides& ov, const ExecFlags& ex,
             const std::vector<std::size_t>& batches, std::size_t timed_rounds) {
  ExperimentConfig config;
  if (!config_path.empty()) config = parse_config_file(config_path);
  apply_overrides(config, ov);

  const std::vector<TimingRow> table =
      time_rounds(config, batches, timed_rounds, make_options(ex));
  std::cout << "batch_size,ff_seconds,bp_seconds,ff_over_bp\n";
  for (const TimingRow& row : table) {
    std::cout << row.batch_size << ',' << fixed6(row.ff_seconds) << ','
              << fixed6(row.bp_seconds) << ',' << fixed6(row.ff_seconds / row.bp_seconds)
              << "\n";
  }
  return 0;
}

int cmd_preset(const std::string& name, bool dry_run, const std::string& out_dir,
               const Overrides& ov, const ExecFlags& ex) {
  const Preset preset = get_preset(name);
  std::cout << preset.name << ": " << preset.description << "\n";

  for (const PresetRun& run : preset.runs) {
    ExperimentConfig config = run.config;
    if (!out_dir.empty()) config.output_csv = std::filesystem::path(out_dir) / config.output_csv;
    apply_overrides(config, ov);
    if (dry_run) {
      std::cout << "  would run " << run.name << " -> " << config.output_csv.string() << "\n";
      continue;
    }
    std::cerr << "running " << run.name << "...\n";
    const RoundState state = run_experiment(config, make_options(ex));
    write_metrics(state.history, config.output_csv);
    std::cout << "  " << run.name << ": final accuracy "
              << fixed6(state.history.back().test_accuracy) << " -> "
              << config.output_csv.string() << "\n";
  }

  for (const TimingSpec& spec : preset.timings) {
    ExperimentConfig config = spec.config;
    apply_overrides(config, ov);
    if (dry_run) {
      std::cout << "  would time " << spec.name << " at batches";
      for (std::size_t b : spec.batches) std::cout << ' ' << b;
      std::cout << "\n";
      continue;
    }
    std::cerr << "timing " << spec.name << "...\n";
    const std::vector<TimingRow> table = time_rounds(config, spec.batches, 3, make_options(ex));
    std::cout << spec.name << "\nbatch_size,ff_seconds,bp_seconds,ff_over_bp\n";
    for (const TimingRow& row : table) {
      std::cout << row.batch_size << ',' << fixed6(row.ff_seconds) << ','
                << fixed6(row.bp_seconds) << ',' << fixed6(row.ff_seconds / row.bp_seconds)
                << "\n";
    }
  }
  return 0;
}

int cmd_synthdata(const std::string& out_dir, const std::string& dataset,
                  std::size_t train_count, std::size_t test_count, std::uint64_t seed) {
  SynthOptions opt;
  opt.train_count = train_count;
  opt.test_count = test_count;
  opt.seed = seed;
  std::filesystem::create_directories(out_dir);
  if (dataset == "mnist" || dataset == "both") {
    write_synthetic_mnist(out_dir, opt);
    std::cout << "wrote synthetic digit IDX files to " << out_dir << "\n";
  }
  if (dataset == "cifar10" || dataset == "both") {
    write_synthetic_cifar10(out_dir, opt);
    std::cout << "wrote synthetic CIFAR-10-format batches to " << out_dir << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic federated-learning simulator: forward-forward "
               "training vs a backprop baseline"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run one federated experiment and write a metrics CSV");
  std::string run_config;
  run->add_option("--config", run_config, "JSON config file")->check(CLI::ExistingFile);
  Overrides run_ov;
  ExecFlags run_ex;
  add_override_flags(*run, run_ov);
  add_exec_flags(*run, run_ex);
  std::string save_model;
  run->add_option("--save-model", save_model, "Write the final global model here");

  // time
  auto* time = app.add_subcommand("time", "Measure wall seconds per training round, FF vs BP");
  std::string time_config;
  time->add_option("--config", time_config, "JSON config file")->check(CLI::ExistingFile);
  std::vector<std::size_t> batches;
  time->add_option("--batches", batches, "Batch sizes, e.g. 1,4,16")
      ->required()
      ->delimiter(',');
  std::size_t timed_rounds = 3;
  time->add_option("--timed-rounds", timed_rounds, "Timed rounds per measurement (median)");
  Overrides time_ov;
  ExecFlags time_ex;
  add_override_flags(*time, time_ov);
  add_exec_flags(*time, time_ex);

  // preset
  auto* preset = app.add_subcommand("preset", "Run a named full-scale experiment bundle");
  std::string preset_name;
  preset->add_option("name", preset_name, "table1 | table2 | table3 | symba")->required();
  bool dry_run = false;
  preset->add_flag("--dry-run", dry_run, "List the bundle's runs without executing");
  std::string out_dir;
  preset->add_option("--out-dir", out_dir, "Directory for the emitted CSV files");
  Overrides preset_ov;
  ExecFlags preset_ex;
  add_override_flags(*preset, preset_ov);
  add_exec_flags(*preset, preset_ex);

  // synthdata
  auto* synth = app.add_subcommand(
      "synthdata", "Generate synthetic datasets in MNIST IDX / CIFAR-10 binary formats");
  std::string synth_out = "data";
  synth->add_option("--out", synth_out, "Output directory");
  std::string synth_dataset = "mnist";
  synth->add_option("--dataset", synth_dataset, "mnist, cifar10, or both")
      ->check(CLI::IsMember({"mnist", "cifar10", "both"}));
  std::size_t synth_train = 60000, synth_test = 10000;
  synth->add_option("--train-count", synth_train, "Training samples");
  synth->add_option("--test-count", synth_test, "Test samples");
  std::uint64_t synth_seed = 7;
  synth->add_option("--seed", synth_seed, "Generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_config, run_ov, run_ex, save_model);
    if (time->parsed()) return cmd_time(time_config, time_ov, time_ex, batches, timed_rounds);
    if (preset->parsed()) return cmd_preset(preset_name, dry_run, out_dir, preset_ov, preset_ex);
    if (synth->parsed()) {
      return cmd_synthdata(synth_out, synth_dataset, synth_train, synth_test, synth_seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "fedfwd: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
