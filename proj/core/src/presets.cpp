#include "fedfwd/presets.hpp"

#include "fedfwd/errors.hpp"

namespace fedfwd {

namespace {

ExperimentConfig full_scale_base(DatasetKind dataset) {
  ExperimentConfig c;  // defaults are already the full-scale settings
  c.dataset = dataset;
  return c;
}

std::string dataset_tag(DatasetKind d) {
  return d == DatasetKind::kMnist ? "mnist" : "cifar10";
}

Preset accuracy_grid(const std::string& name, DatasetKind dataset) {
  Preset p;
  p.name = name;
  p.description = "Accuracy grid on " + dataset_tag(dataset) +
                  ": depth {2,3} x trainer {ff,bp} x {iid,non-iid}, full scale";
  for (std::size_t depth : {std::size_t{2}, std::size_t{3}}) {
    for (const char* trainer : {"ff", "bp"}) {
      for (bool iid : {true, false}) {
        PresetRun run;
        ExperimentConfig c = full_scale_base(dataset);
        c.depth = depth;
        c.trainer = trainer[0] == 'f' ? TrainerKind::kFF : TrainerKind::kBP;
        c.iid = iid;
        run.name = name + "_" + dataset_tag(dataset) + "_d" + std::to_string(depth) + "_" +
                   trainer + (iid ? "_iid" : "_noniid");
        c.output_csv = run.name + ".csv";
        run.config = c;
        p.runs.push_back(std::move(run));
      }
    }
  }
  return p;
}

Preset timing_sweep() {
  Preset p;
  p.name = "table2";
  p.description =
      "Median wall seconds to train one global round, FF vs BP, by batch size";
  const std::vector<std::size_t> batches = {1, 4, 16, 64, 128, 256, 512, 1024, 2048};
  for (DatasetKind d : {DatasetKind::kMnist, DatasetKind::kCifar10}) {
    TimingSpec spec;
    spec.name = "table2_" + dataset_tag(d);
    spec.config = full_scale_base(d);
    spec.batches = batches;
    p.timings.push_back(std::move(spec));
  }
  return p;
}

Preset symba_grid() {
  Preset p;
  p.name = "symba";
  p.description =
      "Loss-function stability on non-iid MNIST: depth {2,3,4} x loss {ff,symba}";
  for (std::size_t depth : {std::size_t{2}, std::size_t{3}, std::size_t{4}}) {
    for (const char* loss : {"ff", "symba"}) {
      PresetRun run;
      ExperimentConfig c = full_scale_base(DatasetKind::kMnist);
      c.depth = depth;
      c.trainer = TrainerKind::kFF;
      c.loss = loss[0] == 'f' ? LossKind::kFF : LossKind::kSymBa;
      c.iid = false;
      run.name = std::string("symba_mnist_d") + std::to_string(depth) + "_" + loss + "_noniid";
      c.output_csv = run.name + ".csv";
      run.config = c;
      p.runs.push_back(std::move(run));
    }
  }
  return p;
}

}  // namespace

Preset get_preset(const std::string& name) {
  if (name == "table1") return accuracy_grid("table1", DatasetKind::kMnist);
  if (name == "table3") return accuracy_grid("table3", DatasetKind::kCifar10);
  if (name == "table2") return timing_sweep();
  if (name == "symba") return symba_grid();
  throw ConfigError("unknown preset '" + name + "' (try: table1, table2, table3, symba)");
}

std::vector<std::string> preset_names() { return {"table1", "table2", "table3", "symba"}; }

}  // namespace fedfwd
