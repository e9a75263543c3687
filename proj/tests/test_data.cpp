#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "fedfwd/dataset.hpp"
#include "fedfwd/dataset_synth.hpp"
#include "fedfwd/errors.hpp"
#include "fedfwd/metrics.hpp"
#include "fedfwd/partition.hpp"
#include "fedfwd/rng.hpp"
#include "test_util.hpp"

using namespace fedfwd;
using namespace fedfwd::testutil;

namespace {

template <class E, class F>
std::string thrown_message(F&& f) {
  try {
    f();
  } catch (const E& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("mnist loader round-trips hand-written files") {
  TempDir dir;
  // Three 2x2 images with known bytes.
  const std::vector<unsigned char> pixels{0, 51, 102, 153, 204, 255, 0, 255, 10, 20, 30, 40};
  const std::vector<unsigned char> labels{7, 0, 9};
  write_bytes(dir.file("imgs"), idx_images(3, 2, 2, pixels));
  write_bytes(dir.file("lbls"), idx_labels(3, labels));

  const auto data = load_mnist(dir.file("imgs"), dir.file("lbls"));
  REQUIRE(data.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    REQUIRE(data[i].pixels.size() == 4);
    CHECK(data[i].label == static_cast<int>(labels[i]));
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(data[i].pixels[j] == doctest::Approx(pixels[i * 4 + j] / 255.0).epsilon(1e-12));
  }
}

TEST_CASE("mnist loader rejects malformed files") {
  TempDir dir;
  const std::vector<unsigned char> pixels(8, 128);
  write_bytes(dir.file("ok_imgs"), idx_images(2, 2, 2, pixels));
  write_bytes(dir.file("ok_lbls"), idx_labels(2, {1, 2}));

  CHECK_THROWS_AS(load_mnist(dir.file("missing"), dir.file("ok_lbls")), IoError);

  auto bad_magic = idx_images(2, 2, 2, pixels);
  bad_magic[3] = 0x04;
  write_bytes(dir.file("bad_magic"), bad_magic);
  CHECK(contains(thrown_message<FormatError>(
                     [&] { load_mnist(dir.file("bad_magic"), dir.file("ok_lbls")); }),
                 "bad magic"));

  auto truncated = idx_images(2, 2, 2, pixels);
  truncated.resize(truncated.size() - 3);
  write_bytes(dir.file("trunc"), truncated);
  CHECK_THROWS_AS(load_mnist(dir.file("trunc"), dir.file("ok_lbls")), FormatError);

  write_bytes(dir.file("short_lbls"), idx_labels(1, {1}));
  CHECK_THROWS_AS(load_mnist(dir.file("ok_imgs"), dir.file("short_lbls")), FormatError);

  write_bytes(dir.file("big_lbl"), idx_labels(2, {1, 10}));
  CHECK_THROWS_AS(load_mnist(dir.file("ok_imgs"), dir.file("big_lbl")), FormatError);
}

TEST_CASE("cifar10 loader reads records and rejects malformed files") {
  TempDir dir;
  std::vector<unsigned char> rec(2 * 3073);
  rec[0] = 4;  // label of record 0
  for (std::size_t i = 1; i <= 3072; ++i) rec[i] = static_cast<unsigned char>(i % 251);
  rec[3073] = 9;  // label of record 1
  write_bytes(dir.file("batch.bin"), rec);

  const std::filesystem::path paths[] = {dir.file("batch.bin")};
  const auto data = load_cifar10(paths);
  REQUIRE(data.size() == 2);
  CHECK(data[0].label == 4);
  CHECK(data[1].label == 9);
  REQUIRE(data[0].pixels.size() == kCifarDim);
  CHECK(data[0].pixels[0] == doctest::Approx(1 % 251 / 255.0).epsilon(1e-12));
  CHECK(data[0].pixels[100] == doctest::Approx(101 % 251 / 255.0).epsilon(1e-12));

  std::vector<unsigned char> odd(3073 + 10, 0);
  write_bytes(dir.file("odd.bin"), odd);
  const std::filesystem::path odd_paths[] = {dir.file("odd.bin")};
  CHECK_THROWS_AS(load_cifar10(odd_paths), FormatError);

  std::vector<unsigned char> bad_label(3073, 0);
  bad_label[0] = 12;
  write_bytes(dir.file("bad_label.bin"), bad_label);
  const std::filesystem::path bad_paths[] = {dir.file("bad_label.bin")};
  CHECK_THROWS_AS(load_cifar10(bad_paths), FormatError);

  const std::filesystem::path missing[] = {dir.file("nope.bin")};
  CHECK_THROWS_AS(load_cifar10(missing), IoError);
}

TEST_CASE("label embedding overwrites the leading pixels only") {
  LabeledSample s;
  s.pixels.assign(20, 0.25);
  s.label = 3;

  EmbeddedSample pos = embed_label(s, 3);
  CHECK(pos.polarity == Polarity::kPositive);
  CHECK(pos.embedded_label == 3);
  for (int j = 0; j < kNumClasses; ++j)
    CHECK(pos.pixels[static_cast<std::size_t>(j)] == (j == 3 ? kEmbedMagnitude : 0.0));
  for (std::size_t j = kNumClasses; j < 20; ++j) CHECK(pos.pixels[j] == 0.25);

  EmbeddedSample neg = embed_label(s, 5);
  CHECK(neg.polarity == Polarity::kNegative);
  CHECK(neg.embedded_label == 5);
  CHECK(neg.pixels[5] == kEmbedMagnitude);
  CHECK(neg.pixels[3] == 0.0);

  std::vector<double> row(12, 0.5);
  embed_into(row, 0);
  CHECK(row[0] == kEmbedMagnitude);
  for (int j = 1; j < kNumClasses; ++j) CHECK(row[static_cast<std::size_t>(j)] == 0.0);
  CHECK(row[10] == 0.5);
  CHECK(row[11] == 0.5);

  CHECK_THROWS_AS(embed_label(s, 10), std::invalid_argument);
  CHECK_THROWS_AS(embed_label(s, -1), std::invalid_argument);
}

TEST_CASE("negative samples never embed the true label and are near-uniform") {
  LabeledSample s;
  s.pixels.assign(16, 0.1);
  s.label = 3;
  RngStream rng(31, {1});

  std::vector<int> counts(kNumClasses, 0);
  const int n = 18000;
  for (int i = 0; i < n; ++i) {
    const int wrong = draw_wrong_label(3, kNumClasses, rng);
    CHECK(wrong != 3);
    CHECK(wrong >= 0);
    CHECK(wrong < kNumClasses);
    ++counts[wrong];
  }
  CHECK(counts[3] == 0);
  // 18000 draws over 9 labels: expectation 2000, 3 sigma around 127.
  for (int label = 0; label < kNumClasses; ++label) {
    if (label == 3) continue;
    CHECK(std::abs(counts[label] - 2000) <= 130);
  }

  EmbeddedSample neg = make_negative(s, rng);
  CHECK(neg.polarity == Polarity::kNegative);
  CHECK(neg.embedded_label != s.label);
  CHECK(draw_wrong_label(0, 2, rng) == 1);
  CHECK(draw_wrong_label(1, 2, rng) == 0);
  CHECK_THROWS_AS(draw_wrong_label(0, 1, rng), std::invalid_argument);
}

TEST_CASE("sample view selects rows without copying") {
  const auto data = random_samples(6, 4, 123);
  const std::vector<std::size_t> idx{4, 1};
  SampleView view(data, idx);
  REQUIRE(view.size() == 2);
  CHECK(&view[0] == &data[4]);
  CHECK(&view[1] == &data[1]);

  SampleView whole{std::span<const LabeledSample>(data)};
  REQUIRE(whole.size() == 6);
  CHECK(&whole[3] == &data[3]);
  CHECK_FALSE(whole.empty());
  CHECK(SampleView{}.empty());
}

TEST_CASE("synthetic digits are deterministic, quantized, and cover all classes") {
  SynthOptions opt;
  const auto a = make_synthetic_digits(300, 28, 7, 0, opt);
  const auto b = make_synthetic_digits(300, 28, 7, 0, opt);
  const auto other_seed = make_synthetic_digits(300, 28, 8, 0, opt);
  const auto other_tag = make_synthetic_digits(300, 28, 7, 1, opt);

  REQUIRE(a.size() == 300);
  std::set<int> seen;
  bool same_seed_equal = true, seed_differs = false, tag_differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].pixels.size() == kMnistDim);
    seen.insert(a[i].label);
    same_seed_equal &= a[i].pixels == b[i].pixels && a[i].label == b[i].label;
    seed_differs |= a[i].pixels != other_seed[i].pixels;
    tag_differs |= a[i].pixels != other_tag[i].pixels;
    for (double p : a[i].pixels) {
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      // Byte quantization: p * 255 must be an integer.
      CHECK(std::abs(p * 255.0 - std::round(p * 255.0)) < 1e-9);
    }
  }
  CHECK(same_seed_equal);
  CHECK(seed_differs);
  CHECK(tag_differs);
  CHECK(seen.size() == static_cast<std::size_t>(kNumClasses));
}

TEST_CASE("synthetic dataset files load back through the real loaders") {
  TempDir dir;
  SynthOptions opt;
  opt.train_count = 64;
  opt.test_count = 16;
  write_synthetic_mnist(dir.path(), opt);

  const auto train = load_mnist(dir.file("train-images-idx3-ubyte"),
                                dir.file("train-labels-idx1-ubyte"));
  const auto test = load_mnist(dir.file("t10k-images-idx3-ubyte"),
                               dir.file("t10k-labels-idx1-ubyte"));
  CHECK(train.size() == 64);
  CHECK(test.size() == 16);
  CHECK(train[0].pixels.size() == kMnistDim);

  // Writing again reproduces the files byte for byte.
  TempDir dir2;
  write_synthetic_mnist(dir2.path(), opt);
  CHECK(read_bytes(dir.file("train-images-idx3-ubyte")) ==
        read_bytes(dir2.file("train-images-idx3-ubyte")));
  CHECK(read_bytes(dir.file("t10k-labels-idx1-ubyte")) ==
        read_bytes(dir2.file("t10k-labels-idx1-ubyte")));

  write_synthetic_cifar10(dir.path(), opt);
  std::vector<std::filesystem::path> batches;
  for (int i = 1; i <= 5; ++i) batches.push_back(dir.file("data_batch_" + std::to_string(i) + ".bin"));
  const auto ctrain = load_cifar10(batches);
  const std::filesystem::path tb[] = {dir.file("test_batch.bin")};
  const auto ctest = load_cifar10(tb);
  CHECK(ctrain.size() == 64);
  CHECK(ctest.size() == 16);
  CHECK(ctrain[0].pixels.size() == kCifarDim);
}

TEST_CASE("iid partition splits a permutation into near-equal disjoint chunks") {
  RngStream rng(41, {stream_purpose::kPartition});
  ClientPartition part = partition_iid(10, 3, rng);
  REQUIRE(part.num_clients() == 3);

  std::vector<std::size_t> sizes;
  std::set<std::size_t> all;
  for (const auto& c : part.assignments) {
    CHECK_FALSE(c.empty());
    sizes.push_back(c.size());
    all.insert(c.begin(), c.end());
  }
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<std::size_t>{3, 3, 4});
  CHECK(all.size() == 10);  // disjoint cover of every index
  CHECK(*all.rbegin() == 9);

  RngStream rng2(41, {stream_purpose::kPartition});
  ClientPartition same = partition_iid(10, 3, rng2);
  CHECK(same.assignments == part.assignments);

  RngStream rng3(41, {stream_purpose::kPartition});
  ClientPartition one = partition_iid(5, 5, rng3);
  for (const auto& c : one.assignments) CHECK(c.size() == 1);

  RngStream rng4(41, {stream_purpose::kPartition});
  CHECK_THROWS_AS(partition_iid(3, 4, rng4), std::invalid_argument);
  CHECK_THROWS_AS(partition_iid(3, 0, rng4), std::invalid_argument);
}

TEST_CASE("label-shard partition concentrates labels per client") {
  // 60 samples, exactly 6 per label: shards align with label boundaries, so
  // every client sees at most 2 distinct labels.
  auto data = random_samples(60, 8, 55);
  RngStream rng(42, {stream_purpose::kPartition});
  ClientPartition part = partition_noniid(data, 5, 2, rng);
  REQUIRE(part.num_clients() == 5);

  std::set<std::size_t> all;
  for (const auto& client : part.assignments) {
    CHECK(client.size() == 12);
    std::set<int> labels;
    for (std::size_t i : client) labels.insert(data[i].label);
    CHECK(labels.size() <= 2);
    all.insert(client.begin(), client.end());
  }
  CHECK(all.size() == 60);

  // Uneven count: sizes stay near-equal and the cover stays exact.
  auto data61 = random_samples(61, 8, 56);
  RngStream rng2(43, {stream_purpose::kPartition});
  ClientPartition part61 = partition_noniid(data61, 5, 2, rng2);
  std::set<std::size_t> all61;
  for (const auto& client : part61.assignments) {
    CHECK(client.size() >= 12);
    CHECK(client.size() <= 13);
    all61.insert(client.begin(), client.end());
  }
  CHECK(all61.size() == 61);

  RngStream rng3(44, {stream_purpose::kPartition});
  CHECK_THROWS_AS(partition_noniid(data, 31, 2, rng3), std::invalid_argument);
  CHECK_THROWS_AS(partition_noniid(data, 0, 2, rng3), std::invalid_argument);
  CHECK_THROWS_AS(partition_noniid(data, 5, 0, rng3), std::invalid_argument);
}

TEST_CASE("metrics format to the documented bytes") {
  std::vector<RoundMetrics> log(2);
  log[0].round = 0;
  log[0].test_accuracy = 0.5;
  log[1].round = 1;
  log[1].test_accuracy = 0.9876543;
  log[1].mean_train_loss = 1.5;
  log[1].wall_seconds = 0.25;
  log[1].sampled_clients = {1, 2, 10};

  const std::string want =
      "round,test_accuracy,mean_train_loss,wall_seconds,sampled_clients\n"
      "0,0.500000,0.000000,0.000000,\n"
      "1,0.987654,1.500000,0.250000,1;2;10\n";
  CHECK(format_metrics(log) == want);
  CHECK(format_metrics(std::span<const RoundMetrics>(log.data(), 0)) ==
        "round,test_accuracy,mean_train_loss,wall_seconds,sampled_clients\n");
}

TEST_CASE("metrics files round-trip through write and read") {
  TempDir dir;
  std::vector<RoundMetrics> log(3);
  log[0].round = 0;
  log[0].test_accuracy = 0.125;
  log[1].round = 1;
  log[1].test_accuracy = 0.75;
  log[1].mean_train_loss = 2.25;
  log[1].wall_seconds = 1.5;
  log[1].sampled_clients = {0, 7};
  log[2].round = 2;
  log[2].test_accuracy = 1.0;
  log[2].sampled_clients = {3};

  const auto path = dir.file("metrics.csv");
  write_metrics(log, path);
  const auto back = read_metrics(path);
  REQUIRE(back.size() == log.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    CHECK(back[i].round == log[i].round);
    CHECK(back[i].test_accuracy == log[i].test_accuracy);  // values chosen exact in 6 decimals
    CHECK(back[i].mean_train_loss == log[i].mean_train_loss);
    CHECK(back[i].wall_seconds == log[i].wall_seconds);
    CHECK(back[i].sampled_clients == log[i].sampled_clients);
  }

  // Reading what was written and formatting again is byte-stable.
  write_metrics(back, dir.file("again.csv"));
  CHECK(read_bytes(path) == read_bytes(dir.file("again.csv")));
}

TEST_CASE("metrics reader rejects schema deviations") {
  TempDir dir;
  const auto write_text = [&](const std::string& name, const std::string& text) {
    std::ofstream f(dir.file(name), std::ios::binary);
    f << text;
    return dir.file(name);
  };

  CHECK_THROWS_AS(read_metrics(dir.file("missing.csv")), IoError);
  CHECK_THROWS_AS(read_metrics(write_text("empty.csv", "")), FormatError);
  CHECK_THROWS_AS(read_metrics(write_text("hdr.csv", "round,acc\n")), FormatError);
  CHECK_THROWS_AS(
      read_metrics(write_text(
          "fields.csv",
          "round,test_accuracy,mean_train_loss,wall_seconds,sampled_clients\n1,0.5,0.1\n")),
      FormatError);
  CHECK(contains(
      thrown_message<FormatError>([&] {
        read_metrics(write_text(
            "bad.csv",
            "round,test_accuracy,mean_train_loss,wall_seconds,sampled_clients\n"
            "1,abc,0.100000,0.000000,\n"));
      }),
      "test_accuracy"));
  CHECK(contains(
      thrown_message<FormatError>([&] {
        read_metrics(write_text(
            "badid.csv",
            "round,test_accuracy,mean_train_loss,wall_seconds,sampled_clients\n"
            "1,0.500000,0.100000,0.000000,1;x\n"));
      }),
      "client id"));
}
