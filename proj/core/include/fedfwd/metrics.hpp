#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fedfwd {

/// One CSV row of experiment telemetry. Row 0 is the evaluation of the
/// freshly initialized model (loss 0, no sampled clients); row r >= 1
/// describes global round r.
struct RoundMetrics {
  std::size_t round = 0;
  double test_accuracy = 0.0;
  double mean_train_loss = 0.0;
  double wall_seconds = 0.0;
  std::vector<std::size_t> sampled_clients;
};

/// The emitted CSV: header `round,test_accuracy,mean_train_loss,
/// wall_seconds,sampled_clients`, one row per entry, reals printed with
/// exactly six decimals independent of locale, client ids joined by ';'.
/// The same log always formats to the same bytes.
std::string format_metrics(std::span<const RoundMetrics> log);

/// format_metrics written to path. Throws IoError with the path on failure.
void write_metrics(std::span<const RoundMetrics> log, const std::filesystem::path& path);

/// Parse a file produced by write_metrics. Values round-trip exactly up to
/// the six-decimal quantization. Throws FormatError on any schema deviation.
std::vector<RoundMetrics> read_metrics(const std::filesystem::path& path);

}  // namespace fedfwd
