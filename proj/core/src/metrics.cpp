#include "fedfwd/metrics.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <system_error>

#include "fedfwd/errors.hpp"

namespace fedfwd {

namespace {

constexpr char kHeader[] = "round,test_accuracy,mean_train_loss,wall_seconds,sampled_clients";

// Locale-independent fixed 6-decimal rendering via to_chars.
void append_fixed6(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 6);
  if (res.ec != std::errc()) throw NumericError("cannot format value for metrics CSV");
  out.append(buf, res.ptr);
}

double parse_double(std::string_view s, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError("metrics CSV: bad " + what + " value '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t parse_index(std::string_view s, const std::string& what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError("metrics CSV: bad " + what + " value '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(line.substr(start));
      return parts;
    }
    parts.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::string format_metrics(std::span<const RoundMetrics> log) {
  std::string out = kHeader;
  out.push_back('\n');
  for (const RoundMetrics& row : log) {
    out += std::to_string(row.round);
    out.push_back(',');
    append_fixed6(out, row.test_accuracy);
    out.push_back(',');
    append_fixed6(out, row.mean_train_loss);
    out.push_back(',');
    append_fixed6(out, row.wall_seconds);
    out.push_back(',');
    for (std::size_t i = 0; i < row.sampled_clients.size(); ++i) {
      if (i > 0) out.push_back(';');
      out += std::to_string(row.sampled_clients[i]);
    }
    out.push_back('\n');
  }
  return out;
}

void write_metrics(std::span<const RoundMetrics> log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open metrics file for writing: " + path.string());
  const std::string text = format_metrics(log);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing metrics file: " + path.string());
}

std::vector<RoundMetrics> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open metrics file for reading: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("metrics CSV is empty: " + path.string());
  if (line != kHeader) throw FormatError("metrics CSV has wrong header: " + path.string());

  std::vector<RoundMetrics> log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 5) {
      throw FormatError("metrics CSV row needs 5 fields, got " +
                        std::to_string(fields.size()) + ": " + path.string());
    }
    RoundMetrics row;
    row.round = static_cast<std::size_t>(parse_index(fields[0], "round"));
    row.test_accuracy = parse_double(fields[1], "test_accuracy");
    row.mean_train_loss = parse_double(fields[2], "mean_train_loss");
    row.wall_seconds = parse_double(fields[3], "wall_seconds");
    if (!fields[4].empty()) {
      for (std::string_view id : split(fields[4], ';')) {
        row.sampled_clients.push_back(static_cast<std::size_t>(parse_index(id, "client id")));
      }
    }
    log.push_back(std::move(row));
  }
  return log;
}

}  // namespace fedfwd
