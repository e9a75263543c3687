#pragma once

#include <filesystem>
#include <variant>

#include "fedfwd/bp_net.hpp"
#include "fedfwd/ff_net.hpp"

namespace fedfwd {

using AnyModel = std::variant<FFModel, BPModel>;

/// Binary model checkpoint, all fields little-endian regardless of host:
///   bytes 0..7   magic "FFWDCKPT"
///   u32          format version (currently 1)
///   u32          model kind: 0 = forward-forward, 1 = backprop
///   u32          layer count
///   u32          label count
///   f64          goodness threshold (0.0 for backprop models)
///   per layer:   u32 out_dim, u32 in_dim,
///                out_dim*in_dim f64 weights (row-major), out_dim f64 bias
/// Saving then loading reproduces the model bitwise; saving the same model
/// twice produces byte-identical files.
void save_checkpoint(const std::filesystem::path& path, const AnyModel& model);
void save_checkpoint(const std::filesystem::path& path, const FFModel& model);
void save_checkpoint(const std::filesystem::path& path, const BPModel& model);

/// Throws IoError when the file cannot be read, FormatError on bad magic,
/// unknown version or kind, or truncated payload.
AnyModel load_checkpoint(const std::filesystem::path& path);

}  // namespace fedfwd
