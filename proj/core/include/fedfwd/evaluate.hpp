#pragma once

#include <span>

#include "fedfwd/bp_net.hpp"
#include "fedfwd/ff_net.hpp"

namespace fedfwd {

/// Fraction of test samples whose prediction matches the true label.
/// Throws std::invalid_argument on an empty test set.
double evaluate_ff(const FFModel& model, std::span<const LabeledSample> test,
                   bool include_first_layer = true);
double evaluate_bp(const BPModel& model, std::span<const LabeledSample> test);

}  // namespace fedfwd
