#include "fedfwd/evaluate.hpp"

#include <stdexcept>

namespace fedfwd {

namespace {

double accuracy(std::span<const int> predictions, std::span<const LabeledSample> test) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (predictions[i] == test[i].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace

double evaluate_ff(const FFModel& model, std::span<const LabeledSample> test,
                   bool include_first_layer) {
  if (test.empty()) throw std::invalid_argument("evaluate_ff: empty test set");
  return accuracy(predict_batch(model, test, include_first_layer), test);
}

double evaluate_bp(const BPModel& model, std::span<const LabeledSample> test) {
  if (test.empty()) throw std::invalid_argument("evaluate_bp: empty test set");
  return accuracy(predict_batch_bp(model, test), test);
}

}  // namespace fedfwd
