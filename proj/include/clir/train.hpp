#pragma once

#include <cstdint>
#include <vector>

#include "clir/nn.hpp"

namespace clir {

struct TrainHyper {
  double lr = 1e-3;
  std::int64_t batch_size = 32;
  std::int64_t epochs = 3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled, skips layer-norm gains and biases
  std::uint64_t seed = 0;

  void validate() const;
};

// Adam with bias correction. Gradients must already be averaged over the
// batch; step() consumes them and leaves clearing to the caller.
class Adam {
 public:
  Adam(Model& model, const TrainHyper& hyper);
  void step();
  std::int64_t steps_taken() const { return t_; }

 private:
  Model* model_;
  TrainHyper hyper_;
  std::int64_t t_ = 0;
  std::vector<ag::Mat> m_;
  std::vector<ag::Mat> v_;
};

struct EpochStats {
  std::int64_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;  // measured on pre-update predictions
  double dev_loss = 0.0;        // NaN when the dev set is empty
  double dev_accuracy = 0.0;
};

// Minibatch training with a fresh shuffle per epoch. Throws if the training
// set is empty or any sample loss goes non-finite.
std::vector<EpochStats> train(Model& model, const std::vector<EncodedSample>& train_set,
                              const std::vector<EncodedSample>& dev_set,
                              const TrainHyper& hyper);

// Compares backpropagated gradients on a freshly initialized model against
// central finite differences of the loss, one coordinate at a time. Returns
// the worst relative error max(|a - n| / max(1e-8, |a| + |n|)).
double grad_check(const ModelConfig& config, const EncodedSample& sample, double epsilon);

}  // namespace clir
