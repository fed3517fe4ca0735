#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "evopde/solvers.hpp"

namespace evopde {

enum class Activation { kSin, kTanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Affine map of inputs into the box the net was trained on. Derivative
/// jets extracted in normalized coordinates are rescaled back through the
/// chain rule (each x-order picks up a 1/x_scale factor).
struct InputNorm {
  double x_center = 0.0, x_scale = 1.0;
  double t_center = 0.0, t_scale = 1.0;

  double nx(double x) const { return (x - x_center) / x_scale; }
  double nt(double t) const { return (t - t_center) / t_scale; }
};

/// Fully-connected feed-forward net mapping (x, t) to u. Hidden layers all
/// use the configured activation; the output layer is affine.
class SurrogateNet {
 public:
  SurrogateNet() = default;
  SurrogateNet(std::vector<int> layer_sizes, Activation activation);

  /// Fan-scaled uniform initialization (seeded). first_layer_scale
  /// multiplies the input-layer weights so periodic activations can reach
  /// high frequencies across a [-1,1]-normalized domain.
  static SurrogateNet init_random(const std::vector<int>& layer_sizes,
                                  Activation activation, std::uint64_t seed,
                                  double first_layer_scale = 1.0);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  int layer_count() const { return static_cast<int>(weights_.size()); }
  int max_width() const;

  // weights[l] has shape (layer_sizes[l+1], layer_sizes[l]).
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
  Activation activation_ = Activation::kSin;
  InputNorm norm_;

  void validate() const;

  void save(const std::string& path) const;
  static SurrogateNet load(const std::string& path);
  std::string to_json_string() const;
  static SurrogateNet from_json_string(const std::string& text);

 private:
  std::vector<int> layer_sizes_;
};

/// Plain evaluation NN(x, t). Shares its arithmetic with the jet
/// propagation, so jet order 0 reproduces this value bit for bit.
double forward(const SurrogateNet& net, double x, double t);

struct TrainConfig {
  double learning_rate = 1e-3;
  double lr_decay = 1.0;  // multiplicative, per epoch
  int max_epochs = 5000;
  int batch_size = 256;
  double val_fraction = 0.2;
  int patience = 500;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainResult {
  std::vector<double> train_loss;  // per epoch, mean squared error
  std::vector<double> val_loss;
  int best_epoch = 0;
  double best_val = 0.0;
};

/// Minimize mean squared error with adaptive-moment SGD; early stop when
/// validation loss fails to improve for `patience` epochs; the returned
/// net carries the best-validation-epoch parameters. Also sets the net's
/// input normalization from the sample bounding box.
TrainResult train(SurrogateNet& net, const std::vector<Sample>& samples,
                  const TrainConfig& cfg);

/// Batch MSE and its parameter gradients; the training loop's backward
/// pass, exposed so tests can check it against finite differences.
/// x holds normalized inputs, one row per sample.
double loss_gradients(const SurrogateNet& net, const Eigen::MatrixXd& x,
                      const Eigen::VectorXd& y,
                      std::vector<Eigen::MatrixXd>& grad_w,
                      std::vector<Eigen::VectorXd>& grad_b);

}  // namespace evopde
