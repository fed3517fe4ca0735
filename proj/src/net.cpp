#include "evopde/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>

#include "evopde/errors.hpp"
#include "evopde/jets.hpp"
#include "evopde/rng.hpp"

namespace evopde {

using nlohmann::json;

std::string to_string(Activation a) {
  return a == Activation::kSin ? "sin" : "tanh";
}

Activation activation_from_string(const std::string& name) {
  if (name == "sin") return Activation::kSin;
  if (name == "tanh") return Activation::kTanh;
  throw ConfigError("unsupported activation '" + name + "'");
}

SurrogateNet::SurrogateNet(std::vector<int> layer_sizes, Activation activation)
    : activation_(activation), layer_sizes_(std::move(layer_sizes)) {
  if (layer_sizes_.size() < 2)
    throw StructuralError("net needs at least input and output layers");
  weights_.reserve(layer_sizes_.size() - 1);
  biases_.reserve(layer_sizes_.size() - 1);
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    weights_.emplace_back(Eigen::MatrixXd::Zero(layer_sizes_[l + 1], layer_sizes_[l]));
    biases_.emplace_back(Eigen::VectorXd::Zero(layer_sizes_[l + 1]));
  }
  validate();
}

int SurrogateNet::max_width() const {
  return *std::max_element(layer_sizes_.begin(), layer_sizes_.end());
}

void SurrogateNet::validate() const {
  if (layer_sizes_.size() < 2 || layer_sizes_.front() != 2 || layer_sizes_.back() != 1)
    throw StructuralError("net must map 2 inputs to 1 output");
  for (int w : layer_sizes_)
    if (w < 1) throw StructuralError("layer width must be positive");
  if (weights_.size() != layer_sizes_.size() - 1 || biases_.size() != weights_.size())
    throw StructuralError("weight count does not match layer sizes");
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (weights_[l].rows() != layer_sizes_[l + 1] || weights_[l].cols() != layer_sizes_[l] ||
        biases_[l].size() != layer_sizes_[l + 1])
      throw StructuralError("weight shapes do not chain with layer sizes");
  }
}

SurrogateNet SurrogateNet::init_random(const std::vector<int>& layer_sizes,
                                       Activation activation, std::uint64_t seed,
                                       double first_layer_scale) {
  SurrogateNet net(layer_sizes, activation);
  Rng rng(derive_seed(seed, "net-init"));
  for (std::size_t l = 0; l < net.weights_.size(); ++l) {
    auto& w = net.weights_[l];
    const double fan_in = static_cast<double>(w.cols());
    const double fan_out = static_cast<double>(w.rows());
    double bound = std::sqrt(6.0 / (fan_in + fan_out));
    if (l == 0) bound *= first_layer_scale;
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        w(i, j) = rng.uniform(-bound, bound);
    // biases start at zero
  }
  return net;
}

double forward(const SurrogateNet& net, double x, double t) {
  return derivatives_at(net, x, t, Axis::kX, 0).derivs[0];
}

void TrainConfig::validate() const {
  if (learning_rate <= 0 || max_epochs <= 0 || batch_size <= 0 || patience <= 0)
    throw ConfigError("training parameters must be positive");
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw ConfigError("validation fraction must lie in (0, 1)");
  if (lr_decay <= 0 || lr_decay > 1.0)
    throw ConfigError("lr_decay must lie in (0, 1]");
}

namespace {

struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  long t = 0;

  explicit AdamState(const SurrogateNet& net) {
    for (const auto& w : net.weights_) {
      mw.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
      vw.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : net.biases_) {
      mb.push_back(Eigen::VectorXd::Zero(b.size()));
      vb.push_back(Eigen::VectorXd::Zero(b.size()));
    }
  }
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void adam_step(AdamState& st, SurrogateNet& net,
               const std::vector<Eigen::MatrixXd>& gw,
               const std::vector<Eigen::VectorXd>& gb, double lr) {
  ++st.t;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(st.t));
  for (std::size_t l = 0; l < gw.size(); ++l) {
    st.mw[l] = kBeta1 * st.mw[l] + (1.0 - kBeta1) * gw[l];
    st.vw[l] = kBeta2 * st.vw[l] + (1.0 - kBeta2) * gw[l].cwiseAbs2();
    net.weights_[l].array() -=
        lr * (st.mw[l].array() / c1) /
        ((st.vw[l].array() / c2).sqrt() + kAdamEps);
    st.mb[l] = kBeta1 * st.mb[l] + (1.0 - kBeta1) * gb[l];
    st.vb[l] = kBeta2 * st.vb[l] + (1.0 - kBeta2) * gb[l].cwiseAbs2();
    net.biases_[l].array() -=
        lr * (st.mb[l].array() / c1) /
        ((st.vb[l].array() / c2).sqrt() + kAdamEps);
  }
}

// Batched forward pass; activations[l] holds layer l's post-activation
// outputs (activations[0] is the input batch), one row per sample. When
// act_derivs is non-null, act_derivs[l] receives d(activation)/dz for
// hidden layer l+1, as needed by backprop.
double batch_forward(const SurrogateNet& net, const Eigen::MatrixXd& x,
                     const Eigen::VectorXd& y,
                     std::vector<Eigen::MatrixXd>& activations,
                     std::vector<Eigen::MatrixXd>* act_derivs) {
  const int n_layers = net.layer_count();
  activations[0] = x;
  for (int l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z =
        (activations[l] * net.weights_[l].transpose()).rowwise() +
        net.biases_[l].transpose();
    if (l + 1 < n_layers) {
      if (net.activation_ == Activation::kSin) {
        activations[l + 1] = z.array().sin().matrix();
        if (act_derivs) (*act_derivs)[l] = z.array().cos().matrix();
      } else {
        activations[l + 1] = z.array().tanh().matrix();
        if (act_derivs)
          (*act_derivs)[l] =
              (1.0 - activations[l + 1].array().square()).matrix();
      }
    } else {
      activations[l + 1] = std::move(z);
    }
  }
  return (activations[n_layers].col(0) - y).squaredNorm() / x.rows();
}

double eval_mse(const SurrogateNet& net, const Eigen::MatrixXd& x,
                const Eigen::VectorXd& y) {
  std::vector<Eigen::MatrixXd> acts(net.layer_count() + 1);
  return batch_forward(net, x, y, acts, nullptr);
}

}  // namespace

double loss_gradients(const SurrogateNet& net, const Eigen::MatrixXd& x,
                      const Eigen::VectorXd& y,
                      std::vector<Eigen::MatrixXd>& grad_w,
                      std::vector<Eigen::VectorXd>& grad_b) {
  const int n_layers = net.layer_count();
  grad_w.resize(n_layers);
  grad_b.resize(n_layers);
  std::vector<Eigen::MatrixXd> acts(n_layers + 1);
  std::vector<Eigen::MatrixXd> dacts(n_layers > 0 ? n_layers - 1 : 0);
  const double mse = batch_forward(net, x, y, acts, &dacts);

  Eigen::MatrixXd delta =
      (2.0 / static_cast<double>(x.rows())) * (acts[n_layers].col(0) - y);
  for (int l = n_layers - 1; l >= 0; --l) {
    grad_w[l] = delta.transpose() * acts[l];
    grad_b[l] = delta.colwise().sum().transpose();
    if (l > 0)
      delta = ((delta * net.weights_[l]).array() * dacts[l - 1].array()).matrix();
  }
  return mse;
}

TrainResult train(SurrogateNet& net, const std::vector<Sample>& samples,
                  const TrainConfig& cfg) {
  cfg.validate();
  net.validate();
  if (samples.empty()) throw StructuralError("no training samples");

  // Normalize inputs to [-1, 1] per axis over the sample bounding box.
  double x_lo = samples[0].x, x_hi = samples[0].x;
  double t_lo = samples[0].t, t_hi = samples[0].t;
  for (const auto& s : samples) {
    x_lo = std::min(x_lo, s.x);
    x_hi = std::max(x_hi, s.x);
    t_lo = std::min(t_lo, s.t);
    t_hi = std::max(t_hi, s.t);
  }
  net.norm_.x_center = 0.5 * (x_lo + x_hi);
  net.norm_.x_scale = x_hi > x_lo ? 0.5 * (x_hi - x_lo) : 1.0;
  net.norm_.t_center = 0.5 * (t_lo + t_hi);
  net.norm_.t_scale = t_hi > t_lo ? 0.5 * (t_hi - t_lo) : 1.0;

  const std::size_t n = samples.size();
  Rng rng(derive_seed(cfg.seed, "train"));

  // Seeded 80/20-style split.
  std::vector<std::uint32_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
  for (std::size_t i = n; i > 1; --i)
    std::swap(order[i - 1], order[rng.below(i)]);
  std::size_t n_val = static_cast<std::size_t>(cfg.val_fraction * n);
  if (n_val >= n) n_val = n - 1;
  const std::size_t n_train = n - n_val;

  auto fill = [&](std::size_t begin, std::size_t count, Eigen::MatrixXd& x,
                  Eigen::VectorXd& y) {
    x.resize(static_cast<Eigen::Index>(count), 2);
    y.resize(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
      const Sample& s = samples[order[begin + i]];
      x(static_cast<Eigen::Index>(i), 0) = net.norm_.nx(s.x);
      x(static_cast<Eigen::Index>(i), 1) = net.norm_.nt(s.t);
      y(static_cast<Eigen::Index>(i)) = s.u;
    }
  };
  Eigen::MatrixXd x_train, x_val;
  Eigen::VectorXd y_train, y_val;
  fill(0, n_train, x_train, y_train);
  if (n_val > 0) fill(n_train, n_val, x_val, y_val);

  AdamState adam(net);
  std::vector<Eigen::MatrixXd> gw;
  std::vector<Eigen::VectorXd> gb;

  TrainResult result;
  result.best_val = std::numeric_limits<double>::infinity();
  SurrogateNet best = net;
  int since_best = 0;
  double lr = cfg.learning_rate;

  std::vector<std::uint32_t> batch_order(n_train);
  for (std::size_t i = 0; i < n_train; ++i)
    batch_order[i] = static_cast<std::uint32_t>(i);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    for (std::size_t i = n_train; i > 1; --i)
      std::swap(batch_order[i - 1], batch_order[rng.below(i)]);

    double epoch_sse = 0.0;
    for (std::size_t start = 0; start < n_train;
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t bs =
          std::min<std::size_t>(cfg.batch_size, n_train - start);
      Eigen::MatrixXd xb(static_cast<Eigen::Index>(bs), 2);
      Eigen::VectorXd yb(static_cast<Eigen::Index>(bs));
      for (std::size_t i = 0; i < bs; ++i) {
        xb.row(static_cast<Eigen::Index>(i)) =
            x_train.row(batch_order[start + i]);
        yb(static_cast<Eigen::Index>(i)) = y_train(batch_order[start + i]);
      }

      const double batch_mse = loss_gradients(net, xb, yb, gw, gb);
      epoch_sse += batch_mse * static_cast<double>(bs);
      adam_step(adam, net, gw, gb, lr);
    }
    const double train_mse = epoch_sse / static_cast<double>(n_train);
    if (!std::isfinite(train_mse))
      throw TrainingError("training diverged", epoch);
    result.train_loss.push_back(train_mse);

    const double val_mse =
        n_val > 0 ? eval_mse(net, x_val, y_val) : train_mse;
    result.val_loss.push_back(val_mse);
    if (val_mse < result.best_val) {
      result.best_val = val_mse;
      result.best_epoch = epoch;
      best = net;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
    lr *= cfg.lr_decay;
  }

  net = std::move(best);
  return result;
}

std::string SurrogateNet::to_json_string() const {
  json j;
  j["layer_sizes"] = layer_sizes_;
  j["activation"] = to_string(activation_);
  j["norm"] = {{"x_center", norm_.x_center},
               {"x_scale", norm_.x_scale},
               {"t_center", norm_.t_center},
               {"t_scale", norm_.t_scale}};
  json weights = json::array();
  json biases = json::array();
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(weights_[l].size()));
    for (Eigen::Index i = 0; i < weights_[l].rows(); ++i)
      for (Eigen::Index jx = 0; jx < weights_[l].cols(); ++jx)
        w.push_back(weights_[l](i, jx));  // row-major
    weights.push_back(w);
    biases.push_back(std::vector<double>(biases_[l].data(),
                                         biases_[l].data() + biases_[l].size()));
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  return j.dump();
}

SurrogateNet SurrogateNet::from_json_string(const std::string& text) {
  json j = json::parse(text);
  SurrogateNet net(j.at("layer_sizes").get<std::vector<int>>(),
                   activation_from_string(j.at("activation").get<std::string>()));
  net.norm_.x_center = j.at("norm").at("x_center").get<double>();
  net.norm_.x_scale = j.at("norm").at("x_scale").get<double>();
  net.norm_.t_center = j.at("norm").at("t_center").get<double>();
  net.norm_.t_scale = j.at("norm").at("t_scale").get<double>();
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  if (weights.size() != net.weights_.size() || biases.size() != net.biases_.size())
    throw StructuralError("net file layer count mismatch");
  for (std::size_t l = 0; l < net.weights_.size(); ++l) {
    const auto w = weights[l].get<std::vector<double>>();
    auto& dst = net.weights_[l];
    if (w.size() != static_cast<std::size_t>(dst.size()))
      throw StructuralError("net file weight size mismatch");
    std::size_t idx = 0;
    for (Eigen::Index i = 0; i < dst.rows(); ++i)
      for (Eigen::Index jx = 0; jx < dst.cols(); ++jx) dst(i, jx) = w[idx++];
    const auto b = biases[l].get<std::vector<double>>();
    if (b.size() != static_cast<std::size_t>(net.biases_[l].size()))
      throw StructuralError("net file bias size mismatch");
    for (std::size_t i = 0; i < b.size(); ++i)
      net.biases_[l](static_cast<Eigen::Index>(i)) = b[i];
  }
  net.validate();
  return net;
}

void SurrogateNet::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << to_json_string() << '\n';
}

SurrogateNet SurrogateNet::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open net file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  return from_json_string(text);
}

}  // namespace evopde
