#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace loro {

enum class Activation { Tanh, Relu };

// Dense multilayer perceptron with an identity output layer. Weights are
// stored row-major per output unit, so weights[l](o, i) connects input i of
// layer l to output o.
struct Mlp {
  std::vector<int> layer_sizes;            // input, hidden..., output
  std::vector<Eigen::MatrixXd> weights;    // [l]: out x in
  std::vector<Eigen::VectorXd> biases;     // [l]: out
  Activation activation = Activation::Tanh;

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  int num_layers() const { return static_cast<int>(weights.size()); }
  std::size_t parameter_count() const;
};

// Parameters drawn uniformly from +-1/sqrt(fan_in), in a fixed order so the
// same seed always yields the same network.
Mlp make_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed,
             Activation activation = Activation::Tanh);

// Activations saved during a forward pass; required by mlp_gradient.
struct ForwardCache {
  Eigen::MatrixXd input;                   // batch x in
  std::vector<Eigen::MatrixXd> post;       // post-activation per layer, batch x out
  bool valid = false;
};

// Single-sample and batched forward passes. Rows of `inputs` are samples.
Eigen::VectorXd mlp_forward(const Mlp& net, const Eigen::VectorXd& input);
Eigen::MatrixXd mlp_forward_batch(const Mlp& net, const Eigen::MatrixXd& inputs,
                                  ForwardCache* cache = nullptr);

struct MlpGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Eigen::MatrixXd input;                   // dLoss/dinput, batch x in
};

// Reverse accumulation through the cached forward pass. `loss_grad_at_output`
// holds dLoss/dy per sample (batch x out); gradients are summed over the batch.
// Callers that never differentiate with respect to the input can skip that
// last product with with_input_grad = false (grads.input is left empty).
MlpGradients mlp_gradient(const Mlp& net, const Eigen::MatrixXd& loss_grad_at_output,
                          const ForwardCache& cache, bool with_input_grad = true);

struct AdamState {
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
};

AdamState make_adam(const Mlp& net, double learning_rate);

// One Adam update with bias correction. Throws on shape mismatch or a
// non-finite gradient.
void adam_step(AdamState& state, Mlp& params, const MlpGradients& grads);

// dst takes src's parameters by value; shapes must match exactly.
void copy_params(const Mlp& src, Mlp& dst);

bool params_finite(const Mlp& net);

// Flat little-endian float64 snapshot preceded by a shape header
// (uint32 layer count, then uint32 layer sizes).
void save_mlp(const Mlp& net, const std::string& path);
Mlp load_mlp(const std::string& path);

}  // namespace loro
