#include "loro/mlp.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

namespace loro {

namespace {

void check_shapes(const Mlp& net) {
  if (net.layer_sizes.size() < 2) throw std::invalid_argument("mlp: need at least input and output layer");
  for (int s : net.layer_sizes)
    if (s <= 0) throw std::invalid_argument("mlp: layer sizes must be positive");
  if (net.weights.size() + 1 != net.layer_sizes.size() || net.biases.size() != net.weights.size())
    throw std::invalid_argument("mlp: layer count mismatch");
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    if (net.weights[l].rows() != net.layer_sizes[l + 1] || net.weights[l].cols() != net.layer_sizes[l] ||
        net.biases[l].size() != net.layer_sizes[l + 1])
      throw std::invalid_argument("mlp: weight shape does not chain");
  }
}

// tanh written as (1 - e^{-2|x|}) / (1 + e^{-2|x|}) with odd extension so the
// whole activation runs through Eigen's vectorized exp; agrees with std::tanh
// to ~1e-16.
void tanh_in_place(Eigen::MatrixXd& z) {
  Eigen::ArrayXXd t = (-2.0 * z.array().abs()).exp();
  z = (z.array().sign() * (1.0 - t) / (1.0 + t)).matrix();
}

}  // namespace

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

Mlp make_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed, Activation activation) {
  Mlp net;
  net.activation = activation;
  net.layer_sizes = layer_sizes;
  if (layer_sizes.size() < 2) throw std::invalid_argument("mlp: need at least input and output layer");
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int in = layer_sizes[l];
    const int out = layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Eigen::MatrixXd w(out, in);
    Eigen::VectorXd b(out);
    for (int o = 0; o < out; ++o)
      for (int i = 0; i < in; ++i) w(o, i) = u(rng);
    for (int o = 0; o < out; ++o) b(o) = u(rng);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  check_shapes(net);
  return net;
}

Eigen::MatrixXd mlp_forward_batch(const Mlp& net, const Eigen::MatrixXd& inputs, ForwardCache* cache) {
  if (inputs.cols() != net.input_size()) throw std::invalid_argument("mlp_forward: input width mismatch");
  const int L = net.num_layers();
  if (cache) {
    // activations live in the cache; no copies
    cache->input = inputs;
    cache->post.resize(L);
    cache->valid = true;
    const Eigen::MatrixXd* a = &inputs;
    for (int l = 0; l < L; ++l) {
      Eigen::MatrixXd& z = cache->post[l];
      z.noalias() = *a * net.weights[l].transpose();
      z.rowwise() += net.biases[l].transpose();
      if (l + 1 < L) {
        if (net.activation == Activation::Tanh)
          tanh_in_place(z);
        else
          z = z.cwiseMax(0.0);
      }
      a = &z;
    }
    return cache->post.back();
  }
  Eigen::MatrixXd a = inputs;
  for (int l = 0; l < L; ++l) {
    Eigen::MatrixXd z;
    z.noalias() = a * net.weights[l].transpose();
    z.rowwise() += net.biases[l].transpose();
    if (l + 1 < L) {
      if (net.activation == Activation::Tanh)
        tanh_in_place(z);
      else
        z = z.cwiseMax(0.0);
    }
    a = std::move(z);
  }
  return a;
}

Eigen::VectorXd mlp_forward(const Mlp& net, const Eigen::VectorXd& input) {
  return mlp_forward_batch(net, input.transpose()).row(0);
}

MlpGradients mlp_gradient(const Mlp& net, const Eigen::MatrixXd& loss_grad_at_output,
                          const ForwardCache& cache, bool with_input_grad) {
  if (!cache.valid || cache.post.size() != static_cast<std::size_t>(net.num_layers()))
    throw std::invalid_argument("mlp_gradient: forward cache missing or stale");
  if (loss_grad_at_output.rows() != cache.input.rows() || loss_grad_at_output.cols() != net.output_size())
    throw std::invalid_argument("mlp_gradient: output gradient shape mismatch");

  const int L = net.num_layers();
  MlpGradients g;
  g.weights.resize(L);
  g.biases.resize(L);

  Eigen::MatrixXd delta = loss_grad_at_output;  // dLoss/dz at the current layer
  for (int l = L - 1; l >= 0; --l) {
    if (l < L - 1) {
      if (net.activation == Activation::Tanh) {
        // through tanh: dz = da * (1 - a^2)
        delta = delta.cwiseProduct((1.0 - cache.post[l].array().square()).matrix());
      } else {
        delta = delta.cwiseProduct((cache.post[l].array() > 0.0).cast<double>().matrix());
      }
    }
    const Eigen::MatrixXd& prev = (l == 0) ? cache.input : cache.post[l - 1];
    g.weights[l].noalias() = delta.transpose() * prev;
    g.biases[l] = delta.colwise().sum();
    if (l > 0 || with_input_grad) delta = delta * net.weights[l];
  }
  if (with_input_grad) g.input = std::move(delta);
  return g;
}

AdamState make_adam(const Mlp& net, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  for (int l = 0; l < net.num_layers(); ++l) {
    s.m_w.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    s.v_w.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    s.m_b.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    s.v_b.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
  }
  return s;
}

void adam_step(AdamState& s, Mlp& params, const MlpGradients& grads) {
  const int L = params.num_layers();
  if (static_cast<int>(grads.weights.size()) != L || static_cast<int>(s.m_w.size()) != L)
    throw std::invalid_argument("adam_step: layer count mismatch");
  for (int l = 0; l < L; ++l) {
    if (grads.weights[l].rows() != params.weights[l].rows() || grads.weights[l].cols() != params.weights[l].cols() ||
        grads.biases[l].size() != params.biases[l].size())
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    if (!grads.weights[l].allFinite() || !grads.biases[l].allFinite())
      throw std::runtime_error("adam_step: non-finite gradient");
  }
  s.step += 1;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (int l = 0; l < L; ++l) {
    s.m_w[l] = s.beta1 * s.m_w[l] + (1.0 - s.beta1) * grads.weights[l];
    s.v_w[l] = s.beta2 * s.v_w[l].array().matrix() + (1.0 - s.beta2) * grads.weights[l].array().square().matrix();
    s.m_b[l] = s.beta1 * s.m_b[l] + (1.0 - s.beta1) * grads.biases[l];
    s.v_b[l] = s.beta2 * s.v_b[l].array().matrix() + (1.0 - s.beta2) * grads.biases[l].array().square().matrix();
    params.weights[l].array() -=
        s.learning_rate * (s.m_w[l].array() / c1) / ((s.v_w[l].array() / c2).sqrt() + s.epsilon);
    params.biases[l].array() -=
        s.learning_rate * (s.m_b[l].array() / c1) / ((s.v_b[l].array() / c2).sqrt() + s.epsilon);
  }
}

void copy_params(const Mlp& src, Mlp& dst) {
  if (src.layer_sizes != dst.layer_sizes) throw std::invalid_argument("copy_params: shape mismatch");
  dst.weights = src.weights;
  dst.biases = src.biases;
}

bool params_finite(const Mlp& net) {
  for (int l = 0; l < net.num_layers(); ++l)
    if (!net.weights[l].allFinite() || !net.biases[l].allFinite()) return false;
  return true;
}

void save_mlp(const Mlp& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_mlp: cannot open " + path);
  auto put_u32 = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  auto put_f64 = [&](double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
  };
  put_u32(static_cast<std::uint32_t>(net.layer_sizes.size()));
  for (int s : net.layer_sizes) put_u32(static_cast<std::uint32_t>(s));
  for (int l = 0; l < net.num_layers(); ++l) {
    for (int o = 0; o < net.weights[l].rows(); ++o)
      for (int i = 0; i < net.weights[l].cols(); ++i) put_f64(net.weights[l](o, i));
    for (int o = 0; o < net.biases[l].size(); ++o) put_f64(net.biases[l](o));
  }
  if (!out) throw std::runtime_error("save_mlp: write failed for " + path);
}

Mlp load_mlp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_mlp: cannot open " + path);
  auto get_u32 = [&]() {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  };
  auto get_f64 = [&]() {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
  };
  const std::uint32_t n = get_u32();
  if (!in || n < 2 || n > 64) throw std::runtime_error("load_mlp: bad shape header in " + path);
  std::vector<int> sizes(n);
  for (auto& s : sizes) s = static_cast<int>(get_u32());
  Mlp net = make_mlp(sizes, 0);
  for (int l = 0; l < net.num_layers(); ++l) {
    for (int o = 0; o < net.weights[l].rows(); ++o)
      for (int i = 0; i < net.weights[l].cols(); ++i) net.weights[l](o, i) = get_f64();
    for (int o = 0; o < net.biases[l].size(); ++o) net.biases[l](o) = get_f64();
  }
  if (!in) throw std::runtime_error("load_mlp: truncated file " + path);
  return net;
}

}  // namespace loro
