#include "leoho/network.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace leoho::drl {

std::size_t NetworkShape::layer_inputs(std::size_t layer) const {
  if (layer == 0) return obs_dim;
  if (layer <= hidden.size()) return hidden[layer - 1];
  return hidden.empty() ? obs_dim : hidden.back();
}

std::size_t NetworkShape::layer_outputs(std::size_t layer) const {
  if (layer < hidden.size()) return hidden[layer];
  if (layer == hidden.size()) return num_ues * num_planes;
  return 1;
}

std::size_t NetworkShape::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < num_layers(); ++l) n += layer_outputs(l) * (layer_inputs(l) + 1);
  return n;
}

PolicyParameters::PolicyParameters(NetworkShape shape)
    : shape_(std::move(shape)),
      flat_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(shape_.param_count()))) {
  if (shape_.obs_dim == 0 || shape_.num_ues == 0 || shape_.num_planes == 0)
    throw std::invalid_argument("PolicyParameters: empty network shape");
}

PolicyParameters PolicyParameters::glorot(NetworkShape shape, std::uint64_t seed) {
  PolicyParameters p(std::move(shape));
  std::mt19937_64 rng(seed);
  const std::size_t trunk = p.shape_.hidden.size();
  for (std::size_t l = 0; l <= trunk; ++l) {
    const auto fan_in = static_cast<double>(p.shape_.layer_inputs(l));
    const auto fan_out = static_cast<double>(p.shape_.layer_outputs(l));
    double limit = std::sqrt(6.0 / (fan_in + fan_out));
    if (l == trunk) limit *= 0.01;
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto w = p.weight(l);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = dist(rng);
  }
  return p;
}

std::size_t PolicyParameters::offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l)
    off += shape_.layer_outputs(l) * (shape_.layer_inputs(l) + 1);
  return off;
}

Eigen::Map<const Eigen::MatrixXd> PolicyParameters::weight(std::size_t layer) const {
  return {flat_.data() + offset(layer), static_cast<Eigen::Index>(shape_.layer_outputs(layer)),
          static_cast<Eigen::Index>(shape_.layer_inputs(layer))};
}

Eigen::Map<Eigen::MatrixXd> PolicyParameters::weight(std::size_t layer) {
  return {flat_.data() + offset(layer), static_cast<Eigen::Index>(shape_.layer_outputs(layer)),
          static_cast<Eigen::Index>(shape_.layer_inputs(layer))};
}

Eigen::Map<const Eigen::VectorXd> PolicyParameters::bias(std::size_t layer) const {
  const std::size_t rows = shape_.layer_outputs(layer);
  return {flat_.data() + offset(layer) + rows * shape_.layer_inputs(layer),
          static_cast<Eigen::Index>(rows)};
}

Eigen::Map<Eigen::VectorXd> PolicyParameters::bias(std::size_t layer) {
  const std::size_t rows = shape_.layer_outputs(layer);
  return {flat_.data() + offset(layer) + rows * shape_.layer_inputs(layer),
          static_cast<Eigen::Index>(rows)};
}

BatchForward forward_batch(const PolicyParameters& params, const Eigen::MatrixXd& observations) {
  const NetworkShape& shape = params.shape();
  if (static_cast<std::size_t>(observations.cols()) != shape.obs_dim)
    throw std::invalid_argument("forward: observation length " +
                                std::to_string(observations.cols()) + " != network input " +
                                std::to_string(shape.obs_dim));
  const std::size_t trunk = shape.hidden.size();
  BatchForward out;
  out.activations.reserve(trunk + 1);
  out.activations.push_back(observations);
  for (std::size_t l = 0; l < trunk; ++l) {
    Eigen::MatrixXd z = out.activations.back() * params.weight(l).transpose();
    z.rowwise() += params.bias(l).transpose();
    out.activations.push_back(z.array().tanh().matrix());
  }
  const Eigen::MatrixXd& top = out.activations.back();
  out.logits = top * params.weight(trunk).transpose();
  out.logits.rowwise() += params.bias(trunk).transpose();
  out.values = top * params.weight(trunk + 1).transpose();
  out.values.array() += params.bias(trunk + 1)(0);
  return out;
}

ForwardResult forward(const PolicyParameters& params, std::span<const double> observation) {
  const Eigen::Map<const Eigen::RowVectorXd> row(observation.data(),
                                                 static_cast<Eigen::Index>(observation.size()));
  const BatchForward batch = forward_batch(params, Eigen::MatrixXd(row));
  const auto num_ues = static_cast<Eigen::Index>(params.shape().num_ues);
  const auto num_planes = static_cast<Eigen::Index>(params.shape().num_planes);
  ForwardResult out;
  out.logits.resize(num_ues, num_planes);
  for (Eigen::Index j = 0; j < num_ues; ++j)
    out.logits.row(j) = batch.logits.block(0, j * num_planes, 1, num_planes);
  out.value = batch.values(0);
  return out;
}

Eigen::VectorXd backward(const PolicyParameters& params, const BatchForward& cache,
                         const Eigen::MatrixXd& d_logits, const Eigen::VectorXd& d_values) {
  const NetworkShape& shape = params.shape();
  const std::size_t trunk = shape.hidden.size();
  PolicyParameters grad(shape);

  const Eigen::MatrixXd& top = cache.activations.back();
  grad.weight(trunk) = d_logits.transpose() * top;
  grad.bias(trunk) = d_logits.colwise().sum().transpose();
  grad.weight(trunk + 1) = d_values.transpose() * top;
  grad.bias(trunk + 1)(0) = d_values.sum();

  Eigen::MatrixXd d_act = d_logits * params.weight(trunk) + d_values * params.weight(trunk + 1);
  for (std::size_t l = trunk; l-- > 0;) {
    const Eigen::MatrixXd& a = cache.activations[l + 1];
    const Eigen::MatrixXd d_z = (d_act.array() * (1.0 - a.array().square())).matrix();
    grad.weight(l) = d_z.transpose() * cache.activations[l];
    grad.bias(l) = d_z.colwise().sum().transpose();
    if (l > 0) d_act = d_z * params.weight(l);
  }
  return std::move(grad.flat());
}

}  // namespace leoho::drl
