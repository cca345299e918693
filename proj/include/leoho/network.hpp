#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace leoho::drl {

/// Layer widths of the shared tanh trunk plus the head dimensions.
struct NetworkShape {
  std::size_t obs_dim = 0;
  std::size_t num_ues = 0;     // J policy heads
  std::size_t num_planes = 0;  // K logits per head
  std::vector<std::size_t> hidden{128, 128};

  std::size_t num_layers() const { return hidden.size() + 2; }
  std::size_t layer_inputs(std::size_t layer) const;
  std::size_t layer_outputs(std::size_t layer) const;
  std::size_t param_count() const;
  bool operator==(const NetworkShape&) const = default;
};

/// All weights in one flat vector. Layers 0..H-1 form the trunk, layer H is
/// the policy head (J*K outputs), layer H+1 the value head. Each layer stores
/// its weight matrix (outputs x inputs, column-major) followed by its bias.
class PolicyParameters {
 public:
  PolicyParameters() = default;
  /// Zero-initialised.
  explicit PolicyParameters(NetworkShape shape);

  /// Glorot-uniform trunk, policy head scaled down so the initial policy is
  /// close to uniform, zero value head and biases.
  static PolicyParameters glorot(NetworkShape shape, std::uint64_t seed);

  const NetworkShape& shape() const { return shape_; }
  Eigen::VectorXd& flat() { return flat_; }
  const Eigen::VectorXd& flat() const { return flat_; }

  Eigen::Map<const Eigen::MatrixXd> weight(std::size_t layer) const;
  Eigen::Map<Eigen::MatrixXd> weight(std::size_t layer);
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;
  Eigen::Map<Eigen::VectorXd> bias(std::size_t layer);

  bool all_finite() const { return flat_.allFinite(); }

 private:
  std::size_t offset(std::size_t layer) const;

  NetworkShape shape_;
  Eigen::VectorXd flat_;
};

struct ForwardResult {
  Eigen::MatrixXd logits;  // J x K
  double value = 0.0;
};

/// Single-observation pass. Throws std::invalid_argument on a length mismatch.
ForwardResult forward(const PolicyParameters& params, std::span<const double> observation);

/// Row-per-sample pass that keeps the activations needed by backward().
struct BatchForward {
  std::vector<Eigen::MatrixXd> activations;  // input followed by every trunk output
  Eigen::MatrixXd logits;                    // B x (J*K), head j in columns [j*K, (j+1)*K)
  Eigen::VectorXd values;                    // B
};

BatchForward forward_batch(const PolicyParameters& params, const Eigen::MatrixXd& observations);

/// Gradient of a scalar loss with respect to every parameter given the loss
/// sensitivities to the logits and values of the same batch.
Eigen::VectorXd backward(const PolicyParameters& params, const BatchForward& cache,
                         const Eigen::MatrixXd& d_logits, const Eigen::VectorXd& d_values);

}  // namespace leoho::drl
