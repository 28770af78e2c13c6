#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "xnocs/types.hpp"

namespace xnocs {

// Dense real tensor; the leading axis is the feature dimension wherever a
// weight matrix applies.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s);

  std::size_t size() const { return data.size(); }
  std::size_t dim() const { return shape.empty() ? 0 : shape.front(); }
  // Product of the trailing (non-feature) axes.
  std::size_t inner() const;
};

// Ordered collection of per-view feature tensors of identical shape.
struct FeatureSet {
  std::vector<Tensor> features;

  std::size_t n() const { return features.size(); }
};

enum class Pool { Average, Max };
enum class Nonlinearity { ReLU, Identity };

// Elementwise pool across views (mean or max). Max ties break toward the
// lowest view index.
Tensor pool_views(const FeatureSet& x, Pool pool);

// y_i = x_i - pool(x). Throws InputError on an empty set or ragged shapes.
FeatureSet pool_subtract(const FeatureSet& x, Pool pool);

// Tied weights of a permutation-equivariant layer: one matrix applied to
// each view's own features, one to the pooled features. With lambda = I,
// gamma = -I, bias = 0, Identity, Average the layer reduces to
// pool_subtract exactly.
struct EquivariantParams {
  std::size_t dim = 0;
  std::vector<double> lambda_weight;  // dim x dim, row-major
  std::vector<double> gamma_weight;   // dim x dim, row-major
  std::vector<double> bias;           // dim
  Pool pool = Pool::Average;
  Nonlinearity nonlinearity = Nonlinearity::ReLU;
};

// y_i = sigma(lambda x_i + gamma pool(x) + bias), matrices acting on the
// leading axis, bias broadcast over trailing axes.
FeatureSet equivariant_layer(const EquivariantParams& params, const FeatureSet& x);

struct EquivariantGrads {
  FeatureSet x;
  std::vector<double> lambda_weight;
  std::vector<double> gamma_weight;
  std::vector<double> bias;
};

// Analytic gradients of equivariant_layer. Average pool has an exact closed
// form; Max pool routes the subgradient to the argmax view (lowest index on
// ties).
EquivariantGrads equivariant_backward(const EquivariantParams& params, const FeatureSet& x,
                                      const FeatureSet& upstream_grad);

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

struct MaskedLossWeights {
  double w_m = 0.7;
  double w_l = 0.3;
};

// Per-pixel 3-vector gradient for one map.
struct MapGrad {
  int width = 0;
  int height = 0;
  std::vector<Vec3> d;

  MapGrad() = default;
  MapGrad(int w, int h) : width(w), height(h), d(std::size_t(w) * h) {}
};

// Real-valued mask prediction (probabilities), as networks emit before
// thresholding.
struct ProbMask {
  int width = 0;
  int height = 0;
  std::vector<double> p;

  ProbMask() = default;
  ProbMask(int w, int h, double fill = 0.5)
      : width(w), height(h), p(std::size_t(w) * h, fill) {}
};

struct MapPair {
  NocsMap visible;
  NocsMap occluded;
};

struct L2Loss {
  double value = 0.0;
  MapGrad d_visible;
  MapGrad d_occluded;
};

// Mean unsquared Euclidean error over every pixel of both maps (the count
// includes non-object pixels). The gradient at exact coincidence is 0 (the
// norm is guarded at 1e-12).
L2Loss loss_l2(const MapPair& pred, const MapPair& truth);

struct MaskedPrediction {
  NocsMap visible;
  NocsMap occluded;
  ProbMask mask_visible;
  ProbMask mask_occluded;
  std::optional<NocsMap> peeled;
};

struct MaskedTruth {
  NocsMap visible;
  NocsMap occluded;
  Mask mask_visible;
  Mask mask_occluded;
  std::optional<NocsMap> peeled;
};

struct MaskedLoss {
  double value = 0.0;
  MapGrad d_visible;
  MapGrad d_occluded;
  std::vector<double> d_mask_visible;
  std::vector<double> d_mask_occluded;
  std::optional<MapGrad> d_peeled;
};

// Per map: w_m * BCE(mask) + w_l * mean L2 over ground-truth object pixels;
// visible term + occluded term, plus a third term of the same form for the
// peeled color map (sharing the occluded mask) when present. Predicted mask
// probabilities are clamped to [1e-7, 1 - 1e-7]. Throws InputError when a
// ground-truth mask is empty.
MaskedLoss loss_masked(const MaskedPrediction& pred, const MaskedTruth& truth,
                       const MaskedLossWeights& weights = {});

}  // namespace xnocs
