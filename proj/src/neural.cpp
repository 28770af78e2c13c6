#include "xnocs/neural.hpp"

#include <algorithm>
#include <cmath>

#include "xnocs/error.hpp"

namespace xnocs {

namespace {

constexpr double kNormGuard = 1e-12;
constexpr double kProbClamp = 1e-7;

void check_uniform(const FeatureSet& x) {
  if (x.features.empty()) throw InputError("feature set is empty");
  for (const auto& f : x.features) {
    if (f.shape != x.features.front().shape)
      throw InputError("feature set members have mismatched shapes");
    if (f.shape.empty() || f.size() == 0) throw InputError("feature tensor is empty");
  }
}

void check_params(const EquivariantParams& params, const FeatureSet& x) {
  const std::size_t d = params.dim;
  if (d == 0 || params.lambda_weight.size() != d * d || params.gamma_weight.size() != d * d ||
      params.bias.size() != d)
    throw InputError("equivariant params have inconsistent dimensions");
  if (x.features.front().dim() != d)
    throw InputError("feature dimension does not match layer params");
}

double activate(double z, Nonlinearity nl) {
  return nl == Nonlinearity::ReLU ? std::max(z, 0.0) : z;
}

double activate_grad(double z, Nonlinearity nl) {
  return nl == Nonlinearity::ReLU ? (z > 0.0 ? 1.0 : 0.0) : 1.0;
}

// z_i = lambda x_i + gamma pool(x) + bias, the pre-activation.
std::vector<Tensor> pre_activations(const EquivariantParams& params, const FeatureSet& x,
                                    const Tensor& pooled) {
  const std::size_t d = params.dim;
  const std::size_t m = x.features.front().inner();
  std::vector<Tensor> z(x.n(), Tensor(x.features.front().shape));
  for (std::size_t i = 0; i < x.n(); ++i) {
    const double* xi = x.features[i].data.data();
    double* zi = z[i].data.data();
    for (std::size_t a = 0; a < d; ++a) {
      const double* lam = params.lambda_weight.data() + a * d;
      const double* gam = params.gamma_weight.data() + a * d;
      for (std::size_t c = 0; c < m; ++c) {
        double acc = params.bias[a];
        for (std::size_t b = 0; b < d; ++b)
          acc += lam[b] * xi[b * m + c] + gam[b] * pooled.data[b * m + c];
        zi[a * m + c] = acc;
      }
    }
  }
  return z;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
  std::size_t total = 1;
  for (auto d : shape) total *= d;
  data.assign(total, 0.0);
}

std::size_t Tensor::inner() const {
  std::size_t m = 1;
  for (std::size_t i = 1; i < shape.size(); ++i) m *= shape[i];
  return m;
}

Tensor pool_views(const FeatureSet& x, Pool pool) {
  check_uniform(x);
  Tensor out(x.features.front().shape);
  const std::size_t sz = out.size();
  if (pool == Pool::Average) {
    for (const auto& f : x.features)
      for (std::size_t e = 0; e < sz; ++e) out.data[e] += f.data[e];
    const double inv = 1.0 / static_cast<double>(x.n());
    for (auto& v : out.data) v *= inv;
  } else {
    out.data = x.features.front().data;
    for (std::size_t i = 1; i < x.n(); ++i)
      for (std::size_t e = 0; e < sz; ++e)
        out.data[e] = std::max(out.data[e], x.features[i].data[e]);
  }
  return out;
}

FeatureSet pool_subtract(const FeatureSet& x, Pool pool) {
  const Tensor pooled = pool_views(x, pool);
  FeatureSet out;
  out.features.reserve(x.n());
  for (const auto& f : x.features) {
    Tensor y(f.shape);
    for (std::size_t e = 0; e < y.size(); ++e) y.data[e] = f.data[e] - pooled.data[e];
    out.features.push_back(std::move(y));
  }
  return out;
}

FeatureSet equivariant_layer(const EquivariantParams& params, const FeatureSet& x) {
  check_uniform(x);
  check_params(params, x);
  const Tensor pooled = pool_views(x, params.pool);
  std::vector<Tensor> z = pre_activations(params, x, pooled);
  FeatureSet out;
  out.features.reserve(x.n());
  for (auto& zi : z) {
    for (auto& v : zi.data) v = activate(v, params.nonlinearity);
    out.features.push_back(std::move(zi));
  }
  return out;
}

EquivariantGrads equivariant_backward(const EquivariantParams& params, const FeatureSet& x,
                                      const FeatureSet& upstream_grad) {
  check_uniform(x);
  check_params(params, x);
  if (upstream_grad.n() != x.n()) throw InputError("upstream gradient count mismatch");
  for (std::size_t i = 0; i < x.n(); ++i)
    if (upstream_grad.features[i].shape != x.features[i].shape)
      throw InputError("upstream gradient shape mismatch");

  const std::size_t d = params.dim;
  const std::size_t m = x.features.front().inner();
  const std::size_t nv = x.n();
  const Tensor pooled = pool_views(x, params.pool);
  const std::vector<Tensor> z = pre_activations(params, x, pooled);

  // g_i = upstream_i * sigma'(z_i)
  std::vector<Tensor> g(nv, Tensor(x.features.front().shape));
  for (std::size_t i = 0; i < nv; ++i)
    for (std::size_t e = 0; e < g[i].size(); ++e)
      g[i].data[e] =
          upstream_grad.features[i].data[e] * activate_grad(z[i].data[e], params.nonlinearity);

  EquivariantGrads grads;
  grads.lambda_weight.assign(d * d, 0.0);
  grads.gamma_weight.assign(d * d, 0.0);
  grads.bias.assign(d, 0.0);
  grads.x.features.assign(nv, Tensor(x.features.front().shape));

  // Sum of g_i, shared by the gamma and pool paths.
  Tensor g_sum(x.features.front().shape);
  for (const auto& gi : g)
    for (std::size_t e = 0; e < g_sum.size(); ++e) g_sum.data[e] += gi.data[e];

  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      double acc_l = 0.0;
      for (std::size_t i = 0; i < nv; ++i)
        for (std::size_t c = 0; c < m; ++c)
          acc_l += g[i].data[a * m + c] * x.features[i].data[b * m + c];
      grads.lambda_weight[a * d + b] = acc_l;

      double acc_g = 0.0;
      for (std::size_t c = 0; c < m; ++c)
        acc_g += g_sum.data[a * m + c] * pooled.data[b * m + c];
      grads.gamma_weight[a * d + b] = acc_g;
    }
    for (std::size_t c = 0; c < m; ++c) grads.bias[a] += g_sum.data[a * m + c];
  }

  // Direct path: lambda^T g_i.
  for (std::size_t i = 0; i < nv; ++i)
    for (std::size_t b = 0; b < d; ++b)
      for (std::size_t c = 0; c < m; ++c) {
        double acc = 0.0;
        for (std::size_t a = 0; a < d; ++a)
          acc += params.lambda_weight[a * d + b] * g[i].data[a * m + c];
        grads.x.features[i].data[b * m + c] = acc;
      }

  // Pool path: gamma^T g_sum distributed through the pooling operator.
  Tensor pool_grad(x.features.front().shape);
  for (std::size_t b = 0; b < d; ++b)
    for (std::size_t c = 0; c < m; ++c) {
      double acc = 0.0;
      for (std::size_t a = 0; a < d; ++a)
        acc += params.gamma_weight[a * d + b] * g_sum.data[a * m + c];
      pool_grad.data[b * m + c] = acc;
    }
  if (params.pool == Pool::Average) {
    const double inv = 1.0 / static_cast<double>(nv);
    for (std::size_t i = 0; i < nv; ++i)
      for (std::size_t e = 0; e < pool_grad.size(); ++e)
        grads.x.features[i].data[e] += pool_grad.data[e] * inv;
  } else {
    // Subgradient to the argmax view, lowest index on ties.
    for (std::size_t e = 0; e < pool_grad.size(); ++e) {
      std::size_t arg = 0;
      double best = x.features[0].data[e];
      for (std::size_t i = 1; i < nv; ++i)
        if (x.features[i].data[e] > best) {
          best = x.features[i].data[e];
          arg = i;
        }
      grads.x.features[arg].data[e] += pool_grad.data[e];
    }
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

namespace {

void check_same_size(const NocsMap& a, const NocsMap& b, const char* what) {
  if (a.width != b.width || a.height != b.height)
    throw InputError(std::string(what) + ": map dimensions mismatch");
}

// Accumulates sum of ||pred - truth|| over the selected pixels and writes
// d/dpred of that sum; returns the term count.
double accumulate_l2(const NocsMap& pred, const NocsMap& truth, const Mask* select,
                     double weight, MapGrad& grad, std::size_t& terms) {
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.pixels.size(); ++i) {
    if (select && !select->bits[i]) continue;
    ++terms;
    const Vec3 diff = pred.pixels[i].coord - truth.pixels[i].coord;
    const double n = norm(diff);
    sum += n;
    if (n > kNormGuard) grad.d[i] += diff * (weight / n);
  }
  return sum;
}

}  // namespace

L2Loss loss_l2(const MapPair& pred, const MapPair& truth) {
  check_same_size(pred.visible, truth.visible, "loss_l2");
  check_same_size(pred.occluded, truth.occluded, "loss_l2");
  check_same_size(pred.visible, pred.occluded, "loss_l2");

  L2Loss out;
  out.d_visible = MapGrad(pred.visible.width, pred.visible.height);
  out.d_occluded = MapGrad(pred.occluded.width, pred.occluded.height);

  const std::size_t n = pred.visible.pixels.size() + pred.occluded.pixels.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::size_t terms = 0;
  double sum = 0.0;
  sum += accumulate_l2(pred.visible, truth.visible, nullptr, inv_n, out.d_visible, terms);
  sum += accumulate_l2(pred.occluded, truth.occluded, nullptr, inv_n, out.d_occluded, terms);
  out.value = sum * inv_n;
  return out;
}

namespace {

void check_mask_size(const ProbMask& p, const Mask& t, const NocsMap& map, const char* what) {
  if (p.width != map.width || p.height != map.height || t.width != map.width ||
      t.height != map.height)
    throw InputError(std::string(what) + ": mask dimensions mismatch");
}

// w_m * BCE(mask) + w_l * masked mean L2 for one map/mask pair. Gradients
// are accumulated so the peel term can share the occluded mask.
double masked_term(const NocsMap& pred_map, const NocsMap& truth_map, const ProbMask& pred_mask,
                   const Mask& truth_mask, const MaskedLossWeights& w, MapGrad& d_map,
                   std::vector<double>& d_mask, const char* what) {
  check_same_size(pred_map, truth_map, what);
  check_mask_size(pred_mask, truth_mask, pred_map, what);

  const std::size_t m = truth_mask.count();
  if (m == 0) throw InputError(std::string(what) + ": ground-truth mask is empty");

  const std::size_t n_px = pred_map.pixels.size();
  double bce = 0.0;
  for (std::size_t i = 0; i < n_px; ++i) {
    const double p = std::clamp(pred_mask.p[i], kProbClamp, 1.0 - kProbClamp);
    const double y = truth_mask.bits[i] ? 1.0 : 0.0;
    bce -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    d_mask[i] += w.w_m * (p - y) / (p * (1.0 - p)) / static_cast<double>(n_px);
  }
  bce /= static_cast<double>(n_px);

  std::size_t terms = 0;
  const double inv_m = 1.0 / static_cast<double>(m);
  const double l2 =
      accumulate_l2(pred_map, truth_map, &truth_mask, w.w_l * inv_m, d_map, terms) * inv_m;
  return w.w_m * bce + w.w_l * l2;
}

}  // namespace

MaskedLoss loss_masked(const MaskedPrediction& pred, const MaskedTruth& truth,
                       const MaskedLossWeights& weights) {
  if (pred.peeled.has_value() != truth.peeled.has_value())
    throw InputError("loss_masked: peeled color present on only one side");

  MaskedLoss out;
  out.d_visible = MapGrad(pred.visible.width, pred.visible.height);
  out.d_occluded = MapGrad(pred.occluded.width, pred.occluded.height);
  out.d_mask_visible.assign(pred.mask_visible.p.size(), 0.0);
  out.d_mask_occluded.assign(pred.mask_occluded.p.size(), 0.0);

  out.value += masked_term(pred.visible, truth.visible, pred.mask_visible, truth.mask_visible,
                           weights, out.d_visible, out.d_mask_visible, "loss_masked(visible)");
  out.value +=
      masked_term(pred.occluded, truth.occluded, pred.mask_occluded, truth.mask_occluded,
                  weights, out.d_occluded, out.d_mask_occluded, "loss_masked(occluded)");
  if (pred.peeled) {
    out.d_peeled = MapGrad(pred.peeled->width, pred.peeled->height);
    out.value += masked_term(*pred.peeled, *truth.peeled, pred.mask_occluded,
                             truth.mask_occluded, weights, *out.d_peeled, out.d_mask_occluded,
                             "loss_masked(peeled)");
  }
  return out;
}

}  // namespace xnocs
