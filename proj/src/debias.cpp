#include "debias.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace vqalab {
namespace {

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// d cos(a,b) / da = b/(|a||b|) - cos(a,b) * a/|a|^2
void accumulate_cos_grad(const std::vector<double>& a, const std::vector<double>& b,
                         double na, double nb, double cos_ab, double scale,
                         std::vector<double>& da, std::vector<double>& db) {
  double inv = 1.0 / (na * nb);
  double ca = cos_ab / (na * na);
  double cb = cos_ab / (nb * nb);
  for (size_t i = 0; i < a.size(); ++i) {
    da[i] += scale * (b[i] * inv - ca * a[i]);
    db[i] += scale * (a[i] * inv - cb * b[i]);
  }
}

}  // namespace

double cosine_sim(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    throw SimError("cosine similarity requires equal dimensions");
  double nx = norm(x), ny = norm(y);
  if (nx == 0.0 || ny == 0.0) throw SimError("cosine similarity of a zero vector");
  double c = dot(x, y) / (nx * ny);
  return std::clamp(c, -1.0, 1.0);
}

ContrastiveResult contrastive_loss(const std::vector<std::vector<double>>& anchors,
                                   const std::vector<std::vector<double>>& positives) {
  const size_t n = anchors.size();
  if (n < 2) throw BatchError("contrastive loss needs a batch of at least 2 samples");
  if (positives.size() != n)
    throw BatchError("positives must align index-wise with anchors");

  std::vector<double> a_norm(n), p_norm(n);
  for (size_t i = 0; i < n; ++i) {
    a_norm[i] = norm(anchors[i]);
    p_norm[i] = norm(positives[i]);
    if (a_norm[i] == 0.0 || p_norm[i] == 0.0)
      throw SimError("contrastive loss over a zero feature vector");
  }

  ContrastiveResult res;
  res.d_anchors.assign(n, std::vector<double>(anchors[0].size(), 0.0));
  res.d_positives.assign(n, std::vector<double>(anchors[0].size(), 0.0));

  const double inv_n = 1.0 / static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    double s_pos = dot(anchors[i], positives[i]) / (a_norm[i] * p_norm[i]);
    std::vector<double> s_neg;
    s_neg.reserve(n - 1);
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      s_neg.push_back(dot(anchors[i], anchors[j]) / (a_norm[i] * a_norm[j]));
    }
    double mx = s_pos;
    for (double s : s_neg) mx = std::max(mx, s);
    double z = std::exp(s_pos - mx);
    for (double s : s_neg) z += std::exp(s - mx);
    double lse = mx + std::log(z);
    res.loss += inv_n * (lse - s_pos);

    // d/ds_pos = softmax weight - 1; d/ds_neg_j = softmax weight.
    double w_pos = std::exp(s_pos - lse);
    accumulate_cos_grad(anchors[i], positives[i], a_norm[i], p_norm[i], s_pos,
                        inv_n * (w_pos - 1.0), res.d_anchors[i], res.d_positives[i]);
    size_t ni = 0;
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double w = std::exp(s_neg[ni] - lse);
      accumulate_cos_grad(anchors[i], anchors[j], a_norm[i], a_norm[j], s_neg[ni],
                          inv_n * w, res.d_anchors[i], res.d_anchors[j]);
      ++ni;
    }
  }
  return res;
}

double joint_loss(double l_ce, double l_con, double lambda) {
  if (lambda < 0.0) throw InvalidArgumentError("lambda must be >= 0");
  return l_ce + lambda * l_con;
}

std::vector<double> mix_features(const std::vector<double>& orig,
                                 const std::vector<double>& variant, double alpha) {
  if (orig.size() != variant.size())
    throw ModelError("mix_features requires equal encoding dimensions");
  if (alpha < 0.0 || alpha > 1.0)
    throw InvalidArgumentError("alpha must lie in [0,1]");
  std::vector<double> out(orig.size());
  for (size_t i = 0; i < orig.size(); ++i)
    out[i] = alpha * orig[i] + (1.0 - alpha) * variant[i];
  return out;
}

}  // namespace vqalab
