#pragma once

#include <vector>

namespace vqalab {

// Cosine similarity in [-1, 1]. Throws SimError on a zero vector.
double cosine_sim(const std::vector<double>& x, const std::vector<double>& y);

// Softmax-style contrastive loss over cosine similarities: each anchor is
// pulled toward its variant-question positive against the other anchors of
// the mini-batch as negatives. Gradients are returned with respect to
// every anchor and positive feature vector.
struct ContrastiveResult {
  double loss = 0.0;
  std::vector<std::vector<double>> d_anchors;
  std::vector<std::vector<double>> d_positives;
};

// Throws BatchError when fewer than two anchors are given (no negative
// would exist), SimError on zero vectors.
ContrastiveResult contrastive_loss(const std::vector<std::vector<double>>& anchors,
                                   const std::vector<std::vector<double>>& positives);

// L_ce + lambda * L_con.
double joint_loss(double l_ce, double l_con, double lambda);

// alpha * orig + (1 - alpha) * variant. Throws ModelError on dimension
// mismatch.
std::vector<double> mix_features(const std::vector<double>& orig,
                                 const std::vector<double>& variant, double alpha);

}  // namespace vqalab
