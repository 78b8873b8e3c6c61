#pragma once

// Naive scalar-loop reference implementations used as independent oracles.
// Everything here works on plain std::vector, never on the library's Tensor
// math paths, so the two routes stay independent.

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cpr/tensor.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline Vec softmax(const Vec& z) {
  double mx = z[0];
  for (double v : z) mx = std::max(mx, v);
  Vec p(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - mx);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Vec proto_logits(const Vec& f, const Mat& protos) {
  Vec z(protos.size());
  for (std::size_t k = 0; k < protos.size(); ++k) z[k] = dot(f, protos[k]);
  return z;
}

inline double ce_proto(const Vec& f, const Mat& protos, int y) {
  return -std::log(softmax(proto_logits(f, protos))[y]);
}

inline double ce_recip(const Vec& f, const Mat& recips, int y) {
  Vec z(recips.size());
  for (std::size_t k = 0; k < recips.size(); ++k) z[k] = -dot(f, recips[k]);
  return -std::log(softmax(z)[y]);
}

inline double open_loss(const Vec& f, const Mat& recips, double margin, int k) {
  const double d = -dot(f, recips[k]);
  return std::max(d - margin, 0.0);
}

inline double split_loss(const Vec& f, const Mat& protos, const Mat& recips, int k) {
  const double d_proto = -dot(f, protos[k]);
  double d_min = -dot(f, recips[0]);
  for (std::size_t i = 1; i < recips.size(); ++i) d_min = std::min(d_min, -dot(f, recips[i]));
  return std::max(d_proto - d_min, 0.0);
}

inline double source_loss(const Mat& batch, const std::vector<int>& labels, const Mat& protos,
                          const Mat& recips, double margin, double lambda, bool include_split) {
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const int y = labels[i];
    double per = ce_proto(batch[i], protos, y) + ce_recip(batch[i], recips, y);
    double reg = open_loss(batch[i], recips, margin, y);
    if (include_split) reg += split_loss(batch[i], protos, recips, y);
    total += per + lambda * reg;
  }
  return total / static_cast<double>(batch.size());
}

inline double entropy(const Vec& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

inline double kl(const Vec& p_strong, const Vec& p_weak) {
  double out = 0.0;
  for (std::size_t i = 0; i < p_strong.size(); ++i) {
    if (p_strong[i] > 0.0) {
      out += p_strong[i] * (std::log(p_strong[i]) - std::log(std::max(p_weak[i], 1e-12)));
    }
  }
  return out;
}

inline double weighted_entropy(const std::vector<Vec>& known, const std::vector<Vec>& unknown,
                               bool uniform = false) {
  const double nk = static_cast<double>(known.size());
  const double nu = static_cast<double>(unknown.size());
  if (nk + nu == 0.0) return 0.0;
  const double w = uniform ? 0.5 : nu / (nk + nu);
  double out = 0.0;
  if (nk > 0.0) {
    double mean = 0.0;
    for (const Vec& p : known) mean += entropy(p);
    out += w * mean / nk;
  }
  if (nu > 0.0) {
    double mean = 0.0;
    for (const Vec& p : unknown) mean += entropy(p);
    out += (1.0 - w) * mean / nu;
  }
  return out;
}

inline Vec collab_probs(const Vec& f, const Mat& protos, const Mat& recips) {
  Vec z;
  for (const Vec& p : protos) z.push_back(dot(f, p));
  for (const Vec& r : recips) z.push_back(dot(f, r));
  return softmax(z);
}

inline double h_score(double a, double b) {
  if (a == 0.0 && b == 0.0) return 0.0;
  return 2.0 * a * b / (a + b);
}

inline int arg_max(const Vec& v) {
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = static_cast<int>(i);
  }
  return best;
}

// Probability bundle for the selector oracle.
struct Probs {
  Vec p_p, p_r, p_c;
};

struct Selected {
  // (batch index, view) with view 0 = weak, 1 = strong
  std::vector<std::pair<int, int>> known;
  std::vector<std::pair<int, int>> unknown;
  std::vector<int> pseudo;
};

inline Selected select(const std::vector<Probs>& weak, const std::vector<Probs>& strong,
                       double rho_c, double rho_o, bool use_threshold = true,
                       bool use_consistency = true) {
  Selected out;
  for (std::size_t i = 0; i < weak.size(); ++i) {
    const int k = static_cast<int>(weak[i].p_p.size());
    const int best_c = arg_max(weak[i].p_c);
    const double conf = weak[i].p_c[best_c];
    const bool consistent = arg_max(weak[i].p_p) == arg_max(weak[i].p_r);
    const bool strong_same = arg_max(strong[i].p_c) == best_c;
    if (best_c < k) {
      if ((!use_threshold || conf >= rho_c) && (!use_consistency || consistent)) {
        out.known.emplace_back(static_cast<int>(i), 0);
        out.pseudo.push_back(arg_max(weak[i].p_p));
        if (strong_same) {
          out.known.emplace_back(static_cast<int>(i), 1);
          out.pseudo.push_back(arg_max(weak[i].p_p));
        }
      }
    } else {
      if ((!use_threshold || conf >= rho_o) && (!use_consistency || !consistent)) {
        out.unknown.emplace_back(static_cast<int>(i), 0);
        if (strong_same) out.unknown.emplace_back(static_cast<int>(i), 1);
      }
    }
  }
  return out;
}

// naive MLP forward: weights[l] is (out x in), relu on all but the last layer
inline Mat mlp_forward(const Mat& x, const std::vector<Mat>& weights,
                       const std::vector<Vec>& biases) {
  Mat cur = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Mat next(cur.size(), Vec(weights[l].size()));
    for (std::size_t i = 0; i < cur.size(); ++i) {
      for (std::size_t o = 0; o < weights[l].size(); ++o) {
        double acc = biases[l][o];
        for (std::size_t j = 0; j < cur[i].size(); ++j) acc += cur[i][j] * weights[l][o][j];
        if (l + 1 < weights.size() && acc < 0.0) acc = 0.0;
        next[i][o] = acc;
      }
    }
    cur = std::move(next);
  }
  return cur;
}

// conversions between the library tensor and oracle types

inline Vec to_vec(const cpr::Tensor& t) { return Vec(t.data(), t.data() + t.size()); }

inline Mat to_mat(const cpr::Tensor& t) {
  Mat m(t.rows(), Vec(t.cols()));
  for (int r = 0; r < t.rows(); ++r) {
    for (int c = 0; c < t.cols(); ++c) m[r][c] = t.at(r, c);
  }
  return m;
}

inline cpr::Tensor from_mat(const Mat& m) {
  cpr::Tensor t({static_cast<int>(m.size()), static_cast<int>(m[0].size())});
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (std::size_t c = 0; c < m[r].size(); ++c) t.at(static_cast<int>(r), static_cast<int>(c)) = m[r][c];
  }
  return t;
}

}  // namespace oracle
