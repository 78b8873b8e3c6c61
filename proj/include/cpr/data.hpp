#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cpr/rng.hpp"
#include "cpr/tensor.hpp"

namespace cpr {

// Feature matrix plus per-sample labels; label -1 means unlabeled.
struct Dataset {
  Tensor features;          // n x dim
  std::vector<int> labels;  // length n

  int size() const { return features.empty() ? 0 : features.rows(); }
  int dim() const { return features.empty() ? 0 : features.cols(); }
  const double* sample(int i) const { return features.row_ptr(i); }
  Tensor sample_tensor(int i) const;
};

// |L_s ∩ L_t|, |L_s - L_t|, |L_t - L_s|
struct SplitSpec {
  int n_common = 10;
  int n_src_private = 5;
  int n_tgt_private = 10;
};

struct ShiftSpec {
  double rotation_angle = 0.15;    // radians, per disjoint rotation plane
  double translation_scale = 0.35; // length of the target offset vector
  double noise_std = 0.25;         // per-coordinate Gaussian sample noise
};

// Class ids are global: [0, n_common) common, then source-private, then
// target-private. Source labels are the first n_common + n_src_private ids;
// any label >= num_source_classes is target-private and maps to the unknown
// sentinel (== num_source_classes) at evaluation time.
struct DomainPair {
  Dataset source;
  Dataset target_train;  // labels all -1; ground truth lives only in target_eval
  Dataset target_eval;
  SplitSpec spec;
  int num_source_classes = 0;
  std::string provenance_json;  // generator parameters; empty for loaded data

  int unknown_sentinel() const { return num_source_classes; }
  bool is_target_private(int label) const { return label >= num_source_classes; }
};

// Class means are random unit directions scaled so the pairwise separation is
// at least 4 * noise_std; the target domain applies a bounded random rotation
// plus a translation to every mean and draws fresh noise.
DomainPair gen_synthetic_pair(const SplitSpec& spec, int dim, int samples_per_class,
                              const ShiftSpec& shift, std::uint64_t seed);

// CSV schema: header "id,label,f0,...,f{D-1}"; label -1 permitted; values must
// be finite. Parse failures name the line number.
Dataset load_embeddings_csv(const std::string& path);
void save_embeddings_csv(const Dataset& ds, const std::string& path);

// Directory layout: source.csv, target_train.csv, target_eval.csv, metadata.json.
void save_domain_pair(const DomainPair& pair, const std::string& dir);
DomainPair load_domain_pair(const std::string& dir);

// Vector-space stand-ins for image augmentation. Weak: additive Gaussian
// noise. Strong: larger noise, then coordinate dropout, then per-coordinate
// scale jitter in [1-s, 1+s].
struct AugmentParams {
  double sigma_weak = 0.0;
  double sigma_strong = 0.0;
  double p_drop = 0.1;
  double scale_jitter = 0.2;
};

// Noise magnitudes as multiples of the pooled feature std of a reference set.
struct AugmentScales {
  double sigma_weak_scale = 0.05;
  double sigma_strong_scale = 0.15;
  double p_drop = 0.1;
  double scale_jitter = 0.2;
};

double dataset_feature_std(const Dataset& ds);
AugmentParams resolve_augment(const AugmentScales& scales, const Dataset& reference);

Tensor augment_weak(const Tensor& x, const AugmentParams& params, Rng& rng);
Tensor augment_strong(const Tensor& x, const AugmentParams& params, Rng& rng);

struct SourceBatch {
  Tensor x;  // b x dim
  std::vector<int> y;
};

struct TargetBatch {
  Tensor weak;    // b x dim
  Tensor strong;  // b x dim
  std::vector<int> origin;
};

// Uniform sampling with reshuffling each epoch; datasets smaller than the
// batch fall back to sampling with replacement (warning emitted once).
class BatchSampler {
 public:
  BatchSampler(const Dataset& source, const Dataset& target, AugmentParams augment,
               int batch_size, Rng& rng);

  std::pair<SourceBatch, TargetBatch> next();
  bool with_replacement() const { return with_replacement_; }

 private:
  int draw(std::vector<int>& order, std::size_t& pos, int n);

  const Dataset& source_;
  const Dataset& target_;
  AugmentParams augment_;
  int batch_size_;
  Rng& rng_;
  bool with_replacement_;
  std::vector<int> source_order_, target_order_;
  std::size_t source_pos_ = 0, target_pos_ = 0;
};

}  // namespace cpr
