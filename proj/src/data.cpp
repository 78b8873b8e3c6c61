#include "cpr/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

#include "cpr/error.hpp"

namespace cpr {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Disjoint-plane Givens rotations: coordinates are paired off at random and
// each plane is rotated by an angle drawn from [-max_angle, max_angle], so no
// vector rotates by more than max_angle.
struct PlaneRotation {
  std::vector<std::pair<int, int>> planes;
  std::vector<double> angles;

  void apply(double* v) const {
    for (std::size_t i = 0; i < planes.size(); ++i) {
      const auto [a, b] = planes[i];
      const double c = std::cos(angles[i]);
      const double s = std::sin(angles[i]);
      const double va = v[a];
      const double vb = v[b];
      v[a] = c * va - s * vb;
      v[b] = s * va + c * vb;
    }
  }
};

PlaneRotation random_rotation(int dim, double max_angle, Rng& rng) {
  std::vector<int> coords(dim);
  std::iota(coords.begin(), coords.end(), 0);
  rng.shuffle(coords);
  PlaneRotation rot;
  for (int i = 0; i + 1 < dim; i += 2) {
    rot.planes.emplace_back(coords[i], coords[i + 1]);
    rot.angles.push_back(rng.uniform(-max_angle, max_angle));
  }
  return rot;
}

std::vector<Tensor> draw_class_means(int count, int dim, double noise_std, Rng& rng) {
  std::vector<Tensor> means;
  while (true) {
    means.clear();
    for (int c = 0; c < count; ++c) {
      Tensor u({dim});
      double norm = 0.0;
      for (int j = 0; j < dim; ++j) {
        u[j] = rng.normal();
        norm += u[j] * u[j];
      }
      norm = std::sqrt(norm);
      for (int j = 0; j < dim; ++j) u[j] /= norm;
      means.push_back(std::move(u));
    }
    double min_dist = 2.0;
    for (int a = 0; a < count; ++a) {
      for (int b = a + 1; b < count; ++b) {
        double d2 = 0.0;
        for (int j = 0; j < dim; ++j) {
          const double diff = means[a][j] - means[b][j];
          d2 += diff * diff;
        }
        min_dist = std::min(min_dist, std::sqrt(d2));
      }
    }
    if (count == 1 || min_dist > 1e-6) {
      const double scale = std::max(1.0, 4.0 * noise_std / std::max(min_dist, 1e-12));
      for (Tensor& m : means) {
        for (int j = 0; j < dim; ++j) m[j] *= scale;
      }
      return means;
    }
  }
}

Dataset sample_classes(const std::vector<Tensor>& means, const std::vector<int>& class_ids,
                       int per_class, double noise_std, Rng& rng) {
  const int dim = static_cast<int>(means.front().size());
  Dataset ds;
  ds.features = Tensor({static_cast<int>(class_ids.size()) * per_class, dim});
  ds.labels.reserve(ds.features.rows());
  int row = 0;
  for (int cid : class_ids) {
    for (int s = 0; s < per_class; ++s) {
      double* out = ds.features.row_ptr(row++);
      for (int j = 0; j < dim; ++j) out[j] = means[cid][j] + noise_std * rng.normal();
      ds.labels.push_back(cid);
    }
  }
  return ds;
}

ordered_json means_to_json(const std::vector<Tensor>& means) {
  ordered_json arr = ordered_json::array();
  for (const Tensor& m : means) {
    ordered_json row = ordered_json::array();
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m[j]);
    arr.push_back(std::move(row));
  }
  return arr;
}

}  // namespace

Tensor Dataset::sample_tensor(int i) const {
  const double* p = sample(i);
  return Tensor({dim()}, std::vector<double>(p, p + dim()));
}

DomainPair gen_synthetic_pair(const SplitSpec& spec, int dim, int samples_per_class,
                              const ShiftSpec& shift, std::uint64_t seed) {
  if (spec.n_common < 1) throw ConfigError("split spec needs at least one common class");
  if (spec.n_src_private < 0 || spec.n_tgt_private < 0) {
    throw ConfigError("split spec counts must be non-negative");
  }
  if (dim < 2) throw ConfigError("synthetic generator requires dim >= 2");
  if (samples_per_class < 4) throw ConfigError("synthetic generator requires >= 4 samples/class");
  if (shift.noise_std < 0.0 || shift.rotation_angle < 0.0 || shift.translation_scale < 0.0) {
    throw ConfigError("shift parameters must be non-negative");
  }

  Rng rng(seed);
  const int total_classes = spec.n_common + spec.n_src_private + spec.n_tgt_private;
  const std::vector<Tensor> means = draw_class_means(total_classes, dim, shift.noise_std, rng);

  const PlaneRotation rot = random_rotation(dim, shift.rotation_angle, rng);
  Tensor translation({dim});
  double norm = 0.0;
  for (int j = 0; j < dim; ++j) {
    translation[j] = rng.normal();
    norm += translation[j] * translation[j];
  }
  norm = std::sqrt(norm);
  for (int j = 0; j < dim; ++j) translation[j] *= shift.translation_scale / norm;

  std::vector<Tensor> target_means = means;
  for (Tensor& m : target_means) {
    rot.apply(m.data());
    for (int j = 0; j < dim; ++j) m[j] += translation[j];
  }

  std::vector<int> source_ids(spec.n_common + spec.n_src_private);
  std::iota(source_ids.begin(), source_ids.end(), 0);
  std::vector<int> target_ids;
  for (int c = 0; c < spec.n_common; ++c) target_ids.push_back(c);
  for (int c = 0; c < spec.n_tgt_private; ++c) {
    target_ids.push_back(spec.n_common + spec.n_src_private + c);
  }

  DomainPair pair;
  pair.spec = spec;
  pair.num_source_classes = spec.n_common + spec.n_src_private;
  pair.source = sample_classes(means, source_ids, samples_per_class, shift.noise_std, rng);
  pair.target_eval =
      sample_classes(target_means, target_ids, samples_per_class, shift.noise_std, rng);
  pair.target_train.features = pair.target_eval.features;
  pair.target_train.labels.assign(pair.target_eval.labels.size(), -1);

  ordered_json meta;
  meta["generator"] = "synthetic_gaussian_pair";
  meta["seed"] = seed;
  meta["dim"] = dim;
  meta["samples_per_class"] = samples_per_class;
  meta["split"] = {{"n_common", spec.n_common},
                   {"n_src_private", spec.n_src_private},
                   {"n_tgt_private", spec.n_tgt_private}};
  meta["shift"] = {{"rotation_angle", shift.rotation_angle},
                   {"translation_scale", shift.translation_scale},
                   {"noise_std", shift.noise_std}};
  meta["source_class_means"] = means_to_json(means);
  meta["target_class_means"] = means_to_json(target_means);
  pair.provenance_json = meta.dump(2);
  return pair;
}

Dataset load_embeddings_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ":1: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("id,label,f0", 0) != 0) {
    throw ParseError(path + ":1: expected header 'id,label,f0,...'");
  }
  const int dim = static_cast<int>(std::count(line.begin(), line.end(), ',')) - 1;
  if (dim < 1) throw ParseError(path + ":1: header names no feature columns");

  std::vector<double> values;
  std::vector<int> labels;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (static_cast<int>(fields.size()) != dim + 2) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(dim + 2) + " fields, got " + std::to_string(fields.size()));
    }
    try {
      std::size_t pos = 0;
      const int label = std::stoi(fields[1], &pos);
      if (pos != fields[1].size()) throw std::invalid_argument("trailing chars");
      labels.push_back(label);
      for (int j = 0; j < dim; ++j) {
        const double v = std::stod(fields[2 + j], &pos);
        if (pos != fields[2 + j].size()) throw std::invalid_argument("trailing chars");
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
        values.push_back(v);
      }
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": non-numeric or non-finite field");
    }
  }
  if (labels.empty()) throw ParseError(path + ": no data rows");
  Dataset ds;
  ds.features = Tensor({static_cast<int>(labels.size()), dim}, std::move(values));
  ds.labels = std::move(labels);
  return ds;
}

void save_embeddings_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open file for writing");
  out << "id,label";
  for (int j = 0; j < ds.dim(); ++j) out << ",f" << j;
  out << "\n";
  for (int i = 0; i < ds.size(); ++i) {
    out << i << "," << ds.labels[i];
    const double* row = ds.sample(i);
    for (int j = 0; j < ds.dim(); ++j) out << "," << fmt_double(row[j]);
    out << "\n";
  }
}

void save_domain_pair(const DomainPair& pair, const std::string& dir) {
  std::filesystem::create_directories(dir);
  save_embeddings_csv(pair.source, dir + "/source.csv");
  save_embeddings_csv(pair.target_train, dir + "/target_train.csv");
  save_embeddings_csv(pair.target_eval, dir + "/target_eval.csv");
  ordered_json meta;
  meta["split"] = {{"n_common", pair.spec.n_common},
                   {"n_src_private", pair.spec.n_src_private},
                   {"n_tgt_private", pair.spec.n_tgt_private}};
  meta["num_source_classes"] = pair.num_source_classes;
  if (!pair.provenance_json.empty()) {
    meta["provenance"] = ordered_json::parse(pair.provenance_json);
  }
  std::ofstream out(dir + "/metadata.json");
  out << meta.dump(2) << "\n";
}

DomainPair load_domain_pair(const std::string& dir) {
  DomainPair pair;
  pair.source = load_embeddings_csv(dir + "/source.csv");
  pair.target_train = load_embeddings_csv(dir + "/target_train.csv");
  pair.target_eval = load_embeddings_csv(dir + "/target_eval.csv");
  if (pair.source.dim() != pair.target_train.dim() ||
      pair.source.dim() != pair.target_eval.dim()) {
    throw ParseError(dir + ": feature dimensions differ between files");
  }
  if (pair.target_train.size() != pair.target_eval.size()) {
    throw ParseError(dir + ": target_train and target_eval differ in sample count");
  }

  std::set<int> source_set(pair.source.labels.begin(), pair.source.labels.end());
  if (source_set.empty() || *source_set.begin() < 0) {
    throw ParseError(dir + ": source labels must be non-negative");
  }
  pair.num_source_classes = *source_set.rbegin() + 1;
  if (static_cast<int>(source_set.size()) != pair.num_source_classes) {
    throw ParseError(dir + ": source labels must cover 0..K-1 without gaps");
  }
  std::set<int> target_set;
  for (int l : pair.target_eval.labels) {
    if (l < 0) throw ParseError(dir + ": target_eval labels must be non-negative");
    target_set.insert(l);
  }
  int n_common = 0;
  int n_tgt_private = 0;
  for (int l : target_set) {
    if (source_set.count(l)) {
      ++n_common;
    } else {
      ++n_tgt_private;
    }
  }
  pair.spec.n_common = n_common;
  pair.spec.n_tgt_private = n_tgt_private;
  pair.spec.n_src_private = pair.num_source_classes - n_common;
  for (int l : pair.target_train.labels) {
    if (l != -1) throw ParseError(dir + ": target_train must be unlabeled (label -1)");
  }

  const std::string meta_path = dir + "/metadata.json";
  if (std::filesystem::exists(meta_path)) {
    std::ifstream in(meta_path);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto meta = ordered_json::parse(ss.str());
    if (meta.contains("provenance")) pair.provenance_json = meta["provenance"].dump(2);
  }
  return pair;
}

double dataset_feature_std(const Dataset& ds) {
  if (ds.size() == 0) throw ConfigError("dataset_feature_std: empty dataset");
  const double* p = ds.features.data();
  const std::size_t n = ds.features.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += p[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) var += (p[i] - mean) * (p[i] - mean);
  return std::sqrt(var / static_cast<double>(n));
}

AugmentParams resolve_augment(const AugmentScales& scales, const Dataset& reference) {
  const double std_dev = dataset_feature_std(reference);
  AugmentParams params;
  params.sigma_weak = scales.sigma_weak_scale * std_dev;
  params.sigma_strong = scales.sigma_strong_scale * std_dev;
  params.p_drop = scales.p_drop;
  params.scale_jitter = scales.scale_jitter;
  return params;
}

Tensor augment_weak(const Tensor& x, const AugmentParams& params, Rng& rng) {
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += params.sigma_weak * rng.normal();
  return out;
}

Tensor augment_strong(const Tensor& x, const AugmentParams& params, Rng& rng) {
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += params.sigma_strong * rng.normal();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (rng.uniform() < params.p_drop) out[i] = 0.0;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] *= rng.uniform(1.0 - params.scale_jitter, 1.0 + params.scale_jitter);
  }
  return out;
}

BatchSampler::BatchSampler(const Dataset& source, const Dataset& target, AugmentParams augment,
                           int batch_size, Rng& rng)
    : source_(source), target_(target), augment_(augment), batch_size_(batch_size), rng_(rng) {
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (source.size() < 1 || target.size() < 1) throw ConfigError("sampler needs non-empty datasets");
  with_replacement_ = source.size() < batch_size || target.size() < batch_size;
  if (with_replacement_) {
    std::cerr << "warning: dataset smaller than batch size, sampling with replacement\n";
  }
}

int BatchSampler::draw(std::vector<int>& order, std::size_t& pos, int n) {
  if (with_replacement_) return rng_.uniform_int(n);
  if (pos >= order.size()) {
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    rng_.shuffle(order);
    pos = 0;
  }
  return order[pos++];
}

std::pair<SourceBatch, TargetBatch> BatchSampler::next() {
  SourceBatch sb;
  sb.x = Tensor({batch_size_, source_.dim()});
  sb.y.resize(batch_size_);
  for (int i = 0; i < batch_size_; ++i) {
    const int idx = draw(source_order_, source_pos_, source_.size());
    const double* row = source_.sample(idx);
    std::copy(row, row + source_.dim(), sb.x.row_ptr(i));
    sb.y[i] = source_.labels[idx];
  }

  TargetBatch tb;
  tb.weak = Tensor({batch_size_, target_.dim()});
  tb.strong = Tensor({batch_size_, target_.dim()});
  tb.origin.resize(batch_size_);
  for (int i = 0; i < batch_size_; ++i) {
    const int idx = draw(target_order_, target_pos_, target_.size());
    tb.origin[i] = idx;
    const Tensor x = target_.sample_tensor(idx);
    const Tensor w = augment_weak(x, augment_, rng_);
    const Tensor s = augment_strong(x, augment_, rng_);
    std::copy(w.data(), w.data() + w.size(), tb.weak.row_ptr(i));
    std::copy(s.data(), s.data() + s.size(), tb.strong.row_ptr(i));
  }
  return {std::move(sb), std::move(tb)};
}

}  // namespace cpr
