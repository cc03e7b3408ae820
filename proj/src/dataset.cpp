#include "fairq/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fairq {

std::vector<size_t> LabeledDataset::present_rows() const {
  std::vector<size_t> out;
  for (size_t i = 0; i < rows(); ++i)
    if (sensitive_present[i]) out.push_back(i);
  return out;
}

std::vector<double> LabeledDataset::feature_row(size_t i) const {
  return std::vector<double>(features.begin() + static_cast<long>(i * static_cast<size_t>(dim)),
                             features.begin() + static_cast<long>((i + 1) * static_cast<size_t>(dim)));
}

void LabeledDataset::check() const {
  const size_t n = rows();
  if (features.size() != n * static_cast<size_t>(dim) || sensitive.size() != n ||
      sensitive_present.size() != n || true_sensitive.size() != n)
    throw DatasetError("dataset columns disagree on row count");
}

namespace {

SymMatrix preset_matrix(PresetName name) {
  using Rows = std::vector<std::vector<double>>;
  switch (name) {
    case PresetName::Gen2:
      return SymMatrix::from_rows(Rows{{1, 0.1, 0.5, 0.4},
                                       {0.1, 1, 0.5, 0.25},
                                       {0.5, 0.5, 1, 0.75},
                                       {0.4, 0.25, 0.75, 1}});
    case PresetName::Fair2:
      return SymMatrix::from_rows(Rows{{1, 0.1, 0.5, 0.05},
                                       {0.1, 1, 0.05, 0.25},
                                       {0.5, 0.05, 1, 0.75},
                                       {0.05, 0.25, 0.75, 1}});
    case PresetName::A2:
      return SymMatrix::from_rows(Rows{{1, 0.1, 0.5, 0.01},
                                       {0.1, 1, 0.01, 0.25},
                                       {0.5, 0.01, 1, 0.75},
                                       {0.01, 0.25, 0.75, 1}});
    case PresetName::Gen3:
      return SymMatrix::from_rows(Rows{{1, 0.1, 0.5, 0.5, 0.4},
                                       {0.1, 1, 0.5, 0.5, 0.25},
                                       {0.5, 0.5, 1, 0.2, 0.2},
                                       {0.5, 0.5, 0.2, 1, 0.75},
                                       {0.4, 0.25, 0.2, 0.75, 1}});
    case PresetName::Fair3:
      return SymMatrix::from_rows(Rows{{1, 0.1, 0.5, 0.5, 0.05},
                                       {0.1, 1, 0.5, 0.05, 0.25},
                                       {0.5, 0.5, 1, 0.2, 0.2},
                                       {0.5, 0.05, 0.2, 1, 0.75},
                                       {0.05, 0.25, 0.2, 0.75, 1}});
    case PresetName::A3:
      return SymMatrix::from_rows(Rows{{1, 0.1, 0.5, 0.5, 0.01},
                                       {0.1, 1, 0.5, 0.01, 0.25},
                                       {0.5, 0.5, 1, 0.2, 0.2},
                                       {0.5, 0.01, 0.2, 1, 0.75},
                                       {0.01, 0.25, 0.2, 0.75, 1}});
  }
  throw DatasetError("unknown preset");
}

}  // namespace

const char* to_string(PresetName name) {
  switch (name) {
    case PresetName::Gen2: return "gen2";
    case PresetName::Fair2: return "fair2";
    case PresetName::A2: return "a2";
    case PresetName::Gen3: return "gen3";
    case PresetName::Fair3: return "fair3";
    case PresetName::A3: return "a3";
  }
  return "?";
}

CovariancePreset covariance_preset(PresetName name) {
  CovariancePreset p{name, preset_matrix(name)};
  if (min_eigenvalue(p.matrix) < -kPsdClampEps) throw DatasetError("preset matrix not PSD");
  return p;
}

CovariancePreset covariance_preset(const std::string& name) {
  for (PresetName p : {PresetName::Gen2, PresetName::Fair2, PresetName::A2, PresetName::Gen3,
                       PresetName::Fair3, PresetName::A3})
    if (name == to_string(p)) return covariance_preset(p);
  throw DatasetError("unknown preset name: " + name);
}

LabeledDataset sample_joint(const JointGaussianSpec& spec, size_t n_rows, std::uint64_t seed) {
  spec.validate();
  const int d = spec.dim_x();
  const int full_dim = d + 2;
  const std::vector<double> factor = psd_factor(spec.assemble());

  LabeledDataset data;
  data.dim = d;
  data.name = "gaussian";
  data.features.resize(n_rows * static_cast<size_t>(d));
  data.targets.resize(n_rows);
  data.sensitive.resize(n_rows);
  data.true_sensitive.resize(n_rows);
  data.sensitive_present.assign(n_rows, true);

  Rng rng(seed);
  std::vector<double> z(static_cast<size_t>(full_dim));
  for (size_t r = 0; r < n_rows; ++r) {
    for (double& v : z) v = rng.normal();
    for (int i = 0; i < full_dim; ++i) {
      double s = 0.0;
      for (int j = 0; j <= i && j < full_dim; ++j)
        s += factor[static_cast<size_t>(i) * full_dim + j] * z[static_cast<size_t>(j)];
      // eigen-factor fallback is dense; finish the row product if needed
      for (int j = i + 1; j < full_dim; ++j) {
        const double f = factor[static_cast<size_t>(i) * full_dim + j];
        if (f != 0.0) s += f * z[static_cast<size_t>(j)];
      }
      if (i < d)
        data.features[r * static_cast<size_t>(d) + static_cast<size_t>(i)] = s;
      else if (i == d)
        data.targets[r] = s;
      else {
        data.sensitive[r] = s;
        data.true_sensitive[r] = s;
      }
    }
  }
  return data;
}

LabeledDataset inject(const LabeledDataset& data, const UncertaintyInjector& injector, std::uint64_t seed) {
  data.check();
  LabeledDataset out = data;
  Rng rng(seed);
  switch (injector.kind) {
    case InjectorKind::KeepN: {
      const long long keep = injector.n_keep;
      if (keep < 0 || keep > static_cast<long long>(data.rows()))
        throw DatasetError("inject: n_keep out of range");
      std::vector<size_t> order(data.rows());
      for (size_t i = 0; i < order.size(); ++i) order[i] = i;
      rng.shuffle(order);
      std::vector<bool> present(data.rows(), false);
      for (long long i = 0; i < keep; ++i) present[order[static_cast<size_t>(i)]] = true;
      out.sensitive_present = present;
      break;
    }
    case InjectorKind::GaussianNoise: {
      for (size_t i = 0; i < out.rows(); ++i) out.sensitive[i] += rng.normal(0.0, injector.sigma);
      break;
    }
    case InjectorKind::ThresholdNoise: {
      for (size_t i = 0; i < out.rows(); ++i) {
        const double noise = rng.normal(0.0, injector.sigma);  // same draw count for every row
        if (std::abs(out.true_sensitive[i]) >= injector.threshold) out.sensitive[i] += noise;
      }
      break;
    }
  }
  return out;
}

CcmVector estimate_bex(const LabeledDataset& data, const JointGaussianSpec& spec, bool known_marginals) {
  data.check();
  const std::vector<size_t> present = data.present_rows();
  if (present.empty()) throw DatasetError("estimate_bex: no labeled sensitive rows");
  const int d = data.dim;

  std::vector<double> cross(static_cast<size_t>(d), 0.0);
  for (size_t idx : present)
    for (int j = 0; j < d; ++j)
      cross[static_cast<size_t>(j)] +=
          data.sensitive[idx] * data.features[idx * static_cast<size_t>(d) + static_cast<size_t>(j)];
  for (double& v : cross) v /= static_cast<double>(present.size());

  SymMatrix sigma_xx = spec.sigma_xx;
  double sigma_ee = spec.sigma_ee;
  if (!known_marginals) {
    sigma_xx = SymMatrix(d);
    for (size_t r = 0; r < data.rows(); ++r)
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
          const double v = data.features[r * static_cast<size_t>(d) + static_cast<size_t>(i)] *
                           data.features[r * static_cast<size_t>(d) + static_cast<size_t>(j)];
          sigma_xx.at(i, j) += v;
          if (i != j) sigma_xx.at(j, i) += v;
        }
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) sigma_xx.at(i, j) /= static_cast<double>(data.rows());
    sigma_ee = 0.0;
    for (size_t idx : present) sigma_ee += data.sensitive[idx] * data.sensitive[idx];
    sigma_ee /= static_cast<double>(present.size());
    if (sigma_ee <= 0.0) throw DatasetError("estimate_bex: zero empirical sensitive variance");
  }

  const PsdFactorResult white = sym_psd_inv_sqrt(sigma_xx);
  CcmVector out;
  out.source_pair = "ex";
  out.rank_deficient = white.rank_deficient;
  out.entries = white.m.mul(cross);
  const double scale = 1.0 / std::sqrt(sigma_ee);
  for (double& v : out.entries) v *= scale;
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

LabeledDataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DatasetError("load_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DatasetError("load_csv: empty file " + path);
  const std::vector<std::string> header = split_csv_line(line);

  auto col_index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DatasetError("load_csv: column not found: " + name);
    return static_cast<size_t>(it - header.begin());
  };

  std::vector<size_t> feat_idx;
  for (const std::string& c : schema.feature_cols) feat_idx.push_back(col_index(c));
  const size_t target_idx = col_index(schema.target_col);
  const size_t sens_idx = col_index(schema.sensitive_col);

  LabeledDataset data;
  data.dim = static_cast<int>(feat_idx.size());
  data.name = path;

  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DatasetError("load_csv: row " + std::to_string(line_no) + " has " +
                         std::to_string(cells.size()) + " cells, expected " +
                         std::to_string(header.size()));

    auto parse = [&](size_t idx, const char* what) {
      try {
        size_t pos = 0;
        const double v = std::stod(cells[idx], &pos);
        if (pos != cells[idx].size()) throw std::invalid_argument("trailing");
        return v;
      } catch (const std::exception&) {
        throw DatasetError("load_csv: row " + std::to_string(line_no) + ", column '" +
                           header[idx] + "': cannot parse " + what + " value '" + cells[idx] + "'");
      }
    };

    // rows with missing feature or target values are dropped
    bool drop = false;
    for (size_t fi : feat_idx)
      if (cells[fi] == schema.missing_marker) drop = true;
    if (cells[target_idx] == schema.missing_marker) drop = true;
    if (drop) continue;

    for (size_t fi : feat_idx) data.features.push_back(parse(fi, "feature"));
    data.targets.push_back(parse(target_idx, "target"));
    if (cells[sens_idx] == schema.missing_marker) {
      data.sensitive.push_back(0.0);
      data.true_sensitive.push_back(0.0);
      data.sensitive_present.push_back(false);
      data.ground_truth_complete = false;
    } else {
      const double s = parse(sens_idx, "sensitive");
      data.sensitive.push_back(s);
      data.true_sensitive.push_back(s);
      data.sensitive_present.push_back(true);
    }
  }

  if (schema.normalize && data.rows() > 0) {
    const int d = data.dim;
    for (int j = 0; j < d; ++j) {
      double lo = data.features[static_cast<size_t>(j)], hi = lo;
      for (size_t r = 0; r < data.rows(); ++r) {
        const double v = data.features[r * static_cast<size_t>(d) + static_cast<size_t>(j)];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      const double w = hi - lo;
      for (size_t r = 0; r < data.rows(); ++r) {
        double& v = data.features[r * static_cast<size_t>(d) + static_cast<size_t>(j)];
        v = w > 0.0 ? (v - lo) / w : 0.0;
      }
    }
    double lo = data.targets[0], hi = data.targets[0];
    for (double v : data.targets) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double w = hi - lo;
    if (w > 0.0)
      for (double& v : data.targets) v = (v - lo) / w;
  }
  return data;
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data, double ratio, std::uint64_t seed) {
  if (ratio <= 0.0 || ratio >= 1.0) throw DatasetError("split: ratio must be in (0, 1)");
  data.check();
  std::vector<size_t> order(data.rows());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const size_t n_train = static_cast<size_t>(std::llround(ratio * static_cast<double>(data.rows())));

  auto gather = [&](size_t begin, size_t end) {
    LabeledDataset out;
    out.dim = data.dim;
    out.name = data.name;
    out.ground_truth_complete = data.ground_truth_complete;
    for (size_t k = begin; k < end; ++k) {
      const size_t i = order[k];
      const auto row = data.feature_row(i);
      out.features.insert(out.features.end(), row.begin(), row.end());
      out.targets.push_back(data.targets[i]);
      out.sensitive.push_back(data.sensitive[i]);
      out.true_sensitive.push_back(data.true_sensitive[i]);
      out.sensitive_present.push_back(data.sensitive_present[i]);
    }
    return out;
  };
  return {gather(0, n_train), gather(n_train, data.rows())};
}

LabeledDataset sample_group_mixture(const MixtureParams& params, std::uint64_t seed) {
  LabeledDataset data;
  data.dim = params.dim;
  data.name = "group_mixture";
  Rng rng(seed);
  for (size_t r = 0; r < params.n_rows; ++r) {
    const int e = rng.uniform() < 0.5 ? 0 : 1;
    const double sign = e == 1 ? 1.0 : -1.0;
    double logit = params.label_gamma * sign;
    for (int j = 0; j < params.dim; ++j) {
      double v = rng.normal();
      if (j < 2) v += sign * params.mean_shift;  // group-shifted coordinates
      data.features.push_back(v);
      if (j < 2) logit += v;
    }
    const double p = 1.0 / (1.0 + std::exp(-logit));
    data.targets.push_back(rng.uniform() < p ? 1.0 : 0.0);
    data.sensitive.push_back(static_cast<double>(e));
    data.true_sensitive.push_back(static_cast<double>(e));
    data.sensitive_present.push_back(true);
  }
  return data;
}

}  // namespace fairq
