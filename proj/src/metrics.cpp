#include "fairq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace fairq {

namespace {

constexpr double kFloor = 1e-8;  // denominator floor in the chi^2 sum

struct Binner {
  // assignment weights per sample (n x n_cols, row-major), columns sum to 1 per row
  std::vector<double> w;
  // d w(i, j) / d value_i, only meaningful for soft binning
  std::vector<double> dw;
  int n_cols = 0;
  bool soft = false;
  bool degenerate = false;  // some category/bin has fewer than 2 samples
};

Binner categorical_bins(const std::vector<double>& v) {
  std::vector<double> levels(v.begin(), v.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  Binner b;
  b.n_cols = static_cast<int>(levels.size());
  b.w.assign(v.size() * static_cast<size_t>(b.n_cols), 0.0);
  std::vector<int> counts(levels.size(), 0);
  for (size_t i = 0; i < v.size(); ++i) {
    const size_t j = static_cast<size_t>(
        std::lower_bound(levels.begin(), levels.end(), v[i]) - levels.begin());
    b.w[i * static_cast<size_t>(b.n_cols) + j] = 1.0;
    counts[j]++;
  }
  for (int c : counts)
    if (c < 2) b.degenerate = true;
  return b;
}

Binner soft_bins(const std::vector<double>& v, const SoftHistogramConfig& cfg) {
  double lo = 0.0, hi = 1.0;
  if (cfg.range_policy == RangePolicy::DataMinMax) {
    lo = *std::min_element(v.begin(), v.end());
    hi = *std::max_element(v.begin(), v.end());
  }
  Binner b;
  b.soft = true;
  b.n_cols = cfg.n_bins;
  const size_t n = v.size();
  const size_t cols = static_cast<size_t>(b.n_cols);
  b.w.assign(n * cols, 0.0);
  b.dw.assign(n * cols, 0.0);
  const double width = hi - lo;
  if (width <= 1e-300) {
    // constant series: all mass in one bin, no dependence to measure
    for (size_t i = 0; i < n; ++i) b.w[i * cols] = 1.0;
    b.degenerate = true;
    return b;
  }
  const double sigma = std::max(1e-12, cfg.bandwidth * width);
  const double inv_s2 = 1.0 / (sigma * sigma);
  std::vector<double> centers(cols);
  for (size_t j = 0; j < cols; ++j) centers[j] = lo + width * (j + 0.5) / static_cast<double>(cols);

  std::vector<double> g(cols), dg(cols);
  for (size_t i = 0; i < n; ++i) {
    double gsum = 0.0, dgsum = 0.0;
    for (size_t j = 0; j < cols; ++j) {
      const double z = v[i] - centers[j];
      g[j] = std::exp(-0.5 * z * z * inv_s2);
      dg[j] = g[j] * (-z * inv_s2);  // d g / d v_i
      gsum += g[j];
      dgsum += dg[j];
    }
    for (size_t j = 0; j < cols; ++j) {
      const double wij = g[j] / gsum;
      b.w[i * cols + j] = wij;
      b.dw[i * cols + j] = (dg[j] - wij * dgsum) / gsum;
    }
  }
  return b;
}

Binner sens_bins(const std::vector<double>& sens, const SoftHistogramConfig& cfg) {
  std::set<double> levels(sens.begin(), sens.end());
  if (levels.size() <= 2) return categorical_bins(sens);
  return soft_bins(sens, cfg);
}

MeasureValue chi2_on_subset(const std::vector<double>& pred, const std::vector<double>& sens,
                            const SoftHistogramConfig& cfg, bool with_grad) {
  const size_t n = pred.size();
  const Binner pb = soft_bins(pred, cfg);
  const Binner sb = sens_bins(sens, cfg);
  const size_t np = static_cast<size_t>(pb.n_cols);
  const size_t ns = static_cast<size_t>(sb.n_cols);

  // joint and marginals; the sensitive marginal does not depend on pred
  std::vector<double> joint(np * ns, 0.0);
  std::vector<double> pmarg(np, 0.0), smarg(ns, 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < np; ++j) {
      const double wij = pb.w[i * np + j];
      if (wij == 0.0) continue;
      pmarg[j] += wij * inv_n;
      for (size_t k = 0; k < ns; ++k) joint[j * ns + k] += wij * sb.w[i * ns + k] * inv_n;
    }
  for (size_t k = 0; k < ns; ++k)
    for (size_t j = 0; j < np; ++j) smarg[k] += joint[j * ns + k];

  MeasureValue out;
  out.degenerate_marginal = sb.degenerate;
  std::vector<double> dV_dJ(np * ns, 0.0);
  std::vector<double> dV_dP(np, 0.0);
  for (size_t j = 0; j < np; ++j)
    for (size_t k = 0; k < ns; ++k) {
      const double prod = pmarg[j] * smarg[k];
      const double den = prod + kFloor;
      const double diff = joint[j * ns + k] - prod;
      out.value += diff * diff / den;
      if (with_grad) {
        dV_dJ[j * ns + k] = 2.0 * diff / den;
        dV_dP[j] += -2.0 * diff * smarg[k] / den - diff * diff * smarg[k] / (den * den);
      }
    }

  if (with_grad) {
    out.grad_wrt_pred.assign(n, 0.0);
    if (pb.soft && !pb.dw.empty()) {
      for (size_t i = 0; i < n; ++i) {
        double g = 0.0;
        for (size_t j = 0; j < np; ++j) {
          const double dwij = pb.dw[i * np + j];
          if (dwij == 0.0) continue;
          double acc = dV_dP[j];
          for (size_t k = 0; k < ns; ++k) acc += dV_dJ[j * ns + k] * sb.w[i * ns + k];
          g += dwij * acc;
        }
        out.grad_wrt_pred[i] = g * inv_n;
      }
    }
  }
  return out;
}

}  // namespace

const char* to_string(FairnessMeasureKind k) {
  switch (k) {
    case FairnessMeasureKind::Chi2Independence: return "chi2_independence";
    case FairnessMeasureKind::Chi2Separation: return "chi2_separation";
    case FairnessMeasureKind::DbarIndependence: return "dbar_independence";
    case FairnessMeasureKind::DpGap: return "dp_gap";
    case FairnessMeasureKind::EoGap: return "eo_gap";
  }
  return "?";
}

FairnessMeasureKind measure_from_string(const std::string& s) {
  if (s == "chi2_independence") return FairnessMeasureKind::Chi2Independence;
  if (s == "chi2_separation") return FairnessMeasureKind::Chi2Separation;
  if (s == "dbar_independence") return FairnessMeasureKind::DbarIndependence;
  if (s == "dp_gap") return FairnessMeasureKind::DpGap;
  if (s == "eo_gap") return FairnessMeasureKind::EoGap;
  throw MetricsError("unknown fairness measure: " + s);
}

MeasureValue chi2_independence(const std::vector<double>& pred, const std::vector<double>& sens,
                               const SoftHistogramConfig& cfg, bool with_grad) {
  if (pred.size() != sens.size()) throw MetricsError("chi2_independence: length mismatch");
  if (pred.size() < 2) throw MetricsError("chi2_independence: need at least 2 samples");
  for (double p : pred)
    if (!std::isfinite(p)) throw MetricsError("chi2_independence: non-finite prediction");
  return chi2_on_subset(pred, sens, cfg, with_grad);
}

MeasureValue chi2_separation(const std::vector<double>& pred, const std::vector<double>& sens,
                             const std::vector<double>& target, const SoftHistogramConfig& cfg,
                             bool with_grad) {
  if (pred.size() != sens.size() || pred.size() != target.size())
    throw MetricsError("chi2_separation: length mismatch");
  const size_t n = pred.size();

  // strata: exact classes when the target is (near) discrete, otherwise
  // equiprobable bins of the sorted values
  std::set<double> levels(target.begin(), target.end());
  std::vector<int> stratum(n, 0);
  int n_strata = 0;
  if (levels.size() <= static_cast<size_t>(std::max(2, cfg.n_bins / 2))) {
    std::vector<double> lv(levels.begin(), levels.end());
    for (size_t i = 0; i < n; ++i)
      stratum[i] = static_cast<int>(std::lower_bound(lv.begin(), lv.end(), target[i]) - lv.begin());
    n_strata = static_cast<int>(lv.size());
  } else {
    std::vector<double> sorted(target.begin(), target.end());
    std::sort(sorted.begin(), sorted.end());
    n_strata = cfg.n_bins;
    std::vector<double> edges;
    for (int b = 1; b < n_strata; ++b)
      edges.push_back(sorted[static_cast<size_t>(static_cast<double>(n) * b / n_strata)]);
    for (size_t i = 0; i < n; ++i)
      stratum[i] = static_cast<int>(std::upper_bound(edges.begin(), edges.end(), target[i]) - edges.begin());
  }

  MeasureValue out;
  if (with_grad) out.grad_wrt_pred.assign(n, 0.0);
  double weight_used = 0.0;
  for (int sidx = 0; sidx < n_strata; ++sidx) {
    std::vector<size_t> members;
    for (size_t i = 0; i < n; ++i)
      if (stratum[i] == sidx) members.push_back(i);
    if (members.size() < 2) continue;  // empty or singleton stratum: skip, renormalize below
    std::vector<double> sp(members.size()), ss(members.size());
    for (size_t m = 0; m < members.size(); ++m) {
      sp[m] = pred[members[m]];
      ss[m] = sens[members[m]];
    }
    const MeasureValue part = chi2_on_subset(sp, ss, cfg, with_grad);
    const double w = static_cast<double>(members.size()) / static_cast<double>(n);
    weight_used += w;
    out.value += w * part.value;
    out.degenerate_marginal = out.degenerate_marginal || part.degenerate_marginal;
    if (with_grad)
      for (size_t m = 0; m < members.size(); ++m)
        out.grad_wrt_pred[members[m]] += w * part.grad_wrt_pred[m];
  }
  if (weight_used <= 0.0) throw MetricsError("chi2_separation: all strata empty");
  out.value /= weight_used;
  if (with_grad)
    for (double& g : out.grad_wrt_pred) g /= weight_used;
  return out;
}

double dp_gap(const std::vector<int>& pred_labels, const std::vector<int>& sens) {
  if (pred_labels.size() != sens.size()) throw MetricsError("dp_gap: length mismatch");
  long long n1 = 0, n0 = 0, p1 = 0, p0 = 0;
  for (size_t i = 0; i < sens.size(); ++i) {
    if (sens[i] == 1) {
      n1++;
      p1 += pred_labels[i];
    } else {
      n0++;
      p0 += pred_labels[i];
    }
  }
  if (n0 == 0 || n1 == 0) throw MetricsError("dp_gap: a sensitive group is empty");
  return std::abs(static_cast<double>(p1) / n1 - static_cast<double>(p0) / n0);
}

double eo_gap(const std::vector<int>& pred_labels, const std::vector<int>& sens,
              const std::vector<int>& target) {
  if (pred_labels.size() != sens.size() || pred_labels.size() != target.size())
    throw MetricsError("eo_gap: length mismatch");
  std::vector<int> p, s;
  for (size_t i = 0; i < target.size(); ++i)
    if (target[i] == 1) {
      p.push_back(pred_labels[i]);
      s.push_back(sens[i]);
    }
  if (p.empty()) throw MetricsError("eo_gap: no positive targets");
  return dp_gap(p, s);
}

double empirical_dbar(const std::vector<double>& pred, const std::vector<double>& sens) {
  if (pred.size() != sens.size()) throw MetricsError("empirical_dbar: length mismatch");
  const size_t n = pred.size();
  if (n < 3) throw MetricsError("empirical_dbar: need at least 3 samples");
  double mp = 0.0, ms = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mp += pred[i];
    ms += sens[i];
  }
  mp /= static_cast<double>(n);
  ms /= static_cast<double>(n);
  double vpp = 0.0, vss = 0.0, vps = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dp = pred[i] - mp;
    const double ds = sens[i] - ms;
    vpp += dp * dp;
    vss += ds * ds;
    vps += dp * ds;
  }
  vpp /= static_cast<double>(n);
  vss /= static_cast<double>(n);
  vps /= static_cast<double>(n);
  if (vpp <= 0.0 || vss <= 0.0) throw MetricsError("empirical_dbar: zero variance");
  SymMatrix joint(2);
  joint.at(0, 0) = vss;
  joint.at(1, 1) = vpp;
  joint.at(0, 1) = joint.at(1, 0) = vps;
  return independence_dbar(joint);
}

MeasureValue dbar_independence_measure(const std::vector<double>& pred, const std::vector<double>& sens,
                                       bool with_grad) {
  const size_t n = pred.size();
  if (n != sens.size() || n < 3) throw MetricsError("dbar_independence_measure: bad input");
  double mp = 0.0, ms = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mp += pred[i];
    ms += sens[i];
  }
  mp /= static_cast<double>(n);
  ms /= static_cast<double>(n);
  double vpp = 0.0, vss = 0.0, cov = 0.0;
  for (size_t i = 0; i < n; ++i) {
    vpp += (pred[i] - mp) * (pred[i] - mp);
    vss += (sens[i] - ms) * (sens[i] - ms);
    cov += (pred[i] - mp) * (sens[i] - ms);
  }
  vpp /= static_cast<double>(n);
  vss /= static_cast<double>(n);
  cov /= static_cast<double>(n);
  MeasureValue out;
  if (vpp <= 1e-300 || vss <= 1e-300) {
    out.degenerate_marginal = true;
    if (with_grad) out.grad_wrt_pred.assign(n, 0.0);
    return out;
  }
  out.value = cov * cov / (vpp * vss);
  if (with_grad) {
    out.grad_wrt_pred.assign(n, 0.0);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
      const double dcov = (sens[i] - ms) * inv_n;
      const double dvpp = 2.0 * (pred[i] - mp) * inv_n;
      out.grad_wrt_pred[i] = (2.0 * cov * dcov * vpp - cov * cov * dvpp) / (vpp * vpp * vss);
    }
  }
  return out;
}

}  // namespace fairq
