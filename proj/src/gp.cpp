#include "sbf/gp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace sbf {

namespace {

void validate_kernel(const KernelConfig& cfg, long input_dim) {
  if (!(cfg.signal_variance > 0.0)) throw std::invalid_argument("signal variance must be positive");
  if (cfg.lengthscales.size() != input_dim) {
    throw std::invalid_argument("lengthscale count must match input dimension");
  }
  for (long d = 0; d < input_dim; ++d) {
    if (!(cfg.lengthscales[d] > 0.0)) throw std::invalid_argument("lengthscales must be positive");
  }
  if (cfg.observation_noise_variance < 0.0) {
    throw std::invalid_argument("observation noise variance must be nonnegative");
  }
}

double sq_dist(const KernelConfig& cfg, const Vec& a, const Vec& b) {
  double s = 0.0;
  for (long d = 0; d < a.size(); ++d) {
    const double r = (a[d] - b[d]) / cfg.lengthscales[d];
    s += r * r;
  }
  return s;
}

}  // namespace

double se_kernel(const KernelConfig& cfg, const Vec& a, const Vec& b) {
  return cfg.signal_variance * std::exp(-0.5 * sq_dist(cfg, a, b));
}

GPModel fit(const Dataset& data, const KernelConfig& cfg) {
  if (data.size() < 1) throw std::invalid_argument("dataset is empty");
  const long M = data.size();
  const long dim = data.inputs.cols();
  validate_kernel(cfg, dim);

  GPModel model;
  model.kernel = cfg;
  model.Z = data.inputs;
  model.n = data.n;
  model.m = data.m;

  Mat gram(M, M);
  for (long i = 0; i < M; ++i) {
    gram(i, i) = cfg.signal_variance;
    for (long j = i + 1; j < M; ++j) {
      const double v = se_kernel(cfg, data.inputs.row(i).transpose(), data.inputs.row(j).transpose());
      gram(i, j) = v;
      gram(j, i) = v;
    }
  }

  model.effective_noise =
      cfg.observation_noise_variance > 0.0 ? cfg.observation_noise_variance : 1e-10;

  Eigen::LLT<Mat> llt;
  double jitter = 0.0;
  bool ok = false;
  for (;;) {
    Mat K = gram;
    K.diagonal().array() += model.effective_noise + jitter;
    llt.compute(K);
    if (llt.info() == Eigen::Success) {
      ok = true;
      break;
    }
    jitter = (jitter == 0.0) ? 1e-10 : jitter * 10.0;
    if (jitter > 1e-6) break;
  }
  if (!ok) throw std::runtime_error("kernel matrix factorization failed at maximum jitter");

  model.L = llt.matrixL();
  model.log_det_chol = model.L.diagonal().array().log().sum();
  model.weights = llt.solve(data.outputs);
  model.Kinv = llt.solve(Mat::Identity(M, M));
  model.Kinv_pos = model.Kinv.cwiseMax(0.0);
  model.Kinv_neg = (-model.Kinv).cwiseMax(0.0);

  // posterior std at the training inputs; V = L^{-1} Gram gives the variance
  // deflation per point as a squared column norm
  Mat V = model.L.triangularView<Eigen::Lower>().solve(gram);
  model.train_std.resize(M);
  for (long j = 0; j < M; ++j) {
    const double var = cfg.signal_variance - V.col(j).squaredNorm();
    model.train_std[j] = std::sqrt(std::max(0.0, var));
  }
  return model;
}

Posterior posterior_at(const GPModel& model, const Vec& z) {
  if (z.size() != model.Z.cols()) throw std::invalid_argument("query dimension mismatch");
  const long M = model.size();
  Vec k(M);
  for (long j = 0; j < M; ++j) k[j] = se_kernel(model.kernel, z, model.Z.row(j).transpose());
  Posterior post;
  post.mean = model.weights.transpose() * k;
  Vec v = model.L.triangularView<Eigen::Lower>().solve(k);
  double var = model.kernel.signal_variance - v.squaredNorm();
  var = std::min(std::max(var, 0.0), model.kernel.signal_variance);
  post.std = Vec::Constant(model.n, std::sqrt(var));
  return post;
}

RegionBounds region_bounds(const GPModel& model, const Box& cell) {
  if (cell.dim() != model.Z.cols()) throw std::invalid_argument("cell dimension mismatch");
  const long M = model.size();
  const KernelConfig& cfg = model.kernel;
  const double sf2 = cfg.signal_variance;
  const double sf = std::sqrt(sf2);

  // per training point: kernel range over the cell, from nearest/farthest box
  // point in the lengthscale-weighted metric
  Vec kmin(M), kmax(M);
  double anchor_bound = std::numeric_limits<double>::infinity();
  for (long j = 0; j < M; ++j) {
    double dn = 0.0, df = 0.0;
    for (long d = 0; d < cell.dim(); ++d) {
      const double zj = model.Z(j, d);
      const double lo = cell.lower[d], hi = cell.upper[d];
      const double near = std::max({0.0, lo - zj, zj - hi});
      const double far = std::max(zj - lo, hi - zj);
      const double ell = cfg.lengthscales[d];
      dn += (near / ell) * (near / ell);
      df += (far / ell) * (far / ell);
    }
    kmax[j] = sf2 * std::exp(-0.5 * dn);
    kmin[j] = sf2 * std::exp(-0.5 * df);
    const double cand = model.train_std[j] + std::sqrt(std::max(0.0, 2.0 * (sf2 - kmin[j])));
    anchor_bound = std::min(anchor_bound, cand);
  }

  RegionBounds out;
  out.mean_lower.resize(model.n);
  out.mean_upper.resize(model.n);
  for (int i = 0; i < model.n; ++i) {
    double lo = 0.0, hi = 0.0;
    for (long j = 0; j < M; ++j) {
      const double w = model.weights(j, i);
      if (w >= 0.0) {
        lo += w * kmin[j];
        hi += w * kmax[j];
      } else {
        lo += w * kmax[j];
        hi += w * kmin[j];
      }
    }
    out.mean_lower[i] = lo;
    out.mean_upper[i] = hi;
  }

  // variance bound 1: interval propagation of the quadratic form k' Kinv k,
  // rearranged so the dominant term goes through the Cholesky factor instead
  // of the sign-split inverse (the split cancels catastrophically for thin
  // cells): kmin'P kmin - kmax'N kmax = kmin'Kinv kmin - 2g'N kmin - g'N g
  // with g = kmax - kmin >= 0.
  const Vec g = kmax - kmin;
  const Vec v_lo = model.L.triangularView<Eigen::Lower>().solve(kmin);
  const Vec neg_kmin = model.Kinv_neg * kmin;
  const double q_lo =
      v_lo.squaredNorm() - 2.0 * g.dot(neg_kmin) - g.dot(model.Kinv_neg * g);
  const double interval_bound = std::sqrt(std::max(0.0, sf2 - q_lo));

  // variance bound 2: the posterior std is 1-Lipschitz in the kernel metric
  // d(z,z') = sqrt(2 (sigma_f^2 - k(z,z'))), so the value at the cell center
  // plus the cell radius in that metric is an upper bound
  const Vec center = cell.center();
  double radius_sq = 0.0;
  for (long d = 0; d < cell.dim(); ++d) {
    const double r = 0.5 * cell.width(d) / cfg.lengthscales[d];
    radius_sq += r * r;
  }
  const double k_far_center = sf2 * std::exp(-0.5 * radius_sq);
  const double center_bound =
      posterior_at(model, center).std[0] + std::sqrt(std::max(0.0, 2.0 * (sf2 - k_far_center)));

  const double std_ub = std::min({sf, interval_bound, anchor_bound, center_bound});
  out.std_upper = Vec::Constant(model.n, std_ub);
  return out;
}

double information_gain(const GPModel& model) {
  const long M = model.size();
  return model.log_det_chol - 0.5 * static_cast<double>(M) * std::log(model.effective_noise);
}

Vec alpha_scale(const GPModel& model, const ErrorBoundConfig& cfg) {
  if (!(cfg.delta > 0.0) || !(cfg.delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0,1)");
  }
  if (cfg.rkhs_norm_bound.size() != model.n && cfg.rkhs_norm_bound.size() != 1) {
    throw std::invalid_argument("rkhs norm bound count must match output dimension");
  }
  const double gamma = cfg.information_gain ? *cfg.information_gain : information_gain(model);
  const double sigma = std::sqrt(model.effective_noise);
  const double tail = std::log(static_cast<double>(model.n) / cfg.delta);
  Vec alpha(model.n);
  for (int i = 0; i < model.n; ++i) {
    const double C =
        cfg.rkhs_norm_bound.size() == 1 ? cfg.rkhs_norm_bound[0] : cfg.rkhs_norm_bound[i];
    if (!(C > 0.0)) throw std::invalid_argument("rkhs norm bound must be positive");
    alpha[i] = C + sigma * std::sqrt(2.0 * (gamma + 1.0 + tail));
  }
  return alpha;
}

Vec error_radius_from_std(const GPModel& model, const ErrorBoundConfig& cfg,
                          const Vec& std_upper) {
  const Vec alpha = alpha_scale(model, cfg);
  return alpha.cwiseProduct(std_upper);
}

Vec error_radius(const GPModel& model, const ErrorBoundConfig& cfg, const Box& cell) {
  return error_radius_from_std(model, cfg, region_bounds(model, cell).std_upper);
}

}  // namespace sbf
