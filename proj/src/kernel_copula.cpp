#include "cyldens/kernel_copula.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "cyldens/errors.hpp"
#include "cyldens/math_util.hpp"
#include "cyldens/normal.hpp"

namespace cyldens {

namespace {

constexpr double kPruneQ = 160.0; // exp(-80) is below double noise in any sum

double kernel_term(double du, double dv, double inv_d, double inv_o) {
  const double w1 = inv_d * du + inv_o * dv;
  const double w2 = inv_o * du + inv_d * dv;
  const double q = w1 * w1 + w2 * w2;
  return (q < kPruneQ) ? std::exp(-0.5 * q) : 0.0;
}

} // namespace

void validate(const BandwidthMatrix& b) {
  if (!(b.diag > 0.0) || !std::isfinite(b.diag) || !std::isfinite(b.off) ||
      !(b.diag > std::abs(b.off))) {
    throw std::domain_error(
        "BandwidthMatrix: need diag > |off| > 0 for positive definiteness");
  }
}

std::array<std::pair<double, double>, 9> reflect_point(double u, double v) {
  return {{{u - 1.0, -v},
           {u, -v},
           {u + 1.0, -v},
           {u - 1.0, v},
           {u, v},
           {u + 1.0, v},
           {u - 1.0, 2.0 - v},
           {u, 2.0 - v},
           {u + 1.0, 2.0 - v}}};
}

KernelCopula::KernelCopula(std::span<const double> u, std::span<const double> v,
                           BandwidthMatrix b)
    : n_(u.size()), b_(b) {
  validate(b);
  if (u.size() != v.size() || u.empty()) {
    throw std::invalid_argument("KernelCopula: mismatched pseudo-observations");
  }
  obs_u_.reserve(n_);
  obs_v_.reserve(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    if (u[i] < -1e-12 || u[i] > 1.0 + 1e-12 || v[i] < -1e-12 || v[i] > 1.0 + 1e-12) {
      throw NumericError("KernelCopula: pseudo-observation outside [0,1]^2 "
                         "beyond rounding error (upstream contract violation)");
    }
    obs_u_.push_back(clamp01(u[i]));
    obs_v_.push_back(clamp01(v[i]));
  }
  img_u_.reserve(9 * n_);
  img_v_.reserve(9 * n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (const auto& [iu, iv] : reflect_point(obs_u_[i], obs_v_[i])) {
      img_u_.push_back(iu);
      img_v_.push_back(iv);
    }
  }
  const double det = b_.diag * b_.diag - b_.off * b_.off;
  inv_d_ = b_.diag / det;
  inv_o_ = -b_.off / det;
  norm_ = 1.0 / (kTwoPi * det * static_cast<double>(n_));
  window_ = std::sqrt(kPruneQ) * (b_.diag + std::abs(b_.off));
}

double KernelCopula::density_unchecked(double u, double v) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < img_u_.size(); ++k) {
    sum += kernel_term(u - img_u_[k], v - img_v_[k], inv_d_, inv_o_);
  }
  return sum * norm_;
}

double KernelCopula::density(double u, double v) const {
  if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) {
    throw std::domain_error("copula arguments must lie in [0, 1]");
  }
  return density_unchecked(u, v);
}

void KernelCopula::density_grid(std::span<const double> us, std::span<const double> vs,
                                double* out) const {
  if (!std::is_sorted(us.begin(), us.end()) || !std::is_sorted(vs.begin(), vs.end())) {
    Copula::density_grid(us, vs, out);
    return;
  }
  const std::size_t nv = vs.size();
  std::fill(out, out + us.size() * nv, 0.0);
  for (std::size_t k = 0; k < img_u_.size(); ++k) {
    const double a = img_u_[k], b = img_v_[k];
    const auto i_lo = std::lower_bound(us.begin(), us.end(), a - window_) - us.begin();
    const auto i_hi = std::upper_bound(us.begin(), us.end(), a + window_) - us.begin();
    const auto j_lo = std::lower_bound(vs.begin(), vs.end(), b - window_) - vs.begin();
    const auto j_hi = std::upper_bound(vs.begin(), vs.end(), b + window_) - vs.begin();
    for (auto i = i_lo; i < i_hi; ++i) {
      const double du = us[i] - a;
      double* row = out + static_cast<std::size_t>(i) * nv;
      for (auto j = j_lo; j < j_hi; ++j) {
        row[j] += kernel_term(du, vs[j] - b, inv_d_, inv_o_);
      }
    }
  }
  for (std::size_t i = 0; i < us.size() * nv; ++i) out[i] *= norm_;
}

double KernelCopula::conditional(double u, double v) const {
  if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) {
    throw std::domain_error("copula arguments must lie in [0, 1]");
  }
  // Each kernel factors into a Gaussian in u times a conditional Gaussian in
  // v, so the partial integral over [0, v] has a closed erf form.
  const double var = b_.diag * b_.diag + b_.off * b_.off; // marginal variance
  const double s1 = std::sqrt(var);
  const double slope = 2.0 * b_.diag * b_.off / var;
  const double sc = std::sqrt(var - slope * 2.0 * b_.diag * b_.off);
  double num = 0.0, total = 0.0;
  for (std::size_t k = 0; k < img_u_.size(); ++k) {
    const double du = u - img_u_[k];
    const double z = du / s1;
    if (z * z > kPruneQ) continue;
    const double wu = std::exp(-0.5 * z * z);
    const double mc = img_v_[k] + slope * du;
    const double hi = std_normal_cdf((v - mc) / sc);
    const double lo = std_normal_cdf((0.0 - mc) / sc);
    const double one = std_normal_cdf((1.0 - mc) / sc);
    num += wu * (hi - lo);
    total += wu * (one - lo);
  }
  if (!(total > 1e-300)) return v;
  const double r = num / total;
  return clamp01(r);
}

BandwidthMatrix normal_reference_bandwidth(std::span<const double> u,
                                           std::span<const double> v) {
  const double n = static_cast<double>(u.size());
  double mu = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mu += u[i];
    mv += v[i];
  }
  mu /= n;
  mv /= n;
  double vu = 0.0, vv = 0.0, cuv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    vu += (u[i] - mu) * (u[i] - mu);
    vv += (v[i] - mv) * (v[i] - mv);
    cuv += (u[i] - mu) * (v[i] - mv);
  }
  vu /= n - 1.0;
  vv /= n - 1.0;
  cuv /= n - 1.0;
  if (!(vu > 0.0) || !(vv > 0.0)) {
    throw FitError("normal_reference_bandwidth: degenerate pseudo-observations");
  }
  // Square root of the common-diagonal covariance [[a, c], [c, a]].
  const double a = 0.5 * (vu + vv);
  const double c = std::clamp(cuv, -0.99 * a, 0.99 * a);
  const double p = 0.5 * (std::sqrt(a + c) + std::sqrt(a - c));
  const double q = 0.5 * (std::sqrt(a + c) - std::sqrt(a - c));
  const double scale = std::pow(n, -1.0 / 6.0);
  BandwidthMatrix b{scale * p, scale * q};
  if (!(b.diag > std::abs(b.off))) b.off = std::copysign(0.8 * b.diag, b.off);
  return b;
}

// ---------------------------------------------------------------------------
// Least-squares cross-validation.
//
// The criterion is LSCV(B) = int_{[0,1]^2} chat^2 - (2/n) sum_i chat_{-i}(z_i).
// Both terms are computed from the estimate evaluated on a lattice over
// [-1, 2]^2: the images are linearly binned and the Gaussian kernel, which is
// separable along the two diagonal eigen-directions of B, is applied as four
// one-dimensional convolution passes over the lattice diagonals. The lattice
// pitch adapts to the smaller kernel eigen-scale, so the per-candidate cost
// is independent of n. Candidates too narrow for any lattice are scored by
// the leading 1/(n |B|) roughness term, which they cannot win against.
// ---------------------------------------------------------------------------

namespace {

struct Lattice {
  int m = 0;   // intervals per unit length
  int S = 0;   // nodes per axis, 3m + 3
  int org = 0; // node index of coordinate zero
  std::vector<double> counts;
};

Lattice build_lattice(int m, std::span<const double> img_u,
                      std::span<const double> img_v) {
  Lattice lat;
  lat.m = m;
  lat.S = 3 * m + 3;
  lat.org = m + 1;
  lat.counts.assign(static_cast<std::size_t>(lat.S) * lat.S, 0.0);
  const double dm = static_cast<double>(m);
  for (std::size_t k = 0; k < img_u.size(); ++k) {
    const double gx = img_u[k] * dm + lat.org;
    const double gy = img_v[k] * dm + lat.org;
    int ix = static_cast<int>(std::floor(gx));
    int iy = static_cast<int>(std::floor(gy));
    ix = std::clamp(ix, 0, lat.S - 2);
    iy = std::clamp(iy, 0, lat.S - 2);
    const double fx = std::clamp(gx - ix, 0.0, 1.0);
    const double fy = std::clamp(gy - iy, 0.0, 1.0);
    double* base = lat.counts.data() + static_cast<std::size_t>(ix) * lat.S + iy;
    base[0] += (1.0 - fx) * (1.0 - fy);
    base[1] += (1.0 - fx) * fy;
    base[lat.S] += fx * (1.0 - fy);
    base[lat.S + 1] += fx * fy;
  }
  return lat;
}

// One-dimensional convolution along all NE (i-j const) or NW (i+j const)
// diagonals of an S x S array. ker[t - klo] holds the weight at offset t.
void conv_diagonals(const std::vector<double>& in, std::vector<double>& out, int S,
                    bool ne, std::span<const double> ker, int klo) {
  const int khi = klo + static_cast<int>(ker.size()) - 1;
  std::vector<double> line;
  out.assign(in.size(), 0.0);
  const auto process = [&](int i0, int j0, int len, int stride) {
    line.resize(len);
    std::size_t idx = static_cast<std::size_t>(i0) * S + j0;
    for (int p = 0; p < len; ++p, idx += stride) line[p] = in[idx];
    idx = static_cast<std::size_t>(i0) * S + j0;
    for (int p = 0; p < len; ++p, idx += stride) {
      const int tlo = std::max(klo, p - len + 1);
      const int thi = std::min(khi, p);
      double acc = 0.0;
      for (int t = tlo; t <= thi; ++t) acc += ker[t - klo] * line[p - t];
      out[idx] = acc;
    }
  };
  if (ne) {
    for (int c = -(S - 1); c <= S - 1; ++c) {
      const int i0 = std::max(c, 0), j0 = std::max(-c, 0);
      process(i0, j0, S - std::abs(c), S + 1);
    }
  } else {
    for (int s = 0; s <= 2 * (S - 1); ++s) {
      const int i0 = std::max(0, s - S + 1), j0 = s - i0;
      process(i0, j0, std::min(S - 1, s) - i0 + 1, S - 1);
    }
  }
}

std::vector<double> gauss_kernel(double sigma, double step, int lo, int hi,
                                 double shift) {
  std::vector<double> k;
  k.reserve(hi - lo + 1);
  const double norm = 1.0 / (sigma * std::sqrt(kTwoPi));
  for (int t = lo; t <= hi; ++t) {
    const double x = (static_cast<double>(t) + shift) * step;
    k.push_back(norm * std::exp(-0.5 * x * x / (sigma * sigma)));
  }
  return k;
}

//! Kernel-sum values (n * chat) at the lattice nodes.
std::vector<double> convolve_lattice(const Lattice& lat, double sig_p, double sig_m) {
  const double step = std::sqrt(2.0) / static_cast<double>(lat.m);
  const int wp = std::min(static_cast<int>(std::ceil(7.0 * sig_p / step)), lat.S - 1);
  const int wm = std::min(static_cast<int>(std::ceil(7.0 * sig_m / step)), lat.S - 1);

  std::vector<double> tmp, even, odd;
  conv_diagonals(lat.counts, tmp, lat.S, true,
                 gauss_kernel(sig_p, step, -wp, wp, 0.0), -wp);
  conv_diagonals(tmp, even, lat.S, false,
                 gauss_kernel(sig_m, step, -wm, wm, 0.0), -wm);

  // Odd-parity offsets: shift the sources one row and use half-step kernels.
  std::vector<double> shifted(lat.counts.size(), 0.0);
  for (int i = 1; i < lat.S; ++i) {
    std::copy_n(lat.counts.begin() + static_cast<std::size_t>(i - 1) * lat.S, lat.S,
                shifted.begin() + static_cast<std::size_t>(i) * lat.S);
  }
  conv_diagonals(shifted, tmp, lat.S, true,
                 gauss_kernel(sig_p, step, -wp - 1, wp, 0.5), -wp - 1);
  conv_diagonals(tmp, odd, lat.S, false,
                 gauss_kernel(sig_m, step, -wm - 1, wm, 0.5), -wm - 1);

  for (std::size_t i = 0; i < even.size(); ++i) even[i] += odd[i];
  return even;
}

double catmull_rom(double p0, double p1, double p2, double p3, double t) {
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t);
}

double catmull_rom_weight(int offset, double t) {
  switch (offset) {
    case -1: return 0.5 * (-t + 2.0 * t * t - t * t * t);
    case 0: return 0.5 * (2.0 - 5.0 * t * t + 3.0 * t * t * t);
    case 1: return 0.5 * (t + 4.0 * t * t - 3.0 * t * t * t);
    default: return 0.5 * (-t * t + t * t * t);
  }
}

double bicubic(const std::vector<double>& a, int S, int org, int m, double x,
               double y) {
  const double gx = x * m + org;
  const double gy = y * m + org;
  int ix = static_cast<int>(std::floor(gx));
  int iy = static_cast<int>(std::floor(gy));
  ix = std::clamp(ix, 1, S - 3);
  iy = std::clamp(iy, 1, S - 3);
  const double tx = gx - ix, ty = gy - iy;
  double col[4];
  for (int r = 0; r < 4; ++r) {
    const double* row = a.data() + static_cast<std::size_t>(ix - 1 + r) * S + (iy - 1);
    col[r] = catmull_rom(row[0], row[1], row[2], row[3], ty);
  }
  return catmull_rom(col[0], col[1], col[2], col[3], tx);
}

// Lattice response at z to a unit point mass at p: linear binning of the mass,
// kernel convolution, bicubic readback. Needed so the leave-one-out term can
// subtract a point's own contribution exactly as the lattice carries it.
double binned_self_kernel(double zx, double zy, double px, double py, int S, int org,
                          int m, double inv_d, double inv_o) {
  const double gx = zx * m + org, gy = zy * m + org;
  int ix = static_cast<int>(std::floor(gx));
  int iy = static_cast<int>(std::floor(gy));
  ix = std::clamp(ix, 1, S - 3);
  iy = std::clamp(iy, 1, S - 3);
  const double tx = gx - ix, ty = gy - iy;

  const double hx = px * m + org, hy = py * m + org;
  int jx = static_cast<int>(std::floor(hx));
  int jy = static_cast<int>(std::floor(hy));
  jx = std::clamp(jx, 0, S - 2);
  jy = std::clamp(jy, 0, S - 2);
  const double fx = std::clamp(hx - jx, 0.0, 1.0);
  const double fy = std::clamp(hy - jy, 0.0, 1.0);
  const double wmx[2] = {1.0 - fx, fx};
  const double wmy[2] = {1.0 - fy, fy};

  const double delta = 1.0 / static_cast<double>(m);
  double total = 0.0;
  for (int r = -1; r <= 2; ++r) {
    const double cwx = catmull_rom_weight(r, tx);
    for (int s = -1; s <= 2; ++s) {
      const double cw = cwx * catmull_rom_weight(s, ty);
      for (int a = 0; a < 2; ++a) {
        const double du = static_cast<double>(ix + r - jx - a) * delta;
        for (int b = 0; b < 2; ++b) {
          const double dv = static_cast<double>(iy + s - jy - b) * delta;
          total += cw * wmx[a] * wmy[b] * kernel_term(du, dv, inv_d, inv_o);
        }
      }
    }
  }
  return total;
}

class LscvContext {
public:
  LscvContext(std::span<const double> u, std::span<const double> v)
      : n_(u.size()), obs_u_(u.begin(), u.end()), obs_v_(v.begin(), v.end()) {
    img_u_.reserve(9 * n_);
    img_v_.reserve(9 * n_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (const auto& [iu, iv] : reflect_point(obs_u_[i], obs_v_[i])) {
        img_u_.push_back(iu);
        img_v_.push_back(iv);
      }
    }
  }

  double score(const BandwidthMatrix& b) {
    const double sig_p = b.diag + b.off;
    const double sig_m = b.diag - b.off;
    const double sig_min = std::min(sig_p, sig_m);
    const double det = b.diag * b.diag - b.off * b.off;
    const double nn = static_cast<double>(n_);
    if (sig_min < 1.3 / 96.0) {
      // Below lattice resolution: the roughness term 1/(4 pi |B| n) dominates
      // and such candidates never win once ties have been removed.
      return 1.0 / (4.0 * kPi * det * nn);
    }
    int m = std::max(8, static_cast<int>(std::ceil(1.3 / sig_min)));
    m = std::min(96, (m + 7) / 8 * 8);
    const Lattice& lat = lattice(m);
    const std::vector<double> conv = convolve_lattice(lat, sig_p, sig_m);

    const double delta = 1.0 / static_cast<double>(m);
    const std::vector<double> w = simpson_weights(static_cast<std::size_t>(m), delta);
    double t1 = 0.0;
    for (int i = 0; i <= m; ++i) {
      const double* row =
          conv.data() + static_cast<std::size_t>(lat.org + i) * lat.S + lat.org;
      double acc = 0.0;
      for (int j = 0; j <= m; ++j) {
        const double c = row[j] / nn;
        acc += w[static_cast<std::size_t>(j)] * c * c;
      }
      t1 += w[static_cast<std::size_t>(i)] * acc;
    }

    const double inv_d = b.diag / det;
    const double inv_o = -b.off / det;
    const double kscale = 1.0 / (kTwoPi * det);
    const double reach = std::sqrt(kPruneQ) * (b.diag + std::abs(b.off)) +
                         4.0 / static_cast<double>(m);
    double sum_chat = 0.0, sum_self = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      sum_chat +=
          bicubic(conv, lat.S, lat.org, lat.m, obs_u_[i], obs_v_[i]) / nn;
      double self = 0.0;
      for (const auto& [iu, iv] : reflect_point(obs_u_[i], obs_v_[i])) {
        if (std::abs(obs_u_[i] - iu) > reach || std::abs(obs_v_[i] - iv) > reach) {
          continue;
        }
        self += binned_self_kernel(obs_u_[i], obs_v_[i], iu, iv, lat.S, lat.org,
                                   lat.m, inv_d, inv_o);
      }
      sum_self += self * kscale;
    }
    const double loo = (nn * sum_chat - sum_self) / (nn - 1.0);
    return t1 - 2.0 / nn * loo;
  }

private:
  const Lattice& lattice(int m) {
    auto it = lattices_.find(m);
    if (it == lattices_.end()) {
      it = lattices_.emplace(m, build_lattice(m, img_u_, img_v_)).first;
    }
    return it->second;
  }

  std::size_t n_;
  std::vector<double> obs_u_, obs_v_, img_u_, img_v_;
  std::map<int, Lattice> lattices_;
};

} // namespace

double copula_lscv_score(std::span<const double> u, std::span<const double> v,
                         const BandwidthMatrix& b) {
  validate(b);
  LscvContext ctx(u, v);
  return ctx.score(b);
}

BandwidthMatrix select_copula_bandwidth(std::span<const double> u,
                                        std::span<const double> v) {
  if (u.size() != v.size() || u.size() < 10) {
    throw FitError("select_copula_bandwidth: need at least 10 pseudo-observations");
  }
  const BandwidthMatrix nr = normal_reference_bandwidth(u, v); // also checks spread

  LscvContext ctx(u, v);
  BandwidthMatrix best = nr;
  double best_score = ctx.score(nr);
  constexpr int kDiagPoints = 20;
  constexpr int kOffPoints = 11;
  const double log_lo = std::log(0.01), log_hi = std::log(0.5);
  for (int i = 0; i < kDiagPoints; ++i) {
    const double diag = std::exp(log_lo + (log_hi - log_lo) * i / (kDiagPoints - 1.0));
    for (int j = 0; j < kOffPoints; ++j) {
      const double frac = -0.8 + 1.6 * j / (kOffPoints - 1.0);
      const BandwidthMatrix cand{diag, frac * diag};
      const double s = ctx.score(cand);
      if (s < best_score) {
        best_score = s;
        best = cand;
      }
    }
  }
  return best;
}

KernelCopula kernel_copula_fit(std::span<const double> u, std::span<const double> v,
                               std::optional<BandwidthMatrix> bandwidth) {
  if (u.size() != v.size() || u.size() < 10) {
    throw FitError("kernel_copula_fit: need at least 10 pseudo-observations");
  }
  if (bandwidth) {
    validate(*bandwidth);
    return KernelCopula(u, v, *bandwidth);
  }
  return KernelCopula(u, v, select_copula_bandwidth(u, v));
}

} // namespace cyldens
