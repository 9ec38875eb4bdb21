#pragma once

// Ideal gas of quasiparticles on a box momentum grid: boosted Gibbs occupations
// and the Landau normal-fluid tensor.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "locsf/error.hpp"

namespace locsf {

enum class Dispersion { free, phonon, tabulated };

inline std::string to_string(Dispersion d) {
  switch (d) {
    case Dispersion::free: return "free";
    case Dispersion::phonon: return "phonon";
    case Dispersion::tabulated: return "tabulated";
  }
  return "?";
}

inline Dispersion dispersion_from_string(const std::string& s) {
  if (s == "free") return Dispersion::free;
  if (s == "phonon") return Dispersion::phonon;
  if (s == "tabulated") return Dispersion::tabulated;
  fail(ErrorKind::config, "unknown dispersion '" + s + "'");
}

using KVector = std::array<double, 2>;

/// epsilon(k) on k in (2 pi / L) Z^d with |k_i| <= kmax.
///
/// free: params {m}, eps = |k|^2 / 2m.  phonon: params {c}, eps = c|k|.
/// tabulated: (|k|, eps) knots, piecewise linear in |k|.
class QuasiparticleSpectrum {
 public:
  QuasiparticleSpectrum(int dim, std::array<double, 2> lengths, double kmax, Dispersion disp,
                        std::vector<double> params, bool include_zero = false)
      : dim_(dim), lengths_(lengths), kmax_(kmax), disp_(disp), params_(std::move(params)),
        include_zero_(include_zero) {
    require(dim == 1 || dim == 2, ErrorKind::invalid_argument, "spectrum dimension must be 1 or 2");
    for (int i = 0; i < dim; ++i)
      require(lengths_[i] > 0.0, ErrorKind::invalid_argument, "box lengths must be positive");
    require(kmax > 0.0 && std::isfinite(kmax), ErrorKind::invalid_argument, "kmax must be positive");
    if (disp_ != Dispersion::tabulated)
      require(params_.size() == 1 && params_[0] > 0.0, ErrorKind::invalid_argument,
              to_string(disp_) + " dispersion takes one positive parameter");
    build_grid();
  }

  static QuasiparticleSpectrum tabulated(int dim, std::array<double, 2> lengths, double kmax,
                                         std::vector<std::pair<double, double>> knots, bool include_zero = false) {
    require(knots.size() >= 2, ErrorKind::invalid_argument, "tabulated dispersion needs at least two knots");
    std::sort(knots.begin(), knots.end());
    std::vector<double> flat;
    for (auto [k, e] : knots) {
      require(k >= 0.0 && e >= 0.0 && std::isfinite(e), ErrorKind::invalid_argument,
              "tabulated knots need |k| >= 0 and eps >= 0");
      flat.push_back(k);
      flat.push_back(e);
    }
    return QuasiparticleSpectrum(dim, lengths, kmax, Dispersion::tabulated, std::move(flat), include_zero);
  }

  int dim() const noexcept { return dim_; }
  Dispersion dispersion() const noexcept { return disp_; }
  const std::vector<double>& params() const noexcept { return params_; }
  double kmax() const noexcept { return kmax_; }
  double volume() const noexcept { return dim_ == 1 ? lengths_[0] : lengths_[0] * lengths_[1]; }
  const std::vector<KVector>& grid() const noexcept { return k_; }
  const std::vector<double>& energies() const noexcept { return eps_; }
  bool includes_zero() const noexcept { return include_zero_; }

  double energy(double kabs) const {
    switch (disp_) {
      case Dispersion::free: return kabs * kabs / (2.0 * params_[0]);
      case Dispersion::phonon: return params_[0] * kabs;
      case Dispersion::tabulated: {
        const std::size_t n = params_.size() / 2;
        require(kabs >= params_[0] - 1e-12 && kabs <= params_[2 * (n - 1)] + 1e-12, ErrorKind::invalid_argument,
                "momentum outside the tabulated dispersion range");
        for (std::size_t q = 0; q + 1 < n; ++q) {
          const double k0 = params_[2 * q], k1 = params_[2 * q + 2];
          if (kabs <= k1 || q + 2 == n) {
            const double t = k1 > k0 ? std::clamp((kabs - k0) / (k1 - k0), 0.0, 1.0) : 0.0;
            return (1 - t) * params_[2 * q + 1] + t * params_[2 * q + 3];
          }
        }
        return params_.back();
      }
    }
    return 0.0;
  }

 private:
  void build_grid() {
    std::array<long, 2> nmax{0, 0};
    for (int i = 0; i < dim_; ++i) nmax[i] = static_cast<long>(std::floor(kmax_ * lengths_[i] / (2 * std::numbers::pi)));
    require((2 * nmax[0] + 1) * (2 * nmax[1] + 1) <= 50'000'000, ErrorKind::dimension_cap,
            "momentum grid too large");
    for (long n1 = -nmax[1]; n1 <= nmax[1]; ++n1) {
      for (long n0 = -nmax[0]; n0 <= nmax[0]; ++n0) {
        if (n0 == 0 && n1 == 0 && !include_zero_) continue;
        KVector k{2 * std::numbers::pi * double(n0) / lengths_[0],
                  dim_ > 1 ? 2 * std::numbers::pi * double(n1) / lengths_[1] : 0.0};
        const double e = energy(std::hypot(k[0], k[1]));
        require(std::isfinite(e) && e >= 0.0, ErrorKind::invalid_argument, "dispersion must be finite and >= 0");
        k_.push_back(k);
        eps_.push_back(e);
      }
    }
  }

  int dim_;
  std::array<double, 2> lengths_;
  double kmax_;
  Dispersion disp_;
  std::vector<double> params_;
  bool include_zero_;
  std::vector<KVector> k_;
  std::vector<double> eps_;
};

/// Smallest kmax at which the Bose factor of `disp` has dropped below `tol` at temperature 1/beta.
inline double choose_kmax(Dispersion disp, const std::vector<double>& params, double beta, double tol = 1e-12) {
  require(beta > 0.0, ErrorKind::invalid_argument, "beta must be positive");
  const double target = std::log1p(1.0 / tol) / beta;
  switch (disp) {
    case Dispersion::free: return std::sqrt(2.0 * params.at(0) * target);
    case Dispersion::phonon: return target / params.at(0);
    case Dispersion::tabulated: break;
  }
  fail(ErrorKind::invalid_argument, "tabulated spectra need an explicit kmax");
}

/// min over the grid of eps(k) / |k|
inline double critical_velocity(const QuasiparticleSpectrum& sp) {
  double vc = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < sp.grid().size(); ++q) {
    const double k = std::hypot(sp.grid()[q][0], sp.grid()[q][1]);
    if (k > 0.0) vc = std::min(vc, sp.energies()[q] / k);
  }
  return vc;
}

/// Gibbs state of the gas seen from a frame moving with constant v.
class BoostedGibbs {
 public:
  BoostedGibbs(const QuasiparticleSpectrum& sp, double beta, KVector v) : sp_(&sp), beta_(beta), v_(v) {
    require(beta > 0.0, ErrorKind::invalid_argument, "beta must be positive");
    n_.reserve(sp.grid().size());
    for (std::size_t q = 0; q < sp.grid().size(); ++q) {
      const auto& k = sp.grid()[q];
      const double shifted = sp.energies()[q] - (k[0] * v[0] + k[1] * v[1]);
      if (!(shifted > 0.0))
        fail(ErrorKind::numerical, "occupation diverges: eps(k) - k.v <= 0 on the grid (boost beyond critical velocity)");
      n_.push_back(1.0 / std::expm1(beta * shifted));
    }
  }

  const QuasiparticleSpectrum& spectrum() const { return *sp_; }
  double beta() const noexcept { return beta_; }
  const KVector& velocity() const noexcept { return v_; }
  const std::vector<double>& occupations() const noexcept { return n_; }

 private:
  const QuasiparticleSpectrum* sp_;
  double beta_;
  KVector v_;
  std::vector<double> n_;
};

/// (1/volume) sum_k k n(k)
inline KVector momentum_density_gibbs(const BoostedGibbs& g, double volume) {
  require(volume > 0.0, ErrorKind::invalid_argument, "volume must be positive");
  KVector out{0.0, 0.0};
  const auto& k = g.spectrum().grid();
  for (std::size_t q = 0; q < k.size(); ++q) {
    out[0] += k[q][0] * g.occupations()[q];
    out[1] += k[q][1] * g.occupations()[q];
  }
  return {out[0] / volume, out[1] / volume};
}

/// -dn_B/d eps = beta e^{beta eps} / (e^{beta eps} - 1)^2, evaluated without overflow.
inline double bose_derivative(double beta, double eps) {
  const double x = beta * eps;
  if (x > 30.0) {
    const double e = std::exp(-x);
    return beta * e / ((1.0 - e) * (1.0 - e));
  }
  const double d = std::expm1(x);
  return beta * (d + 1.0) / (d * d);
}

/// (1/volume) sum_k k_i k_j (-dn_B/d eps)(eps(k))
inline double landau_normal_tensor(const QuasiparticleSpectrum& sp, double beta, double volume, int i, int j) {
  require(beta > 0.0 && volume > 0.0, ErrorKind::invalid_argument, "beta and volume must be positive");
  require(i >= 0 && i < sp.dim() && j >= 0 && j < sp.dim(), ErrorKind::invalid_argument, "axis out of range");
  if (sp.includes_zero() && sp.energy(0.0) == 0.0)
    fail(ErrorKind::numerical, "Landau sum diverges: k = 0 shell included for a gapless spectrum");
  double acc = 0.0;
  for (std::size_t q = 0; q < sp.grid().size(); ++q) {
    const auto& k = sp.grid()[q];
    const double w = k[i] * k[j];
    if (w == 0.0) continue;
    if (!(sp.energies()[q] > 0.0)) fail(ErrorKind::numerical, "Landau sum diverges: gapless mode at nonzero k");
    acc += w * bose_derivative(beta, sp.energies()[q]);
  }
  return acc / volume;
}

}  // namespace locsf
