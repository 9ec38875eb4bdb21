#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "locsf/domain.hpp"
#include "locsf/error.hpp"

namespace locsf {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr std::size_t kDefaultFockCap = 2'000'000;

/// N-boson sector on the sites of a Domain.
///
/// Basis vectors are occupation tuples (n_1, ..., n_M) with sum N, ordered
/// lexicographically from (N, 0, ..., 0) down to (0, ..., 0, N). rank() is the
/// inverse of occupation().
class FockSpace {
 public:
  FockSpace(const Domain& domain, std::size_t particles, std::size_t cap = kDefaultFockCap)
      : domain_(domain), n_(particles), m_(domain.site_count()) {
    require(particles <= 255, ErrorKind::dimension_cap, "at most 255 particles per site");
    build_counts(cap);
    dim_ = count(m_, n_);
    require(dim_ <= cap && dim_ != kSaturated, ErrorKind::dimension_cap,
            "Fock space dimension exceeds cap " + std::to_string(cap));
    require(dim_ * m_ <= (std::size_t{1} << 31), ErrorKind::dimension_cap,
            "Fock basis table too large");
    occ_.assign(dim_ * m_, 0);
    std::vector<std::uint8_t> cur(m_, 0);
    std::size_t next = 0;
    enumerate(0, n_, cur, next);
  }

  const Domain& domain() const noexcept { return domain_; }
  std::size_t particles() const noexcept { return n_; }
  std::size_t sites() const noexcept { return m_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const std::uint8_t> occupation(std::size_t index) const {
    return {occ_.data() + index * m_, m_};
  }

  std::size_t rank(std::span<const std::uint8_t> n) const {
    std::size_t r = 0;
    std::size_t left = n_;
    for (std::size_t s = 0; s + 1 < m_ && left > 0; ++s) {
      if (n[s] < left) r += count(m_ - s, left - n[s] - 1);
      left -= n[s];
    }
    return r;
  }

  /// Number of ways to place r bosons on q sites.
  std::size_t count(std::size_t q, std::size_t r) const { return counts_[q * (n_ + 1) + r]; }

 private:
  static constexpr std::size_t kSaturated = static_cast<std::size_t>(-1);

  void build_counts(std::size_t cap) {
    counts_.assign((m_ + 1) * (n_ + 1), 0);
    counts_[0] = 1;
    const std::size_t limit = std::max<std::size_t>(cap, 1) * 4;
    for (std::size_t q = 1; q <= m_; ++q) {
      for (std::size_t r = 0; r <= n_; ++r) {
        std::size_t v = counts_[(q - 1) * (n_ + 1) + r];
        if (r > 0) {
          const std::size_t w = counts_[q * (n_ + 1) + r - 1];
          v = (v == kSaturated || w == kSaturated || v + w > limit) ? kSaturated : v + w;
        }
        counts_[q * (n_ + 1) + r] = v;
      }
    }
  }

  void enumerate(std::size_t site, std::size_t left, std::vector<std::uint8_t>& cur, std::size_t& next) {
    if (site + 1 == m_) {
      cur[site] = static_cast<std::uint8_t>(left);
      std::copy(cur.begin(), cur.end(), occ_.begin() + static_cast<std::ptrdiff_t>(next * m_));
      ++next;
      return;
    }
    for (std::size_t k = left + 1; k-- > 0;) {
      cur[site] = static_cast<std::uint8_t>(k);
      enumerate(site + 1, left - k, cur, next);
    }
    cur[site] = 0;
  }

  Domain domain_;
  std::size_t n_;
  std::size_t m_;
  std::size_t dim_ = 0;
  std::vector<std::size_t> counts_;
  std::vector<std::uint8_t> occ_;
};

using FockSpacePtr = std::shared_ptr<const FockSpace>;

inline FockSpacePtr make_fock_space(const Domain& domain, std::size_t particles,
                                    std::size_t cap = kDefaultFockCap) {
  return std::make_shared<const FockSpace>(domain, particles, cap);
}

/// Pure state: amplitude vector over a FockSpace basis.
class StateVector {
 public:
  StateVector() = default;
  StateVector(FockSpacePtr space, CVector amplitudes)
      : space_(std::move(space)), amps_(std::move(amplitudes)) {
    require(space_ != nullptr, ErrorKind::invalid_argument, "state needs a Fock space");
    require(static_cast<std::size_t>(amps_.size()) == space_->dim(), ErrorKind::invalid_argument,
            "amplitude vector length does not match Fock space dimension");
  }

  const FockSpace& space() const { return *space_; }
  const FockSpacePtr& space_ptr() const noexcept { return space_; }
  const CVector& amplitudes() const noexcept { return amps_; }
  CVector& amplitudes() noexcept { return amps_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(amps_.size()); }

  double norm() const { return amps_.norm(); }

  StateVector& normalize() {
    const double n = norm();
    require(n > 0.0, ErrorKind::numerical, "cannot normalize a zero state");
    amps_ /= n;
    return *this;
  }

 private:
  FockSpacePtr space_;
  CVector amps_;
};

struct WeightedState {
  double weight = 1.0;
  StateVector state;
};

/// Mixed state as a weighted list of pure states. Weights sum to one.
using Ensemble = std::vector<WeightedState>;

inline Ensemble pure_ensemble(StateVector s) {
  Ensemble e;
  e.push_back({1.0, std::move(s)});
  return e;
}

// --- elementary operator kernels -------------------------------------------

/// <n_s> for every site (dimensionless occupation).
inline std::vector<double> occupations(const StateVector& st) {
  const auto& sp = st.space();
  std::vector<double> n(sp.sites(), 0.0);
  for (std::size_t b = 0; b < sp.dim(); ++b) {
    const double p = std::norm(st.amplitudes()[static_cast<Eigen::Index>(b)]);
    if (p == 0.0) continue;
    const auto occ = sp.occupation(b);
    for (std::size_t s = 0; s < sp.sites(); ++s)
      if (occ[s]) n[s] += p * occ[s];
  }
  return n;
}

/// fwd[s] = <psi_s^dag psi_{s+e_axis}>; zero where the forward neighbour does not exist.
inline std::vector<cplx> forward_correlators(const StateVector& st, int axis) {
  const auto& sp = st.space();
  const auto& dom = sp.domain();
  const auto& c = st.amplitudes();
  std::vector<cplx> fwd(sp.sites(), cplx{});
  std::vector<std::uint8_t> work(sp.sites());
  for (std::size_t b = 0; b < sp.dim(); ++b) {
    const cplx cb = c[static_cast<Eigen::Index>(b)];
    if (cb == cplx{}) continue;
    const auto occ = sp.occupation(b);
    for (std::size_t t = 0; t < sp.sites(); ++t) {
      if (!occ[t]) continue;
      const auto s = dom.neighbor(t, axis, -1);
      if (!s) continue;
      // psi_s^dag psi_t moves one boson t -> s, with s = t - e_axis.
      std::copy(occ.begin(), occ.end(), work.begin());
      const double amp = std::sqrt(static_cast<double>(work[t]) * (work[*s] + 1.0));
      work[t] -= 1;
      work[*s] += 1;
      const auto bp = sp.rank(work);
      fwd[*s] += std::conj(c[static_cast<Eigen::Index>(bp)]) * cb * amp;
    }
  }
  return fwd;
}

/// <psi_s^dag psi_t> for arbitrary sites.
inline cplx correlator(const StateVector& st, std::size_t s, std::size_t t) {
  const auto& sp = st.space();
  const auto& c = st.amplitudes();
  cplx acc{};
  std::vector<std::uint8_t> work(sp.sites());
  for (std::size_t b = 0; b < sp.dim(); ++b) {
    const cplx cb = c[static_cast<Eigen::Index>(b)];
    const auto occ = sp.occupation(b);
    if (cb == cplx{} || !occ[t]) continue;
    if (s == t) {
      acc += std::norm(cb) * static_cast<double>(occ[t]);
      continue;
    }
    std::copy(occ.begin(), occ.end(), work.begin());
    const double amp = std::sqrt(static_cast<double>(work[t]) * (work[s] + 1.0));
    work[t] -= 1;
    work[s] += 1;
    acc += std::conj(c[static_cast<Eigen::Index>(sp.rank(work))]) * cb * amp;
  }
  return acc;
}

struct OneBodyTerm {
  std::size_t s;  // creation site
  std::size_t t;  // annihilation site
  cplx coeff;
};

/// sum_k coeff_k psi_{s_k}^dag psi_{t_k} applied to a state (result is not normalized).
inline CVector apply_one_body(const FockSpace& sp, const CVector& v, const std::vector<OneBodyTerm>& terms) {
  CVector out = CVector::Zero(v.size());
  std::vector<std::uint8_t> work(sp.sites());
  for (std::size_t b = 0; b < sp.dim(); ++b) {
    const cplx cb = v[static_cast<Eigen::Index>(b)];
    if (cb == cplx{}) continue;
    const auto occ = sp.occupation(b);
    for (const auto& term : terms) {
      if (!occ[term.t]) continue;
      if (term.s == term.t) {
        out[static_cast<Eigen::Index>(b)] += term.coeff * static_cast<double>(occ[term.t]) * cb;
        continue;
      }
      std::copy(occ.begin(), occ.end(), work.begin());
      const double amp = std::sqrt(static_cast<double>(work[term.t]) * (work[term.s] + 1.0));
      work[term.t] -= 1;
      work[term.s] += 1;
      out[static_cast<Eigen::Index>(sp.rank(work))] += term.coeff * amp * cb;
    }
  }
  return out;
}

/// a^dag_phi = sum_s phi_s psi_s^dag, mapping the N sector of `from` into `to` (N+1).
inline CVector apply_creation(const FockSpace& from, const CVector& v, const FockSpace& to,
                              const CVector& mode) {
  require(to.particles() == from.particles() + 1 && to.sites() == from.sites(),
          ErrorKind::invalid_argument, "creation maps N into N+1 on the same grid");
  CVector out = CVector::Zero(static_cast<Eigen::Index>(to.dim()));
  std::vector<std::uint8_t> work(from.sites());
  for (std::size_t b = 0; b < from.dim(); ++b) {
    const cplx cb = v[static_cast<Eigen::Index>(b)];
    if (cb == cplx{}) continue;
    const auto occ = from.occupation(b);
    std::copy(occ.begin(), occ.end(), work.begin());
    for (std::size_t s = 0; s < from.sites(); ++s) {
      const cplx ph = mode[static_cast<Eigen::Index>(s)];
      if (ph == cplx{}) continue;
      const double amp = std::sqrt(work[s] + 1.0);
      work[s] += 1;
      out[static_cast<Eigen::Index>(to.rank(work))] += ph * amp * cb;
      work[s] -= 1;
    }
  }
  return out;
}

}  // namespace locsf
