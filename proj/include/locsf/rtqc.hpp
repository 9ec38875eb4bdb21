#pragma once

// Coherence of the N_Omega-particle marginal of a lattice state in a region,
// and the distillation rate bound it implies.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "locsf/error.hpp"
#include "locsf/fock.hpp"

namespace locsf {

enum class BasisMode { tuple, occupation };

inline std::string to_string(BasisMode m) { return m == BasisMode::tuple ? "tuple" : "occupation"; }

inline BasisMode basis_mode_from_string(const std::string& s) {
  if (s == "tuple") return BasisMode::tuple;
  if (s == "occupation") return BasisMode::occupation;
  fail(ErrorKind::config, "unknown basis mode '" + s + "'");
}

inline constexpr std::size_t kRegionBasisCap = 1u << 14;

/// Position tuples (x_1..x_N) indexed by sum_k x_k M^{k-1}, or occupations of the
/// region sites ordered like FockSpace: (N, 0, ...) first.
class RegionBasis {
 public:
  RegionBasis(std::vector<std::size_t> region, std::size_t particles, BasisMode mode)
      : region_(std::move(region)), n_(particles), mode_(mode) {
    require(!region_.empty(), ErrorKind::invalid_argument, "region is empty");
    auto sorted = region_;
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), ErrorKind::invalid_argument,
            "region lists a site twice");
    std::vector<std::uint8_t> cur(region_.size(), 0);
    enumerate(0, n_, cur);
    if (mode_ == BasisMode::tuple) {
      double d = 1.0;
      for (std::size_t k = 0; k < n_; ++k) d *= double(region_.size());
      require(d <= double(kRegionBasisCap), ErrorKind::dimension_cap, "tuple basis exceeds dimension cap");
      dim_ = static_cast<std::size_t>(d);
    } else {
      require(occ_.size() <= kRegionBasisCap, ErrorKind::dimension_cap, "occupation basis exceeds dimension cap");
      dim_ = occ_.size();
    }
  }

  const std::vector<std::size_t>& region() const noexcept { return region_; }
  std::size_t sites() const noexcept { return region_.size(); }
  std::size_t particles() const noexcept { return n_; }
  BasisMode mode() const noexcept { return mode_; }
  std::size_t dim() const noexcept { return dim_; }

  const std::vector<std::vector<std::uint8_t>>& occupations() const noexcept { return occ_; }

  std::size_t occupation_rank(const std::vector<std::uint8_t>& a) const {
    const auto it = rank_.find(key(a));
    require(it != rank_.end(), ErrorKind::invalid_argument, "occupation not in region basis");
    return it->second;
  }

  /// Isometry from occupation amplitudes to tuple amplitudes (identity in occupation mode).
  CMatrix embedding() const {
    const auto nocc = static_cast<Eigen::Index>(occ_.size());
    if (mode_ == BasisMode::occupation) return CMatrix::Identity(nocc, nocc);
    CMatrix E = CMatrix::Zero(static_cast<Eigen::Index>(dim_), nocc);
    const std::size_t M = region_.size();
    std::vector<std::uint8_t> content(M);
    for (std::size_t t = 0; t < dim_; ++t) {
      std::fill(content.begin(), content.end(), 0);
      std::size_t r = t;
      for (std::size_t k = 0; k < n_; ++k) {
        ++content[r % M];
        r /= M;
      }
      const std::size_t a = occupation_rank(content);
      double count = std::tgamma(double(n_) + 1.0);
      for (auto c : content) count /= std::tgamma(double(c) + 1.0);
      E(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(a)) = 1.0 / std::sqrt(count);
    }
    return E;
  }

 private:
  static std::string key(const std::vector<std::uint8_t>& a) { return std::string(a.begin(), a.end()); }

  void enumerate(std::size_t site, std::size_t left, std::vector<std::uint8_t>& cur) {
    if (site + 1 == cur.size()) {
      cur[site] = static_cast<std::uint8_t>(left);
      rank_[key(cur)] = occ_.size();
      occ_.push_back(cur);
      return;
    }
    for (std::size_t k = left + 1; k-- > 0;) {
      cur[site] = static_cast<std::uint8_t>(k);
      enumerate(site + 1, left - k, cur);
    }
    cur[site] = 0;
  }

  std::vector<std::size_t> region_;
  std::size_t n_;
  BasisMode mode_;
  std::size_t dim_ = 0;
  std::vector<std::vector<std::uint8_t>> occ_;
  std::map<std::string, std::size_t> rank_;
};

struct MarginalState {
  RegionBasis basis;
  CMatrix matrix;
};

namespace detail {
/// Unnormalized marginal in the occupation basis; returns the sector probability.
inline double marginal_occupation(const StateVector& st, const RegionBasis& B, CMatrix& out) {
  const auto& sp = st.space();
  for (auto s : B.region())
    require(s < sp.sites(), ErrorKind::invalid_argument, "region site outside the domain");
  std::vector<bool> in(sp.sites(), false);
  for (auto s : B.region()) in[s] = true;
  std::map<std::vector<std::uint8_t>, std::size_t> comp;
  std::vector<std::pair<std::size_t, std::size_t>> rows;  // (region rank, complement key) per basis vector
  std::vector<cplx> amps;
  std::vector<std::uint8_t> a(B.sites()), c;
  for (std::size_t b = 0; b < sp.dim(); ++b) {
    const cplx amp = st.amplitudes()[static_cast<Eigen::Index>(b)];
    if (amp == cplx(0.0)) continue;
    const auto occ = sp.occupation(b);
    std::size_t inside = 0;
    for (std::size_t k = 0; k < B.sites(); ++k) inside += (a[k] = occ[B.region()[k]]);
    if (inside != B.particles()) continue;
    c.clear();
    for (std::size_t s = 0; s < sp.sites(); ++s)
      if (!in[s]) c.push_back(occ[s]);
    const auto key = comp.emplace(c, comp.size()).first->second;
    rows.emplace_back(B.occupation_rank(a), key);
    amps.push_back(amp);
  }
  CMatrix psi = CMatrix::Zero(static_cast<Eigen::Index>(B.occupations().size()),
                              static_cast<Eigen::Index>(std::max<std::size_t>(comp.size(), 1)));
  for (std::size_t q = 0; q < rows.size(); ++q)
    psi(static_cast<Eigen::Index>(rows[q].first), static_cast<Eigen::Index>(rows[q].second)) = amps[q];
  out = psi * psi.adjoint();
  return out.trace().real();
}

inline MarginalState finish(const RegionBasis& B, const CMatrix& occ, double prob) {
  if (!(prob > 1e-300)) fail(ErrorKind::numerical, "region sector with N_Omega particles has zero probability");
  const CMatrix E = B.embedding();
  CMatrix rho = E * (occ / prob) * E.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return {B, rho};
}
}  // namespace detail

inline MarginalState marginal_state(const StateVector& st, const std::vector<std::size_t>& region,
                                    std::size_t n_region, BasisMode mode = BasisMode::tuple) {
  require(n_region <= st.space().particles(), ErrorKind::invalid_argument, "N_Omega exceeds particle number");
  RegionBasis B(region, n_region, mode);
  CMatrix occ;
  const double p = detail::marginal_occupation(st, B, occ);
  return detail::finish(B, occ, p);
}

inline MarginalState marginal_state(const Ensemble& ens, const std::vector<std::size_t>& region,
                                    std::size_t n_region, BasisMode mode = BasisMode::tuple) {
  require(!ens.empty(), ErrorKind::invalid_argument, "empty ensemble");
  RegionBasis B(region, n_region, mode);
  const auto n = static_cast<Eigen::Index>(B.occupations().size());
  CMatrix acc = CMatrix::Zero(n, n);
  double p = 0.0;
  for (const auto& w : ens) {
    if (w.state.space().particles() < n_region) continue;
    CMatrix occ;
    const double pk = detail::marginal_occupation(w.state, B, occ) / w.state.amplitudes().squaredNorm();
    acc += w.weight * occ / w.state.amplitudes().squaredNorm();
    p += w.weight * pk;
  }
  return detail::finish(B, acc, p);
}

/// (1 - w) a + w b on a common basis.
inline MarginalState mix(const MarginalState& a, const MarginalState& b, double w) {
  require(a.matrix.rows() == b.matrix.rows() && a.basis.mode() == b.basis.mode(), ErrorKind::invalid_argument,
          "mixing marginals on different bases");
  return {a.basis, (1.0 - w) * a.matrix + w * b.matrix};
}

inline MarginalState decohere(const MarginalState& s) {
  return {s.basis, CMatrix(s.matrix.diagonal().asDiagonal())};
}

/// Diagonal unitary diag(e^{i phi_I}) applied as U sigma U^dag.
inline MarginalState rotate_phases(const MarginalState& s, const std::vector<double>& phi) {
  require(phi.size() == s.basis.dim(), ErrorKind::invalid_argument, "one phase per basis element");
  CVector u(static_cast<Eigen::Index>(phi.size()));
  for (std::size_t k = 0; k < phi.size(); ++k) u[static_cast<Eigen::Index>(k)] = std::polar(1.0, phi[k]);
  return {s.basis, (u.asDiagonal() * s.matrix * u.conjugate().asDiagonal()).eval()};
}

inline double entropy_bits(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (double x : p)
    if (x > 1e-300) h -= x * std::log2(x);
  return h;
}

inline double von_neumann_bits(const CMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorKind::numerical, "eigensolver failed");
  return entropy_bits(es.eigenvalues().cwiseMax(0.0));
}

struct CoherenceReport {
  double coherence = 0.0;  // bits
  double entropy = 0.0;
  double entropy_decohered = 0.0;
  long rate_bound = 0;
  BasisMode mode = BasisMode::tuple;
  std::size_t region_sites = 0;
  std::size_t particles = 0;
};

/// C = S(Delta sigma) - S(sigma) in bits, clamped at zero within 1e-10.
/// Off-diagonal mass below 1e-12 counts as incoherent and gives exactly zero.
inline CoherenceReport coherence(const MarginalState& s) {
  CoherenceReport r;
  r.mode = s.basis.mode();
  r.region_sites = s.basis.sites();
  r.particles = s.basis.particles();
  r.entropy_decohered = entropy_bits(s.matrix.diagonal().real().cwiseMax(0.0));
  const double off = (s.matrix - CMatrix(s.matrix.diagonal().asDiagonal())).norm();
  r.entropy = off < 1e-12 ? r.entropy_decohered : von_neumann_bits(s.matrix);
  const double c = r.entropy_decohered - r.entropy;
  if (c < -1e-10) fail(ErrorKind::numerical, "negative coherence " + std::to_string(c));
  r.coherence = std::max(c, 0.0);
  if (r.region_sites >= 2 && r.particles >= 1)
    r.rate_bound = static_cast<long>(
        std::floor(r.coherence / (double(r.particles) * std::log2(double(r.region_sites))) + 1e-9));
  return r;
}

inline long distillation_rate(const MarginalState& s) {
  require(s.basis.sites() >= 2, ErrorKind::invalid_argument, "distillation rate needs at least two region sites");
  require(s.basis.particles() >= 1, ErrorKind::invalid_argument, "distillation rate needs N_Omega >= 1");
  return coherence(s).rate_bound;
}

inline long distillation_rate(const StateVector& st, const std::vector<std::size_t>& region, std::size_t n_region,
                              BasisMode mode = BasisMode::tuple) {
  require(region.size() >= 2, ErrorKind::invalid_argument, "distillation rate needs at least two region sites");
  return distillation_rate(marginal_state(st, region, n_region, mode));
}

}  // namespace locsf
