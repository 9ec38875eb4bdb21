#pragma once

// Exact desk-scale reference: Fock-space states on a grid, the local Galilei
// transformation, lattice momentum density and the local normal-fluid limit.

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "locsf/domain.hpp"
#include "locsf/error.hpp"
#include "locsf/fock.hpp"
#include "locsf/normal_fluid.hpp"
#include "locsf/velocity_field.hpp"

namespace locsf {

/// Which phase the transformation imprints: m v(x)^T x, or m v(x)_j x_j along one axis.
struct PhaseSpec {
  std::optional<int> direction;  // empty: full phase

  static PhaseSpec full() { return {}; }
  static PhaseSpec along(int j) { return {j}; }
};

struct SitePhases {
  std::vector<double> phase;
  std::vector<bool> masked;  // site lies in the field's singular region
};

/// Boost phase at every site. With `allow_masked`, singular sites get phase 0 and are flagged.
inline SitePhases lgt_phases(const Domain& dom, const VelocityField& vf, double mass, PhaseSpec spec,
                             bool allow_masked = false) {
  require(vf.dim() == dom.dim(), ErrorKind::invalid_argument, "field and domain dimension differ");
  SitePhases out{std::vector<double>(dom.site_count(), 0.0), std::vector<bool>(dom.site_count(), false)};
  for (std::size_t s = 0; s < dom.site_count(); ++s) {
    const Point x = dom.coord(s);
    if (vf.singular(x)) {
      if (!allow_masked) fail(ErrorKind::singular_point, "velocity field singular at a grid site");
      out.masked[s] = true;
      continue;
    }
    out.phase[s] = spec.direction ? eval_directional_phase(vf, mass, x, *spec.direction)
                                  : eval_boost_phase(vf, mass, x);
  }
  return out;
}

/// Multiplies each basis amplitude by exp(i sum_s n_s theta_s).
inline StateVector apply_phases(const StateVector& st, const std::vector<double>& theta) {
  const auto& sp = st.space();
  CVector out = st.amplitudes();
  for (std::size_t b = 0; b < sp.dim(); ++b) {
    const auto occ = sp.occupation(b);
    double ph = 0.0;
    for (std::size_t s = 0; s < sp.sites(); ++s)
      if (occ[s]) ph += occ[s] * theta[s];
    out[static_cast<Eigen::Index>(b)] *= std::polar(1.0, ph);
  }
  return StateVector(st.space_ptr(), std::move(out));
}

/// U[m v(x)] applied to a state; diagonal in the occupation basis, hence exactly unitary.
inline StateVector apply_lgt(const StateVector& st, const VelocityField& vf, double mass,
                             PhaseSpec spec = PhaseSpec::full()) {
  return apply_phases(st, lgt_phases(st.space().domain(), vf, mass, spec).phase);
}

/// Lattice momentum density <g(x_s)_i> at every site, per unit volume.
///
/// Centred stencil g_s = (1/(2i*2a)) [psi_s^dag (psi_{s+e} - psi_{s-e}) - h.c.] / a^d.
/// Entries at open-boundary edge sites are NaN.
inline std::vector<double> momentum_density(const StateVector& st, int axis) {
  const auto& dom = st.space().domain();
  require(axis >= 0 && axis < dom.dim(), ErrorKind::invalid_argument, "axis out of range");
  const auto fwd = forward_correlators(st, axis);
  const double a = dom.spacing(axis);
  const double cell = dom.cell_volume();
  std::vector<double> g(dom.site_count(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t s = 0; s < dom.site_count(); ++s) {
    if (dom.on_open_edge(s, axis)) continue;
    const auto back = dom.neighbor(s, axis, -1);
    g[s] = (fwd[s].imag() + fwd[*back].imag()) / (2.0 * a * cell);
  }
  return g;
}

inline double momentum_density(const StateVector& st, std::size_t site, int axis) {
  const auto& dom = st.space().domain();
  require(site < dom.site_count(), ErrorKind::invalid_argument, "site out of range");
  if (dom.on_open_edge(site, axis))
    fail(ErrorKind::boundary_stencil, "momentum density stencil leaves the open domain");
  return momentum_density(st, axis)[site];
}

/// Mass density m <psi^dag psi(x_s)> per unit volume.
inline std::vector<double> mass_density(const Ensemble& ens, double mass) {
  require(!ens.empty(), ErrorKind::invalid_argument, "empty ensemble");
  const double cell = ens.front().state.space().domain().cell_volume();
  std::vector<double> rho(ens.front().state.space().sites(), 0.0);
  for (const auto& [w, st] : ens) {
    const auto n = occupations(st);
    for (std::size_t s = 0; s < n.size(); ++s) rho[s] += w * mass * n[s] / cell;
  }
  return rho;
}

struct LimitOptions {
  /// Relative mismatch between the two linear extrapolants above which a site is flagged.
  double consistency_tol = 1e-3;
};

/// Local normal-fluid tensor component (i, j) of a (mixed) state.
///
/// The field is scaled by eps in {1, 1/2, 1/4}; each scaled transformation along
/// axis j gives the ratio <g_i(x)>/(eps v_j(x)). The three ratios are
/// extrapolated to eps = 0 by the quadratic through them. Sites where v_j = 0,
/// where the stencil touches the singular region, or on open edges are masked.
inline NormalFluidField local_normal_tensor(const Ensemble& ens, const VelocityField& vf, double mass, int i,
                                            int j, LimitOptions opts = {}) {
  require(!ens.empty(), ErrorKind::invalid_argument, "empty ensemble");
  const auto& dom = ens.front().state.space().domain();
  require(i >= 0 && i < dom.dim() && j >= 0 && j < dom.dim(), ErrorKind::invalid_argument,
          "tensor component out of range");
  const std::size_t M = dom.site_count();
  const std::array<double, 3> eps{1.0, 0.5, 0.25};
  std::array<std::vector<double>, 3> current;
  std::vector<bool> singular;
  for (int k = 0; k < 3; ++k) {
    const auto field = vf.scaled(eps[k]);
    const auto ph = lgt_phases(dom, field, mass, PhaseSpec::along(j), true);
    if (k == 0) singular = ph.masked;
    current[k].assign(M, 0.0);
    for (const auto& [w, st] : ens) {
      const auto g = momentum_density(apply_phases(st, ph.phase), i);
      for (std::size_t s = 0; s < M; ++s) current[k][s] += w * g[s];
    }
  }
  const auto rho = mass_density(ens, mass);

  std::vector<NormalFluidSite> sites(M);
  std::size_t inconsistent = 0;
  for (std::size_t s = 0; s < M; ++s) {
    auto& out = sites[s];
    out.x = dom.coord(s);
    out.rho = rho[s];
    out.seam = dom.on_seam(s, i);
    bool masked = singular[s] || dom.on_open_edge(s, i);
    for (int step : {-1, 1}) {
      const auto nb = dom.neighbor(s, i, step);
      if (nb && singular[*nb]) masked = true;
    }
    const double vj = masked ? 0.0 : vf.eval(out.x)[j];
    if (masked || vj == 0.0) {
      out.masked = true;
      out.rho_n[i][j] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    std::array<double, 3> r{};
    for (int k = 0; k < 3; ++k) r[k] = current[k][s] / (eps[k] * vj);
    const double lin_hi = 2.0 * r[1] - r[0];
    const double lin_lo = 2.0 * r[2] - r[1];
    const double quad = (8.0 * r[2] - 6.0 * r[1] + r[0]) / 3.0;
    const double scale = std::max({std::abs(quad), mass * rho[s], 1e-300});
    if (!out.seam && std::abs(lin_hi - lin_lo) > opts.consistency_tol * scale) ++inconsistent;
    out.rho_n[i][j] = quad;
    out.stderr_n[i][j] = std::abs(quad - lin_lo);
  }
  NormalFluidField field(dom.dim(), std::move(sites), "fock-oracle");
  field.add_component(i, j);
  if (inconsistent > 0)
    field.warn("v->0 extrapolation not consistent with linear-in-eps behaviour at " +
               std::to_string(inconsistent) + " sites");
  field.flag_positivity();
  return field;
}

inline NormalFluidField local_normal_tensor(const StateVector& st, const VelocityField& vf, double mass, int i,
                                            int j, LimitOptions opts = {}) {
  return local_normal_tensor(pure_ensemble(st), vf, mass, i, j, opts);
}

/// (N m / |Omega|) [delta_ij + x_j d_i v_j / v_j]
inline double bec_closed_form(const VelocityField& vf, std::size_t particles, const Domain& dom, double mass,
                              int i, int j, const Point& x) {
  const double base = static_cast<double>(particles) * mass / dom.volume();
  const double vj = vf.eval(x)[j];
  const double dij = vf.jacobian(x)[i][j];
  double ratio = 0.0;
  if (vj != 0.0) {
    ratio = x[j] * dij / vj;
  } else if (dij != 0.0) {
    // v_j = c_j x_j has the limit 1 at its zero; anything else is singular here
    if (vf.family() != FieldFamily::linear || i != j)
      fail(ErrorKind::singular_point, "closed form singular: v_j = 0 with nonzero gradient");
    ratio = 1.0;
  }
  return base * ((i == j ? 1.0 : 0.0) + ratio);
}

// --- state construction -----------------------------------------------------

/// (sum_s psi_s^dag / sqrt(M))^N |VAC>, normalized.
inline StateVector build_k0_bec(FockSpacePtr space) {
  const auto& sp = *space;
  std::vector<double> logfact(sp.particles() + 1, 0.0);
  for (std::size_t k = 1; k <= sp.particles(); ++k) logfact[k] = logfact[k - 1] + std::log(double(k));
  CVector amps(static_cast<Eigen::Index>(sp.dim()));
  for (std::size_t b = 0; b < sp.dim(); ++b) {
    const auto occ = sp.occupation(b);
    double l = logfact[sp.particles()];
    for (auto n : occ) l -= logfact[n];
    amps[static_cast<Eigen::Index>(b)] = std::exp(0.5 * l);
  }
  StateVector st(std::move(space), std::move(amps));
  st.normalize();
  return st;
}

/// prod_k (a^dag_{phi_k})^{n_k} / sqrt(n_k!) |VAC> for grid modes phi_k (lattice-normalized).
inline StateVector build_fragmented(FockSpacePtr space, const std::vector<CVector>& modes,
                                    const std::vector<std::size_t>& occupations, double ortho_tol = 1e-10) {
  const auto& sp = *space;
  require(modes.size() == occupations.size(), ErrorKind::invalid_argument,
          "one occupation per mode required");
  std::size_t total = 0;
  for (auto n : occupations) total += n;
  require(total == sp.particles(), ErrorKind::invalid_argument, "occupations must sum to N");
  for (std::size_t a = 0; a < modes.size(); ++a) {
    require(static_cast<std::size_t>(modes[a].size()) == sp.sites(), ErrorKind::invalid_argument,
            "mode length must equal site count");
    for (std::size_t b = a; b < modes.size(); ++b) {
      const cplx ov = modes[a].dot(modes[b]);
      const double target = a == b ? 1.0 : 0.0;
      require(std::abs(ov - target) <= ortho_tol, ErrorKind::invalid_argument, "modes are not orthonormal");
    }
  }
  auto cur_space = make_fock_space(sp.domain(), 0);
  CVector cur = CVector::Ones(1);
  for (std::size_t k = 0; k < modes.size(); ++k) {
    for (std::size_t r = 0; r < occupations[k]; ++r) {
      const std::size_t n_next = cur_space->particles() + 1;
      auto next_space = n_next == sp.particles() ? space : make_fock_space(sp.domain(), n_next);
      cur = apply_creation(*cur_space, cur, *next_space, modes[k]);
      cur_space = std::move(next_space);
    }
  }
  StateVector st(space, std::move(cur));
  st.normalize();
  return st;
}

/// (sum_{s in region} e^{-i m v(x_s)^T x_s} psi_s^dag / sqrt(M_region))^N |VAC>, normalized.
inline StateVector build_strong_sf(const Domain& dom, const VelocityField& vf, double mass,
                                   const std::vector<std::size_t>& region, std::size_t particles) {
  require(!region.empty(), ErrorKind::invalid_argument, "strongly superfluid region is empty");
  CVector mode = CVector::Zero(static_cast<Eigen::Index>(dom.site_count()));
  const double amp = 1.0 / std::sqrt(static_cast<double>(region.size()));
  for (auto s : region) {
    require(s < dom.site_count(), ErrorKind::invalid_argument, "region site out of range");
    mode[static_cast<Eigen::Index>(s)] = std::polar(amp, -eval_boost_phase(vf, mass, dom.coord(s)));
  }
  return build_fragmented(make_fock_space(dom, particles), {mode}, {particles});
}

/// Plane wave e^{i k x_s} / sqrt(M) on a ring, k = 2 pi n / L.
inline CVector plane_wave(const Domain& dom, int n) {
  require(dom.dim() == 1 && dom.periodic(), ErrorKind::invalid_argument, "plane waves need a 1-d ring");
  const double k = 2.0 * std::numbers::pi * n / dom.length(0);
  const double amp = 1.0 / std::sqrt(static_cast<double>(dom.site_count()));
  CVector v(static_cast<Eigen::Index>(dom.site_count()));
  for (std::size_t s = 0; s < dom.site_count(); ++s) v[static_cast<Eigen::Index>(s)] = std::polar(amp, k * dom.coord(s)[0]);
  return v;
}

/// N-particle sector of exp(-sum_{n>0} alpha_n a_{k_n}^dag a_{-k_n}^dag)|VAC>, normalized.
/// Keys are positive integer wavenumbers n (k_n = 2 pi n / L) on a 1-d ring.
inline StateVector build_bogoliubov_projected(const std::map<int, cplx>& alphas, FockSpacePtr space) {
  const auto& sp = *space;
  const auto& dom = sp.domain();
  require(sp.particles() % 2 == 0, ErrorKind::invalid_argument, "pair states need even N");
  require(dom.dim() == 1 && dom.periodic(), ErrorKind::invalid_argument, "pair states live on a 1-d ring");
  const int M = static_cast<int>(dom.site_count());
  for (const auto& [n, a] : alphas)
    require(n > 0 && 2 * n % M != 0, ErrorKind::invalid_argument,
            "pair wavenumbers must be positive with k != -k modulo the lattice");
  auto cur_space = make_fock_space(dom, 0);
  CVector cur = CVector::Ones(1);
  for (std::size_t p = 0; p < sp.particles() / 2; ++p) {
    auto mid_space = make_fock_space(dom, cur_space->particles() + 1);
    auto next_space = cur_space->particles() + 2 == sp.particles() ? space
                                                                   : make_fock_space(dom, cur_space->particles() + 2);
    CVector next = CVector::Zero(static_cast<Eigen::Index>(next_space->dim()));
    for (const auto& [n, a] : alphas) {
      if (a == cplx{}) continue;
      CVector mid = apply_creation(*cur_space, cur, *mid_space, plane_wave(dom, -n));
      next -= a * apply_creation(*mid_space, mid, *next_space, plane_wave(dom, n));
    }
    cur = std::move(next);
    cur_space = std::move(next_space);
  }
  StateVector st(space, std::move(cur));
  if (st.norm() == 0.0) fail(ErrorKind::numerical, "projected pair state has empty N sector");
  st.normalize();
  return st;
}

struct StrongSuperfluidReport {
  bool strongly_superfluid = false;
  double max_current = 0.0;
  std::size_t worst_site = 0;
  int worst_axis = 0;
};

/// First-moment test: after U[m v(x)] the momentum density vanishes at every
/// unmasked site and axis.
inline StrongSuperfluidReport is_strongly_superfluid(const StateVector& st, const VelocityField& vf, double mass,
                                                     double tol) {
  const auto& dom = st.space().domain();
  const auto ph = lgt_phases(dom, vf, mass, PhaseSpec::full(), true);
  const auto moved = apply_phases(st, ph.phase);
  StrongSuperfluidReport rep;
  for (int ax = 0; ax < dom.dim(); ++ax) {
    const auto g = momentum_density(moved, ax);
    for (std::size_t s = 0; s < dom.site_count(); ++s) {
      if (!std::isfinite(g[s]) || ph.masked[s]) continue;
      bool touches = false;
      for (int step : {-1, 1}) {
        const auto nb = dom.neighbor(s, ax, step);
        if (nb && ph.masked[*nb]) touches = true;
      }
      if (touches) continue;
      if (std::abs(g[s]) > rep.max_current) {
        rep.max_current = std::abs(g[s]);
        rep.worst_site = s;
        rep.worst_axis = ax;
      }
    }
  }
  rep.strongly_superfluid = rep.max_current <= tol;
  return rep;
}

// --- Gibbs ensembles ---------------------------------------------------------

struct LatticeHamiltonian {
  double mass = 1.0;
  double onsite = 0.0;  // U/2 sum_s n_s (n_s - 1)
};

/// Dense lattice Hamiltonian: discrete Laplacian kinetic term plus on-site pair interaction.
inline CMatrix lattice_hamiltonian(const FockSpace& sp, const LatticeHamiltonian& h) {
  const auto& dom = sp.domain();
  std::vector<OneBodyTerm> terms;
  for (int ax = 0; ax < dom.dim(); ++ax) {
    const double t = 1.0 / (2.0 * h.mass * dom.spacing(ax) * dom.spacing(ax));
    for (std::size_t s = 0; s < dom.site_count(); ++s) {
      for (int step : {-1, 1})
        if (const auto nb = dom.neighbor(s, ax, step)) terms.push_back({s, *nb, cplx(-t)});
      // Dirichlet edges keep the full diagonal 2t
      terms.push_back({s, s, cplx(2.0 * t)});
    }
  }
  const auto n = static_cast<Eigen::Index>(sp.dim());
  CMatrix H = CMatrix::Zero(n, n);
  for (Eigen::Index b = 0; b < n; ++b) {
    CVector e = CVector::Unit(n, b);
    H.col(b) = apply_one_body(sp, e, terms);
    if (h.onsite != 0.0) {
      double u = 0.0;
      for (auto k : sp.occupation(static_cast<std::size_t>(b))) u += 0.5 * h.onsite * k * (k - 1.0);
      H(b, b) += u;
    }
  }
  return H;
}

/// Thermal state e^{-beta H}/Z by dense diagonalization, truncated at relative weight `cutoff`.
inline Ensemble build_gibbs(FockSpacePtr space, const LatticeHamiltonian& h, double beta,
                            double cutoff = 1e-14, std::size_t max_dim = 4000) {
  require(space->dim() <= max_dim, ErrorKind::dimension_cap, "Gibbs construction limited to small spaces");
  require(beta > 0.0, ErrorKind::invalid_argument, "beta must be positive");
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(lattice_hamiltonian(*space, h));
  const auto& E = eig.eigenvalues();
  std::vector<double> w(static_cast<std::size_t>(E.size()));
  double z = 0.0;
  for (Eigen::Index k = 0; k < E.size(); ++k) z += (w[static_cast<std::size_t>(k)] = std::exp(-beta * (E[k] - E[0])));
  Ensemble ens;
  for (Eigen::Index k = 0; k < E.size(); ++k) {
    const double p = w[static_cast<std::size_t>(k)] / z;
    if (p < cutoff) continue;
    ens.push_back({p, StateVector(space, eig.eigenvectors().col(k))});
  }
  double tot = 0.0;
  for (const auto& ws : ens) tot += ws.weight;
  for (auto& ws : ens) ws.weight /= tot;
  return ens;
}

// --- transformation identity -------------------------------------------------

struct ResidualOptions {
  PhaseSpec phase = PhaseSpec::full();
  /// Smooth single-particle modes per axis: k consecutive plane waves starting at
  /// n = -floor((k-1)/2) on periodic axes, the lowest k Dirichlet sine modes on open axes.
  int modes_per_axis = 2;
};

/// Low-lying single-particle modes used as the smooth test subspace.
inline std::vector<CVector> smooth_modes(const Domain& dom, int per_axis) {
  auto axis_modes = [&](int ax) {
    std::vector<std::vector<cplx>> out;
    const std::size_t m = dom.sites(ax);
    if (dom.periodic()) {
      const int half = (per_axis - 1) / 2;
      for (int n = -half; n <= per_axis - 1 - half; ++n) {
        std::vector<cplx> v(m);
        for (std::size_t k = 0; k < m; ++k)
          v[k] = std::polar(1.0 / std::sqrt(double(m)), 2.0 * std::numbers::pi * n * double(k) / double(m));
        out.push_back(std::move(v));
      }
    } else {
      for (int n = 1; n <= per_axis; ++n) {
        std::vector<cplx> v(m);
        for (std::size_t k = 0; k < m; ++k)
          v[k] = std::sqrt(2.0 / (m + 1.0)) * std::sin(std::numbers::pi * n * (k + 1.0) / (m + 1.0));
        out.push_back(std::move(v));
      }
    }
    return out;
  };
  const auto m0 = axis_modes(0);
  std::vector<CVector> modes;
  if (dom.dim() == 1) {
    for (const auto& a : m0) modes.push_back(Eigen::Map<const CVector>(a.data(), static_cast<Eigen::Index>(a.size())));
    return modes;
  }
  const auto m1 = axis_modes(1);
  for (const auto& b : m1) {
    for (const auto& a : m0) {
      CVector v(static_cast<Eigen::Index>(dom.site_count()));
      for (std::size_t s = 0; s < dom.site_count(); ++s) {
        const auto n = dom.multi_index(s);
        v[static_cast<Eigen::Index>(s)] = a[n[0]] * b[n[1]];
      }
      modes.push_back(std::move(v));
    }
  }
  return modes;
}

namespace detail {
inline void occupation_patterns(std::size_t modes, std::size_t left, std::vector<std::size_t>& cur,
                                std::vector<std::vector<std::size_t>>& out) {
  if (cur.size() + 1 == modes) {
    cur.push_back(left);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (std::size_t k = 0; k <= left; ++k) {
    cur.push_back(k);
    occupation_patterns(modes, left - k, cur, out);
    cur.pop_back();
  }
}
}  // namespace detail

/// All ways to distribute `particles` bosons over `modes` modes.
inline std::vector<std::vector<std::size_t>> occupation_patterns(std::size_t modes, std::size_t particles) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  if (modes > 0) detail::occupation_patterns(modes, particles, cur, out);
  return out;
}

/// Norm of U P_i U^dag - P_i + sum_s d_i(f^T x)(x_s) n_s restricted to smooth states,
/// maximised over axes i. The lattice P_i uses the centred stencil of momentum_density.
inline double lgt_momentum_identity_residual(const VelocityField& vf, double mass, FockSpacePtr space,
                                             ResidualOptions opts = {}) {
  const auto& sp = *space;
  const auto& dom = sp.domain();
  const auto theta = lgt_phases(dom, vf, mass, opts.phase).phase;

  std::vector<CVector> basis;
  const auto modes = smooth_modes(dom, opts.modes_per_axis);
  for (const auto& occ : occupation_patterns(modes.size(), sp.particles()))
    basis.push_back(build_fragmented(space, modes, occ).amplitudes());

  double worst = 0.0;
  for (int i = 0; i < dom.dim(); ++i) {
    const double a = dom.spacing(i);
    const cplx c = 1.0 / cplx(0.0, 2.0 * a);
    std::vector<OneBodyTerm> terms;
    for (std::size_t s = 0; s < dom.site_count(); ++s) {
      if (const auto t = dom.neighbor(s, i, +1)) {
        // bond (s, t): P has c (psi_s^dag psi_t - psi_t^dag psi_s); U multiplies by e^{i(theta_s - theta_t)}
        const cplx ut = std::polar(1.0, theta[s] - theta[*t]);
        terms.push_back({s, *t, c * (ut - 1.0)});
        terms.push_back({*t, s, -c * (std::conj(ut) - 1.0)});
      }
      const Point x = dom.coord(s);
      const double grad = opts.phase.direction ? mass * eval_gradient_term(vf, i, *opts.phase.direction, x)
                                               : mass * eval_full_gradient(vf, i, x);
      terms.push_back({s, s, cplx(grad)});
    }
    const auto k = static_cast<Eigen::Index>(basis.size());
    CMatrix Y(static_cast<Eigen::Index>(sp.dim()), k);
    for (Eigen::Index col = 0; col < k; ++col) Y.col(col) = apply_one_body(sp, basis[static_cast<std::size_t>(col)], terms);
    const CMatrix gram = Y.adjoint() * Y;
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
    worst = std::max(worst, std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff())));
  }
  return worst;
}

}  // namespace locsf
