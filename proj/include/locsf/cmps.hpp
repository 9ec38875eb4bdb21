#pragma once

// Continuum matrix product states on the circle [-L/2, L/2).
//
//   |psi> = Tr[ B P exp( int dx Q(x) (x) 1 + R(x) (x) psi^dag(x) ) ] |VAC>
//
// B is the boundary ("twist") matrix; it is the identity for an ordinary periodic
// cMPS and picks up G(L/2)^{-1} when Q is gauged away.

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <unsupported/Eigen/KroneckerProduct>

#include "locsf/error.hpp"
#include "locsf/fock.hpp"
#include "locsf/velocity_field.hpp"

namespace locsf {

/// D x D matrix-valued function with its x-derivative.
struct MatrixFunction {
  std::function<CMatrix(double)> value;
  std::function<CMatrix(double)> derivative;

  CMatrix operator()(double x) const { return value(x); }

  static MatrixFunction zero(int D) {
    return {[D](double) { return CMatrix::Zero(D, D); }, [D](double) { return CMatrix::Zero(D, D); }};
  }

  static MatrixFunction constant(CMatrix c) {
    const auto D = c.rows();
    return {[c](double) { return c; }, [D](double) { return CMatrix::Zero(D, D); }};
  }

  /// sum_n C_n e^{2 pi i n x / L} with n = n0, n0+1, ...
  static MatrixFunction fourier(double L, int n0, std::vector<CMatrix> coeffs) {
    require(!coeffs.empty(), ErrorKind::invalid_argument, "Fourier series needs coefficients");
    auto eval = [L, n0, coeffs](double x, bool deriv) {
      CMatrix out = CMatrix::Zero(coeffs[0].rows(), coeffs[0].cols());
      for (std::size_t q = 0; q < coeffs.size(); ++q) {
        const double k = 2 * std::numbers::pi * (n0 + static_cast<int>(q)) / L;
        const cplx ph = std::polar(1.0, k * x);
        out += (deriv ? cplx(0, k) * ph : ph) * coeffs[q];
      }
      return out;
    };
    return {[eval](double x) { return eval(x, false); }, [eval](double x) { return eval(x, true); }};
  }

  /// e^{i theta(x)} M(x)
  static MatrixFunction phase_modulated(MatrixFunction base, std::function<double(double)> theta,
                                        std::function<double(double)> dtheta) {
    return {[=](double x) { return (std::polar(1.0, theta(x)) * base.value(x)).eval(); },
            [=](double x) {
              return (std::polar(1.0, theta(x)) * (base.derivative(x) + cplx(0, dtheta(x)) * base.value(x))).eval();
            }};
  }
};

enum class Gauge { general, q_zero };

inline std::string to_string(Gauge g) { return g == Gauge::q_zero ? "Q_zero" : "general"; }

struct CMPS {
  double L = 1.0;
  int D = 1;
  MatrixFunction Q;
  MatrixFunction R;
  CMatrix twist;
  Gauge gauge = Gauge::general;

  CMPS() = default;
  CMPS(double length, MatrixFunction q, MatrixFunction r, int dim, Gauge g = Gauge::general)
      : L(length), D(dim), Q(std::move(q)), R(std::move(r)), twist(CMatrix::Identity(dim, dim)), gauge(g) {
    require(L > 0.0 && D >= 1, ErrorKind::invalid_argument, "cMPS needs L > 0 and D >= 1");
  }

  double left() const { return -0.5 * L; }
  double right() const { return 0.5 * L; }
};

/// Random smooth cMPS with `modes` Fourier harmonics per matrix; real when `real`.
inline CMPS random_cmps(int D, double L, std::uint64_t seed, bool real = true, int modes = 2, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  auto draw = [&](double amp) {
    std::vector<CMatrix> c(2 * modes + 1, CMatrix::Zero(D, D));
    for (int n = 0; n <= modes; ++n) {
      CMatrix m(D, D);
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) m(a, b) = cplx(g(rng), real ? 0.0 : g(rng)) * amp / (1.0 + n);
      c[modes + n] = m;
      if (n > 0) {
        if (real) {
          c[modes - n] = m.conjugate();
        } else {
          CMatrix w(D, D);
          for (int a = 0; a < D; ++a)
            for (int b = 0; b < D; ++b) w(a, b) = cplx(g(rng), g(rng)) * amp / (1.0 + n);
          c[modes - n] = w;
        }
      } else if (real) {
        c[modes] = m.real().cast<cplx>();
      }
    }
    return MatrixFunction::fourier(L, -modes, std::move(c));
  };
  auto Q = draw(0.5 * scale / std::sqrt(double(D)));
  auto R = draw(scale / std::sqrt(double(D)));
  return CMPS(L, std::move(Q), std::move(R), D);
}

// --- transfer matrices -------------------------------------------------------

/// Generator E(z) = Q (x) 1 + 1 (x) conj(Q) + R (x) conj(R) of the transfer matrix.
inline CMatrix transfer_generator(const CMPS& s, double z) {
  const CMatrix R = s.R(z);
  const CMatrix I = CMatrix::Identity(s.D, s.D);
  CMatrix E = Eigen::kroneckerProduct(R, R.conjugate()).eval();
  if (s.gauge != Gauge::q_zero) {
    const CMatrix Q = s.Q(z);
    E += Eigen::kroneckerProduct(Q, I).eval() + Eigen::kroneckerProduct(I, Q.conjugate()).eval();
  }
  return E;
}

struct TransferKernel {
  double y = 0.0;
  double x = 0.0;
  CMatrix T;
  std::size_t steps = 0;
};

/// Path-ordered exponential T(y, x) with dT/dz = T E(z), T(y, y) = 1.
///
/// Classical RK4 with step doubling; the local error per step is held below
/// tol * max(1, |T|) * h / (x - y) so the accumulated error stays near tol.
inline TransferKernel transfer_matrix(const CMPS& s, double y, double x, double tol = 1e-11) {
  require(y <= x, ErrorKind::invalid_argument, "transfer interval must satisfy y <= x");
  require(tol > 0.0, ErrorKind::invalid_argument, "tolerance must be positive");
  const int n = s.D * s.D;
  TransferKernel out{y, x, CMatrix::Identity(n, n), 0};
  const double len = x - y;
  if (len == 0.0) return out;
  auto rk4 = [&](const CMatrix& T, double z, double h) {
    const CMatrix e0 = transfer_generator(s, z);
    const CMatrix em = transfer_generator(s, z + 0.5 * h);
    const CMatrix e1 = transfer_generator(s, z + h);
    const CMatrix k1 = T * e0;
    const CMatrix k2 = (T + 0.5 * h * k1) * em;
    const CMatrix k3 = (T + 0.5 * h * k2) * em;
    const CMatrix k4 = (T + h * k3) * e1;
    return (T + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).eval();
  };
  double z = y;
  double h = len / 16.0;
  const double hmin = 1e-13 * std::max(1.0, len);
  while (z < x) {
    if (z + h > x) h = x - z;
    const CMatrix full = rk4(out.T, z, h);
    const CMatrix half = rk4(rk4(out.T, z, 0.5 * h), z + 0.5 * h, 0.5 * h);
    const double err = (half - full).cwiseAbs().maxCoeff() / 15.0;
    const double allowed = tol * std::max(1.0, half.cwiseAbs().maxCoeff()) * h / len;
    if (err <= allowed) {
      out.T = half + (half - full) / 15.0;
      z += h;
      ++out.steps;
      h *= err > 0 ? std::min(2.0, 0.9 * std::pow(allowed / err, 0.2)) : 2.0;
    } else {
      h *= std::max(0.1, 0.9 * std::pow(allowed / err, 0.2));
      if (h < hmin) fail(ErrorKind::numerical, "transfer matrix integration: step size underflow");
    }
  }
  return out;
}

// --- expectation values ------------------------------------------------------

struct ObservableOptions {
  double tol = 1e-11;
};

namespace detail {
struct Split {
  CMatrix left;   // (B (x) conj(B)) T(-L/2, x)
  CMatrix right;  // T(x, L/2)
  cplx norm;
};

inline Split split_at(const CMPS& s, double x, double tol) {
  require(x >= s.left() && x <= s.right(), ErrorKind::invalid_argument, "point outside the cMPS circle");
  const CMatrix BB = Eigen::kroneckerProduct(s.twist, s.twist.conjugate()).eval();
  Split sp;
  sp.left = BB * transfer_matrix(s, s.left(), x, tol).T;
  sp.right = transfer_matrix(s, x, s.right(), tol).T;
  sp.norm = (sp.left * sp.right).trace();
  if (!(std::abs(sp.norm) > 0.0) || !std::isfinite(std::abs(sp.norm)))
    fail(ErrorKind::numerical, "cMPS norm vanishes or overflows");
  return sp;
}

inline cplx insert(const Split& sp, const CMatrix& op) { return (sp.left * op * sp.right).trace() / sp.norm; }

inline double checked_real(cplx v, const char* what) {
  if (std::abs(v.imag()) > 1e-10 * std::max(1.0, std::abs(v.real())))
    fail(ErrorKind::numerical, std::string(what) + " has a non-negligible imaginary part");
  return v.real();
}
}  // namespace detail

/// Tr[(B (x) B^*) E(-L/2, L/2)]
inline cplx cmps_norm(const CMPS& s, double tol = 1e-11) {
  const CMatrix BB = Eigen::kroneckerProduct(s.twist, s.twist.conjugate()).eval();
  return (BB * transfer_matrix(s, s.left(), s.right(), tol).T).trace();
}

/// <psi^dag psi(x)> with the trace split at x.
inline cplx density_complex(const CMPS& s, double x, ObservableOptions o = {}) {
  const auto sp = detail::split_at(s, x, o.tol);
  const CMatrix R = s.R(x);
  return detail::insert(sp, Eigen::kroneckerProduct(R, R.conjugate()).eval());
}

inline double density(const CMPS& s, double x, ObservableOptions o = {}) {
  return detail::checked_real(density_complex(s, x, o), "density");
}

/// (1/2i)(d/dy - d/dx) rho1(x, y) at y = x, i.e. Im Tr[...(R' + [Q, R]) (x) R^*...] / norm.
inline double intrinsic_current(const CMPS& s, double x, ObservableOptions o = {}) {
  const auto sp = detail::split_at(s, x, o.tol);
  const CMatrix R = s.R(x);
  CMatrix K = s.R.derivative(x);
  if (s.gauge != Gauge::q_zero) {
    const CMatrix Q = s.Q(x);
    K += Q * R - R * Q;
  }
  const cplx a = detail::insert(sp, Eigen::kroneckerProduct(K, R.conjugate()).eval());
  const cplx b = detail::insert(sp, Eigen::kroneckerProduct(R, K.conjugate()).eval());
  return ((a - b) / cplx(0, 2)).real();
}

/// rho1(x, y) = <psi^dag(x) psi(y)> for x <= y.
inline cplx one_body_density(const CMPS& s, double x, double y, ObservableOptions o = {}) {
  require(x <= y, ErrorKind::invalid_argument, "one_body_density expects x <= y");
  const CMatrix BB = Eigen::kroneckerProduct(s.twist, s.twist.conjugate()).eval();
  const CMatrix I = CMatrix::Identity(s.D, s.D);
  const CMatrix Tl = BB * transfer_matrix(s, s.left(), x, o.tol).T;
  const CMatrix Tm = transfer_matrix(s, x, y, o.tol).T;
  const CMatrix Tr = transfer_matrix(s, y, s.right(), o.tol).T;
  const cplx norm = (Tl * Tm * Tr).trace();
  const CMatrix bra = Eigen::kroneckerProduct(I, s.R(x).conjugate()).eval();
  const CMatrix ket = Eigen::kroneckerProduct(s.R(y), I).eval();
  return (Tl * bra * Tm * ket * Tr).trace() / norm;
}

struct LgtOptions {
  ObservableOptions obs;
  double intrinsic_tol = 1e-9;
};

/// <g(x)> in U[m v(x)]|psi> = m (x v' + v) rho(x), valid when the state carries no current.
inline double momentum_density_lgt(const CMPS& s, const VelocityField& vf, double mass, double x,
                                   LgtOptions o = {}) {
  require(vf.dim() == 1, ErrorKind::invalid_argument, "cMPS fields are one-dimensional");
  require(s.gauge == Gauge::q_zero, ErrorKind::invalid_argument, "momentum_density_lgt expects the Q = 0 gauge");
  const Point p{x, 0.0};
  const double grad = mass * eval_gradient_term(vf, 0, 0, p);
  const double j = intrinsic_current(s, x, o.obs);
  if (std::abs(j) > o.intrinsic_tol)
    fail(ErrorKind::numerical, "state carries intrinsic momentum " + std::to_string(j) + " at x = " + std::to_string(x));
  if (grad == 0.0) return 0.0;
  return grad * density(s, x, o.obs);
}

struct NormalFluid1d {
  double x = 0.0;
  double rho = 0.0;  // <psi^dag psi(x)>
  double rho_n = 0.0;
};

/// rho_n(x) = m rho + (m x / v) v' rho, cross-checked against momentum_density_lgt / v.
inline NormalFluid1d normal_fluid_1d(const CMPS& s, const VelocityField& vf, double mass, double x,
                                     LgtOptions o = {}) {
  const Point p{x, 0.0};
  const double v = vf.eval(p)[0];
  if (v == 0.0) fail(ErrorKind::singular_point, "normal_fluid_1d: v(x) = 0");
  const double rho = density(s, x, o.obs);
  const double closed = mass * rho + mass * x * vf.jacobian(p)[0][0] * rho / v;
  const double via_current = momentum_density_lgt(s, vf, mass, x, o) / v;
  if (std::abs(closed - via_current) > 1e-8 * std::max(1.0, std::abs(closed)))
    fail(ErrorKind::numerical, "normal fluid closed form and momentum route disagree");
  return {x, rho, closed};
}

// --- gauge fixing -----------------------------------------------------------

struct GaugeOptions {
  std::size_t nodes = 4096;
  double condition_cap = 1e10;
};

/// Gauge-equivalent cMPS with Q = 0: R -> G^{-1} R G, G' = -Q G, G(-L/2) = 1.
inline CMPS gauge_to_zero_q(const CMPS& s, GaugeOptions o = {}) {
  if (s.gauge == Gauge::q_zero) return s;
  const int D = s.D;
  const std::size_t n = std::max<std::size_t>(o.nodes, 16);
  const double h = s.L / double(n);
  std::vector<CMatrix> G(n + 1), Gi(n + 1), dG(n + 1);
  G[0] = CMatrix::Identity(D, D);
  auto rhs = [&](const CMatrix& g, double z) { return (-s.Q(z) * g).eval(); };
  for (std::size_t k = 0; k < n; ++k) {
    // eight RK4 substeps per node interval
    CMatrix g = G[k];
    const double z0 = s.left() + double(k) * h, hs = h / 8.0;
    for (int q = 0; q < 8; ++q) {
      const double z = z0 + q * hs;
      const CMatrix k1 = rhs(g, z), k2 = rhs(g + 0.5 * hs * k1, z + 0.5 * hs);
      const CMatrix k3 = rhs(g + 0.5 * hs * k2, z + 0.5 * hs), k4 = rhs(g + hs * k3, z + hs);
      g += (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    G[k + 1] = g;
  }
  for (std::size_t k = 0; k <= n; ++k) {
    Eigen::JacobiSVD<CMatrix> svd(G[k]);
    const auto& sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > 0.0) || sv(0) / sv(sv.size() - 1) > o.condition_cap)
      fail(ErrorKind::numerical, "gauge transformation is ill-conditioned");
    Gi[k] = G[k].inverse();
    dG[k] = -s.Q(s.left() + double(k) * h) * G[k];
  }
  struct Table {
    double x0, h;
    std::size_t n;
    std::vector<CMatrix> G, Gi, dG;
  };
  auto tab = std::make_shared<Table>(Table{s.left(), h, n, std::move(G), std::move(Gi), std::move(dG)});
  // cubic Hermite in G using the exact derivative at the nodes
  auto G_at = [tab](double x) {
    double u = (x - tab->x0) / tab->h;
    u = std::clamp(u, 0.0, double(tab->n));
    std::size_t k = std::min(static_cast<std::size_t>(u), tab->n - 1);
    const double t = u - double(k);
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return (h00 * tab->G[k] + h10 * tab->h * tab->dG[k] + h01 * tab->G[k + 1] + h11 * tab->h * tab->dG[k + 1]).eval();
  };
  const MatrixFunction Q = s.Q, R = s.R;
  MatrixFunction Rt{[=](double x) {
                      const CMatrix g = G_at(x);
                      return (g.inverse() * R(x) * g).eval();
                    },
                    [=](double x) {
                      const CMatrix g = G_at(x), gi = g.inverse();
                      const CMatrix q = Q(x), r = R(x);
                      return (gi * (R.derivative(x) + q * r - r * q) * g).eval();
                    }};
  CMPS out(s.L, MatrixFunction::zero(D), std::move(Rt), D, Gauge::q_zero);
  out.twist = tab->Gi[n] * s.twist;
  return out;
}

/// Multiplies R by e^{i theta(x)} with theta = m v(x) x, the image of the state under U[m v(x)].
/// Inside the excluded region of a singular field the phase is left at zero.
inline CMPS apply_lgt(const CMPS& s, const VelocityField& vf, double mass) {
  auto theta = [vf, mass](double x) { return vf.singular({x, 0.0}) ? 0.0 : eval_boost_phase(vf, mass, {x, 0.0}); };
  auto dtheta = [vf, mass](double x) {
    return vf.singular({x, 0.0}) ? 0.0 : mass * eval_gradient_term(vf, 0, 0, {x, 0.0});
  };
  CMPS out = s;
  out.R = MatrixFunction::phase_modulated(s.R, theta, dtheta);
  return out;
}

// --- file format -------------------------------------------------------------
//
// First line: JSON header {"L", "D", "gauge", "grid", "twist"}; then, for each of
// the `grid` samples x_k = -L/2 + k L / grid, the Q block and the R block; then the
// twist block. Blocks are D*D column-major (re, im) f64 pairs. Samples are
// interpolated trigonometrically.

inline void save_cmps(const std::string& path, const CMPS& s, std::size_t grid) {
  require(grid >= 2, ErrorKind::invalid_argument, "cMPS file needs at least two samples");
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  nlohmann::json h{{"L", s.L}, {"D", s.D}, {"gauge", to_string(s.gauge)}, {"grid", grid}, {"twist", true}};
  os << h.dump() << '\n';
  auto block = [&](const CMatrix& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const double re = m(r, c).real(), im = m(r, c).imag();
        os.write(reinterpret_cast<const char*>(&re), sizeof re);
        os.write(reinterpret_cast<const char*>(&im), sizeof im);
      }
  };
  for (std::size_t k = 0; k < grid; ++k) {
    const double x = s.left() + s.L * double(k) / double(grid);
    block(s.Q(x));
    block(s.R(x));
  }
  block(s.twist);
  if (!os) fail(ErrorKind::io, "write failed for '" + path + "'");
}

/// Trigonometric interpolant through samples at x_k = x0 + k L / n.
inline MatrixFunction trig_interpolant(double L, double x0, const std::vector<CMatrix>& samples) {
  const int n = static_cast<int>(samples.size());
  const int lo = -(n / 2), hi = (n - 1) / 2;
  std::vector<CMatrix> c;
  for (int f = lo; f <= hi; ++f) {
    CMatrix acc = CMatrix::Zero(samples[0].rows(), samples[0].cols());
    for (int k = 0; k < n; ++k) acc += std::polar(1.0, -2 * std::numbers::pi * f * k / n) * samples[k];
    // shift the phase reference from x0 to 0
    c.push_back(acc * std::polar(1.0, -2 * std::numbers::pi * f * x0 / L) / double(n));
  }
  if (n % 2 == 0) {
    // split the Nyquist term evenly between +-n/2 so real samples stay real between nodes
    c.front() *= 0.5;
    c.push_back(c.front() * std::polar(1.0, 0.0));
  }
  return MatrixFunction::fourier(L, lo, std::move(c));
}

inline CMPS load_cmps(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::io, "cannot open '" + path + "'");
  std::string line;
  std::getline(is, line);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const std::exception& e) {
    fail(ErrorKind::io, std::string("bad cMPS header: ") + e.what());
  }
  for (const char* key : {"L", "D", "gauge", "grid"})
    if (!h.contains(key)) fail(ErrorKind::io, std::string("cMPS header lacks '") + key + "'");
  const double L = h["L"].get<double>();
  const int D = h["D"].get<int>();
  const auto grid = h["grid"].get<std::size_t>();
  const std::string gauge = h["gauge"].get<std::string>();
  if (gauge != "general" && gauge != "Q_zero") fail(ErrorKind::io, "unknown gauge '" + gauge + "'");
  if (D < 1 || grid < 2 || !(L > 0.0)) fail(ErrorKind::io, "invalid cMPS header values");
  auto block = [&] {
    CMatrix m(D, D);
    for (int c = 0; c < D; ++c)
      for (int r = 0; r < D; ++r) {
        double re = 0, im = 0;
        is.read(reinterpret_cast<char*>(&re), sizeof re);
        is.read(reinterpret_cast<char*>(&im), sizeof im);
        m(r, c) = cplx(re, im);
      }
    if (!is) fail(ErrorKind::io, "truncated cMPS file");
    return m;
  };
  std::vector<CMatrix> qs, rs;
  for (std::size_t k = 0; k < grid; ++k) {
    qs.push_back(block());
    rs.push_back(block());
  }
  const bool has_twist = h.value("twist", false);
  CMPS out(L, trig_interpolant(L, -0.5 * L, qs), trig_interpolant(L, -0.5 * L, rs), D,
           gauge == "Q_zero" ? Gauge::q_zero : Gauge::general);
  if (has_twist) out.twist = block();
  return out;
}

}  // namespace locsf
