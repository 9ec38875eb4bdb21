#pragma once

// Path-integral Monte Carlo for N bosons on a periodic box with the primitive
// action, and the winding estimator of the local normal density.
//
// Worldlines live in covering-space coordinates. Path l has beads x_l[0..P-1];
// its last bead links to bead 0 of path succ(l) translated by image_l * L.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "locsf/domain.hpp"
#include "locsf/error.hpp"
#include "locsf/velocity_field.hpp"

namespace locsf {

enum class PairPotential { none, gaussian_repulsive, delta_regularized };

inline std::string to_string(PairPotential p) {
  switch (p) {
    case PairPotential::none: return "none";
    case PairPotential::gaussian_repulsive: return "gaussian_repulsive";
    case PairPotential::delta_regularized: return "delta_regularized";
  }
  return "?";
}

inline PairPotential pair_potential_from_string(const std::string& s) {
  if (s == "none") return PairPotential::none;
  if (s == "gaussian_repulsive") return PairPotential::gaussian_repulsive;
  if (s == "delta_regularized") return PairPotential::delta_regularized;
  fail(ErrorKind::config, "unknown pair potential '" + s + "'");
}

struct PIMCParams {
  Domain domain = Domain::ring(4.0, 16);
  std::size_t N = 1;
  double mass = 1.0;
  double beta = 1.0;
  std::size_t P = 32;
  PairPotential potential = PairPotential::none;
  double g = 0.0;
  double width = 0.5;
  std::size_t staging_length = 8;  // links regrown per staging move
  std::size_t swap_length = 16;    // links regrown per reconnection move
  std::size_t cycle_length = 2;    // 0 or 1 disables reconnections (distinguishable paths)
  std::size_t sweeps = 10000;
  std::size_t thermalization = 1000;
  std::uint64_t seed = 1;
  std::size_t bins = 16;     // per axis
  std::size_t blocks = 64;   // target number of blocks per chain
  double translate_step = 0.5;

  double tau() const { return beta / double(P); }

  void validate() const {
    require(domain.periodic(), ErrorKind::config, "pimc needs a periodic domain");
    require(N >= 1, ErrorKind::config, "pimc needs at least one particle");
    require(mass > 0.0 && beta > 0.0, ErrorKind::config, "mass and beta must be positive");
    require(P >= 8, ErrorKind::config, "pimc needs P >= 8 time slices");
    require(staging_length >= 2 && staging_length < P, ErrorKind::config, "staging length must lie in [2, P)");
    require(swap_length >= 1 && swap_length < P, ErrorKind::config, "swap length must lie in [1, P)");
    require(cycle_length <= 2, ErrorKind::config, "reconnection moves swap at most two paths");
    require(bins >= 1 && blocks >= 2, ErrorKind::config, "need bins >= 1 and blocks >= 2");
    require(potential == PairPotential::none || width > 0.0, ErrorKind::config, "potential width must be positive");
  }
};

struct Worldlines {
  int dim = 1;
  std::size_t N = 0;
  std::size_t P = 0;
  std::array<double, 2> L{1.0, 1.0};
  Point origin{0.0, 0.0};
  std::vector<Point> x;  // x[l * P + t]
  std::vector<std::size_t> succ;
  std::vector<std::array<long, 2>> image;

  Point& at(std::size_t l, std::size_t t) { return x[l * P + t]; }
  const Point& at(std::size_t l, std::size_t t) const { return x[l * P + t]; }

  /// Bead t in the frame of path l; t in [P, 2P) continues into succ(l).
  Point bead(std::size_t l, std::size_t t) const {
    if (t < P) return at(l, t);
    Point p = at(succ[l], t - P);
    for (int a = 0; a < dim; ++a) p[a] += double(image[l][a]) * L[a];
    return p;
  }

  void set_bead(std::size_t l, std::size_t t, Point p) {
    if (t < P) {
      at(l, t) = p;
      return;
    }
    for (int a = 0; a < dim; ++a) p[a] -= double(image[l][a]) * L[a];
    at(succ[l], t - P) = p;
  }

  /// Covering-space displacement from bead 0 of l to bead 0 of succ(l) along the path.
  Point displacement(std::size_t l) const {
    const Point end = bead(l, P);
    const Point& start = at(l, 0);
    return {end[0] - start[0], dim > 1 ? end[1] - start[1] : 0.0};
  }

  Point wrapped(const Point& p) const {
    Point q = p;
    for (int a = 0; a < dim; ++a) q[a] = origin[a] + L[a] * (((p[a] - origin[a]) / L[a]) - std::floor((p[a] - origin[a]) / L[a]));
    return q;
  }

  std::size_t predecessor(std::size_t l) const {
    return static_cast<std::size_t>(std::find(succ.begin(), succ.end(), l) - succ.begin());
  }

  /// Shift paths by whole periods so bead 0 lies in the box; links are unchanged.
  void recentre() {
    for (std::size_t l = 0; l < N; ++l) {
      std::array<long, 2> n{0, 0};
      for (int a = 0; a < dim; ++a) n[a] = -static_cast<long>(std::floor((at(l, 0)[a] - origin[a]) / L[a]));
      if (n[0] == 0 && n[1] == 0) continue;
      const std::size_t p = predecessor(l);
      for (std::size_t t = 0; t < P; ++t)
        for (int a = 0; a < dim; ++a) at(l, t)[a] += double(n[a]) * L[a];
      for (int a = 0; a < dim; ++a) {
        image[l][a] += n[a];
        image[p][a] -= n[a];
      }
    }
  }
};

/// Bijection and finiteness check.
inline bool worldlines_valid(const Worldlines& w) {
  std::vector<bool> hit(w.N, false);
  for (auto s : w.succ) {
    if (s >= w.N || hit[s]) return false;
    hit[s] = true;
  }
  for (const auto& p : w.x)
    if (!std::isfinite(p[0]) || !std::isfinite(p[1])) return false;
  return true;
}

inline Worldlines empty_worldlines(const Domain& dom, std::size_t N, std::size_t P) {
  Worldlines w;
  w.dim = dom.dim();
  w.N = N;
  w.P = P;
  w.L = {dom.length(0), dom.dim() > 1 ? dom.length(1) : 1.0};
  w.origin = dom.origin();
  w.x.assign(N * P, Point{0.0, 0.0});
  w.succ.resize(N);
  for (std::size_t l = 0; l < N; ++l) w.succ[l] = l;
  w.image.assign(N, {0, 0});
  return w;
}

/// Constant worldlines at uniform random positions, identity permutation.
inline Worldlines init_worldlines(const PIMCParams& p, std::mt19937_64& rng) {
  auto w = empty_worldlines(p.domain, p.N, p.P);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t l = 0; l < p.N; ++l) {
    Point q{w.origin[0] + w.L[0] * u(rng), w.dim > 1 ? w.origin[1] + w.L[1] * u(rng) : 0.0};
    for (std::size_t t = 0; t < p.P; ++t) w.at(l, t) = q;
  }
  return w;
}

inline Worldlines init_worldlines(const PIMCParams& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return init_worldlines(p, rng);
}

// --- action pieces -----------------------------------------------------------

struct ActionModel {
  int dim = 1;
  std::array<double, 2> L{1.0, 1.0};
  double mass = 1.0;
  double tau = 0.1;
  PairPotential potential = PairPotential::none;
  double g = 0.0;
  double width = 0.5;

  static ActionModel from(const PIMCParams& p) {
    return {p.domain.dim(), {p.domain.length(0), p.domain.dim() > 1 ? p.domain.length(1) : 1.0}, p.mass, p.tau(),
            p.potential, p.g, p.width};
  }

  double pair(const Point& a, const Point& b) const {
    if (potential == PairPotential::none) return 0.0;
    double r2 = 0.0;
    for (int k = 0; k < dim; ++k) {
      double d = a[k] - b[k];
      d -= L[k] * std::round(d / L[k]);
      r2 += d * d;
    }
    const double e = std::exp(-0.5 * r2 / (width * width));
    if (potential == PairPotential::gaussian_repulsive) return g * e;
    return g * e / std::pow(std::sqrt(2 * std::numbers::pi) * width, dim);
  }

  /// V on slice t.
  double slice_potential(const Worldlines& w, std::size_t t) const {
    if (potential == PairPotential::none) return 0.0;
    double v = 0.0;
    for (std::size_t a = 0; a < w.N; ++a)
      for (std::size_t b = a + 1; b < w.N; ++b) v += pair(w.at(a, t), w.at(b, t));
    return v;
  }

  /// m |d|^2 / (2 tau) summed over every link, plus tau * sum_t V_t.
  double action(const Worldlines& w) const {
    double s = 0.0;
    for (std::size_t l = 0; l < w.N; ++l)
      for (std::size_t t = 0; t < w.P; ++t) {
        const Point a = w.bead(l, t), b = w.bead(l, t + 1);
        for (int k = 0; k < dim; ++k) s += mass * (b[k] - a[k]) * (b[k] - a[k]) / (2 * tau);
      }
    for (std::size_t t = 0; t < w.P; ++t) s += tau * slice_potential(w, t);
    return s;
  }
};

namespace detail {
/// log sum_n exp(-m (d + n L)^2 / (2 s)) with the individual log terms, truncated below 1e-14.
struct ImageSum {
  double log_total = 0.0;
  std::vector<long> n;
  std::vector<double> log_term;
};

inline ImageSum image_sum(double d, double L, double m, double s) {
  ImageSum out;
  const long n0 = std::lround(-d / L);
  auto lt = [&](long n) { return -m * (d + double(n) * L) * (d + double(n) * L) / (2 * s); };
  const double top = lt(n0);
  out.n.push_back(n0);
  out.log_term.push_back(top);
  for (int dir : {-1, 1})
    for (long n = n0 + dir;; n += dir) {
      const double v = lt(n);
      if (v - top < std::log(1e-14)) break;
      out.n.push_back(n);
      out.log_term.push_back(v);
    }
  double acc = 0.0;
  for (double v : out.log_term) acc += std::exp(v - top);
  out.log_total = top + std::log(acc);
  return out;
}

inline long sample_image(const ImageSum& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double r = u(rng);
  for (std::size_t q = 0; q < s.n.size(); ++q) {
    r -= std::exp(s.log_term[q] - s.log_total);
    if (r <= 0.0) return s.n[q];
  }
  return s.n.back();
}

inline double log_sum_exp(const std::vector<double>& v) {
  const double top = *std::max_element(v.begin(), v.end());
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - top);
  return top + std::log(acc);
}
}  // namespace detail

struct MoveStats {
  std::size_t staging_tried = 0, staging_accepted = 0;
  std::size_t swap_tried = 0, swap_accepted = 0, swap_exchanges = 0;
  std::size_t translate_tried = 0, translate_accepted = 0;

  void add(const MoveStats& o) {
    staging_tried += o.staging_tried;
    staging_accepted += o.staging_accepted;
    swap_tried += o.swap_tried;
    swap_accepted += o.swap_accepted;
    swap_exchanges += o.swap_exchanges;
    translate_tried += o.translate_tried;
    translate_accepted += o.translate_accepted;
  }
  static double rate(std::size_t a, std::size_t t) { return t ? double(a) / double(t) : 0.0; }
};

/// Reconnection proposal: path a regrows its last k links towards bead 0 of succ(c), and
/// when c != a path b = c regrows towards a's old target.
struct SwapChoice {
  std::size_t a = 0;
  std::size_t c = 0;
  std::array<long, 2> image_a{0, 0};
  std::array<long, 2> image_b{0, 0};
  double log_accept_kinetic = 0.0;  // log(Z_b / Z'_b), zero for c == a
};

namespace detail {
inline std::vector<ImageSum> axis_sums(const Worldlines& w, const ActionModel& m, const Point& from,
                                       const Point& target, double s) {
  std::vector<ImageSum> out;
  for (int k = 0; k < w.dim; ++k) out.push_back(image_sum(target[k] - from[k], w.L[k], m.mass, s));
  return out;
}

inline double total_log(const std::vector<ImageSum>& v) {
  double s = 0.0;
  for (const auto& x : v) s += x.log_total;
  return s;
}
}  // namespace detail

/// log of the heat-bath normalizer sum_c sum_n K_k(A, x_succ(c)[0] + n L) for path a.
inline std::vector<double> swap_candidate_logs(const Worldlines& w, const ActionModel& m, std::size_t a, std::size_t k) {
  const Point A = w.at(a, w.P - k);
  std::vector<double> logs(w.N);
  for (std::size_t c = 0; c < w.N; ++c)
    logs[c] = detail::total_log(detail::axis_sums(w, m, A, w.at(w.succ[c], 0), double(k) * m.tau));
  return logs;
}

/// log(Z_b / Z'_b) for exchanging the tails of a and b.
inline double swap_kinetic_log_ratio(const Worldlines& w, const ActionModel& m, std::size_t a, std::size_t b,
                                     std::size_t k) {
  const Point B = w.at(b, w.P - k);
  const double s = double(k) * m.tau;
  return detail::total_log(detail::axis_sums(w, m, B, w.at(w.succ[a], 0), s)) -
         detail::total_log(detail::axis_sums(w, m, B, w.at(w.succ[b], 0), s));
}

/// Lévy construction: k-1 interior points of a free path from `from` to `to` over k links.
inline void stage_segment(const Point& from, const Point& to, std::size_t k, double tau, double mass, int dim,
                          std::mt19937_64& rng, std::vector<Point>& out) {
  std::normal_distribution<double> g;
  out.resize(k > 0 ? k - 1 : 0);
  Point prev = from;
  for (std::size_t q = 1; q < k; ++q) {
    const double rest = double(k - q);
    const double var = tau * rest / (mass * (rest + 1.0));
    Point p{0.0, 0.0};
    for (int a = 0; a < dim; ++a) p[a] = (rest * prev[a] + to[a]) / (rest + 1.0) + std::sqrt(var) * g(rng);
    out[q - 1] = p;
    prev = p;
  }
}

class PimcChain {
 public:
  PimcChain(const PIMCParams& p, std::mt19937_64 rng) : p_(p), m_(ActionModel::from(p)), rng_(std::move(rng)) {
    p_.validate();
    w_ = init_worldlines(p_, rng_);
  }

  PimcChain(const PIMCParams& p, Worldlines w, std::mt19937_64 rng)
      : p_(p), m_(ActionModel::from(p)), rng_(std::move(rng)), w_(std::move(w)) {
    p_.validate();
  }

  const Worldlines& config() const noexcept { return w_; }
  const MoveStats& stats() const noexcept { return stats_; }
  std::mt19937_64& rng() noexcept { return rng_; }

  void sweep() {
    const std::size_t stagings = std::max<std::size_t>(1, w_.N * w_.P / p_.staging_length);
    for (std::size_t q = 0; q < stagings; ++q) staging_move();
    if (p_.cycle_length >= 2)
      for (std::size_t q = 0; q < w_.N; ++q) swap_move();
    if (p_.potential != PairPotential::none)
      for (std::size_t q = 0; q < w_.N; ++q) translate_move();
    rotate_time();
    w_.recentre();
  }

  void staging_move() {
    std::uniform_int_distribution<std::size_t> pick_l(0, w_.N - 1), pick_t(0, w_.P - 1);
    const std::size_t l = pick_l(rng_), t0 = pick_t(rng_), k = p_.staging_length;
    ++stats_.staging_tried;
    const Point from = w_.bead(l, t0), to = w_.bead(l, t0 + k);
    stage_segment(from, to, k, m_.tau, m_.mass, w_.dim, rng_, buf_);
    if (m_.potential == PairPotential::none) {
      for (std::size_t q = 1; q < k; ++q) w_.set_bead(l, t0 + q, buf_[q - 1]);
      ++stats_.staging_accepted;
      return;
    }
    const Worldlines old = w_;
    double dv = 0.0;
    for (std::size_t q = 1; q < k; ++q) {
      const std::size_t t = (t0 + q) % w_.P;
      dv -= m_.slice_potential(w_, t);
      w_.set_bead(l, t0 + q, buf_[q - 1]);
      dv += m_.slice_potential(w_, t);
    }
    if (!accept(-m_.tau * dv)) w_ = old;
    else ++stats_.staging_accepted;
  }

  /// Draws a reconnection choice with heat-bath weights; exposed for detailed-balance checks.
  SwapChoice propose_swap(std::size_t a) {
    const std::size_t k = p_.swap_length;
    const auto logs = swap_candidate_logs(w_, m_, a, k);
    const double z = detail::log_sum_exp(logs);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double r = u(rng_);
    std::size_t c = w_.N - 1;
    for (std::size_t q = 0; q < w_.N; ++q) {
      r -= std::exp(logs[q] - z);
      if (r <= 0.0) {
        c = q;
        break;
      }
    }
    SwapChoice ch{a, c, {0, 0}, {0, 0}, 0.0};
    const double s = double(k) * m_.tau;
    const auto sa = detail::axis_sums(w_, m_, w_.at(a, w_.P - k), w_.at(w_.succ[c], 0), s);
    for (int d = 0; d < w_.dim; ++d) ch.image_a[d] = detail::sample_image(sa[d], rng_);
    if (c != a) {
      const auto sb = detail::axis_sums(w_, m_, w_.at(c, w_.P - k), w_.at(w_.succ[a], 0), s);
      for (int d = 0; d < w_.dim; ++d) ch.image_b[d] = detail::sample_image(sb[d], rng_);
      ch.log_accept_kinetic = swap_kinetic_log_ratio(w_, m_, a, c, k);
    }
    return ch;
  }

  /// Applies the reconnection and regrows the tails; returns the proposed configuration.
  Worldlines apply_swap(const SwapChoice& ch) {
    const std::size_t k = p_.swap_length, t0 = w_.P - k;
    Worldlines nw = w_;
    const std::size_t a = ch.a, b = ch.c;
    auto regrow = [&](std::size_t l) {
      const Point from = nw.at(l, t0), to = nw.bead(l, nw.P);
      stage_segment(from, to, k, m_.tau, m_.mass, nw.dim, rng_, buf_);
      for (std::size_t q = 1; q < k; ++q) nw.at(l, t0 + q) = buf_[q - 1];
    };
    if (a == b) {
      nw.image[a] = ch.image_a;
      regrow(a);
    } else {
      std::swap(nw.succ[a], nw.succ[b]);
      nw.image[a] = ch.image_a;
      nw.image[b] = ch.image_b;
      regrow(a);
      regrow(b);
    }
    return nw;
  }

  void swap_move() {
    std::uniform_int_distribution<std::size_t> pick(0, w_.N - 1);
    const std::size_t a = pick(rng_);
    ++stats_.swap_tried;
    const auto ch = propose_swap(a);
    Worldlines nw = apply_swap(ch);
    double dv = 0.0;
    if (m_.potential != PairPotential::none)
      for (std::size_t t = w_.P - p_.swap_length + 1; t < w_.P; ++t)
        dv += m_.slice_potential(nw, t) - m_.slice_potential(w_, t);
    if (accept(ch.log_accept_kinetic - m_.tau * dv)) {
      w_ = std::move(nw);
      ++stats_.swap_accepted;
      if (ch.c != ch.a) ++stats_.swap_exchanges;
    }
  }

  void translate_move() {
    std::uniform_int_distribution<std::size_t> pick(0, w_.N - 1);
    std::uniform_real_distribution<double> u(-p_.translate_step, p_.translate_step);
    ++stats_.translate_tried;
    std::vector<std::size_t> cycle{pick(rng_)};
    while (w_.succ[cycle.back()] != cycle.front()) cycle.push_back(w_.succ[cycle.back()]);
    const Point d{u(rng_), w_.dim > 1 ? u(rng_) : 0.0};
    Worldlines nw = w_;
    for (auto l : cycle)
      for (std::size_t t = 0; t < w_.P; ++t)
        for (int a = 0; a < w_.dim; ++a) nw.at(l, t)[a] += d[a];
    double dv = 0.0;
    for (std::size_t t = 0; t < w_.P; ++t) dv += m_.slice_potential(nw, t) - m_.slice_potential(w_, t);
    if (accept(-m_.tau * dv)) {
      w_ = std::move(nw);
      ++stats_.translate_accepted;
    }
  }

  /// Relabels slices t -> t + r for every path; the action is invariant.
  void rotate_time() {
    std::uniform_int_distribution<std::size_t> pick(1, w_.P - 1);
    const std::size_t r = pick(rng_);
    Worldlines nw = w_;
    for (std::size_t l = 0; l < w_.N; ++l)
      for (std::size_t t = 0; t < w_.P; ++t) nw.at(l, t) = w_.bead(l, t + r);
    w_ = std::move(nw);
  }

 private:
  bool accept(double log_ratio) {
    if (log_ratio >= 0.0) return true;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return std::log(u(rng_)) < log_ratio;
  }

  PIMCParams p_;
  ActionModel m_;
  std::mt19937_64 rng_;
  Worldlines w_;
  MoveStats stats_;
  std::vector<Point> buf_;
};

// --- estimators --------------------------------------------------------------

/// Sum over paths of grad(v_j x_j)(x_l) . D_l, with D_l the covering-space displacement of path l.
inline double winding_vector(const Worldlines& w, const VelocityField& vf, int j) {
  double s = 0.0;
  for (std::size_t l = 0; l < w.N; ++l) {
    const Point x = w.wrapped(w.at(l, 0));
    const Point d = w.displacement(l);
    for (int i = 0; i < w.dim; ++i) s += eval_gradient_term(vf, i, j, x) * d[i];
  }
  return s;
}

/// Total covering-space displacement along axis a: L_a times the winding number.
inline double total_winding(const Worldlines& w, int a) {
  double s = 0.0;
  for (std::size_t l = 0; l < w.N; ++l) s += w.displacement(l)[a];
  return s;
}

class EstimatorAccumulator {
 public:
  struct Sums {
    std::vector<double> density, term1, term2;
    std::array<double, 2> w2{0.0, 0.0};
    double cross = 0.0;
    std::size_t n = 0;

    explicit Sums(std::size_t bins = 0) : density(bins, 0.0), term1(bins, 0.0), term2(bins, 0.0) {}
    void add(const Sums& o) {
      for (std::size_t b = 0; b < density.size(); ++b) {
        density[b] += o.density[b];
        term1[b] += o.term1[b];
        term2[b] += o.term2[b];
      }
      w2[0] += o.w2[0];
      w2[1] += o.w2[1];
      cross += o.cross;
      n += o.n;
    }
  };

  EstimatorAccumulator() = default;
  EstimatorAccumulator(const Domain& dom, std::size_t bins_per_axis, std::size_t block_size, double mass,
                       double beta, std::size_t N, int i = 0, int j = 0)
      : dim_(dom.dim()), L_{dom.length(0), dom.dim() > 1 ? dom.length(1) : 1.0}, origin_(dom.origin()),
        bins_{bins_per_axis, dom.dim() > 1 ? bins_per_axis : 1}, block_size_(std::max<std::size_t>(1, block_size)),
        mass_(mass), beta_(beta), N_(N), i_(i), j_(j), total_(bin_count()), current_(bin_count()) {
    require(bins_per_axis >= 1, ErrorKind::invalid_argument, "need at least one bin");
  }

  int dim() const noexcept { return dim_; }
  std::size_t bin_count() const noexcept { return bins_[0] * bins_[1]; }
  std::array<std::size_t, 2> bins() const noexcept { return bins_; }
  double bin_volume() const { return (L_[0] / double(bins_[0])) * (dim_ > 1 ? L_[1] / double(bins_[1]) : 1.0); }
  double mass() const noexcept { return mass_; }
  double beta() const noexcept { return beta_; }
  std::size_t particles() const noexcept { return N_; }
  std::array<int, 2> axes() const noexcept { return {i_, j_}; }
  const Sums& total() const noexcept { return total_; }
  const std::vector<Sums>& blocks() const noexcept { return blocks_; }
  std::size_t samples() const noexcept { return total_.n; }

  std::size_t bin_of(const Point& x) const {
    std::size_t idx[2] = {0, 0};
    for (int a = 0; a < dim_; ++a) {
      double u = (x[a] - origin_[a]) / L_[a];
      u -= std::floor(u);
      idx[a] = std::min(static_cast<std::size_t>(u * double(bins_[a])), bins_[a] - 1);
    }
    return idx[0] + bins_[0] * idx[1];
  }

  Point bin_centre(std::size_t b) const {
    const std::size_t i0 = b % bins_[0], i1 = b / bins_[0];
    return {origin_[0] + (double(i0) + 0.5) * L_[0] / double(bins_[0]),
            dim_ > 1 ? origin_[1] + (double(i1) + 0.5) * L_[1] / double(bins_[1]) : 0.0};
  }

  Sums blank() const { return Sums(bin_count()); }

  void push(const Sums& s) {
    total_.add(s);
    current_.add(s);
    if (current_.n >= block_size_) {
      blocks_.push_back(current_);
      current_ = blank();
    }
  }

  /// Appends the blocks and totals of `o`; incomplete blocks only enter the totals.
  void merge(const EstimatorAccumulator& o) {
    require(o.bin_count() == bin_count() && o.dim_ == dim_, ErrorKind::invalid_argument,
            "merging accumulators with different binning");
    total_.add(o.total_);
    blocks_.insert(blocks_.end(), o.blocks_.begin(), o.blocks_.end());
  }

 private:
  int dim_ = 1;
  std::array<double, 2> L_{1.0, 1.0};
  Point origin_{0.0, 0.0};
  std::array<std::size_t, 2> bins_{1, 1};
  std::size_t block_size_ = 1;
  double mass_ = 1.0, beta_ = 1.0;
  std::size_t N_ = 1;
  int i_ = 0, j_ = 0;
  Sums total_, current_;
  std::vector<Sums> blocks_;
};

/// Adds one configuration: per-bin density, the gradient term and the W-weighted displacement term.
inline void accumulate_local_normal(const Worldlines& w, const VelocityField& vf, EstimatorAccumulator& acc) {
  require(acc.dim() == w.dim, ErrorKind::invalid_argument, "accumulator binning does not match the domain");
  const auto [i, j] = acc.axes();
  const double m = acc.mass(), beta = acc.beta(), vol = acc.bin_volume();
  auto s = acc.blank();
  s.n = 1;
  const double W = winding_vector(w, vf, j);
  for (std::size_t l = 0; l < w.N; ++l) {
    const Point x = w.wrapped(w.at(l, 0));
    const std::size_t b = acc.bin_of(x);
    const double vj = vf.eval(x)[j];
    if (vj == 0.0) fail(ErrorKind::singular_point, "winding estimator needs v_j != 0 at every particle");
    s.density[b] += 1.0 / vol;
    s.term1[b] += m * eval_gradient_term(vf, i, j, x) / vj / vol;
    const double vb = vf.eval(acc.bin_centre(b))[j];
    s.term2[b] += -(m * m / (beta * vb)) * w.displacement(l)[i] * W / vol;
  }
  for (int a = 0; a < w.dim; ++a) {
    const double t = total_winding(w, a);
    s.w2[a] = t * t;
  }
  s.cross = total_winding(w, i) * total_winding(w, j);
  acc.push(s);
}

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::size_t blocks = 0;
};

namespace detail {
template <class F>
Estimate block_estimate(const EstimatorAccumulator& acc, F per_block) {
  if (acc.blocks().size() < 2 || acc.samples() == 0)
    fail(ErrorKind::numerical, "insufficient samples: need at least two completed blocks");
  Estimate e;
  e.blocks = acc.blocks().size();
  e.value = per_block(acc.total());
  double m1 = 0.0, m2 = 0.0;
  for (const auto& b : acc.blocks()) {
    const double v = per_block(b);
    m1 += v;
    m2 += v * v;
  }
  const double n = double(e.blocks);
  m1 /= n;
  e.stderr_ = std::sqrt(std::max(0.0, m2 / n - m1 * m1) / (n - 1.0));
  return e;
}
}  // namespace detail

/// rho_s / rho = m <W_L^2> / (beta N) along `axis`.
inline Estimate superfluid_fraction_constant_v(const EstimatorAccumulator& acc, int axis = 0) {
  return detail::block_estimate(acc, [&](const EstimatorAccumulator::Sums& s) {
    return acc.mass() * (s.w2[axis] / double(s.n)) / (acc.beta() * double(acc.particles()));
  });
}

/// rho_n in bin b: mean of term 1 plus term 2.
inline Estimate local_normal_estimate(const EstimatorAccumulator& acc, std::size_t b) {
  return detail::block_estimate(
      acc, [&](const EstimatorAccumulator::Sums& s) { return (s.term1[b] + s.term2[b]) / double(s.n); });
}

inline Estimate density_estimate(const EstimatorAccumulator& acc, std::size_t b) {
  return detail::block_estimate(acc, [&](const EstimatorAccumulator::Sums& s) { return s.density[b] / double(s.n); });
}

// --- ideal gas oracle -------------------------------------------------------

/// Exact rho_s / rho of N free bosons on a ring by summing all permutations and winding sectors.
inline double ideal_gas_oracle(std::size_t N, double L, double beta, double mass) {
  require(N >= 1 && N <= 6, ErrorKind::dimension_cap, "ideal gas oracle limited to N <= 6");
  require(L > 0.0 && beta > 0.0 && mass > 0.0, ErrorKind::invalid_argument, "need positive L, beta, mass");
  // cycle of length k: a_k = sum_w exp(-m w^2 L^2 / (2 k beta)) (common factors cancel), b_k = sum_w w^2 (...)
  std::vector<double> a(N + 1, 0.0), b(N + 1, 0.0), pref(N + 1, 0.0);
  for (std::size_t k = 1; k <= N; ++k) {
    const double alpha = mass * L * L / (2.0 * double(k) * beta);
    a[k] = 1.0;
    for (long w = 1;; ++w) {
      const double t = std::exp(-alpha * double(w * w));
      if (t < 1e-14 * a[k]) break;
      a[k] += 2 * t;
      b[k] += 2 * double(w * w) * t;
    }
    // cycle prefactor L sqrt(m / (2 pi k beta)) from the free kernel
    pref[k] = L * std::sqrt(mass / (2 * std::numbers::pi * double(k) * beta));
  }
  std::vector<std::size_t> perm(N);
  for (std::size_t q = 0; q < N; ++q) perm[q] = q;
  double Z = 0.0, Zw = 0.0;
  do {
    std::vector<bool> seen(N, false);
    double weight = 1.0, w2 = 0.0;
    for (std::size_t q = 0; q < N; ++q) {
      if (seen[q]) continue;
      std::size_t len = 0;
      for (std::size_t r = q; !seen[r]; r = perm[r]) {
        seen[r] = true;
        ++len;
      }
      weight *= pref[len] * a[len];
      w2 += b[len] / a[len];
    }
    Z += weight;
    Zw += weight * w2;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return mass * L * L * (Zw / Z) / (beta * double(N));
}

// --- multi-chain driver ------------------------------------------------------

struct PimcResult {
  EstimatorAccumulator acc;
  MoveStats stats;
  std::size_t chains = 0;
};

inline std::mt19937_64 chain_rng(std::uint64_t seed, std::size_t chain) {
  std::seed_seq sq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                   static_cast<std::uint32_t>(chain)};
  return std::mt19937_64(sq);
}

/// One chain: thermalize, then measure after every sweep.
inline PimcResult run_chain(const PIMCParams& p, const VelocityField& vf, std::size_t chain, int i = 0, int j = 0) {
  p.validate();
  PimcChain ch(p, chain_rng(p.seed, chain));
  for (std::size_t s = 0; s < p.thermalization; ++s) ch.sweep();
  const std::size_t block = std::max<std::size_t>(1, p.sweeps / p.blocks);
  PimcResult r{EstimatorAccumulator(p.domain, p.bins, block, p.mass, p.beta, p.N, i, j), {}, 1};
  for (std::size_t s = 0; s < p.sweeps; ++s) {
    ch.sweep();
    accumulate_local_normal(ch.config(), vf, r.acc);
  }
  r.stats = ch.stats();
  return r;
}

/// Independent chains on up to `threads` workers, merged in chain order.
inline PimcResult run_pimc(const PIMCParams& p, const VelocityField& vf, std::size_t chains, std::size_t threads = 1,
                           int i = 0, int j = 0) {
  require(chains >= 1, ErrorKind::invalid_argument, "need at least one chain");
  p.validate();
  std::vector<PimcResult> parts(chains);
  std::vector<std::exception_ptr> errors(chains);
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, chains));
  auto work = [&](std::size_t first) {
    for (std::size_t c = first; c < chains; c += workers) {
      try {
        parts[c] = run_chain(p, vf, c, i, j);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work, t);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  PimcResult out = std::move(parts[0]);
  for (std::size_t c = 1; c < chains; ++c) {
    out.acc.merge(parts[c].acc);
    out.stats.add(parts[c].stats);
  }
  out.chains = chains;
  return out;
}

}  // namespace locsf
