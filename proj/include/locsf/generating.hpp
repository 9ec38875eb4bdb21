#pragma once

// Density of the fragmented state prod_j (a_j^dag)^{n_j} |0> by coefficient
// extraction from the D = 1 cMPS generating functional with R = sum_j xi_j psi_j.
//
// The norm kernel is exp(sum_jk conj(xi_j) xi_k G_jk) with G the mode Gram matrix;
// the density numerator inserts conj(R(x)) R(x). Both are expanded as truncated
// polynomials in (conj(xi), xi) and the coefficient of prod conj(xi)^n xi^n is read off.

#include <cstddef>
#include <functional>
#include <vector>

#include "locsf/error.hpp"
#include "locsf/fock.hpp"

namespace locsf {

inline constexpr std::size_t kGeneratingMaxParticles = 8;
inline constexpr std::size_t kGeneratingMaxModes = 4;

class GeneratingFunctional {
 public:
  GeneratingFunctional(CMatrix gram, std::vector<std::size_t> occupations)
      : G_(std::move(gram)), n_(std::move(occupations)) {
    const std::size_t M = n_.size();
    require(M >= 1 && static_cast<Eigen::Index>(M) == G_.rows() && G_.rows() == G_.cols(),
            ErrorKind::invalid_argument, "Gram matrix must be square with one row per mode");
    std::size_t N = 0;
    for (auto k : n_) N += k;
    require(N >= 1, ErrorKind::invalid_argument, "generating functional needs at least one particle");
    require(N <= kGeneratingMaxParticles && M <= kGeneratingMaxModes, ErrorKind::dimension_cap,
            "generating functional limited to N <= 8 and at most 4 modes");
    // variables: conj(xi_j) at position j, xi_j at position M + j
    stride_.assign(2 * M, 1);
    for (std::size_t v = 1; v < 2 * M; ++v) stride_[v] = stride_[v - 1] * (cap(v - 1) + 1);
    size_ = stride_.back() * (cap(2 * M - 1) + 1);
    expand(N);
    norm_coeff_ = E_[index(n_, n_)];
    if (!(std::abs(norm_coeff_) > 0.0)) fail(ErrorKind::numerical, "fragmented state has zero norm");
  }

  std::size_t particles() const {
    std::size_t N = 0;
    for (auto k : n_) N += k;
    return N;
  }

  /// sum_ab conj(psi_a) psi_b E[n - e_a, n - e_b] / E[n, n]
  cplx density(const std::vector<cplx>& psi_at_x) const {
    const std::size_t M = n_.size();
    require(psi_at_x.size() == M, ErrorKind::invalid_argument, "need one mode value per mode");
    cplx acc = 0.0;
    for (std::size_t a = 0; a < M; ++a) {
      if (n_[a] == 0) continue;
      for (std::size_t b = 0; b < M; ++b) {
        if (n_[b] == 0) continue;
        auto bra = n_, ket = n_;
        --bra[a];
        --ket[b];
        acc += std::conj(psi_at_x[a]) * psi_at_x[b] * E_[index(bra, ket)];
      }
    }
    return acc / norm_coeff_;
  }

 private:
  std::size_t cap(std::size_t v) const { return n_[v % n_.size()]; }

  std::size_t index(const std::vector<std::size_t>& bra, const std::vector<std::size_t>& ket) const {
    std::size_t id = 0;
    for (std::size_t j = 0; j < n_.size(); ++j) id += bra[j] * stride_[j] + ket[j] * stride_[n_.size() + j];
    return id;
  }

  // E = sum_{p <= N} X^p / p!,  X = sum_jk G_jk conj(xi_j) xi_k
  void expand(std::size_t N) {
    const std::size_t M = n_.size();
    E_.assign(size_, 0.0);
    std::vector<cplx> term(size_, 0.0), next(size_);
    term[0] = 1.0;
    E_[0] = 1.0;
    std::vector<std::size_t> digits(2 * M);
    for (std::size_t p = 1; p <= N; ++p) {
      std::fill(next.begin(), next.end(), cplx(0.0));
      for (std::size_t id = 0; id < size_; ++id) {
        if (term[id] == cplx(0.0)) continue;
        std::size_t r = id;
        for (std::size_t v = 2 * M; v-- > 0;) {
          digits[v] = r / stride_[v];
          r %= stride_[v];
        }
        for (std::size_t j = 0; j < M; ++j) {
          if (digits[j] + 1 > n_[j]) continue;
          for (std::size_t k = 0; k < M; ++k) {
            if (digits[M + k] + 1 > n_[k] || G_(j, k) == cplx(0.0)) continue;
            next[id + stride_[j] + stride_[M + k]] += G_(j, k) * term[id] / double(p);
          }
        }
      }
      term.swap(next);
      for (std::size_t id = 0; id < size_; ++id) E_[id] += term[id];
    }
  }

  CMatrix G_;
  std::vector<std::size_t> n_;
  std::vector<std::size_t> stride_;
  std::size_t size_ = 0;
  std::vector<cplx> E_;
  cplx norm_coeff_ = 0.0;
};

/// Lattice form: modes are grid vectors, G their Gram matrix, result is <n_s>.
inline double generating_density(const std::vector<CVector>& modes, const std::vector<std::size_t>& occupations,
                                 std::size_t site) {
  require(!modes.empty() && modes.size() == occupations.size(), ErrorKind::invalid_argument,
          "need one occupation per mode");
  const auto M = static_cast<Eigen::Index>(modes.size());
  CMatrix G(M, M);
  for (Eigen::Index j = 0; j < M; ++j)
    for (Eigen::Index k = 0; k < M; ++k) G(j, k) = modes[j].dot(modes[k]);
  require(site < static_cast<std::size_t>(modes[0].size()), ErrorKind::invalid_argument, "site out of range");
  std::vector<cplx> at(modes.size());
  for (std::size_t j = 0; j < modes.size(); ++j) at[j] = modes[j](static_cast<Eigen::Index>(site));
  return GeneratingFunctional(G, occupations).density(at).real();
}

/// Continuum form: mode functions on [-L/2, L/2), Gram matrix by periodic trapezoid on `quad` points.
inline double generating_density(const std::vector<std::function<cplx(double)>>& modes,
                                 const std::vector<std::size_t>& occupations, double L, double x,
                                 std::size_t quad = 512) {
  require(!modes.empty() && modes.size() == occupations.size(), ErrorKind::invalid_argument,
          "need one occupation per mode");
  require(L > 0.0 && quad >= 2, ErrorKind::invalid_argument, "need L > 0 and at least two quadrature points");
  const auto M = static_cast<Eigen::Index>(modes.size());
  CMatrix G = CMatrix::Zero(M, M);
  const double h = L / double(quad);
  for (std::size_t q = 0; q < quad; ++q) {
    const double z = -0.5 * L + h * double(q);
    std::vector<cplx> v(modes.size());
    for (std::size_t j = 0; j < modes.size(); ++j) v[j] = modes[j](z);
    for (Eigen::Index j = 0; j < M; ++j)
      for (Eigen::Index k = 0; k < M; ++k) G(j, k) += std::conj(v[j]) * v[k] * h;
  }
  std::vector<cplx> at(modes.size());
  for (std::size_t j = 0; j < modes.size(); ++j) at[j] = modes[j](x);
  return GeneratingFunctional(G, occupations).density(at).real();
}

}  // namespace locsf
