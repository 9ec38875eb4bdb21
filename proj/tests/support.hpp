#pragma once

#include <random>

#include "locsf/fock.hpp"

namespace locsf::testing {

inline StateVector random_state(FockSpacePtr sp, std::uint64_t seed, bool real = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CVector v(static_cast<Eigen::Index>(sp->dim()));
  for (auto& c : v) c = real ? cplx(g(rng), 0.0) : cplx(g(rng), g(rng));
  StateVector st(std::move(sp), std::move(v));
  st.normalize();
  return st;
}

/// Random real state whose particles avoid every site outside `allowed`.
inline StateVector random_state_on(FockSpacePtr sp, const std::vector<bool>& allowed, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CVector v = CVector::Zero(static_cast<Eigen::Index>(sp->dim()));
  for (std::size_t b = 0; b < sp->dim(); ++b) {
    const auto occ = sp->occupation(b);
    bool ok = true;
    for (std::size_t s = 0; s < occ.size(); ++s)
      if (occ[s] && !allowed[s]) ok = false;
    if (ok) v[static_cast<Eigen::Index>(b)] = g(rng);
  }
  StateVector st(std::move(sp), std::move(v));
  st.normalize();
  return st;
}

inline double max_abs_diff(const CVector& a, const CVector& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace locsf::testing
