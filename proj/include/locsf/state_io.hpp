#pragma once

// Binary state container plus JSON sidecar.
//
//   "LSFS" | u32 version | i32 dim | i32 boundary | u64 M1 M2 N | f64 L1 L2 x01 x02 | u64 dim
//   followed by dim (re, im) f64 pairs, little-endian host order.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "locsf/error.hpp"
#include "locsf/fock.hpp"

namespace locsf {

inline constexpr std::uint32_t kStateFormatVersion = 1;

namespace detail {
template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) fail(ErrorKind::io, "truncated state file");
  return v;
}
}  // namespace detail

inline void save_state(const std::string& path, const StateVector& st, const nlohmann::json& meta = {}) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  const auto& sp = st.space();
  const auto& d = sp.domain();
  os.write("LSFS", 4);
  detail::put<std::uint32_t>(os, kStateFormatVersion);
  detail::put<std::int32_t>(os, d.dim());
  detail::put<std::int32_t>(os, d.periodic() ? 0 : 1);
  detail::put<std::uint64_t>(os, d.sites(0));
  detail::put<std::uint64_t>(os, d.sites(1));
  detail::put<std::uint64_t>(os, sp.particles());
  detail::put<double>(os, d.length(0));
  detail::put<double>(os, d.length(1));
  detail::put<double>(os, d.origin()[0]);
  detail::put<double>(os, d.origin()[1]);
  detail::put<std::uint64_t>(os, sp.dim());
  for (const auto& c : st.amplitudes()) {
    detail::put<double>(os, c.real());
    detail::put<double>(os, c.imag());
  }
  if (!os) fail(ErrorKind::io, "write failed for '" + path + "'");

  nlohmann::json side = meta;
  side["format"] = "LSFS";
  side["version"] = kStateFormatVersion;
  side["M"] = {d.sites(0), d.sites(1)};
  side["N"] = sp.particles();
  side["d"] = d.dim();
  side["boundary"] = to_string(d.boundary());
  std::ofstream js(path + ".json");
  if (!js) fail(ErrorKind::io, "cannot write sidecar for '" + path + "'");
  js << side.dump(2) << '\n';
}

inline StateVector load_state(const std::string& path, std::size_t cap = kDefaultFockCap) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::io, "cannot open '" + path + "'");
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "LSFS", 4) != 0) fail(ErrorKind::io, "'" + path + "' is not a state file");
  if (detail::get<std::uint32_t>(is) != kStateFormatVersion) fail(ErrorKind::io, "unsupported state file version");
  const int dim = detail::get<std::int32_t>(is);
  const int bnd = detail::get<std::int32_t>(is);
  const auto m1 = detail::get<std::uint64_t>(is);
  const auto m2 = detail::get<std::uint64_t>(is);
  const auto n = detail::get<std::uint64_t>(is);
  const double l1 = detail::get<double>(is);
  const double l2 = detail::get<double>(is);
  const double o1 = detail::get<double>(is);
  const double o2 = detail::get<double>(is);
  const auto stored = detail::get<std::uint64_t>(is);
  const Domain dom(dim, {l1, l2}, {m1, m2}, bnd == 0 ? Boundary::periodic : Boundary::open, {o1, o2});
  auto sp = make_fock_space(dom, n, cap);
  if (stored != sp->dim()) fail(ErrorKind::io, "state file dimension does not match its header");
  CVector amps(static_cast<Eigen::Index>(stored));
  for (auto& c : amps) {
    const double re = detail::get<double>(is);
    c = cplx(re, detail::get<double>(is));
  }
  return StateVector(std::move(sp), std::move(amps));
}

}  // namespace locsf
