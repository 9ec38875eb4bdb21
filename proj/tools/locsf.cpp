// locsf: command-line driver for the local superfluid toolkit.
//
//   locsf <subcommand> --config run.ini [--output DIR] [--seed N] [--threads N] [--chains N] [--sweeps N]
//
// Exit codes: 0 ok, 2 configuration or input error, 3 numerical failure, 4 tolerance exceeded.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "locsf/cmps.hpp"
#include "locsf/config.hpp"
#include "locsf/fock_oracle.hpp"
#include "locsf/pimc.hpp"
#include "locsf/quasiparticle.hpp"
#include "locsf/rtqc.hpp"
#include "locsf/state_io.hpp"
#include "locsf/validate.hpp"

namespace fs = std::filesystem;
using namespace locsf;
using json = nlohmann::json;

namespace {

constexpr const char* kGridSchema = "grid-csv/1";
constexpr const char* kManifestSchema = "manifest/1";

const std::vector<std::string> kSubcommands{"oracle", "bec", "quasiparticle", "pimc", "cmps", "rtqc", "validate"};

ConfigSchema schema() {
  return {
      {"run", {"subcommand", "seed", "output", "threads"}},
      {"domain", kDomainKeys},
      {"field", kFieldKeys},
      {"oracle",
       {"state", "particles", "mass", "components", "region", "alphas", "beta", "onsite", "state_file", "save_state",
        "consistency_tol", "fock_cap"}},
      {"bec", {"particles", "mass", "components"}},
      {"quasiparticle", {"dispersion", "params", "knots", "lengths", "kmax", "beta", "include_zero", "components"}},
      {"pimc",
       {"particles", "mass", "beta", "slices", "potential", "g", "width", "staging_length", "swap_length",
        "cycle_length", "sweeps", "thermalization", "bins", "blocks", "chains", "translate_step", "components"}},
      {"cmps",
       {"file", "random_bond", "random_seed", "random_real", "mass", "tol", "intrinsic_tol", "gauge_nodes"}},
      {"rtqc", {"state_file", "region", "particles", "mode"}},
      {"validate", {"criteria", "scenarios"}},
  };
}

struct RunContext {
  Config cfg;
  fs::path out;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::optional<std::size_t> chains, sweeps;
  json extra = json::object();
  std::vector<std::string> warnings;
};

std::vector<std::pair<int, int>> components(const Config& c, const std::string& sec, int dim) {
  const auto v = c.list(sec, "components", {1, 1});
  if (v.empty() || v.size() % 2) fail(ErrorKind::config, "[" + sec + "] components needs pairs i j");
  std::vector<std::pair<int, int>> out;
  for (std::size_t k = 0; k < v.size(); k += 2) {
    const int i = int(v[k]) - 1, j = int(v[k + 1]) - 1;
    if (i < 0 || j < 0 || i >= dim || j >= dim || v[k] != std::floor(v[k]) || v[k + 1] != std::floor(v[k + 1]))
      fail(ErrorKind::config, "[" + sec + "] component index out of range");
    out.emplace_back(i, j);
  }
  return out;
}

std::vector<std::size_t> sites(const Config& c, const std::string& sec, const std::string& key, std::size_t limit) {
  std::vector<std::size_t> out;
  for (double s : c.list(sec, key)) {
    if (s < 0 || s != std::floor(s) || s >= double(limit))
      fail(ErrorKind::config, "[" + sec + "] " + key + " lists a site outside 0.." + std::to_string(limit - 1));
    out.push_back(static_cast<std::size_t>(s));
  }
  if (out.empty()) fail(ErrorKind::config, "[" + sec + "] " + key + " is empty");
  return out;
}

/// Artifact names must stay inside the output directory.
fs::path artifact(const RunContext& ctx, const std::string& name) {
  const fs::path p(name);
  if (p.empty() || p.has_parent_path() || p.is_absolute() || name == "." || name == "..")
    fail(ErrorKind::config, "artifact name '" + name + "' must be a plain file name");
  return ctx.out / p;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) fail(ErrorKind::io, "cannot write '" + p.string() + "'");
  return os;
}

void write_json(const fs::path& p, const json& j) { open_out(p) << j.dump(2) << '\n'; }

/// Folds single-component fields into one grid.
NormalFluidField merge_components(const std::vector<NormalFluidField>& parts) {
  NormalFluidField out = parts.front();
  for (std::size_t k = 1; k < parts.size(); ++k) {
    for (auto [i, j] : parts[k].components()) {
      out.add_component(i, j);
      for (std::size_t s = 0; s < out.size(); ++s) {
        out[s].rho_n[i][j] = parts[k][s].rho_n[i][j];
        out[s].stderr_n[i][j] = parts[k][s].stderr_n[i][j];
        out[s].masked = out[s].masked || parts[k][s].masked;
      }
    }
    for (const auto& w : parts[k].warnings()) out.warn(w);
  }
  return out;
}

/// Seam sites carry the phase jump of a non-periodic boost and are reported as masked.
void emit_grid(RunContext& ctx, NormalFluidField f) {
  std::size_t seam = 0;
  for (auto& s : f.sites())
    if (s.seam && !s.masked) {
      s.masked = true;
      ++seam;
    }
  if (seam) f.warn(std::to_string(seam) + " sites on the periodic seam masked");
  auto os = open_out(ctx.out / "result.csv");
  f.write_csv(os);
  for (const auto& w : f.warnings()) ctx.warnings.push_back(w);
  std::size_t masked = 0;
  for (const auto& s : f.sites()) masked += s.masked;
  ctx.extra["method"] = f.method();
  ctx.extra["masked_sites"] = masked;
}

// --- routes -----------------------------------------------------------------

int run_oracle(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const Domain dom = domain_from_config(c);
  const VelocityField vf = field_from_config(c, dom);
  const double mass = c.num("oracle", "mass", 1.0);
  const std::size_t cap = c.count("oracle", "fock_cap", kDefaultFockCap);
  const std::string kind = c.str("oracle", "state", "k0_bec");
  Ensemble ens;
  if (kind == "file") {
    auto st = load_state(c.str("oracle", "state_file"), cap);
    const auto& d = st.space().domain();
    if (d.sites() != dom.sites() || d.dim() != dom.dim() || d.boundary() != dom.boundary())
      fail(ErrorKind::config, "state file grid does not match [domain]");
    ens = pure_ensemble(std::move(st));
  } else {
    const std::size_t N = c.count("oracle", "particles", 1);
    auto space = make_fock_space(dom, N, cap);
    if (kind == "k0_bec") {
      ens = pure_ensemble(build_k0_bec(space));
    } else if (kind == "strong_sf") {
      ens = pure_ensemble(build_strong_sf(dom, vf, mass, sites(c, "oracle", "region", dom.site_count()), N));
    } else if (kind == "bogoliubov") {
      const auto a = c.list("oracle", "alphas");
      if (a.empty() || a.size() % 3) fail(ErrorKind::config, "[oracle] alphas needs triples n re im");
      std::map<int, cplx> alphas;
      for (std::size_t k = 0; k < a.size(); k += 3) alphas[int(a[k])] = cplx(a[k + 1], a[k + 2]);
      ens = pure_ensemble(build_bogoliubov_projected(alphas, space));
    } else if (kind == "gibbs") {
      ens = build_gibbs(space, {mass, c.num("oracle", "onsite", 0.0)}, c.num("oracle", "beta"));
    } else {
      fail(ErrorKind::config, "unknown [oracle] state '" + kind + "'");
    }
  }
  if (c.has("oracle", "save_state")) {
    if (ens.size() != 1) fail(ErrorKind::config, "only pure states can be saved");
    const auto path = artifact(ctx, c.str("oracle", "save_state"));
    save_state(path.string(), ens.front().state, {{"recipe", kind}, {"field", c.to_json().value("field", json{})}});
    ctx.extra["state_file"] = path.filename().string();
  }
  LimitOptions lo;
  lo.consistency_tol = c.num("oracle", "consistency_tol", lo.consistency_tol);
  std::vector<NormalFluidField> parts;
  for (auto [i, j] : components(c, "oracle", dom.dim())) parts.push_back(local_normal_tensor(ens, vf, mass, i, j, lo));
  emit_grid(ctx, merge_components(parts));
  ctx.extra["fock_dim"] = ens.front().state.space().dim();
  ctx.extra["ensemble_size"] = ens.size();
  return 0;
}

int run_bec(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const Domain dom = domain_from_config(c);
  const VelocityField vf = field_from_config(c, dom);
  const std::size_t N = c.count("bec", "particles", 1);
  const double mass = c.num("bec", "mass", 1.0);
  if (N == 0) fail(ErrorKind::config, "[bec] particles must be positive");
  std::vector<NormalFluidSite> out(dom.site_count());
  const auto comps = components(c, "bec", dom.dim());
  for (std::size_t s = 0; s < dom.site_count(); ++s) {
    auto& site = out[s];
    site.x = dom.coord(s);
    site.rho = double(N) * mass / dom.volume();
    if (vf.singular(site.x)) {
      site.masked = true;
      continue;
    }
    for (auto [i, j] : comps) {
      try {
        site.rho_n[i][j] = bec_closed_form(vf, N, dom, mass, i, j, site.x);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::singular_point) throw;
        site.masked = true;
      }
    }
  }
  NormalFluidField f(dom.dim(), std::move(out), "bec-closed-form");
  for (auto [i, j] : comps) f.add_component(i, j);
  f.flag_positivity();
  emit_grid(ctx, f);
  return 0;
}

int run_quasiparticle(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const auto disp = dispersion_from_string(c.str("quasiparticle", "dispersion"));
  const auto lengths = c.has("quasiparticle", "lengths") ? c.list("quasiparticle", "lengths") : c.list("domain", "lengths");
  if (lengths.empty() || lengths.size() > 2) fail(ErrorKind::config, "[quasiparticle] lengths needs 1 or 2 entries");
  const int dim = int(lengths.size());
  const std::array<double, 2> L{lengths[0], dim > 1 ? lengths[1] : 1.0};
  const double beta = c.num("quasiparticle", "beta");
  const bool zero = c.integer("quasiparticle", "include_zero", 0) != 0;
  std::optional<QuasiparticleSpectrum> sp;
  if (disp == Dispersion::tabulated) {
    const auto k = c.list("quasiparticle", "knots");
    if (k.size() < 4 || k.size() % 2) fail(ErrorKind::config, "[quasiparticle] knots needs pairs |k| eps");
    std::vector<std::pair<double, double>> knots;
    for (std::size_t q = 0; q < k.size(); q += 2) knots.emplace_back(k[q], k[q + 1]);
    sp.emplace(QuasiparticleSpectrum::tabulated(dim, L, c.num("quasiparticle", "kmax"), knots, zero));
  } else {
    const auto params = c.list("quasiparticle", "params");
    const double kmax = c.num("quasiparticle", "kmax", choose_kmax(disp, params, beta));
    sp.emplace(dim, L, kmax, disp, params, zero);
  }
  json tensor = json::array();
  for (int i = 0; i < dim; ++i) {
    json row = json::array();
    for (int j = 0; j < dim; ++j) row.push_back(landau_normal_tensor(*sp, beta, sp->volume(), i, j));
    tensor.push_back(row);
  }
  const double vc = critical_velocity(*sp);
  json rec{{"schema", "quasiparticle/1"},
           {"rho_n_tensor", tensor},
           {"critical_velocity", std::isfinite(vc) ? json(vc) : json(nullptr)},
           {"beta", beta},
           {"dispersion", to_string(disp)},
           {"grid", {{"dim", dim}, {"lengths", std::vector<double>(L.begin(), L.begin() + dim)},
                     {"kmax", sp->kmax()}, {"points", sp->grid().size()}, {"include_zero", zero}}}};
  write_json(ctx.out / "result.json", rec);
  return 0;
}

int run_pimc_route(RunContext& ctx) {
  const auto& c = ctx.cfg;
  PIMCParams p;
  p.domain = domain_from_config(c);
  const VelocityField vf = field_from_config(c, p.domain);
  p.N = c.count("pimc", "particles", p.N);
  p.mass = c.num("pimc", "mass", p.mass);
  p.beta = c.num("pimc", "beta", p.beta);
  p.P = c.count("pimc", "slices", p.P);
  p.potential = pair_potential_from_string(c.str("pimc", "potential", to_string(p.potential)));
  p.g = c.num("pimc", "g", p.g);
  p.width = c.num("pimc", "width", p.width);
  p.staging_length = c.count("pimc", "staging_length", std::min(p.staging_length, p.P / 4));
  p.swap_length = c.count("pimc", "swap_length", std::min(p.swap_length, p.P / 2));
  p.cycle_length = c.count("pimc", "cycle_length", p.cycle_length);
  p.sweeps = ctx.sweeps.value_or(c.count("pimc", "sweeps", p.sweeps));
  p.thermalization = c.count("pimc", "thermalization", p.thermalization);
  p.bins = c.count("pimc", "bins", p.bins);
  p.blocks = c.count("pimc", "blocks", p.blocks);
  p.translate_step = c.num("pimc", "translate_step", p.translate_step);
  p.seed = ctx.seed;
  const std::size_t chains = ctx.chains.value_or(c.count("pimc", "chains", 1));
  const auto comps = components(c, "pimc", p.domain.dim());
  if (comps.size() != 1) fail(ErrorKind::config, "[pimc] takes a single component");
  const auto [i, j] = comps.front();
  p.validate();

  const auto res = run_pimc(p, vf, chains, ctx.threads, i, j);
  const auto& acc = res.acc;
  std::vector<NormalFluidSite> out(acc.bin_count());
  for (std::size_t b = 0; b < acc.bin_count(); ++b) {
    auto& site = out[b];
    site.x = acc.bin_centre(b);
    const auto d = density_estimate(acc, b);
    const auto n = local_normal_estimate(acc, b);
    site.rho = p.mass * d.value;
    site.rho_n[i][j] = n.value;
    site.stderr_n[i][j] = n.stderr_;
  }
  NormalFluidField f(p.domain.dim(), std::move(out), "pimc");
  f.add_component(i, j);
  f.flag_positivity();
  emit_grid(ctx, f);

  const auto& st = res.stats;
  json axes = json::array();
  for (int a = 0; a < p.domain.dim(); ++a) {
    const auto e = superfluid_fraction_constant_v(acc, a);
    axes.push_back({{"axis", a + 1}, {"value", e.value}, {"stderr", e.stderr_}});
  }
  ctx.extra["params"] = {{"N", p.N},           {"mass", p.mass},
                         {"beta", p.beta},     {"P", p.P},
                         {"potential", to_string(p.potential)},
                         {"g", p.g},           {"width", p.width},
                         {"staging_length", p.staging_length},
                         {"swap_length", p.swap_length},
                         {"cycle_length", p.cycle_length},
                         {"sweeps", p.sweeps}, {"thermalization", p.thermalization},
                         {"bins", p.bins},     {"blocks", p.blocks},
                         {"chains", chains},   {"translate_step", p.translate_step}};
  ctx.extra["acceptance"] = {
      {"staging", MoveStats::rate(st.staging_accepted, st.staging_tried)},
      {"swap", MoveStats::rate(st.swap_accepted, st.swap_tried)},
      {"swap_exchange", MoveStats::rate(st.swap_exchanges, st.swap_tried)},
      {"translate", MoveStats::rate(st.translate_accepted, st.translate_tried)}};
  ctx.extra["blocks"] = {{"count", acc.blocks().size()}, {"samples", acc.samples()}};
  ctx.extra["global_superfluid_fraction"] = axes;
  if (p.domain.dim() == 1 && p.potential == PairPotential::none && p.N <= 6)
    ctx.extra["ideal_gas_oracle"] = ideal_gas_oracle(p.N, p.domain.length(0), p.beta, p.mass);
  return 0;
}

int run_cmps_route(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const Domain dom = domain_from_config(c);
  if (dom.dim() != 1 || !dom.periodic()) fail(ErrorKind::config, "cmps needs a 1-d periodic [domain]");
  const VelocityField vf = field_from_config(c, dom);
  CMPS s;
  if (c.has("cmps", "file")) {
    s = load_cmps(c.str("cmps", "file"));
  } else {
    s = random_cmps(int(c.integer("cmps", "random_bond", 2)), dom.length(0), c.seed("cmps", "random_seed", ctx.seed),
                    c.integer("cmps", "random_real", 1) != 0);
  }
  if (std::abs(s.L - dom.length(0)) > 1e-12 * s.L) fail(ErrorKind::config, "cMPS length differs from [domain] lengths");
  GaugeOptions go;
  go.nodes = c.count("cmps", "gauge_nodes", go.nodes);
  s = gauge_to_zero_q(s, go);
  LgtOptions lo;
  lo.obs.tol = c.num("cmps", "tol", lo.obs.tol);
  lo.intrinsic_tol = c.num("cmps", "intrinsic_tol", lo.intrinsic_tol);
  const double mass = c.num("cmps", "mass", 1.0);
  std::vector<NormalFluidSite> out(dom.site_count());
  for (std::size_t q = 0; q < dom.site_count(); ++q) {
    auto& site = out[q];
    site.x = dom.coord(q);
    const bool excluded = vf.singular(site.x);
    site.rho = excluded ? std::nan("") : mass * density(s, site.x[0], lo.obs);
    if (excluded || vf.eval(site.x)[0] == 0.0) {
      site.masked = true;
      continue;
    }
    site.rho_n[0][0] = normal_fluid_1d(s, vf, mass, site.x[0], lo).rho_n;
  }
  NormalFluidField f(1, std::move(out), "cmps");
  f.add_component(0, 0);
  f.flag_positivity();
  emit_grid(ctx, f);
  ctx.extra["bond_dimension"] = s.D;
  return 0;
}

int run_rtqc(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const auto st = load_state(c.str("rtqc", "state_file"));
  const auto region = sites(c, "rtqc", "region", st.space().sites());
  const auto mode = basis_mode_from_string(c.str("rtqc", "mode", "tuple"));
  const auto sigma = marginal_state(st, region, c.count("rtqc", "particles", 1), mode);
  const auto rep = coherence(sigma);
  json j{{"schema", "coherence/1"},
         {"coherence_bits", rep.coherence},
         {"entropy_bits", rep.entropy},
         {"entropy_decohered_bits", rep.entropy_decohered},
         {"rate_bound", rep.region_sites >= 2 && rep.particles >= 1 ? json(rep.rate_bound) : json(nullptr)},
         {"mode", to_string(rep.mode)},
         {"region_sites", rep.region_sites},
         {"particles", rep.particles},
         {"basis_dim", sigma.basis.dim()}};
  write_json(ctx.out / "result.json", j);
  return 0;
}

int run_validate(RunContext& ctx) {
  const auto& c = ctx.cfg;
  std::vector<CriterionResult> rows;
  const auto suite = suite_criteria();
  const auto ids = c.list("validate", "criteria", std::vector<double>(suite.begin(), suite.end()));
  for (double id : ids) {
    if (id != std::floor(id)) fail(ErrorKind::config, "[validate] criteria are integers");
    rows.push_back(run_criterion(int(id)));
  }
  if (c.has("validate", "scenarios")) {
    std::string s = c.str("validate", "scenarios");
    for (auto& ch : s)
      if (ch == ',') ch = ' ';
    std::istringstream is(s);
    std::string name;
    while (is >> name) rows.push_back(cross_validate(name, ctx.threads));
  }
  auto os = open_out(ctx.out / "result.csv");
  os << "id,name,passed,measured,tolerance,seconds,detail\n";
  bool ok = true;
  for (const auto& r : rows) {
    ok = ok && r.passed;
    std::printf("%-5s %-4s %-60s %8.2fs  %s\n", r.id ? std::to_string(r.id).c_str() : "-", r.passed ? "PASS" : "FAIL",
                r.name.c_str(), r.seconds, r.detail.c_str());
    std::string d = r.detail;
    for (auto& ch : d)
      if (ch == '"') ch = '\'';
    os << r.id << ",\"" << r.name << "\"," << (r.passed ? 1 : 0) << ',' << r.measured << ',' << r.tolerance << ','
       << r.seconds << ",\"" << d << "\"\n";
  }
  ctx.extra["passed"] = ok;
  return ok ? 0 : 4;
}

int dispatch(const std::string& sub, RunContext& ctx) {
  if (sub == "oracle") return run_oracle(ctx);
  if (sub == "bec") return run_bec(ctx);
  if (sub == "quasiparticle") return run_quasiparticle(ctx);
  if (sub == "pimc") return run_pimc_route(ctx);
  if (sub == "cmps") return run_cmps_route(ctx);
  if (sub == "rtqc") return run_rtqc(ctx);
  if (sub == "validate") return run_validate(ctx);
  fail(ErrorKind::config, "unknown subcommand '" + sub + "'");
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::config:
    case ErrorKind::invalid_argument:
    case ErrorKind::io: return 2;
    default: return 3;
  }
}

std::string kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::config: return "config";
    case ErrorKind::singular_point: return "singular_point";
    case ErrorKind::boundary_stencil: return "boundary_stencil";
    case ErrorKind::dimension_cap: return "dimension_cap";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"local superfluid toolkit"};
  app.set_version_flag("--version", LOCSF_VERSION);
  std::string sub, config_path, output;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads, chains, sweeps;
  app.add_option("subcommand", sub, "oracle | bec | quasiparticle | pimc | cmps | rtqc | validate");
  app.add_option("-c,--config", config_path, "INI configuration file");
  app.add_option("-o,--output", output, "output directory");
  app.add_option("--seed", seed, "64-bit seed for stochastic routes");
  app.add_option("--threads", threads, "worker cap");
  app.add_option("--chains", chains, "independent Monte Carlo chains");
  app.add_option("--sweeps", sweeps, "measured sweeps per chain");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  RunContext ctx;
  try {
    if (!config_path.empty()) ctx.cfg = Config::load(config_path);
    ctx.cfg.check(schema());
    if (sub.empty()) sub = ctx.cfg.str("run", "subcommand", "");
    if (sub.empty()) fail(ErrorKind::config, "no subcommand given");
    if (std::find(kSubcommands.begin(), kSubcommands.end(), sub) == kSubcommands.end())
      fail(ErrorKind::config, "unknown subcommand '" + sub + "'");
    if (sub != "validate" && config_path.empty()) fail(ErrorKind::config, sub + " needs --config");
    ctx.cfg.set("run", "subcommand", sub);

    if (!output.empty()) ctx.out = output;
    else if (auto e = env("LOCSF_OUTPUT_DIR")) ctx.out = *e;
    else ctx.out = ctx.cfg.str("run", "output", "locsf_out");
    ctx.cfg.set("run", "output", ctx.out.string());

    ctx.seed = seed ? *seed : ctx.cfg.seed("run", "seed", 1);
    ctx.cfg.set("run", "seed", std::to_string(ctx.seed));
    if (threads) ctx.threads = *threads;
    else if (auto e = env("LOCSF_THREADS")) {
      try {
        ctx.threads = std::stoul(*e);
      } catch (const std::exception&) {
        fail(ErrorKind::config, "LOCSF_THREADS must be a positive integer");
      }
    } else ctx.threads = ctx.cfg.count("run", "threads", 1);
    if (ctx.threads == 0) fail(ErrorKind::config, "thread cap must be positive");
    ctx.cfg.set("run", "threads", std::to_string(ctx.threads));
    ctx.chains = chains;
    ctx.sweeps = sweeps;
    if (chains) ctx.cfg.set("pimc", "chains", std::to_string(*chains));
    if (sweeps) ctx.cfg.set("pimc", "sweeps", std::to_string(*sweeps));
    if ((chains || sweeps) && sub != "pimc") fail(ErrorKind::config, "--chains and --sweeps apply to pimc only");

    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) fail(ErrorKind::io, "cannot create output directory '" + ctx.out.string() + "'");
  } catch (const Error& e) {
    std::cerr << "locsf: " << e.what() << '\n';
    return exit_code(e.kind());
  }

  int rc = 0;
  json error = nullptr;
  try {
    rc = dispatch(sub, ctx);
  } catch (const Error& e) {
    std::cerr << "locsf: " << e.what() << '\n';
    rc = exit_code(e.kind());
    error = {{"kind", kind_name(e.kind())}, {"message", e.what()}};
  } catch (const std::exception& e) {
    std::cerr << "locsf: " << e.what() << '\n';
    rc = 3;
    error = {{"kind", "internal"}, {"message", e.what()}};
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest{{"schema", kManifestSchema},
                {"grid_schema", kGridSchema},
                {"version", LOCSF_VERSION},
                {"subcommand", sub},
                {"config", ctx.cfg.to_json()},
                {"seed", ctx.seed},
                {"threads", ctx.threads},
                {"wall_time_s", wall},
                {"warnings", ctx.warnings},
                {"exit_code", rc},
                {"error", error},
                {"result", ctx.extra}};
  try {
    write_json(ctx.out / "manifest.json", manifest);
    open_out(ctx.out / "config.ini") << ctx.cfg.to_ini();
  } catch (const Error& e) {
    std::cerr << "locsf: " << e.what() << '\n';
    return rc ? rc : 2;
  }
  for (const auto& w : ctx.warnings) std::cerr << "locsf: warning: " << w << '\n';
  return rc;
}
