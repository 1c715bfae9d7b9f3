// mtoep command-line driver.
//
// Exit codes: 0 pass, 1 verification failure, 2 usage error,
// 3 numerical non-convergence.

#include "mtoep/mtoep.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace mtoep;
using io::json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNonConvergence = 3;

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
  std::string format;  // empty: command default
  bool no_timestamp = false;
};

// operator source shared by most commands
struct OperatorFlags {
  std::string matrix;
  std::string family;
  std::string beta;
  Eigen::Index dim = 0;
  std::string mode = "finite-section";
  std::string f;
  std::string g;
};

struct GridFlags {
  std::string grid;  // RADIALxANGULAR
  double refine_tol = 1e-4;
  int max_refine = 6;
  std::string resolvent_mode = "auto";
};

void add_operator_flags(CLI::App* cmd, OperatorFlags& o, bool allow_matrix) {
  if (allow_matrix) cmd->add_option("--matrix", o.matrix, "operator JSON file");
  cmd->add_option("--family", o.family, "conj-shift | real-part | custom");
  cmd->add_option("--beta", o.beta, "RE,IM");
  cmd->add_option("--dim", o.dim, "truncation N");
  cmd->add_option("--mode", o.mode, "finite-section | closed-form");
  cmd->add_option("--f", o.f, "custom symbol f, e.g. -1:0.5,0;1:0.5,0");
  cmd->add_option("--g", o.g, "custom conjugator g, e.g. 0:1,0;1:0.5,0");
}

void add_grid_flags(CLI::App* cmd, GridFlags& g) {
  cmd->add_option("--grid", g.grid, "RADIALxANGULAR polar grid (default 60x256)");
  cmd->add_option("--refine-tol", g.refine_tol, "relative refinement tolerance");
  cmd->add_option("--max-refine", g.max_refine, "maximum refinement levels");
  cmd->add_option("--resolvent-mode", g.resolvent_mode, "auto | closed-form | finite-section");
}

FamilyParams family_from(const OperatorFlags& o) {
  if (o.family.empty()) throw ParseError("--family is required");
  const Family fam = parse_family(o.family);
  FamilyParams p = [&] {
    if (fam == Family::Custom) {
      if (o.f.empty() || o.g.empty()) throw ParseError("custom family requires --f and --g");
      return FamilyParams::custom(parse_symbol(o.f), parse_symbol(o.g));
    }
    if (o.beta.empty()) throw ParseError("--beta is required");
    return FamilyParams::make(fam, parse_complex(o.beta));
  }();
  p.validate();
  return p;
}

json operator_flags_json(const OperatorFlags& o) {
  json j;
  if (!o.matrix.empty()) {
    j["matrix"] = o.matrix;
    return j;
  }
  j["family"] = o.family;
  if (!o.beta.empty()) j["beta"] = io::to_json(parse_complex(o.beta));
  if (!o.f.empty()) j["f"] = o.f;
  if (!o.g.empty()) j["g"] = o.g;
  j["dim"] = o.dim;
  j["mode"] = o.mode;
  return j;
}

OperatorModel model_from(const OperatorFlags& o) {
  if (!o.matrix.empty()) {
    if (!o.family.empty()) throw ParseError("give either --matrix or --family, not both");
    return OperatorModel::from(io::operator_from_json(io::read_json_file(o.matrix)));
  }
  const auto p = family_from(o);
  if (o.dim < 1) throw DomainError("--dim must be >= 1");
  return OperatorModel::family(p, o.dim, parse_build_mode(o.mode));
}

GridSpec grid_from(const GridFlags& g, int threads) {
  int radial = 60, angular = 256;
  if (!g.grid.empty()) {
    const auto x = g.grid.find('x');
    if (x == std::string::npos) throw ParseError("--grid expects RADIALxANGULAR, e.g. 60x256");
    radial = detail::parse_int(std::string_view(g.grid).substr(0, x), g.grid);
    angular = detail::parse_int(std::string_view(g.grid).substr(x + 1), g.grid);
    if (radial < 1 || angular < 1) throw DomainError("--grid counts must be >= 1");
  }
  GridSpec spec = GridSpec::standard(radial, angular);
  spec.refine_tol = g.refine_tol;
  spec.max_refine = g.max_refine;
  spec.threads = threads;
  spec.validate();
  return spec;
}

json grid_json(const GridFlags& g) {
  return json{{"grid", g.grid.empty() ? "60x256" : g.grid},
              {"refine_tol", g.refine_tol},
              {"max_refine", g.max_refine},
              {"resolvent_mode", g.resolvent_mode}};
}

std::vector<Complex> parse_points(const std::string& text) {
  std::vector<Complex> pts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto semi = text.find(';', start);
    const auto piece = text.substr(start, semi == std::string::npos ? std::string::npos : semi - start);
    if (!detail::trim(piece).empty()) pts.push_back(parse_complex(piece));
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  if (pts.empty()) throw ParseError("expected a point list 'RE,IM;RE,IM;...'");
  return pts;
}

SpectrumModel parse_spectrum(const std::string& text) {
  if (text == "unit-disk") return SpectrumModel::unit_disk();
  if (text == "interval") return SpectrumModel::interval();
  if (text.rfind("points:", 0) == 0) return SpectrumModel::finite_points(parse_points(text.substr(7)));
  throw ParseError("unknown spectrum '" + text + "' (unit-disk | interval | points:RE,IM;...)");
}

class Runner {
 public:
  Runner(const Globals& g, std::string command) : g_(g), command_(std::move(command)) {}

  json meta(json config) const {
    json m;
    m["tool"] = "mtoep";
    m["command"] = command_;
    config["seed"] = g_.seed;
    m["config"] = std::move(config);
    // execution details are not part of the result and are left out
    // in comparison mode
    if (!g_.no_timestamp) m["run"] = json{{"timestamp", io::utc_timestamp()}, {"threads", g_.threads}};
    return m;
  }

  const std::string& format(const char* fallback) const {
    if (g_.format.empty()) fallback_ = fallback;
    return g_.format.empty() ? fallback_ : g_.format;
  }

  bool to_file() const { return !g_.out.empty(); }

  /// The artifact goes to --out, or to stdout when no path is given.
  void emit(const std::string& text) const {
    if (g_.out.empty()) {
      std::cout << text;
      std::cout.flush();
      return;
    }
    std::ofstream f(g_.out, std::ios::binary);
    if (!f) throw ParseError("cannot write '" + g_.out + "'");
    f << text;
  }

  /// Human summary lines: stdout when the artifact is in a file, stderr otherwise.
  std::ostream& summary() const { return g_.out.empty() ? std::cerr : std::cout; }

 private:
  const Globals& g_;
  std::string command_;
  mutable std::string fallback_;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int verdict_exit(const std::vector<Verdict>& vs) {
  for (auto v : vs)
    if (v == Verdict::Fail) return kExitFail;
  return kExitPass;
}

// ---------------------------------------------------------------- commands

int cmd_op_build(const Runner& run, const OperatorFlags& o) {
  if (o.dim < 1) throw DomainError("--dim must be >= 1");
  const auto p = family_from(o);
  const auto op = build_operator(p, o.dim, parse_build_mode(o.mode));
  json j = io::operator_to_json(op);
  j["meta"] = run.meta(operator_flags_json(o));
  run.emit(dump(j));
  return kExitPass;
}

struct VerifyFlags {
  std::string theorem;
  std::string points;
  int n_max = -1;
  double tol_m = 1e-3, tol_p = 1e-2;
};

int cmd_verify(const Runner& run, const Globals& g, const OperatorFlags& o, const GridFlags& gf,
               const VerifyFlags& v) {
  const TheoremId id = parse_theorem(v.theorem);
  VerifyConfig cfg;
  cfg.grid = grid_from(gf, g.threads);
  cfg.resolvent_mode = parse_resolvent_mode(gf.resolvent_mode);
  cfg.build_mode = parse_build_mode(o.mode);
  cfg.tol_m = v.tol_m;
  cfg.tol_p = v.tol_p;
  const int default_n_max = id == TheoremId::Lem6_1_norm ? 16 : 64;
  cfg.n_max = v.n_max >= 0 ? v.n_max : default_n_max;
  if (cfg.n_max < 0) throw DomainError("--n-max must be >= 0");
  if (o.dim > 0) cfg.dim = o.dim;

  std::vector<Check> checks;
  auto need_beta = [&] {
    if (o.beta.empty()) throw ParseError("--beta is required for theorem " + v.theorem);
    return parse_complex(o.beta);
  };
  switch (id) {
    case TheoremId::Thm3_1: checks = verify_thm_3_1(need_beta(), cfg); break;
    case TheoremId::Prop2_2: checks = verify_prop_2_2(need_beta(), cfg); break;
    case TheoremId::Thm3_2: checks = verify_thm_3_2(need_beta(), cfg); break;
    case TheoremId::Thm3_3: checks = verify_thm_3_3(need_beta(), cfg); break;
    case TheoremId::ER_Thm1_1: {
      OperatorFlags src = o;
      if (src.matrix.empty() && src.family.empty()) src.family = "real-part";
      if (src.matrix.empty() && src.dim < 1) {
        if (src.beta.empty()) throw ParseError("--beta or --matrix is required for theorem er");
        src.dim = default_dim(parse_complex(src.beta), cfg.n_max);
      }
      const auto model = model_from(src);
      const auto pts = v.points.empty() ? std::vector<Complex>{-1.0, 1.0} : parse_points(v.points);
      checks.push_back(verify_er_bound(model, pts, cfg));
      break;
    }
    case TheoremId::Lem6_1_norm:
      checks = commutator_growth_check(cfg.n_max, o.dim > 0 ? o.dim : 256);
      break;
    default:
      throw ParseError("theorem '" + v.theorem + "' is not available here (use sweep for corollaries)");
  }

  std::vector<Verdict> verdicts;
  json arr = json::array();
  for (const auto& c : checks) {
    verdicts.push_back(c.report.verdict);
    arr.push_back(io::check_to_json(c));
  }
  json config = operator_flags_json(o);
  config["theorem"] = v.theorem;
  config["n_max"] = cfg.n_max;
  if (cfg.dim) config["dim"] = *cfg.dim;
  if (!v.points.empty()) config["points"] = v.points;
  config["tol_m"] = cfg.tol_m;
  config["tol_p"] = cfg.tol_p;
  config.update(grid_json(gf));
  json j{{"meta", run.meta(config)}, {"checks", arr}};

  if (run.to_file()) {
    run.emit(dump(j));
    for (const auto& c : checks) std::cout << format_check(c) << '\n';
  } else if (run.format("lines") == "json") {
    run.emit(dump(j));
  } else {
    for (const auto& c : checks) std::cout << format_check(c) << '\n';
  }
  return verdict_exit(verdicts);
}

struct SweepFlags {
  std::string cor = "3.1";
  std::string k_range = "2..8";
  double phase = 0.0;
  int n_max = 16;
  double tail = 1e-8;
  Eigen::Index max_dim = 8192;
};

int cmd_sweep(const Runner& run, const Globals& g, const GridFlags& gf, const SweepFlags& s) {
  Family fam;
  if (s.cor == "3.1")
    fam = Family::ConjugateShift;
  else if (s.cor == "3.2")
    fam = Family::RealPart;
  else
    throw ParseError("--cor must be 3.1 or 3.2");
  SweepConfig sc;
  const auto dots = s.k_range.find("..");
  if (dots == std::string::npos) throw ParseError("--k-range expects LO..HI");
  sc.k_min = detail::parse_int(std::string_view(s.k_range).substr(0, dots), s.k_range);
  sc.k_max = detail::parse_int(std::string_view(s.k_range).substr(dots + 2), s.k_range);
  if (sc.k_min < 1 || sc.k_max > 40) throw DomainError("--k-range must lie in 1..40");
  sc.phase = s.phase;
  sc.n_max = s.n_max;
  sc.tail = s.tail;
  sc.max_dim = s.max_dim;
  sc.verify.grid = grid_from(gf, g.threads);
  sc.verify.resolvent_mode = parse_resolvent_mode(gf.resolvent_mode);

  const auto rep = sweep_growth(fam, sc);
  const std::string m_line = io::slope_line("M", rep.m_fit);
  const std::string p_line = io::slope_line("P", rep.p_fit);

  json config{{"cor", s.cor}, {"k_range", s.k_range}, {"phase", s.phase}, {"n_max", s.n_max},
              {"tail", s.tail}, {"max_dim", s.max_dim}};
  config.update(grid_json(gf));
  if (run.format("csv") == "json") {
    json j = io::sweep_to_json(rep);
    j["meta"] = run.meta(config);
    run.emit(dump(j));
    run.summary() << m_line << '\n' << p_line << '\n';
  } else if (run.to_file()) {
    run.emit(io::sweep_csv(rep));
    std::cout << m_line << '\n' << p_line << '\n';
  } else {
    std::cout << io::sweep_csv(rep) << "# " << m_line << "\n# " << p_line << '\n';
  }
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';

  // the corollary for the real-part family concerns M only
  bool ok = rep.m_fit.in_range() && (fam == Family::RealPart || rep.p_fit.in_range());
  for (const auto& r : rep.rows) ok = ok && r.verdict != Verdict::Fail;
  return ok ? kExitPass : kExitFail;
}

int cmd_power_bound(const Runner& run, const OperatorFlags& o, int n_max) {
  if (n_max < 0) throw DomainError("--n-max must be >= 0");
  const auto model = model_from(o);
  const auto rep = power_bound(model, n_max);
  json config = operator_flags_json(o);
  config["n_max"] = n_max;
  json j{{"meta", run.meta(config)}, {"report", io::report_to_json(rep)}};
  run.emit(dump(j));
  run.summary() << "M value=" << fmt_double(rep.value, 6)
                << " argmax_n=" << (rep.argmax_n ? *rep.argmax_n : -1)
                << (rep.converged ? "" : " (not converged)") << '\n';
  return kExitPass;
}

struct ResolventFlags {
  std::string lambda;
  std::string spectrum = "unit-disk";
};

int cmd_resolvent(const Runner& run, const Globals& g, const OperatorFlags& o,
                  const GridFlags& gf, const ResolventFlags& r) {
  const auto model = model_from(o);
  const auto mode = parse_resolvent_mode(gf.resolvent_mode);
  json config = operator_flags_json(o);
  config.update(grid_json(gf));
  if (!r.lambda.empty()) {
    const Complex lambda = parse_complex(r.lambda);
    if (!(std::abs(lambda) > 1.0)) throw DomainError("--lambda requires |lambda| > 1");
    const auto map = model.resolvent(lambda, mode);
    const Eigen::Index n = map->dim();
    TruncatedOperator t;
    t.data.resize(n, n);
    Vector e = Vector::Zero(n), col;
    for (Eigen::Index c = 0; c < n; ++c) {
      e[c] = 1.0;
      map->apply(e, col);
      t.data.col(c) = col;
      e[c] = 0.0;
    }
    const bool closed = mode != ResolventMode::FiniteSection && model.closed_form_resolvent_available();
    t.provenance.construction =
        closed ? Construction::ClosedFormResolvent : Construction::FiniteSectionResolvent;
    t.provenance.family = model.family_params();
    t.provenance.lambda = lambda;
    config["lambda"] = io::to_json(lambda);
    json j = io::operator_to_json(t);
    j["norm"] = operator_norm(t.data);
    j["meta"] = run.meta(config);
    run.emit(dump(j));
    run.summary() << "resolvent norm=" << fmt_double(j["norm"].get<double>(), 6) << '\n';
    return kExitPass;
  }
  const auto spec = parse_spectrum(r.spectrum);
  const auto rep = resolvent_condition(model, spec, grid_from(gf, g.threads), mode);
  config["spectrum"] = r.spectrum;
  json j{{"meta", run.meta(config)}, {"report", io::report_to_json(rep)}};
  run.emit(dump(j));
  run.summary() << "P_S value=" << fmt_double(rep.value, 6)
                << (rep.argmax_lambda ? " argmax=" + format_beta(*rep.argmax_lambda) : " argmax=infinity")
                << '\n';
  return kExitPass;
}

int cmd_kreiss(const Runner& run, const Globals& g, const OperatorFlags& o, const GridFlags& gf,
               int hy_n_max) {
  const auto model = model_from(o);
  const auto grid = grid_from(gf, g.threads);
  const auto mode = parse_resolvent_mode(gf.resolvent_mode);
  const auto k = kreiss_constant(model, grid, mode);
  json config = operator_flags_json(o);
  config.update(grid_json(gf));
  json j;
  j["kreiss"] = io::report_to_json(k);
  run.summary() << "K value=" << fmt_double(k.value, 6) << '\n';
  if (hy_n_max > 0) {
    config["hy_n_max"] = hy_n_max;
    const auto hy = hille_yosida_constant(model, hy_n_max, grid, mode);
    j["hille_yosida"] = io::report_to_json(hy);
    run.summary() << "HY value=" << fmt_double(hy.value, 6) << " n_max=" << hy_n_max << '\n';
  }
  j["meta"] = run.meta(config);
  run.emit(dump(j));
  return kExitPass;
}

struct StabilityFlags {
  std::string v0;
  std::string u0;
  double perturb = 0.0;
  int steps = 0;
  std::string forcing = "generator";
  double forcing_scale = 1.0;
};

std::vector<Vector> read_sequence(const std::string& path) {
  const auto j = io::read_json_file(path);
  if (!j.is_array() || j.empty()) throw ParseError("forcing file must hold a nonempty list of vectors");
  std::vector<Vector> seq;
  for (const auto& v : j) seq.push_back(io::vector_from_json(v));
  return seq;
}

int cmd_stability(const Runner& run, const Globals& g, const OperatorFlags& o,
                  const StabilityFlags& s) {
  if (s.steps < 1) throw DomainError("--steps must be >= 1");
  if (s.v0.empty() == (s.perturb == 0.0)) throw ParseError("give exactly one of --v0 or --perturb");
  TruncatedOperator b;
  if (!o.matrix.empty()) {
    b = io::operator_from_json(io::read_json_file(o.matrix));
  } else {
    if (o.dim < 1) throw DomainError("--dim must be >= 1");
    b = build_operator(family_from(o), o.dim, parse_build_mode(o.mode));
  }
  const Eigen::Index n = b.dim();

  // u0 then v0 direction from the seed, in that order
  Lcg64 rng(g.seed);
  SchemeRun r;
  r.b = b;
  r.steps = s.steps;
  r.u0 = s.u0.empty() ? random_vector(n, rng) : io::vector_from_json(io::read_json_file(s.u0));
  if (!s.v0.empty()) {
    r.v0 = io::vector_from_json(io::read_json_file(s.v0));
  } else {
    if (!(s.perturb > 0.0)) throw DomainError("--perturb must be > 0");
    Vector d = random_vector(n, rng);
    r.v0 = s.perturb * d / d.norm();
  }
  if (s.forcing == "zero")
    r.forcing = Forcing::zero();
  else if (s.forcing == "generator")
    r.forcing = Forcing::generator(g.seed + 1, s.forcing_scale);
  else
    r.forcing = Forcing::from_sequence(read_sequence(s.forcing));

  const auto res = run_scheme(r);
  json config = operator_flags_json(o);
  config["steps"] = s.steps;
  if (!s.v0.empty()) config["v0"] = s.v0;
  else config["perturb"] = s.perturb;
  if (!s.u0.empty()) config["u0"] = s.u0;
  config["forcing"] = s.forcing;
  config["forcing_scale"] = s.forcing_scale;

  if (run.format("csv") == "json") {
    json j;
    j["meta"] = run.meta(config);
    j["power"] = io::report_to_json(res.power);
    j["envelope"] = res.error.envelope;
    j["max_two_way_gap"] = res.error.max_two_way_gap;
    j["unstable"] = res.error.unstable;
    j["verdict"] = std::string(io::verdict_name(res.error.verdict));
    json rows = json::array();
    for (std::size_t i = 0; i < res.error.norms.size(); ++i)
      rows.push_back(json{{"n", i}, {"u_norm", res.u_norms[i]}, {"v_norm", res.error.norms[i]}});
    j["trajectory"] = std::move(rows);
    run.emit(dump(j));
  } else {
    run.emit(io::trajectory_csv(res));
  }
  run.summary() << "stability M_hat=" << fmt_double(res.error.m_hat, 6)
                << " envelope=" << fmt_double(res.error.envelope, 6)
                << " two_way_gap=" << fmt_double(res.error.max_two_way_gap, 3) << ' '
                << to_string(res.error.verdict) << '\n';
  return res.error.verdict == Verdict::Fail ? kExitFail : kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple Toeplitz operators: construction, bounds and checks"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "seed for every random choice")->default_val(0);
  app.add_option("--threads", g.threads, "worker threads")->default_val(1)->check(CLI::Range(1, 256));
  app.add_option("--out", g.out, "write the artifact to PATH");
  app.add_option("--format", g.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--no-timestamp", g.no_timestamp, "omit run details (comparison mode)");
  app.fallthrough();

  OperatorFlags ops;
  GridFlags grid;

  auto* op = app.add_subcommand("op", "operator construction");
  op->require_subcommand(1);
  auto* build = op->add_subcommand("build", "build a truncated operator");
  add_operator_flags(build, ops, false);

  auto* verify = app.add_subcommand("verify", "check a stated inequality");
  VerifyFlags vf;
  verify->add_option("--theorem", vf.theorem, "3.1 | 3.2 | 3.3 | prop2.2 | er | lem6.1")->required();
  verify->add_option("--n-max", vf.n_max, "largest power");
  verify->add_option("--points", vf.points, "finite set E for er, 'RE,IM;RE,IM'");
  verify->add_option("--tol-m", vf.tol_m, "tolerance on M brackets");
  verify->add_option("--tol-p", vf.tol_p, "tolerance on P brackets");
  add_operator_flags(verify, ops, true);
  add_grid_flags(verify, grid);

  auto* sweep = app.add_subcommand("sweep", "growth sweep as |beta| -> 1");
  SweepFlags sf;
  sweep->add_option("--cor", sf.cor, "3.1 (conj-shift) | 3.2 (real-part)");
  sweep->add_option("--k-range", sf.k_range, "LO..HI, beta = 1 - 2^-k");
  sweep->add_option("--phase", sf.phase, "argument of beta");
  sweep->add_option("--n-max", sf.n_max, "largest power");
  sweep->add_option("--tail", sf.tail, "|beta|^N target for the truncation");
  sweep->add_option("--max-dim", sf.max_dim, "largest N before a row is skipped");
  add_grid_flags(sweep, grid);

  auto* power = app.add_subcommand("power-bound", "sup of ||A^n|| over n <= n-max");
  int power_n_max = 64;
  power->add_option("--n-max", power_n_max, "largest power");
  add_operator_flags(power, ops, true);

  auto* resolvent = app.add_subcommand("resolvent", "resolvent at a point, or its condition sup");
  ResolventFlags rf;
  resolvent->add_option("--lambda", rf.lambda, "RE,IM with |lambda| > 1");
  resolvent->add_option("--spectrum", rf.spectrum, "unit-disk | interval | points:RE,IM;...");
  add_operator_flags(resolvent, ops, true);
  add_grid_flags(resolvent, grid);

  auto* kreiss = app.add_subcommand("kreiss", "Kreiss and Hille-Yosida constants");
  int hy_n_max = 0;
  kreiss->add_option("--hy-n-max", hy_n_max, "also compute the iterated-resolvent constant");
  add_operator_flags(kreiss, ops, true);
  add_grid_flags(kreiss, grid);

  auto* stability = app.add_subcommand("stability", "propagated error of u_n = B u_{n-1} + b_n");
  StabilityFlags stf;
  stability->add_option("--v0", stf.v0, "initial perturbation vector JSON");
  stability->add_option("--perturb", stf.perturb, "seeded perturbation of this size");
  stability->add_option("--u0", stf.u0, "initial state vector JSON (default seeded)");
  stability->add_option("--steps", stf.steps, "number of steps K")->required();
  stability->add_option("--forcing", stf.forcing, "zero | generator | FILE");
  stability->add_option("--forcing-scale", stf.forcing_scale, "generator amplitude");
  add_operator_flags(stability, ops, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (build->parsed()) return cmd_op_build(Runner(g, "op build"), ops);
    if (verify->parsed()) return cmd_verify(Runner(g, "verify"), g, ops, grid, vf);
    if (sweep->parsed()) return cmd_sweep(Runner(g, "sweep"), g, grid, sf);
    if (power->parsed()) return cmd_power_bound(Runner(g, "power-bound"), ops, power_n_max);
    if (resolvent->parsed()) return cmd_resolvent(Runner(g, "resolvent"), g, ops, grid, rf);
    if (kreiss->parsed()) return cmd_kreiss(Runner(g, "kreiss"), g, ops, grid, hy_n_max);
    if (stability->parsed()) return cmd_stability(Runner(g, "stability"), g, ops, stf);
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const SingularError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitUsage;
}
