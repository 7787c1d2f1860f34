#include "latticelab/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "latticelab/io.hpp"

namespace latticelab::cli {

namespace {

namespace fs = std::filesystem;
using io::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Input {
  std::string path;
  std::string text;
};

/// Shared state of one invocation: inputs read, where reports go.
struct Session {
  std::string command;
  std::vector<std::pair<std::string, std::string>> digests;
  std::string out_dir;
  std::ostream* out = nullptr;
  double tolerance = 1e-9;
  std::uint64_t horizon = 10000;
  std::uint64_t seed = 0;

  Input read(const std::string& path) {
    Input in{path, io::read_text(path)};
    digests.emplace_back(fs::path(path).filename().string(), io::sha256_hex(in.text));
    return in;
  }

  json provenance() const {
    json inputs = json::array();
    for (const auto& [name, sha] : digests) inputs.push_back({{"name", name}, {"sha256", sha}});
    return {{"tool", "latticelab"}, {"version", LATTICELAB_VERSION}, {"command", command}, {"seed", seed},
            {"tolerance", tolerance}, {"horizon", horizon}, {"inputs", std::move(inputs)}};
  }

  /// Writes a report file under --out, or prints it when there is no --out
  /// and `primary` is set.
  void emit(const std::string& name, const std::string& content, bool primary) {
    if (out_dir.empty()) {
      if (primary) *out << content;
      return;
    }
    fs::create_directories(out_dir);
    const auto path = fs::path(out_dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write '" + path.string() + "'");
    f << content;
    *out << "wrote " << path.string() << "\n";
  }

  void emit_json(const std::string& name, json j, bool primary = true) {
    j["provenance"] = provenance();
    emit(name, io::dump(j), primary);
  }

  CheckOptions options() const {
    CheckOptions o;
    o.tolerance = tolerance;
    o.horizon = horizon;
    o.seed = seed;
    return o;
  }
};

void add_common(CLI::App* sub, Session& s, bool with_out = true) {
  sub->add_option("--tolerance", s.tolerance, "Convergence tolerance")->capture_default_str();
  sub->add_option("--horizon", s.horizon, "Members examined")->capture_default_str();
  sub->add_option("--seed", s.seed, "Seed for sampled searches")->capture_default_str();
  if (with_out) sub->add_option("--out", s.out_dir, "Directory for report files");
}

SequenceFamily load_family(Session& s, const std::string& path) {
  const auto in = s.read(path);
  return io::family_from_json(io::parse_json(in.text, path));
}

std::shared_ptr<const FiniteMetricSpace> load_space(Session& s, const std::string& path, const std::string& format) {
  const auto in = s.read(path);
  std::optional<io::Format> f;
  if (!format.empty()) f = io::parse_format(format);
  return std::make_shared<const FiniteMetricSpace>(io::parse_space(in.text, path, f));
}

std::shared_ptr<const FiniteMetricSpace> prefix_space(const FiniteMetricSpace& sp, std::size_t k) {
  std::vector<std::string> labels(sp.labels().begin(), sp.labels().begin() + static_cast<std::ptrdiff_t>(k));
  if (sp.has_coordinates()) {
    std::vector<std::vector<double>> pts;
    for (std::size_t i = 0; i < k; ++i) {
      const auto c = sp.coordinates(i);
      pts.emplace_back(c.begin(), c.end());
    }
    return std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_coordinates(pts, labels));
  }
  std::vector<std::vector<double>> m(k, std::vector<double>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) m[i][j] = sp.distance(i, j);
  return std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_matrix(m, labels));
}

// ---------------------------------------------------------------- metric

struct MetricArgs {
  std::string space, format, refinement;
  std::vector<std::uint64_t> levels;
  RefinementParams params;
};

int cmd_metric(Session& s, const MetricArgs& a) {
  std::ostringstream csv;
  json report{{"schema_version", io::kSchemaVersion}, {"type", "metric-profile"}};
  if (!a.space.empty()) {
    const auto sp = load_space(s, a.space, a.format);
    const auto prof = isolation_profile(*sp);
    report["points"] = sp->size();
    report["profile"] = io::to_json(prof, *sp);
    csv << "points,delta\n";
    for (std::size_t k = 2; k < sp->size(); k *= 2) csv << k << "," << fmt(discreteness_constant(*prefix_space(*sp, k))) << "\n";
    if (sp->size() >= 2) csv << sp->size() << "," << fmt(prof.delta) << "\n";
  } else if (!a.refinement.empty()) {
    if (a.levels.empty()) throw InputError("metric --refinement needs --levels");
    const auto fam = build_refinement_family(parse_refinement_kind(a.refinement), a.levels, a.params);
    json levels = json::array();
    csv << "N,points,delta,escape_scale\n";
    for (const auto& l : fam.levels) {
      levels.push_back({{"N", l.N}, {"points", l.space->size()}, {"delta", l.delta}, {"escape_scale", l.escape_scale},
                        {"model", l.model}});
      csv << l.N << "," << l.space->size() << "," << fmt(l.delta) << "," << fmt(l.escape_scale) << "\n";
    }
    report["refinement"] = to_string(fam.kind);
    report["levels"] = std::move(levels);
    const auto& last = fam.levels.back();
    report["profile"] = io::to_json(isolation_profile(*last.space), *last.space);
  } else {
    throw InputError("metric needs --space or --refinement");
  }
  s.emit_json("profile.json", std::move(report));
  s.emit("delta_trend.csv", csv.str(), false);
  return kOk;
}

// ---------------------------------------------------------------- envelope

struct EnvelopeArgs {
  std::string space, format, g, refinement = "caseA";
  std::uint64_t sqrt_grid = 0, N = 0;
  std::vector<std::size_t> ns;
  std::string alpha = "pairwise";
};

int cmd_envelope(Session& s, const EnvelopeArgs& a) {
  std::optional<LatticeElement> g;
  std::optional<ClosedFormModulus> form;
  if (a.sqrt_grid > 0) {
    const std::uint64_t m2 = a.sqrt_grid * a.sqrt_grid;
    std::vector<double> xs;
    for (std::uint64_t j = 0; j <= m2; ++j) xs.push_back(static_cast<double>(j) / static_cast<double>(m2));
    auto sp = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::on_line(xs));
    std::vector<double> v;
    for (double x : xs) v.push_back(std::sqrt(x));
    g = LatticeElement(Carrier::metric(sp), std::move(v));
    form = ClosedFormModulus{1.0, 0.5};
  } else if (a.N > 0) {
    const auto lvl = build_refinement(parse_refinement_kind(a.refinement), a.N);
    const auto c = lip_counterexample(lvl, 1);
    g = c.g;
    form = ClosedFormModulus{1.0, 0.5};
  } else if (!a.space.empty()) {
    if (a.g.empty()) throw InputError("envelope --space needs --g (label,value CSV)");
    const auto sp = load_space(s, a.space, a.format);
    const auto gin = s.read(a.g);
    g = io::parse_function_csv(gin.text, Carrier::metric(sp), a.g);
  } else {
    throw InputError("envelope needs --sqrt-grid, --N or --space with --g");
  }
  std::vector<std::size_t> ns = a.ns;
  if (ns.empty())
    for (std::size_t n = 1; n <= 256; n *= 2) ns.push_back(n);

  std::optional<ModulusCurve> curve;
  if (a.alpha == "modulus") {
    const auto& sp = g->carrier().space();
    const double hi = sp.diameter(), lo = std::max(discreteness_constant(sp), hi * 1e-9);
    std::vector<double> grid;
    for (int i = 0; i <= 64; ++i) grid.push_back(lo * std::pow(hi / lo, i / 64.0));
    grid.back() = hi;
    curve = modulus_of_continuity(*g, grid);
    if (form) curve = with_closed_form(*curve, *form);
  } else if (a.alpha != "pairwise") {
    throw InputError("--alpha must be pairwise or modulus");
  }

  std::ostringstream csv;
  csv << "n,alpha_n,achieved_error,lipschitz_constant,alpha_method\n";
  json rows = json::array();
  for (std::size_t n : ns) {
    const auto e = inf_convolution(*g, n, curve ? &*curve : nullptr);
    csv << n << "," << fmt(e.alpha_n) << "," << fmt(e.achieved_error) << "," << fmt(e.lipschitz_constant) << ","
        << e.alpha_method << "\n";
    rows.push_back({{"n", n}, {"alpha_n", e.alpha_n}, {"achieved_error", e.achieved_error},
                    {"lipschitz_constant", e.lipschitz_constant}, {"alpha_method", e.alpha_method}});
  }
  s.emit("envelope.csv", csv.str(), true);
  if (!s.out_dir.empty())
    s.emit_json("envelope.json", {{"schema_version", io::kSchemaVersion}, {"type", "envelope"}, {"rows", std::move(rows)}});
  return kOk;
}

// ---------------------------------------------------------------- check

struct CheckArgs {
  std::string family, mode = "order", candidate, policy = "certificate", tag, include;
  double settle_fraction = 0.5;
};

std::vector<std::vector<std::uint64_t>> parse_include(const std::string& text) {
  std::vector<std::vector<std::uint64_t>> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) {
    std::vector<std::uint64_t> seq;
    std::stringstream ps(part);
    std::string item;
    while (std::getline(ps, item, ',')) {
      try {
        std::size_t used = 0;
        seq.push_back(std::stoull(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw InputError("--include: '" + item + "' is not an index");
      }
    }
    if (!seq.empty()) out.push_back(std::move(seq));
  }
  return out;
}

int cmd_check(Session& s, const CheckArgs& a) {
  const auto fam = load_family(s, a.family);
  auto opts = s.options();
  opts.settle_fraction = a.settle_fraction;
  if (!a.tag.empty()) opts.tag = SpaceTag::parse(a.tag);
  json report{{"schema_version", io::kSchemaVersion}, {"type", "verdict"}, {"family", fam.name()}};

  auto candidate = [&]() -> std::optional<LatticeElement> {
    if (!a.candidate.empty()) {
      const auto in = s.read(a.candidate);
      return io::element_from_json(io::parse_json(in.text, a.candidate), fam.carrier(), "candidate");
    }
    const auto lim = pointwise_limit(fam, opts);
    if (!lim.limit) {
      report["limit_report"] = {{"window_first", lim.window_first}, {"window_last", lim.window_last}, {"notes", lim.notes}};
      if (lim.divergence)
        report["limit_report"]["divergence"] = {{"coordinate", lim.divergence->coordinate},
                                                {"oscillation", lim.divergence->value},
                                                {"member", lim.divergence->member}};
    }
    return lim.limit;
  };

  std::optional<ConvergenceVerdict> v;
  if (a.mode == "buo-cauchy") {
    auto pol = BuoCauchyPolicy::parse(a.policy);
    if (!a.include.empty()) pol.include = parse_include(a.include);
    v = check_buo_cauchy(fam, pol, opts);
  } else if (a.mode == "equivalence") {
    const auto c = candidate();
    if (!c) throw InputError("equivalence needs a candidate: the family has no pointwise limit within the horizon");
    const auto eq = buo_equals_order(fam, *c, opts);
    report["equal"] = eq.equal;
    report["order"] = io::to_json(eq.order);
    report["buo"] = io::to_json(eq.buo);
    s.emit_json("verdict.json", std::move(report));
    return eq.order.outcome == Outcome::Fails ? kFails : kOk;
  } else if (a.mode == "norm-bound") {
    const auto nb = norm_bound(fam, opts.tag.value_or(SpaceTag::linf()), opts);
    report["norm_bound"] = {{"M", nb.M}, {"norm", nb.norm}, {"horizon", nb.horizon}, {"argmax", nb.argmax},
                            {"declared_unbounded", nb.declared_unbounded},
                            {"declared_supremum", nb.declared_supremum ? json(*nb.declared_supremum) : json(nullptr)},
                            {"gap_subsequence", nb.gap_subsequence}};
    s.emit_json("verdict.json", std::move(report));
    return kOk;
  } else if (a.mode == "order" || a.mode == "uo" || a.mode == "buo") {
    const auto c = candidate();
    if (!c) {
      ConvergenceVerdict none;
      none.mode = a.mode == "order" ? Mode::Order : a.mode == "uo" ? Mode::Uo : Mode::Buo;
      none.outcome = Outcome::Fails;
      none.tolerance = opts.tolerance;
      none.horizon = effective_horizon(fam, opts);
      none.settle = settle_index(none.horizon, opts.settle_fraction);
      none.seed = opts.seed;
      none.summary = "no pointwise limit within the horizon, so no candidate converges";
      v = none;
    } else if (a.mode == "order") {
      v = check_order_convergence(fam, *c, opts);
    } else if (a.mode == "uo") {
      v = check_uo_convergence(fam, *c, opts);
    } else {
      v = check_buo_convergence(fam, *c, opts);
    }
  } else {
    throw InputError("unknown --mode '" + a.mode + "' (order, uo, buo, buo-cauchy, equivalence, norm-bound)");
  }
  *s.out << to_string(v->mode) << ": " << to_string(v->outcome) << (v->positive ? " (no counterexample found within budget)" : "")
         << " - " << v->summary << "\n";
  report["verdict"] = io::to_json(*v);
  s.emit_json("verdict.json", std::move(report), false);
  return v->outcome == Outcome::Fails ? kFails : kOk;
}

// ---------------------------------------------------------------- witness

struct WitnessArgs {
  std::string family, constants, tag;
  std::vector<std::uint64_t> coords;
  double eps = 1.0, p = 1.0;
  std::size_t count = 20;
};

int cmd_witness(Session& s, const WitnessArgs& a, bool jumps) {
  const auto fam = load_family(s, a.family);
  const auto constants = a.constants.empty() ? WitnessConstants{} : WitnessConstants::parse(a.constants);
  const auto opts = s.options();
  try {
    json report;
    if (jumps) {
      const auto w = extract_big_jump_witness(fam, a.coords, a.eps, a.count, constants, opts);
      const auto tag = a.tag.empty() ? SpaceTag::c0() : SpaceTag::parse(a.tag);
      report = io::to_json(w);
      report["refutation"] = io::to_json(refute_order_boundedness(w, tag, &fam));
      *s.out << "jump witness: " << w.count() << " pairs, each jump > " << fmt(w.eps) << "\n";
    } else {
      const auto w = extract_lp_block_witness(fam, a.p, a.count, constants, opts);
      const auto tag = a.tag.empty() ? SpaceTag::lp(a.p) : SpaceTag::parse(a.tag);
      report = io::to_json(w);
      report["refutation"] = io::to_json(refute_order_boundedness(w, tag, &fam));
      *s.out << "block witness: " << w.count() << " disjoint blocks, each difference norm > 1\n";
    }
    s.emit_json("witness.json", std::move(report), false);
    return kOk;
  } catch (const HorizonExhausted& e) {
    json report{{"schema_version", io::kSchemaVersion}, {"type", "horizon-exhausted"}, {"message", e.what()},
                {"usable_coordinates", e.usable()}};
    if (e.partial_jump) report["partial"] = io::to_json(*e.partial_jump);
    if (e.partial_block) report["partial"] = io::to_json(*e.partial_block);
    *s.out << "horizon exhausted: " << e.what() << "\n";
    s.emit_json("witness.json", std::move(report), false);
    return kFails;
  } catch (const LimitInLp& e) {
    *s.out << "refused: " << e.what() << "\n";
    s.emit_json("witness.json", {{"schema_version", io::kSchemaVersion}, {"type", "refusal"}, {"message", e.what()}}, false);
    return kFails;
  }
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string refinement = "caseA", space, format, x0;
  std::uint64_t N = 100;
  std::size_t n_max = 20;
  std::vector<std::uint64_t> levels;
  std::string escape_kind = "hat";
  RefinementParams params;
  double exponent = 1.0, height = 4.0;
  std::size_t prefix = 64;
};

RefinementLevel generate_level(Session& s, const GenerateArgs& a) {
  if (!a.space.empty()) {
    if (a.x0.empty()) throw InputError("--space needs --x0");
    return refinement_from_space(load_space(s, a.space, a.format), a.x0);
  }
  return build_refinement(parse_refinement_kind(a.refinement), a.N, a.params);
}

int cmd_generate(Session& s, const GenerateArgs& a, const std::string& what) {
  if (what == "hat") {
    const auto lvl = generate_level(s, a);
    const auto fam = hat_family(lvl, s.horizon);
    s.emit_json("family.json", io::family_to_json(fam));
  } else if (what == "lip") {
    const auto c = lip_counterexample(generate_level(s, a), a.n_max);
    s.emit_json("family.json", io::family_to_json(c.g_family));
    json rep{{"schema_version", io::kSchemaVersion}, {"type", "lip-counterexample"}};
    rep.update(io::to_json(c));
    s.emit_json("lip_report.json", std::move(rep), false);
  } else if (what == "harmonic") {
    s.emit_json("family.json", io::family_to_json(harmonic_truncation(a.exponent, a.prefix, s.horizon)));
  } else if (what == "step") {
    s.emit_json("family.json", io::family_to_json(step_family(a.height, a.prefix, s.horizon)));
  } else if (what == "escape") {
    if (a.levels.size() < 3) throw InputError("generate escape needs --levels with at least 3 values");
    const auto kind = parse_refinement_kind(a.refinement);
    EscapeReport rep;
    if (a.escape_kind == "hat") {
      rep = verify_escape(build_refinement_family(kind, a.levels, a.params), SpaceTag::bounded_fns(), s.options());
    } else if (a.escape_kind == "lip") {
      std::vector<LipCounterexample> cs;
      for (auto N : a.levels) cs.push_back(lip_counterexample(build_refinement(kind, N, a.params), a.n_max));
      rep = verify_escape(cs, SpaceTag::lip_b());
    } else {
      throw InputError("--of must be hat or lip");
    }
    *s.out << rep.trend << "\n";
    json j{{"schema_version", io::kSchemaVersion}, {"type", "escape"}};
    j.update(io::to_json(rep));
    s.emit_json("escape.json", std::move(j), false);
  }
  return kOk;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::string witness, certificate, family;
};

int cmd_verify(Session& s, const VerifyArgs& a) {
  const auto fam = load_family(s, a.family);
  if (!a.witness.empty()) {
    const auto in = s.read(a.witness);
    const auto j = io::parse_json(in.text, a.witness);
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) throw InputError(a.witness + ": missing witness type");
    const auto type = j["type"].get<std::string>();
    ReplayResult r;
    std::size_t count = 0;
    if (type == "jump-witness") {
      const auto w = io::jump_witness_from_json(j);
      count = w.count();
      r = verify_jump_witness(fam, w);
    } else if (type == "block-witness") {
      const auto w = io::block_witness_from_json(j);
      count = w.count();
      r = verify_block_witness(fam, w);
    } else {
      throw InputError(a.witness + ": type '" + type + "' is not a replayable witness");
    }
    if (!r.ok) throw InvariantError("witness verification failed at index " + std::to_string(r.failing_index) + ": " + r.reason);
    *s.out << "verified " << count << " inequalities of the " << type << "\n";
    return kOk;
  }
  if (!a.certificate.empty()) {
    const auto in = s.read(a.certificate);
    auto j = io::parse_json(in.text, a.certificate);
    if (j.contains("verdict")) j = j["verdict"];
    if (j.contains("order_certificate") && !j["order_certificate"].is_null()) {
      if (!j.contains("limit") || j["limit"].is_null()) throw InputError(a.certificate + ": order certificate without a limit");
      const auto cand = io::element_from_json(j["limit"], fam.carrier(), "limit");
      const auto cert = io::order_certificate_from_json(j["order_certificate"], fam.carrier());
      if (const auto bad = replay_order_certificate(fam, cand, cert))
        throw InvariantError("order certificate fails at member " + std::to_string(*bad));
      *s.out << "verified order certificate with " << cert.thresholds.size() << " regulators\n";
      return kOk;
    }
    if (j.contains("uniform_certificate") && !j["uniform_certificate"].is_null()) {
      const auto cert = io::uniform_certificate_from_json(j["uniform_certificate"]);
      const std::uint64_t upto = std::min<std::uint64_t>(fam.horizon(), std::max<std::uint64_t>(cert.eps.size() + 1, 2));
      if (const auto bad = replay_uniform_certificate(fam, cert, upto))
        throw InvariantError("uniform certificate fails at member " + std::to_string(*bad));
      *s.out << "verified uniform Cauchy certificate up to member " << upto << "\n";
      return kOk;
    }
    throw InputError(a.certificate + ": no replayable certificate found");
  }
  throw InputError("verify needs --witness or --certificate");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"latticelab: convergence verdicts, witnesses and counterexamples on finite lattice models", "latticelab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", LATTICELAB_VERSION);
  Session s;
  s.out = &out;

  MetricArgs ma;
  auto* metric = app.add_subcommand("metric", "Isolation radii, discreteness constant and delta trend");
  metric->add_option("--space", ma.space, "Distance or coordinates CSV");
  metric->add_option("--format", ma.format, "distance-csv or coords-csv (default: sniffed)");
  metric->add_option("--refinement", ma.refinement, "caseA or caseB");
  metric->add_option("--levels", ma.levels, "Refinement levels N")->delimiter(',');
  metric->add_option("--scale", ma.params.scale, "CaseA scale");
  metric->add_option("--separation", ma.params.separation, "CaseB pair separation");
  add_common(metric, s);

  EnvelopeArgs ea;
  auto* envelope = app.add_subcommand("envelope", "Inf-convolution table: n, alpha_n, achieved error, Lipschitz constant");
  envelope->add_option("--space", ea.space, "Distance or coordinates CSV");
  envelope->add_option("--format", ea.format, "distance-csv or coords-csv");
  envelope->add_option("--g", ea.g, "Function CSV (label,value)");
  envelope->add_option("--sqrt-grid", ea.sqrt_grid, "g = sqrt on {j/m^2 : j <= m^2}");
  envelope->add_option("--N", ea.N, "g = sqrt(dist(., A)) meet 1 on a refinement level");
  envelope->add_option("--refinement", ea.refinement, "caseA or caseB (with --N)");
  envelope->add_option("--ns", ea.ns, "Regularisation parameters (default 1,2,4,...,256)")->delimiter(',');
  envelope->add_option("--alpha", ea.alpha, "pairwise (exact on the data) or modulus (error_bound on a curve)");
  add_common(envelope, s);

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "Convergence verdict for a family");
  check->add_option("--family", ca.family, "Family JSON")->required();
  check->add_option("--mode", ca.mode, "order, uo, buo, buo-cauchy, equivalence, norm-bound");
  check->add_option("--candidate", ca.candidate, "Candidate limit JSON (default: pointwise limit)");
  check->add_option("--policy", ca.policy, "certificate, sampled or sampled:count=N,max_len=L");
  check->add_option("--include", ca.include, "Subsequences evaluated first: '1,2,5;3,8,9'");
  check->add_option("--tag", ca.tag, "c0, lp:P, linf, lipb, bounded");
  check->add_option("--settle-fraction", ca.settle_fraction, "Judge members n > fraction * horizon");
  add_common(check, s);

  WitnessArgs wa;
  auto* witness = app.add_subcommand("witness", "Extract non-order-boundedness witnesses");
  witness->require_subcommand(1);
  auto* jumps = witness->add_subcommand("jumps", "Big-jump witness");
  auto* blocks = witness->add_subcommand("blocks", "Disjoint l_p block witness");
  for (auto* sub : {jumps, blocks}) {
    sub->add_option("--family", wa.family, "Family JSON")->required();
    sub->add_option("--count", wa.count, "Pairs or blocks requested")->capture_default_str();
    sub->add_option("--constants", wa.constants, "eps-factor=3,tail-budget=0.25,block-mass=2");
    sub->add_option("--tag", wa.tag, "Space for the refutation certificate");
    add_common(sub, s);
  }
  jumps->add_option("--eps", wa.eps, "Jump threshold")->capture_default_str();
  jumps->add_option("--coords", wa.coords, "Target coordinate set A (default: all stored)")->delimiter(',');
  blocks->add_option("--p", wa.p, "Exponent p >= 1")->capture_default_str();

  GenerateArgs ga;
  auto* generate = app.add_subcommand("generate", "Counterexample scenarios as family JSON");
  generate->require_subcommand(1);
  std::vector<std::pair<std::string, CLI::App*>> gens;
  for (const char* what : {"hat", "lip", "harmonic", "step", "escape"}) {
    auto* sub = generate->add_subcommand(what, std::string("Generate the ") + what + " scenario");
    add_common(sub, s);
    gens.emplace_back(what, sub);
  }
  for (auto* sub : {gens[0].second, gens[1].second, gens[4].second}) {
    sub->add_option("--refinement", ga.refinement, "caseA or caseB")->capture_default_str();
    sub->add_option("--scale", ga.params.scale, "CaseA scale");
    sub->add_option("--separation", ga.params.separation, "CaseB pair separation");
  }
  for (auto* sub : {gens[0].second, gens[1].second}) {
    sub->add_option("--N", ga.N, "Refinement level")->capture_default_str();
    sub->add_option("--space", ga.space, "User metric instead of the built-in refinement");
    sub->add_option("--format", ga.format, "distance-csv or coords-csv");
    sub->add_option("--x0", ga.x0, "Accumulating point label (with --space)");
  }
  for (auto* sub : {gens[1].second, gens[4].second}) sub->add_option("--n-max", ga.n_max, "Envelopes computed")->capture_default_str();
  gens[2].second->add_option("--exponent", ga.exponent, "x(j) = j^-exponent")->capture_default_str();
  gens[3].second->add_option("--height", ga.height, "Step height")->capture_default_str();
  for (auto* sub : {gens[2].second, gens[3].second})
    sub->add_option("--prefix", ga.prefix, "Stored coordinates")->capture_default_str();
  gens[4].second->add_option("--levels", ga.levels, "Refinement levels N (at least 3)")->delimiter(',')->required();
  gens[4].second->add_option("--of", ga.escape_kind, "hat or lip")->capture_default_str();

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Replay a stored witness or certificate against raw data");
  verify->add_option("--witness", va.witness, "Witness JSON");
  verify->add_option("--certificate", va.certificate, "Verdict JSON carrying a certificate");
  verify->add_option("--family", va.family, "Family JSON")->required();
  add_common(verify, s, false);

  std::vector<const char*> argv{"latticelab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (*metric) {
      s.command = "metric";
      return cmd_metric(s, ma);
    }
    if (*envelope) {
      s.command = "envelope";
      return cmd_envelope(s, ea);
    }
    if (*check) {
      s.command = "check";
      return cmd_check(s, ca);
    }
    if (*jumps || *blocks) {
      s.command = *jumps ? "witness jumps" : "witness blocks";
      return cmd_witness(s, wa, static_cast<bool>(*jumps));
    }
    for (const auto& [what, sub] : gens)
      if (*sub) {
        s.command = "generate " + what;
        return cmd_generate(s, ga, what);
      }
    if (*verify) {
      s.command = "verify";
      return cmd_verify(s, va);
    }
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const InvariantError& e) {
    err << "invariant breach: " << e.what() << "\n";
    return kInvariant;
  } catch (const nlohmann::json::exception& e) {
    err << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInvariant;
  }
  return kInput;
}

}  // namespace latticelab::cli
