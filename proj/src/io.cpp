#include "latticelab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

namespace latticelab::io {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kMaterialiseLimit = 100000;

// ---------------------------------------------------------------- CSV

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct CsvLine {
  std::size_t number = 0;
  std::vector<std::string> cells;
};

std::vector<CsvLine> split_csv(std::string_view text) {
  std::vector<CsvLine> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    CsvLine l{line_no, {}};
    while (true) {
      const auto comma = line.find(',');
      l.cells.emplace_back(trim(line.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      line = line.substr(comma + 1);
    }
    out.push_back(std::move(l));
  }
  return out;
}

std::string where(std::string_view source, std::size_t line, std::size_t field) {
  return std::string(source) + ": line " + std::to_string(line) + ", field " + std::to_string(field);
}

double parse_number(const std::string& cell, const std::string& at) {
  double v = 0.0;
  const char* b = cell.data();
  const char* e = b + cell.size();
  if (b != e && *b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || cell.empty()) throw InputError(at + ": '" + cell + "' is not a decimal number");
  if (!std::isfinite(v)) throw InputError(at + ": non-finite value '" + cell + "'");
  return v;
}

// ---------------------------------------------------------------- JSON helpers

const json& need(const json& j, const char* key, const std::string& at) {
  if (!j.is_object()) throw InputError(at + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw InputError(at + ": missing field '" + key + "'");
  return *it;
}

json jnum(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double get_double(const json& j, const std::string& at) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw InputError(at + ": expected a number");
}

std::uint64_t get_uint(const json& j, const std::string& at) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  throw InputError(at + ": expected a non-negative integer");
}

std::string get_string(const json& j, const std::string& at) {
  if (!j.is_string()) throw InputError(at + ": expected a string");
  return j.get<std::string>();
}

std::vector<double> get_doubles(const json& j, const std::string& at) {
  if (!j.is_array()) throw InputError(at + ": expected an array");
  std::vector<double> v;
  v.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(get_double(j[i], at + "[" + std::to_string(i) + "]"));
  return v;
}

std::vector<std::uint64_t> get_uints(const json& j, const std::string& at) {
  if (!j.is_array()) throw InputError(at + ": expected an array");
  std::vector<std::uint64_t> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(get_uint(j[i], at + "[" + std::to_string(i) + "]"));
  return v;
}

json opt_elem(const std::optional<LatticeElement>& x) { return x ? to_json(*x) : json(nullptr); }

Monotonicity parse_monotone(const std::string& s, const std::string& at) {
  if (s == "none") return Monotonicity::None;
  if (s == "decreasing") return Monotonicity::Decreasing;
  if (s == "increasing") return Monotonicity::Increasing;
  throw InputError(at + ": monotone must be none, decreasing or increasing");
}

NormGrowth parse_growth(const std::string& s, const std::string& at) {
  if (s == "undeclared") return NormGrowth::Undeclared;
  if (s == "bounded") return NormGrowth::Bounded;
  if (s == "unbounded") return NormGrowth::Unbounded;
  throw InputError(at + ": norm_growth must be undeclared, bounded or unbounded");
}

bool known_generator(const std::string& name) {
  static const char* names[] = {"harmonic", "step", "reciprocal", "alternating", "scaled_unit",
                                "affine_approach", "gap_norm", "hat", "inf-convolution"};
  return std::find(std::begin(names), std::end(names), name) != std::end(names);
}

SequenceFamily rebuild_lip(const json& params, const Carrier& carrier, const std::string& at) {
  if (!carrier.is_metric()) throw InputError(at + ": inf-convolution needs a metric carrier");
  RefinementLevel lvl;
  lvl.kind = parse_refinement_kind(get_string(need(params, "kind", at), at + ".kind"));
  lvl.N = get_uint(need(params, "N", at), at + ".N");
  lvl.space = carrier.space_ptr();
  lvl.model = params.contains("model") ? get_string(params["model"], at + ".model") : "user metric";
  const auto& sp = *lvl.space;
  if (lvl.kind == RefinementKind::CaseA) {
    lvl.x0 = sp.index_of(get_string(need(params, "x0", at), at + ".x0"));
    lvl.escape_scale = isolation_radius(sp, lvl.x0);
  } else {
    const auto& pairs = need(params, "pairs", at);
    if (!pairs.is_array() || pairs.empty()) throw InputError(at + ".pairs: expected a non-empty array");
    lvl.escape_scale = kInf;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto p = at + ".pairs[" + std::to_string(i) + "]";
      if (!pairs[i].is_array() || pairs[i].size() != 2) throw InputError(p + ": expected [a, b]");
      const auto a = sp.index_of(get_string(pairs[i][0], p)), b = sp.index_of(get_string(pairs[i][1], p));
      lvl.pairs.emplace_back(a, b);
      lvl.escape_scale = std::min(lvl.escape_scale, sp.distance(a, b));
    }
  }
  lvl.delta = discreteness_constant(sp);
  const auto n_max = get_uint(need(params, "n_max", at), at + ".n_max");
  return lip_counterexample(lvl, n_max).g_family;
}

}  // namespace

// ---------------------------------------------------------------- files, digests

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw InvariantError("SHA-256 computation failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

// ---------------------------------------------------------------- CSV ingest

FiniteMetricSpace parse_distance_csv(std::string_view text, std::string_view source) {
  const auto lines = split_csv(text);
  if (lines.empty()) throw InputError(std::string(source) + ": empty distance CSV");
  auto header = lines[0].cells;
  const bool row_labels = !header.empty() && header[0].empty();
  if (row_labels) header.erase(header.begin());
  const std::size_t n = header.size();
  for (std::size_t i = 0; i < n; ++i)
    if (header[i].empty()) throw InputError(where(source, lines[0].number, i + 1) + ": empty label");
  if (lines.size() - 1 != n)
    throw InputError(std::string(source) + ": " + std::to_string(n) + " labels but " + std::to_string(lines.size() - 1) +
                     " body rows");
  std::vector<std::vector<double>> m(n, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const auto& l = lines[r + 1];
    std::size_t off = 0;
    if (row_labels || l.cells.size() == n + 1) {
      if (l.cells.empty() || l.cells[0] != header[r])
        throw InputError(where(source, l.number, 1) + ": row label '" + (l.cells.empty() ? "" : l.cells[0]) +
                         "' does not match header label '" + header[r] + "'");
      off = 1;
    }
    if (l.cells.size() != n + off)
      throw InputError(where(source, l.number, l.cells.size()) + ": expected " + std::to_string(n) + " distances, got " +
                       std::to_string(l.cells.size() - off));
    for (std::size_t c = 0; c < n; ++c) m[r][c] = parse_number(l.cells[c + off], where(source, l.number, c + off + 1));
  }
  return FiniteMetricSpace::from_matrix(m, header);
}

FiniteMetricSpace parse_coords_csv(std::string_view text, std::string_view source) {
  const auto lines = split_csv(text);
  if (lines.empty()) throw InputError(std::string(source) + ": empty coordinates CSV");
  const auto& header = lines[0].cells;
  if (header.size() < 2 || header[0] != "label")
    throw InputError(where(source, lines[0].number, 1) + ": header must be 'label,x1,...'");
  const std::size_t dim = header.size() - 1;
  std::vector<std::vector<double>> pts;
  std::vector<std::string> labels;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& l = lines[r];
    if (l.cells.size() != dim + 1)
      throw InputError(where(source, l.number, l.cells.size()) + ": expected a label and " + std::to_string(dim) +
                       " coordinates");
    if (l.cells[0].empty()) throw InputError(where(source, l.number, 1) + ": empty label");
    labels.push_back(l.cells[0]);
    std::vector<double> p(dim);
    for (std::size_t c = 0; c < dim; ++c) p[c] = parse_number(l.cells[c + 1], where(source, l.number, c + 2));
    pts.push_back(std::move(p));
  }
  if (pts.empty()) throw InputError(std::string(source) + ": no points");
  return FiniteMetricSpace::from_coordinates(pts, std::move(labels));
}

LatticeElement parse_function_csv(std::string_view text, const Carrier& carrier, std::string_view source) {
  const auto& sp = carrier.space();
  const auto lines = split_csv(text);
  if (lines.empty() || lines[0].cells.size() != 2 || lines[0].cells[0] != "label")
    throw InputError(std::string(source) + ": header must be 'label,value'");
  std::vector<double> v(sp.size(), 0.0);
  std::vector<char> seen(sp.size(), 0);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& l = lines[r];
    if (l.cells.size() != 2) throw InputError(where(source, l.number, l.cells.size()) + ": expected label,value");
    const auto idx = sp.find(l.cells[0]);
    if (!idx) throw InputError(where(source, l.number, 1) + ": unknown label '" + l.cells[0] + "'");
    if (seen[*idx]) throw InputError(where(source, l.number, 1) + ": duplicate label '" + l.cells[0] + "'");
    seen[*idx] = 1;
    v[*idx] = parse_number(l.cells[1], where(source, l.number, 2));
  }
  for (std::size_t i = 0; i < sp.size(); ++i)
    if (!seen[i]) throw InputError(std::string(source) + ": no value for label '" + sp.label(i) + "'");
  return LatticeElement(carrier, std::move(v));
}

Format parse_format(std::string_view text) {
  if (text == "distance-csv") return Format::DistanceCsv;
  if (text == "coords-csv") return Format::CoordsCsv;
  if (text == "family-json") return Format::FamilyJson;
  throw InputError("unknown format '" + std::string(text) + "' (expected distance-csv, coords-csv, family-json)");
}

FiniteMetricSpace parse_space(std::string_view text, std::string_view source, std::optional<Format> format) {
  if (!format) {
    const auto lines = split_csv(text);
    format = !lines.empty() && !lines[0].cells.empty() && lines[0].cells[0] == "label" ? Format::CoordsCsv
                                                                                       : Format::DistanceCsv;
  }
  if (*format == Format::CoordsCsv) return parse_coords_csv(text, source);
  if (*format == Format::DistanceCsv) return parse_distance_csv(text, source);
  throw InputError(std::string(source) + ": a space must be distance-csv or coords-csv");
}

// ---------------------------------------------------------------- lattice objects

json to_json(const TailDescriptor& t) {
  if (t.is_none()) return {{"kind", "none"}};
  const auto& segs = t.segments();
  if (segs.size() == 1) {
    const auto& s = segs[0];
    if (s.scale == 0.0) return {{"kind", "zero"}};
    if (s.exponent == 0.0) return {{"kind", "constant"}, {"value", s.scale}};
    return {{"kind", "power"}, {"exponent", s.exponent}, {"scale", s.scale}};
  }
  json arr = json::array();
  for (const auto& s : segs)
    arr.push_back({{"first", s.first},
                   {"last", s.last == kInfiniteIndex ? json(nullptr) : json(s.last)},
                   {"scale", s.scale},
                   {"exponent", s.exponent}});
  return {{"kind", "piecewise"}, {"segments", std::move(arr)}};
}

TailDescriptor tail_from_json(const json& j, const std::string& at) {
  const auto kind = get_string(need(j, "kind", at), at + ".kind");
  if (kind == "none") return TailDescriptor::none();
  if (kind == "zero") return TailDescriptor::zero();
  if (kind == "constant") return TailDescriptor::constant(get_double(need(j, "value", at), at + ".value"));
  if (kind == "power") {
    const double scale = j.contains("scale") ? get_double(j["scale"], at + ".scale") : 1.0;
    return TailDescriptor::power(get_double(need(j, "exponent", at), at + ".exponent"), scale);
  }
  if (kind == "piecewise") {
    const auto& arr = need(j, "segments", at);
    if (!arr.is_array()) throw InputError(at + ".segments: expected an array");
    std::vector<TailSegment> segs;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto p = at + ".segments[" + std::to_string(i) + "]";
      TailSegment s;
      s.first = get_uint(need(arr[i], "first", p), p + ".first");
      const auto& last = need(arr[i], "last", p);
      s.last = last.is_null() ? kInfiniteIndex : get_uint(last, p + ".last");
      s.scale = get_double(need(arr[i], "scale", p), p + ".scale");
      s.exponent = get_double(need(arr[i], "exponent", p), p + ".exponent");
      segs.push_back(s);
    }
    return TailDescriptor::piecewise(std::move(segs));
  }
  throw InputError(at + ".kind: unknown tail kind '" + kind + "'");
}

json to_json(const Carrier& c) {
  if (!c.is_metric()) return {{"kind", "index-set"}, {"size", c.size()}};
  const auto& sp = c.space();
  json j{{"kind", "metric"}, {"labels", sp.labels()}};
  if (sp.has_coordinates()) {
    json pts = json::array();
    for (std::size_t i = 0; i < sp.size(); ++i) {
      const auto x = sp.coordinates(i);
      pts.push_back(std::vector<double>(x.begin(), x.end()));
    }
    j["coordinates"] = std::move(pts);
  } else {
    j["distances"] = sp.distance_matrix();
  }
  return j;
}

Carrier carrier_from_json(const json& j, const std::string& at) {
  const auto kind = get_string(need(j, "kind", at), at + ".kind");
  if (kind == "index-set") return Carrier::index_set(get_uint(need(j, "size", at), at + ".size"));
  if (kind != "metric") throw InputError(at + ".kind: expected index-set or metric");
  const auto& lj = need(j, "labels", at);
  if (!lj.is_array()) throw InputError(at + ".labels: expected an array");
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < lj.size(); ++i) labels.push_back(get_string(lj[i], at + ".labels[" + std::to_string(i) + "]"));
  auto rows = [&](const char* key) {
    const auto& arr = need(j, key, at);
    if (!arr.is_array()) throw InputError(at + "." + key + ": expected an array of rows");
    std::vector<std::vector<double>> m;
    for (std::size_t i = 0; i < arr.size(); ++i) m.push_back(get_doubles(arr[i], at + "." + key + "[" + std::to_string(i) + "]"));
    if (m.size() != labels.size())
      throw InputError(at + "." + key + ": " + std::to_string(m.size()) + " rows for " + std::to_string(labels.size()) + " labels");
    return m;
  };
  if (j.contains("coordinates"))
    return Carrier::metric(std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_coordinates(rows("coordinates"), labels)));
  return Carrier::metric(std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_matrix(rows("distances"), labels)));
}

json to_json(const LatticeElement& x) {
  json j{{"values", x.values()}};
  if (!x.carrier().is_metric()) j["tail"] = to_json(x.tail());
  return j;
}

LatticeElement element_from_json(const json& j, const Carrier& carrier, const std::string& at) {
  const json& vals = j.is_array() ? j : need(j, "values", at);
  auto v = get_doubles(vals, at + ".values");
  if (v.size() != carrier.size())
    throw InputError(at + ": expected " + std::to_string(carrier.size()) + " values for the carrier, got " +
                     std::to_string(v.size()));
  if (carrier.is_metric()) return LatticeElement(carrier, std::move(v));
  const auto tail = j.is_object() && j.contains("tail") ? tail_from_json(j["tail"], at + ".tail") : TailDescriptor::zero();
  return LatticeElement(carrier, std::move(v), tail);
}

json to_json(const FamilyMetadata& m) {
  json j{{"monotone", to_string(m.monotone)},
         {"common_bound", opt_elem(m.common_bound)},
         {"norm_growth", to_string(m.norm_growth)},
         {"norm_supremum", m.norm_supremum ? jnum(*m.norm_supremum) : json(nullptr)},
         {"limit_tail", m.limit_tail ? to_json(*m.limit_tail) : json(nullptr)},
         {"dominator_tail", m.dominator_tail ? to_json(*m.dominator_tail) : json(nullptr)},
         {"verify_limit", m.verify_limit}};
  if (m.uniform) {
    json r = json::array();
    for (double v : m.uniform->r) r.push_back(jnum(v));
    j["uniform"] = {{"limit", to_json(m.uniform->limit)},
                    {"r", std::move(r)},
                    {"tail_bound", jnum(m.uniform->tail_bound)},
                    {"stationary_from", m.uniform->stationary_from ? json(*m.uniform->stationary_from) : json(nullptr)}};
  } else {
    j["uniform"] = nullptr;
  }
  return j;
}

FamilyMetadata metadata_from_json(const json& j, const Carrier& carrier, const std::string& at) {
  FamilyMetadata m;
  if (j.is_null()) return m;
  if (!j.is_object()) throw InputError(at + ": expected an object");
  auto has = [&](const char* k) { return j.contains(k) && !j[k].is_null(); };
  if (has("monotone")) m.monotone = parse_monotone(get_string(j["monotone"], at + ".monotone"), at + ".monotone");
  if (has("common_bound")) m.common_bound = element_from_json(j["common_bound"], carrier, at + ".common_bound");
  if (has("norm_growth")) m.norm_growth = parse_growth(get_string(j["norm_growth"], at + ".norm_growth"), at + ".norm_growth");
  if (has("norm_supremum")) m.norm_supremum = get_double(j["norm_supremum"], at + ".norm_supremum");
  if (has("limit_tail")) m.limit_tail = tail_from_json(j["limit_tail"], at + ".limit_tail");
  if (has("dominator_tail")) m.dominator_tail = tail_from_json(j["dominator_tail"], at + ".dominator_tail");
  if (has("verify_limit")) m.verify_limit = get_uint(j["verify_limit"], at + ".verify_limit");
  if (has("uniform")) {
    const auto& u = j["uniform"];
    const auto p = at + ".uniform";
    UniformNorms un{element_from_json(need(u, "limit", p), carrier, p + ".limit"),
                    get_doubles(need(u, "r", p), p + ".r"),
                    u.contains("tail_bound") ? get_double(u["tail_bound"], p + ".tail_bound") : 0.0,
                    std::nullopt};
    if (u.contains("stationary_from") && !u["stationary_from"].is_null())
      un.stationary_from = get_uint(u["stationary_from"], p + ".stationary_from");
    m.uniform = std::move(un);
  }
  return m;
}

// ---------------------------------------------------------------- families

json family_to_json(const SequenceFamily& f) {
  json j{{"schema_version", kSchemaVersion}, {"name", f.name()}, {"carrier", to_json(f.carrier())}, {"horizon", f.horizon()}};
  if (f.is_generator() && known_generator(f.name())) {
    j["generator"] = {{"name", f.name()}, {"params", f.params()}};
  } else {
    if (f.horizon() > kMaterialiseLimit)
      throw InputError("family '" + f.name() + "' has no serialisable generator and horizon " +
                       std::to_string(f.horizon()) + " is too long to store member by member");
    json members = json::array(), tails = json::array();
    bool same_tail = true;
    std::optional<TailDescriptor> first_tail;
    for (std::uint64_t n = 1; n <= f.horizon(); ++n) {
      const auto x = f.member(n);
      members.push_back(x.values());
      if (!f.carrier().is_metric()) {
        if (!first_tail) first_tail = x.tail();
        else if (!(x.tail() == *first_tail)) same_tail = false;
        tails.push_back(to_json(x.tail()));
      }
    }
    j["members"] = std::move(members);
    if (!f.carrier().is_metric()) {
      if (same_tail) j["tail"] = to_json(*first_tail);
      else j["tails"] = std::move(tails);
    }
  }
  j["metadata"] = to_json(f.metadata());
  return j;
}

SequenceFamily family_from_json(const json& j) {
  const std::string at = "family";
  const auto version = get_uint(need(j, "schema_version", at), at + ".schema_version");
  if (version != static_cast<std::uint64_t>(kSchemaVersion))
    throw InputError(at + ".schema_version: unsupported version " + std::to_string(version));
  const Carrier carrier = carrier_from_json(need(j, "carrier", at), at + ".carrier");
  const std::string name = j.contains("name") ? get_string(j["name"], at + ".name") : "extensional";

  if (j.contains("generator")) {
    const auto& g = j["generator"];
    const auto gname = get_string(need(g, "name", at + ".generator"), at + ".generator.name");
    const json params = g.contains("params") ? g["params"] : json::object();
    const std::string p = at + ".generator.params";
    const std::uint64_t horizon = get_uint(need(j, "horizon", at), at + ".horizon");
    auto idx_size = [&] {
      if (carrier.is_metric()) throw InputError(at + ": generator '" + gname + "' needs an index-set carrier");
      return carrier.size();
    };
    std::optional<SequenceFamily> f;
    if (gname == "harmonic")
      f = harmonic_truncation(get_double(need(params, "exponent", p), p + ".exponent"), idx_size(), horizon);
    else if (gname == "step")
      f = step_family(get_double(need(params, "height", p), p + ".height"), idx_size(), horizon);
    else if (gname == "reciprocal") f = reciprocal_family(idx_size(), horizon);
    else if (gname == "alternating") f = alternating_family(idx_size(), horizon);
    else if (gname == "scaled_unit") f = scaled_unit_family(idx_size(), horizon);
    else if (gname == "affine_approach") f = affine_approach_family(idx_size(), horizon);
    else if (gname == "gap_norm") f = gap_norm_family(idx_size(), horizon);
    else if (gname == "hat") {
      if (!carrier.is_metric()) throw InputError(at + ": generator 'hat' needs a metric carrier");
      f = hat_family(carrier.space_ptr(), get_string(need(params, "x0", p), p + ".x0"), horizon);
    } else if (gname == "inf-convolution") {
      f = rebuild_lip(params, carrier, p);
      if (f->horizon() != horizon) f = f->with_horizon(horizon);
    } else {
      throw InputError(at + ".generator.name: unknown generator '" + gname + "'");
    }
    if (params.contains("prefix") && get_uint(params["prefix"], p + ".prefix") != carrier.size())
      throw InputError(p + ".prefix: does not match the carrier size " + std::to_string(carrier.size()));
    return *f;
  }

  const auto& members = need(j, "members", at);
  if (!members.is_array() || members.empty()) throw InputError(at + ".members: expected a non-empty array");
  std::optional<TailDescriptor> shared;
  const json* tails = nullptr;
  if (j.contains("tails")) {
    tails = &j["tails"];
    if (!tails->is_array() || tails->size() != members.size())
      throw InputError(at + ".tails: expected one tail per member (" + std::to_string(members.size()) + ")");
  } else if (j.contains("tail")) {
    shared = tail_from_json(j["tail"], at + ".tail");
  }
  if (carrier.is_metric() && (tails || shared)) throw InputError(at + ": tails only apply to index-set carriers");
  std::vector<LatticeElement> xs;
  xs.reserve(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto p = at + ".members[" + std::to_string(i) + "]";
    auto v = get_doubles(members[i], p);
    if (v.size() != carrier.size())
      throw InputError(p + ": member " + std::to_string(i + 1) + " has " + std::to_string(v.size()) +
                       " values but the carrier has " + std::to_string(carrier.size()));
    if (carrier.is_metric()) {
      xs.emplace_back(carrier, std::move(v));
    } else {
      auto t = tails ? tail_from_json((*tails)[i], at + ".tails[" + std::to_string(i) + "]")
                     : shared.value_or(TailDescriptor::zero());
      xs.emplace_back(carrier, std::move(v), std::move(t));
    }
  }
  if (j.contains("horizon") && get_uint(j["horizon"], at + ".horizon") != xs.size())
    throw InputError(at + ".horizon: " + std::to_string(get_uint(j["horizon"], at + ".horizon")) + " but " +
                     std::to_string(xs.size()) + " members are stored");
  auto meta = metadata_from_json(j.contains("metadata") ? j["metadata"] : json(nullptr), carrier, at + ".metadata");
  return SequenceFamily::extensional(std::move(xs), std::move(meta), name);
}

// ---------------------------------------------------------------- verdicts and certificates

json to_json(const OrderCertificate& c) {
  json regs = json::array(), tb = json::array();
  for (const auto& z : c.regulators) regs.push_back(to_json(z));
  for (double v : c.tail_bounds) tb.push_back(jnum(v));
  return {{"thresholds", c.thresholds}, {"regulators", std::move(regs)}, {"tail_bounds", std::move(tb)},
          {"settle", c.settle},         {"horizon", c.horizon},          {"tolerance", c.tolerance}};
}

OrderCertificate order_certificate_from_json(const json& j, const Carrier& carrier) {
  const std::string at = "order_certificate";
  OrderCertificate c;
  c.thresholds = get_uints(need(j, "thresholds", at), at + ".thresholds");
  const auto& regs = need(j, "regulators", at);
  if (!regs.is_array()) throw InputError(at + ".regulators: expected an array");
  for (std::size_t i = 0; i < regs.size(); ++i)
    c.regulators.push_back(element_from_json(regs[i], carrier, at + ".regulators[" + std::to_string(i) + "]"));
  c.tail_bounds = get_doubles(need(j, "tail_bounds", at), at + ".tail_bounds");
  c.settle = get_uint(need(j, "settle", at), at + ".settle");
  c.horizon = get_uint(need(j, "horizon", at), at + ".horizon");
  c.tolerance = get_double(need(j, "tolerance", at), at + ".tolerance");
  if (c.regulators.size() != c.thresholds.size()) throw InvariantError(at + ": regulators and thresholds differ in length");
  return c;
}

json to_json(const UniformCauchyCertificate& c) {
  json eps = json::array();
  for (double v : c.eps) eps.push_back(jnum(v));
  return {{"eps", std::move(eps)},
          {"stationary_from", c.stationary_from ? json(*c.stationary_from) : json(nullptr)},
          {"settle", c.settle},
          {"tolerance", c.tolerance}};
}

UniformCauchyCertificate uniform_certificate_from_json(const json& j) {
  const std::string at = "uniform_certificate";
  UniformCauchyCertificate c;
  c.eps = get_doubles(need(j, "eps", at), at + ".eps");
  if (j.contains("stationary_from") && !j["stationary_from"].is_null())
    c.stationary_from = get_uint(j["stationary_from"], at + ".stationary_from");
  c.settle = get_uint(need(j, "settle", at), at + ".settle");
  c.tolerance = get_double(need(j, "tolerance", at), at + ".tolerance");
  if (c.eps.empty()) throw InvariantError(at + ": empty eps sequence");
  return c;
}

json to_json(const ConvergenceVerdict& v) {
  json j{{"mode", to_string(v.mode)},
         {"outcome", to_string(v.outcome)},
         {"positive", v.positive},
         {"summary", v.summary},
         {"tolerance", v.tolerance},
         {"horizon", v.horizon},
         {"settle", v.settle},
         {"seed", v.seed},
         {"tag", v.tag ? json(v.tag->name()) : json(nullptr)},
         {"limit", opt_elem(v.limit)},
         {"dominator", opt_elem(v.dominator)},
         {"bound_M", v.bound_M ? jnum(*v.bound_M) : json(nullptr)},
         {"order_certificate", v.order_certificate ? to_json(*v.order_certificate) : json(nullptr)},
         {"uniform_certificate", v.uniform_certificate ? to_json(*v.uniform_certificate) : json(nullptr)}};
  if (v.monotone_certificate) {
    const auto& m = *v.monotone_certificate;
    j["monotone_certificate"] = {{"direction", to_string(m.direction)},
                                 {"bound", to_json(m.bound)},
                                 {"tag", m.tag.name()},
                                 {"membership_reason", m.membership_reason}};
  } else {
    j["monotone_certificate"] = nullptr;
  }
  if (v.stuck) {
    j["stuck"] = {{"coordinate", v.stuck->coordinate},
                  {"value", jnum(v.stuck->value)},
                  {"member", v.stuck->member},
                  {"probe", v.stuck->probe}};
  } else {
    j["stuck"] = nullptr;
  }
  if (v.failure) {
    j["failure"] = {{"subsequence", v.failure->subsequence},
                    {"position", v.failure->position},
                    {"coordinate", v.failure->coordinate},
                    {"magnitude", jnum(v.failure->magnitude)},
                    {"positional", v.failure->positional}};
  } else {
    j["failure"] = nullptr;
  }
  if (v.sampled) {
    const auto& s = *v.sampled;
    j["sampled"] = {{"label", "sampled subsequence budget (not a proof)"},
                    {"count", s.count},
                    {"max_len", s.max_len},
                    {"seed", s.seed},
                    {"evaluated", s.evaluated},
                    {"included", s.included},
                    {"settle", s.settle}};
  } else {
    j["sampled"] = nullptr;
  }
  j["notes"] = v.notes;
  json parts = json::array();
  for (const auto& p : v.parts) parts.push_back(to_json(p));
  j["parts"] = std::move(parts);
  return j;
}

// ---------------------------------------------------------------- witnesses

json to_json(const JumpWitness& w) {
  json log = json::array();
  for (const auto& s : w.log)
    log.push_back({{"n", s.n}, {"e_size", s.e_size}, {"f_size", s.f_size}, {"e_set", s.e_set}, {"f_set", s.f_set},
                   {"chosen", s.chosen}});
  return {{"schema_version", kSchemaVersion},
          {"type", "jump-witness"},
          {"eps", w.eps},
          {"eps_factor", w.eps_factor},
          {"indices", w.indices},
          {"coordinates", w.coordinates},
          {"jump_values", w.jump_values},
          {"horizon", w.horizon},
          {"relabelled", w.relabelled},
          {"caveat", w.caveat},
          {"log", std::move(log)}};
}

JumpWitness jump_witness_from_json(const json& j) {
  const std::string at = "witness";
  if (get_string(need(j, "type", at), at + ".type") != "jump-witness") throw InputError(at + ".type: expected jump-witness");
  JumpWitness w;
  w.eps = get_double(need(j, "eps", at), at + ".eps");
  if (j.contains("eps_factor")) w.eps_factor = get_double(j["eps_factor"], at + ".eps_factor");
  w.indices = get_uints(need(j, "indices", at), at + ".indices");
  w.coordinates = get_uints(need(j, "coordinates", at), at + ".coordinates");
  w.jump_values = get_doubles(need(j, "jump_values", at), at + ".jump_values");
  if (j.contains("horizon")) w.horizon = get_uint(j["horizon"], at + ".horizon");
  if (j.contains("caveat") && j["caveat"].is_string()) w.caveat = j["caveat"].get<std::string>();
  return w;
}

json to_json(const BlockWitness& w) {
  json blocks = json::array();
  for (const auto& [k, l] : w.blocks) blocks.push_back({k, l});
  return {{"schema_version", kSchemaVersion},
          {"type", "block-witness"},
          {"p", w.p},
          {"constants",
           {{"eps_factor", w.constants.eps_factor}, {"tail_budget", w.constants.tail_budget}, {"block_mass", w.constants.block_mass}}},
          {"indices", w.indices},
          {"blocks", std::move(blocks)},
          {"block_norms", w.block_norms},
          {"limit_norms", w.limit_norms},
          {"horizon", w.horizon}};
}

BlockWitness block_witness_from_json(const json& j) {
  const std::string at = "witness";
  if (get_string(need(j, "type", at), at + ".type") != "block-witness") throw InputError(at + ".type: expected block-witness");
  BlockWitness w;
  w.p = get_double(need(j, "p", at), at + ".p");
  w.indices = get_uints(need(j, "indices", at), at + ".indices");
  const auto& blocks = need(j, "blocks", at);
  if (!blocks.is_array()) throw InputError(at + ".blocks: expected an array");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto p = at + ".blocks[" + std::to_string(i) + "]";
    if (!blocks[i].is_array() || blocks[i].size() != 2) throw InputError(p + ": expected [k, l]");
    w.blocks.emplace_back(get_uint(blocks[i][0], p), get_uint(blocks[i][1], p));
  }
  w.block_norms = get_doubles(need(j, "block_norms", at), at + ".block_norms");
  if (j.contains("limit_norms")) w.limit_norms = get_doubles(j["limit_norms"], at + ".limit_norms");
  if (j.contains("horizon")) w.horizon = get_uint(j["horizon"], at + ".horizon");
  return w;
}

json to_json(const RefutationCertificate& c) {
  json j{{"kind", c.kind}, {"tag", c.tag.name()}, {"count", c.count}};
  if (c.kind == "jump") {
    j["lower_bound"] = c.lower_bound;
    j["coordinates"] = c.coordinates;
  } else {
    j["norm_lower_bound"] = c.norm_lower_bound;
    j["witnessed_norm"] = c.witnessed_norm;
  }
  j["statement"] = c.statement;
  return j;
}

// ---------------------------------------------------------------- reports

json to_json(const IsolationProfile& p, const FiniteMetricSpace& space) {
  json pts = json::array();
  for (std::size_t i = 0; i < space.size(); ++i) pts.push_back({{"label", space.label(i)}, {"isolation_radius", jnum(p.radius[i])}});
  return {{"delta", jnum(p.delta)}, {"argmin", space.size() ? json(space.label(p.argmin)) : json(nullptr)}, {"points", std::move(pts)}};
}

json to_json(const PowerLawFit& f) {
  return {{"exponent", f.exponent}, {"intercept", f.intercept}, {"r_squared", f.r_squared}, {"residuals", f.residuals}};
}

json to_json(const EscapeReport& r) {
  json levels = json::array();
  for (const auto& e : r.levels)
    levels.push_back({{"N", e.N},
                      {"escape_scale", jnum(e.escape_scale)},
                      {"delta", jnum(e.delta)},
                      {"omega_at_escape", e.omega_at_escape},
                      {"omega_at_delta", e.omega_at_delta},
                      {"lipschitz", jnum(e.lipschitz)},
                      {"limit_reached", e.limit_reached}});
  return {{"kind", r.kind},
          {"tag", r.tag.name()},
          {"levels", std::move(levels)},
          {"fit_escape", r.fit_escape ? to_json(*r.fit_escape) : json(nullptr)},
          {"fit_delta", r.fit_delta ? to_json(*r.fit_delta) : json(nullptr)},
          {"diverges", r.diverges},
          {"trend", r.trend},
          {"notes", r.notes}};
}

json to_json(const LipCounterexample& c) {
  json b = json::array();
  for (std::size_t i = 0; i < c.b.size(); ++i)
    b.push_back({{"label", c.b[i]},
                 {"t", c.t[i]},
                 {"a_prime", c.a_prime[i]},
                 {"ratio", c.ratios[i]},
                 {"lower_bound", 1.0 / (2.0 * std::sqrt(c.t[i]))}});
  json env = json::array();
  for (const auto& e : c.envelopes)
    env.push_back({{"n", e.n},
                   {"alpha_n", e.alpha_n},
                   {"achieved_error", e.achieved_error},
                   {"lipschitz_constant", e.lipschitz_constant},
                   {"alpha_method", e.alpha_method}});
  return {{"model", c.model},
          {"kind", to_string(c.level.kind)},
          {"N", c.level.N},
          {"escape_scale", c.level.escape_scale},
          {"delta", c.level.delta},
          {"A", c.A},
          {"b", std::move(b)},
          {"lipschitz_g", c.lipschitz_g},
          {"n_star", c.n_star},
          {"envelopes", std::move(env)},
          {"certificate", to_json(c.certificate)}};
}

json parse_json(std::string_view text, std::string_view source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw InputError(std::string(source) + ": invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace latticelab::io
