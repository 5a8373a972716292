#include "fgff/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <random>
#include <regex>
#include <sstream>

#include "fgff/combinatorics.hpp"
#include "fgff/constants.hpp"
#include "fgff/cumulants.hpp"
#include "fgff/grassmann.hpp"
#include "fgff/moments.hpp"
#include "fgff/samplers.hpp"
#include "fgff/scaling.hpp"

namespace fgff::cli {

namespace {

using Row = nlohmann::ordered_json;

enum class Format { Csv, Jsonl };

class Table {
 public:
  Table(std::string schema, std::vector<std::string> columns)
      : schema_(std::move(schema)), columns_(std::move(columns)) {}

  void add(Row row) {
    for (const auto& [k, v] : row.items())
      if (std::find(columns_.begin(), columns_.end(), k) == columns_.end())
        throw std::logic_error("row key not in table: " + k);
    rows_.push_back(std::move(row));
  }

  void write(std::ostream& os, Format f) const {
    if (f == Format::Jsonl) {
      os << Row{{"schema", schema_ + "@1"}}.dump() << '\n';
      for (const auto& r : rows_) {
        Row o;
        for (const auto& c : columns_) o[c] = r.contains(c) ? r[c] : nullptr;
        os << o.dump() << '\n';
      }
      return;
    }
    os << "#schema=" << schema_ << "@1\n";
    for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
    os << '\n';
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (i) os << ',';
        if (r.contains(columns_[i])) os << cell(r[columns_[i]]);
      }
      os << '\n';
    }
  }

 private:
  static std::string cell(const Row& v) {
    if (v.is_null()) return "";
    if (v.is_number_float()) {
      std::ostringstream s;
      s << std::setprecision(17) << v.get<double>();
      return s.str();
    }
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string q = "\"";
      for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      return q + '"';
    }
    return v.dump();
  }

  std::string schema_;
  std::vector<std::string> columns_;
  std::vector<Row> rows_;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- argument parsing helpers ----

struct LatticeArgs {
  std::string lattice = "z2";
  std::string box;
  int radius = 0;
};

FiniteLattice make_lattice(const LatticeArgs& a) {
  if (a.lattice == "tri") {
    if (a.radius < 1) throw UsageError("--lattice tri needs --radius R >= 1");
    return build_triangular_patch(a.radius);
  }
  int d = 0;
  if (a.lattice == "z2") d = 2;
  else if (a.lattice == "z3") d = 3;
  else if (a.lattice == "z4") d = 4;
  else throw UsageError("unknown lattice: " + a.lattice);
  if (a.box.empty()) throw UsageError("--box is required for hypercubic lattices");
  std::vector<int> sides;
  std::stringstream ss(a.box);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    try {
      std::size_t used = 0;
      sides.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::logic_error&) {
      throw UsageError("malformed --box: " + a.box);
    }
  }
  if (static_cast<int>(sides.size()) != d) throw UsageError("--box must list " + std::to_string(d) + " sides");
  return build_box(d, sides);
}

std::vector<std::vector<double>> parse_tuples(const std::string& s) {
  static const std::regex tuple(R"(\(([^()]*)\))");
  std::vector<std::vector<double>> out;
  for (std::sregex_iterator it(s.begin(), s.end(), tuple), end; it != end; ++it) {
    std::vector<double> t;
    std::stringstream ss((*it)[1].str());
    std::string num;
    while (std::getline(ss, num, ',')) {
      try {
        std::size_t used = 0;
        t.push_back(std::stod(num, &used));
        if (num.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(num);
      } catch (const std::logic_error&) {
        throw UsageError("malformed point list: " + s);
      }
    }
    out.push_back(std::move(t));
  }
  // anything besides tuples and separators is an error
  const std::string leftover = std::regex_replace(s, tuple, "");
  if (leftover.find_first_not_of(" ,;") != std::string::npos || out.empty())
    throw UsageError("malformed point list: " + s);
  return out;
}

std::vector<int> lattice_points(const FiniteLattice& L, const std::string& s) {
  std::vector<int> V;
  for (const auto& t : parse_tuples(s)) {
    if (static_cast<int>(t.size()) != L.kind().dim) throw UsageError("point has the wrong dimension");
    Point p;
    for (double x : t) {
      if (x != std::floor(x)) throw UsageError("lattice points need integer coordinates");
      p.push_back(static_cast<int>(x));
    }
    const int v = L.index(p);
    if (v == kGhost) throw UsageError("point lies outside the lattice: " + s);
    V.push_back(v);
  }
  return V;
}

std::vector<Vec2> continuum_points(const std::string& s) {
  std::vector<Vec2> V;
  for (const auto& t : parse_tuples(s)) {
    if (t.size() != 2) throw UsageError("continuum points are 2-dimensional");
    V.push_back({t[0], t[1]});
  }
  return V;
}

// "1/16,1/32,0.01"
std::vector<double> parse_eps(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      const auto slash = part.find('/');
      std::size_t used = 0;
      if (slash == std::string::npos) {
        out.push_back(std::stod(part, &used));
        if (used != part.size()) throw std::invalid_argument(part);
      } else {
        const std::string a = part.substr(0, slash), b = part.substr(slash + 1);
        std::size_t ua = 0, ub = 0;
        out.push_back(std::stod(a, &ua) / std::stod(b, &ub));
        if (ua != a.size() || ub != b.size()) throw std::invalid_argument(part);
      }
    } catch (const std::logic_error&) {
      throw UsageError("malformed --eps list: " + s);
    }
  }
  if (out.empty()) throw UsageError("--eps is empty");
  return out;
}

std::string points_label(const FiniteLattice& L, const std::vector<int>& V) {
  std::string s;
  for (int v : V) {
    s += '(';
    const auto p = L.point(v);
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + std::to_string(p[i]);
    s += ')';
  }
  return s;
}

FieldKind parse_field(const std::string& s) {
  try {
    return field_kind_from_string(s);
  } catch (const InvalidInput&) {
    throw UsageError("unknown --field: " + s);
  }
}

std::string ratio_string(const Rational& q) { return q.str(); }

// ---- subcommands ----

struct Shared {
  LatticeArgs lattice;
  std::string points;
  std::string out;
  std::string format = "csv";
  std::string config;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

void add_lattice_options(CLI::App* sub, Shared& s) {
  sub->add_option("--lattice", s.lattice.lattice, "z2 | z3 | z4 | tri")->check(CLI::IsMember({"z2", "z3", "z4", "tri"}));
  sub->add_option("--box", s.lattice.box, "box sides, e.g. 5x5");
  sub->add_option("--radius", s.lattice.radius, "triangular patch radius");
}

void add_output_options(CLI::App* sub, Shared& s) {
  sub->add_option("--out", s.out, "write the table to this file");
  sub->add_option("--format", s.format, "csv | jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  sub->add_option("--config", s.config, "JSON file with option values");
  sub->add_option("--threads", s.threads, "worker cap")->check(CLI::PositiveNumber);
}

// c^|Λ| candidate configurations must fit the enumeration budget
bool enumerable(const FiniteLattice& L) {
  return L.size() * std::log2(static_cast<double>(L.coordination())) <= 22;
}

Table height_prob(const Shared& s, bool exact) {
  const auto L = make_lattice(s.lattice);
  if (s.points.empty()) throw UsageError("--points is required");
  const auto V = lattice_points(L, s.points);
  Table t("height_prob", {"lattice", "points", "path", "value", "exact"});
  const Row base{{"lattice", L.kind().name()}, {"points", points_label(L, V)}};
  auto row = [&](const char* path, double value, std::optional<std::string> ex) {
    Row r = base;
    r["path"] = path;
    r["value"] = value;
    if (ex) r["exact"] = *ex;
    t.add(std::move(r));
  };
  if (exact) {
    const GreenTable<Rational> G(L);
    const Rational a = height_one_prob(G, V), b = xy_moment(G, V);
    row("determinant", a.convert_to<double>(), ratio_string(a));
    row("xy_moment", b.convert_to<double>(), ratio_string(b));
  } else {
    const GreenTable<double> G(L);
    row("determinant", height_one_prob(G, V), std::nullopt);
    row("xy_moment", xy_moment(G, V), std::nullopt);
  }
  if (enumerable(L)) {
    std::int64_t hits = 0;
    const auto total = enumerate_recurrent(L, [&](const SandpileConfig& h) {
      hits += std::all_of(V.begin(), V.end(), [&](int v) { return h[v] == 1; });
    });
    const Rational q(hits, static_cast<std::int64_t>(total));
    row("enumeration", q.convert_to<double>(), ratio_string(q));
  }
  return t;
}

Table cumulants(const Shared& s, const std::string& field_s, const std::string& path, bool exact) {
  const auto L = make_lattice(s.lattice);
  if (s.points.empty()) throw UsageError("--points is required");
  const auto V = lattice_points(L, s.points);
  const FieldKind field = parse_field(field_s);
  std::vector<CumulantPath> paths;
  if (path == "closed" || path == "both") paths.push_back(CumulantPath::ClosedForm);
  if (path == "partition" || path == "both") paths.push_back(CumulantPath::PartitionSum);
  Table t("cumulant", {"lattice", "points", "field", "n", "path", "value", "exact", "terms"});
  for (auto p : paths) {
    const CumulantReport r = exact ? make_report(GreenTable<Rational>(L), V, field, p)
                                   : make_report(GreenTable<double>(L), V, field, p);
    Row row{{"lattice", L.kind().name()}, {"points", points_label(L, V)}, {"field", to_string(field)},
            {"n", V.size()},         {"path", to_string(p)},          {"value", r.value}};
    if (!r.exact.empty()) row["exact"] = r.exact;
    row["terms"] = r.stats.term_count;
    t.add(std::move(row));
  }
  return t;
}

Table constants(const Shared& s, const std::string& evaluator, bool ledger) {
  ConstantResult c;
  std::string path = "subset_sum";
  const std::string& lat = s.lattice.lattice;
  GreenEvaluator ev = GreenEvaluator::Default;
  if (evaluator == "fourier") ev = GreenEvaluator::Fourier;
  else if (evaluator == "heat") ev = GreenEvaluator::HeatKernel;
  if (ev != GreenEvaluator::Default && lat != "z3") throw UsageError("--evaluator applies to --lattice z3 only");
  if (lat == "z2") c = c_d(2);
  else if (lat == "z3") c = c_d(3, ev), path += ev == GreenEvaluator::Fourier ? "/fourier" : "/heat_kernel";
  else if (lat == "z4") c = c_d(4);
  else c = c_t();
  if (ledger) {
    Table t("constant_ledger", {"lattice", "mask", "size", "weight", "det", "alt_sum", "contribution", "path"});
    for (const auto& term : c.terms) {
      double alt = 0;
      for (std::size_t a = 1; a < term.alt_dets.size(); ++a) alt += c.gammas[a] * term.alt_dets[a];
      t.add(Row{{"lattice", c.kind.name()}, {"mask", term.mask},       {"size", term.size},
                {"weight", term.weight},   {"det", term.det},          {"alt_sum", alt},
                {"contribution", term.contribution}, {"path", path}});
    }
    return t;
  }
  Table t("constant", {"lattice", "path", "value", "closed_form", "delta", "height_one"});
  Row r{{"lattice", c.kind.name()}, {"path", path}, {"value", c.value}};
  if (c.closed_form) {
    r["closed_form"] = *c.closed_form;
    r["delta"] = c.value - *c.closed_form;
  }
  if (lat == "z2" || lat == "tri") r["height_one"] = single_site_height_one(c);
  t.add(std::move(r));
  return t;
}

Table sample(const Shared& s, const std::string& sampler, std::int64_t steps, std::int64_t burn_in) {
  if (!s.seed) throw UsageError("sample needs an explicit --seed");
  if (steps <= 0) throw UsageError("--steps must be positive");
  const auto L = make_lattice(s.lattice);
  if (s.points.empty()) throw UsageError("--points is required");
  const auto V = lattice_points(L, s.points);
  const GreenTable<double> G(L);
  Table t("sample", {"observable", "estimate", "stderr", "n", "exact", "z", "path"});
  auto row = [&](const std::string& obs, const Estimate& e, std::int64_t n, double exact, const char* path) {
    const double z = e.stderr_ > 0 ? (e.mean - exact) / e.stderr_ : 0.0;
    t.add(Row{{"observable", obs}, {"estimate", e.mean}, {"stderr", e.stderr_}, {"n", n},
              {"exact", exact},    {"z", z},             {"path", path}});
  };
  if (sampler == "chain") {
    ChainOptions o;
    o.steps = steps;
    o.burn_in = burn_in;
    o.seed = *s.seed;
    const bool joint = V.size() >= 2;
    if (joint) o.joint.push_back(V);
    const auto st = chain_sample(L, o);
    for (int v : V) row("h1" + points_label(L, {v}), st.height_freq[v][0], st.samples, height_one_prob(G, {v}), "chain");
    if (joint) row("h1" + points_label(L, V), st.joint[0], st.samples, height_one_prob(G, V), "chain");
  } else if (sampler == "ust") {
    EdgeSet edges;
    for (int v : V) edges.push_back({v, 0});
    const auto st = ust_sample(L, steps, *s.seed, edges, s.threads);
    if (!st.all_valid) throw ConsistencyError("Wilson sampler produced an invalid tree");
    for (int v : V) row("X" + points_label(L, {v}), st.degree_field[v], st.samples, x_moment(G, {v}), "wilson");
    for (std::size_t i = 0; i < edges.size(); ++i)
      row("edge" + points_label(L, {V[i]}) + "+e0", st.edge_freq[i], st.samples, ust_contains_prob(G, {edges[i]}),
          "wilson");
  } else {
    throw UsageError("unknown --sampler: " + sampler);
  }
  return t;
}

Table scaling(const Shared& s, const std::string& field_s, const std::string& eps_s, double bump_radius,
              int subdivisions) {
  if (s.points.empty()) throw UsageError("--points is required");
  const auto V = continuum_points(s.points);
  const auto eps = parse_eps(eps_s.empty() ? "1/16,1/32,1/64" : eps_s);
  const FieldKind field = parse_field(field_s);
  Table t("scaling", {"field", "epsilon", "scaled", "target", "rel_error", "path"});
  if (bump_radius > 0) {
    std::vector<TestFunction> fns;
    for (const auto& v : V) fns.push_back({v, bump_radius, 1.0});
    SmearOptions o;
    o.subdivisions = subdivisions;
    o.threads = s.threads;
    const double target = smeared_target(field, fns, o);
    for (double e : eps) {
      const double val = smeared_cumulant(field, fns, e, o);
      t.add(Row{{"field", to_string(field)}, {"epsilon", e}, {"scaled", val}, {"target", target},
                {"rel_error", std::abs(val / target - 1)}, {"path", "smeared"}});
    }
    return t;
  }
  const auto sweep = convergence_sweep(field, V, eps);
  for (const auto& r : sweep.rows)
    t.add(Row{{"field", to_string(field)}, {"epsilon", r.epsilon}, {"scaled", r.scaled}, {"target", r.target},
              {"rel_error", r.rel_error}, {"path", "closed_form"}});
  return t;
}

// ---- verification suites: library paths checked against each other ----

struct Check {
  std::string suite, name, path;
  bool pass;
  double deviation;
};

std::vector<Check> verify_grassmann() {
  std::vector<Check> out;
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> entry(-3, 3);
  bool ok = true;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 5;
    Matrix<Rational> A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = Rational(entry(rng), 1 + (entry(rng) + 3) % 3);
    const auto alg = GrassmannAlgebra::paired(n);
    ok = ok && berezin(exp_even(quadratic_form(alg, A))) == determinant(A);
  }
  out.push_back({"grassmann", "berezin_exp_equals_det", "exact", ok, ok ? 0.0 : 1.0});
  ok = true;
  for (const auto& L : {build_box(2, {1, 1}), build_box(2, {1, 2}), build_box(2, {2, 2})}) {
    const auto alg = GrassmannAlgebra::for_lattice(L, false);
    const auto galg = GrassmannAlgebra::for_lattice(L, true);
    const std::uint64_t top = alg.top();
    for (std::uint64_t m = 0; m <= top; ++m) {
      if (std::popcount(m) % 2) continue;
      GrassmannElement<Rational> F(alg);
      F.add_term(m, Rational(1));
      ok = ok && dirichlet_state(F, L, true) == pinned_state(lift(F, galg), L, true);
    }
  }
  out.push_back({"grassmann", "pinned_equals_dirichlet", "exact", ok, ok ? 0.0 : 1.0});
  return out;
}

std::vector<Check> verify_moments() {
  const auto L = build_box(2, {2, 3});
  const GreenTable<Rational> G(L);
  std::vector<SandpileConfig> rec;
  enumerate_recurrent(L, [&](const SandpileConfig& h) { rec.push_back(h); });
  bool ok = Rational(static_cast<std::int64_t>(rec.size())) == determinant(L.neg_laplacian<Rational>());
  std::vector<std::vector<int>> sets;
  for (int a = 0; a < L.size(); ++a) {
    sets.push_back({a});
    for (int b = a + 1; b < L.size(); ++b)
      if (is_good_set(L, {a, b})) sets.push_back({a, b});
  }
  const auto alg = GrassmannAlgebra::for_lattice(L, false);
  for (const auto& V : sets) {
    std::int64_t hits = 0;
    for (const auto& h : rec) hits += std::all_of(V.begin(), V.end(), [&](int v) { return h[v] == 1; });
    const Rational freq(hits, static_cast<std::int64_t>(rec.size()));
    auto F = GrassmannElement<Rational>::one(alg);
    for (int v : V) F = F * x_field<Rational>(alg, L, v) * y_field<Rational>(alg, L, v);
    ok = ok && freq == height_one_prob(G, V) && freq == dirichlet_state(F, L, true);
  }
  return {{"moments", "height_one_triple_equality_2x3", "exact", ok, ok ? 0.0 : 1.0}};
}

std::vector<Check> verify_cumulants() {
  const auto L = build_box(2, {5, 5});
  const GreenTable<double> G(L);
  std::vector<Check> out;
  const std::vector<int> V2{L.index({1, 1}), L.index({3, 2})};
  const std::vector<int> V3{L.index({1, 1}), L.index({3, 2}), L.index({1, 3})};
  auto cmp = [&](const char* name, double a, double b) {
    const double rel = std::abs(a - b) / std::max(std::abs(b), 1e-300);
    out.push_back({"cumulants", name, "closed_form/partition_sum", rel < 1e-10, rel});
  };
  cmp("negx_n2", x_cumulant_closed(G, V2), cumulant_partition_sum(G, V2, FieldKind::NegX));
  cmp("negx_n3", x_cumulant_closed(G, V3), cumulant_partition_sum(G, V3, FieldKind::NegX));
  cmp("degree_n3", x_cumulant_closed(G, V3, FieldKind::Degree), cumulant_partition_sum(G, V3, FieldKind::Degree));
  cmp("xy_n2", xy_cumulant_closed(G, V2), cumulant_partition_sum(G, V2, FieldKind::XY));
  return out;
}

std::vector<Check> verify_stirling() {
  bool ok = true;
  for (int m = 1; m <= 10; ++m) ok = ok && stirling_alternating_sum(m) == (m == 1 ? 1 : 0);
  return {{"stirling", "alternating_sum_m1_to_10", "exact", ok, ok ? 0.0 : 1.0}};
}

std::vector<Check> verify_constants() {
  using std::numbers::pi;
  const double c2 = c_d(2).value, ct = c_t().value, sq = c_t_square_degeneration().value;
  const double d1 = std::abs(c2 - (2 / pi - 4 / (pi * pi))), d2 = std::abs(ct - ct_closed_form()),
               d3 = std::abs(sq - c2);
  return {{"constants", "c2_closed_form", "subset_sum", d1 < 1e-9, d1},
          {"constants", "ct_closed_form", "subset_sum", d2 < 1e-6, d2},
          {"constants", "square_degeneration", "subset_sum", d3 < 1e-9, d3}};
}

std::pair<Table, bool> verify(const std::string& suite) {
  std::vector<Check> checks;
  auto take = [&](const std::vector<Check>& c) { checks.insert(checks.end(), c.begin(), c.end()); };
  const bool all = suite == "all";
  if (all || suite == "grassmann") take(verify_grassmann());
  if (all || suite == "moments") take(verify_moments());
  if (all || suite == "cumulants") take(verify_cumulants());
  if (all || suite == "stirling") take(verify_stirling());
  if (all || suite == "constants") take(verify_constants());
  Table t("verify", {"suite", "check", "path", "status", "deviation"});
  bool ok = true;
  for (const auto& c : checks) {
    ok = ok && c.pass;
    t.add(Row{{"suite", c.suite}, {"check", c.name}, {"path", c.path}, {"status", c.pass ? "pass" : "fail"},
              {"deviation", c.deviation}});
  }
  return {std::move(t), ok};
}

// --config: JSON object whose keys are long option names of the subcommand
std::vector<std::string> config_args(const std::string& file, const CLI::App& sub) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot read config file: " + file);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  std::vector<std::string> out;
  for (const auto& [key, value] : j.items()) {
    if (key == "config" || !sub.get_option_no_throw("--" + key)) throw UsageError("unknown config key: " + key);
    const auto* opt = sub.get_option_no_throw("--" + key);
    if (value.is_boolean()) {
      if (opt->get_expected_min() != 0) throw UsageError("config key is not a flag: " + key);
      if (value.get<bool>()) out.push_back("--" + key);
      continue;
    }
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_number()) {
      text = value.dump();
    } else if (value.is_array()) {
      // [[x,y],...] → "(x,y),..."; [a,b] → "a,b"
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (i) text += ',';
        const auto& e = value[i];
        if (e.is_array()) {
          text += '(';
          for (std::size_t k = 0; k < e.size(); ++k) text += (k ? "," : "") + e[k].dump();
          text += ')';
        } else {
          text += e.is_string() ? e.get<std::string>() : e.dump();
        }
      }
    } else {
      throw UsageError("unsupported value for config key: " + key);
    }
    out.push_back("--" + key);
    out.push_back(text);
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fermionic free-field sandpile laboratory", "fgff"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  Shared s;
  std::string suite = "all", field = "negx", path = "both", evaluator = "default", sampler = "chain", eps;
  bool exact = false, ledger = false;
  std::int64_t steps = 0, burn_in = 1000;
  double bump_radius = 0;
  int subdivisions = 4;

  auto* v = app.add_subcommand("verify", "run built-in consistency suites");
  v->add_option("--suite", suite)->check(CLI::IsMember({"all", "grassmann", "moments", "cumulants", "stirling", "constants"}));
  add_output_options(v, s);

  auto* c = app.add_subcommand("constants", "lattice constants and their subset ledger");
  c->add_option("--lattice", s.lattice.lattice)->check(CLI::IsMember({"z2", "z3", "z4", "tri"}));
  c->add_option("--evaluator", evaluator)->check(CLI::IsMember({"default", "heat", "fourier"}));
  c->add_flag("--ledger", ledger, "print the per-subset ledger");
  add_output_options(c, s);

  auto* h = app.add_subcommand("height-prob", "joint height-one probability");
  add_lattice_options(h, s);
  h->add_option("--points", s.points, "lattice points, e.g. (1,1),(3,3)");
  h->add_flag("--exact", exact, "rational arithmetic");
  add_output_options(h, s);

  auto* k = app.add_subcommand("cumulants", "joint cumulants of the degree and height-one fields");
  add_lattice_options(k, s);
  k->add_option("--points", s.points);
  k->add_option("--field", field, "negx | degree | xy");
  k->add_option("--path", path)->check(CLI::IsMember({"closed", "partition", "both"}));
  k->add_flag("--exact", exact);
  add_output_options(k, s);

  auto* m = app.add_subcommand("sample", "Monte Carlo estimates against exact values");
  add_lattice_options(m, s);
  m->add_option("--points", s.points);
  m->add_option("--sampler", sampler)->check(CLI::IsMember({"chain", "ust"}));
  m->add_option("--steps", steps, "chain additions or number of trees");
  m->add_option("--burn-in", burn_in);
  m->add_option("--seed", s.seed);
  add_output_options(m, s);

  auto* g = app.add_subcommand("scaling", "rescaled cumulants on the unit disk");
  g->add_option("--points", s.points, "continuum points, e.g. (-0.3,0),(0.3,0)");
  g->add_option("--field", field);
  g->add_option("--eps", eps, "decreasing mesh list, e.g. 1/16,1/32,1/64");
  g->add_option("--bump-radius", bump_radius, "smear with bumps of this radius at the points");
  g->add_option("--subdivisions", subdivisions)->check(CLI::PositiveNumber);
  add_output_options(g, s);

  std::vector<std::string> args = args_in;
  try {
    // splice --config values in front of the explicit flags so the command line wins
    for (std::size_t i = 1; i < args.size(); ++i) {
      std::string file;
      std::size_t span = 0;
      if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1], span = 2;
      else if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9), span = 1;
      if (span == 0) continue;
      const CLI::App* sub = nullptr;
      for (const auto* candidate : app.get_subcommands({}))
        if (!args.empty() && candidate->get_name() == args[0]) sub = candidate;
      if (!sub) throw UsageError("--config must follow a subcommand");
      auto extra = config_args(file, *sub);
      args.erase(args.begin() + i, args.begin() + i + span);
      args.insert(args.begin() + 1, extra.begin(), extra.end());
      break;
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  const Format fmt = s.format == "jsonl" ? Format::Jsonl : Format::Csv;
  try {
    std::optional<Table> table;
    bool ok = true;
    if (*v) {
      auto [t, pass] = verify(suite);
      table.emplace(std::move(t));
      ok = pass;
    } else if (*c) {
      table.emplace(constants(s, evaluator, ledger));
    } else if (*h) {
      table.emplace(height_prob(s, exact));
    } else if (*k) {
      table.emplace(cumulants(s, field, path, exact));
    } else if (*m) {
      table.emplace(sample(s, sampler, steps, burn_in));
    } else if (*g) {
      table.emplace(scaling(s, field, eps, bump_radius, subdivisions));
    }
    if (s.out.empty()) {
      table->write(out, fmt);
    } else {
      std::ofstream f(s.out);
      if (!f) throw UsageError("cannot open --out file: " + s.out);
      table->write(f, fmt);
    }
    if (!ok) err << "verification failed\n";
    return ok ? kExitOk : kExitFailure;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const RangeError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CapacityError& e) {
    err << "capacity exceeded: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace fgff::cli
