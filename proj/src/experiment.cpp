#include "freeprod/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "freeprod/algebra.hpp"
#include "freeprod/fock.hpp"
#include "freeprod/freeness.hpp"
#include "freeprod/gamma.hpp"
#include "freeprod/modular.hpp"
#include "freeprod/smatrix.hpp"
#include "freeprod/spectral.hpp"

namespace freeprod {

namespace {

namespace fs = std::filesystem;

const std::set<std::string> kKinds = {"fock", "freeness", "modular", "spectral", "smatrix"};

const std::map<std::string, std::map<std::string, double>>& default_tolerances() {
  static const std::map<std::string, std::map<std::string, double>> t = {
      {"fock", {{"commutation", 1e-10}, {"involution", 1e-12}}},
      {"freeness", {{"moment", 1e-10}, {"claim6", 1e-10}}},
      {"modular", {{"axioms", 1e-9}, {"star", 1e-8}, {"gamma_monotone", 1e-12}}},
      {"spectral", {{"bound", 1e-9}}},
      {"smatrix", {{"direct", 1e-10}, {"norm", 1e-10}, {"support", 1e-3}, {"one_particle", 1e-10}}},
  };
  return t;
}

[[noreturn]] void parse_fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::Parse, "config " + path + ": " + msg);
}

/// Reads one JSON object, records the normalized value of every key it
/// touches and rejects keys it never touched.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) parse_fail(path_, "expected an object");
    out_ = Json::object();
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string field(const std::string& key) const { return path_ + "." + key; }

  const Json& raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) parse_fail(field(key), "missing required field");
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> def = std::nullopt) {
    used_.insert(key);
    double v;
    if (!j_.contains(key)) {
      if (!def) parse_fail(field(key), "missing required field");
      v = *def;
    } else {
      const Json& x = j_.at(key);
      if (!x.is_number()) parse_fail(field(key), "expected a number");
      v = x.get<double>();
    }
    if (!std::isfinite(v)) parse_fail(field(key), "expected a finite number");
    out_[key] = v;
    return v;
  }

  long long integer(const std::string& key, std::optional<long long> def = std::nullopt,
                    long long min = std::numeric_limits<long long>::min()) {
    used_.insert(key);
    long long v;
    if (!j_.contains(key)) {
      if (!def) parse_fail(field(key), "missing required field");
      v = *def;
    } else {
      const Json& x = j_.at(key);
      if (!x.is_number_integer()) parse_fail(field(key), "expected an integer");
      v = x.is_number_unsigned() ? static_cast<long long>(x.get<std::uint64_t>()) : x.get<long long>();
    }
    if (v < min) parse_fail(field(key), "must be >= " + std::to_string(min));
    out_[key] = v;
    return v;
  }

  std::string string(const std::string& key, std::optional<std::string> def = std::nullopt) {
    used_.insert(key);
    std::string v;
    if (!j_.contains(key)) {
      if (!def) parse_fail(field(key), "missing required field");
      v = *def;
    } else {
      if (!j_.at(key).is_string()) parse_fail(field(key), "expected a string");
      v = j_.at(key).get<std::string>();
    }
    out_[key] = v;
    return v;
  }

  bool boolean(const std::string& key, bool def) {
    used_.insert(key);
    bool v = def;
    if (j_.contains(key)) {
      if (!j_.at(key).is_boolean()) parse_fail(field(key), "expected true or false");
      v = j_.at(key).get<bool>();
    }
    out_[key] = v;
    return v;
  }

  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> def = std::nullopt) {
    used_.insert(key);
    std::vector<double> v;
    if (!j_.contains(key)) {
      if (!def) parse_fail(field(key), "missing required field");
      v = *def;
    } else {
      const Json& x = j_.at(key);
      if (!x.is_array()) parse_fail(field(key), "expected an array of numbers");
      for (const auto& e : x) {
        if (!e.is_number()) parse_fail(field(key), "expected an array of numbers");
        v.push_back(e.get<double>());
      }
    }
    out_[key] = v;
    return v;
  }

  void set(const std::string& key, Json value) { out_[key] = std::move(value); }

  Json finish() {
    for (const auto& [key, value] : j_.items())
      if (!used_.count(key)) parse_fail(field(key), "unknown key");
    return out_;
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
  Json out_;
};

const Json& empty_object() {
  static const Json j = Json::object();
  return j;
}

cplx parse_complex(const Json& x, const std::string& path) {
  if (x.is_number()) return {x.get<double>(), 0.0};
  if (x.is_array() && x.size() == 2 && x[0].is_number() && x[1].is_number())
    return {x[0].get<double>(), x[1].get<double>()};
  parse_fail(path, "expected a number or a [re, im] pair");
}

Json complex_json(cplx z) { return Json::array({z.real(), z.imag()}); }

Vec parse_vector(const Json& x, const std::string& path) {
  if (!x.is_array() || x.empty()) parse_fail(path, "expected a nonempty array");
  Vec v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_complex(x[i], path);
  return v;
}

Mat parse_matrix(const Json& x, const std::string& path) {
  if (!x.is_array() || x.empty()) parse_fail(path, "expected a nonempty array of rows");
  const auto n = x.size();
  Mat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!x[i].is_array() || x[i].size() != n) parse_fail(path, "expected a square matrix");
    for (std::size_t j = 0; j < n; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_complex(x[i][j], path);
  }
  return m;
}

Json matrix_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

// ---- per-kind parameter blocks ----------------------------------------------

Json parse_hilbert_seeds(const Json& x, const std::string& path) {
  if (!x.is_array() || x.empty()) parse_fail(path, "expected a nonempty array of seeds");
  Json out = Json::array();
  std::set<long long> labels;
  for (std::size_t i = 0; i < x.size(); ++i) {
    Reader r(x[i], path + "[" + std::to_string(i) + "]");
    const long long label = r.integer("label");
    if (!labels.insert(label).second) parse_fail(r.field("label"), "duplicate label");
    const long long dim = r.integer("dim", std::nullopt, 1);
    if (r.has("omega")) {
      const Json& om = r.raw("omega");
      if (om.is_string()) {
        const auto s = om.get<std::string>();
        if (s != "standard" && s != "random") parse_fail(r.field("omega"), "expected 'standard', 'random' or a vector");
      } else {
        const Vec v = parse_vector(om, r.field("omega"));
        if (v.size() != dim) parse_fail(r.field("omega"), "length differs from dim");
        if (std::abs(v.norm() - 1.0) > 1e-12) parse_fail(r.field("omega"), "not a unit vector");
      }
      r.set("omega", om);
    } else {
      r.set("omega", "standard");
    }
    out.push_back(r.finish());
  }
  return out;
}

Json parse_fock_params(const Json& p) {
  Reader r(p, "params");
  r.set("seeds", parse_hilbert_seeds(r.raw("seeds"), "params.seeds"));
  r.integer("max_len", 3, 2);
  r.integer("trials", 1000, 1);
  return r.finish();
}

Json parse_freeness_params(const Json& p) {
  Reader r(p, "params");
  r.set("seeds", parse_hilbert_seeds(r.raw("seeds"), "params.seeds"));
  r.integer("max_len", 3, 1);
  r.integer("trials", 10000, 0);
  r.integer("generators", 2, 1);
  r.integer("claim6_trials", 0, 0);
  return r.finish();
}

Json parse_modular_seed(const Json& x, const std::string& path) {
  Reader r(x, path);
  r.integer("label");
  const std::string algebra = r.string("algebra");
  if (algebra == "amplified") {
    const long long n = r.integer("n", std::nullopt, 1);
    const auto w = r.numbers("weights");
    if (static_cast<long long>(w.size()) != n) parse_fail(r.field("weights"), "needs n entries");
  } else if (algebra == "diagonal") {
    r.numbers("weights");
  } else if (algebra == "custom") {
    const Json& gens = r.raw("generators");
    if (!gens.is_array() || gens.empty()) parse_fail(r.field("generators"), "expected a nonempty array of matrices");
    for (std::size_t i = 0; i < gens.size(); ++i) parse_matrix(gens[i], r.field("generators") + "[" + std::to_string(i) + "]");
    r.set("generators", gens);
    const Json& om = r.raw("omega");
    parse_vector(om, r.field("omega"));
    r.set("omega", om);
  } else {
    parse_fail(r.field("algebra"), "expected 'amplified', 'diagonal' or 'custom'");
  }
  if (algebra != "custom") {
    const auto w = r.numbers("weights");
    double sum = 0.0;
    for (double v : w) {
      if (!(v > 0.0)) parse_fail(r.field("weights"), "weights must be positive");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) parse_fail(r.field("weights"), "weights must sum to 1");
  }
  return r.finish();
}

Json parse_modular_params(const Json& p) {
  Reader r(p, "params");
  const Json& seeds = r.raw("seeds");
  if (!seeds.is_array() || seeds.empty()) parse_fail("params.seeds", "expected a nonempty array of seeds");
  Json out = Json::array();
  std::set<long long> labels;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    Json s = parse_modular_seed(seeds[i], "params.seeds[" + std::to_string(i) + "]");
    if (!labels.insert(s["label"].get<long long>()).second)
      parse_fail("params.seeds[" + std::to_string(i) + "].label", "duplicate label");
    out.push_back(s);
  }
  r.set("seeds", out);
  r.integer("max_len", 3, 1);
  r.integer("words", 200, 0);
  r.integer("word_len", 3, 1);
  std::vector<double> grid = default_t_grid();
  r.numbers("t_grid", grid);
  if (r.has("gamma")) {
    Reader g(r.raw("gamma"), "params.gamma");
    const long long size = g.integer("size", std::nullopt, 2);
    const auto window = g.numbers("window");
    if (window.size() != 2 || window[0] < 0 || window[1] > static_cast<double>(size) || window[0] >= window[1])
      parse_fail(g.field("window"), "expected [begin, end) inside the matrix");
    g.integer("n_max", std::nullopt, 0);
    g.integer("labels", 2, 1);
    g.integer("max_len", 2, 1);
    r.set("gamma", g.finish());
  }
  return r.finish();
}

Json parse_spectral_params(const Json& p, const fs::path& base_dir) {
  Reader r(p, "params");
  const Json& seeds = r.raw("seeds");
  if (!seeds.is_array() || seeds.empty()) parse_fail("params.seeds", "expected a nonempty array of seeds");
  Json out = Json::array();
  std::set<long long> labels;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    Reader s(seeds[i], "params.seeds[" + std::to_string(i) + "]");
    if (!labels.insert(s.integer("label")).second) parse_fail(s.field("label"), "duplicate label");
    if (s.has("geometric") == s.has("csv")) parse_fail(s.field("geometric"), "give exactly one of 'geometric' or 'csv'");
    if (s.has("geometric")) s.integer("geometric", std::nullopt, 1);
    if (s.has("csv")) {
      fs::path path = s.string("csv");
      if (path.is_relative()) path = base_dir / path;
      if (!fs::exists(path)) parse_fail(s.field("csv"), "file not found: " + path.string());
      s.set("csv", path.string());
    }
    out.push_back(s.finish());
  }
  r.set("seeds", out);
  if (r.number("s", 1.0) <= 0.0) parse_fail("params.s", "must be positive");
  r.integer("max_len", 4, 0);
  if (r.number("cutoff", 60.0) <= 0.0) parse_fail("params.cutoff", "must be positive");
  if (r.number("split_tol", 1e-9) <= 0.0) parse_fail("params.split_tol", "must be positive");
  if (r.has("deficits")) r.numbers("deficits");
  return r.finish();
}

Json parse_packet(const Json& x, const std::string& path) {
  Reader r(x, path);
  if (r.has("rapidity") == r.has("momentum")) parse_fail(path, "give exactly one of 'rapidity' or 'momentum'");
  if (r.has("rapidity")) {
    r.number("rapidity");
    if (r.number("spread", 5.0) <= 0.0) parse_fail(r.field("spread"), "must be positive");
  } else {
    const auto m = r.numbers("momentum");
    if (m.size() != 2) parse_fail(r.field("momentum"), "expected [p0, p1]");
    const auto w = r.numbers("width", std::vector<double>{25.0, 0.0, 0.0, 25.0});
    if (w.size() != 4) parse_fail(r.field("width"), "expected [w00, w01, w10, w11]");
  }
  const auto c = r.numbers("center", std::vector<double>{0.0, 0.0});
  if (c.size() != 2) parse_fail(r.field("center"), "expected [a0, a1]");
  r.boolean("real", false);
  return r.finish();
}

Json parse_smatrix_params(const Json& p) {
  Reader r(p, "params");
  if (r.number("mass", 1.0) <= 0.0) parse_fail("params.mass", "must be positive");
  Reader g(r.has("grid") ? r.raw("grid") : empty_object(), "params.grid");
  const double lo = g.number("theta_min", -6.0), hi = g.number("theta_max", 6.0);
  if (!(hi > lo)) parse_fail("params.grid", "theta_max must exceed theta_min");
  g.integer("points", 2048, 2);
  r.set("grid", g.finish());
  r.integer("two_particle_points", 256, 2);
  r.set("f", parse_packet(r.raw("f"), "params.f"));
  r.set("g", parse_packet(r.raw("g"), "params.g"));
  const auto labels = r.numbers("labels", std::vector<double>{1.0, 2.0});
  if (labels.size() != 2 || labels[0] == labels[1]) parse_fail("params.labels", "expected two different labels");
  r.numbers("times", std::vector<double>{-10.0, 0.0, 10.0});
  if (r.number("velocity_threshold", kVelocityThreshold) <= 0.0) parse_fail("params.velocity_threshold", "must be positive");
  return r.finish();
}

// ---- runners -----------------------------------------------------------------

Vec random_unit(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = cplx(n(rng), n(rng));
  return v / v.norm();
}

Mat random_matrix(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx(n(rng), n(rng));
  return m;
}

std::vector<SeedSpace> build_seeds(const Json& seeds, std::mt19937_64& rng) {
  std::vector<SeedSpace> out;
  for (const auto& s : seeds) {
    const Label label = s["label"].get<Label>();
    const int dim = s["dim"].get<int>();
    const Json& om = s["omega"];
    if (om.is_string() && om.get<std::string>() == "standard")
      out.push_back(SeedSpace::standard(label, dim));
    else if (om.is_string())
      out.emplace_back(label, random_unit(rng, dim));
    else
      out.emplace_back(label, parse_vector(om, "omega"));
  }
  return out;
}

Check make_check(const std::string& name, double value, double tol) { return {name, value, tol, value < tol}; }

Json sector_table(const FockSpace& fock) {
  Json rows = Json::array();
  for (const auto& s : fock.sectors())
    rows.push_back({{"word", word_to_string(s.word)}, {"dim", s.dim}, {"offset", s.offset}});
  return rows;
}

void run_fock(const ExperimentConfig& c, RunReport& rep) {
  std::mt19937_64 rng(c.seed);
  const FockSpace fock(build_seeds(c.params["seeds"], rng), c.params["max_len"].get<int>());
  const auto trials = c.params["trials"].get<std::size_t>();
  const auto labels = fock.labels();
  std::uniform_int_distribution<std::size_t> pick(0, labels.size() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);

  double comm = 0.0, invol = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const Label k = labels[pick(rng)], kp = labels[pick(rng)];
    const Mat a = random_matrix(rng, fock.seed(k).dim());
    const Mat b = random_matrix(rng, fock.seed(kp).dim());
    Vec v = Vec::Zero(static_cast<Eigen::Index>(fock.total_dim()));
    for (const auto& s : fock.sectors())
      if (static_cast<int>(s.word.size()) <= fock.max_len() - 2)
        for (std::size_t i = 0; i < s.dim; ++i)
          v(static_cast<Eigen::Index>(s.offset + i)) = cplx(normal(rng), normal(rng));
    comm = std::max(comm, commutation_residual(fock, k, a, kp, b, v));
    Vec w = random_unit(rng, static_cast<int>(fock.total_dim()));
    invol = std::max(invol, (z_involution(fock, z_involution(fock, w)) - w).norm());
  }
  rep.checks.push_back(make_check("commutation_relation", comm, c.tolerances.at("commutation")));
  rep.checks.push_back(make_check("z_involution", invol, c.tolerances.at("involution")));

  std::size_t worst = 0;
  for (int n = 1; n <= fock.max_len(); ++n) {
    std::size_t count = 0;
    for (const auto& s : fock.sectors())
      if (static_cast<int>(s.word.size()) == n) ++count;
    const std::size_t expected = alternating_word_count(labels.size(), static_cast<std::size_t>(n));
    worst = std::max(worst, count > expected ? count - expected : expected - count);
  }
  rep.checks.push_back({"sector_count", static_cast<double>(worst), 0.0, worst == 0});
  rep.data["total_dim"] = fock.total_dim();
  rep.data["sectors"] = sector_table(fock);
  rep.data["exact"] = true;
}

void run_freeness(const ExperimentConfig& c, RunReport& rep) {
  std::mt19937_64 rng(c.seed);
  const FockSpace fock(build_seeds(c.params["seeds"], rng), c.params["max_len"].get<int>());
  const int gens = c.params["generators"].get<int>();
  std::map<Label, std::vector<Mat>> families;
  for (const auto& s : fock.seeds())
    for (int i = 0; i < gens; ++i) families[s.label()].push_back(random_matrix(rng, s.dim()));

  const auto report = check_free_independence(fock, families, c.params["trials"].get<std::size_t>(),
                                              c.tolerances.at("moment"), c.seed);
  rep.checks.push_back(make_check("centered_moments", report.max_residual, c.tolerances.at("moment")));
  rep.data["sampled"] = report.sampled;
  rep.data["excluded_inexact"] = report.excluded_inexact;
  rep.data["worst_word"] = word_to_string(report.worst_word);
  rep.data["centering_shifts"] = report.centering_shifts.size();
  rep.data["exact"] = report.excluded_inexact == 0;

  const auto claim6_trials = c.params["claim6_trials"].get<std::size_t>();
  if (claim6_trials > 0) {
    const auto labels = fock.labels();
    if (labels.size() < 2) throw Error(ErrorCode::InvalidArgument, "claim6 needs at least two seeds");
    const Label a_label = labels.back();
    const std::set<Label> k1(labels.begin(), labels.end() - 1);
    const std::vector<Label> k1v(k1.begin(), k1.end());
    std::uniform_int_distribution<std::size_t> pick(0, k1v.size() - 1);
    const int longest = std::max(1, fock.max_len() - 1);
    std::uniform_int_distribution<int> len_dist(1, k1v.size() == 1 ? 1 : longest);
    double worst = 0.0;
    for (std::size_t t = 0; t < claim6_trials; ++t) {
      const int len = len_dist(rng);
      std::vector<std::pair<Label, Mat>> factors;
      for (int j = 0; j < len; ++j) {
        Label l = k1v[pick(rng)];
        while (!factors.empty() && k1v.size() > 1 && l == factors.back().first) l = k1v[pick(rng)];
        factors.emplace_back(l, random_matrix(rng, fock.seed(l).dim()));
      }
      const SeedSpace& as = fock.seed(a_label);
      const Mat a = as.centered(random_matrix(rng, as.dim()));
      const cplx v = claim6_orthogonality(fock, k1, make_moment_word(fock, factors), a_label, a);
      worst = std::max(worst, std::abs(v));
    }
    rep.checks.push_back(make_check("claim6_orthogonality", worst, c.tolerances.at("claim6")));
  }
}

struct ModularSeed {
  Label label;
  std::vector<Mat> generators;
  Vec omega;
};

ModularSeed build_modular_seed(const Json& s) {
  ModularSeed m;
  m.label = s["label"].get<Label>();
  const std::string algebra = s["algebra"].get<std::string>();
  if (algebra == "custom") {
    for (const auto& g : s["generators"]) m.generators.push_back(parse_matrix(g, "generator"));
    m.omega = parse_vector(s["omega"], "omega");
    return m;
  }
  const auto w = s["weights"].get<std::vector<double>>();
  const int n = static_cast<int>(w.size());
  if (algebra == "diagonal") {
    m.omega = Vec(n);
    for (int i = 0; i < n; ++i) {
      m.omega(i) = std::sqrt(w[static_cast<std::size_t>(i)]);
      Mat p = Mat::Zero(n, n);
      p(i, i) = 1.0;
      m.generators.push_back(p);
    }
    return m;
  }
  // M_n ⊗ 1 on C^n ⊗ C^n, Omega = sum sqrt(w_i) e_i ⊗ e_i
  m.omega = Vec::Zero(n * n);
  for (int i = 0; i < n; ++i) m.omega(i * n + i) = std::sqrt(w[static_cast<std::size_t>(i)]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Mat e = Mat::Zero(n * n, n * n);
      for (int k = 0; k < n; ++k) e(i * n + k, j * n + k) = 1.0;
      m.generators.push_back(e);
    }
  return m;
}

void run_modular(const ExperimentConfig& c, RunReport& rep) {
  std::mt19937_64 rng(c.seed);
  const auto t_grid = c.params["t_grid"].get<std::vector<double>>();
  std::vector<SeedSpace> seeds;
  std::map<Label, ModularData> modular;
  std::map<Label, MatrixAlgebra> algebras;
  double axioms = 0.0;
  Json seed_data = Json::object();
  for (const auto& s : c.params["seeds"]) {
    const ModularSeed ms = build_modular_seed(s);
    const MatrixAlgebra alg(ms.generators);
    const ModularData md = tomita(alg, ms.omega);
    const auto axr = modular_axioms_check(md, alg, ms.omega, t_grid, c.tolerances.at("axioms"));
    Json checks = Json::object();
    for (const auto& ch : axr.checks) {
      checks[ch.name] = ch.residual;
      axioms = std::max(axioms, ch.residual);
    }
    Json spectrum = Json::array();
    for (Eigen::Index i = 0; i < md.delta_spectrum.size(); ++i) spectrum.push_back(md.delta_spectrum(i));
    seed_data[std::to_string(ms.label)] = {{"delta_spectrum", spectrum},
                                           {"condition_number", md.condition_number},
                                           {"J", matrix_json(md.J.matrix)},
                                           {"algebra_dimension", alg.dimension()},
                                           {"axiom_residuals", checks}};
    seeds.emplace_back(ms.label, ms.omega);
    modular.emplace(ms.label, md);
    algebras.emplace(ms.label, alg);
  }
  rep.data["seeds"] = seed_data;
  rep.checks.push_back(make_check("modular_axioms", axioms, c.tolerances.at("axioms")));

  const FockSpace fock(seeds, c.params["max_len"].get<int>());
  const FreeModular free(fock, modular);
  const auto words = c.params["words"].get<std::size_t>();
  const int word_len = std::min(c.params["word_len"].get<int>(), fock.max_len());
  const auto labels = fock.labels();
  std::uniform_int_distribution<std::size_t> pick(0, labels.size() - 1);
  std::uniform_int_distribution<int> len_dist(1, labels.size() == 1 ? 1 : word_len);
  std::uniform_int_distribution<std::size_t> pick_t(0, t_grid.size() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  double flow = 0.0, s_identity = 0.0;
  for (std::size_t w = 0; w < words && !t_grid.empty(); ++w) {
    const int len = len_dist(rng);
    std::vector<std::pair<Label, Mat>> factors;
    for (int j = 0; j < len; ++j) {
      Label l = labels[pick(rng)];
      while (!factors.empty() && labels.size() > 1 && l == factors.back().first) l = labels[pick(rng)];
      const auto& basis = algebras.at(l).basis();
      Mat x = Mat::Zero(basis.front().rows(), basis.front().cols());
      for (const auto& b : basis) x += cplx(normal(rng), normal(rng)) * b;
      factors.emplace_back(l, x);
    }
    const double t = t_grid[pick_t(rng)];
    const StarResiduals r = free.verify(make_moment_word(fock, factors), t);
    flow = std::max(flow, r.flow);
    s_identity = std::max(s_identity, r.s_identity);
  }
  rep.checks.push_back(make_check("modular_flow_factorization", flow, c.tolerances.at("star")));
  rep.checks.push_back(make_check("s_operator_identity", s_identity, c.tolerances.at("star")));
  rep.data["words"] = words;
  rep.data["exact"] = true;

  if (c.params.contains("gamma")) {
    const Json& g = c.params["gamma"];
    const auto window = g["window"].get<std::vector<double>>();
    std::map<Label, GammaModel> models;
    for (int l = 1; l <= g["labels"].get<int>(); ++l)
      models.emplace(l, truncated_shift(g["size"].get<int>(), static_cast<int>(window[0]),
                                        static_cast<int>(window[1])));
    const auto table = gamma_decay_probe(models, g["max_len"].get<int>(), g["n_max"].get<int>());
    Series s{{"n", "word", "sup_entry"}, {}};
    for (const auto& row : table.rows) s.rows.push_back(Json::array({row.n, word_to_string(row.word), row.sup_entry}));
    rep.series["gamma_decay"] = s;
    rep.checks.push_back({"gamma_monotone", table.monotone ? 0.0 : 1.0, c.tolerances.at("gamma_monotone"),
                          table.monotone});
    rep.data["gamma"] = {{"horizon", table.horizon},
                         {"truncated", table.truncated},
                         {"hypothesis_failure", table.hypothesis_failure()}};
    if (table.truncated) rep.warnings.push_back("gamma decay: n_max exceeds the boundary-free horizon, table truncated");
    if (table.hypothesis_failure()) rep.warnings.push_back("gamma decay: no decay observed for some label");
  }
}

void run_spectral(const ExperimentConfig& c, RunReport& rep) {
  std::map<Label, SpectrumModel> seeds;
  for (const auto& s : c.params["seeds"]) {
    const Label label = s["label"].get<Label>();
    if (s.contains("geometric")) {
      seeds.emplace(label, geometric_seed(label, s["geometric"].get<int>()));
    } else {
      std::ifstream in(s["csv"].get<std::string>());
      if (!in) throw Error(ErrorCode::Parse, "cannot open " + s["csv"].get<std::string>());
      seeds.emplace(label, parse_spectrum_csv(label, in));
    }
  }
  const double s_val = c.params["s"].get<double>();
  const TraceReport tr = verify_trace_bound(seeds, s_val, c.params["max_len"].get<int>(),
                                            c.params["cutoff"].get<double>());
  Json eps = Json::object();
  for (const auto& [label, e] : tr.epsilon_per_seed) eps[std::to_string(label)] = e;
  rep.data["epsilon_per_seed"] = eps;
  rep.data["epsilon"] = tr.epsilon;
  rep.data["truncated_trace"] = tr.truncated_trace;
  rep.data["closed_form_bound"] = tr.closed_form_bound ? Json(*tr.closed_form_bound) : Json("divergent");
  rep.data["refined_bound"] = tr.refined_bound ? Json(*tr.refined_bound) : Json("divergent");
  rep.data["tail_estimate"] = tr.tail_estimate;
  rep.data["max_len"] = tr.max_len;

  Series series{{"max_len", "truncated_trace", "bound"}, {}};
  for (const auto& row : tr.series)
    series.rows.push_back(Json::array({row.max_len, row.truncated_trace,
                                       row.bound ? Json(*row.bound) : Json("divergent")}));
  rep.series["trace"] = series;

  bool monotone = true;
  for (std::size_t i = 1; i < tr.series.size(); ++i)
    if (tr.series[i].truncated_trace < tr.series[i - 1].truncated_trace) monotone = false;
  rep.checks.push_back({"trace_monotone_in_max_len", monotone ? 0.0 : 1.0, 0.0, monotone});

  if (tr.conclusive()) {
    rep.checks.push_back(make_check("trace_below_bound",
                                    std::max(0.0, tr.truncated_trace - *tr.closed_form_bound),
                                    c.tolerances.at("bound")));
  } else {
    rep.conclusive = false;
    rep.warnings.push_back("closed-form bound diverges at s = " + Json(s_val).dump() +
                           " (eps (K-1) >= 1); result is not conclusive");
  }

  const int k = static_cast<int>(seeds.size());
  if (k >= 2) {
    try {
      rep.data["split_distance"] = split_distance(seeds.begin()->second, k, c.params["split_tol"].get<double>());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Divergent) throw;
      rep.data["split_distance"] = "not found";
      rep.warnings.push_back(e.what());
    }
  }
  if (c.params.contains("deficits")) {
    const auto series_l2 = l2_nuclearity_series(c.params["deficits"].get<std::vector<double>>());
    rep.data["l2_nuclearity"] = {{"epsilon", series_l2.epsilon},
                                 {"bound", series_l2.bound ? Json(*series_l2.bound) : Json("divergent")}};
  }
}

WavePacket2D build_packet(const Json& p, double mass) {
  WavePacket2D f;
  const auto c = p["center"].get<std::vector<double>>();
  if (p.contains("rapidity")) {
    f = WavePacket2D::on_shell(mass, p["rapidity"].get<double>(), p["spread"].get<double>(), Vec2(c[0], c[1]));
  } else {
    const auto m = p["momentum"].get<std::vector<double>>();
    const auto w = p["width"].get<std::vector<double>>();
    f.mass = mass;
    f.center = Vec2(c[0], c[1]);
    f.momentum = Vec2(m[0], m[1]);
    f.width << w[0], w[1], w[2], w[3];
  }
  f.real = p["real"].get<bool>();
  f.validate();
  return f;
}

void run_smatrix(const ExperimentConfig& c, RunReport& rep) {
  const double mass = c.params["mass"].get<double>();
  const WavePacket2D f = build_packet(c.params["f"], mass);
  const WavePacket2D g = build_packet(c.params["g"], mass);
  RapidityGrid fine;
  fine.theta_min = c.params["grid"]["theta_min"].get<double>();
  fine.theta_max = c.params["grid"]["theta_max"].get<double>();
  fine.points = c.params["grid"]["points"].get<int>();
  RapidityGrid coarse = fine;
  coarse.points = c.params["two_particle_points"].get<int>();
  const auto labels = c.params["labels"].get<std::vector<double>>();
  const Label k = static_cast<Label>(labels[0]), kp = static_cast<Label>(labels[1]);
  const double threshold = c.params["velocity_threshold"].get<double>();

  const VelocityInterval vf = velocity_support(f, threshold), vg = velocity_support(g, threshold);
  rep.data["velocity_support"] = {{"f", {vf.min, vf.max}}, {"g", {vg.min, vg.max}}};
  const bool ordered = precedes(g, f, threshold);
  rep.data["precedes"] = ordered;
  rep.checks.push_back({"g_precedes_f", ordered ? 0.0 : 1.0, 0.0, ordered});
  if (!ordered) {
    rep.warnings.push_back("velocity support of g does not precede that of f; scattering states undefined");
    return;
  }

  const RapidityFunction fp = rapidity_transform(f, 1, fine), fm = rapidity_transform(f, -1, fine);
  const SymmetricFock one(fine, 1);
  const FockState phi_omega = apply_field(one, fp, fm, one.vacuum());
  rep.checks.push_back(make_check("field_on_vacuum", (phi_omega.components[1] - fp.values).norm(),
                                  c.tolerances.at("one_particle")));
  double t_shift = 0.0;
  for (double t : c.params["times"].get<std::vector<double>>())
    t_shift = std::max(t_shift, (rapidity_transform(f.evolved(t), 1, fine).values - fp.values).norm());
  rep.checks.push_back(make_check("time_invariance", t_shift, c.tolerances.at("one_particle")));
  rep.data["f_plus_norm"] = fp.norm();

  const double fraction = support_condition_check(f, g, fine);
  rep.checks.push_back(make_check("support_condition", fraction, c.tolerances.at("support")));

  const auto d_out = direct_scattering_state(Direction::Out, k, kp, f, g, coarse);
  const auto d_in = direct_scattering_state(Direction::In, k, kp, f, g, coarse);
  rep.checks.push_back(make_check("out_state_direct", std::max(d_out.residual, d_in.residual),
                                  c.tolerances.at("direct")));
  const double overlap = std::abs(d_out.fock_vector.dot(d_in.fock_vector));
  rep.checks.push_back({"out_in_orthogonal", overlap, 0.0, overlap == 0.0});

  const TwoParticleState out = scattering_state(Direction::Out, k, kp, f, g, coarse);
  const TwoParticleState in = scattering_state(Direction::In, k, kp, f, g, coarse);
  const double support = c.tolerances.at("support");
  const TwoParticleState s_out = smatrix_apply(out, support);
  rep.checks.push_back(make_check("smatrix_maps_out_to_in", (s_out.amplitude - in.amplitude).norm() +
                                                                (s_out.first == in.first ? 0.0 : 1.0),
                                  c.tolerances.at("norm")));
  rep.checks.push_back(make_check("smatrix_isometric", std::abs(s_out.norm() - out.norm()), c.tolerances.at("norm")));
  rep.checks.push_back(make_check("smatrix_round_trip",
                                  (smatrix_inverse(s_out, support).amplitude - out.amplitude).norm(),
                                  c.tolerances.at("norm")));
  const TwoParticleState diag_out = scattering_state(Direction::Out, k, k, f, g, coarse);
  const TwoParticleState diag_in = scattering_state(Direction::In, k, k, f, g, coarse);
  rep.checks.push_back(make_check("diagonal_identity",
                                  (smatrix_apply(diag_out, support).amplitude - diag_in.amplitude).norm(),
                                  c.tolerances.at("norm")));
  rep.data["out_mass_below_diagonal"] = out.mass_below;
  rep.data["exact"] = d_out.exact && d_in.exact;

  Series amp{{"theta1", "theta2", "re", "im"}, {}};
  for (int i = 0; i < coarse.points; ++i)
    for (int j = 0; j < coarse.points; ++j) {
      const cplx z = out.amplitude(i, j);
      amp.rows.push_back(Json::array({coarse.theta(i), coarse.theta(j), z.real(), z.imag()}));
    }
  rep.series["amplitude"] = amp;
}

std::string csv_field(const Json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  return v.dump();
}

}  // namespace

static ExperimentConfig parse_config_with_base(const Json& doc, const RunOptions& options, const fs::path& base_dir) {
  Reader top(doc, "root");
  const long long version = top.integer("version");
  if (version != kConfigVersion) parse_fail("root.version", "unsupported version " + std::to_string(version));
  ExperimentConfig c;
  c.kind = top.string("kind");
  if (!kKinds.count(c.kind)) parse_fail("root.kind", "unknown kind '" + c.kind + "'");
  const long long seed = top.integer("seed", 0, 0);
  c.seed = options.seed ? *options.seed : static_cast<std::uint64_t>(seed);
  top.set("seed", c.seed);

  if (!(options.tol_scale > 0.0) || !std::isfinite(options.tol_scale))
    throw Error(ErrorCode::Parse, "--tol-scale must be positive");
  c.tolerances = default_tolerances().at(c.kind);
  Reader tol(top.has("tolerances") ? top.raw("tolerances") : empty_object(), "root.tolerances");
  for (auto& [name, value] : c.tolerances) {
    value = tol.number(name, value);
    if (!(value > 0.0)) parse_fail("root.tolerances." + name, "must be positive");
    value *= options.tol_scale;
    tol.set(name, value);
  }
  top.set("tolerances", tol.finish());

  Reader out(top.has("output") ? top.raw("output") : empty_object(), "root.output");
  const std::string dir = out.string("dir", "");
  c.out_dir = options.out_dir ? *options.out_dir : default_out_dir(dir.empty() ? std::nullopt : std::optional(dir));
  out.set("dir", c.out_dir);
  c.report_name = out.string("report", c.kind + "_report.json");
  top.set("output", out.finish());

  const Json& params = top.has("params") ? top.raw("params") : empty_object();
  if (c.kind == "fock") c.params = parse_fock_params(params);
  else if (c.kind == "freeness") c.params = parse_freeness_params(params);
  else if (c.kind == "modular") c.params = parse_modular_params(params);
  else if (c.kind == "spectral") c.params = parse_spectral_params(params, base_dir);
  else c.params = parse_smatrix_params(params);
  top.set("params", c.params);
  c.normalized = top.finish();
  return c;
}

ExperimentConfig parse_config(const Json& doc, const RunOptions& options) {
  return parse_config_with_base(doc, options, fs::current_path());
}

ExperimentConfig parse_config_file(const std::string& path, const RunOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Parse, "cannot open config file " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Parse, "config " + path + ": " + e.what());
  }
  return parse_config_with_base(doc, options, fs::absolute(path).parent_path());
}

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

Json RunReport::to_json() const {
  Json j;
  j["kind"] = kind;
  j["config"] = config;
  j["passed"] = passed();
  j["conclusive"] = conclusive;
  Json cs = Json::array();
  for (const auto& c : checks)
    cs.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"passed", c.passed}});
  j["checks"] = cs;
  j["data"] = data;
  Json ss = Json::object();
  for (const auto& [name, s] : series) ss[name] = {{"columns", s.columns}, {"rows", s.rows}};
  j["series"] = ss;
  j["warnings"] = warnings;
  j["timings"] = timings_ms;
  return j;
}

RunReport run_experiment(const ExperimentConfig& config) {
  RunReport rep;
  rep.kind = config.kind;
  rep.config = config.normalized;
  const auto start = std::chrono::steady_clock::now();
  if (config.kind == "fock") run_fock(config, rep);
  else if (config.kind == "freeness") run_freeness(config, rep);
  else if (config.kind == "modular") run_modular(config, rep);
  else if (config.kind == "spectral") run_spectral(config, rep);
  else run_smatrix(config, rep);
  rep.timings_ms["run"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

std::string write_report(const ExperimentConfig& config, const RunReport& report) {
  fs::create_directories(config.out_dir);
  const fs::path path = fs::path(config.out_dir) / config.report_name;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write report " + path.string());
  out << report.to_json().dump(2) << '\n';
  return path.string();
}

std::vector<std::string> series_names(const Json& report) {
  std::vector<std::string> names;
  if (report.contains("series") && report["series"].is_object())
    for (const auto& [name, s] : report["series"].items()) names.push_back(name);
  return names;
}

std::string series_csv(const Json& report, const std::string& series) {
  if (!report.contains("series") || !report["series"].contains(series)) {
    std::string known;
    for (const auto& n : series_names(report)) known += (known.empty() ? "" : ", ") + n;
    throw Error(ErrorCode::InvalidArgument,
                "unknown series '" + series + "' (report has: " + (known.empty() ? "none" : known) + ")");
  }
  const Json& s = report["series"][series];
  std::ostringstream os;
  bool first = true;
  for (const auto& c : s["columns"]) {
    os << (first ? "" : ",") << c.get<std::string>();
    first = false;
  }
  os << '\n';
  for (const auto& row : s["rows"]) {
    first = true;
    for (const auto& v : row) {
      os << (first ? "" : ",") << csv_field(v);
      first = false;
    }
    os << '\n';
  }
  return os.str();
}

std::string emit_series(const std::string& report_path, const std::string& series, const std::string& out_dir) {
  std::ifstream in(report_path);
  if (!in) throw Error(ErrorCode::Parse, "cannot open report " + report_path);
  Json report;
  try {
    report = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Parse, "report " + report_path + ": " + e.what());
  }
  const std::string csv = series_csv(report, series);
  fs::create_directories(out_dir);
  const fs::path path = fs::path(out_dir) / (series + ".csv");
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << csv;
  return path.string();
}

std::string default_out_dir(const std::optional<std::string>& explicit_dir) {
  if (explicit_dir) return *explicit_dir;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return ".";
}

}  // namespace freeprod
