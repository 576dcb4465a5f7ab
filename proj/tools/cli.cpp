#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>

#include "kasner/asymptotics.hpp"
#include "kasner/closedform.hpp"
#include "kasner/error.hpp"
#include "kasner/exponents.hpp"
#include "kasner/geodesics.hpp"
#include "kasner/modes.hpp"
#include "output.hpp"

namespace kasner::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Kind { Vec3, Complex, Pair, Number, Integer, String, Object };

struct OptSpec {
  const char* key;
  const char* flag;  // empty: config file only
  Kind kind;
  const char* help;
};

// Also the key order of every config echo.
const std::vector<OptSpec> kOptions = {
    {"p", "-p", Kind::Vec3, "Kasner exponents p1,p2,p3"},
    {"ptol", "--ptol", Kind::Number, "tolerance of the exponent sum rules"},
    {"w", "-w", Kind::Vec3, "momentum w1,w2,w3"},
    {"a", "-a", Kind::Vec3, "conserved ray momenta a1,a2,a3"},
    {"t0", "--t0", Kind::Number, "initial time"},
    {"x0", "--x0", Kind::Vec3, "initial comoving position"},
    {"direction", "--direction", Kind::Vec3, "initial spatial direction dx/ds"},
    {"alpha0", "--alpha0", Kind::Complex, "alpha(t0) as re,im"},
    {"alphadot0", "--alphadot0", Kind::Complex, "alpha'(t0) as re,im"},
    {"to", "--to", Kind::Number, "end of the span (t, or s with --coords s)"},
    {"tp", "--tp", Kind::Number, "emission time"},
    {"tq", "--tq", Kind::Number, "reception time"},
    {"h", "--planck", Kind::Number, "Planck constant scale"},
    {"coords", "--coords", Kind::String, "t or s"},
    {"tol", "--tol", Kind::Number, "solver tolerance"},
    {"samples_per_decade", "--samples-per-decade", Kind::Number, "output density"},
    {"threshold", "--threshold", Kind::Number, "largest accepted deviation"},
    {"fit", "--fit", Kind::String, "small or large"},
    {"s_floor", "--s-floor", Kind::Number, "log-time depth of the small-time fit"},
    {"window", "--window", Kind::Pair, "large-time fit window T1,T2"},
    {"samples", "--samples", Kind::Integer, "number of recorded samples"},
    {"grid", "", Kind::Object, "momentum grid"},
    {"threads", "--threads", Kind::Integer, "sweep worker threads"},
    {"format", "--format", Kind::String, "csv or json (text or json for classify)"},
    {"out", "--out", Kind::String, "output path (directory for sweep)"},
};

const std::map<std::string, std::set<std::string>> kAllowed = {
    {"classify", {"p", "ptol", "format", "out"}},
    {"solve",
     {"p", "ptol", "w", "t0", "alpha0", "alphadot0", "to", "coords", "tol",
      "samples_per_decade", "format", "out"}},
    {"compare",
     {"p", "ptol", "w", "t0", "alpha0", "alphadot0", "to", "tol", "samples_per_decade",
      "threshold", "out"}},
    {"asymptotics",
     {"p", "ptol", "w", "t0", "alpha0", "alphadot0", "to", "tol", "fit", "s_floor", "window",
      "out"}},
    {"sweep",
     {"p", "ptol", "w", "t0", "alpha0", "alphadot0", "to", "coords", "tol",
      "samples_per_decade", "grid", "threads", "format", "out"}},
    {"geodesic", {"p", "ptol", "t0", "x0", "direction", "to", "tol", "samples", "out"}},
    {"redshift", {"p", "ptol", "a", "tp", "tq", "h", "out"}},
};

const std::map<std::string, std::string> kDescriptions = {
    {"classify", "classify Kasner exponents"},
    {"solve", "solve one mode in t or s"},
    {"compare", "compare the closed form with the numeric solution"},
    {"asymptotics", "fit small-time or large-time asymptotics"},
    {"sweep", "solve modes over a momentum grid"},
    {"geodesic", "integrate a lightlike geodesic"},
    {"redshift", "redshift along a light ray"},
};

const OptSpec& spec_for(const std::string& key) {
  for (const auto& o : kOptions) {
    if (key == o.key) return o;
  }
  throw UsageError("unknown key '" + key + "'");
}

double parse_number(std::string_view text, const std::string& key) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw UsageError("'" + key + "': cannot read '" + std::string(text) + "' as a number");
  }
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = text.find(',', start);
    const std::string_view item(text.data() + start,
                                (comma == std::string::npos ? text.size() : comma) - start);
    out.push_back(parse_number(item, key));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Flag text to the JSON form used in config files.
ojson value_from_flag(const OptSpec& o, const std::string& text) {
  const std::string key = o.key;
  switch (o.kind) {
    case Kind::Vec3: {
      const auto v = parse_list(text, key);
      if (v.size() != 3) throw UsageError("'" + key + "' needs three comma-separated numbers");
      return ojson(v);
    }
    case Kind::Complex: {
      auto v = parse_list(text, key);
      if (v.size() == 1) v.push_back(0.0);
      if (v.size() != 2) throw UsageError("'" + key + "' needs re,im");
      return ojson(v);
    }
    case Kind::Pair: {
      const auto v = parse_list(text, key);
      if (v.size() != 2) throw UsageError("'" + key + "' needs two comma-separated numbers");
      return ojson(v);
    }
    case Kind::Number: return ojson(parse_number(text, key));
    case Kind::Integer: {
      long long v = 0;
      const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
      if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw UsageError("'" + key + "' needs an integer");
      }
      return ojson(v);
    }
    case Kind::String: return ojson(text);
    case Kind::Object: break;
  }
  throw UsageError("'" + key + "' can only be set in a config file");
}

// Checks a config-file value and brings it to canonical form.
ojson value_from_file(const OptSpec& o, const ojson& v) {
  const std::string key = o.key;
  auto numbers = [&](std::size_t n) {
    if (!v.is_array() || v.size() != n) {
      throw UsageError("'" + key + "' needs an array of " + std::to_string(n) + " numbers");
    }
    for (const auto& x : v) {
      if (!x.is_number()) throw UsageError("'" + key + "' needs numbers");
    }
    return ojson(v.get<std::vector<double>>());
  };
  switch (o.kind) {
    case Kind::Vec3: return numbers(3);
    case Kind::Complex:
      if (v.is_number()) return ojson(std::vector<double>{v.get<double>(), 0.0});
      return numbers(2);
    case Kind::Pair: return numbers(2);
    case Kind::Number:
      if (!v.is_number()) throw UsageError("'" + key + "' needs a number");
      return ojson(v.get<double>());
    case Kind::Integer:
      if (!v.is_number_integer()) throw UsageError("'" + key + "' needs an integer");
      return v;
    case Kind::String:
      if (!v.is_string()) throw UsageError("'" + key + "' needs a string");
      return v;
    case Kind::Object:
      if (!v.is_object()) throw UsageError("'" + key + "' needs an object");
      return v;
  }
  return v;
}

class Config {
 public:
  Config(std::string command, ojson values)
      : command_(std::move(command)), values_(std::move(values)) {}

  const std::string& command() const { return command_; }
  bool has(const std::string& key) const { return values_.contains(key); }

  void set_default(const std::string& key, ojson v) {
    if (!has(key)) values_[key] = std::move(v);
  }

  const ojson& raw(const std::string& key) const {
    if (!has(key)) throw UsageError(command_ + ": missing required '" + key + "'");
    return values_.at(key);
  }
  double number(const std::string& key) const { return raw(key).get<double>(); }
  long long integer(const std::string& key) const { return raw(key).get<long long>(); }
  std::string string(const std::string& key) const { return raw(key).get<std::string>(); }
  std::array<double, 3> vec3(const std::string& key) const {
    return raw(key).get<std::array<double, 3>>();
  }
  cplx complex(const std::string& key) const {
    const auto v = raw(key).get<std::array<double, 2>>();
    return {v[0], v[1]};
  }
  std::array<double, 2> pair(const std::string& key) const {
    return raw(key).get<std::array<double, 2>>();
  }

  /// Resolved configuration in canonical key order.
  ojson echo() const {
    ojson out;
    out["command"] = command_;
    for (const auto& o : kOptions) {
      if (values_.contains(o.key)) out[o.key] = values_.at(o.key);
    }
    return out;
  }

  Config with(const std::string& key, ojson v) const {
    Config c = *this;
    c.values_[key] = std::move(v);
    return c;
  }

  Config without(const std::string& key) const {
    Config c = *this;
    c.values_.erase(key);
    return c;
  }

 private:
  std::string command_;
  ojson values_;
};

ojson cplx_json(cplx z) { return ojson::array({z.real(), z.imag()}); }

void emit(const Config& cfg, const std::string& text, std::ostream& out) {
  if (cfg.has("out")) {
    const std::string path = cfg.string("out");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw UsageError("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw UsageError("failed writing '" + path + "'");
  } else {
    out << text;
  }
}

KasnerExponents exponents(const Config& cfg) {
  const auto p = cfg.vec3("p");
  return KasnerExponents::make(p[0], p[1], p[2], cfg.number("ptol"));
}

ModeSpec mode_spec(const Config& cfg) {
  ModeSpec spec;
  spec.w.w = cfg.vec3("w");
  spec.t0 = cfg.number("t0");
  spec.alpha0 = cfg.complex("alpha0");
  spec.alphadot0 = cfg.complex("alphadot0");
  return spec;
}

void mode_defaults(Config& cfg) {
  cfg.set_default("ptol", 1e-12);
  cfg.set_default("w", std::vector<double>{0.0, 0.0, 0.0});
  cfg.set_default("t0", 1.0);
  cfg.set_default("alpha0", std::vector<double>{1.0, 0.0});
  cfg.set_default("alphadot0", std::vector<double>{0.0, 0.0});
  cfg.set_default("tol", 1e-10);
}

std::string solve_to_text(const Config& cfg) {
  const KasnerExponents k = exponents(cfg);
  const ModeSpec spec = mode_spec(cfg);
  const std::string coords = cfg.string("coords");
  const double tol = cfg.number("tol");
  const double spd = cfg.number("samples_per_decade");
  ModeTrajectory traj = coords == "t"   ? solve_mode_t(k, spec, cfg.number("to"), tol, spd)
                        : coords == "s" ? solve_mode_s(k, spec, cfg.number("to"), tol, spd)
                                        : throw UsageError("--coords must be t or s");
  const TrajectoryTable table = make_table(traj, cfg.echo());
  const std::string format = cfg.string("format");
  if (format == "csv") return write_csv(table);
  if (format == "json") return write_json(table);
  throw UsageError("--format must be csv or json");
}

int cmd_classify(Config& cfg, std::ostream& out, std::ostream& err) {
  cfg.set_default("ptol", 1e-12);
  cfg.set_default("format", "text");
  const auto p = cfg.vec3("p");
  const std::string format = cfg.string("format");
  if (format != "text" && format != "json") throw UsageError("--format must be text or json");
  const double lin = p[0] + p[1] + p[2] - 1.0;
  const double quad = p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - 1.0;
  std::string cls;
  std::string error;
  try {
    cls = exponents(cfg).describe();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ConstraintViolation) throw;
    error = e.what();
  }
  std::string text;
  if (format == "json") {
    ojson doc;
    doc["schema"] = "kasner-classify-v1";
    doc["config"] = cfg.echo();
    doc["valid"] = error.empty();
    doc["class"] = error.empty() ? ojson(cls) : ojson(nullptr);
    doc["linear_residual"] = lin;
    doc["quadratic_residual"] = quad;
    text = doc.dump() + "\n";
  } else {
    text = "class: " + (error.empty() ? cls : std::string("invalid")) + "\n";
    text += "linear_residual: " + format_double(lin) + "\n";
    text += "quadratic_residual: " + format_double(quad) + "\n";
  }
  emit(cfg, text, out);
  if (!error.empty()) {
    err << "error: " << error << "\n";
    return kExitInvalidModel;
  }
  return kExitOk;
}

int cmd_solve(Config& cfg, std::ostream& out) {
  mode_defaults(cfg);
  cfg.set_default("coords", "t");
  cfg.set_default("samples_per_decade", kDefaultSamplesPerDecade);
  cfg.set_default("format", "csv");
  emit(cfg, solve_to_text(cfg), out);
  return kExitOk;
}

int cmd_compare(Config& cfg, std::ostream& out) {
  mode_defaults(cfg);
  cfg.set_default("to", 100.0 * cfg.number("t0"));
  cfg.set_default("samples_per_decade", kDefaultSamplesPerDecade);
  cfg.set_default("threshold", 1e-6);
  const KasnerExponents k = exponents(cfg);
  const ModeSpec spec = mode_spec(cfg);
  const SolutionBasis basis = closed_form_basis(k, spec.w, spec.t0);
  const ModeTrajectory traj = solve_mode_t(k, spec, cfg.number("to"), cfg.number("tol"),
                                           cfg.number("samples_per_decade"));
  const MatchedSolution m = match_constants(basis, spec);
  const Comparison c = compare_with_trajectory(m, traj);
  const double threshold = cfg.number("threshold");
  const bool pass = c.max_deviation <= threshold;
  ojson doc;
  doc["schema"] = "kasner-compare-v1";
  doc["config"] = cfg.echo();
  doc["basis"] = basis.describe();
  doc["c1"] = cplx_json(m.c1);
  doc["c2"] = cplx_json(m.c2);
  doc["samples"] = c.samples;
  doc["max_deviation"] = c.max_deviation;
  doc["worst_t"] = c.worst_t;
  doc["threshold"] = threshold;
  doc["pass"] = pass;
  emit(cfg, doc.dump() + "\n", out);
  return pass ? kExitOk : kExitCheckFailed;
}

int cmd_asymptotics(Config& cfg, std::ostream& out) {
  mode_defaults(cfg);
  cfg.set_default("fit", "small");
  const std::string fit = cfg.string("fit");
  ojson doc;
  if (fit == "small") {
    cfg.set_default("s_floor", -20.0);
    const KasnerExponents k = exponents(cfg);
    const SmallTimeFit f = small_time_fit(k, mode_spec(cfg), cfg.number("s_floor"),
                                          cfg.number("tol"));
    doc["schema"] = "kasner-asymptotics-v1";
    doc["config"] = cfg.echo();
    doc["regime"] =
        f.regime == SmallTimeFit::Regime::Logarithmic ? "Logarithmic" : "Oscillatory";
    doc["c1"] = cplx_json(f.c1);
    doc["c2"] = cplx_json(f.c2);
    doc["frequency"] = f.frequency;
    doc["s_floor"] = f.s_floor;
    doc["residual_sup"] = f.residual_sup;
    doc["residual_deeper"] = f.residual_deeper;
  } else if (fit == "large") {
    const double t0 = cfg.number("t0");
    cfg.set_default("window", std::vector<double>{10.0 * t0, 20.0 * t0});
    const auto window = cfg.pair("window");
    cfg.set_default("to", window[1]);
    const KasnerExponents k = exponents(cfg);
    const ModeTrajectory traj = solve_mode_t(k, mode_spec(cfg), cfg.number("to"),
                                             cfg.number("tol"));
    const WKBFit f = large_time_fit(traj, t0, window[0], window[1]);
    const AmplitudeBound b = amplitude_bound_check(traj, f);
    doc["schema"] = "kasner-asymptotics-v1";
    doc["config"] = cfg.echo();
    doc["c1"] = cplx_json(f.c1);
    doc["c2"] = cplx_json(f.c2);
    doc["window"] = ojson::array({f.window_lo, f.window_hi});
    doc["onset_T"] = f.onset_T;
    doc["residual_sup"] = f.residual_sup;
    doc["fit_samples"] = f.samples;
    doc["bound"] = {{"T", b.T}, {"holds", b.holds}, {"samples", b.samples}};
  } else {
    throw UsageError("--fit must be small or large");
  }
  emit(cfg, doc.dump() + "\n", out);
  return kExitOk;
}

std::vector<double> axis_values(const ojson& spec, double fixed, const std::string& name) {
  if (spec.is_null()) return {fixed};
  if (spec.is_number()) return {spec.get<double>()};
  if (!spec.is_object()) throw UsageError("grid." + name + " must be a number or an object");
  for (const auto& [key, _] : spec.items()) {
    if (key != "min" && key != "max" && key != "count" && key != "spacing") {
      throw UsageError("grid." + name + ": unknown key '" + key + "'");
    }
  }
  const double lo = spec.at("min").get<double>();
  const double hi = spec.at("max").get<double>();
  const long long n = spec.at("count").get<long long>();
  const std::string spacing = spec.value("spacing", "linear");
  if (n < 1) throw UsageError("grid." + name + ".count must be positive");
  if (spacing != "linear" && spacing != "log") {
    throw UsageError("grid." + name + ".spacing must be linear or log");
  }
  if (spacing == "log" && !(lo > 0.0 && hi > 0.0)) {
    throw UsageError("grid." + name + ": log spacing needs positive bounds");
  }
  std::vector<double> out;
  for (long long i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back(spacing == "linear" ? lo + (hi - lo) * f
                                      : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * f));
  }
  out.back() = n == 1 ? lo : hi;
  return out;
}

int cmd_sweep(Config& cfg, std::ostream& out) {
  mode_defaults(cfg);
  cfg.set_default("coords", "t");
  cfg.set_default("samples_per_decade", kDefaultSamplesPerDecade);
  cfg.set_default("format", "csv");
  cfg.set_default("threads", 1);
  const ojson& grid = cfg.raw("grid");
  for (const auto& [key, _] : grid.items()) {
    if (key != "w1" && key != "w2" && key != "w3") {
      throw UsageError("grid: unknown key '" + key + "'");
    }
  }
  const auto w = cfg.vec3("w");
  std::array<std::vector<double>, 3> axes;
  for (int j = 0; j < 3; ++j) {
    const std::string name = "w" + std::to_string(j + 1);
    axes[j] = axis_values(grid.contains(name) ? grid.at(name) : ojson(), w[j], name);
  }
  std::vector<std::array<double, 3>> runs;
  for (double a : axes[0]) {
    for (double b : axes[1]) {
      for (double c : axes[2]) runs.push_back({a, b, c});
    }
  }
  const std::filesystem::path dir = cfg.string("out");
  std::filesystem::create_directories(dir);
  const std::string ext = cfg.string("format") == "json" ? ".json" : ".csv";
  exponents(cfg);  // fail fast on invalid exponents

  struct Result {
    std::string file;
    std::string digest;
    std::string error;
  };
  std::vector<Result> results(runs.size());
  std::atomic<std::size_t> next{0};
  std::mutex write_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= runs.size()) return;
      char name[32];
      std::snprintf(name, sizeof(name), "run_%05zu", i);
      Result r;
      r.file = std::string(name) + ext;
      try {
        // Thread count does not affect results and stays out of the echo.
        const Config run = cfg.with("w", runs[i]).without("threads");
        const std::string text = solve_to_text(run);
        r.digest = sha256_hex(text);
        std::lock_guard<std::mutex> lock(write_mutex);
        std::ofstream f(dir / r.file, std::ios::binary | std::ios::trunc);
        f << text;
        if (!f) r.error = "failed writing " + r.file;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
      results[i] = std::move(r);
    }
  };
  const long long threads = std::clamp<long long>(cfg.integer("threads"), 1, 256);
  std::vector<std::thread> pool;
  for (long long t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  ojson manifest;
  manifest["schema"] = "kasner-sweep-v1";
  manifest["config"] = cfg.without("threads").echo();
  ojson list = ojson::array();
  std::size_t failed = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    ojson entry;
    entry["index"] = i;
    entry["w"] = runs[i];
    entry["file"] = results[i].file;
    if (results[i].error.empty()) {
      entry["status"] = "ok";
      entry["sha256"] = results[i].digest;
    } else {
      entry["status"] = "error";
      entry["error"] = results[i].error;
      ++failed;
    }
    list.push_back(std::move(entry));
  }
  manifest["runs"] = std::move(list);
  {
    std::ofstream f(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    f << manifest.dump(2) << "\n";
    if (!f) throw UsageError("failed writing manifest");
  }
  out << "runs: " << runs.size() << "\nfailed: " << failed << "\n";
  return failed == 0 ? kExitOk : kExitSolver;
}

int cmd_geodesic(Config& cfg, std::ostream& out) {
  cfg.set_default("ptol", 1e-12);
  cfg.set_default("t0", 1.0);
  cfg.set_default("x0", std::vector<double>{0.0, 0.0, 0.0});
  cfg.set_default("to", 100.0 * cfg.number("t0"));
  cfg.set_default("tol", 1e-10);
  cfg.set_default("samples", 65);
  const KasnerExponents k = exponents(cfg);
  GeodesicInit init;
  init.t0 = cfg.number("t0");
  init.x0 = cfg.vec3("x0");
  init.v = cfg.vec3("direction");
  const long long samples = cfg.integer("samples");
  if (samples < 2) throw UsageError("--samples must be at least 2");
  const NullTangent n0 = init_lightlike(k, init);
  const double s_end = affine_parameter_at(k, n0.a, init.t0, cfg.number("to"));
  const double tol = cfg.number("tol");
  const GeodesicRecord rec =
      integrate_geodesic(k, init, s_end, tol, static_cast<std::size_t>(samples));
  ojson doc;
  doc["schema"] = "kasner-geodesic-v1";
  doc["config"] = cfg.echo();
  doc["a"] = rec.a;
  doc["s_end"] = s_end;
  doc["max_null_deviation"] = rec.max_null_deviation;
  doc["max_momentum_drift"] = rec.max_momentum_drift;
  doc["conserved"] = rec.max_null_deviation <= 10.0 * tol && rec.max_momentum_drift <= 10.0 * tol;
  doc["columns"] = ojson::array({"s", "t", "x1", "x2", "x3", "dt", "dx1", "dx2", "dx3"});
  ojson rows = ojson::array();
  for (const auto& g : rec.samples) {
    rows.push_back({g.s, g.t, g.x[0], g.x[1], g.x[2], g.dt, g.dx[0], g.dx[1], g.dx[2]});
  }
  doc["samples"] = std::move(rows);
  emit(cfg, doc.dump() + "\n", out);
  return kExitOk;
}

int cmd_redshift(Config& cfg, std::ostream& out) {
  cfg.set_default("ptol", 1e-12);
  cfg.set_default("h", 1.0);
  const KasnerExponents k = exponents(cfg);
  const RedshiftReport r =
      redshift(k, cfg.vec3("a"), cfg.number("tp"), cfg.number("tq"), cfg.number("h"));
  const bool pass = r.max_deviation() <= 1e-10;
  ojson doc;
  doc["schema"] = "kasner-redshift-v1";
  doc["config"] = cfg.echo();
  doc["z_energy"] = r.z_energy;
  doc["z_large_time"] = r.z_large_time;
  doc["z_formula"] = r.z_formula;
  doc["lambda_E"] = {{"p", r.at_p.lambda_E}, {"q", r.at_q.lambda_E}};
  doc["lambda_LT"] = {{"p", r.at_p.lambda_LT}, {"q", r.at_q.lambda_LT}};
  doc["deviations"] = {{"energy_large_time", r.dev_energy_large_time},
                       {"energy_formula", r.dev_energy_formula},
                       {"large_time_formula", r.dev_large_time_formula}};
  doc["pass"] = pass;
  emit(cfg, doc.dump() + "\n", out);
  return pass ? kExitOk : kExitCheckFailed;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConstraintViolation:
    case ErrorCode::WrongClass:
      return kExitInvalidModel;
    case ErrorCode::InvalidArgument:
    case ErrorCode::NonPositiveTime:
    case ErrorCode::ZeroMomentum:
    case ErrorCode::ZeroDirection:
    case ErrorCode::BadOrdering:
    case ErrorCode::ComplexInput:
      return kExitUsage;
    default:
      return kExitSolver;
  }
}

ojson load_config_file(const std::string& path, const std::set<std::string>& allowed) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  ojson doc;
  try {
    doc = ojson::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config '" + path + "' must be a JSON object");
  ojson values;
  for (const auto& [key, v] : doc.items()) {
    if (!allowed.count(key)) throw UsageError("config: unknown key '" + key + "'");
    values[key] = value_from_file(spec_for(key), v);
  }
  return values;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scalar-wave modes and light rays in Kasner spacetimes", "kasner"};
  app.require_subcommand(1);
  std::map<std::string, std::map<std::string, std::string>> flags;
  std::map<std::string, std::string> config_path;
  for (const auto& [name, allowed] : kAllowed) {
    CLI::App* sub = app.add_subcommand(name, kDescriptions.at(name));
    auto& store = flags[name];
    for (const auto& o : kOptions) {
      if (!allowed.count(o.key) || std::string(o.flag).empty()) continue;
      sub->add_option(o.flag, store[o.key], o.help);
    }
    sub->add_option("--config", config_path[name], "flat JSON config file");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    const auto& allowed = kAllowed.at(name);
    ojson values;
    if (!config_path[name].empty()) values = load_config_file(config_path[name], allowed);
    for (const auto& o : kOptions) {
      if (!allowed.count(o.key) || std::string(o.flag).empty()) continue;
      if (sub->get_option(o.flag)->count() > 0) {
        values[o.key] = value_from_flag(o, flags[name][o.key]);
      }
    }
    Config cfg(name, values);
    if (name == "classify") return cmd_classify(cfg, out, err);
    if (name == "solve") return cmd_solve(cfg, out);
    if (name == "compare") return cmd_compare(cfg, out);
    if (name == "asymptotics") return cmd_asymptotics(cfg, out);
    if (name == "sweep") return cmd_sweep(cfg, out);
    if (name == "geodesic") return cmd_geodesic(cfg, out);
    if (name == "redshift") return cmd_redshift(cfg, out);
    throw UsageError("unknown command " + name);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const nlohmann::json::exception& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace kasner::cli
