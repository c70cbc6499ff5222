#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dimlab/dimlab.h"

using json = nlohmann::json;

namespace {

// Nonzero library status carried to main, which maps it to an exit code.
struct Failure {
  int status;
  std::string message;
};

struct Globals {
  bool as_json = false;
  int threads = 0;
  std::uint64_t seed = 0;
  std::string csv_path;
};

class Session {
 public:
  explicit Session(const Globals& g) {
    check(dimlab_context_new(g.threads, g.seed, &ctx_));
  }
  ~Session() { dimlab_context_free(ctx_); }
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  dimlab_context* ctx() const { return ctx_; }

  void check(int status) const {
    if (status != DIMLAB_OK) throw Failure{status, ctx_ ? dimlab_last_error(ctx_) : "cannot create context"};
  }
  json take(char* s) const {
    std::unique_ptr<char, decltype(&dimlab_string_free)> owned(s, &dimlab_string_free);
    return json::parse(owned.get());
  }
  std::string take_text(char* s) const {
    std::unique_ptr<char, decltype(&dimlab_string_free)> owned(s, &dimlab_string_free);
    return owned.get();
  }

 private:
  dimlab_context* ctx_ = nullptr;
};

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  ~Handle() { Free(p); }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
};

using MapHandle = Handle<dimlab_map, dimlab_map_free>;
using MeasureHandle = Handle<dimlab_measure, dimlab_measure_free>;
using SchemeHandle = Handle<dimlab_scheme, dimlab_scheme_free>;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{DIMLAB_E_IO, "cannot open " + path};
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Failure{DIMLAB_E_PARSE, path + ": " + e.what()};
  }
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string cell(const json& v) {
  if (v.is_number_float()) return num(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  if (v.is_array()) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + cell(v[i]);
    return out;
  }
  return v.dump();
}

// One CSV line per object, columns in the given order.
std::string csv_of(const json& rows, const std::vector<std::string>& columns) {
  std::ostringstream os;
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << cell(r.value(columns[i], json()));
    os << '\n';
  }
  return os.str();
}

json rows_of_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> cols;
  json rows = json::array();
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(f);
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split(line);
    if (cols.empty()) {
      cols = f;
      continue;
    }
    json r = json::object();
    for (std::size_t i = 0; i < cols.size() && i < f.size(); ++i) r[cols[i]] = f[i];
    rows.push_back(r);
  }
  return rows;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Every report: a header line with schema, seed and a hash of the
// configuration (thread count excluded), then the body.
struct Output {
  std::string command;
  json config = json::object();
  json result;
  std::string csv;

  void write(const Globals& g) const {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(config.dump())));
    std::string text;
    if (g.as_json) {
      json doc{{"schema", 1}, {"seed", g.seed}, {"config_hash", hash}, {"command", command}, {"result", result}};
      text = doc.dump(1) + "\n";
    } else {
      text = "# schema=1 seed=" + std::to_string(g.seed) + " config=" + hash + " command=" + command + "\n" + csv;
    }
    if (g.csv_path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream out(g.csv_path);
    if (!out) throw Failure{DIMLAB_E_IO, "cannot write " + g.csv_path};
    out << text;
  }
};

void load_map(Session& s, const std::string& path, MapHandle& h, Output& o) {
  json j = read_json(path);
  s.check(dimlab_map_from_json(s.ctx(), j.dump().c_str(), &h.p));
  o.config["map"] = j;
}

void load_measure(Session& s, const std::string& path, MeasureHandle& h, Output& o, const char* key) {
  json j = read_json(path);
  s.check(dimlab_measure_from_json(s.ctx(), j.dump().c_str(), &h.p));
  o.config[key] = j;
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  double a = 0, b = 0, h = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &a, &b, &h) == 3) {
    if (!(h > 0) || b < a) throw Failure{DIMLAB_E_INVALID_ARGUMENT, "grid must be lo:hi:step with step > 0"};
    const long steps = static_cast<long>((b - a) / h + 1e-9);
    for (long i = 0; i <= steps; ++i) out.push_back(a + static_cast<double>(i) * h);
    return out;
  }
  std::stringstream ss(spec);
  std::string f;
  while (std::getline(ss, f, ',')) {
    try {
      out.push_back(std::stod(f));
    } catch (const std::exception&) {
      throw Failure{DIMLAB_E_INVALID_ARGUMENT, "bad number '" + f + "' in list"};
    }
  }
  return out;
}

int exit_code(int status) {
  switch (status) {
    case DIMLAB_E_BUDGET_EXCEEDED:
      return 3;
    case DIMLAB_E_INVALID_ARGUMENT:
    case DIMLAB_E_OUT_OF_DOMAIN:
    case DIMLAB_E_MALFORMED_SCHEME:
    case DIMLAB_E_PAD_SYMBOL_INVALID:
    case DIMLAB_E_TOO_FEW_POINTS:
    case DIMLAB_E_PRECONDITION:
    case DIMLAB_E_PARSE:
    case DIMLAB_E_IO:
    case DIMLAB_E_DEGENERATE:
      return 2;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dimension estimates for expanding and parabolic interval maps"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  g.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_flag("--json", g.as_json, "Emit JSON instead of CSV");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--csv,-o", g.csv_path, "Write the report to this file instead of stdout");

  std::function<Output(Session&)> run;

  // map validate
  auto* map_cmd = app.add_subcommand("map", "Map utilities");
  map_cmd->require_subcommand(1);
  auto* validate = map_cmd->add_subcommand("validate", "Check a map and list its fixed points");
  std::string map_file;
  validate->add_option("file", map_file, "Map JSON")->required();
  validate->callback([&] {
    run = [&](Session& s) {
      Output o{"map validate"};
      MapHandle m;
      load_map(s, map_file, m, o);
      char* out = nullptr;
      s.check(dimlab_map_report(s.ctx(), m.p, &out));
      o.result = s.take(out);
      o.csv = csv_of(o.result["fixed_points"], {"branch", "x", "derivative", "parabolic"});
      return o;
    };
  });

  // cylinders
  auto* cyl = app.add_subcommand("cylinders", "List the n-cylinders of a map");
  std::string cyl_map;
  int cyl_depth = 4;
  cyl->add_option("--map", cyl_map, "Map JSON")->required();
  cyl->add_option("--depth,-n", cyl_depth, "Word length")->check(CLI::Range(1, 20));
  cyl->callback([&] {
    run = [&](Session& s) {
      Output o{"cylinders"};
      MapHandle m;
      load_map(s, cyl_map, m, o);
      o.config["depth"] = cyl_depth;
      char* out = nullptr;
      s.check(dimlab_cylinders(s.ctx(), m.p, cyl_depth, &out));
      o.result = s.take(out);
      o.csv = csv_of(o.result, {"word", "lo", "hi", "diam", "sum_g"});
      return o;
    };
  });

  // metric
  auto* met = app.add_subcommand("metric", "Moment distance between two measures");
  std::string met_map, met_mu, met_nu;
  int met_moments = 32;
  met->add_option("--map", met_map, "Map JSON")->required();
  met->add_option("--mu", met_mu, "Measure JSON")->required();
  met->add_option("--nu", met_nu, "Measure JSON")->required();
  met->add_option("--moments", met_moments, "Number of moments")->check(CLI::Range(1, 64));
  met->callback([&] {
    run = [&](Session& s) {
      Output o{"metric"};
      MapHandle m;
      MeasureHandle a, b;
      load_map(s, met_map, m, o);
      load_measure(s, met_mu, a, o, "mu");
      load_measure(s, met_nu, b, o, "nu");
      o.config["moments"] = met_moments;
      char* out = nullptr;
      s.check(dimlab_metric(s.ctx(), m.p, a.p, b.p, met_moments, &out));
      o.result = s.take(out);
      o.csv = csv_of(json::array({o.result}), {"value", "truncation_bound", "quadrature_bound", "moments"});
      return o;
    };
  });

  // pressure
  auto* pre = app.add_subcommand("pressure", "Pressure sums and fitted rates over a grid of exponents");
  std::string pre_map, pre_filter, pre_grid = "0:2:0.25";
  int pre_nmin = 8, pre_nmax = 16;
  pre->add_option("--map", pre_map, "Map JSON")->required();
  pre->add_option("--filter", pre_filter, "Filter JSON (default: no constraint)");
  pre->add_option("--s-grid", pre_grid, "lo:hi:step or a comma list");
  pre->add_option("--n-min", pre_nmin, "Smallest depth");
  pre->add_option("--n-max", pre_nmax, "Largest depth");
  pre->callback([&] {
    run = [&](Session& s) {
      Output o{"pressure"};
      MapHandle m;
      load_map(s, pre_map, m, o);
      json req{{"s", parse_grid(pre_grid)}, {"n_min", pre_nmin}, {"n_max", pre_nmax}};
      if (!pre_filter.empty()) req["filter"] = read_json(pre_filter);
      o.config["request"] = req;
      char* out = nullptr;
      s.check(dimlab_pressure(s.ctx(), m.p, req.dump().c_str(), &out));
      o.result = s.take(out);
      o.csv = csv_of(o.result["rows"], {"s", "rate", "rate_stderr", "rate_sup", "rate_sup_stderr", "rate_gap"});
      return o;
    };
  });

  // dimension bowen / hyp
  auto* dim = app.add_subcommand("dimension", "Dimension estimates");
  dim->require_subcommand(1);
  auto* bow = dim->add_subcommand("bowen", "Root of the pressure rate");
  std::string bow_map, bow_filter, bow_mode = "window", bow_sweep;
  int bow_nmin = -1, bow_nmax = -1;
  bow->add_option("--map", bow_map, "Map JSON")->required();
  bow->add_option("--filter", bow_filter, "Filter JSON (default: no constraint)");
  bow->add_option("--mode", bow_mode, "window or tilted")->check(CLI::IsMember({"window", "tilted"}));
  bow->add_option("--n-min", bow_nmin, "Smallest depth");
  bow->add_option("--n-max", bow_nmax, "Largest depth");
  bow->add_option("--sweep", bow_sweep, "Comma list of eps values, or \"default\" for 0.05,0.025,0.0125; extrapolates the roots to eps = 0");
  bow->callback([&] {
    run = [&](Session& s) {
      Output o{"dimension bowen"};
      MapHandle m;
      load_map(s, bow_map, m, o);
      json req{{"mode", bow_mode}};
      if (bow_nmin > 0) req["n_min"] = bow_nmin;
      if (bow_nmax > 0) req["n_max"] = bow_nmax;
      if (!bow_filter.empty()) req["filter"] = read_json(bow_filter);
      if (bow_sweep == "default") {
        req["sweep"] = "default";
      } else if (!bow_sweep.empty()) {
        req["sweep"] = parse_grid(bow_sweep);
      }
      o.config["request"] = req;
      char* out = nullptr;
      s.check(dimlab_bowen(s.ctx(), m.p, req.dump().c_str(), &out));
      o.result = s.take(out);
      if (o.result.contains("roots")) {
        json rows = json::array();
        for (std::size_t i = 0; i < o.result["eps"].size(); ++i) {
          rows.push_back({{"eps", o.result["eps"][i]}, {"s", o.result["roots"][i]}});
        }
        rows.push_back({{"eps", 0.0}, {"s", o.result["s"]}});
        o.csv = csv_of(rows, {"eps", "s"});
      } else {
        o.csv = csv_of(json::array({o.result}), {"mode", "s", "rate_at_zero", "bracket", "n_min", "n_max"});
      }
      return o;
    };
  });

  auto* hyp = dim->add_subcommand("hyp", "Supremum of entropy over Lyapunov exponent");
  std::string hyp_map, hyp_center;
  int hyp_order = 1, hyp_restarts = 20;
  double hyp_radius = -1.0;
  hyp->add_option("--map", hyp_map, "Map JSON")->required();
  hyp->add_option("--order", hyp_order, "1: Bernoulli, q > 1: Markov with memory q-1")->check(CLI::Range(1, 4));
  hyp->add_option("--ball-center", hyp_center, "Measure JSON at the ball center");
  hyp->add_option("--radius", hyp_radius, "Ball radius in the moment metric");
  hyp->add_option("--restarts", hyp_restarts, "Optimizer restarts")->check(CLI::PositiveNumber);
  hyp->callback([&] {
    run = [&](Session& s) {
      Output o{"dimension hyp"};
      MapHandle m;
      load_map(s, hyp_map, m, o);
      json req{{"order", hyp_order}, {"restarts", hyp_restarts}};
      if (!hyp_center.empty()) {
        if (hyp_radius < 0) throw Failure{DIMLAB_E_INVALID_ARGUMENT, "--ball-center needs --radius"};
        req["ball"] = {{"center", read_json(hyp_center)}, {"radius", hyp_radius}};
      }
      o.config["request"] = req;
      char* out = nullptr;
      s.check(dimlab_sup_ratio(s.ctx(), m.p, req.dump().c_str(), &out));
      o.result = s.take(out);
      o.csv = csv_of(json::array({o.result}),
                     {"s_sup", "entropy", "lyapunov", "params", "ball_distance", "feasible_restarts"});
      return o;
    };
  });

  // moran build / check
  auto* mor = app.add_subcommand("moran", "Moran constructions");
  mor->require_subcommand(1);
  auto* build = mor->add_subcommand("build", "Build a scheme and write it as JSON");
  std::string b_map, b_mu, b_out, b_kind = "product";
  int b_stages = 3, b_pad = 0, b_depth = 10, b_samples = 2000;
  bool b_padded = false, b_lenient = false;
  build->add_option("--map", b_map, "Map JSON")->required();
  build->add_option("--mu", b_mu, "Measure JSON")->required();
  build->add_option("--out", b_out, "Scheme JSON output")->required();
  build->add_option("--kind", b_kind, "product or cylinder")->check(CLI::IsMember({"product", "cylinder"}));
  build->add_option("--stages", b_stages, "Stages")->check(CLI::Range(1, 8));
  build->add_flag("--padded", b_padded, "Append parabolic pad blocks");
  build->add_option("--pad-symbol", b_pad, "Pad branch");
  build->add_flag("--lenient", b_lenient, "Accept a pad branch without a parabolic fixed point");
  build->add_option("--depth", b_depth, "Levels of a cylinder scheme")->check(CLI::Range(1, 22));
  build->add_option("--samples", b_samples, "Harvest samples per stage");
  build->callback([&] {
    run = [&](Session& s) {
      Output o{"moran build"};
      MapHandle m;
      MeasureHandle mu;
      load_map(s, b_map, m, o);
      load_measure(s, b_mu, mu, o, "mu");
      json req{{"kind", b_kind},       {"stages", b_stages},   {"padded", b_padded}, {"pad_symbol", b_pad},
               {"strict", !b_lenient}, {"depth", b_depth},     {"samples", b_samples}};
      o.config["request"] = req;
      SchemeHandle sc;
      s.check(dimlab_moran_build(s.ctx(), m.p, mu.p, req.dump().c_str(), &sc.p));
      char* out = nullptr;
      s.check(dimlab_scheme_to_json(s.ctx(), sc.p, &out));
      json scheme = s.take(out);
      std::ofstream f(b_out);
      if (!f) throw Failure{DIMLAB_E_IO, "cannot write " + b_out};
      f << scheme.dump(1) << '\n';
      json summary{{"kind", scheme["kind"]}, {"out", b_out}};
      std::vector<std::string> cols{"kind", "out"};
      if (scheme["kind"] == "product") {
        summary["blocks"] = scheme["blocks"].size();
        summary["m"] = scheme["schedule"]["m"];
        summary["total_length"] = scheme["schedule"]["total_length"];
        cols.insert(cols.end(), {"blocks", "m", "total_length"});
      } else {
        summary["levels"] = scheme["levels"].size();
        cols.push_back("levels");
      }
      o.result = summary;
      o.csv = csv_of(json::array({summary}), cols);
      return o;
    };
  });

  auto* chk = mor->add_subcommand("check", "Level report of a scheme");
  std::string c_file, c_map;
  chk->add_option("scheme", c_file, "Scheme JSON")->required();
  chk->add_option("--map", c_map, "Map JSON (needed for product schemes)");
  chk->callback([&] {
    run = [&](Session& s) {
      Output o{"moran check"};
      json sj = read_json(c_file);
      o.config["scheme"] = sj;
      SchemeHandle sc;
      s.check(dimlab_scheme_from_json(s.ctx(), sj.dump().c_str(), &sc.p));
      MapHandle m;
      if (!c_map.empty()) load_map(s, c_map, m, o);
      char* out = nullptr;
      s.check(dimlab_scheme_check(s.ctx(), sc.p, m.p, &out));
      o.result = s.take(out);
      if (o.result["kind"] == "product") {
        o.csv = csv_of(o.result["levels"], {"level", "stage", "length", "dim_min", "dim_max", "exact_dim_min",
                                            "exact_dim_max", "balance", "growth_ratio", "step_ratio", "log_eta_min",
                                            "log_eta_max", "log_r", "log_R", "entropy_sandwich", "diameter_sandwich"});
      } else {
        o.csv = csv_of(o.result["levels"], {"level", "intervals", "log_r", "log_R", "growth_ratio", "step_ratio",
                                            "balance", "dim_min", "dim_max"});
      }
      return o;
    };
  });

  // estimate boxdim
  auto* est = app.add_subcommand("estimate", "Empirical estimators");
  est->require_subcommand(1);
  auto* box = est->add_subcommand("boxdim", "Box-counting slope of a point sample");
  std::string e_points, e_map, e_mu, e_scheme;
  std::size_t e_count = 100000;
  int e_depth = 40, e_jmin = 4, e_jmax = 16;
  box->add_option("--points-file", e_points, "File with one point per line");
  box->add_option("--map", e_map, "Map JSON");
  box->add_option("--mu", e_mu, "Measure JSON to sample");
  box->add_option("--scheme", e_scheme, "Scheme JSON to sample");
  box->add_option("--points,--count", e_count, "Sample size");
  box->add_option("--depth", e_depth, "Symbols per sampled point")->check(CLI::Range(1, 200));
  box->add_option("--j-min", e_jmin, "Coarsest scale 2^-j");
  box->add_option("--j-max", e_jmax, "Finest scale 2^-j");
  box->callback([&] {
    run = [&](Session& s) {
      Output o{"estimate boxdim"};
      o.config["j"] = {e_jmin, e_jmax};
      std::vector<double> pts;
      if (!e_points.empty()) {
        std::ifstream in(e_points);
        if (!in) throw Failure{DIMLAB_E_IO, "cannot open " + e_points};
        std::string line;
        while (std::getline(in, line)) {
          try {
            pts.push_back(std::stod(line));
          } catch (const std::exception&) {
            // header or blank line
          }
        }
        o.config["points_hash"] = fnv1a(std::to_string(pts.size()) + json(pts).dump());
      } else {
        MapHandle m;
        if (e_map.empty() && e_scheme.empty()) {
          throw Failure{DIMLAB_E_INVALID_ARGUMENT, "give --points-file, --scheme, or --map with --mu"};
        }
        // explicit schemes carry their intervals; product schemes need the map
        if (!e_map.empty()) load_map(s, e_map, m, o);
        o.config["count"] = e_count;
        pts.resize(e_count);
        if (!e_scheme.empty()) {
          json sj = read_json(e_scheme);
          o.config["scheme"] = sj;
          SchemeHandle sc;
          s.check(dimlab_scheme_from_json(s.ctx(), sj.dump().c_str(), &sc.p));
          s.check(dimlab_sample_scheme(s.ctx(), sc.p, m.p, e_count, pts.data()));
        } else if (!e_mu.empty()) {
          MeasureHandle mu;
          load_measure(s, e_mu, mu, o, "mu");
          o.config["depth"] = e_depth;
          s.check(dimlab_sample_measure(s.ctx(), m.p, mu.p, e_count, e_depth, pts.data()));
        } else {
          throw Failure{DIMLAB_E_INVALID_ARGUMENT, "--map needs --mu or --scheme"};
        }
      }
      char* out = nullptr;
      s.check(dimlab_box_dimension(s.ctx(), pts.data(), pts.size(), e_jmin, e_jmax, &out));
      o.result = s.take(out);
      json rows = json::array();
      for (std::size_t i = 0; i < o.result["j"].size(); ++i) {
        rows.push_back({{"j", o.result["j"][i]}, {"count", o.result["counts"][i]}, {"slope", o.result["slope"]}});
      }
      o.csv = csv_of(rows, {"j", "count", "slope"});
      return o;
    };
  });

  // trace
  auto* tra = app.add_subcommand("trace", "Distance of empirical measures along an orbit to a measure");
  std::string t_map, t_mu, t_word, t_scheme;
  double t_x0 = 0.5;
  int t_nmax = 1000, t_grid = 48;
  std::uint64_t t_sample = 0;
  tra->add_option("--map", t_map, "Map JSON")->required();
  tra->add_option("--mu", t_mu, "Target measure JSON")->required();
  tra->add_option("--x0", t_x0, "Starting point of a forward orbit");
  tra->add_option("--n-max", t_nmax, "Forward orbit length");
  std::string t_word_file;
  tra->add_option("--word", t_word, "Symbol word; the orbit of its coding point");
  tra->add_option("--word-file", t_word_file, "File holding the symbol word");
  tra->add_option("--scheme", t_scheme, "Product scheme JSON; traces one scheme point");
  tra->add_option("--sample", t_sample, "Sub-seed of the scheme point");
  tra->add_option("--grid", t_grid, "Grid points")->check(CLI::Range(2, 1000));
  tra->callback([&] {
    run = [&](Session& s) {
      Output o{"trace"};
      MapHandle m;
      MeasureHandle mu;
      load_map(s, t_map, m, o);
      load_measure(s, t_mu, mu, o, "mu");
      json req{{"grid_points", t_grid}};
      SchemeHandle sc;
      if (!t_scheme.empty()) {
        json sj = read_json(t_scheme);
        o.config["scheme"] = sj;
        s.check(dimlab_scheme_from_json(s.ctx(), sj.dump().c_str(), &sc.p));
        req["sample"] = t_sample;
      } else if (!t_word.empty() || !t_word_file.empty()) {
        if (!t_word_file.empty()) {
          std::ifstream in(t_word_file);
          if (!in) throw Failure{DIMLAB_E_IO, "cannot open " + t_word_file};
          t_word.clear();
          for (char c; in.get(c);) {
            if (!std::isspace(static_cast<unsigned char>(c))) t_word.push_back(c);
          }
        }
        req["word"] = t_word;
      } else {
        req["x0"] = t_x0;
        req["n_max"] = t_nmax;
      }
      o.config["request"] = req;
      char* out = nullptr;
      s.check(dimlab_trace(s.ctx(), m.p, mu.p, sc.p, req.dump().c_str(), &out));
      o.result = s.take(out);
      json rows = json::array();
      for (std::size_t i = 0; i < o.result["n"].size(); ++i) {
        rows.push_back({{"n", o.result["n"][i]}, {"distance", o.result["distance"][i]}});
      }
      o.csv = csv_of(rows, {"n", "distance"});
      return o;
    };
  });

  // repro
  auto* rep = app.add_subcommand("repro", "Named reproduction tables");
  std::string r_name;
  bool r_list = false;
  rep->add_option("name", r_name, "Reproduction name");
  rep->add_flag("--list", r_list, "List the names");
  rep->callback([&] {
    run = [&](Session& s) {
      Output o{"repro"};
      char* out = nullptr;
      if (r_list || r_name.empty()) {
        s.check(dimlab_repro_names(s.ctx(), &out));
        std::string names = s.take_text(out);
        json rows = json::array();
        std::istringstream in(names);
        std::string line;
        while (std::getline(in, line)) rows.push_back({{"name", line}});
        o.result = rows;
        o.csv = csv_of(rows, {"name"});
        return o;
      }
      o.command = "repro " + r_name;
      o.config["name"] = r_name;
      s.check(dimlab_repro(s.ctx(), r_name.c_str(), &out));
      o.csv = s.take_text(out);
      o.result = rows_of_csv(o.csv);
      return o;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (!run) return 2;
  try {
    Session session(g);
    Output o = run(session);
    o.write(g);
  } catch (const Failure& f) {
    std::fprintf(stderr, "dimlab: %s: %s\n", dimlab_status_name(f.status), f.message.c_str());
    return exit_code(f.status);
  } catch (const json::exception& e) {
    std::fprintf(stderr, "dimlab: Parse: %s\n", e.what());
    return 2;
  }
  return 0;
}
