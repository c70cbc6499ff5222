#include "dimlab/dimlab.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <variant>

#include "dimlab/error.hpp"
#include "dimlab/estimators.hpp"
#include "dimlab/json_io.hpp"
#include "dimlab/map_model.hpp"
#include "dimlab/measures.hpp"
#include "dimlab/moran.hpp"
#include "dimlab/parallel.hpp"
#include "dimlab/pressure.hpp"
#include "dimlab/repro.hpp"

using namespace dimlab;

struct dimlab_context {
  int threads = 1;
  std::uint64_t seed = 0;
  std::string last_error;
};

struct dimlab_map {
  IntervalMap map;
};

struct dimlab_measure {
  MeasureSpec spec;
};

struct dimlab_scheme {
  std::variant<MoranScheme, ProductScheme> scheme;
};

static_assert(DIMLAB_E_INVALID_ARGUMENT == static_cast<int>(Errc::InvalidArgument));
static_assert(DIMLAB_E_BUDGET_EXCEEDED == static_cast<int>(Errc::BudgetExceeded));
static_assert(DIMLAB_E_MALFORMED_SCHEME == static_cast<int>(Errc::MalformedScheme));
static_assert(DIMLAB_E_IO == static_cast<int>(Errc::Io));

namespace {

template <class F>
int guard(dimlab_context* ctx, F&& f) {
  if (!ctx) return DIMLAB_E_INVALID_ARGUMENT;
  try {
    f();
    ctx->last_error.clear();
    return DIMLAB_OK;
  } catch (const Error& e) {
    ctx->last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const json::exception& e) {
    ctx->last_error = e.what();
    return DIMLAB_E_PARSE;
  } catch (const std::bad_alloc&) {
    ctx->last_error = "out of memory";
    return DIMLAB_E_INTERNAL;
  } catch (const std::exception& e) {
    ctx->last_error = e.what();
    return DIMLAB_E_INTERNAL;
  }
}

template <class T>
void need(const T* p, const char* what) {
  if (!p) fail(Errc::InvalidArgument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(const json& j, char** out) {
  need(out, "output");
  *out = dup_string(j.dump());
}

json parse_request(const char* request) {
  if (!request || !*request) return json::object();
  json j = json::parse(request);
  if (!j.is_object()) fail(Errc::Parse, "request must be a JSON object");
  return j;
}

GoodCylinderFilter request_filter(const json& req, const IntervalMap& map) {
  if (!req.contains("filter")) return GoodCylinderFilter::unconstrained();
  return filter_from_json(req.at("filter"), map);
}

RateMode rate_mode(const json& req) {
  std::string m = req.value("mode", std::string{"window"});
  if (m == "window") return RateMode::Window;
  if (m == "tilted") return RateMode::Tilted;
  fail(Errc::InvalidArgument, "mode must be window or tilted");
}

json level_stats_json(const std::vector<ProductLevelStats>& stats) {
  json rows = json::array();
  for (const auto& l : stats) {
    rows.push_back({{"level", l.level},
                    {"stage", l.stage},
                    {"length", l.length},
                    {"log_eta_min", l.log_eta_min},
                    {"log_eta_max", l.log_eta_max},
                    {"log_r", l.log_r},
                    {"log_R", l.log_R},
                    {"balance", l.balance},
                    {"growth_ratio", l.growth_ratio},
                    {"step_ratio", l.step_ratio},
                    {"dim_min", l.dim_min},
                    {"dim_max", l.dim_max},
                    {"exact_dim_min", l.exact_dim_min},
                    {"exact_dim_max", l.exact_dim_max},
                    {"entropy_sandwich", l.entropy_sandwich},
                    {"diameter_sandwich", l.diameter_sandwich}});
  }
  return rows;
}

}  // namespace

extern "C" {

const char* dimlab_version(void) { return "1.0.0"; }

const char* dimlab_status_name(int status) {
  if (status == DIMLAB_OK) return "Ok";
  if (status >= static_cast<int>(Errc::InvalidArgument) && status <= static_cast<int>(Errc::Io)) {
    return errc_name(static_cast<Errc>(status));
  }
  return "Internal";
}

int dimlab_context_new(int threads, uint64_t seed, dimlab_context** out) {
  if (!out) return DIMLAB_E_INVALID_ARGUMENT;
  *out = nullptr;
  auto* ctx = new (std::nothrow) dimlab_context;
  if (!ctx) return DIMLAB_E_INTERNAL;
  ctx->threads = threads > 0 ? threads : default_threads();
  ctx->seed = seed;
  *out = ctx;
  return DIMLAB_OK;
}

void dimlab_context_free(dimlab_context* ctx) { delete ctx; }

const char* dimlab_last_error(const dimlab_context* ctx) { return ctx ? ctx->last_error.c_str() : "null context"; }

int dimlab_context_threads(const dimlab_context* ctx) { return ctx ? ctx->threads : 0; }

uint64_t dimlab_context_seed(const dimlab_context* ctx) { return ctx ? ctx->seed : 0; }

void dimlab_string_free(char* s) { std::free(s); }

// ---- maps and measures ----------------------------------------------------------------

int dimlab_map_from_json(dimlab_context* ctx, const char* text, dimlab_map** out) {
  return guard(ctx, [&] {
    need(text, "json");
    need(out, "output");
    *out = nullptr;
    IntervalMap m = map_from_json(json::parse(text));
    *out = new dimlab_map{std::move(m)};
  });
}

int dimlab_map_load(dimlab_context* ctx, const char* path, dimlab_map** out) {
  return guard(ctx, [&] {
    need(path, "path");
    need(out, "output");
    *out = nullptr;
    IntervalMap m = load_map(path);
    *out = new dimlab_map{std::move(m)};
  });
}

void dimlab_map_free(dimlab_map* map) { delete map; }

int dimlab_map_branch_count(dimlab_context* ctx, const dimlab_map* map, int* out) {
  return guard(ctx, [&] {
    need(map, "map");
    need(out, "output");
    *out = map->map.size();
  });
}

int dimlab_map_eval(dimlab_context* ctx, const dimlab_map* map, double x, double* out) {
  return guard(ctx, [&] {
    need(map, "map");
    need(out, "output");
    *out = map->map.eval(x);
  });
}

int dimlab_map_report(dimlab_context* ctx, const dimlab_map* map, char** out) {
  return guard(ctx, [&] {
    need(map, "map");
    emit(map_report(map->map), out);
  });
}

int dimlab_measure_from_json(dimlab_context* ctx, const char* text, dimlab_measure** out) {
  return guard(ctx, [&] {
    need(text, "json");
    need(out, "output");
    *out = nullptr;
    MeasureSpec mu = measure_from_json(json::parse(text));
    *out = new dimlab_measure{std::move(mu)};
  });
}

int dimlab_measure_load(dimlab_context* ctx, const char* path, dimlab_measure** out) {
  return guard(ctx, [&] {
    need(path, "path");
    need(out, "output");
    *out = nullptr;
    MeasureSpec mu = load_measure(path);
    *out = new dimlab_measure{std::move(mu)};
  });
}

void dimlab_measure_free(dimlab_measure* mu) { delete mu; }

int dimlab_entropy(dimlab_context* ctx, const dimlab_measure* mu, double* out) {
  return guard(ctx, [&] {
    need(mu, "measure");
    need(out, "output");
    *out = mu->spec.entropy();
  });
}

int dimlab_lyapunov(dimlab_context* ctx, const dimlab_map* map, const dimlab_measure* mu, double* out) {
  return guard(ctx, [&] {
    need(map, "map");
    need(mu, "measure");
    need(out, "output");
    MeasureEvaluator eval(map->map, 16, 32, ctx->threads);
    *out = eval.lyapunov(mu->spec);
  });
}

int dimlab_metric(dimlab_context* ctx, const dimlab_map* map, const dimlab_measure* mu, const dimlab_measure* nu,
                  int moments, char** out) {
  return guard(ctx, [&] {
    need(map, "map");
    need(mu, "measure");
    need(nu, "measure");
    if (moments < 1) fail(Errc::InvalidArgument, "need at least one moment");
    MeasureEvaluator eval(map->map, 16, moments, ctx->threads);
    auto d = metric_d(eval.moments(mu->spec), eval.moments(nu->spec), MomentFamily(moments));
    emit({{"value", d.value}, {"truncation_bound", d.truncation_bound}, {"quadrature_bound", d.quadrature_bound},
          {"moments", moments}},
         out);
  });
}

// ---- cylinders and pressure ----------------------------------------------------------------

int dimlab_cylinders(dimlab_context* ctx, const dimlab_map* map, int depth, char** out) {
  return guard(ctx, [&] {
    need(map, "map");
    json rows = json::array();
    enumerate_cylinders(map->map, depth, [&](const Cylinder& c) {
      rows.push_back({{"word", word_to_string(c.word)}, {"lo", c.lo}, {"hi", c.hi}, {"diam", c.diam}, {"sum_g", c.sum_g}});
    }, std::uint64_t{1} << 20);
    emit(rows, out);
  });
}

int dimlab_lemma21_gap(dimlab_context* ctx, const dimlab_map* map, int n, double* out) {
  return guard(ctx, [&] {
    need(map, "map");
    need(out, "output");
    *out = lemma21_gap(map->map, n, ctx->threads);
  });
}

int dimlab_pressure(dimlab_context* ctx, const dimlab_map* map, const char* request, char** out) {
  return guard(ctx, [&] {
    need(map, "map");
    json req = parse_request(request);
    auto filter = request_filter(req, map->map);
    int n_min = req.value("n_min", 8), n_max = req.value("n_max", 16);
    std::vector<double> grid = req.value("s", std::vector<double>{0.0, 0.5, 1.0});
    PressureTable table(map->map, filter, n_min, n_max, false, ctx->threads);
    json rows = json::array();
    for (double s : grid) {
      if (!(s >= 0.0)) fail(Errc::InvalidArgument, "exponents must be non-negative");
      auto e = table.estimate(s);
      rows.push_back({{"s", s},
                      {"rate", e.rate},
                      {"rate_stderr", e.rate_stderr},
                      {"rate_sup", e.rate_sup},
                      {"rate_sup_stderr", e.rate_sup_stderr},
                      {"rate_gap", std::fabs(e.rate - e.rate_sup)},
                      {"log_sums_diam", e.log_sums_diam},
                      {"log_sums_sup", e.log_sums_sup}});
    }
    emit({{"n_min", n_min}, {"n_max", n_max}, {"counts", table.counts()}, {"filter", filter_to_json(filter)},
          {"rows", rows}},
         out);
  });
}

int dimlab_bowen(dimlab_context* ctx, const dimlab_map* map, const char* request, char** out) {
  return guard(ctx, [&] {
    need(map, "map");
    json req = parse_request(request);
    auto filter = request_filter(req, map->map);
    RateMode mode = rate_mode(req);
    BowenOptions bo = default_bowen_options(mode);
    bo.n_min = req.value("n_min", bo.n_min);
    bo.n_max = req.value("n_max", bo.n_max);
    bo.s_tol = req.value("s_tol", bo.s_tol);
    bo.threads = ctx->threads;
    json res{{"mode", rate_mode_name(mode)}, {"n_min", bo.n_min}, {"n_max", bo.n_max}, {"filter", filter_to_json(filter)}};
    if (req.contains("sweep")) {
      const auto& spec = req.at("sweep");
      auto eps = spec.is_string() && spec.get<std::string>() == "default" ? kDefaultEpsSweep
                                                                           : spec.get<std::vector<double>>();
      auto sw = bowen_sweep(map->map, filter, eps, bo);
      res["eps"] = sw.eps;
      res["roots"] = sw.roots;
      res["s"] = sw.extrapolated;
      res["spread"] = sw.spread;
    } else {
      auto r = bowen_root(map->map, filter, bo);
      res["s"] = r.s;
      res["rate_at_zero"] = r.rate_at_zero;
      res["bracket"] = {r.bracket_lo, r.bracket_hi};
      res["iterations"] = r.iterations;
    }
    emit(res, out);
  });
}

int dimlab_sup_ratio(dimlab_context* ctx, const dimlab_map* map, const char* request, char** out) {
  return guard(ctx, [&] {
    need(map, "map");
    json req = parse_request(request);
    SupRatioOptions so;
    so.order = req.value("order", 1);
    so.restarts = req.value("restarts", so.restarts);
    so.iterations = req.value("iterations", so.iterations);
    so.lyapunov_floor = req.value("lyapunov_floor", so.lyapunov_floor);
    so.seed = ctx->seed;
    so.threads = ctx->threads;
    if (req.contains("ball")) {
      const json& b = req.at("ball");
      so.ball = ConstraintBall{measure_from_json(b.at("center")), b.at("radius").get<double>()};
    }
    MeasureEvaluator eval(map->map, req.value("depth", 16), 32, ctx->threads);
    auto r = sup_dim_ratio(eval, so);
    emit({{"s_sup", r.s_sup},
          {"params", r.params},
          {"entropy", r.entropy},
          {"lyapunov", r.lyapunov},
          {"ball_distance", r.ball_distance},
          {"feasible_restarts", r.feasible_restarts},
          {"argmax", measure_to_json(r.argmax)},
          {"order", so.order}},
         out);
  });
}

// ---- schemes ---------------------------------------------------------------------------

int dimlab_moran_build(dimlab_context* ctx, const dimlab_map* map, const dimlab_measure* mu, const char* request,
                       dimlab_scheme** out) {
  return guard(ctx, [&] {
    need(map, "map");
    need(mu, "measure");
    need(out, "output");
    *out = nullptr;
    json req = parse_request(request);
    std::string kind = req.value("kind", std::string{"product"});
    if (kind == "cylinder") {
      auto s = cylinder_scheme(map->map, req.value("depth", 10), mu->spec);
      *out = new dimlab_scheme{std::move(s)};
      return;
    }
    if (kind != "product") fail(Errc::InvalidArgument, "kind must be product or cylinder");
    MoranOptions mo;
    mo.stages = req.value("stages", mo.stages);
    mo.pad_symbol = req.value("pad_symbol", mo.pad_symbol);
    mo.strict = req.value("strict", mo.strict);
    mo.m_min = req.value("m_min", mo.m_min);
    mo.family_size = req.value("family_size", mo.family_size);
    mo.length_budget = req.value("length_budget", mo.length_budget);
    mo.harvest.delta = req.value("delta", mo.harvest.delta);
    mo.harvest.samples = req.value("samples", mo.harvest.samples);
    mo.harvest.seed = ctx->seed;
    mo.harvest.threads = ctx->threads;
    ProductScheme ps = req.value("padded", false) ? build_moran_padded(map->map, mu->spec, mo)
                                                  : build_moran_M(map->map, mu->spec, mo);
    *out = new dimlab_scheme{std::move(ps)};
  });
}

int dimlab_scheme_from_json(dimlab_context* ctx, const char* text, dimlab_scheme** out) {
  return guard(ctx, [&] {
    need(text, "json");
    need(out, "output");
    *out = nullptr;
    json j = json::parse(text);
    if (j.value("kind", std::string{"explicit"}) == "product") {
      *out = new dimlab_scheme{product_scheme_from_json(j)};
    } else {
      *out = new dimlab_scheme{explicit_scheme_from_json(j)};
    }
  });
}

int dimlab_scheme_load(dimlab_context* ctx, const char* path, dimlab_scheme** out) {
  return guard(ctx, [&] {
    need(path, "path");
    need(out, "output");
    *out = nullptr;
    json j = read_json_file(path);
    if (j.value("kind", std::string{"explicit"}) == "product") {
      *out = new dimlab_scheme{product_scheme_from_json(j)};
    } else {
      *out = new dimlab_scheme{explicit_scheme_from_json(j)};
    }
  });
}

void dimlab_scheme_free(dimlab_scheme* scheme) { delete scheme; }

int dimlab_scheme_to_json(dimlab_context* ctx, const dimlab_scheme* scheme, char** out) {
  return guard(ctx, [&] {
    need(scheme, "scheme");
    if (auto* ps = std::get_if<ProductScheme>(&scheme->scheme)) {
      emit(product_scheme_to_json(*ps), out);
    } else {
      emit(scheme_to_json(std::get<MoranScheme>(scheme->scheme)), out);
    }
  });
}

int dimlab_scheme_check(dimlab_context* ctx, const dimlab_scheme* scheme, const dimlab_map* map, char** out) {
  return guard(ctx, [&] {
    need(scheme, "scheme");
    if (auto* ps = std::get_if<ProductScheme>(&scheme->scheme)) {
      need(map, "map");
      auto sr = check_schedule(ps->schedule);
      json sched{{"max_step_ratio", sr.max_step_ratio},
                 {"partial_sum_ratio", sr.partial_sum_ratio},
                 {"pad_eps", sr.pad_eps},
                 {"pad_ratio", sr.pad_ratio}};
      emit({{"kind", "product"}, {"levels", level_stats_json(level_statistics(map->map, *ps, 8, ctx->seed))},
            {"schedule", sched}},
           out);
      return;
    }
    auto rep = check_abstract_scheme(std::get<MoranScheme>(scheme->scheme));
    json rows = json::array();
    for (const auto& l : rep.levels) {
      rows.push_back({{"level", l.level},
                      {"intervals", l.intervals},
                      {"log_r", l.log_r},
                      {"log_R", l.log_R},
                      {"growth_ratio", l.growth_ratio},
                      {"step_ratio", l.step_ratio},
                      {"balance", l.balance},
                      {"dim_min", l.dim_min},
                      {"dim_max", l.dim_max}});
    }
    emit({{"kind", "explicit"}, {"levels", rows}, {"growth_flag", rep.growth_flag}, {"balance_flag", rep.balance_flag},
          {"violated", rep.violated()}},
         out);
  });
}

// ---- estimators -------------------------------------------------------------------------

int dimlab_sample_measure(dimlab_context* ctx, const dimlab_map* map, const dimlab_measure* mu, size_t count, int depth,
                          double* out) {
  return guard(ctx, [&] {
    need(map, "map");
    need(mu, "measure");
    need(out, "output");
    auto pts = sample_measure_points(map->map, mu->spec, count, depth, ctx->seed, ctx->threads);
    std::copy(pts.begin(), pts.end(), out);
  });
}

int dimlab_sample_scheme(dimlab_context* ctx, const dimlab_scheme* scheme, const dimlab_map* map, size_t count,
                         double* out) {
  return guard(ctx, [&] {
    need(scheme, "scheme");
    need(out, "output");
    std::vector<double> pts;
    if (auto* ps = std::get_if<ProductScheme>(&scheme->scheme)) {
      need(map, "map");
      pts = sample_product_points(map->map, *ps, count, ctx->seed, ctx->threads);
    } else {
      pts = sample_scheme_points(std::get<MoranScheme>(scheme->scheme), count, ctx->seed, ctx->threads);
    }
    std::copy(pts.begin(), pts.end(), out);
  });
}

int dimlab_box_dimension(dimlab_context* ctx, const double* points, size_t count, int j_min, int j_max, char** out) {
  return guard(ctx, [&] {
    if (count > 0) need(points, "points");
    auto r = box_dimension(std::vector<double>(points, points + count), j_min, j_max);
    emit({{"slope", r.slope}, {"intercept", r.intercept}, {"r2", r.r2}, {"points", r.points}, {"j", r.j},
          {"counts", r.counts}},
         out);
  });
}

int dimlab_trace(dimlab_context* ctx, const dimlab_map* map, const dimlab_measure* mu, const dimlab_scheme* scheme,
                 const char* request, char** out) {
  return guard(ctx, [&] {
    need(map, "map");
    need(mu, "measure");
    json req = parse_request(request);
    int grid = req.value("grid_points", 48);
    MeasureEvaluator eval(map->map, 16, 32, ctx->threads);
    MomentVector target = eval.moments(mu->spec);
    GenericTrace tr;
    json origin;
    if (scheme) {
      auto* ps = std::get_if<ProductScheme>(&scheme->scheme);
      if (!ps) fail(Errc::InvalidArgument, "traces need a product scheme");
      auto sample = req.value("sample", std::uint64_t{0});
      auto rng = task_rng(ctx->seed, sample);
      Word w = sample_scheme_word(*ps, rng);
      tr = generic_trace(map->map, w, target, grid);
      origin = {{"scheme_sample", sample}, {"length", w.size()}};
    } else if (req.contains("word")) {
      Word w = parse_word(req.at("word").get<std::string>());
      check_word(map->map, w);
      tr = generic_trace(map->map, w, target, grid);
      origin = {{"length", w.size()}};
    } else {
      double x0 = req.value("x0", 0.5);
      int n_max = req.value("n_max", 1000);
      tr = generic_trace(map->map, x0, n_max, target, grid);
      origin = {{"x0", x0}, {"n_max", n_max}};
    }
    emit({{"origin", origin}, {"n", tr.n}, {"distance", tr.distance}, {"tail_liminf", tr.tail_liminf},
          {"tail_limsup", tr.tail_limsup}},
         out);
  });
}

// ---- reproductions -------------------------------------------------------------------------

int dimlab_repro_names(dimlab_context* ctx, char** out) {
  return guard(ctx, [&] {
    need(out, "output");
    std::string s;
    for (const auto& n : repro_names()) s += n + "\n";
    *out = dup_string(s);
  });
}

int dimlab_repro(dimlab_context* ctx, const char* name, char** out) {
  return guard(ctx, [&] {
    need(name, "name");
    need(out, "output");
    ReproOptions o;
    o.seed = ctx->seed;
    o.threads = ctx->threads;
    *out = dup_string(run_repro(name, o).csv());
  });
}

}  // extern "C"
