#include "dimlab/json_io.hpp"

#include <fstream>
#include <sstream>

#include "dimlab/error.hpp"

namespace dimlab {

namespace {

template <class F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    fail(Errc::Parse, std::string(what) + ": " + e.what());
  }
}

BranchKind kind_from_name(const std::string& s) {
  if (s == "linear") return BranchKind::Linear;
  if (s == "manneville") return BranchKind::Manneville;
  if (s == "polynomial") return BranchKind::Polynomial;
  fail(Errc::Parse, "unknown branch kind '" + s + "'");
}

}  // namespace

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::Io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(Errc::Parse, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail(Errc::Io, "cannot write " + path);
  out << j.dump(1) << '\n';
}

// ---- maps ----------------------------------------------------------------------

IntervalMap map_from_json(const json& j) {
  return guarded("map", [&] {
    std::string name = j.value("name", std::string{});
    if (j.contains("family")) {
      std::string fam = j.at("family").get<std::string>();
      IntervalMap m;
      if (fam == "manneville") m = IntervalMap::manneville(j.value("beta", 1.0));
      else if (fam == "doubling") m = IntervalMap::doubling();
      else if (fam == "middle_thirds") m = IntervalMap::middle_thirds();
      else if (fam == "linear") {
        m = IntervalMap::linear(j.at("slopes").get<std::vector<double>>(), j.at("left_ends").get<std::vector<double>>());
      } else {
        fail(Errc::Parse, "unknown map family '" + fam + "'");
      }
      if (name.empty()) return m;
      return IntervalMap(m.branches(), name);
    }
    std::vector<BranchSpec> bs;
    for (const auto& b : j.at("branches")) {
      BranchSpec s;
      s.kind = kind_from_name(b.at("kind").get<std::string>());
      switch (s.kind) {
        case BranchKind::Linear:
          s.params = {b.at("slope").get<double>(), b.at("offset").get<double>()};
          break;
        case BranchKind::Manneville:
          s.params = {b.value("beta", 1.0), b.at("shift").get<double>()};
          break;
        case BranchKind::Polynomial:
          s.lo = b.at("lo").get<double>();
          s.hi = b.at("hi").get<double>();
          s.params = b.at("coefficients").get<std::vector<double>>();
          break;
      }
      bs.push_back(std::move(s));
    }
    return IntervalMap(std::move(bs), name);
  });
}

IntervalMap load_map(const std::string& path) { return map_from_json(read_json_file(path)); }

json map_to_json(const IntervalMap& map) {
  json bs = json::array();
  for (const auto& b : map.branches()) {
    json o{{"kind", branch_kind_name(b.kind)}};
    switch (b.kind) {
      case BranchKind::Linear:
        o["slope"] = b.params[0];
        o["offset"] = b.params[1];
        break;
      case BranchKind::Manneville:
        o["beta"] = b.params[0];
        o["shift"] = b.params[1];
        break;
      case BranchKind::Polynomial:
        o["lo"] = b.lo;
        o["hi"] = b.hi;
        o["coefficients"] = b.params;
        break;
    }
    bs.push_back(o);
  }
  return json{{"name", map.name()}, {"branches", bs}};
}

json map_report(const IntervalMap& map) {
  json bs = json::array();
  for (const auto& b : map.branches()) {
    bs.push_back({{"index", b.index}, {"kind", branch_kind_name(b.kind)}, {"lo", b.lo}, {"hi", b.hi},
                  {"increasing", b.increasing()}});
  }
  json fps = json::array();
  for (const auto& fp : map.fixed_points()) {
    fps.push_back({{"branch", fp.branch}, {"x", fp.x}, {"derivative", fp.derivative}, {"parabolic", fp.parabolic}});
  }
  return json{{"name", map.name()},     {"branches", bs},          {"fixed_points", fps},
              {"linear", map.is_linear()}, {"gaps", map.has_gaps()}};
}

// ---- measures -------------------------------------------------------------------

MeasureSpec measure_from_json(const json& j) {
  return guarded("measure", [&] {
    std::string type = j.at("type").get<std::string>();
    if (type == "bernoulli") return MeasureSpec::bernoulli(j.at("p").get<std::vector<double>>());
    if (type == "dirac") return MeasureSpec::dirac(j.at("branch").get<int>());
    if (type == "markov") {
      int order = j.value("order", 1);
      const json& t = j.at("transition");
      if (order == 1 && t.is_array() && !t.empty() && t.front().is_array()) {
        return MeasureSpec::markov(t.get<std::vector<std::vector<double>>>());
      }
      std::vector<double> flat;
      int m = 0;
      for (const auto& row : t) {
        auto r = row.get<std::vector<double>>();
        m = static_cast<int>(r.size());
        flat.insert(flat.end(), r.begin(), r.end());
      }
      return MeasureSpec::markov_order(order, j.value("m", m), flat);
    }
    if (type == "block") {
      std::vector<Word> words;
      for (const auto& w : j.at("words")) words.push_back(parse_word(w.get<std::string>()));
      return MeasureSpec::block_bernoulli(j.at("n").get<int>(), std::move(words), j.at("weights").get<std::vector<double>>());
    }
    fail(Errc::Parse, "unknown measure type '" + type + "'");
  });
}

MeasureSpec load_measure(const std::string& path) { return measure_from_json(read_json_file(path)); }

json measure_to_json(const MeasureSpec& mu) {
  const auto& v = mu.variant();
  if (auto* b = std::get_if<Bernoulli>(&v)) return json{{"type", "bernoulli"}, {"p", b->p}};
  if (auto* d = std::get_if<DiracFixed>(&v)) return json{{"type", "dirac"}, {"branch", d->branch}};
  if (auto* mk = std::get_if<Markov>(&v)) {
    json rows = json::array();
    for (std::size_t r = 0; r * static_cast<std::size_t>(mk->m) < mk->transition.size(); ++r) {
      auto first = mk->transition.begin() + static_cast<std::ptrdiff_t>(r * static_cast<std::size_t>(mk->m));
      rows.push_back(std::vector<double>(first, first + mk->m));
    }
    return json{{"type", "markov"}, {"order", mk->order}, {"m", mk->m}, {"transition", rows}};
  }
  const auto& bb = std::get<BlockBernoulli>(v);
  json words = json::array();
  for (const auto& w : bb.words) words.push_back(word_to_string(w));
  return json{{"type", "block"}, {"n", bb.n}, {"words", words}, {"weights", bb.weights}};
}

// ---- filters ----------------------------------------------------------------------

GoodCylinderFilter filter_from_json(const json& j, const IntervalMap& map) {
  return guarded("filter", [&] {
    GoodCylinderFilter f;
    f.k = j.value("k", 0);
    f.use_delta = j.value("use_delta", true);
    f.delta = j.value("delta", 0.1);
    f.eps = j.value("eps", 0.05);
    if (j.contains("alpha")) {
      f.alpha = j.at("alpha").get<std::vector<double>>();
    } else if (j.contains("measure") && f.k > 0) {
      auto mv = moments(measure_from_json(j.at("measure")), map);
      f.alpha.assign(mv.m.begin(), mv.m.begin() + f.k);
    }
    f.validate();
    return f;
  });
}

json filter_to_json(const GoodCylinderFilter& f) {
  return json{{"k", f.k}, {"alpha", f.alpha}, {"use_delta", f.use_delta}, {"delta", f.delta}, {"eps", f.eps}};
}

// ---- schemes ------------------------------------------------------------------------

json scheme_to_json(const MoranScheme& s) {
  json levels = json::array();
  for (const auto& L : s.levels) {
    levels.push_back({{"lo", L.lo}, {"hi", L.hi}, {"weight", L.weight}, {"parent", L.parent}});
  }
  return json{{"kind", "explicit"}, {"name", s.name}, {"levels", levels}};
}

MoranScheme explicit_scheme_from_json(const json& j) {
  return guarded("scheme", [&] {
    if (j.value("kind", std::string{"explicit"}) != "explicit") fail(Errc::Parse, "not an explicit scheme");
    MoranScheme s;
    s.name = j.value("name", std::string{});
    for (const auto& L : j.at("levels")) {
      MoranLevel lv;
      lv.lo = L.at("lo").get<std::vector<double>>();
      lv.hi = L.at("hi").get<std::vector<double>>();
      lv.weight = L.at("weight").get<std::vector<double>>();
      lv.parent = L.at("parent").get<std::vector<std::int64_t>>();
      s.levels.push_back(std::move(lv));
    }
    s.validate();
    return s;
  });
}

json product_scheme_to_json(const ProductScheme& s) {
  const auto& sc = s.schedule;
  json blocks = json::array();
  for (const auto& b : s.blocks) {
    json words = json::array();
    for (const auto& w : b.words) words.push_back(word_to_string(w));
    blocks.push_back({{"stage", b.stage},       {"index", b.index},     {"length", b.length}, {"pad", b.pad},
                      {"eps", b.eps},           {"mass", b.mass},       {"words", words},     {"log_rho", b.log_rho},
                      {"log_mu", b.log_mu},     {"log_diam", b.log_diam}, {"sum_g", b.sum_g}});
  }
  return json{{"kind", "product"},
              {"map", s.map_name},
              {"padded", s.padded},
              {"pad_symbol", s.pad_symbol},
              {"delta", s.delta},
              {"targets", {{"moments", s.targets.moments}, {"lyapunov", s.targets.lyapunov}, {"entropy", s.targets.entropy}}},
              {"schedule", {{"eps", sc.eps}, {"cont_rank", sc.cont_rank}, {"m", sc.m}, {"pad_factor", sc.pad_factor},
                            {"lengths", sc.lengths}, {"total_length", sc.total_length()}}},
              {"blocks", blocks}};
}

ProductScheme product_scheme_from_json(const json& j) {
  return guarded("scheme", [&] {
    if (j.value("kind", std::string{}) != "product") fail(Errc::Parse, "not a product scheme");
    ProductScheme s;
    s.map_name = j.value("map", std::string{});
    s.padded = j.at("padded").get<bool>();
    s.pad_symbol = j.at("pad_symbol").get<int>();
    s.delta = j.at("delta").get<double>();
    const json& t = j.at("targets");
    s.targets.moments = t.at("moments").get<std::vector<double>>();
    s.targets.lyapunov = t.at("lyapunov").get<double>();
    s.targets.entropy = t.at("entropy").get<double>();
    const json& sc = j.at("schedule");
    s.schedule.eps = sc.at("eps").get<std::vector<double>>();
    s.schedule.cont_rank = sc.at("cont_rank").get<std::vector<int>>();
    s.schedule.m = sc.at("m").get<std::vector<int>>();
    s.schedule.pad_factor = sc.at("pad_factor").get<std::vector<int>>();
    s.schedule.relabel();
    for (const auto& b : j.at("blocks")) {
      BlockFamily f;
      f.stage = b.at("stage").get<int>();
      f.index = b.at("index").get<int>();
      f.length = b.at("length").get<int>();
      f.pad = b.at("pad").get<int>();
      f.eps = b.at("eps").get<double>();
      f.mass = b.at("mass").get<double>();
      for (const auto& w : b.at("words")) f.words.push_back(parse_word(w.get<std::string>()));
      f.log_rho = b.at("log_rho").get<std::vector<double>>();
      f.log_mu = b.at("log_mu").get<std::vector<double>>();
      f.log_diam = b.at("log_diam").get<std::vector<double>>();
      f.sum_g = b.at("sum_g").get<std::vector<double>>();
      s.blocks.push_back(std::move(f));
    }
    if (s.blocks.size() != s.schedule.lengths.size()) fail(Errc::MalformedScheme, "block count does not match the schedule");
    return s;
  });
}

}  // namespace dimlab
