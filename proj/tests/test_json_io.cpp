#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "dimlab/error.hpp"
#include "dimlab/json_io.hpp"

using namespace dimlab;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Io;
}

}  // namespace

TEST_CASE("map documents") {
  auto man = map_from_json(json::parse(R"({"family": "manneville", "beta": 1})"));
  auto again = map_from_json(map_to_json(man));
  for (double x : {0.0, 0.1, 0.5, 0.61, 0.9, 1.0}) CHECK(again.eval(x) == man.eval(x));
  CHECK(map_report(man)["fixed_points"].size() == 2);

  auto lin = map_from_json(json::parse(
      R"({"branches": [{"kind": "linear", "slope": 2, "offset": 0}, {"kind": "linear", "slope": 4, "offset": -3}]})"));
  CHECK(lin.size() == 2);
  CHECK(lin.eval(0.8) == doctest::Approx(0.2));

  CHECK(code_of([] { map_from_json(json::parse(R"({"family": "tent"})")); }) != Errc::Io);
  CHECK(code_of([] { load_map("/nonexistent/map.json"); }) == Errc::Io);
}

TEST_CASE("measure documents") {
  std::vector<MeasureSpec> specs{MeasureSpec::bernoulli({0.3, 0.7}),
                                 MeasureSpec::markov_order(1, 2, {0.9, 0.1, 0.2, 0.8}), MeasureSpec::dirac(1),
                                 MeasureSpec::block_bernoulli(2, {parse_word("01"), parse_word("11")}, {0.25, 0.75})};
  for (const auto& s : specs) {
    auto back = measure_from_json(measure_to_json(s));
    CHECK(back.entropy() == s.entropy());
    CHECK(measure_to_json(back) == measure_to_json(s));
  }
  CHECK(code_of([] { measure_from_json(json::parse(R"({"type": "bernoulli", "p": [0.5, 0.6]})")); }) ==
        Errc::InvalidArgument);
}

TEST_CASE("filter documents") {
  auto dbl = IntervalMap::doubling();
  auto f = filter_from_json(json::parse(R"({"k": 1, "alpha": [0.5], "delta": 0.1, "eps": 0.05})"), dbl);
  CHECK(f.k == 1);
  auto g = filter_from_json(filter_to_json(f), dbl);
  CHECK(g.alpha == f.alpha);
  CHECK(g.eps == f.eps);
  auto m = filter_from_json(json::parse(R"({"k": 1, "measure": {"type": "bernoulli", "p": [0.5, 0.5]}, "delta": 0.1, "eps": 0.05})"), dbl);
  CHECK(m.alpha[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("scheme documents") {
  auto s = cylinder_scheme(IntervalMap::middle_thirds(), 4, MeasureSpec::bernoulli({0.5, 0.5}));
  auto back = explicit_scheme_from_json(scheme_to_json(s));
  back.validate();
  CHECK(back.levels.size() == 4);
  CHECK(back.levels[3].lo == s.levels[3].lo);
  CHECK(back.levels[3].weight == s.levels[3].weight);

  MoranOptions mo;
  mo.stages = 2;
  auto ps = build_moran_M(IntervalMap::doubling(), MeasureSpec::bernoulli({0.6, 0.4}), mo);
  auto pb = product_scheme_from_json(product_scheme_to_json(ps));
  CHECK(pb.blocks.size() == ps.blocks.size());
  CHECK(pb.blocks[3].words == ps.blocks[3].words);
  CHECK(pb.schedule.lengths == ps.schedule.lengths);
  CHECK(product_scheme_to_json(pb) == product_scheme_to_json(ps));

  auto path = (std::filesystem::temp_directory_path() / "dimlab_scheme_roundtrip.json").string();
  write_json_file(path, scheme_to_json(s));
  CHECK(read_json_file(path) == scheme_to_json(s));
  std::remove(path.c_str());

  auto bad = scheme_to_json(s);
  bad["levels"][1]["weight"][0] = 0.9;
  CHECK(code_of([&] { explicit_scheme_from_json(bad).validate(); }) == Errc::MalformedScheme);
}
