#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "sloloop/dependency_graph.hpp"
#include "sloloop/errors.hpp"
#include "sloloop/preprocess.hpp"
#include "sloloop/random.hpp"

using namespace sloloop;
using oracle::pearson_oracle;

namespace {

TimeSeries series_of(std::vector<std::optional<double>> values, Tick start = 0) {
  TimeSeries ts{{"c", "m"}, {}};
  for (std::size_t i = 0; i < values.size(); ++i)
    ts.samples.push_back({start + static_cast<Tick>(i), values[i]});
  return ts;
}

std::vector<double> random_vector(RandomStream& rng, std::size_t n, double lo = -10,
                                  double hi = 10) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("clean_and_interpolate") {
  SUBCASE("interior gap is a linear midpoint") {
    CHECK(clean_and_interpolate(series_of({1.0, std::nullopt, 3.0})).values ==
          std::vector<double>{1, 2, 3});
  }
  SUBCASE("leading gap takes the nearest value") {
    CHECK(clean_and_interpolate(series_of({std::nullopt, 5.0, 5.0})).values ==
          std::vector<double>{5, 5, 5});
  }
  SUBCASE("trailing gap and sparse timestamps") {
    TimeSeries ts{{"c", "m"}, {{10, 0.0}, {14, 4.0}, {16, std::nullopt}}};
    const auto clean = clean_and_interpolate(ts);
    CHECK(clean.start == 10);
    CHECK(clean.values == std::vector<double>{0, 1, 2, 3, 4, 4, 4});
  }
  SUBCASE("explicit grid range") {
    TimeSeries ts{{"c", "m"}, {{2, 1.0}, {4, 3.0}}};
    const auto clean = clean_and_interpolate(ts, 1, std::pair<Tick, Tick>{0, 6});
    CHECK(clean.values == std::vector<double>{1, 1, 1, 2, 3, 3, 3});
  }
  SUBCASE("fewer than two observations") {
    try {
      clean_and_interpolate(series_of({std::nullopt, 1.0, std::nullopt}));
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::insufficient_data);
    }
  }
  SUBCASE("a 100-sigma spike is clipped to mean + 3 sigma") {
    RandomStream rng(3);
    std::vector<std::optional<double>> raw;
    std::vector<double> base;
    for (int i = 0; i < 200; ++i) {
      base.push_back(10.0 + rng.normal());
      raw.emplace_back(base.back());
    }
    const double base_sigma = [&] {
      const double mu = std::accumulate(base.begin(), base.end(), 0.0) / base.size();
      double acc = 0;
      for (double v : base) acc += (v - mu) * (v - mu);
      return std::sqrt(acc / base.size());
    }();
    const std::size_t spike_at = 120;
    raw[spike_at] = 10.0 + 100.0 * base_sigma;

    // Direct mean / sigma over the observed values, spike included.
    std::vector<double> observed;
    for (auto& v : raw) observed.push_back(*v);
    const double mu = std::accumulate(observed.begin(), observed.end(), 0.0) / observed.size();
    double acc = 0;
    for (double v : observed) acc += (v - mu) * (v - mu);
    const double sigma = std::sqrt(acc / observed.size());

    const auto clean = clean_and_interpolate(series_of(raw));
    CHECK(clean.values[spike_at] == doctest::Approx(mu + 3 * sigma).epsilon(1e-12));
    for (std::size_t i = 0; i < raw.size(); ++i)
      if (i != spike_at) CHECK(clean.values[i] == *raw[i]);
  }
}

TEST_CASE("minmax_normalize") {
  CHECK(minmax_normalize(std::vector<double>{2, 4, 6}) == std::vector<double>{0, 0.5, 1});
  CHECK(minmax_normalize(std::vector<double>{5, 5, 5}) == std::vector<double>{0, 0, 0});
  CHECK_THROWS_AS(minmax_normalize(std::vector<double>{}), Error);

  RandomStream rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto v = random_vector(rng, 2 + rng.below(60), -1e3, 1e3);
    const auto out = minmax_normalize(v);
    CHECK(*std::min_element(out.begin(), out.end()) == 0.0);
    CHECK(*std::max_element(out.begin(), out.end()) == 1.0);
    // Sort-order oracle: argsort of input and output agree.
    std::vector<std::size_t> ia(v.size()), ib(v.size());
    std::iota(ia.begin(), ia.end(), 0);
    std::iota(ib.begin(), ib.end(), 0);
    std::stable_sort(ia.begin(), ia.end(), [&](auto x, auto y) { return v[x] < v[y]; });
    std::stable_sort(ib.begin(), ib.end(), [&](auto x, auto y) { return out[x] < out[y]; });
    CHECK(ia == ib);
  }
}

TEST_CASE("minmax_normalize properties") {
  RandomStream rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const auto v = random_vector(rng, 3 + rng.below(40));
    const auto once = minmax_normalize(v);
    CHECK(minmax_normalize(once) == once);  // idempotent

    const double alpha = rng.uniform(0.01, 100);
    const double beta = rng.uniform(-50, 50);
    std::vector<double> affine(v.size());
    std::transform(v.begin(), v.end(), affine.begin(),
                   [&](double x) { return alpha * x + beta; });
    const auto moved = minmax_normalize(affine);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(moved[i] == doctest::Approx(once[i]).epsilon(1e-9));
  }
}

TEST_CASE("correlation") {
  RandomStream rng(23);
  const auto a = random_vector(rng, 50);
  std::vector<double> neg(a.size());
  std::transform(a.begin(), a.end(), neg.begin(), [](double x) { return -x; });

  CHECK(correlation(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(correlation(a, neg) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(correlation(a, std::vector<double>(50, 3.0)) == 0.0);
  CHECK_THROWS_AS(correlation(a, std::vector<double>(49, 1.0)), Error);
  CHECK_THROWS_AS(correlation(std::vector<double>{1, 2}, std::vector<double>{1, 2}), Error);

  for (int trial = 0; trial < 1000; ++trial) {
    const auto x = random_vector(rng, 50);
    const auto y = random_vector(rng, 50);
    const double r = correlation(x, y);
    CHECK(std::abs(r - pearson_oracle(x, y)) < 1e-9);
    CHECK(std::abs(r - correlation(y, x)) < 1e-12);
    CHECK(r >= -1.0);
    CHECK(r <= 1.0);
  }
}

TEST_CASE("build_dependency_graph") {
  Descriptor d;
  d.components = {{"camera", ComponentKind::service},
                  {"motion-detector", ComponentKind::service},
                  {"recognizer", ComponentKind::service}};
  d.dependencies = {{"camera", "motion-detector"}, {"motion-detector", "recognizer"}};

  SUBCASE("declared edges present regardless of data") {
    const auto g = build_dependency_graph(d, {});
    const GraphEdge* e = g.find_edge("camera", "motion-detector", EdgeOrigin::declared);
    REQUIRE(e != nullptr);
    CHECK(e->weight == 1.0);
    CHECK(g.find_edge("motion-detector", "camera", EdgeOrigin::declared) == nullptr);
  }

  SUBCASE("identical series yield a measured edge of weight 1") {
    CleanSeries a{{"recognizer", "x"}, 0, 1, {1, 3, 2, 5, 4}};
    CleanSeries b{{"motion-detector", "y"}, 0, 1, a.values};
    const auto g = build_dependency_graph(d, {a, b}, 0.7);
    const GraphEdge* e = g.find_edge("recognizer/x", "motion-detector/y", EdgeOrigin::measured);
    REQUIRE(e != nullptr);
    CHECK(e->weight == doctest::Approx(1.0));
    for (const auto& edge : g.edges())
      if (edge.origin == EdgeOrigin::measured) CHECK(edge.from != edge.to);
  }

  SUBCASE("measured edges equal the all-pairs threshold filter") {
    RandomStream rng(29);
    std::vector<CleanSeries> batch;
    const auto base = random_vector(rng, 40);
    for (int i = 0; i < 8; ++i) {
      CleanSeries s{{"recognizer", "m" + std::to_string(i)}, 0, 1, {}};
      const double mix = rng.uniform(-1, 1);
      for (double b : base) s.values.push_back(mix * b + (1 - std::abs(mix)) * rng.uniform(-10, 10));
      batch.push_back(std::move(s));
    }
    const auto g = build_dependency_graph(d, batch, 0.7);
    std::set<std::pair<std::string, std::string>> expected;
    for (std::size_t i = 0; i < batch.size(); ++i)
      for (std::size_t j = 0; j < batch.size(); ++j)
        if (i != j && std::abs(pearson_oracle(batch[i].values, batch[j].values)) >= 0.7)
          expected.insert({batch[i].key.node_name(), batch[j].key.node_name()});
    std::set<std::pair<std::string, std::string>> actual;
    for (const auto& e : g.edges())
      if (e.origin == EdgeOrigin::measured) actual.insert({e.from, e.to});
    CHECK(actual == expected);
    CHECK_FALSE(expected.empty());
  }

  SUBCASE("hops follow declared direction through membership edges") {
    d.metrics = {{"detected_motions", "motion-detector", MetricLevel::application, ""},
                 {"response_time", "recognizer", MetricLevel::application, "s"}};
    const auto g = build_dependency_graph(d, {});
    const std::set<std::string> target{"recognizer/response_time"};
    CHECK(g.hops_to("motion-detector/detected_motions", target) == 3);
    const std::vector<std::string> expected{"motion-detector/detected_motions", "motion-detector",
                                            "recognizer", "recognizer/response_time"};
    CHECK(g.path_to("motion-detector/detected_motions", target) == expected);
    CHECK_FALSE(g.hops_to("recognizer/response_time", {"motion-detector/detected_motions"}));
  }

  SUBCASE("edge list export") {
    const auto g = build_dependency_graph(d, {});
    CHECK(g.export_edge_list() ==
          "camera,motion-detector,1,declared\nmotion-detector,recognizer,1,declared\n");
  }
}
