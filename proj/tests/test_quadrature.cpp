#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "opsurv/errors.hpp"
#include "opsurv/quadrature.hpp"
#include "opsurv/rng.hpp"

using namespace opsurv;

#ifndef OPSURV_TEST_DATA_DIR
#define OPSURV_TEST_DATA_DIR "."
#endif

TEST_CASE("small closed-form rules") {
  auto r1 = build_rule(1);
  CHECK(r1.nodes[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(r1.weights[0] == doctest::Approx(2.0).epsilon(1e-15));

  auto r2 = build_rule(2);
  const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
  CHECK(r2.nodes[0] == doctest::Approx(-inv_sqrt3).epsilon(1e-12));
  CHECK(r2.nodes[1] == doctest::Approx(inv_sqrt3).epsilon(1e-12));
  CHECK(r2.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r2.weights[1] == doctest::Approx(1.0).epsilon(1e-12));

  auto r3 = build_rule(3);
  const double root = std::sqrt(0.6);
  CHECK(r3.nodes[0] == doctest::Approx(-root).epsilon(1e-12));
  CHECK(r3.nodes[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(r3.nodes[2] == doctest::Approx(root).epsilon(1e-12));
  CHECK(r3.weights[0] == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
  CHECK(r3.weights[1] == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
  CHECK(r3.weights[2] == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("order bounds") {
  CHECK_THROWS_AS(build_rule(0), DomainError);
  CHECK_THROWS_AS(build_rule(65), DomainError);
  CHECK_NOTHROW(build_rule(64));
}

TEST_CASE("rule structure for all supported orders") {
  for (int order = 1; order <= 64; ++order) {
    auto rule = build_rule(order);
    REQUIRE(rule.nodes.size() == static_cast<std::size_t>(order));
    double weight_sum = 0.0;
    for (int g = 0; g < order; ++g) {
      CHECK(rule.weights[static_cast<std::size_t>(g)] > 0.0);
      weight_sum += rule.weights[static_cast<std::size_t>(g)];
      if (g > 0) CHECK(rule.nodes[static_cast<std::size_t>(g)] >
                       rule.nodes[static_cast<std::size_t>(g - 1)]);
      // Mirror symmetry.
      CHECK(rule.nodes[static_cast<std::size_t>(g)] ==
            doctest::Approx(-rule.nodes[static_cast<std::size_t>(order - 1 - g)])
                .scale(1.0)
                .epsilon(1e-12));
      CHECK(rule.weights[static_cast<std::size_t>(g)] ==
            doctest::Approx(rule.weights[static_cast<std::size_t>(order - 1 - g)])
                .epsilon(1e-12));
    }
    CHECK(weight_sum == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("monomial exactness up to degree 2*order - 1") {
  for (int order : {1, 2, 3, 5, 8, 13, 20, 32, 64}) {
    auto rule = build_rule(order);
    for (int k = 0; k <= 2 * order - 1; ++k) {
      double acc = 0.0;
      for (int g = 0; g < order; ++g) {
        acc += rule.weights[static_cast<std::size_t>(g)] *
               std::pow(rule.nodes[static_cast<std::size_t>(g)], k);
      }
      const double expected = k % 2 == 1 ? 0.0 : 2.0 / (k + 1);
      CHECK(acc == doctest::Approx(expected).scale(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("antiderivative transform") {
  auto rule = build_rule(4);
  CHECK(antiderivative_at(rule, [](double) { return 1.0; }, 3.7) ==
        doctest::Approx(3.7).epsilon(1e-14));
  CHECK(antiderivative_at(rule, [](double u) { return u * u; }, 2.0) ==
        doctest::Approx(8.0 / 3.0).epsilon(1e-12));
  CHECK(antiderivative_at(rule, [](double u) { return std::sin(u); }, 0.0) == 0.0);
  CHECK_THROWS_AS(antiderivative_at(rule, [](double) { return 1.0; }, -0.1),
                  DomainError);

  auto r2 = build_rule(2);
  CHECK(antiderivative_at(r2, [](double u) { return u * u * u; }, 1.0) ==
        doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("random polynomial exactness against the analytic integral") {
  Rng rng(424242);
  for (int order : {2, 5, 11, 20}) {
    auto rule = build_rule(order);
    for (int trial = 0; trial < 20; ++trial) {
      const int degree = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * order)));
      std::vector<double> coeffs(static_cast<std::size_t>(degree) + 1);
      for (double& c : coeffs) c = rng.uniform(-1.0, 1.0);
      auto poly = [&](double u) {
        double acc = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * u + coeffs[k];
        return acc;
      };
      const double t = rng.uniform(0.0, 3.0);
      double expected = 0.0;
      double tk = t;
      for (std::size_t k = 0; k < coeffs.size(); ++k) {
        expected += coeffs[k] * tk / static_cast<double>(k + 1);
        tk *= t;
      }
      CHECK(antiderivative_at(rule, poly, t) ==
            doctest::Approx(expected).scale(1.0 + std::fabs(expected)).epsilon(1e-10));
    }
  }
}

TEST_CASE("order 20 agrees with the checked-in golden table") {
  std::ifstream in(std::string(OPSURV_TEST_DATA_DIR) + "/gauss_legendre_20.txt");
  REQUIRE(in.good());
  std::vector<double> nodes, weights;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    double node = 0.0, weight = 0.0;
    REQUIRE(std::sscanf(line.c_str(), "%lf %lf", &node, &weight) == 2);
    nodes.push_back(node);
    weights.push_back(weight);
  }
  REQUIRE(nodes.size() == 20);

  auto rule = build_rule(20);
  for (std::size_t g = 0; g < 20; ++g) {
    CHECK(rule.nodes[g] == doctest::Approx(nodes[g]).scale(1.0).epsilon(1e-14));
    CHECK(rule.weights[g] == doctest::Approx(weights[g]).epsilon(1e-14));
    // Round-trip: our value reprinted at 15 significant digits matches the file.
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", rule.nodes[g]);
    double reparsed = 0.0;
    std::sscanf(buf, "%lf", &reparsed);
    CHECK(reparsed == doctest::Approx(nodes[g]).scale(1.0).epsilon(1e-15));
  }
}
