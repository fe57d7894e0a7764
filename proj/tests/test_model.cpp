#include <catch_amalgamated.hpp>

#include <nlohmann/json.hpp>

#include "rsjm/model.hpp"

using rsjm::ModelParams;
using Catch::Matchers::WithinAbs;

TEST_CASE("physical parameters map to the chart") {
  const auto p = ModelParams::from_physical(0.6, 2.0, 1.0);
  CHECK_THAT(p.mu(), WithinAbs(0.3, 1e-15));
  CHECK(p.ell() == 2.0);
  CHECK_THAT(p.lambda(), WithinAbs(0.16, 1e-15));
  REQUIRE(p.integer_order());
  CHECK(*p.integer_order() == 2);

  const auto q = ModelParams::from_physical(0.0, 1.0, 1.0);
  CHECK(q.mu() == 0.0);
  CHECK(q.require_integer_order() == 1);
  CHECK_THAT(q.lambda(), WithinAbs(0.25, 1e-15));
}

TEST_CASE("non-integer order is flagged and refused") {
  const auto p = ModelParams::from_physical(0.6, 2.5, 1.0);
  CHECK_FALSE(p.integer_order());
  try {
    (void)p.require_integer_order();
    FAIL("expected NonIntegerOrder");
  } catch (const rsjm::Error& e) {
    CHECK(e.code() == rsjm::ErrorCode::non_integer_order);
  }
}

TEST_CASE("order within relative 1e-12 of an integer snaps to it") {
  const auto p = ModelParams::from_chart(3.0 + 1e-13, 0.1, 1.0);
  REQUIRE(p.integer_order());
  CHECK(p.ell() == 3.0);
  CHECK_FALSE(ModelParams::from_chart(3.0 + 1e-9, 0.1, 1.0).integer_order());
  CHECK_FALSE(ModelParams::from_chart(0.0, 0.1, 1.0).integer_order());
  CHECK_FALSE(ModelParams::from_chart(-2.0, 0.1, 1.0).integer_order());
}

TEST_CASE("omega must be positive") {
  for (double w : {0.0, -1.0, std::nan("")}) {
    try {
      (void)ModelParams::from_chart(1.0, 0.1, w);
      FAIL("expected NonPositiveOmega");
    } catch (const rsjm::Error& e) {
      CHECK(e.code() == rsjm::ErrorCode::non_positive_omega);
    }
    CHECK_THROWS_AS(ModelParams::from_physical(1.0, 1.0, w), rsjm::Error);
  }
}

TEST_CASE("derived quantities") {
  const auto p = ModelParams::from_chart(1.0, 0.2, 1.3);
  CHECK_THAT(p.A(), WithinAbs(2 * 1.3 * 0.2, 1e-15));
  CHECK_THAT(p.Bdrive(), WithinAbs(1.3, 1e-15));
  CHECK_THAT(p.period(), WithinAbs(2 * M_PI / 1.3, 1e-15));
  CHECK_THAT(p.lambda(), WithinAbs(1.0 / (4 * 1.69) - 0.04, 1e-15));
  CHECK_THAT(p.phase_rhs(0.4, 0.7), WithinAbs(1.3 + p.A() * std::cos(1.3 * 0.4) - std::sin(0.7), 1e-15));
}

TEST_CASE("json round trip") {
  const auto p = ModelParams::from_chart(2.0, 0.3, 1.0);
  nlohmann::json j = p;
  CHECK(j.get<ModelParams>() == p);
}
