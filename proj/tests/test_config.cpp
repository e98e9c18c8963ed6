#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <stdexcept>
#include <string>

#include "mcf/config.hpp"
#include "mcf/flow.hpp"

using namespace mcf;

TEST_CASE("each command starts from its own defaults") {
  const RunConfig single = default_config("single-run");
  CHECK(single.command == "single-run");
  CHECK(single.surface == "sphere");
  CHECK(single.scheme == "esfem");
  CHECK(single.bdf_order == 2);
  CHECK(single.fe_order == 2);
  CHECK(single.tau == 0.0125);
  CHECK(single.end_time == 0.6);

  const RunConfig study = default_config("sphere-convergence");
  CHECK(study.bdf_order == 3);
  CHECK(study.subdivision == 4);
  CHECK(study.study == "temporal");
  CHECK(study.tau0 == 0.2);
  CHECK(study.levels == 5);
  CHECK(study.spatial_subdivisions == "2,3,4");

  const RunConfig dumbbell = default_config("dumbbell");
  CHECK(dumbbell.surface == "dumbbell");
  CHECK(dumbbell.scheme == "esfem-normalized");
  CHECK(dumbbell.subdivision == 4);
  CHECK(dumbbell.tau == 3e-3);
  CHECK(dumbbell.end_time == 0.2);
  CHECK(dumbbell.halt_on_area_growth == 1);

  const RunConfig mesh = default_config("mesh-gen");
  CHECK(mesh.fe_order == 1);

  CHECK_THROWS_AS(default_config("bogus"), std::invalid_argument);
}

TEST_CASE("render and parse are inverse") {
  RunConfig config = default_config("dumbbell");
  config.tau = 1.5e-3;
  config.output_dir = "results/try 9";
  config.alpha = 0.25;
  config.snapshot_every = 7;
  const RunConfig parsed = parse_config_text(render_config(config));
  CHECK(parsed == config);
}

TEST_CASE("keys apply by name with typed validation") {
  RunConfig config = default_config("single-run");
  apply_key_value(config, "tau", "0.05");
  CHECK(config.tau == 0.05);
  apply_key_value(config, "bdf_order", "4");
  CHECK(config.bdf_order == 4);
  apply_key_value(config, "surface", "dumbbell");
  CHECK(config.surface == "dumbbell");
  apply_key_value(config, "input_obj", "some/mesh.obj");

  CHECK_THROWS_AS(apply_key_value(config, "no_such_key", "1"), std::invalid_argument);
  CHECK_THROWS_AS(apply_key_value(config, "tau", "fast"), std::invalid_argument);
  CHECK_THROWS_AS(apply_key_value(config, "bdf_order", "2.5"), std::invalid_argument);
  CHECK_THROWS_AS(apply_key_value(config, "surface", "torus"), std::invalid_argument);
  CHECK_THROWS_AS(apply_key_value(config, "scheme", "explicit"), std::invalid_argument);
  CHECK_THROWS_AS(apply_key_value(config, "study", "both"), std::invalid_argument);
  CHECK_THROWS_AS(apply_key_value(config, "command", "flight"), std::invalid_argument);
}

TEST_CASE("a command line resets to that command's defaults first") {
  // overrides apply on top of the named command regardless of their order
  const std::string text =
      "tau = 0.01\n"
      "command = dumbbell\n"
      "subdivision = 3\n";
  const RunConfig config = parse_config_text(text);
  CHECK(config.command == "dumbbell");
  CHECK(config.surface == "dumbbell");
  CHECK(config.scheme == "esfem-normalized");
  CHECK(config.tau == 0.01);
  CHECK(config.subdivision == 3);
  CHECK(config.end_time == 0.2);
}

TEST_CASE("parser accepts comments and insists on assignments") {
  const std::string text =
      "# a comment line\n"
      "\n"
      "  radius = 1.5  \n";
  const RunConfig config = parse_config_text(text);
  CHECK(config.radius == 1.5);

  CHECK_THROWS_AS(parse_config_text("radius 1.5\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("= 1.5\n"), std::invalid_argument);
}

TEST_CASE("explicit base carries through when no command appears") {
  RunConfig base = default_config("dumbbell");
  base.tau = 2e-3;
  const RunConfig config = parse_config_text("alpha = 0.1\n", base);
  CHECK(config.command == "dumbbell");
  CHECK(config.tau == 2e-3);
  CHECK(config.alpha == 0.1);
}

TEST_CASE("scheme names round trip") {
  for (SchemeKind kind : {SchemeKind::esfem, SchemeKind::esfem_normalized, SchemeKind::dziuk})
    CHECK(parse_scheme(scheme_name(kind)) == kind);
  CHECK(scheme_name(SchemeKind::esfem_normalized) == "esfem-normalized");
  CHECK_THROWS_AS(parse_scheme(""), std::invalid_argument);
}

TEST_CASE("stop reasons have stable names") {
  CHECK(stop_reason_name(StopReason::reached_end) == "reached_end");
  CHECK(stop_reason_name(StopReason::degenerate_geometry) == "degenerate_geometry");
  CHECK(stop_reason_name(StopReason::cg_failure) == "cg_failure");
  CHECK(stop_reason_name(StopReason::normal_blowup) == "normal_blowup");
  CHECK(stop_reason_name(StopReason::normal_collapse) == "normal_collapse");
  CHECK(stop_reason_name(StopReason::nonfinite_state) == "nonfinite_state");
  CHECK(stop_reason_name(StopReason::area_growth) == "area_growth");
}
