#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "mcf/analysis.hpp"
#include "mcf/femcore.hpp"
#include "mcf/flow.hpp"
#include "mcf/geometry.hpp"
#include "mcf/mesh.hpp"

using namespace mcf;

namespace {

// frozen backward difference tables: delta from the generating polynomial
// sum_{l=1..q} (1-z)^l / l over the common denominator lcm(1..q), gamma the
// extrapolation weights (-1)^j binom(q, j+1)
struct BdfOracle {
  std::vector<long long> numerators;
  long long denominator;
  std::vector<double> gamma;
};

const BdfOracle kOracle[] = {
    {{1, -1}, 1, {1}},
    {{3, -4, 1}, 2, {2, -1}},
    {{11, -18, 9, -2}, 6, {3, -3, 1}},
    {{25, -48, 36, -16, 3}, 12, {4, -6, 4, -1}},
    {{137, -300, 300, -200, 75, -12}, 60, {5, -10, 10, -5, 1}},
};

NodalState constant_field_state(const SurfaceMesh& mesh, double t, const Vec3& nu, double h) {
  NodalState s = make_nodal_state(t, mesh.num_nodes());
  s.x = mesh.reference_positions();
  const int n = mesh.num_nodes();
  for (int j = 0; j < n; ++j) set_node_vec(s.nu, n, j, nu);
  std::fill(s.h.begin(), s.h.end(), h);
  return s;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// mass norm over the three normal blocks and the curvature block
double u_energy(const SparseMatrix& mass, const NodalState& s, int n) {
  double sum = mass.quadratic_form(s.h, s.h);
  for (int c = 0; c < 3; ++c) {
    const std::span<const double> block(s.nu.data() + c * n, static_cast<std::size_t>(n));
    sum += mass.quadratic_form(block, block);
  }
  return std::sqrt(sum);
}

}  // namespace

TEST_CASE("backward difference coefficients match the frozen tables") {
  for (int q = 1; q <= 5; ++q) {
    const BdfScheme scheme = bdf_coefficients(q);
    const BdfOracle& oracle = kOracle[q - 1];
    CHECK(scheme.order == q);
    REQUIRE(scheme.delta.size() == static_cast<std::size_t>(q + 1));
    REQUIRE(scheme.gamma.size() == static_cast<std::size_t>(q));
    REQUIRE(scheme.delta_numerators.size() == static_cast<std::size_t>(q + 1));
    CHECK(scheme.delta_denominator == oracle.denominator);
    for (int j = 0; j <= q; ++j) {
      CHECK(scheme.delta_numerators[j] == oracle.numerators[j]);
      CHECK(scheme.delta[j] ==
            doctest::Approx(static_cast<double>(oracle.numerators[j]) / oracle.denominator).epsilon(1e-15));
    }
    for (int j = 0; j < q; ++j) CHECK(scheme.gamma[j] == oracle.gamma[j]);

    // consistency: delta(1) = 0 and delta'(1) = -1, checked in exact integers
    long long sum = 0, weighted = 0;
    for (int j = 0; j <= q; ++j) {
      sum += scheme.delta_numerators[j];
      weighted += j * scheme.delta_numerators[j];
    }
    CHECK(sum == 0);
    CHECK(weighted == -scheme.delta_denominator);
  }
  CHECK_THROWS_AS(bdf_coefficients(0), std::invalid_argument);
  CHECK_THROWS_AS(bdf_coefficients(6), std::invalid_argument);
}

TEST_CASE("backward differences differentiate polynomials up to their order") {
  const double tau = 0.1;
  const double tn = 1.0;
  for (int q = 1; q <= 5; ++q) {
    const BdfScheme scheme = bdf_coefficients(q);
    for (int m = 0; m <= q; ++m) {
      double dd = 0.0;
      for (int j = 0; j <= q; ++j) dd += scheme.delta[j] * std::pow(tn - j * tau, m);
      dd /= tau;
      const double exact = m == 0 ? 0.0 : m * std::pow(tn, m - 1);
      if (m == 0) {
        CHECK(std::abs(dd) < 1e-12);
      } else {
        CHECK(dd == doctest::Approx(exact).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("extrapolation reproduces polynomials below the order") {
  const double tau = 0.05;
  for (int q = 1; q <= 5; ++q) {
    const BdfScheme scheme = bdf_coefficients(q);
    // scalar polynomial histories on a single node, degree q-1
    const auto poly = [&](double t, int c) {
      double v = 0.0;
      for (int d = 0; d < q; ++d) v += (0.3 + 0.2 * c + d) * std::pow(t, d);
      return v;
    };
    FlowHistory history(q);
    for (int i = 0; i < q; ++i) {
      NodalState s = make_nodal_state(i * tau, 1);
      for (int c = 0; c < 3; ++c) {
        s.x[c] = poly(s.t, c);
        s.nu[c] = poly(s.t, c + 3);
      }
      s.h[0] = poly(s.t, 6);
      history.push(std::move(s));
    }
    const ExtrapolatedState ex = extrapolate(history, scheme);
    const double tn = q * tau;
    for (int c = 0; c < 3; ++c) {
      CHECK(ex.x[c] == doctest::Approx(poly(tn, c)).epsilon(1e-12));
      CHECK(ex.nu[c] == doctest::Approx(poly(tn, c + 3)).epsilon(1e-12));
    }
    CHECK(ex.h[0] == doctest::Approx(poly(tn, 6)).epsilon(1e-12));
  }
}

TEST_CASE("history window slides and insists on uniform spacing") {
  FlowHistory history(2);
  NodalState a = make_nodal_state(0.0, 1);
  NodalState b = make_nodal_state(0.1, 1);
  b.h[0] = 1.0;
  history.push(a);
  CHECK(history.size() == 1);
  history.push(b);
  CHECK(history.size() == 2);
  CHECK(history.spacing() == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(history.newest().t == doctest::Approx(0.1));
  CHECK(history.newest(1).t == doctest::Approx(0.0));

  NodalState c = make_nodal_state(0.2, 1);
  c.h[0] = 2.0;
  history.push(c);
  CHECK(history.size() == 2);
  CHECK(history.newest().h[0] == 2.0);
  CHECK(history.newest(1).h[0] == 1.0);

  NodalState bad = make_nodal_state(0.45, 1);
  CHECK_THROWS_AS(history.push(bad), std::invalid_argument);
}

TEST_CASE("constant history with zero forcing is stationary") {
  const ImplicitSurface sphere = make_sphere_surface(2.0);
  const SurfaceMesh mesh = elevate_to_quadratic(build_icosphere(1, 2.0), &sphere);
  const double tau = 0.05;

  for (int q : {1, 2, 3}) {
    const BdfScheme scheme = bdf_coefficients(q);
    FlowHistory history(q);
    for (int i = 0; i < q; ++i) history.push(constant_field_state(mesh, i * tau, {0.3, -0.4, 0.5}, 0.7));

    StepOptions options;
    options.zero_forcing = true;
    options.cg.rel_tol = 1e-14;
    const NodalState next = esfem_step(mesh, history, scheme, tau, options);

    CHECK(next.t == doctest::Approx(q * tau).epsilon(1e-14));
    CHECK(max_abs_diff(next.x, history.newest().x) < 1e-10);
    CHECK(max_abs_diff(next.nu, history.newest().nu) < 1e-10);
    CHECK(max_abs_diff(next.h, history.newest().h) < 1e-10);
    for (double v : next.v) CHECK(std::abs(v) < 1e-12);
  }
}

TEST_CASE("implicit step dissipates the mass norm of the unknowns") {
  const ImplicitSurface sphere = make_sphere_surface(2.0);
  const SurfaceMesh mesh = elevate_to_quadratic(build_icosphere(1, 2.0), &sphere);
  const int n = mesh.num_nodes();
  const NodalState initial = exact_sphere_state(mesh, 2.0, 0.0);

  FlowHistory history(1);
  history.push(initial);
  StepOptions options;
  options.zero_forcing = true;
  options.cg.rel_tol = 1e-13;
  const NodalState next = esfem_step(mesh, history, bdf_coefficients(1), 0.01, options);

  // with zero right-hand sides the velocity vanishes and the surface stays
  // put, so the energy is measured with one fixed mass matrix
  const SparseMatrix mass = assemble_mass(mesh, initial.x);
  CHECK(u_energy(mass, next, n) < u_energy(mass, initial, n));
}

TEST_CASE("single step halves its error at order one") {
  const ImplicitSurface sphere = make_sphere_surface(2.0);
  const SurfaceMesh mesh = elevate_to_quadratic(build_icosphere(2, 2.0), &sphere);
  const NodalState initial = exact_sphere_state(mesh, 2.0, 0.0);
  const BdfScheme euler = bdf_coefficients(1);
  StepOptions options;
  options.cg.rel_tol = 1e-12;

  // Richardson: one full step against two half steps isolates the local
  // truncation error, which drops 4x when tau is halved for a first order step
  const auto defect = [&](double tau) {
    FlowHistory full(1);
    full.push(initial);
    const NodalState one = esfem_step(mesh, full, euler, tau, options);

    FlowHistory halves(1);
    halves.push(initial);
    NodalState mid = esfem_step(mesh, halves, euler, 0.5 * tau, options);
    halves.push(std::move(mid));
    const NodalState two = esfem_step(mesh, halves, euler, 0.5 * tau, options);
    return max_abs_diff(one.x, two.x);
  };

  const double coarse = defect(4e-3);
  const double fine = defect(2e-3);
  CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("normal rescaling is exact and idempotent") {
  std::mt19937 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = 40;
  NodalState state = make_nodal_state(0.3, n);
  for (double& v : state.nu) v = gauss(rng);
  for (double& v : state.x) v = gauss(rng);
  state.h.assign(n, 2.5);

  const NodalState unit = normalize_normals(state, n);
  for (int j = 0; j < n; ++j) CHECK(norm(node_vec(unit.nu, n, j)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(unit.t == state.t);
  CHECK(max_abs_diff(unit.x, state.x) == 0.0);
  CHECK(max_abs_diff(unit.h, state.h) == 0.0);

  const NodalState twice = normalize_normals(unit, n);
  CHECK(max_abs_diff(twice.nu, unit.nu) < 1e-15);

  NodalState broken = unit;
  for (int c = 0; c < 3; ++c) broken.nu[c * n + 3] = 0.0;
  CHECK_THROWS(normalize_normals(broken, n));
}

TEST_CASE("starting values ramp to the requested order") {
  const ImplicitSurface sphere = make_sphere_surface(2.0);
  const SurfaceMesh mesh = elevate_to_quadratic(build_icosphere(2, 2.0), &sphere);
  const NodalState initial = exact_sphere_state(mesh, 2.0, 0.0);
  StepOptions options;
  options.cg.rel_tol = 1e-12;

  SUBCASE("order one is the initial state") {
    const std::vector<NodalState> start = bootstrap_start(mesh, initial, bdf_coefficients(1), 0.1);
    REQUIRE(start.size() == 1);
    CHECK(start[0].t == 0.0);
    CHECK(max_abs_diff(start[0].x, initial.x) == 0.0);
  }

  SUBCASE("order two takes one implicit Euler step") {
    const double tau = 0.01;
    const std::vector<NodalState> start =
        bootstrap_start(mesh, initial, bdf_coefficients(2), tau, SchemeKind::esfem, options);
    REQUIRE(start.size() == 2);
    CHECK(start[1].t == doctest::Approx(tau).epsilon(1e-14));
    const double exact = std::sqrt(4.0 - 4.0 * tau);
    const int n = mesh.num_nodes();
    for (int j = 0; j < n; ++j)
      CHECK(norm(node_vec(start[1].x, n, j)) == doctest::Approx(exact).epsilon(2e-4));
  }

  SUBCASE("order three start is third order accurate") {
    // the starting states against a much finer integration of the same
    // discrete system: spatial error cancels, leaving the O(tau^3) ramp
    const auto start_error = [&](double tau) {
      const std::vector<NodalState> start =
          bootstrap_start(mesh, initial, bdf_coefficients(3), tau, SchemeKind::esfem, options);
      REQUIRE(start.size() == 3);

      FlowConfig config;
      config.bdf_order = 3;
      config.tau = tau / 16.0;
      config.end_time = 2.0 * tau;
      config.cg.rel_tol = 1e-12;
      const FlowResult reference = run_flow(mesh, config, initial);
      CHECK(reference.stop == StopReason::reached_end);
      return max_abs_diff(start[2].x, reference.final_state.x);
    };
    const double coarse = start_error(0.1);
    const double fine = start_error(0.05);
    const double order = std::log2(coarse / fine);
    CHECK(order > 2.3);
    CHECK(order < 4.2);
  }
}

TEST_CASE("flow rejects an end time inside the starting window") {
  const SurfaceMesh mesh = build_icosphere(1, 2.0);
  const ImplicitSurface sphere = make_sphere_surface(2.0);
  const NodalState initial = initial_state_from_implicit(mesh, sphere);
  FlowConfig config;
  config.bdf_order = 3;
  config.tau = 0.1;
  config.end_time = 0.15;
  CHECK_THROWS_AS(run_flow(mesh, config, initial), std::invalid_argument);
  config.tau = -1.0;
  CHECK_THROWS_AS(run_flow(mesh, config, initial), std::invalid_argument);
}

TEST_CASE("sphere flow reaches the end time with shrinking area") {
  const ImplicitSurface sphere = make_sphere_surface(2.0);
  const SurfaceMesh mesh = elevate_to_quadratic(build_icosphere(1, 2.0), &sphere);
  const NodalState initial = exact_sphere_state(mesh, 2.0, 0.0);

  FlowConfig config;
  config.bdf_order = 2;
  config.tau = 0.05;
  config.end_time = 0.5;

  int observed = 0;
  const FlowResult result = run_flow(mesh, config, initial, [&](const NodalState&) { ++observed; });

  CHECK(result.stop == StopReason::reached_end);
  CHECK(result.stop_time == doctest::Approx(0.5).epsilon(1e-12));
  // initial state, one starting value, then nine steps
  CHECK(result.diagnostics.size() == 11);
  CHECK(observed == 11);
  CHECK(result.snapshots.size() == 2);
  CHECK(result.snapshots.front().t == 0.0);
  CHECK(result.snapshots.back().t == doctest::Approx(0.5).epsilon(1e-12));

  for (std::size_t i = 1; i < result.diagnostics.size(); ++i)
    CHECK(result.diagnostics[i].area < result.diagnostics[i - 1].area + 1e-10);

  // the surface stays a sphere of the exact radius to discretization accuracy
  const double exact = std::sqrt(4.0 - 4.0 * 0.5);
  const int n = mesh.num_nodes();
  for (int j = 0; j < n; ++j)
    CHECK(norm(node_vec(result.final_state.x, n, j)) == doctest::Approx(exact).epsilon(0.01));
}

TEST_CASE("snapshot cadence keeps every k-th accepted state") {
  const ImplicitSurface sphere = make_sphere_surface(2.0);
  const SurfaceMesh mesh = elevate_to_quadratic(build_icosphere(1, 2.0), &sphere);
  const NodalState initial = exact_sphere_state(mesh, 2.0, 0.0);

  FlowConfig config;
  config.bdf_order = 2;
  config.tau = 0.05;
  config.end_time = 0.5;
  config.snapshot_every = 3;
  const FlowResult result = run_flow(mesh, config, initial);

  // accepted states 0..10 keep indices 0, 3, 6, 9 plus the final state
  REQUIRE(result.snapshots.size() == 5);
  CHECK(result.snapshots[0].t == doctest::Approx(0.0));
  CHECK(result.snapshots[1].t == doctest::Approx(0.15));
  CHECK(result.snapshots[2].t == doctest::Approx(0.30));
  CHECK(result.snapshots[3].t == doctest::Approx(0.45));
  CHECK(result.snapshots[4].t == doctest::Approx(0.50));
}

TEST_CASE("area growth halts the flow with the last good state") {
  // a coarse dumbbell pinches early; once the discrete area rises the run
  // must stop and report the offending reason without keeping the bad state
  const SurfaceMesh mesh = build_dumbbell_mesh(2, 2);
  const NodalState initial = initial_state_from_implicit(mesh, make_dumbbell_surface());

  FlowConfig config;
  config.scheme = SchemeKind::esfem_normalized;
  config.bdf_order = 2;
  config.tau = 3e-3;
  config.end_time = 0.3;
  const FlowResult result = run_flow(mesh, config, initial);

  CHECK(result.stop != StopReason::reached_end);
  CHECK(result.stop_time > 0.02);
  CHECK(result.stop_time < 0.2);
  CHECK(result.final_state.t == doctest::Approx(result.stop_time));
  for (std::size_t i = 1; i < result.diagnostics.size(); ++i)
    CHECK(result.diagnostics[i].area < result.diagnostics[i - 1].area + 1e-10);
}

TEST_CASE("one coupled step assembles each operator exactly once") {
  const ImplicitSurface sphere = make_sphere_surface(2.0);
  const SurfaceMesh mesh = elevate_to_quadratic(build_icosphere(1, 2.0), &sphere);
  const NodalState initial = exact_sphere_state(mesh, 2.0, 0.0);
  FlowHistory history(1);
  history.push(initial);

  AssemblyCounters& counters = assembly_counters();
  const long long mass0 = counters.mass, stiff0 = counters.stiffness;
  const long long g0 = counters.g_vectors, f0 = counters.f_vectors;
  StepStats stats;
  (void)esfem_step(mesh, history, bdf_coefficients(1), 0.01, {}, &stats);
  CHECK(counters.mass == mass0 + 1);
  CHECK(counters.stiffness == stiff0 + 1);
  CHECK(counters.g_vectors == g0 + 1);
  CHECK(counters.f_vectors == f0 + 1);
  CHECK(stats.cg_iterations_velocity > 0);
  CHECK(stats.cg_iterations_u > 0);

  // the position-only comparison scheme never touches the coupled forcings
  const long long g1 = counters.g_vectors, f1 = counters.f_vectors;
  (void)dziuk_step(mesh, history, bdf_coefficients(1), 0.01);
  CHECK(counters.g_vectors == g1);
  CHECK(counters.f_vectors == f1);
}
