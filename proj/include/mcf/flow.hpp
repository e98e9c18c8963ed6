#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "mcf/femcore.hpp"
#include "mcf/linalg.hpp"
#include "mcf/mesh.hpp"

namespace mcf {

// Backward differentiation coefficients from the generating polynomials
//   delta(z) = sum_{l=1..q} (1-z)^l / l,   gamma(z) = (1 - (1-z)^q) / z.
// delta holds q+1 doubles, gamma holds q. The exact integer numerators over
// delta_denominator = lcm(1..q) come along so that identities like
// sum_j delta_j = 0 can be checked without rounding.
struct BdfScheme {
  int order = 0;
  std::vector<double> delta;
  std::vector<double> gamma;
  std::vector<long long> delta_numerators;
  long long delta_denominator = 1;
};

// Orders 1 through 5 (the A(alpha)-stable range).
BdfScheme bdf_coefficients(int order);

// Discrete surface state: positions, velocity, outward normal (component
// major, 3N each) and mean curvature (N) at time t.
struct NodalState {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> v;
  std::vector<double> nu;
  std::vector<double> h;
};

NodalState make_nodal_state(double t, int num_nodes);

// Sliding window of the most recent states, newest last, with uniform time
// spacing (validated on push).
class FlowHistory {
 public:
  explicit FlowHistory(std::size_t capacity);

  void push(NodalState state);
  std::size_t size() const { return states_.size(); }
  // back = 0 is the newest state, back = 1 the one before, ...
  const NodalState& newest(std::size_t back = 0) const;
  double spacing() const;  // defined once two states are present

 private:
  std::size_t capacity_;
  std::deque<NodalState> states_;
};

// Extrapolated position / normal / curvature at the new time level:
// sum_{j=0..q-1} gamma_j * (state q-1-j steps back).
struct ExtrapolatedState {
  std::vector<double> x;
  std::vector<double> nu;
  std::vector<double> h;
};
ExtrapolatedState extrapolate(const FlowHistory& history, const BdfScheme& scheme);

struct StepOptions {
  double alpha = 0.0;          // stabilization strength
  int quadrature_degree = 0;   // 0 = default 2*order rule
  CgConfig cg;
  bool zero_forcing = false;   // replace g and f by zero (scheme identities)
  std::shared_ptr<const SparsityPattern> pattern;  // optional reuse
};

struct StepStats {
  int cg_iterations_velocity = 0;
  int cg_iterations_u = 0;
};

// One linearly implicit BDF step of the coupled system: velocity from
// (M+A) v = g at the extrapolated surface, u = (nu, H) from the shifted
// system (delta_0/tau M + A) u = f - (1/tau) M sum_{j>=1} delta_j u^(n-j),
// and x from the backward difference (1/tau) sum delta_j x^(n-j) = v.
NodalState esfem_step(const SurfaceMesh& mesh, const FlowHistory& history, const BdfScheme& scheme, double tau,
                      const StepOptions& options = {}, StepStats* stats = nullptr);

// Comparison scheme evolving positions only:
// (delta_0/tau M + A) x^n = -(1/tau) M sum_{j>=1} delta_j x^(n-j), with the
// normal and curvature recomputed geometrically for reporting.
NodalState dziuk_step(const SurfaceMesh& mesh, const FlowHistory& history, const BdfScheme& scheme, double tau,
                      const StepOptions& options = {}, StepStats* stats = nullptr);

// Rescales every nodal normal to unit length; throws if one has near-zero norm.
NodalState normalize_normals(NodalState state, int num_nodes);

enum class SchemeKind { esfem, esfem_normalized, dziuk };

// Starting values x^i, u^i for i = 0..q-1. Order 1 returns the initial state;
// order 2 takes the single linearly implicit backward Euler step; higher
// orders ramp BDF 1,2,...,q-1 on a uniform fine grid of step tau/m with
// m = ceil(tau^-(q-2)/2), so the starting error is O(tau^q), and extract the
// states at multiples of tau.
std::vector<NodalState> bootstrap_start(const SurfaceMesh& mesh, const NodalState& initial,
                                        const BdfScheme& scheme, double tau, SchemeKind kind = SchemeKind::esfem,
                                        const StepOptions& options = {});

enum class StopReason {
  reached_end,
  degenerate_geometry,
  cg_failure,
  normal_blowup,
  normal_collapse,
  nonfinite_state,
  area_growth,
};

struct FlowConfig {
  SchemeKind scheme = SchemeKind::esfem;
  int bdf_order = 2;
  double tau = 0.0;
  double end_time = 0.0;
  double alpha = 0.0;
  double min_area_element = 1e-10;  // halt when an area element drops below
  double max_normal_norm = 10.0;    // halt when a nodal |nu| exceeds
  // The flow is the gradient descent of area, so a step that increases the
  // total area means the discretization has broken down (pinch reached at
  // this resolution). The offending state is discarded and the run halts.
  bool halt_on_area_growth = true;
  int snapshot_every = 0;           // 0 keeps endpoints only
  CgConfig cg;
  int quadrature_degree = 0;
};

struct StepDiagnostics {
  double t = 0.0;
  double area = 0.0;
  double h = 0.0;
  double min_area_element = 0.0;
  double min_nu_norm = 0.0;
  double max_nu_norm = 0.0;
  double max_h = 0.0;
};

struct FlowResult {
  NodalState final_state;
  StopReason stop = StopReason::reached_end;
  double stop_time = 0.0;
  std::vector<StepDiagnostics> diagnostics;  // initial state, then one per accepted state
  std::vector<NodalState> snapshots;
};

using StateObserver = std::function<void(const NodalState&)>;

// Integrates from the initial state to end_time or a singularity stop,
// reporting every accepted state (initial, starting values, then one per
// step) to the observer and the diagnostics log.
FlowResult run_flow(const SurfaceMesh& mesh, const FlowConfig& config, const NodalState& initial,
                    const StateObserver& observer = nullptr);

StepDiagnostics compute_step_diagnostics(const SurfaceMesh& mesh, const NodalState& state);

}  // namespace mcf
