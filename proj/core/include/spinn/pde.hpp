#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spinn/batch.hpp"
#include "spinn/grid.hpp"

namespace spinn::pde {

enum class ProblemId {
  helmholtz3d,
  kg3d,
  kg4d,
  diffusion_nl3d,
  diffusion6d,
  flow_mixing,
  poisson_lshape,
  ns4d,
};

struct Domain {
  std::vector<AxisInterval> axes;
  std::vector<std::string> axis_names;
  int time_axis = -1;  // -1 for time-independent problems

  int dim() const { return static_cast<int>(axes.size()); }
};

// Benchmark problem descriptor: domain, derivative plan, loss weights, and
// flags steering boundary construction and evaluation.
struct PdeProblem {
  ProblemId id{};
  std::string name;
  Domain domain;
  int out_components = 1;
  std::vector<int> orders;               // per-axis max derivative order
  std::vector<double> residual_weights;  // per residual component
  double lambda_pde = 1.0;
  double lambda_ic = 1.0;
  double lambda_bc = 1.0;
  bool has_exact = true;
  bool masked = false;           // L-shape: PDE loss masked to the domain
  bool nonseparable_bc = false;  // L-shape: boundary trained point-wise
  int default_eval_resolution = 64;
  int bc_points_per_edge = 256;  // non-separable edges only

  int dim() const { return domain.dim(); }
};

PdeProblem make_problem(ProblemId id);
std::optional<ProblemId> problem_from_string(std::string_view s);
const char* to_string(ProblemId id);
std::vector<std::string> problem_id_list();

/// Per-axis i.i.d. uniform samples; stream keyed by (seed, axis, round).
FactorizedBatch sample_factorized(const Domain& domain,
                                  std::span<const int> counts,
                                  std::uint64_t seed, std::uint64_t round);

FactorizedBatch uniform_batch(const Domain& domain, int resolution);

// One boundary/initial face: the pinned axis carries a single coordinate,
// targets hold the regression values per output component over the face grid.
struct FaceBatch {
  FactorizedBatch batch;
  int pinned_axis = 0;
  bool is_initial = false;
  std::vector<std::vector<double>> targets;
};

std::vector<FaceBatch> boundary_batches(const PdeProblem& problem,
                                        std::span<const int> counts,
                                        std::uint64_t seed,
                                        std::uint64_t round);

// Non-factorized boundary points (L-shaped domain edges).
struct PointBatch {
  std::vector<std::vector<double>> coords;  // per axis, equal lengths
  std::vector<double> target;
  std::size_t size() const { return target.size(); }
};

PointBatch lshape_boundary_points(int points_per_edge, std::uint64_t seed,
                                  std::uint64_t round);

/// True where the point belongs to the L-shaped domain (removed quadrant
/// [0,1]^2 excluded); pure function of coordinates.
bool lshape_inside(double x, double y);
std::vector<std::uint8_t> lshape_mask(const FactorizedBatch& batch);

// Coordinate-only fields consumed by the residual (source terms, advection
// coefficients, forcing), evaluated over the implied grid of the batch.
std::vector<std::vector<double>> residual_const_fields(
    const PdeProblem& problem, const FactorizedBatch& batch);

/// Closed-form solution grids; throws NoReferenceError when the problem has
/// no manufactured solution (nonlinear diffusion, L-shaped Poisson).
SolutionGrid exact_solution(const PdeProblem& problem,
                            const FactorizedBatch& batch);

/// Derivative grid of the manufactured solution for one component.
std::vector<double> exact_partial(const PdeProblem& problem, int component,
                                  std::span<const int> alpha,
                                  const FactorizedBatch& batch);

/// Closed-form vorticity of the (3+1)-d manufactured velocity field.
SolutionGrid ns4d_vorticity_reference(const FactorizedBatch& batch);

double exact_value(const PdeProblem& problem, int component,
                   std::span<const double> x);

/// Regression target for a face (initial condition or boundary value).
double face_target_value(const PdeProblem& problem, int component,
                         std::span<const double> x, bool is_initial);

}  // namespace spinn::pde
