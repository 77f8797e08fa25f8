#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spinn/merge.hpp"
#include "spinn/model.hpp"
#include "spinn/pde.hpp"
#include "spinn/tape.hpp"

namespace spinn {

struct TrainConfig {
  int iterations = 50000;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int resample_interval = 100;
  std::vector<int> points;     // per-axis collocation counts
  std::vector<int> bc_points;  // empty: reuse `points`
  std::uint64_t seed = 0;
  int log_interval = 100;
  int eval_interval = 1000;
  int checkpoint_interval = 0;  // 0: best/final only (set by the CLI)
  int eval_resolution = 0;      // 0: problem default

  void validate() const {
    require(iterations >= 1, "iterations must be >= 1");
    require(resample_interval >= 1, "resample interval must be >= 1");
    require(log_interval >= 1 && eval_interval >= 1, "intervals must be >= 1");
    require(lr > 0.0, "learning rate must be positive");
  }
};

struct AdamState {
  std::vector<double> m, v;
  std::int64_t t = 0;

  void init(std::size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
    t = 0;
  }
};

/// Bias-corrected Adam update, in place.
void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

struct LossTerms {
  double total = 0.0;
  double pde = 0.0;
  double ic = 0.0;
  double bc = 0.0;
};

// Traced physics-informed loss over one set of collocation/boundary batches.
// Rebuilt on every resample round; between rounds only parameter values are
// refreshed and the recorded ops re-executed.
class LossGraph {
 public:
  LossGraph(const SeparableModel& model, const pde::PdeProblem& problem,
            const FactorizedBatch& collocation,
            const std::vector<pde::FaceBatch>& faces,
            const pde::PointBatch* point_bc);

  /// Recomputes the loss for the model's current parameters.
  void refresh(const SeparableModel& model);
  void backward() { tape_.backward(total_); }

  LossTerms terms() const;
  std::span<const double> grad() const { return tape_.param_grad(); }
  bool finite() const { return std::isfinite(tape_.val(total_)); }
  Tape& tape() { return tape_; }
  /// Body-net passes one loss evaluation re-executes.
  std::uint64_t passes_per_eval() const { return passes_per_eval_; }

 private:
  Tape tape_;
  NodeId total_ = 0, pde_ = 0, ic_ = 0, bc_ = 0;
  std::uint64_t passes_per_eval_ = 0;
};

double relative_l2(std::span<const double> prediction,
                   std::span<const double> reference);
double rmse(std::span<const double> prediction,
            std::span<const double> reference);
double relative_l2_masked(std::span<const double> prediction,
                          std::span<const double> reference,
                          std::span<const std::uint8_t> mask);
double rmse_masked(std::span<const double> prediction,
                   std::span<const double> reference,
                   std::span<const std::uint8_t> mask);

/// Order-0 forward evaluation of the model on a factorized grid.
SolutionGrid predict_grid(const SeparableModel& model,
                          const FactorizedBatch& batch);

/// Vorticity (curl of the velocity prediction) for the (3+1)-d flow model.
SolutionGrid predict_vorticity(const SeparableModel& model,
                               const FactorizedBatch& batch);

struct EvalResult {
  double rel_l2 = std::numeric_limits<double>::quiet_NaN();
  double rmse = std::numeric_limits<double>::quiet_NaN();
  bool has_reference = false;
};

// Uniform-grid evaluation against the problem reference: manufactured
// solutions in closed form, the finite-difference oracle for the L-shaped
// Poisson problem, and the exact vorticity for the (3+1)-d flow.
EvalResult evaluate(const SeparableModel& model,
                    const pde::PdeProblem& problem, int resolution);

struct MetricRecord {
  int step = 0;
  LossTerms loss;
  double rel_l2 = std::numeric_limits<double>::quiet_NaN();
  double rmse = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t propagation_count = 0;
  double millis = 0.0;  // wall time; kept out of the deterministic log
};

struct TrainResult {
  int best_step = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  bool aborted = false;
  std::string abort_reason;
  std::vector<MetricRecord> metrics;
  EvalResult final_eval;
};

using MetricsSink = std::function<void(const MetricRecord&)>;
using CheckpointSink = std::function<void(int step, const SeparableModel&,
                                          const AdamState&)>;

// Adam training loop with periodic resampling; on return the model holds the
// parameters of the minimum-total-loss step. A non-finite loss aborts and
// keeps the last good snapshot.
TrainResult train(const pde::PdeProblem& problem, SeparableModel& model,
                  const TrainConfig& cfg, const MetricsSink& sink = {},
                  const CheckpointSink& ckpt_sink = {});

/// Evaluation thread cap from SPINN_THREADS (default 1, deterministic).
int eval_threads();

}  // namespace spinn
