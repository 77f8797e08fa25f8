#include "spinn/trainer.hpp"

#include <chrono>
#include <cstdlib>
#include <map>
#include <mutex>

#include "spinn/poisson_fd.hpp"
#include "spinn/residuals.hpp"

namespace spinn {

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr, double beta1, double beta2,
               double eps) {
  require(params.size() == grads.size(), "gradient length mismatch");
  require(state.m.size() == params.size(), "adam state length mismatch");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double g = grads[i];
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
    double mhat = state.m[i] / bc1;
    double vhat = state.v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

LossGraph::LossGraph(const SeparableModel& model,
                     const pde::PdeProblem& problem,
                     const FactorizedBatch& collocation,
                     const std::vector<pde::FaceBatch>& faces,
                     const pde::PointBatch* point_bc) {
  model.validate();
  tape_.bind_params(model.params.values());

  const std::uint64_t passes_before = model.propagation_count;
  TracedFeatures feats =
      eval_features_traced(tape_, model, collocation, problem.orders);

  pde::TapeBackend backend{&tape_};
  auto fields_raw = pde::residual_const_fields(problem, collocation);
  std::vector<Range> fields;
  fields.reserve(fields_raw.size());
  for (const auto& f : fields_raw) fields.push_back(tape_.constants(f));

  std::map<std::pair<int, std::vector<int>>, Range> term_cache;
  auto term = [&](int c, std::span<const int> alpha) -> Range {
    std::pair<int, std::vector<int>> key{c, {alpha.begin(), alpha.end()}};
    auto it = term_cache.find(key);
    if (it != term_cache.end()) return it->second;
    Range r = partial_traced(tape_, feats, alpha, c, model.rank,
                             model.out_components);
    term_cache.emplace(std::move(key), r);
    return r;
  };

  auto residual = pde::build_residual<pde::TapeBackend>(
      backend, problem, term, fields);

  const double n_grid = static_cast<double>(collocation.grid_size());
  if (problem.masked) {
    auto mask = pde::lshape_mask(collocation);
    double count = 0.0;
    for (auto b : mask) count += b;
    require(count > 0.0, "mask excludes every collocation point");
    pde_ = tape_.mean_sq_masked(residual[0], mask, count);
  } else {
    bool first = true;
    Range acc{};
    for (std::size_t c = 0; c < residual.size(); ++c) {
      NodeId ms = tape_.mean_sq(residual[c], n_grid);
      Range t{ms, 1};
      double w = problem.residual_weights[c];
      if (w != 1.0) t = tape_.scale(t, w);
      acc = first ? t : tape_.add(acc, t);
      first = false;
    }
    pde_ = acc.base;
  }

  // Initial/boundary regression: global mean over all points of the squared
  // component mismatch, assembled as per-face partial sums.
  double ic_total = 0.0, bc_total = 0.0;
  for (const auto& face : faces) {
    double pts = static_cast<double>(face.batch.grid_size());
    (face.is_initial ? ic_total : bc_total) += pts;
  }
  if (point_bc != nullptr) bc_total += static_cast<double>(point_bc->size());

  std::vector<int> zero_orders(static_cast<std::size_t>(model.dim), 0);
  Range ic_acc{}, bc_acc{};
  bool ic_first = true, bc_first = true;
  for (const auto& face : faces) {
    TracedFeatures ffeats =
        eval_features_traced(tape_, model, face.batch, zero_orders);
    double total = face.is_initial ? ic_total : bc_total;
    for (int c = 0; c < model.out_components; ++c) {
      Range pred = partial_traced(tape_, ffeats, zero_orders, c, model.rank,
                                  model.out_components);
      Range diff = tape_.sub(pred, tape_.constants(
                                       face.targets[static_cast<std::size_t>(
                                           c)]));
      Range t{tape_.mean_sq(diff, total), 1};
      if (face.is_initial) {
        ic_acc = ic_first ? t : tape_.add(ic_acc, t);
        ic_first = false;
      } else {
        bc_acc = bc_first ? t : tape_.add(bc_acc, t);
        bc_first = false;
      }
    }
  }
  if (point_bc != nullptr && point_bc->size() > 0) {
    FactorizedBatch pb;
    pb.coords = point_bc->coords;
    pb.bounds = problem.domain.axes;
    TracedFeatures pfeats = eval_features_traced(tape_, model, pb, zero_orders);
    Range pred = point_merge_traced(tape_, pfeats, 0, model.rank,
                                    model.out_components);
    Range diff = tape_.sub(pred, tape_.constants(point_bc->target));
    Range t{tape_.mean_sq(diff, bc_total), 1};
    bc_acc = bc_first ? t : tape_.add(bc_acc, t);
    bc_first = false;
  }
  ic_ = ic_first ? tape_.constant(0.0) : ic_acc.base;
  bc_ = bc_first ? tape_.constant(0.0) : bc_acc.base;

  Range weighted = tape_.scale(Range{pde_, 1}, problem.lambda_pde);
  weighted = tape_.add(weighted, tape_.scale(Range{ic_, 1}, problem.lambda_ic));
  weighted = tape_.add(weighted, tape_.scale(Range{bc_, 1}, problem.lambda_bc));
  total_ = weighted.base;
  passes_per_eval_ = model.propagation_count - passes_before;
}

void LossGraph::refresh(const SeparableModel& model) {
  tape_.refresh_params(model.params.values());
  tape_.forward_all();
  // The recorded jet passes re-execute; keep the counter truthful.
  model.propagation_count += passes_per_eval_;
}

LossTerms LossGraph::terms() const {
  return LossTerms{tape_.val(total_), tape_.val(pde_), tape_.val(ic_),
                   tape_.val(bc_)};
}

namespace {

double norm2(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

double relative_l2(std::span<const double> prediction,
                   std::span<const double> reference) {
  require(prediction.size() == reference.size(), "grid shape mismatch");
  double nref = norm2(reference);
  require(nref > 0.0, "relative error needs a nonzero reference");
  double nerr = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    double d = prediction[i] - reference[i];
    nerr += d * d;
  }
  return std::sqrt(nerr) / nref;
}

double rmse(std::span<const double> prediction,
            std::span<const double> reference) {
  require(prediction.size() == reference.size(), "grid shape mismatch");
  require(!prediction.empty(), "empty grids");
  double acc = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    double d = prediction[i] - reference[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(prediction.size()));
}

double relative_l2_masked(std::span<const double> prediction,
                          std::span<const double> reference,
                          std::span<const std::uint8_t> mask) {
  require(prediction.size() == reference.size() &&
              prediction.size() == mask.size(),
          "grid shape mismatch");
  double nerr = 0.0, nref = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    if (!mask[i]) continue;
    double d = prediction[i] - reference[i];
    nerr += d * d;
    nref += reference[i] * reference[i];
  }
  require(nref > 0.0, "relative error needs a nonzero reference");
  return std::sqrt(nerr) / std::sqrt(nref);
}

double rmse_masked(std::span<const double> prediction,
                   std::span<const double> reference,
                   std::span<const std::uint8_t> mask) {
  double acc = 0.0, count = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    if (!mask[i]) continue;
    double d = prediction[i] - reference[i];
    acc += d * d;
    count += 1.0;
  }
  require(count > 0.0, "mask excludes every node");
  return std::sqrt(acc / count);
}

int eval_threads() {
  const char* env = std::getenv("SPINN_THREADS");
  if (env == nullptr) return 1;
  int v = std::atoi(env);
  if (v < 1) return 1;
  if (v > 256) return 256;
  return v;
}

SolutionGrid predict_grid(const SeparableModel& model,
                          const FactorizedBatch& batch) {
  std::vector<int> zeros(static_cast<std::size_t>(model.dim), 0);
  FeatureJets feats = eval_features(model, batch, zeros);
  std::vector<int> dims;
  for (const auto& c : batch.coords) dims.push_back(static_cast<int>(c.size()));
  SolutionGrid grid(dims, model.out_components);
  partial_batch_into(feats, zeros, model.rank, model.out_components, grid,
                     eval_threads());
  return grid;
}

SolutionGrid predict_vorticity(const SeparableModel& model,
                               const FactorizedBatch& batch) {
  require(model.dim == 4 && model.out_components == 3,
          "vorticity prediction needs a (3+1)-d vector model");
  std::vector<int> orders{0, 1, 1, 1};
  FeatureJets feats = eval_features(model, batch, orders);
  std::vector<int> dims;
  for (const auto& c : batch.coords) dims.push_back(static_cast<int>(c.size()));
  SolutionGrid w(dims, 3);
  auto partial = [&](int comp, int axis) {
    std::vector<int> a(4, 0);
    a[static_cast<std::size_t>(axis)] = 1;
    SolutionGrid g(dims, 1);
    // Extract a single component of the velocity derivative.
    std::vector<double> scratch;
    SolutionGrid full(dims, model.out_components);
    partial_batch_into(feats, a, model.rank, model.out_components, full,
                       eval_threads());
    std::copy(full.component(comp).begin(), full.component(comp).end(),
              g.component(0).begin());
    return g;
  };
  // omega_i = d(u_k)/dx_j - d(u_j)/dx_k, (i,j,k) cyclic, spatial axes 1..3.
  for (int i = 0; i < 3; ++i) {
    int j = (i + 1) % 3, k = (i + 2) % 3;
    SolutionGrid a = partial(k, 1 + j);
    SolutionGrid b = partial(j, 1 + k);
    auto out = w.component(i);
    auto ga = a.component(0);
    auto gb = b.component(0);
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = ga[n] - gb[n];
  }
  return w;
}

EvalResult evaluate(const SeparableModel& model, const pde::PdeProblem& problem,
                    int resolution) {
  if (resolution <= 0) resolution = problem.default_eval_resolution;
  FactorizedBatch batch = uniform_batch(problem.domain, resolution);
  EvalResult out;
  if (problem.id == pde::ProblemId::poisson_lshape) {
    static std::mutex mu;
    static std::map<int, pde::PoissonFdSolution> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(resolution);
    if (it == cache.end())
      it = cache.emplace(resolution,
                         pde::solve_poisson_lshape_fd(resolution)).first;
    const auto& fd = it->second;
    SolutionGrid pred = predict_grid(model, batch);
    out.rel_l2 = relative_l2_masked(pred.component(0), fd.u, fd.inside);
    out.rmse = rmse_masked(pred.component(0), fd.u, fd.inside);
    out.has_reference = true;
    return out;
  }
  if (problem.id == pde::ProblemId::ns4d) {
    SolutionGrid pred = predict_vorticity(model, batch);
    SolutionGrid ref = pde::ns4d_vorticity_reference(batch);
    out.rel_l2 = relative_l2(pred.data, ref.data);
    out.rmse = rmse(pred.data, ref.data);
    out.has_reference = true;
    return out;
  }
  if (!problem.has_exact) return out;  // no reference available
  SolutionGrid pred = predict_grid(model, batch);
  SolutionGrid ref = pde::exact_solution(problem, batch);
  out.rel_l2 = relative_l2(pred.data, ref.data);
  out.rmse = rmse(pred.data, ref.data);
  out.has_reference = true;
  return out;
}

TrainResult train(const pde::PdeProblem& problem, SeparableModel& model,
                  const TrainConfig& cfg, const MetricsSink& sink,
                  const CheckpointSink& ckpt_sink) {
  cfg.validate();
  model.validate();
  require(static_cast<int>(cfg.points.size()) == model.dim,
          "collocation counts must match the model dimension");
  require(model.dim == problem.dim(), "model/problem dimension mismatch");

  std::vector<int> bc_counts = cfg.bc_points.empty() ? cfg.points
                                                     : cfg.bc_points;
  TrainResult result;
  AdamState adam;
  adam.init(model.params.size());
  std::vector<double> best_params(model.params.values().begin(),
                                  model.params.values().end());

  std::unique_ptr<LossGraph> graph;
  pde::PointBatch point_bc;
  const bool use_point_bc = problem.nonseparable_bc;

  auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  };

  for (int step = 1; step <= cfg.iterations; ++step) {
    std::uint64_t round =
        static_cast<std::uint64_t>((step - 1) / cfg.resample_interval);
    if (step == 1 || (step - 1) % cfg.resample_interval == 0) {
      FactorizedBatch colloc = pde::sample_factorized(
          problem.domain, cfg.points, cfg.seed, round);
      auto faces = pde::boundary_batches(problem, bc_counts, cfg.seed, round);
      if (use_point_bc)
        point_bc = pde::lshape_boundary_points(problem.bc_points_per_edge,
                                               cfg.seed, round);
      graph = std::make_unique<LossGraph>(model, problem, colloc, faces,
                                          use_point_bc ? &point_bc : nullptr);
    } else {
      graph->refresh(model);
    }

    LossTerms terms = graph->terms();
    if (!std::isfinite(terms.total)) {
      result.aborted = true;
      result.abort_reason =
          "non-finite loss at step " + std::to_string(step);
      break;
    }
    if (terms.total < result.best_loss) {
      result.best_loss = terms.total;
      result.best_step = step;
      std::copy(model.params.values().begin(), model.params.values().end(),
                best_params.begin());
    }

    bool last = step == cfg.iterations;
    bool do_eval = step % cfg.eval_interval == 0 || last;
    bool do_log = step == 1 || step % cfg.log_interval == 0 || last || do_eval;
    if (do_log) {
      MetricRecord rec;
      rec.step = step;
      rec.loss = terms;
      rec.propagation_count = model.propagation_count;
      rec.millis = elapsed_ms();
      if (do_eval) {
        EvalResult ev = evaluate(model, problem, cfg.eval_resolution);
        if (ev.has_reference) {
          rec.rel_l2 = ev.rel_l2;
          rec.rmse = ev.rmse;
        }
      }
      result.metrics.push_back(rec);
      if (sink) sink(rec);
    }

    graph->backward();
    adam_step(model.params.values(), graph->grad(), adam, cfg.lr, cfg.beta1,
              cfg.beta2, cfg.eps);
    if (ckpt_sink && cfg.checkpoint_interval > 0 &&
        step % cfg.checkpoint_interval == 0)
      ckpt_sink(step, model, adam);
  }

  std::copy(best_params.begin(), best_params.end(),
            model.params.values().begin());
  result.final_eval = evaluate(model, problem, cfg.eval_resolution);
  return result;
}

}  // namespace spinn
