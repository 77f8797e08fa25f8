#include "cli.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "spinn/checkpoint.hpp"
#include "spinn/flops.hpp"
#include "spinn/grid_io.hpp"
#include "spinn/runconfig.hpp"
#include "spinn/trainer.hpp"

namespace fs = std::filesystem;

namespace spinn::cli {

namespace {

[[noreturn]] void usage_error(const std::string& msg) {
  throw ConfigError(msg);
}

pde::PdeProblem resolve_problem(const std::string& id) {
  auto pid = pde::problem_from_string(id);
  if (!pid) {
    std::string msg = "unknown problem id '" + id + "'; valid ids:";
    for (const auto& s : pde::problem_id_list()) msg += " " + s;
    usage_error(msg);
  }
  return pde::make_problem(*pid);
}

// One run per output directory, enforced with an exclusive lock file.
struct RunLock {
  fs::path path;
  int fd = -1;

  explicit RunLock(const fs::path& dir) : path(dir / "run.lock") {
    fd = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
      usage_error("output directory is locked by another run (" +
                  path.string() + " exists)");
  }
  ~RunLock() {
    if (fd >= 0) {
      ::close(fd);
      std::error_code ec;
      fs::remove(path, ec);
    }
  }
};

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_metric_line(std::ostream& os, const MetricRecord& rec) {
  os << "{\"step\":" << rec.step << ",\"total\":" << fmt_double(rec.loss.total)
     << ",\"pde\":" << fmt_double(rec.loss.pde)
     << ",\"ic\":" << fmt_double(rec.loss.ic)
     << ",\"bc\":" << fmt_double(rec.loss.bc);
  if (std::isfinite(rec.rel_l2))
    os << ",\"rel_l2\":" << fmt_double(rec.rel_l2)
       << ",\"rmse\":" << fmt_double(rec.rmse);
  os << ",\"passes\":" << rec.propagation_count << "}\n";
}

std::vector<int> resolve_points(std::vector<int> pts, int d) {
  if (pts.empty()) pts.assign(static_cast<std::size_t>(d), 32);
  if (pts.size() == 1) pts.assign(static_cast<std::size_t>(d), pts[0]);
  require(static_cast<int>(pts.size()) == d,
          "points list must have one entry per axis");
  return pts;
}

int cmd_train(const std::string& config_path, const std::string& out_flag,
              long long seed_flag, bool seed_set) {
  RunConfig rc = load_run_config(config_path);
  if (seed_set) rc.seed = static_cast<std::uint64_t>(seed_flag);
  std::string out = !out_flag.empty() ? out_flag : rc.out_dir;
  if (out.empty())
    usage_error("no output directory: pass --out or set 'out =' in the "
                "config");
  pde::PdeProblem problem = resolve_problem(rc.problem);
  const int d = problem.dim();

  TrainConfig tc = rc.train;
  tc.points = resolve_points(tc.points, d);
  if (!tc.bc_points.empty()) tc.bc_points = resolve_points(tc.bc_points, d);
  tc.seed = rc.seed;
  tc.eval_resolution = rc.eval_resolution;

  MlpConfig net;
  net.depth = rc.depth;
  net.width = rc.width;
  net.variant = rc.variant;
  SeparableModel model =
      make_model(d, net, rc.rank, problem.out_components, rc.seed);

  fs::create_directories(out);
  RunLock lock{fs::path(out)};
  std::ofstream metrics(fs::path(out) / "metrics.jsonl", std::ios::trunc);
  std::ofstream timings(fs::path(out) / "timings.jsonl", std::ios::trunc);
  require(metrics.good() && timings.good(),
          "cannot create log files under " + out);

  auto sink = [&](const MetricRecord& rec) {
    write_metric_line(metrics, rec);
    timings << "{\"step\":" << rec.step
            << ",\"millis\":" << fmt_double(rec.millis) << "}\n";
  };
  auto ckpt_sink = [&](int step, const SeparableModel& mm,
                       const AdamState& st) {
    char name[64];
    std::snprintf(name, sizeof(name), "checkpoint_%08d.ckpt", step);
    save_checkpoint(fs::path(out) / name, mm, &st,
                    static_cast<std::uint64_t>(step));
  };

  TrainResult res = train(problem, model, tc, sink, ckpt_sink);
  metrics.close();
  timings.close();

  save_checkpoint(fs::path(out) / "model.ckpt", model, nullptr,
                  static_cast<std::uint64_t>(res.best_step));

  int eval_res = tc.eval_resolution > 0 ? tc.eval_resolution
                                        : problem.default_eval_resolution;
  FactorizedBatch eval_batch = pde::uniform_batch(problem.domain, eval_res);
  write_grid_binary(fs::path(out) / "solution.grid",
                    predict_grid(model, eval_batch));

  std::ofstream summary(fs::path(out) / "summary.json", std::ios::trunc);
  summary << "{\"problem\":\"" << problem.name << "\",\"best_step\":"
          << res.best_step << ",\"best_loss\":" << fmt_double(res.best_loss)
          << ",\"aborted\":" << (res.aborted ? "true" : "false");
  if (res.final_eval.has_reference)
    summary << ",\"final_rel_l2\":" << fmt_double(res.final_eval.rel_l2)
            << ",\"final_rmse\":" << fmt_double(res.final_eval.rmse);
  summary << ",\"passes\":" << model.propagation_count << "}\n";
  summary.close();

  if (res.aborted) {
    std::cerr << "training aborted: " << res.abort_reason
              << " (best checkpoint kept)\n";
    return 1;
  }
  if (res.final_eval.has_reference)
    std::cout << "relative_l2 = " << fmt_double(res.final_eval.rel_l2)
              << "\nrmse = " << fmt_double(res.final_eval.rmse) << "\n";
  std::cout << "best_step = " << res.best_step
            << "\nbest_loss = " << fmt_double(res.best_loss) << "\n";
  return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& problem_id,
             int resolution, const std::string& out) {
  pde::PdeProblem problem = resolve_problem(problem_id);
  LoadedCheckpoint loaded = load_checkpoint(ckpt);
  require(loaded.model.dim == problem.dim(),
          "checkpoint dimension does not match the problem");
  EvalResult ev = evaluate(loaded.model, problem, resolution);
  if (ev.has_reference)
    std::cout << "relative_l2 = " << fmt_double(ev.rel_l2)
              << "\nrmse = " << fmt_double(ev.rmse) << "\n";
  else
    std::cout << "no analytic reference for " << problem.name << "\n";
  if (!out.empty()) {
    fs::create_directories(out);
    int res = resolution > 0 ? resolution : problem.default_eval_resolution;
    FactorizedBatch batch = pde::uniform_batch(problem.domain, res);
    write_grid_binary(fs::path(out) / "prediction.grid",
                      predict_grid(loaded.model, batch));
  }
  return 0;
}

int cmd_export(const std::string& ckpt, const std::string& problem_id,
               const std::string& slice_spec, int resolution,
               const std::string& out, int component, bool use_exact) {
  pde::PdeProblem problem = resolve_problem(problem_id);
  const int d = problem.dim();

  // Slice spec pins all but two axes: "t=0,x3=0.25".
  std::vector<double> pinned(static_cast<std::size_t>(d));
  std::vector<bool> is_pinned(static_cast<std::size_t>(d), false);
  if (!slice_spec.empty()) {
    std::stringstream ss(slice_spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto eq = item.find('=');
      require(eq != std::string::npos,
              "slice entries must look like axis=value");
      std::string name = item.substr(0, eq);
      double value = std::stod(item.substr(eq + 1));
      int axis = -1;
      for (int i = 0; i < d; ++i)
        if (problem.domain.axis_names[static_cast<std::size_t>(i)] == name)
          axis = i;
      require(axis >= 0, "unknown axis '" + name + "' in slice spec");
      const auto& iv = problem.domain.axes[static_cast<std::size_t>(axis)];
      require(value >= iv.lo && value <= iv.hi,
              "slice value outside the domain for axis " + name);
      pinned[static_cast<std::size_t>(axis)] = value;
      is_pinned[static_cast<std::size_t>(axis)] = true;
    }
  }
  std::vector<int> free_axes;
  for (int i = 0; i < d; ++i)
    if (!is_pinned[static_cast<std::size_t>(i)]) free_axes.push_back(i);
  require(free_axes.size() == 2,
          "slice must leave exactly two free axes (got " +
              std::to_string(free_axes.size()) + ")");

  FactorizedBatch batch;
  batch.bounds = problem.domain.axes;
  for (int i = 0; i < d; ++i) {
    const auto& iv = problem.domain.axes[static_cast<std::size_t>(i)];
    if (is_pinned[static_cast<std::size_t>(i)])
      batch.coords.push_back({pinned[static_cast<std::size_t>(i)]});
    else
      batch.coords.push_back(linspace(iv.lo, iv.hi, resolution));
  }

  SolutionGrid grid;
  if (use_exact) {
    grid = pde::exact_solution(problem, batch);
  } else {
    require(!ckpt.empty(), "--checkpoint is required unless --exact is set");
    LoadedCheckpoint loaded = load_checkpoint(ckpt);
    require(loaded.model.dim == d,
            "checkpoint dimension does not match the problem");
    grid = predict_grid(loaded.model, batch);
  }
  require(component >= 0 && component < grid.m, "component out of range");

  fs::create_directories(out);
  write_grid_csv(fs::path(out) / "slice.csv", batch, grid,
                 problem.domain.axis_names);
  write_pgm(fs::path(out) / "slice.pgm", grid.component(component), resolution,
            resolution);
  std::cout << "wrote slice.csv and slice.pgm under " << out << "\n";
  return 0;
}

int cmd_flops(bool paper_table, const std::string& arch, std::vector<int> n,
              int d, int depth, int width, int out_dim, int rank, int m,
              const std::string& csv_path) {
  std::vector<flops::TableEntry> entries;
  if (paper_table) {
    entries = flops::reference_table();
  } else {
    flops::ArchSpec spec;
    if (arch == "separable") spec.kind = flops::ArchKind::separable;
    else if (arch == "monolithic") spec.kind = flops::ArchKind::monolithic;
    else usage_error("--arch must be separable or monolithic");
    spec.d = d;
    spec.points_per_axis = resolve_points(std::move(n), d);
    spec.depth = depth;
    spec.width = width;
    spec.out_dim = out_dim;
    spec.rank = rank;
    spec.m = m;
    entries.push_back({arch, spec, flops::count_ops(spec)});
  }
  std::cout << flops::format_text(entries);
  if (!csv_path.empty()) {
    std::ofstream os(csv_path, std::ios::trunc);
    require(os.good(), "cannot open csv for writing: " + csv_path);
    os << flops::format_csv(entries);
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"separable-network PDE solver"};
  app.require_subcommand(1);

  auto* train_cmd = app.add_subcommand("train", "train a model from a config");
  std::string config_path, out_flag;
  long long seed_flag = 0;
  train_cmd->add_option("--config", config_path, "run configuration file")
      ->required();
  train_cmd->add_option("--out", out_flag, "output directory");
  auto* seed_opt =
      train_cmd->add_option("--seed", seed_flag, "override the config seed");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string eval_ckpt, eval_problem, eval_out;
  int eval_resolution = 0;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "model checkpoint")
      ->required();
  eval_cmd->add_option("--problem", eval_problem, "problem id")->required();
  eval_cmd->add_option("--resolution", eval_resolution,
                       "evaluation grid resolution per axis");
  eval_cmd->add_option("--out", eval_out, "directory for the grid export");

  auto* export_cmd =
      app.add_subcommand("export", "export a 2-d slice as CSV and PGM");
  std::string exp_ckpt, exp_problem, exp_slice, exp_out;
  int exp_resolution = 64, exp_component = 0;
  bool exp_exact = false;
  export_cmd->add_option("--checkpoint", exp_ckpt, "model checkpoint");
  export_cmd->add_option("--problem", exp_problem, "problem id")->required();
  export_cmd->add_option("--slice", exp_slice,
                         "pinned axes, e.g. t=0,x3=0.25");
  export_cmd->add_option("--resolution", exp_resolution,
                         "points per free axis");
  export_cmd->add_option("--component", exp_component, "output component");
  export_cmd->add_flag("--exact", exp_exact,
                       "export the manufactured solution instead of a model");
  export_cmd->add_option("--out", exp_out, "output directory")->required();

  auto* flops_cmd =
      app.add_subcommand("flops", "analytic operation-count tables");
  bool paper_table = false;
  std::string arch = "separable", csv_path;
  std::vector<int> flops_n;
  int flops_d = 3, flops_depth = 4, flops_width = 64, flops_out = 32,
      flops_rank = 32, flops_m = 1;
  flops_cmd->add_flag("--paper-table", paper_table,
                      "emit the built-in two-architecture reference table");
  flops_cmd->add_option("--arch", arch, "separable | monolithic");
  flops_cmd->add_option("--N", flops_n, "points per axis (single or list)");
  flops_cmd->add_option("--d", flops_d, "input dimension");
  flops_cmd->add_option("--depth", flops_depth, "hidden stack depth");
  flops_cmd->add_option("--width", flops_width, "hidden width");
  flops_cmd->add_option("--out-dim", flops_out, "network output size");
  flops_cmd->add_option("--rank", flops_rank, "merge rank");
  flops_cmd->add_option("--m", flops_m, "output components");
  flops_cmd->add_option("--csv", csv_path, "also write the table as CSV");

  std::vector<const char*> argv;
  argv.push_back("spinn");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (train_cmd->parsed())
      return cmd_train(config_path, out_flag, seed_flag, seed_opt->count() > 0);
    if (eval_cmd->parsed())
      return cmd_eval(eval_ckpt, eval_problem, eval_resolution, eval_out);
    if (export_cmd->parsed())
      return cmd_export(exp_ckpt, exp_problem, exp_slice, exp_resolution,
                        exp_out, exp_component, exp_exact);
    if (flops_cmd->parsed())
      return cmd_flops(paper_table, arch, flops_n, flops_d, flops_depth,
                       flops_width, flops_out, flops_rank, flops_m, csv_path);
    return 2;
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace spinn::cli
