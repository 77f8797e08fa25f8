#include "spinn/flops.hpp"

#include <cstdio>

namespace spinn::flops {

namespace {

// Frozen counting constants. Dense layers are counted as one add per
// multiply (accumulation plus bias fold into the add column). The hidden
// stack is counted as `depth` width-by-width transitions plus the input and
// output projections; together with a 4-flop tanh this reproduces the
// reference per-pass totals. Derivative sweeps are counted as fixed
// multiples of the forward pass: a forward-mode jet sweep costs 2x (first
// order) and 4x (second order) on both columns, while reverse-mode
// evaluation on every coordinate axis costs (4x adds, 2x mults) and
// (6x adds, 4x mults).
constexpr std::int64_t kTanhFlopsPerUnit = 4;  // split 2 adds + 2 mults

OpCount dense(std::int64_t n_in, std::int64_t n_out) {
  return {n_in * n_out, n_in * n_out};
}

OpCount per_pass(const ArchSpec& s, std::int64_t d_in) {
  if (s.depth == 0) return dense(d_in, s.out_dim);
  OpCount c = dense(d_in, s.width);
  c = c + dense(s.width, s.width).scaled(s.depth, s.depth);
  c = c + dense(s.width, s.out_dim);
  std::int64_t units = static_cast<std::int64_t>(s.depth) * s.width;
  c.adds += units * (kTanhFlopsPerUnit / 2);
  c.mults += units * (kTanhFlopsPerUnit / 2);
  return c;
}

}  // namespace

CountTable count_ops(const ArchSpec& spec) {
  require(spec.d >= 1, "architecture needs d >= 1");
  require(static_cast<int>(spec.points_per_axis.size()) == spec.d,
          "points_per_axis must list one count per axis");
  CountTable table;
  if (spec.kind == ArchKind::separable) {
    OpCount body = per_pass(spec, 1).scaled(spec.axis_points(),
                                            spec.axis_points());
    OpCount fwd = body;
    if (spec.include_merge) {
      std::int64_t merge_macs = spec.grid_points() *
                                static_cast<std::int64_t>(spec.rank) * spec.m *
                                (spec.d - 1);
      fwd = fwd + OpCount{merge_macs, merge_macs};
    }
    table.forward = fwd;
    table.first = fwd.scaled(2, 2);
    table.second = fwd.scaled(4, 4);
  } else {
    OpCount fwd = per_pass(spec, spec.d).scaled(spec.grid_points(),
                                                spec.grid_points());
    table.forward = fwd;
    table.first = fwd.scaled(4, 2);
    table.second = fwd.scaled(6, 4);
  }
  return table;
}

double cost_ratio(const ArchSpec& sep, const ArchSpec& non) {
  auto a = count_ops(sep).total().flops();
  auto b = count_ops(non).total().flops();
  require(b > 0, "monolithic cost must be positive");
  return static_cast<double>(a) / static_cast<double>(b);
}

std::vector<TableEntry> reference_table() {
  ArchSpec sep;
  sep.kind = ArchKind::separable;
  sep.d = 3;
  sep.points_per_axis = {64, 64, 64};
  sep.depth = 4;
  sep.width = 64;
  sep.out_dim = 32;
  sep.rank = 32;
  sep.m = 1;

  ArchSpec mono;
  mono.kind = ArchKind::monolithic;
  mono.d = 3;
  mono.points_per_axis = {64, 64, 64};
  mono.depth = 5;
  mono.width = 128;
  mono.out_dim = 1;
  mono.rank = 1;
  mono.m = 1;

  return {TableEntry{"separable", sep, count_ops(sep)},
          TableEntry{"monolithic", mono, count_ops(mono)}};
}

namespace {

double mega(std::int64_t v) { return static_cast<double>(v) / 1e6; }

}  // namespace

std::string format_text(const std::vector<TableEntry>& entries) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-12s %-22s %16s %16s\n", "arch", "row",
                "ADDS (x1e6)", "MULTS (x1e6)");
  out += buf;
  for (const auto& e : entries) {
    auto row = [&](const char* name, const OpCount& c) {
      std::snprintf(buf, sizeof(buf), "%-12s %-22s %16.2f %16.2f\n",
                    e.label.c_str(), name, mega(c.adds), mega(c.mults));
      out += buf;
    };
    row("forward", e.counts.forward);
    row("1st-order derivative", e.counts.first);
    row("2nd-order derivative", e.counts.second);
    std::snprintf(buf, sizeof(buf), "%-12s %-22s %16.2f MFLOPs\n",
                  e.label.c_str(), "total", mega(e.counts.total().flops()));
    out += buf;
  }
  if (entries.size() == 2) {
    double ratio = static_cast<double>(entries[0].counts.total().flops()) /
                   static_cast<double>(entries[1].counts.total().flops());
    std::snprintf(buf, sizeof(buf), "total flops ratio: %.6g (1/%.1f)\n",
                  ratio, 1.0 / ratio);
    out += buf;
  }
  return out;
}

std::string format_csv(const std::vector<TableEntry>& entries) {
  std::string out = "arch,row,adds,mults,flops\n";
  char buf[256];
  for (const auto& e : entries) {
    auto row = [&](const char* name, const OpCount& c) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%lld,%lld,%lld\n",
                    e.label.c_str(), name, static_cast<long long>(c.adds),
                    static_cast<long long>(c.mults),
                    static_cast<long long>(c.flops()));
      out += buf;
    };
    row("forward", e.counts.forward);
    row("1st-order derivative", e.counts.first);
    row("2nd-order derivative", e.counts.second);
    row("total", e.counts.total());
  }
  return out;
}

}  // namespace spinn::flops
