#include "spinn/model.hpp"

#include "spinn/rng.hpp"

namespace spinn {

void SeparableModel::validate() const {
  require(dim >= 2, "separable model needs at least 2 axes");
  require(rank >= 1 && out_components >= 1, "rank and m must be >= 1");
  require(static_cast<int>(axes.size()) == dim, "axis count mismatch");
  for (const auto& net : axes)
    require(net.cfg.out_dim == feature_width(),
            "body net out_dim must equal rank*m");
}

SeparableModel make_model(std::span<const MlpConfig> per_axis, int rank,
                          int m) {
  SeparableModel model;
  model.dim = static_cast<int>(per_axis.size());
  model.rank = rank;
  model.out_components = m;
  for (std::size_t i = 0; i < per_axis.size(); ++i)
    model.axes.push_back(init_mlp(per_axis[i], model.params,
                                  "net" + std::to_string(i)));
  model.validate();
  return model;
}

SeparableModel make_model(int d, MlpConfig shared, int rank, int m,
                          std::uint64_t seed) {
  shared.out_dim = rank * m;
  std::vector<MlpConfig> cfgs(static_cast<std::size_t>(d), shared);
  for (int i = 0; i < d; ++i)
    cfgs[static_cast<std::size_t>(i)].seed =
        RngStream::key_of({seed, 0x626f6479ull, static_cast<std::uint64_t>(i)});
  return make_model(cfgs, rank, m);
}

FeatureJets eval_features(const SeparableModel& model,
                          const FactorizedBatch& batch,
                          std::span<const int> orders) {
  require(batch.dim() == model.dim, "batch dimension mismatch");
  require(static_cast<int>(orders.size()) == model.dim,
          "orders size mismatch");
  batch.validate_inside();
  FeatureJets feats;
  feats.rm = model.feature_width();
  std::uint64_t passes = 0;
  for (int i = 0; i < model.dim; ++i) {
    const auto& xs = batch.coords[static_cast<std::size_t>(i)];
    int order = orders[static_cast<std::size_t>(i)];
    Jet<double>::check_order(order);
    FeatureAxis axis;
    axis.n = static_cast<int>(xs.size());
    axis.ncoef = order + 1;
    axis.data.assign(static_cast<std::size_t>(axis.n) * axis.ncoef *
                         static_cast<std::size_t>(feats.rm),
                     0.0);
    const BodyNet& net = model.axes[static_cast<std::size_t>(i)];
    std::size_t rm = static_cast<std::size_t>(feats.rm);
    std::size_t row_block = static_cast<std::size_t>(axis.n) * rm;
    for (std::size_t s = 0; s < xs.size(); ++s) {
      auto out = forward_jet(net, model.params, jet_seed(xs[s], order));
      for (std::size_t j = 0; j < rm; ++j)
        for (int k = 0; k <= order; ++k)
          axis.data[static_cast<std::size_t>(k) * row_block + s * rm + j] =
              out[j].c[static_cast<std::size_t>(k)];
    }
    passes += xs.size();
    feats.axes.push_back(std::move(axis));
  }
  model.propagation_count += passes;
  return feats;
}

TracedFeatures eval_features_traced(Tape& t, const SeparableModel& model,
                                    const FactorizedBatch& batch,
                                    std::span<const int> orders) {
  require(batch.dim() == model.dim, "batch dimension mismatch");
  require(static_cast<int>(orders.size()) == model.dim,
          "orders size mismatch");
  batch.validate_inside();
  TracedFeatures feats;
  feats.rm = model.feature_width();
  std::uint64_t passes = 0;
  for (int i = 0; i < model.dim; ++i) {
    const auto& xs = batch.coords[static_cast<std::size_t>(i)];
    int order = orders[static_cast<std::size_t>(i)];
    Jet<double>::check_order(order);
    TracedAxis axis;
    axis.n = static_cast<int>(xs.size());
    axis.ncoef = order + 1;
    auto rm = static_cast<std::uint32_t>(feats.rm);
    auto n = static_cast<std::uint32_t>(axis.n);
    axis.block = t.reserve(static_cast<std::uint32_t>(axis.ncoef) * n * rm);
    const BodyNet& net = model.axes[static_cast<std::size_t>(i)];
    for (std::uint32_t s = 0; s < n; ++s)
      trace_forward_jet(t, net, xs[s], order, axis.block.base + s * rm,
                        n * rm);
    passes += xs.size();
    feats.axes.push_back(axis);
  }
  model.propagation_count += passes;
  return feats;
}

}  // namespace spinn
