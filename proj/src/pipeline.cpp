#include "grouploss/pipeline.hpp"

#include <cmath>
#include <json.hpp>
#include <stdexcept>

#include "grouploss/binning.hpp"
#include "grouploss/calibration.hpp"
#include "grouploss/glestim.hpp"

namespace grouploss {

Reduction parse_reduction(std::string_view text) {
  if (text == "auto") return {Reduction::Kind::Auto, 0};
  if (text == "top-label") return {Reduction::Kind::TopLabel, 0};
  if (text.rfind("classwise:", 0) == 0) {
    const std::string k(text.substr(10));
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(k, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (k.empty() || pos != k.size()) throw std::invalid_argument("bad class index in reduction: " + k);
    return {Reduction::Kind::Classwise, v};
  }
  throw std::invalid_argument("unknown reduction: " + std::string(text));
}

std::string to_string(const Reduction& reduction) {
  switch (reduction.kind) {
    case Reduction::Kind::Auto: return "auto";
    case Reduction::Kind::TopLabel: return "top-label";
    case Reduction::Kind::Classwise: return "classwise:" + std::to_string(reduction.class_index);
  }
  return "auto";
}

void RunConfig::validate() const {
  if (n_bins < 1) throw std::invalid_argument("--bins must be at least 1");
  if (region_ratio < 1) throw std::invalid_argument("--region-ratio must be at least 1");
  if (partition.kind == PartitionKind::Tree && region_ratio < 2)
    throw std::invalid_argument("--region-ratio must be at least 2 for tree partitions");
  if (partition.kind == PartitionKind::Tree && partition.tree_min_leaf < 2)
    throw std::invalid_argument("--min-leaf must be at least 2");
  if (partition.kind == PartitionKind::KMeans && partition.kmeans_k < 1)
    throw std::invalid_argument("k-means needs at least one cluster");
  if (!(bandwidth_fraction > 0.0 && bandwidth_fraction <= 1.0))
    throw std::invalid_argument("--bandwidth must lie in (0, 1]");
}

BinaryView reduce(const LabeledDataset& ds, const Reduction& reduction) {
  switch (reduction.kind) {
    case Reduction::Kind::Auto: return ds.num_classes() == 2 ? native_binary(ds) : top_label_reduce(ds);
    case Reduction::Kind::TopLabel: return top_label_reduce(ds);
    case Reduction::Kind::Classwise:
      if (reduction.class_index >= ds.num_classes())
        throw std::invalid_argument("classwise class index out of range");
      return classwise_slice(ds, reduction.class_index);
  }
  return native_binary(ds);
}

GroupingReport estimate_binary(const BinaryView& input, const RunConfig& config) {
  config.validate();
  if (input.feature_dim() == 0) throw std::invalid_argument("input has no feature columns to partition");
  if (input.size() < 10) throw std::invalid_argument("need at least 10 rows");

  const SplitIndex split = stratified_split(input, config.n_bins, config.seed);

  std::vector<double> scores = input.score;
  if (config.isotonic) {
    std::vector<double> ts;
    std::vector<int> tl;
    for (std::size_t i : split.train_rows) {
      ts.push_back(input.score[i]);
      tl.push_back(input.label[i]);
    }
    scores = isotonic_apply(isotonic_fit(ts, tl), input.score);
  }
  const std::vector<int>& labels = input.label;

  const BinnedView all_bins = make_bins(scores, labels, config.n_bins);
  const BinnedView test_bins = make_bins(scores, labels, config.n_bins, split.test_rows);

  const PartitionModel model = fit_partition(all_bins, *input.features, labels, split, config.partition,
                                             config.region_ratio, config.seed);
  const std::vector<std::size_t> regions = assign_regions(model, all_bins, *input.features);
  const RegionStats stats = region_stats(regions, all_bins, labels, split.test_rows);
  const ExplainedEstimate explained = gl_explained_debiased(stats, config.rule);

  const CalibrationCurve curve = fit_calibration_curve(scores, labels, config.bandwidth_fraction);
  const InducedEstimate induced = gl_induced_estimate(curve, all_bins, scores, config.rule);

  ReportInputs in;
  in.rule = config.rule;
  in.region_ratio = config.region_ratio;
  in.n_rows = input.size();
  in.n_train = split.train_rows.size();
  in.test_bins = &test_bins;
  in.stats = &stats;
  in.explained = &explained;
  in.induced = &induced;
  in.cl = calibration_loss_binned(test_bins, config.rule);
  return build_report(in);
}

GroupingReport estimate_grouping(const LabeledDataset& ds, const RunConfig& config) {
  config.validate();
  return estimate_binary(reduce(ds, config.reduction), config);
}

namespace {

using ojson = nlohmann::ordered_json;

ojson number(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

}  // namespace

std::string report_json(const GroupingReport& r, const RunConfig& config) {
  ojson j;
  j["schema_version"] = 1;
  j["config"] = {
      {"rule", to_string(config.rule)},
      {"n_bins", config.n_bins},
      {"region_ratio", config.region_ratio},
      {"partition", to_string(config.partition)},
      {"min_leaf", config.partition.tree_min_leaf},
      {"recalibrate", config.isotonic ? "isotonic" : "none"},
      {"split_fraction", RunConfig::split_fraction},
      {"seed", config.seed},
      {"reduction", to_string(config.reduction)},
      {"bandwidth_fraction", config.bandwidth_fraction},
  };
  j["rule"] = to_string(r.rule);
  j["n_bins"] = r.n_bins;
  j["region_ratio"] = r.region_ratio;
  j["n_rows"] = r.n_rows;
  j["n_train"] = r.n_train;
  j["n_test"] = r.n_test;
  j["CL_binned"] = r.cl_infinite ? ojson(nullptr) : number(r.cl_binned);
  j["CL_binned_infinite"] = r.cl_infinite;
  j["GL_plugin"] = number(r.gl_plugin);
  j["GL_bias"] = number(r.gl_bias);
  j["GL_explained"] = number(r.gl_explained);
  j["GL_induced"] = number(r.gl_induced);
  j["GL_LB"] = number(r.gl_lb);
  j["GL_LB_clipped"] = number(r.gl_lb_clipped);
  j["debiased"] = r.debiased;
  if (r.bounds) {
    const BinningBounds& b = r.bounds->binning;
    j["bounds"] = {
        {"induced_lower", number(b.lower)},
        {"induced_upper", number(b.upper)},
        {"induced_lower_equal_width", number(b.equal_width_lower)},
        {"induced_upper_equal_width", number(b.equal_width_upper)},
        {"mse_lower_bound", number(r.bounds->mse_lower_bound)},
        {"mse_lower_bound_equal_width", number(r.bounds->mse_lower_bound_equal_width)},
    };
  } else {
    j["bounds"] = nullptr;
  }
  j["unestimable_bins"] = r.unestimable_bins;
  j["low_confidence_bins"] = r.low_confidence_bins;
  j["all_unestimable"] = r.all_unestimable;
  j["metadata"] = {
      {"estimation_rows", "test"},
      {"gl_induced_rows", "all"},
      {"cp_level", 0.95},
  };
  ojson bins = ojson::array();
  for (const DiagramBin& b : r.bins) {
    ojson regions = ojson::array();
    for (const DiagramRegion& g : b.regions) {
      regions.push_back({
          {"region_index", g.region_index},
          {"mu_hat", number(g.mu_hat)},
          {"n_region", g.n_region},
          {"cp_lo", number(g.cp_lo)},
          {"cp_hi", number(g.cp_hi)},
          {"grayed", g.grayed},
      });
    }
    bins.push_back({
        {"bin_index", b.bin_index},
        {"s_lo", number(b.s_lo)},
        {"s_hi", number(b.s_hi)},
        {"S_B", number(b.s_b)},
        {"c_hat", number(b.c_hat)},
        {"n_bin", b.n_bin},
        {"estimable", b.estimable},
        {"low_confidence", b.low_confidence},
        {"regions", std::move(regions)},
    });
  }
  j["bins"] = std::move(bins);
  return j.dump(2) + "\n";
}

}  // namespace grouploss
