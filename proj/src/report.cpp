#include "grouploss/report.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "grouploss/csv_io.hpp"

namespace grouploss {

GroupingReport build_report(const ReportInputs& in) {
  if (!in.test_bins || !in.stats || !in.explained || !in.induced)
    throw std::invalid_argument("build_report: missing inputs");
  const BinnedView& bview = *in.test_bins;
  const ExplainedEstimate& ex = *in.explained;

  GroupingReport r;
  r.rule = in.rule;
  r.n_bins = bview.n_bins();
  r.region_ratio = in.region_ratio;
  r.n_rows = in.n_rows;
  r.n_train = in.n_train;
  r.n_test = in.stats->n;
  r.cl_binned = in.cl.value;
  r.cl_infinite = in.cl.infinite;
  r.gl_plugin = ex.plugin;
  r.gl_bias = ex.bias;
  r.gl_explained = ex.explained;
  r.gl_induced = in.induced->total;
  r.gl_lb = gl_lower_bound(r.gl_explained, r.gl_induced);
  r.gl_lb_clipped = std::max(r.gl_lb, 0.0);
  r.debiased = ex.debiased;
  r.unestimable_bins = ex.unestimable_bins;
  r.low_confidence_bins = ex.low_confidence_bins;
  r.all_unestimable = ex.all_unestimable;

  if (in.rule.kind == RuleKind::Brier && in.rule.convention == BinaryConvention::Scalar) {
    MseBounds b;
    b.binning = binning_bounds(bview, in.rule);
    b.mse_lower_bound = mse_lower_bound(r.cl_binned, r.gl_explained, b.binning.upper);
    b.mse_lower_bound_equal_width = mse_lower_bound(r.cl_binned, r.gl_explained, b.binning.equal_width_upper);
    r.bounds = b;
  }

  const auto& edges = bview.edges();
  for (std::size_t s = 0; s < bview.n_bins(); ++s) {
    const BinStats& st = bview.stats(s);
    const CellStats& cell = in.stats->bins[s];
    DiagramBin d;
    d.bin_index = s;
    d.s_lo = edges[s];
    d.s_hi = edges[s + 1];
    d.s_b = st.mean_score;
    d.c_hat = st.count ? cell.c_hat : std::numeric_limits<double>::quiet_NaN();
    d.n_bin = st.count;
    if (s < ex.per_bin.size()) {
      d.estimable = ex.per_bin[s].estimable;
      d.low_confidence = ex.per_bin[s].low_confidence;
    }
    for (const RegionCell& rc : cell.regions) {
      DiagramRegion g;
      g.region_index = rc.region;
      g.mu_hat = rc.mean;
      g.n_region = rc.count;
      std::tie(g.cp_lo, g.cp_hi) = clopper_pearson(rc.positives, rc.count);
      g.grayed = g.cp_lo <= cell.c_hat && cell.c_hat <= g.cp_hi;
      d.regions.push_back(g);
    }
    r.bins.push_back(std::move(d));
  }
  return r;
}

void write_diagram_csv(std::ostream& out, const GroupingReport& report) {
  out << "bin_index,s_lo,s_hi,S_B,c_hat,n_bin,region_index,mu_hat,n_region,cp_lo,cp_hi,grayed\n";
  auto num = [](double v) { return std::isfinite(v) ? format_double(v) : std::string(); };
  for (const DiagramBin& b : report.bins) {
    const std::string prefix = std::to_string(b.bin_index) + ',' + num(b.s_lo) + ',' + num(b.s_hi) + ',' +
                               num(b.s_b) + ',' + num(b.c_hat) + ',' + std::to_string(b.n_bin) + ',';
    if (b.regions.empty()) {
      out << prefix << ",,,,,\n";
      continue;
    }
    for (const DiagramRegion& g : b.regions) {
      out << prefix << g.region_index << ',' << num(g.mu_hat) << ',' << g.n_region << ',' << num(g.cp_lo) << ','
          << num(g.cp_hi) << ',' << (g.grayed ? 1 : 0) << '\n';
    }
  }
}

}  // namespace grouploss
