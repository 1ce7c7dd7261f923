#include "dtfdd/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace dtfdd {

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, p);
}

double ratio(double a, double b) {
  return b > 0.0 ? a / b : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

MetricsLayout metrics_layout(const DtfddEnv& env) {
  MetricsLayout l;
  for (const auto& ue : env.config().topology.ues) l.ue_kinds.push_back(ue.kind);
  l.cells = env.cells();
  l.n_subframes = env.config().n_subframes;
  return l;
}

EpochMetrics compute_metrics(std::size_t epoch, const std::vector<FrameRecord>& frames,
                             const MetricsLayout& layout) {
  if (frames.empty()) throw std::invalid_argument("compute_metrics needs at least one frame");
  const std::size_t n_bs = layout.cells.size();
  EpochMetrics m;
  m.epoch = epoch;
  m.dl_fraction.assign(n_bs, 0.0);

  std::size_t ue_frames = 0, qos_ok = 0;
  double drop_sum[2] = {0.0, 0.0};
  std::size_t drop_count[2] = {0, 0};
  double slots[2] = {0.0, 0.0};

  for (const FrameRecord& fr : frames) {
    if (fr.joint.size() != n_bs || fr.outcome.rewards.size() != n_bs ||
        fr.outcome.ues.size() != layout.ue_kinds.size()) {
      throw std::invalid_argument("frame record does not match the layout");
    }
    for (double r : fr.outcome.rewards) m.sum_reward += r;
    for (std::size_t u = 0; u < fr.outcome.ues.size(); ++u) {
      const UeOutcome& o = fr.outcome.ues[u];
      const int k = layout.ue_kinds[u] == NodeKind::Uav ? 1 : 0;
      ++ue_frames;
      if (o.qos_ok) ++qos_ok;
      drop_sum[k] += o.drop_ratio;
      ++drop_count[k];
    }
    for (std::size_t b = 0; b < n_bs; ++b) {
      const FrameAction& a = fr.joint[b];
      m.dl_fraction[b] += static_cast<double>(a.f) / static_cast<double>(layout.n_subframes);
      for (const auto* dir : {&a.dl, &a.ul}) {
        for (int slot : *dir) {
          if (slot == kNoUe) continue;
          const std::size_t u = layout.cells[b].at(static_cast<std::size_t>(slot));
          slots[layout.ue_kinds[u] == NodeKind::Uav ? 1 : 0] += 1.0;
        }
      }
    }
  }

  const double n_frames = static_cast<double>(frames.size());
  for (double& f : m.dl_fraction) f /= n_frames;
  m.qos_probability = ue_frames ? static_cast<double>(qos_ok) / static_cast<double>(ue_frames) : 1.0;
  m.drop_ratio_gue = ratio(drop_sum[0], static_cast<double>(drop_count[0]));
  m.drop_ratio_uav = ratio(drop_sum[1], static_cast<double>(drop_count[1]));
  m.subchannel_share_gue = ratio(slots[0], slots[0] + slots[1]);
  m.subchannel_share_uav = ratio(slots[1], slots[0] + slots[1]);
  return m;
}

std::string csv_header(std::size_t num_bs) {
  std::string h =
      "epoch,sum_reward,qos_probability,drop_ratio_gue,drop_ratio_uav,"
      "subchannel_share_gue,subchannel_share_uav";
  for (std::size_t b = 0; b < num_bs; ++b) h += ",dl_fraction_bs" + std::to_string(b);
  return h;
}

std::string csv_row(const EpochMetrics& m) {
  std::string r = std::to_string(m.epoch);
  for (double x : {m.sum_reward, m.qos_probability, m.drop_ratio_gue, m.drop_ratio_uav,
                   m.subchannel_share_gue, m.subchannel_share_uav}) {
    r += "," + num(x);
  }
  for (double x : m.dl_fraction) r += "," + num(x);
  return r;
}

CsvWriter::CsvWriter(std::ostream& out, std::size_t num_bs) : out_(out) {
  out_ << csv_header(num_bs) << '\n';
  if (!out_) throw std::runtime_error("failed to write CSV header");
}

void CsvWriter::write(const EpochMetrics& m) {
  out_ << csv_row(m) << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("failed to write CSV row");
}

void emit_csv(const std::vector<EpochMetrics>& metrics, std::size_t num_bs,
              const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  CsvWriter w(out, num_bs);
  for (const auto& m : metrics) w.write(m);
  out.close();
  if (!out) throw std::runtime_error("error closing '" + path + "'");
}

}  // namespace dtfdd
