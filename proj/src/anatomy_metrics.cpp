#include "vct/anatomy_metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "vct/log.hpp"
#include "vct/skeleton.hpp"
#include "vct/stats.hpp"

namespace vct {
namespace {

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw InvalidArgument("segmentations do not share a grid");
}

std::string class_name(const ClassTable& names, Label id) {
  const auto it = names.find(id);
  return it == names.end() ? std::to_string(id) : it->second;
}

ConsistencyRow& row_for(ConsistencyTable& t, Label id, const ClassTable& names) {
  auto it = std::lower_bound(t.rows.begin(), t.rows.end(), id,
                             [](const ConsistencyRow& r, Label v) { return r.id < v; });
  if (it == t.rows.end() || it->id != id) {
    ConsistencyRow r;
    r.id = id;
    r.name = class_name(names, id);
    it = t.rows.insert(it, r);
  }
  return *it;
}

std::optional<double> mean_of(const std::vector<ConsistencyRow>& rows, std::optional<double> ConsistencyRow::*field) {
  double s = 0.0;
  int n = 0;
  for (const auto& r : rows) {
    if (r.*field) {
      s += *(r.*field);
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return s / n;
}

}  // namespace

double dice(const Mask& a, const Mask& b) {
  require_same_grid(a.grid(), b.grid());
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] != 0, y = b[i] != 0;
    na += x;
    nb += y;
    both += x && y;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

std::map<Label, double> per_class_dice(const LabelMap& a, const LabelMap& b) {
  require_same_grid(a.grid(), b.grid());
  std::vector<std::size_t> na(65536, 0), nb(65536, 0), both(65536, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Label x = a[i], y = b[i];
    ++na[x];
    ++nb[y];
    if (x == y) ++both[x];
  }
  std::map<Label, double> out;
  for (std::size_t id = 1; id < na.size(); ++id) {
    if (na[id] + nb[id] == 0) continue;
    out[static_cast<Label>(id)] = 2.0 * static_cast<double>(both[id]) / static_cast<double>(na[id] + nb[id]);
  }
  return out;
}

std::map<Label, Eigen::Vector3d> relative_centroids(const LabelMap& structures, const LabelMap& body) {
  require_same_grid(structures.grid(), body.grid());
  const Grid& g = body.grid();
  Eigen::Vector3i lo = g.dims, hi = Eigen::Vector3i::Constant(-1);
  std::size_t i = 0;
  for (int z = 0; z < g.dims[2]; ++z) {
    for (int y = 0; y < g.dims[1]; ++y) {
      for (int x = 0; x < g.dims[0]; ++x, ++i) {
        if (body[i] == 0) continue;
        const Eigen::Vector3i c(x, y, z);
        lo = lo.cwiseMin(c);
        hi = hi.cwiseMax(c);
      }
    }
  }
  if (hi[0] < 0) throw DegenerateInput("empty body mask");
  const Eigen::Vector3d wlo = g.world(lo), whi = g.world(hi);
  std::map<Label, Eigen::Vector3d> out;
  for (const auto& [id, m] : label_moments(structures)) {
    const Eigen::Vector3d c = m.centroid(g);
    Eigen::Vector3d r;
    for (int a = 0; a < 3; ++a) r[a] = whi[a] > wlo[a] ? (c[a] - wlo[a]) / (whi[a] - wlo[a]) : 0.5;
    out[id] = r;
  }
  return out;
}

SubjectAnatomy measure_anatomy(const LabelMap& structures, const LabelMap& body) {
  SubjectAnatomy s;
  s.centroid = relative_centroids(structures, body);
  const double vv = voxel_volume_mm3(structures.grid());
  for (const auto& [id, m] : label_moments(structures)) s.volume_ml[id] = static_cast<double>(m.count()) * vv / 1000.0;
  return s;
}

double qq_correlation(std::span<const double> a, std::span<const double> b) {
  const std::size_t m = std::min(a.size(), b.size());
  if (m < 3) throw InvalidArgument("Q-Q correlation needs at least 3 samples per side");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<double> qa(m), qb(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double p = static_cast<double>(k) / static_cast<double>(m - 1);
    qa[k] = quantile_sorted(sa, p);
    qb[k] = quantile_sorted(sb, p);
  }
  return pearson(qa, qb);
}

void ConsistencyTable::update_average() {
  average = ConsistencyRow{};
  average.name = "Average";
  average.dice_mean = mean_of(rows, &ConsistencyRow::dice_mean);
  std::vector<double> means;
  for (const auto& r : rows) {
    if (r.dice_mean) means.push_back(*r.dice_mean);
  }
  if (means.size() >= 2) average.dice_std = std::sqrt(sample_variance(means));
  average.volume_corr = mean_of(rows, &ConsistencyRow::volume_corr);
  average.centroid_r = mean_of(rows, &ConsistencyRow::centroid_r);
  average.centroid_a = mean_of(rows, &ConsistencyRow::centroid_a);
  average.centroid_s = mean_of(rows, &ConsistencyRow::centroid_s);
}

ConsistencyTable cohort_consistency(std::span<const SubjectAnatomy> a, std::span<const SubjectAnatomy> b,
                                    const ClassTable& names) {
  if (a.empty() || b.empty()) throw InvalidArgument("both cohorts must be non-empty");
  std::map<Label, std::pair<std::vector<double>, std::vector<double>>> vol;
  std::map<Label, std::array<std::pair<std::vector<double>, std::vector<double>>, 3>> cen;
  for (const auto& s : a) {
    for (const auto& [id, v] : s.volume_ml) vol[id].first.push_back(v);
    for (const auto& [id, c] : s.centroid) {
      for (int k = 0; k < 3; ++k) cen[id][static_cast<std::size_t>(k)].first.push_back(c[k]);
    }
  }
  for (const auto& s : b) {
    for (const auto& [id, v] : s.volume_ml) vol[id].second.push_back(v);
    for (const auto& [id, c] : s.centroid) {
      for (int k = 0; k < 3; ++k) cen[id][static_cast<std::size_t>(k)].second.push_back(c[k]);
    }
  }
  auto corr = [](const std::vector<double>& x, const std::vector<double>& y, const std::string& what) {
    try {
      return std::optional<double>(qq_correlation(x, y));
    } catch (const DegenerateInput&) {
      warn(what + ": constant values, correlation undefined");
      return std::optional<double>();
    }
  };

  ConsistencyTable t;
  for (const auto& [id, lists] : vol) {
    const std::string name = class_name(names, id);
    if (lists.first.size() < 3 || lists.second.size() < 3) {
      warn("class " + name + " has fewer than 3 samples in a cohort; omitted");
      continue;
    }
    ConsistencyRow& r = row_for(t, id, names);
    r.volume_corr = corr(lists.first, lists.second, name + " volume");
    const auto& c = cen[id];
    r.centroid_r = corr(c[0].first, c[0].second, name + " centroid R");
    r.centroid_a = corr(c[1].first, c[1].second, name + " centroid A");
    r.centroid_s = corr(c[2].first, c[2].second, name + " centroid S");
  }
  t.update_average();
  return t;
}

void add_paired_dice(ConsistencyTable& table, std::span<const std::map<Label, double>> per_pair,
                     const ClassTable& names) {
  std::map<Label, std::vector<double>> by_class;
  for (const auto& m : per_pair) {
    for (const auto& [id, d] : m) by_class[id].push_back(d);
  }
  for (const auto& [id, values] : by_class) {
    ConsistencyRow& r = row_for(table, id, names);
    r.dice_mean = mean(values);
    r.dice_std = values.size() >= 2 ? std::sqrt(sample_variance(values)) : 0.0;
  }
  table.update_average();
}

}  // namespace vct
