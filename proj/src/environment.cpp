#include "mcnb/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "mcnb/errors.hpp"

namespace mcnb {

namespace {

constexpr double kEps = 0.01;  // keeps expected rewards inside [eps, 1-eps]
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
constexpr int kMaxGapRetries = 32;

double clip01(double v) { return std::min(1.0, std::max(0.0, v)); }

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

std::vector<double> unit_gaussian_vector(Rng& rng, std::size_t d) {
  std::vector<double> v(d);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = rng.gaussian();
      norm += x * x;
    }
    norm = std::sqrt(norm);
  } while (norm < 1e-12);
  for (double& x : v) x /= norm;
  return v;
}

// arms carry at least 60% of their mass in coordinate 0, which defines the
// region split; a bare halfspace over isotropic contexts is nearly invisible
// to the network kernel at d ~ 10, making region-dependent rewards
// unlearnable at this scale
ArmContext sample_region_arm(Rng& rng, std::size_t d) {
  if (d == 1) return {rng.uniform() < 0.5 ? 1.0 : -1.0};
  const double s = (0.6 + 0.35 * rng.uniform()) *
                   (rng.uniform() < 0.5 ? 1.0 : -1.0);
  std::vector<double> tail = unit_gaussian_vector(rng, d - 1);
  ArmContext arm(d);
  arm[0] = s;
  const double scale = std::sqrt(1.0 - s * s);
  for (std::size_t i = 1; i < d; ++i) arm[i] = scale * tail[i - 1];
  return arm;
}

void check_unit_arm(const ArmContext& arm, const char* where) {
  double n2 = 0.0;
  for (double v : arm) n2 += v * v;
  if (std::fabs(std::sqrt(n2) - 1.0) > 1e-8) {
    throw Error("non_unit_context",
                std::string(where) + ": arm norm " +
                    std::to_string(std::sqrt(n2)) + ", expected 1");
  }
}

void normalize_rows(std::vector<std::vector<double>>& rows,
                    const std::string& path) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double norm = 0.0;
    for (double v : rows[i]) norm += v * v;
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
      throw DataFormatError(path + ": zero feature vector in data row " +
                            std::to_string(i + 1));
    }
    for (double& v : rows[i]) v /= norm;
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& cell, const std::string& path,
                    std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != cell.size() || cell.empty()) {
    throw DataFormatError(path + " line " + std::to_string(line_no) +
                          ": '" + cell + "' is not a number");
  }
  return v;
}

std::size_t parse_index(const std::string& cell, const std::string& path,
                        std::size_t line_no) {
  const double v = parse_double(cell, path, line_no);
  if (v < 0.0 || v != std::floor(v)) {
    throw DataFormatError(path + " line " + std::to_string(line_no) + ": '" +
                          cell + "' is not a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

// header plus rows of equal width; strips trailing \r for CRLF files
std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               const std::string& lead_col) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<std::string>> lines;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (line_no == 1) {
      if (cells.empty() || cells[0] != lead_col) {
        throw DataFormatError(path + ": header row starting with '" +
                              lead_col + "' is required");
      }
      width = cells.size();
    } else if (cells.size() != width) {
      throw DataFormatError(path + " line " + std::to_string(line_no) +
                            ": expected " + std::to_string(width) +
                            " columns, got " + std::to_string(cells.size()));
    }
    lines.push_back(std::move(cells));
  }
  if (lines.size() < 2) {
    throw DataFormatError(path + ": no data rows");
  }
  return lines;
}

}  // namespace

void SyntheticEnvSpec::validate() const {
  if (n_users == 0) throw ConfigError("n_users", "must be positive");
  if (dim == 0) throw ConfigError("dim", "must be positive");
  if (arms_per_round == 0) {
    throw ConfigError("arms_per_round", "must be positive");
  }
  if (n_groups == 0 || n_groups > n_users) {
    throw ConfigError("n_groups", "must be in [1, n_users]");
  }
  if (noise_std < 0.0) throw ConfigError("noise_std", "must be >= 0");
  if (!(gamma_gap > 0.0) || !(gamma_gap < 1.0)) {
    throw ConfigError("gamma_gap", "must lie in (0, 1)");
  }
}

SyntheticEnv::SyntheticEnv(const SyntheticEnvSpec& spec) : spec_(spec) {
  spec_.validate();
  const std::size_t q = spec_.n_groups;
  const double g = spec_.gamma_gap;
  // infeasible (gamma, q) pairs give amp <= 0; kept until round
  // certification so the resampling error path reports them
  amp_ = ((1.0 - 2.0 * kEps) - g * (static_cast<double>(q) - 1.0)) /
         static_cast<double>(q);
  levels_.resize(q);
  for (std::size_t i = 0; i < q; ++i) {
    levels_[i] = kEps + amp_ / 2.0 + static_cast<double>(i) * (g + amp_);
  }

  Rng rng(derive_seed(spec_.seed, {0xE17}));
  labels_[0].resize(spec_.n_users);
  for (std::size_t u = 0; u < spec_.n_users; ++u) labels_[0][u] = u % q;
  std::vector<std::size_t> perm(spec_.n_users);
  for (std::size_t u = 0; u < spec_.n_users; ++u) perm[u] = u;
  for (std::size_t u = spec_.n_users; u > 1; --u) {
    std::swap(perm[u - 1], perm[rng.uniform_index(u)]);
  }
  labels_[1].resize(spec_.n_users);
  for (std::size_t u = 0; u < spec_.n_users; ++u) {
    labels_[1][u] = perm[u] % q;
  }
  for (int region = 0; region < 2; ++region) {
    dir_[region].reserve(q);
    phase_[region].reserve(q);
    for (std::size_t i = 0; i < q; ++i) {
      dir_[region].push_back(unit_gaussian_vector(rng, spec_.dim));
      phase_[region].push_back(kTwoPi * rng.uniform());
    }
  }
}

std::size_t SyntheticEnv::group_of(std::size_t user,
                                   const ArmContext& arm) const {
  if (user >= spec_.n_users) {
    throw DimensionError("synthetic user id", spec_.n_users, user);
  }
  return labels_[arm[0] >= 0.0 ? 0 : 1][user];
}

double SyntheticEnv::expected_reward(std::size_t user,
                                     const ArmContext& arm) const {
  if (arm.size() != spec_.dim) {
    throw DimensionError("synthetic arm", spec_.dim, arm.size());
  }
  check_unit_arm(arm, "expected_reward");
  const int region = arm[0] >= 0.0 ? 0 : 1;
  const std::size_t g = group_of(user, arm);
  const double z = dot(dir_[region][g], arm);
  double base = 0.0;
  switch (spec_.reward_family) {
    case RewardFamily::linear:
      base = z / 2.0 + 0.5;
      break;
    case RewardFamily::quadratic:
      base = z * z;
      break;
    case RewardFamily::cosine:
      base = (std::cos(3.0 * z + phase_[region][g]) + 1.0) / 2.0;
      break;
  }
  return clip01(levels_[g] + amp_ * (base - 0.5));
}

double SyntheticEnv::sample_reward(std::size_t user, const ArmContext& arm,
                                   Rng& rng) const {
  const double mean = expected_reward(user, arm);
  if (spec_.noise_std == 0.0) return mean;
  return clip01(mean + spec_.noise_std * rng.gaussian());
}

std::vector<std::size_t> SyntheticEnv::true_cluster_members(
    std::size_t user, const ArmContext& arm) const {
  const int region = arm[0] >= 0.0 ? 0 : 1;
  const std::size_t g = labels_[region][user];
  std::vector<std::size_t> members;
  for (std::size_t v = 0; v < spec_.n_users; ++v) {
    if (labels_[region][v] == g) members.push_back(v);
  }
  return members;
}

bool SyntheticEnv::certify_gap(const std::vector<ArmContext>& arms) const {
  // groups determine rewards, so the pairwise scan runs over groups
  const std::size_t q = spec_.n_groups;
  std::vector<double> vals(q);
  for (const ArmContext& arm : arms) {
    const int region = arm[0] >= 0.0 ? 0 : 1;
    for (std::size_t g = 0; g < q; ++g) {
      const double z = dot(dir_[region][g], arm);
      double base = 0.0;
      switch (spec_.reward_family) {
        case RewardFamily::linear:
          base = z / 2.0 + 0.5;
          break;
        case RewardFamily::quadratic:
          base = z * z;
          break;
        case RewardFamily::cosine:
          base = (std::cos(3.0 * z + phase_[region][g]) + 1.0) / 2.0;
          break;
      }
      vals[g] = clip01(levels_[g] + amp_ * (base - 0.5));
    }
    for (std::size_t a = 0; a < q; ++a) {
      for (std::size_t b = a + 1; b < q; ++b) {
        if (std::fabs(vals[a] - vals[b]) < spec_.gamma_gap - 1e-12) {
          return false;
        }
      }
    }
  }
  return true;
}

Round SyntheticEnv::gen_round(std::size_t, Rng& rng) {
  Round round;
  round.user = rng.uniform_index(spec_.n_users);
  for (int attempt = 0; attempt < kMaxGapRetries; ++attempt) {
    std::vector<ArmContext> arms;
    arms.reserve(spec_.arms_per_round);
    for (std::size_t i = 0; i < spec_.arms_per_round; ++i) {
      arms.push_back(sample_region_arm(rng, spec_.dim));
    }
    if (!certify_gap(arms)) continue;
    round.arms = std::move(arms);
    round.expected_rewards.reserve(spec_.arms_per_round);
    round.true_clusters.reserve(spec_.arms_per_round);
    for (const ArmContext& arm : round.arms) {
      round.expected_rewards.push_back(expected_reward(round.user, arm));
      round.true_clusters.push_back(true_cluster_members(round.user, arm));
    }
    return round;
  }
  throw GapCertificationError(
      "could not certify a separation of " + std::to_string(spec_.gamma_gap) +
      " across " + std::to_string(spec_.n_groups) + " groups after " +
      std::to_string(kMaxGapRetries) +
      " resampling attempts; reduce gamma_gap or n_groups");
}

double SyntheticEnv::sample_reward(const Round& round, std::size_t arm,
                                   Rng& rng) {
  return sample_reward(round.user, round.arms.at(arm), rng);
}

std::pair<ArmContext, double> SyntheticEnv::cold_item(std::size_t user,
                                                      Rng& rng) {
  ArmContext arm = sample_region_arm(rng, spec_.dim);
  const double r = sample_reward(user, arm, rng);
  return {std::move(arm), r};
}

// --- CSV loaders ---

ClassificationData load_classification_csv(const std::string& path) {
  auto lines = read_csv(path, "label");
  const std::size_t width = lines[0].size();
  if (width < 2) {
    throw DataFormatError(path + ": need at least one feature column");
  }
  ClassificationData out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& cells = lines[i];
    out.labels.push_back(parse_index(cells[0], path, i + 1));
    std::vector<double> feat(width - 1);
    for (std::size_t j = 1; j < width; ++j) {
      feat[j - 1] = parse_double(cells[j], path, i + 1);
    }
    out.features.push_back(std::move(feat));
  }
  normalize_rows(out.features, path);
  for (std::size_t label : out.labels) {
    out.n_classes = std::max(out.n_classes, label + 1);
  }
  return out;
}

RatingData load_rating_csv(const std::string& path) {
  auto lines = read_csv(path, "user_id");
  const std::size_t width = lines[0].size();
  if (width < 3) {
    throw DataFormatError(path +
                          ": need user_id, features, and a rating column");
  }
  RatingData out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& cells = lines[i];
    out.user_ids.push_back(parse_index(cells[0], path, i + 1));
    std::vector<double> feat(width - 2);
    for (std::size_t j = 1; j + 1 < width; ++j) {
      feat[j - 1] = parse_double(cells[j], path, i + 1);
    }
    out.features.push_back(std::move(feat));
    out.ratings.push_back(parse_double(cells[width - 1], path, i + 1));
  }
  normalize_rows(out.features, path);
  return out;
}

std::vector<ArmContext> build_classification_arms(
    const std::vector<double>& feature, std::size_t k) {
  if (k < 1) {
    throw Error("invalid_argument", "need at least one class block");
  }
  const std::size_t d = feature.size();
  std::vector<ArmContext> arms(k, ArmContext(d * k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    std::copy(feature.begin(), feature.end(), arms[i].begin() + i * d);
  }
  return arms;
}

// --- ClassificationEnv ---

ClassificationEnv::ClassificationEnv(ClassificationData data)
    : data_(std::move(data)) {
  if (data_.features.empty()) {
    throw DataFormatError("classification environment has no rows");
  }
  rows_by_class_.resize(data_.n_classes);
  for (std::size_t i = 0; i < data_.labels.size(); ++i) {
    rows_by_class_[data_.labels[i]].push_back(i);
  }
}

std::size_t ClassificationEnv::context_dim() const {
  return data_.features[0].size() * data_.n_classes;
}

Round ClassificationEnv::gen_round(std::size_t, Rng& rng) {
  const std::size_t row = rng.uniform_index(data_.features.size());
  Round round;
  round.user = data_.labels[row];
  round.arms = build_classification_arms(data_.features[row], data_.n_classes);
  round.expected_rewards.resize(data_.n_classes, 0.0);
  round.expected_rewards[round.user] = 1.0;
  round.true_clusters.resize(data_.n_classes);
  for (std::size_t i = 0; i < data_.n_classes; ++i) {
    if (i == round.user) {
      round.true_clusters[i] = {round.user};
    } else {
      for (std::size_t v = 0; v < data_.n_classes; ++v) {
        if (v != i) round.true_clusters[i].push_back(v);
      }
    }
  }
  return round;
}

double ClassificationEnv::sample_reward(const Round& round, std::size_t arm,
                                        Rng&) {
  return round.expected_rewards.at(arm);
}

std::pair<ArmContext, double> ClassificationEnv::cold_item(std::size_t user,
                                                           Rng& rng) {
  if (user >= rows_by_class_.size() || rows_by_class_[user].empty()) {
    throw Error("invalid_argument",
                "no rows for class " + std::to_string(user));
  }
  const auto& rows = rows_by_class_[user];
  const std::size_t row = rows[rng.uniform_index(rows.size())];
  auto arms = build_classification_arms(data_.features[row], data_.n_classes);
  return {std::move(arms[user]), 1.0};
}

// --- RatingEnv ---

RatingEnv::RatingEnv(RatingData data, double threshold,
                     std::size_t arms_per_round)
    : data_(std::move(data)), threshold_(threshold), k_(arms_per_round) {
  if (k_ < 2) {
    throw Error("invalid_argument",
                "rating rounds need at least two arms, got " +
                    std::to_string(k_));
  }
  std::size_t max_id = 0;
  for (std::size_t id : data_.user_ids) max_id = std::max(max_id, id);
  std::vector<std::vector<std::size_t>> pos(max_id + 1), neg(max_id + 1);
  for (std::size_t i = 0; i < data_.user_ids.size(); ++i) {
    (data_.ratings[i] > threshold_ ? pos : neg)[data_.user_ids[i]].push_back(
        i);
  }
  for (std::size_t id = 0; id <= max_id; ++id) {
    if (!pos[id].empty() && !neg[id].empty()) {
      users_.push_back(id);
      positives_.push_back(pos[id]);
      negatives_.push_back(neg[id]);
    }
  }
  if (users_.empty()) {
    throw DataFormatError(
        "no user has both a positive and a zero-reward item at threshold " +
        std::to_string(threshold_));
  }
}

std::size_t RatingEnv::context_dim() const {
  return data_.features[0].size();
}

Round RatingEnv::gen_round(std::size_t, Rng& rng) {
  Round round;
  round.user = rng.uniform_index(users_.size());
  std::vector<std::size_t> rows;
  rows.push_back(
      positives_[round.user][rng.uniform_index(positives_[round.user].size())]);
  const auto& negs = negatives_[round.user];
  for (std::size_t i = 1; i < k_; ++i) {
    rows.push_back(negs[rng.uniform_index(negs.size())]);
  }
  // shuffle so the rewarded item is not always arm 0
  for (std::size_t i = rows.size(); i > 1; --i) {
    std::swap(rows[i - 1], rows[rng.uniform_index(i)]);
  }
  round.true_clusters.assign(k_, {});
  for (std::size_t row : rows) {
    round.arms.push_back(data_.features[row]);
    round.expected_rewards.push_back(data_.ratings[row] > threshold_ ? 1.0
                                                                     : 0.0);
  }
  return round;
}

double RatingEnv::sample_reward(const Round& round, std::size_t arm, Rng&) {
  return round.expected_rewards.at(arm);
}

std::pair<ArmContext, double> RatingEnv::cold_item(std::size_t user,
                                                   Rng& rng) {
  if (user >= users_.size()) {
    throw Error("invalid_argument", "no such user slot " +
                                        std::to_string(user));
  }
  // draw across the user's full item list, positives and negatives alike
  const std::size_t n_pos = positives_[user].size();
  const std::size_t n_neg = negatives_[user].size();
  const std::size_t pick = rng.uniform_index(n_pos + n_neg);
  const std::size_t row =
      pick < n_pos ? positives_[user][pick] : negatives_[user][pick - n_pos];
  return {data_.features[row], data_.ratings[row] > threshold_ ? 1.0 : 0.0};
}

// --- IidUniformEnv ---

Round IidUniformEnv::gen_round(std::size_t, Rng& rng) {
  Round round;
  round.user = 0;
  round.true_clusters.assign(k_, {});
  for (std::size_t i = 0; i < k_; ++i) {
    round.arms.push_back(unit_gaussian_vector(rng, dim_));
    round.expected_rewards.push_back(rng.uniform());
  }
  return round;
}

double IidUniformEnv::sample_reward(const Round& round, std::size_t arm,
                                    Rng&) {
  return round.expected_rewards.at(arm);
}

std::pair<ArmContext, double> IidUniformEnv::cold_item(std::size_t, Rng& rng) {
  ArmContext arm = unit_gaussian_vector(rng, dim_);
  return {std::move(arm), rng.uniform()};
}

}  // namespace mcnb
