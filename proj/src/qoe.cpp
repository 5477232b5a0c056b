#include "qnoma/qoe.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "qnoma/errors.hpp"

namespace qnoma::qoe {

double entropy_bits(const std::vector<int>& codes) {
  std::map<int, std::size_t> counts;
  for (int c : codes) ++counts[c];
  const double n = static_cast<double>(codes.size());
  double h = 0.0;
  for (const auto& [code, count] : counts) {
    double p = static_cast<double>(count) / n;
    h -= p * std::log2(p);
  }
  return h;
}

double information_gain(const std::vector<int>& factor_codes,
                        const std::vector<int>& label_codes) {
  if (factor_codes.size() != label_codes.size() || label_codes.size() < 2) {
    throw ConfigError("information gain needs >= 2 rows of equal length");
  }
  const double n = static_cast<double>(label_codes.size());
  double h_label = entropy_bits(label_codes);
  if (h_label == 0.0) return 0.0;

  std::map<int, std::vector<int>> by_factor;
  for (std::size_t i = 0; i < factor_codes.size(); ++i) {
    by_factor[factor_codes[i]].push_back(label_codes[i]);
  }
  double h_cond = 0.0;
  for (const auto& [code, labels] : by_factor) {
    h_cond += (static_cast<double>(labels.size()) / n) * entropy_bits(labels);
  }
  return std::max(0.0, h_label - h_cond);
}

std::vector<int> discretize_equal_frequency(const std::vector<double>& values, int bins) {
  if (bins < 1) throw ConfigError("bins must be >= 1");
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<int> codes(n, 0);
  // Equal-count bins, but identical values never straddle a boundary.
  for (std::size_t r = 0; r < n; ++r) {
    int bin = static_cast<int>((r * static_cast<std::size_t>(bins)) / std::max<std::size_t>(n, 1));
    codes[order[r]] = bin;
  }
  for (std::size_t r = 1; r < n; ++r) {
    if (values[order[r]] == values[order[r - 1]]) {
      codes[order[r]] = codes[order[r - 1]];
    }
  }
  return codes;
}

std::vector<int> median_split(const std::vector<double>& values) {
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  double median = sorted[sorted.size() / 2];
  std::vector<int> codes(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    codes[i] = values[i] >= median ? 1 : 0;
  }
  return codes;
}

namespace {

std::vector<int> to_codes(const FactorColumn& col, int bins) {
  if (col.categorical) {
    std::vector<int> codes(col.values.size());
    for (std::size_t i = 0; i < col.values.size(); ++i) {
      codes[i] = static_cast<int>(std::llround(col.values[i]));
    }
    return codes;
  }
  return discretize_equal_frequency(col.values, bins);
}

}  // namespace

std::vector<RankedFactor> rank_top_k(const SessionTable& table, std::size_t k, int bins) {
  if (k > table.factors.size()) {
    throw ConfigError("rank_top_k: k exceeds the number of factors");
  }
  std::vector<int> label_codes;
  if (table.label_categorical) {
    label_codes.resize(table.label.size());
    for (std::size_t i = 0; i < table.label.size(); ++i) {
      label_codes[i] = static_cast<int>(std::llround(table.label[i]));
    }
  } else {
    label_codes = median_split(table.label);
  }

  std::vector<RankedFactor> ranked;
  ranked.reserve(table.factors.size());
  for (std::size_t c = 0; c < table.factors.size(); ++c) {
    ranked.push_back({table.factors[c].name, c,
                      information_gain(to_codes(table.factors[c], bins), label_codes)});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedFactor& a, const RankedFactor& b) {
    if (a.ig_bits != b.ig_bits) return a.ig_bits > b.ig_bits;
    return a.column < b.column;
  });
  ranked.resize(k);
  return ranked;
}

void CmfHyperParams::validate() const {
  if (rank < 1) throw ConfigError("cmf rank must be >= 1");
  if (beta_y < 0 || beta_u < 0 || beta_s < 0) throw ConfigError("cmf betas must be >= 0");
  if (!(lambda > 0.0)) throw ConfigError("cmf lambda must be positive");
  if (max_iterations < 1) throw ConfigError("cmf max_iterations must be >= 1");
}

namespace {

double cmf_objective(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& M,
                     const Eigen::MatrixXd& Xu, const Eigen::MatrixXd& Xs,
                     const CmfModel& m) {
  const CmfHyperParams& p = m.params;
  double obj = 0.0;
  Eigen::MatrixXd resid =
      (Y - m.user_factors * m.service_factors.transpose()).cwiseProduct(M);
  obj += p.beta_y * resid.squaredNorm();
  if (Xu.cols() > 0) {
    obj += p.beta_u * (Xu - m.user_factors * m.user_loadings.transpose()).squaredNorm();
  }
  if (Xs.cols() > 0) {
    obj += p.beta_s * (Xs - m.service_factors * m.service_loadings.transpose()).squaredNorm();
  }
  obj += p.lambda * (m.user_factors.squaredNorm() + m.service_factors.squaredNorm() +
                     m.user_loadings.squaredNorm() + m.service_loadings.squaredNorm());
  return obj;
}

// Ridge update of factor rows against observed cells plus an attribute block.
void update_factor_rows(Eigen::MatrixXd& F, const Eigen::MatrixXd& other,
                        const Eigen::MatrixXd& Y, const Eigen::MatrixXd& M,
                        bool rows_are_users, const Eigen::MatrixXd& attrs,
                        const Eigen::MatrixXd& loadings, double beta_main,
                        double beta_side, double lambda) {
  const int k = static_cast<int>(F.cols());
  Eigen::MatrixXd side_gram = Eigen::MatrixXd::Zero(k, k);
  if (attrs.cols() > 0 && beta_side > 0.0) {
    side_gram = beta_side * (loadings.transpose() * loadings);
  }
  for (int r = 0; r < F.rows(); ++r) {
    Eigen::MatrixXd gram =
        side_gram + lambda * Eigen::MatrixXd::Identity(k, k);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
    const int other_n = static_cast<int>(other.rows());
    for (int j = 0; j < other_n; ++j) {
      double mask = rows_are_users ? M(r, j) : M(j, r);
      if (mask == 0.0) continue;
      double y = rows_are_users ? Y(r, j) : Y(j, r);
      gram.noalias() += beta_main * other.row(j).transpose() * other.row(j);
      rhs.noalias() += beta_main * y * other.row(j).transpose();
    }
    if (attrs.cols() > 0 && beta_side > 0.0) {
      rhs.noalias() += beta_side * loadings.transpose() * attrs.row(r).transpose();
    }
    F.row(r) = gram.ldlt().solve(rhs).transpose();
  }
}

// loadings = beta * attrs' F (beta F'F + lambda I)^-1
void update_loadings(Eigen::MatrixXd& loadings, const Eigen::MatrixXd& attrs,
                     const Eigen::MatrixXd& F, double beta, double lambda) {
  if (attrs.cols() == 0) return;
  const int k = static_cast<int>(F.cols());
  Eigen::MatrixXd gram =
      beta * (F.transpose() * F) + lambda * Eigen::MatrixXd::Identity(k, k);
  loadings = (gram.ldlt().solve((beta * (F.transpose() * attrs))).transpose());
}

}  // namespace

CmfModel cmf_fit(const Eigen::MatrixXd& qoe_matrix, const Eigen::MatrixXd& mask,
                 const Eigen::MatrixXd& user_attrs, const Eigen::MatrixXd& service_attrs,
                 const CmfHyperParams& params) {
  params.validate();
  const int n_users = static_cast<int>(qoe_matrix.rows());
  const int n_services = static_cast<int>(qoe_matrix.cols());
  if (mask.rows() != n_users || mask.cols() != n_services) {
    throw ConfigError("cmf_fit: mask shape mismatch");
  }
  if (user_attrs.rows() != 0 && user_attrs.rows() != n_users) {
    throw ConfigError("cmf_fit: user attribute shape mismatch");
  }
  if (service_attrs.rows() != 0 && service_attrs.rows() != n_services) {
    throw ConfigError("cmf_fit: service attribute shape mismatch");
  }
  if (!qoe_matrix.allFinite() || !mask.allFinite() || !user_attrs.allFinite() ||
      !service_attrs.allFinite()) {
    throw ConfigError("cmf_fit: inputs must be finite");
  }
  if ((mask.array() != 0.0).count() == 0) {
    throw ConfigError("cmf_fit: no observed entries in the mask");
  }
  if (params.rank >= std::min(n_users, n_services)) {
    throw ConfigError("cmf_fit: rank must be below min(users, services)");
  }

  CmfModel m;
  m.params = params;
  const int k = params.rank;
  Rng rng(params.seed);
  auto init = [&](int rows, int cols) {
    Eigen::MatrixXd out(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) out(r, c) = rng.uniform(-0.01, 0.01);
    }
    return out;
  };
  m.user_factors = init(n_users, k);
  m.service_factors = init(n_services, k);
  m.user_loadings = init(static_cast<int>(user_attrs.cols()), k);
  m.service_loadings = init(static_cast<int>(service_attrs.cols()), k);

  m.objective_trace.push_back(cmf_objective(qoe_matrix, mask, user_attrs, service_attrs, m));
  for (int it = 0; it < params.max_iterations; ++it) {
    update_factor_rows(m.user_factors, m.service_factors, qoe_matrix, mask,
                       /*rows_are_users=*/true, user_attrs, m.user_loadings,
                       params.beta_y, params.beta_u, params.lambda);
    update_loadings(m.user_loadings, user_attrs, m.user_factors, params.beta_u,
                    params.lambda);
    update_factor_rows(m.service_factors, m.user_factors, qoe_matrix, mask,
                       /*rows_are_users=*/false, service_attrs, m.service_loadings,
                       params.beta_y, params.beta_s, params.lambda);
    update_loadings(m.service_loadings, service_attrs, m.service_factors,
                    params.beta_s, params.lambda);

    double obj = cmf_objective(qoe_matrix, mask, user_attrs, service_attrs, m);
    double prev = m.objective_trace.back();
    m.objective_trace.push_back(obj);
    if (prev - obj < params.tolerance * std::max(std::abs(prev), 1e-12)) break;
  }
  return m;
}

double cmf_predict(const CmfModel& model, int user, int service) {
  if (user < 0 || user >= model.user_factors.rows() || service < 0 ||
      service >= model.service_factors.rows()) {
    throw ConfigError("cmf_predict: unknown user or service id");
  }
  double raw = model.user_factors.row(user).dot(model.service_factors.row(service));
  return std::clamp(raw, 0.0, 1.0);
}

QoeProfile derive_profile(const CmfModel& model, int user,
                          const Eigen::MatrixXd& service_attrs,
                          int deficit_col, int stall_col) {
  const int n_services = static_cast<int>(model.service_factors.rows());
  if (user < 0 || user >= model.user_factors.rows()) {
    throw ConfigError("derive_profile: unknown user id");
  }
  if (service_attrs.rows() != n_services ||
      deficit_col >= service_attrs.cols() || stall_col >= service_attrs.cols()) {
    throw ConfigError("derive_profile: service attributes missing designated columns");
  }

  QoeProfile p;
  p.user_id = user;

  Eigen::VectorXd predicted(n_services);
  for (int s = 0; s < n_services; ++s) predicted(s) = cmf_predict(model, user, s);

  // OLS with intercept against (deficit, stall rate).
  Eigen::MatrixXd design(n_services, 3);
  design.col(0).setOnes();
  design.col(1) = service_attrs.col(deficit_col);
  design.col(2) = service_attrs.col(stall_col);
  Eigen::MatrixXd gram = design.transpose() * design;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  lu.setThreshold(1e-10);
  if (lu.rank() < 3) {
    p.fallback = true;
    return p;  // (0.5, 0.5)
  }
  Eigen::VectorXd coef = lu.solve(design.transpose() * predicted);

  double wq = std::max(0.0, -coef(1));
  double ws = std::max(0.0, -coef(2));
  if (wq + ws < 1e-9) {
    p.fallback = true;
    return p;
  }
  p.w_quality = wq / (wq + ws);
  p.w_stall = ws / (wq + ws);
  return p;
}

double qoe_loss(const QoeProfile& profile, const SlotOutcome& outcome,
                const video::QualityLadder& ladder) {
  switch (outcome.kind) {
    case OutcomeKind::kPlayed:
      return profile.w_quality * ladder.psnr_deficit(outcome.level_id);
    case OutcomeKind::kStalled:
      return 1.0;  // w_quality + w_stall
    case OutcomeKind::kNotJoined:
      return 0.0;
  }
  return 0.0;
}

SynthDataset synth_dataset(Rng& rng, int n_users, int n_services,
                           double noise_sigma, double observe_rate) {
  if (n_users < 2 || n_services < 2) {
    throw ConfigError("synth_dataset: need at least 2 users and 2 services");
  }
  SynthDataset d;
  d.qoe_matrix.resize(n_users, n_services);
  d.mask.resize(n_users, n_services);
  d.user_attrs.resize(n_users, 1);
  d.service_attrs.resize(n_services, 2);
  d.truth.reserve(static_cast<std::size_t>(n_users));
  d.hw_class.reserve(static_cast<std::size_t>(n_users));

  for (int u = 0; u < n_users; ++u) {
    QoeProfile t;
    t.user_id = u;
    t.w_quality = rng.uniform();
    t.w_stall = 1.0 - t.w_quality;
    d.truth.push_back(t);
    int hw = static_cast<int>(rng.below(4));
    d.hw_class.push_back(hw);
    d.user_attrs(u, 0) = hw / 3.0;
  }
  for (int s = 0; s < n_services; ++s) {
    d.service_attrs(s, 0) = rng.uniform();  // psnr deficit
    d.service_attrs(s, 1) = rng.uniform();  // stall rate
  }

  FactorColumn net{"net_cond", false, {}};
  FactorColumn hw{"hw_class", true, {}};
  FactorColumn ctx{"context", true, {}};
  FactorColumn deficit{"psnr_deficit", false, {}};
  FactorColumn stall{"stall_rate", false, {}};
  FactorColumn qoe_col{"qoe", false, {}};
  FactorColumn user_col{"user_id", true, {}};
  FactorColumn service_col{"service_id", true, {}};

  for (int u = 0; u < n_users; ++u) {
    for (int s = 0; s < n_services; ++s) {
      double y = 1.0 - d.truth[static_cast<std::size_t>(u)].w_quality * d.service_attrs(s, 0) -
                 d.truth[static_cast<std::size_t>(u)].w_stall * d.service_attrs(s, 1);
      if (noise_sigma > 0.0) y += noise_sigma * rng.normal();
      y = std::clamp(y, 0.0, 1.0);
      d.qoe_matrix(u, s) = y;
      bool observed = rng.uniform() < observe_rate;
      d.mask(u, s) = observed ? 1.0 : 0.0;
      if (observed) {
        user_col.values.push_back(u);
        service_col.values.push_back(s);
        net.values.push_back(rng.uniform());
        hw.values.push_back(d.hw_class[static_cast<std::size_t>(u)]);
        ctx.values.push_back(static_cast<double>(rng.below(5)));
        deficit.values.push_back(d.service_attrs(s, 0));
        stall.values.push_back(d.service_attrs(s, 1));
        qoe_col.values.push_back(y);
        d.sessions.label.push_back(y >= 0.5 ? 1.0 : 0.0);
      }
    }
  }
  d.sessions.factors = {user_col, service_col, net, hw, ctx, deficit, stall, qoe_col};
  d.sessions.label_categorical = true;
  return d;
}

}  // namespace qnoma::qoe
