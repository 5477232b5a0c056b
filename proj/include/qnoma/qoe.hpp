#ifndef QNOMA_QOE_HPP
#define QNOMA_QOE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "qnoma/rng.hpp"
#include "qnoma/video.hpp"

namespace qnoma::qoe {

// Per-user sensitivity weights on the unit simplex.
struct QoeProfile {
  int user_id = 0;
  double w_quality = 0.5;
  double w_stall = 0.5;
  bool fallback = false;  // set when derivation fell back to (0.5, 0.5)
};

// ---- information-gain factor ranking ----

double entropy_bits(const std::vector<int>& codes);

// IG = H(label) - H(label | factor), empirical plug-in estimates in bits.
// A constant label has zero entropy and zero gain.
double information_gain(const std::vector<int>& factor_codes,
                        const std::vector<int>& label_codes);

// Equal-frequency binning for numeric factors; identical values share a bin.
std::vector<int> discretize_equal_frequency(const std::vector<double>& values,
                                            int bins = 10);

std::vector<int> median_split(const std::vector<double>& values);

struct FactorColumn {
  std::string name;
  bool categorical = false;
  std::vector<double> values;  // category codes when categorical
};

struct SessionTable {
  std::vector<FactorColumn> factors;
  std::vector<double> label;  // engagement
  bool label_categorical = true;
  std::size_t rows() const { return label.size(); }
};

struct RankedFactor {
  std::string name;
  std::size_t column = 0;
  double ig_bits = 0.0;
};

// Factors sorted by information gain descending, ties by column order; the
// first k returned.
std::vector<RankedFactor> rank_top_k(const SessionTable& table, std::size_t k,
                                     int bins = 10);

// ---- collective matrix factorization ----

struct CmfHyperParams {
  int rank = 3;
  double beta_y = 1.0;
  double beta_u = 0.1;
  double beta_s = 0.1;
  double lambda = 1e-3;
  int max_iterations = 500;
  double tolerance = 1e-6;  // relative objective decrease
  std::uint64_t seed = 1;
  void validate() const;
};

struct CmfModel {
  Eigen::MatrixXd user_factors;     // users x k
  Eigen::MatrixXd service_factors;  // services x k
  Eigen::MatrixXd user_loadings;    // user attrs x k
  Eigen::MatrixXd service_loadings; // service attrs x k
  CmfHyperParams params;
  std::vector<double> objective_trace;  // non-increasing by construction
};

// Jointly factorizes the observed QoE matrix with user- and service-attribute
// side matrices sharing the latent factors:
//
//   beta_y |M.(Y - U V')|^2 + beta_u |Xu - U A'|^2 + beta_s |Xs - V B'|^2
//     + lambda (|U|^2 + |V|^2 + |A|^2 + |B|^2)
//
// minimized by alternating closed-form ridge updates. mask entries are 1 for
// observed cells. Inputs must be finite and at least one cell observed.
CmfModel cmf_fit(const Eigen::MatrixXd& qoe_matrix, const Eigen::MatrixXd& mask,
                 const Eigen::MatrixXd& user_attrs, const Eigen::MatrixXd& service_attrs,
                 const CmfHyperParams& params);

// U_u . V_s clipped to [0, 1]. Unknown ids are an error.
double cmf_predict(const CmfModel& model, int user, int service);

// OLS of the completed QoE row against the designated service features
// (PSNR deficit, stall rate); negated coefficients clamped at zero and
// normalized onto the simplex. Degenerate fits fall back to (0.5, 0.5).
QoeProfile derive_profile(const CmfModel& model, int user,
                          const Eigen::MatrixXd& service_attrs,
                          int deficit_col = 0, int stall_col = 1);

// ---- per-slot loss ----

enum class OutcomeKind { kPlayed, kStalled, kNotJoined };

struct SlotOutcome {
  OutcomeKind kind = OutcomeKind::kNotJoined;
  int level_id = 0;  // valid when kind == kPlayed

  static SlotOutcome played(int level) { return {OutcomeKind::kPlayed, level}; }
  static SlotOutcome stalled() { return {OutcomeKind::kStalled, 0}; }
  static SlotOutcome not_joined() { return {OutcomeKind::kNotJoined, 0}; }
};

// Bounded per-slot loss in [0, 1]: weighted normalized PSNR deficit for a
// played level, the full loss 1 on a stall, 0 before join.
double qoe_loss(const QoeProfile& profile, const SlotOutcome& outcome,
                const video::QualityLadder& ladder);

// ---- synthetic session data ----

struct SynthDataset {
  SessionTable sessions;          // observed sessions only
  Eigen::MatrixXd qoe_matrix;     // users x services, full
  Eigen::MatrixXd mask;           // 1 = observed
  Eigen::MatrixXd user_attrs;     // users x 1 (hardware class, scaled)
  Eigen::MatrixXd service_attrs;  // services x 2 (psnr deficit, stall rate)
  std::vector<QoeProfile> truth;  // ground-truth per-user weights
  std::vector<int> hw_class;      // per user, 0..3
};

// Ground-truth weights drawn uniformly on the simplex; service features
// uniform; QoE linear in the features plus Gaussian noise, clipped to [0,1];
// engagement thresholded at 0.5.
SynthDataset synth_dataset(Rng& rng, int n_users, int n_services,
                           double noise_sigma, double observe_rate = 0.4);

}  // namespace qnoma::qoe

#endif  // QNOMA_QOE_HPP
