#pragma once

// Lie brackets of linear vector fields and numerical certification of the
// bracket-generating property.
//
// Sign convention: [f, g](x) = Dg(x) f(x) - Df(x) g(x). For linear fields
// f = F x and g = G x this is (G F - F G) x.

#include "llg/galerkin.hpp"
#include "llg/spectral.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace llg::lie {

LinearField bracket(const LinearField& F, const LinearField& G);

/// Cyclic axis patterns of the bracket ladder:
///   [f^{p,1}, f^{q,2}] ~ f^{|p-q|,3} + f^{p+q,3}   (Axes12)
///   [f^{p,2}, f^{q,3}] ~ f^{|p-q|,1} + f^{p+q,1}   (Axes23)
///   [f^{p,3}, f^{q,1}] ~ f^{|p-q|,2} + f^{p+q,2}   (Axes31)
enum class BracketFamily { Axes12, Axes23, Axes31 };

struct IdentityResidual {
  /// Frobenius norm of LHS - RHS with both sides built inside S_K.
  double truncated = 0.0;
  /// Same identity for the fields built on S_{K + max(p,q)} and compressed
  /// back to S_K. Cosine multiplication commutes before truncation, so this
  /// is the form in which the identity holds exactly.
  double lifted = 0.0;
  /// Largest frequency of an S_K row on which the truncated residual is nonzero
  /// (-1 if it vanishes).
  int max_defect_row_frequency = -1;
  /// p + q <= K: every right-hand term lives in S_K.
  bool exact_regime = false;
};

/// In the L2 convention the right-hand side carries the factor 1/2 from
/// cos(p x) cos(q x) = (cos((p+q) x) + cos((p-q) x)) / 2; the literal-formula convention
/// absorbs it.
IdentityResidual verify_bracket_identity(int p, int q, BracketFamily family, int K,
                                         FieldConvention convention = FieldConvention::L2Projection);

/// Span of the generators and their iterated brackets up to a depth cap.
/// Elements are kept linearly independent as matrices.
class LieClosure {
 public:
  LieClosure(std::vector<LinearField> generators, int depth_cap);

  const std::vector<LinearField>& elements() const { return elements_; }
  /// Bracket depth at which each element was first found (generators: 1).
  const std::vector<int>& depths() const { return depths_; }
  int reached_depth() const { return reached_depth_; }

 private:
  std::vector<LinearField> elements_;
  std::vector<int> depths_;
  int reached_depth_ = 0;
};

struct SpanEntry {
  int rank = 0;
  int ambient_dim = 0;
  /// max over elements of |<B m, m>_w| / (|B m|_w |m|_w); 0 when m = 0.
  double orthogonality_residual = 0.0;
  bool orthogonal = true;
  int closure_size = 0;
  int depth_used = 0;
};

/// Rank of {B m : B in the bracket closure}, singular values below
/// 1e-9 * sigma_max counted as zero.
SpanEntry evaluate_span(const LieClosure& closure, const ModeState& m);

/// Breadth-first closure with early stop once the evaluated rank saturates.
SpanEntry lie_span(const std::vector<LinearField>& generators, const ModeState& m, int depth_cap);

inline int default_depth_cap(int K) { return 2 * K + 2; }

/// Uniform random state on the weighted sphere of the given radius.
ModeState random_sphere_state(int K, double radius, std::uint64_t seed);

struct RankReport {
  int K = 0;
  std::vector<ModeIndex> control_modes;
  std::uint64_t seed = 0;
  int depth_cap = 0;
  int ambient_dim = 0;
  std::vector<int> ranks;
  std::vector<double> orthogonality_residuals;
  std::vector<bool> orthogonal;
  int min_rank = 0;
  int max_rank = 0;
  int closure_size = 0;
  /// "full" (rank = 3(K+1)), "sphere-full" (rank = 3(K+1) - 1) or "deficient".
  std::string verdict;
  std::string note;
};

RankReport bracket_generating_report(int K, const std::vector<ModeIndex>& control_modes,
                                     int samples, std::uint64_t seed, int depth_cap = -1,
                                     int threads = 1);

void to_json(nlohmann::json& j, const RankReport& r);

/// Rank at m of the drift-extended family: the control closure evaluated at m,
/// plus the drift and its iterated brackets ad_B1 ... ad_Bd f_0 (d <= ad_depth)
/// with B ranging over the control closure. Directional derivatives of the cubic
/// drift use Richardson-extrapolated central differences, which are exact for cubics.
int accessibility_rank(const GalerkinModel& model, const LieClosure& closure, const ModeState& m, int ad_depth = 2);

struct AccessibilityReport {
  std::vector<int> ranks;
  int min_rank = 0;
  int max_rank = 0;
  int ad_depth = 0;
};
/// Same sample states as bracket_generating_report (seed + s on the sqrt(2 pi)-sphere).
AccessibilityReport accessibility_report(const GalerkinModel& model, int samples, std::uint64_t seed,
                                         int depth_cap = -1, int ad_depth = 2, int threads = 1);
void to_json(nlohmann::json& j, const AccessibilityReport& r);

}  // namespace llg::lie
