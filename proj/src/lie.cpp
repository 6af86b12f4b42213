#include "llg/lie.hpp"

#include "llg/json_io.hpp"
#include "llg/parallel.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <random>
#include <stdexcept>

namespace llg::lie {

LinearField bracket(const LinearField& F, const LinearField& G) {
  if (F.K != G.K || F.matrix.rows() != G.matrix.rows()) {
    throw DimensionMismatch("bracket: fields live on different truncations");
  }
  return {F.K, G.matrix * F.matrix - F.matrix * G.matrix};
}

namespace {

struct Axes {
  int a, b, c;
};

Axes axes_of(BracketFamily family) {
  switch (family) {
    case BracketFamily::Axes12: return {1, 2, 3};
    case BracketFamily::Axes23: return {2, 3, 1};
    case BracketFamily::Axes31: return {3, 1, 2};
  }
  return {1, 2, 3};
}

// LHS - RHS of the ladder identity on truncation Kb, as a dense matrix.
Eigen::MatrixXd identity_defect(int p, int q, Axes ax, int Kb, FieldConvention convention) {
  const LinearField lhs = bracket(control_field(p, ax.a, Kb, convention),
                                  control_field(q, ax.b, Kb, convention));
  const double factor = convention == FieldConvention::L2Projection ? 0.5 : 1.0;
  Eigen::MatrixXd rhs = factor * control_field(std::abs(p - q), ax.c, Kb, convention).matrix;
  if (p + q <= Kb) rhs += factor * control_field(p + q, ax.c, Kb, convention).matrix;
  return lhs.matrix - rhs;
}

}  // namespace

IdentityResidual verify_bracket_identity(int p, int q, BracketFamily family, int K,
                                         FieldConvention convention) {
  if (p < 0 || q < 0 || p > K || q > K) {
    throw std::invalid_argument("verify_bracket_identity: need 0 <= p, q <= K");
  }
  const Axes ax = axes_of(family);
  IdentityResidual out;
  out.exact_regime = p + q <= K;

  const Eigen::MatrixXd defect = identity_defect(p, q, ax, K, convention);
  out.truncated = defect.norm();
  for (int i = K; i >= 0; --i) {
    if (defect.middleRows(3 * i, 3).cwiseAbs().maxCoeff() > 1e-13) {
      out.max_defect_row_frequency = i;
      break;
    }
  }
  // Products with cos(p x) or cos(q x) of an S_K element stay inside S_{K+max(p,q)}.
  const int Kb = K + std::max(p, q);
  const Eigen::MatrixXd lifted = identity_defect(p, q, ax, Kb, convention);
  const Eigen::Index d = 3 * (K + 1);
  out.lifted = lifted.topLeftCorner(d, d).norm();
  return out;
}

namespace {

Eigen::VectorXd vec(const Eigen::MatrixXd& A) {
  return Eigen::Map<const Eigen::VectorXd>(A.data(), A.size());
}

// Gram-Schmidt against an orthonormal list; returns false if x is dependent.
bool add_if_independent(std::vector<Eigen::VectorXd>& basis, const Eigen::VectorXd& x) {
  const double scale = x.norm();
  if (scale == 0.0) return false;
  Eigen::VectorXd r = x / scale;
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : basis) r -= b.dot(r) * b;
  const double rn = r.norm();
  if (rn < 1e-9) return false;
  basis.push_back(r / rn);
  return true;
}

bool all_weighted_skew(const std::vector<LinearField>& fields) {
  for (const auto& f : fields) {
    const Eigen::VectorXd w = weight_diagonal(f.K);
    const Eigen::MatrixXd WA = w.asDiagonal() * f.matrix;
    if ((WA + WA.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, WA.cwiseAbs().maxCoeff()))
      return false;
  }
  return true;
}

int numerical_rank(const Eigen::MatrixXd& cols) {
  if (cols.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cols);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  const double tol = 1e-9 * s[0];
  return static_cast<int>((s.array() > tol).count());
}

// Columns B m in coordinates where the weighted inner product is Euclidean.
Eigen::MatrixXd evaluation_matrix(const std::vector<LinearField>& elems, const ModeState& m) {
  const Eigen::VectorXd sw = weight_diagonal(m.K()).cwiseSqrt();
  Eigen::MatrixXd cols(m.dim(), static_cast<Eigen::Index>(elems.size()));
  for (std::size_t c = 0; c < elems.size(); ++c) {
    cols.col(static_cast<Eigen::Index>(c)) = sw.asDiagonal() * (elems[c].matrix * m.coeffs());
  }
  return cols;
}

template <class StopFn>
void close_breadth_first(const std::vector<LinearField>& generators, int depth_cap,
                         std::vector<LinearField>& elements, std::vector<int>& depths,
                         int& reached, StopFn&& stop) {
  if (depth_cap < 1) throw std::invalid_argument("lie closure: depth_cap must be >= 1");
  std::vector<Eigen::VectorXd> basis;
  std::vector<LinearField> frontier;
  for (const auto& g : generators) {
    if (add_if_independent(basis, vec(g.matrix))) {
      elements.push_back(g);
      depths.push_back(1);
      frontier.push_back(g);
    }
  }
  reached = 1;
  if (stop(elements)) return;
  for (int depth = 2; depth <= depth_cap && !frontier.empty(); ++depth) {
    std::vector<LinearField> next;
    for (const auto& g : generators)
      for (const auto& e : frontier) {
        LinearField b = bracket(g, e);
        if (add_if_independent(basis, vec(b.matrix))) {
          elements.push_back(b);
          depths.push_back(depth);
          next.push_back(std::move(b));
        }
      }
    if (next.empty()) break;
    reached = depth;
    frontier = std::move(next);
    if (stop(elements)) return;
  }
}

}  // namespace

LieClosure::LieClosure(std::vector<LinearField> generators, int depth_cap) {
  close_breadth_first(generators, depth_cap, elements_, depths_, reached_depth_,
                      [](const auto&) { return false; });
}

namespace {

SpanEntry span_entry(const std::vector<LinearField>& elements, const ModeState& m, int depth) {
  SpanEntry e;
  e.ambient_dim = static_cast<int>(m.dim());
  e.closure_size = static_cast<int>(elements.size());
  e.depth_used = depth;
  const Eigen::MatrixXd cols = evaluation_matrix(elements, m);
  e.rank = numerical_rank(cols);
  const double mn = weighted_norm(m);
  const Eigen::VectorXd sm = weight_diagonal(m.K()).cwiseSqrt().asDiagonal() * m.coeffs();
  for (Eigen::Index c = 0; c < cols.cols(); ++c) {
    const double bn = cols.col(c).norm();
    if (bn == 0.0 || mn == 0.0) continue;
    e.orthogonality_residual =
        std::max(e.orthogonality_residual, std::abs(cols.col(c).dot(sm)) / (bn * mn));
  }
  e.orthogonal = e.orthogonality_residual <= 1e-9;
  return e;
}

}  // namespace

SpanEntry evaluate_span(const LieClosure& closure, const ModeState& m) {
  return span_entry(closure.elements(), m, closure.reached_depth());
}

SpanEntry lie_span(const std::vector<LinearField>& generators, const ModeState& m, int depth_cap) {
  const int ambient = static_cast<int>(m.dim());
  const int bound = all_weighted_skew(generators) ? ambient - 1 : ambient;
  std::vector<LinearField> elements;
  std::vector<int> depths;
  int reached = 0;
  close_breadth_first(generators, depth_cap, elements, depths, reached, [&](const auto& elems) {
    return numerical_rank(evaluation_matrix(elems, m)) >= bound;
  });
  return span_entry(elements, m, reached);
}

ModeState random_sphere_state(int K, double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // isotropic in the weighted metric: draw in sqrt(W)-coordinates, map back
  const Eigen::VectorXd w = weight_diagonal(K);
  Eigen::VectorXd z(w.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = gauss(rng);
  z *= radius / z.norm();
  return ModeState(K, z.cwiseQuotient(w.cwiseSqrt()));
}

RankReport bracket_generating_report(int K, const std::vector<ModeIndex>& control_modes,
                                     int samples, std::uint64_t seed, int depth_cap, int threads) {
  if (samples < 1) throw std::invalid_argument("bracket_generating_report: samples must be >= 1");
  RankReport r;
  r.K = K;
  r.control_modes = control_modes;
  r.seed = seed;
  r.depth_cap = depth_cap > 0 ? depth_cap : default_depth_cap(K);
  r.ambient_dim = 3 * (K + 1);

  std::vector<LinearField> gens;
  for (const auto& [k, l] : control_modes) gens.push_back(control_field(k, l, K));
  const LieClosure closure(gens, r.depth_cap);
  r.closure_size = static_cast<int>(closure.elements().size());

  std::vector<SpanEntry> entries(static_cast<std::size_t>(samples));
  parallel_for(entries.size(), threads, [&](std::size_t s) {
    const ModeState m = random_sphere_state(K, std::sqrt(kTwoPi), seed + s);
    entries[s] = evaluate_span(closure, m);
  });
  for (const auto& e : entries) {
    r.ranks.push_back(e.rank);
    r.orthogonality_residuals.push_back(e.orthogonality_residual);
    r.orthogonal.push_back(e.orthogonal);
  }
  r.min_rank = *std::min_element(r.ranks.begin(), r.ranks.end());
  r.max_rank = *std::max_element(r.ranks.begin(), r.ranks.end());
  if (r.min_rank == r.ambient_dim) {
    r.verdict = "full";
  } else if (r.min_rank == r.ambient_dim - 1) {
    r.verdict = "sphere-full";
  } else {
    r.verdict = "deficient";
  }
  r.note = "all control fields are skew in the weighted L2 inner product, so the bracket span at m "
           "is tangent to the sphere |m|_w = const; the largest attainable rank at m != 0 is " +
           std::to_string(r.ambient_dim - 1) + ", not the ambient dimension " +
           std::to_string(r.ambient_dim);
  return r;
}

void to_json(nlohmann::json& j, const RankReport& r) {
  j = {{"K", r.K},
       {"control_modes", r.control_modes},
       {"seed", r.seed},
       {"depth_cap", r.depth_cap},
       {"ambient_dim", r.ambient_dim},
       {"sphere_dim", r.ambient_dim - 1},
       {"closure_size", r.closure_size},
       {"ranks", r.ranks},
       {"min_rank", r.min_rank},
       {"max_rank", r.max_rank},
       {"orthogonality_residuals", r.orthogonality_residuals},
       {"orthogonal", r.orthogonal},
       {"verdict", r.verdict},
       {"note", r.note}};
}

namespace {

using CubicField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// derivative of f at m along d; exact when f is a polynomial of degree <= 4
Eigen::VectorXd directional(const CubicField& f, const Eigen::VectorXd& m, const Eigen::VectorXd& d) {
  auto central = [&](double h) -> Eigen::VectorXd { return (f(m + h * d) - f(m - h * d)) / (2.0 * h); };
  const double h = 1e-2;
  return (4.0 * central(h / 2) - central(h)) / 3.0;
}

}  // namespace

int accessibility_rank(const GalerkinModel& model, const LieClosure& closure, const ModeState& m, int ad_depth) {
  if (m.K() != model.K()) throw DimensionMismatch("accessibility_rank: state K differs from model K");
  const CubicField drift = [&model](const Eigen::VectorXd& x) {
    Eigen::VectorXd out;
    model.drift(x, out);
    return out;
  };
  std::vector<CubicField> fields{drift};
  std::vector<CubicField> level{drift};
  for (int d = 0; d < ad_depth; ++d) {
    std::vector<CubicField> next;
    for (const auto& B : closure.elements()) {
      for (const auto& F : level) {
        const Eigen::MatrixXd Bm = B.matrix;
        // [F, B](x) = B F(x) - DF(x) B x, sign irrelevant for the span
        next.push_back([Bm, F](const Eigen::VectorXd& x) -> Eigen::VectorXd { return directional(F, x, Bm * x) - Bm * F(x); });
      }
    }
    fields.insert(fields.end(), next.begin(), next.end());
    level = std::move(next);
  }
  const Eigen::VectorXd& x = m.coeffs();
  Eigen::MatrixXd cols = evaluation_matrix(closure.elements(), m);
  const Eigen::Index base = cols.cols();
  cols.conservativeResize(Eigen::NoChange, base + static_cast<Eigen::Index>(fields.size()));
  const Eigen::VectorXd sw = weight_diagonal(m.K()).cwiseSqrt();
  for (std::size_t i = 0; i < fields.size(); ++i) cols.col(base + static_cast<Eigen::Index>(i)) = sw.asDiagonal() * fields[i](x);
  return numerical_rank(cols);
}

AccessibilityReport accessibility_report(const GalerkinModel& model, int samples, std::uint64_t seed, int depth_cap,
                                         int ad_depth, int threads) {
  if (samples < 1) throw std::invalid_argument("accessibility_report: samples must be >= 1");
  const int K = model.K();
  std::vector<LinearField> gens;
  for (const auto& [k, l] : model.params().control_modes) gens.push_back(control_field(k, l, K));
  const LieClosure closure(gens, depth_cap > 0 ? depth_cap : default_depth_cap(K));
  AccessibilityReport r;
  r.ad_depth = ad_depth;
  r.ranks.resize(static_cast<std::size_t>(samples));
  parallel_for(r.ranks.size(), threads, [&](std::size_t s) {
    r.ranks[s] = accessibility_rank(model, closure, random_sphere_state(K, std::sqrt(kTwoPi), seed + s), ad_depth);
  });
  r.min_rank = *std::min_element(r.ranks.begin(), r.ranks.end());
  r.max_rank = *std::max_element(r.ranks.begin(), r.ranks.end());
  return r;
}

void to_json(nlohmann::json& j, const AccessibilityReport& r) {
  j = {{"ranks", r.ranks}, {"min_rank", r.min_rank}, {"max_rank", r.max_rank}, {"ad_depth", r.ad_depth}};
}

}  // namespace llg::lie
