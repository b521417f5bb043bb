#include "heirs/estimation/dsd_mo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>

namespace heirs {

namespace {

double l1(const CMatrix& x) { return x.cwiseAbs().sum(); }

CVector ones(Index n) { return CVector::Ones(n); }

CMatrix project_g(const CMatrix& g, const Dictionaries& d) { return d.a_bs.adjoint() * g * d.a_dte; }

CMatrix project_h(const CMatrix& h, const Dictionaries& d) { return d.a_dte.adjoint() * h * d.a_ue; }

CVector project_row(const CMatrix& h_eq, const Dictionaries& d) {
  return d.a_bs.adjoint() * (h_eq * (d.a_ue * ones(d.a_ue.cols())));
}

CVector project_col(const CMatrix& h_eq, const Dictionaries& d) {
  const CVector b = d.a_bs * ones(d.a_bs.cols());  // (1^T A_BS^H)^H
  return (b.adjoint() * h_eq * d.a_ue).transpose();
}

CMatrix dte_input(const CMatrix& h_dte, const DsdData& data) {
  return data.dte_phases.cwiseProduct(h_dte * data.symbols);
}

CMatrix reg_g(const CMatrix& y, const Dictionaries& d) { return d.a_bs * y * d.a_dte.adjoint(); }

CMatrix reg_h(const CMatrix& y, const Dictionaries& d) { return d.a_dte * y * d.a_ue.adjoint(); }

CMatrix reg_eq(const CVector& y_row, const CVector& y_col, const EstimationWeights& w,
               const Dictionaries& d) {
  const CVector u = d.a_ue * ones(d.a_ue.cols());
  const CVector b = d.a_bs * ones(d.a_bs.cols());
  return (w.row / 2.0) * (d.a_bs * y_row) * u.adjoint() +
         (w.col / 2.0) * b * (y_col.transpose() * d.a_ue.adjoint());
}

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

DsdData DsdData::from_block(const PilotBlock& block) {
  return {block.symbols, block.dte_phases, block.received};
}

CMatrix phase_sign(const CMatrix& x, double delta) {
  CMatrix y(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i < x.rows(); ++i) {
      const double a = std::abs(x(i, j));
      y(i, j) = a < delta ? Complex(0.0, 0.0) : x(i, j) / a;
    }
  }
  return y;
}

GradientWorkspace GradientWorkspace::build(const DsdTriple& x, const Dictionaries& dict,
                                           double delta) {
  GradientWorkspace ws;
  ws.y_g = phase_sign(project_g(x.g_dte, dict), delta);
  ws.y_h = phase_sign(project_h(x.h_dte, dict), delta);
  ws.y_row = phase_sign(project_row(x.h_eq, dict), delta);
  ws.y_col = phase_sign(project_col(x.h_eq, dict), delta);
  return ws;
}

CMatrix dsd_residual(const DsdTriple& x, const DsdData& data) {
  return data.received - x.g_dte * dte_input(x.h_dte, data) - x.h_eq * data.symbols;
}

double dsd_objective(const DsdTriple& x, const DsdData& data, const Dictionaries& dict,
                     const EstimationWeights& w) {
  double f = dsd_residual(x, data).squaredNorm();
  if (w.g != 0.0) f += w.g * l1(project_g(x.g_dte, dict));
  if (w.h != 0.0) f += w.h * l1(project_h(x.h_dte, dict));
  if (w.row != 0.0) f += w.row * l1(project_row(x.h_eq, dict));
  if (w.col != 0.0) f += w.col * l1(project_col(x.h_eq, dict));
  return f;
}

CMatrix grad_g_dte(const DsdTriple& x, const DsdData& data, const Dictionaries& dict,
                   const EstimationWeights& w, const GradientWorkspace& ws) {
  const CMatrix z = dte_input(x.h_dte, data);
  const CMatrix e = data.received - x.g_dte * z - x.h_eq * data.symbols;
  CMatrix g = -e * z.adjoint();
  if (w.g != 0.0) g += (w.g / 2.0) * reg_g(ws.y_g, dict);
  return g;
}

CMatrix grad_h_dte(const DsdTriple& x, const DsdData& data, const Dictionaries& dict,
                   const EstimationWeights& w, const GradientWorkspace& ws) {
  const CMatrix e = dsd_residual(x, data);
  CMatrix g = -data.dte_phases.conjugate().cwiseProduct(x.g_dte.adjoint() * e) *
              data.symbols.adjoint();
  if (w.h != 0.0) g += (w.h / 2.0) * reg_h(ws.y_h, dict);
  return g;
}

CMatrix grad_h_eq_ste(const DsdTriple& x, const DsdData& data, const Dictionaries& dict,
                      const EstimationWeights& w, const GradientWorkspace& ws) {
  const CMatrix e = dsd_residual(x, data);
  CMatrix g = -e * data.symbols.adjoint();
  if (w.row != 0.0 || w.col != 0.0) g += reg_eq(ws.y_row, ws.y_col, w, dict);
  return g;
}

namespace {

/// One fixed-rank block update of a quadratic data term ||target - L(X)||^2
/// plus an l1 penalty. The data term is evaluated through its normal
/// equations, ||target||^2 - 2 Re<X, L^*(target)> + Re<X, L^*L(X)>, so the
/// cost does not scale with the pilot length.
struct BlockSolver {
  Index rows;
  Index cols;
  Index rank;
  double target_energy = 0.0;                               // ||target||^2
  CMatrix correlation;                                      // L^*(target)
  std::function<CMatrix(const CMatrix&)> gram;              // L^*L(X)
  std::function<double(const CMatrix&)> penalty;           // weighted l1 value
  std::function<CMatrix(const CMatrix&)> penalty_gradient;  // its Wirtinger gradient

  // The cost, the next gradient and the next step hint all see the same point.
  mutable CMatrix memo_in, memo_out;
  const CMatrix& gram_at(const CMatrix& m) const {
    if (memo_in.rows() != m.rows() || memo_in.cols() != m.cols() || memo_in != m) {
      memo_out = gram(m);
      memo_in = m;
    }
    return memo_out;
  }

  CgResult<FixedRankManifold> solve(const FixedRankPoint& x0, const CgOptions& options) const {
    const FixedRankManifold manifold(rows, cols, rank);
    RiemannianProblem<FixedRankManifold> p;
    p.cost = [this](const FixedRankPoint& x) {
      const CMatrix m = x.matrix();
      return target_energy - 2.0 * real_inner(m, correlation) + real_inner(m, gram_at(m)) + penalty(m);
    };
    p.euclidean_gradient = [this](const FixedRankPoint& x) -> CMatrix {
      const CMatrix m = x.matrix();
      return 2.0 * (gram_at(m) - correlation + penalty_gradient(m));
    };
    p.step_hint = [this](const FixedRankPoint& x, const CMatrix& d) {
      // Exact minimizer of the data term along the straight line x + t d.
      const double den = real_inner(d, gram(d));
      if (!(den > 0.0)) return 0.0;
      return real_inner(d, correlation - gram_at(x.matrix())) / den;
    };
    return riemannian_cg(manifold, p, x0, options);
  }
};

/// Pilot correlation K = U^H U with U(t, a + n_dte j) = phi_{a,t} s_{j,t}.
/// The normal operator of X -> G (Phi o (X S)) is vec(X) -> (K o (G^H G
/// expanded over user antennas)) vec(X).
CMatrix dte_pilot_correlation(const DsdData& data) {
  const Index n_dte = data.dte_phases.rows();
  const Index n_ue = data.symbols.rows();
  const Index t_len = data.length();
  CMatrix u(t_len, n_dte * n_ue);
  for (Index j = 0; j < n_ue; ++j)
    for (Index a = 0; a < n_dte; ++a)
      u.col(a + n_dte * j) = data.dte_phases.row(a).transpose().cwiseProduct(data.symbols.row(j).transpose());
  CMatrix k = CMatrix::Zero(u.cols(), u.cols());
  k.selfadjointView<Eigen::Lower>().rankUpdate(u.adjoint());
  return k.selfadjointView<Eigen::Lower>();
}

FixedRankPoint start_point(const CMatrix& x, Index rank, std::mt19937_64& rng) {
  if (x.norm() > 0.0 && x.allFinite()) return FixedRankPoint::from_matrix(x, rank);
  std::normal_distribution<double> n(0.0, 1e-3);
  CMatrix r(x.rows(), x.cols());
  for (Index j = 0; j < r.cols(); ++j)
    for (Index i = 0; i < r.rows(); ++i) r(i, j) = Complex(n(rng), n(rng));
  return FixedRankPoint::from_matrix(r, rank);
}

CMatrix random_low_rank(Index rows, Index cols, Index rank, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  CMatrix a(rows, rank), b(rank, cols);
  for (Index j = 0; j < rank; ++j)
    for (Index i = 0; i < rows; ++i) a(i, j) = Complex(n(rng), n(rng));
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rank; ++i) b(i, j) = Complex(n(rng), n(rng));
  return a * b;
}

Index clamp_rank(Index requested, Index rows, Index cols) {
  return std::max<Index>(1, std::min({requested, rows, cols}));
}

}  // namespace

UserEstimate estimate_user(const PilotBlock& block, const Dictionaries& dict,
                           const EstimationOptions& opt) {
  if (block.length() < 1) throw std::invalid_argument("estimate_user: block has no pilots");
  if (!block.observed()) throw std::invalid_argument("estimate_user: block has no observations");

  DsdData data = DsdData::from_block(block);
  const Index n_bs = data.received.rows();
  const Index n_ue = data.symbols.rows();
  const Index n_dte = data.dte_phases.rows();
  const Index n_ste = block.ste_phases.size();
  const Index t_len = data.length();
  const bool has_dte = n_dte > 0;
  const bool has_ste = n_ste > 0;

  // Internal units: unit pilot power and unit mean received power.
  const double pilot_power = data.symbols.squaredNorm() / static_cast<double>(t_len);
  if (!(pilot_power > 0.0)) throw std::invalid_argument("estimate_user: pilots have zero power");
  const double amp = std::sqrt(pilot_power);
  double kappa = data.received.norm() / (amp * std::sqrt(static_cast<double>(n_bs * t_len)));
  if (!(kappa > 0.0) || !std::isfinite(kappa)) kappa = 1.0;
  data.symbols /= amp;
  data.received /= amp * kappa;

  const Index rank_g = has_dte ? clamp_rank(opt.rank_g, n_bs, n_dte) : 0;
  const Index rank_h = has_dte ? clamp_rank(opt.rank_h, n_dte, n_ue) : 0;
  const Index rank_eq =
      clamp_rank(opt.rank_eq > 0 ? opt.rank_eq : std::min(opt.rank_g, opt.rank_h), n_bs, n_ue);

  std::mt19937_64 rng(opt.init_seed);
  UserEstimate out;

  // Initialization.
  DsdTriple x{CMatrix::Zero(n_bs, n_dte), CMatrix::Zero(n_dte, n_ue), CMatrix::Zero(n_bs, n_ue)};
  std::optional<FixedRankPoint> p_eq, p_g, p_h;
  if (has_ste) {
    p_eq = start_point(data.received * pseudo_inverse(data.symbols), rank_eq, rng);
    x.h_eq = p_eq->matrix();
  }
  if (has_dte) {
    CMatrix g0 = random_low_rank(n_bs, n_dte, rank_g, rng);
    CMatrix h0 = random_low_rank(n_dte, n_ue, rank_h, rng);
    const double target = (data.received - x.h_eq * data.symbols).norm();
    const double produced = (g0 * dte_input(h0, data)).norm();
    const double c = produced > 0.0 && target > 0.0 ? std::sqrt(target / produced) : 1e-2;
    p_g = FixedRankPoint::from_matrix(c * g0, rank_g);
    p_h = FixedRankPoint::from_matrix(c * h0, rank_h);
    x.g_dte = p_g->matrix();
    x.h_dte = p_h->matrix();
  }

  EstimationWeights w = opt.weights;
  if (opt.auto_weights) {
    // Penalty of the size sigma * ||signal||, so it vanishes without noise.
    const double data_term = dsd_residual(x, data).squaredNorm();
    const double noise_energy =
        static_cast<double>(n_bs * t_len) * block.noise_power / (pilot_power * kappa * kappa);
    const double s = opt.weight_scale * std::sqrt(data_term * noise_energy);
    w.g = has_dte ? safe_ratio(s, l1(project_g(x.g_dte, dict))) : 0.0;
    w.h = has_dte ? safe_ratio(s, l1(project_h(x.h_dte, dict))) : 0.0;
    w.row = has_ste ? safe_ratio(s, l1(project_row(x.h_eq, dict))) : 0.0;
    w.col = has_ste ? safe_ratio(s, l1(project_col(x.h_eq, dict))) : 0.0;
  }
  out.weights = w;

  const CMatrix symbol_gram = data.symbols * data.symbols.adjoint();
  const CMatrix dte_correlation = has_dte ? dte_pilot_correlation(data) : CMatrix();

  double f = dsd_objective(x, data, dict, w);
  out.objective_trace.push_back(f);

  auto check = [&](double value, const char* where) {
    if (std::isfinite(value)) return true;
    out.aborted = true;
    out.diagnostic = std::string("non-finite objective after ") + where;
    return false;
  };

  auto update_eq = [&] {
    BlockSolver b;
    b.rows = n_bs;
    b.cols = n_ue;
    b.rank = rank_eq;
    b.gram = [&](const CMatrix& m) -> CMatrix { return m * symbol_gram; };
    b.penalty = [&](const CMatrix& m) {
      return w.row * l1(project_row(m, dict)) + w.col * l1(project_col(m, dict));
    };
    b.penalty_gradient = [&](const CMatrix& m) -> CMatrix {
      if (w.row == 0.0 && w.col == 0.0) return CMatrix::Zero(m.rows(), m.cols());
      return reg_eq(phase_sign(project_row(m, dict), opt.delta),
                    phase_sign(project_col(m, dict), opt.delta), w, dict);
    };
    const CMatrix target = data.received - x.g_dte * dte_input(x.h_dte, data);
    b.target_energy = target.squaredNorm();
    b.correlation = target * data.symbols.adjoint();
    auto r = b.solve(*p_eq, opt.cg);
    out.cg_iterations += r.trace.iterations;
    p_eq = std::move(r.point);
    x.h_eq = p_eq->matrix();
  };

  auto update_g = [&] {
    const CMatrix z = dte_input(x.h_dte, data);
    BlockSolver b;
    b.rows = n_bs;
    b.cols = n_dte;
    b.rank = rank_g;
    const CMatrix zz = z * z.adjoint();
    b.gram = [&](const CMatrix& m) -> CMatrix { return m * zz; };
    b.penalty = [&](const CMatrix& m) { return w.g * l1(project_g(m, dict)); };
    b.penalty_gradient = [&](const CMatrix& m) -> CMatrix {
      if (w.g == 0.0) return CMatrix::Zero(m.rows(), m.cols());
      return (w.g / 2.0) * reg_g(phase_sign(project_g(m, dict), opt.delta), dict);
    };
    const CMatrix target = data.received - x.h_eq * data.symbols;
    b.target_energy = target.squaredNorm();
    b.correlation = target * z.adjoint();
    auto r = b.solve(*p_g, opt.cg);
    out.cg_iterations += r.trace.iterations;
    p_g = std::move(r.point);
    x.g_dte = p_g->matrix();
  };

  auto update_h = [&] {
    const CMatrix g = x.g_dte;
    BlockSolver b;
    b.rows = n_dte;
    b.cols = n_ue;
    b.rank = rank_h;
    const CMatrix gg = g.adjoint() * g;
    CMatrix q = dte_correlation;
    for (Index c = 0; c < q.cols(); ++c)
      for (Index r = 0; r < q.rows(); ++r) q(r, c) *= gg(r % n_dte, c % n_dte);
    b.gram = [&](const CMatrix& m) -> CMatrix {
      const CVector v = q * m.reshaped();
      return v.reshaped(n_dte, n_ue);
    };
    b.penalty = [&](const CMatrix& m) { return w.h * l1(project_h(m, dict)); };
    b.penalty_gradient = [&](const CMatrix& m) -> CMatrix {
      if (w.h == 0.0) return CMatrix::Zero(m.rows(), m.cols());
      return (w.h / 2.0) * reg_h(phase_sign(project_h(m, dict), opt.delta), dict);
    };
    const CMatrix target = data.received - x.h_eq * data.symbols;
    b.target_energy = target.squaredNorm();
    b.correlation =
        data.dte_phases.conjugate().cwiseProduct(g.adjoint() * target) * data.symbols.adjoint();
    auto r = b.solve(*p_h, opt.cg);
    out.cg_iterations += r.trace.iterations;
    p_h = std::move(r.point);
    x.h_dte = p_h->matrix();
  };

  if (check(f, "initialization")) {
    for (int outer = 0; outer < opt.max_outer && !out.aborted; ++outer) {
      const double f_outer = f;
      if (has_ste) {
        update_eq();
        f = dsd_objective(x, data, dict, w);
        out.objective_trace.push_back(f);
        if (!check(f, "the STE update")) break;
      }
      if (has_dte) {
        for (int inner = 0; inner < opt.max_inner; ++inner) {
          const double f_inner = f;
          update_g();
          f = dsd_objective(x, data, dict, w);
          out.objective_trace.push_back(f);
          if (!check(f, "the G_DTE update")) break;
          update_h();
          f = dsd_objective(x, data, dict, w);
          out.objective_trace.push_back(f);
          if (!check(f, "the H_DTE update")) break;
          ++out.inner_iterations;
          if (std::abs(f_inner - f) <= opt.inner_tolerance * std::abs(f_inner)) break;
        }
      }
      ++out.outer_iterations;
      if (std::abs(f_outer - f) <= opt.outer_tolerance * std::abs(f_outer)) break;
    }
  }

  out.residual_norm = dsd_residual(x, data).norm() * amp * kappa;
  const double root = std::sqrt(kappa);
  out.g_dte = root * x.g_dte;
  out.h_dte = root * x.h_dte;
  out.h_eq_ste = kappa * x.h_eq;
  out.h_ca_dte = khatri_rao(out.h_dte.transpose(), out.g_dte);
  return out;
}

EstimationResult estimate_dsd_mo(const std::vector<PilotBlock>& blocks, const Dictionaries& dict,
                                 const EstimationOptions& options) {
  EstimationResult result;
  result.users.reserve(blocks.size());
  for (const PilotBlock& b : blocks) result.users.push_back(estimate_user(b, dict, options));
  return result;
}

}  // namespace heirs
