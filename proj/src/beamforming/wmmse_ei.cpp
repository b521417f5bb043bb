#include "heirs/beamforming/wmmse_ei.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace heirs {

namespace {

double log_det_hpd(const CMatrix& a) {
  Eigen::LLT<CMatrix> llt(0.5 * (a + a.adjoint()));
  if (llt.info() != Eigen::Success) throw NumericalError("log_det: matrix is not positive definite");
  double s = 0.0;
  for (Index i = 0; i < a.rows(); ++i) s += std::log(llt.matrixL()(i, i).real());
  return 2.0 * s;
}

void check_users(const std::vector<CMatrix>& h_e, const CMatrix& v, Index n_s) {
  if (n_s < 1) throw DimensionError("streams must be >= 1");
  const Index k = static_cast<Index>(h_e.size());
  if (v.cols() != k * n_s) throw DimensionError("precoder has the wrong number of columns");
  for (const CMatrix& h : h_e)
    if (h.cols() != v.rows()) throw DimensionError("channel and precoder disagree on N_BS");
}

}  // namespace

EquivalentDownlink::EquivalentDownlink(const std::vector<CMatrix>& h_ca_dte,
                                       const std::vector<CMatrix>& h_eq, const CVector& phases)
    : phases_(phases) {
  if (h_eq.empty() || h_ca_dte.size() != h_eq.size())
    throw DimensionError("EquivalentDownlink: need one cascaded and one STE channel per user");
  n_bs_ = h_eq.front().rows();
  n_ue_ = h_eq.front().cols();
  for (std::size_t k = 0; k < h_eq.size(); ++k) {
    if (h_eq[k].rows() != n_bs_ || h_eq[k].cols() != n_ue_)
      throw DimensionError("EquivalentDownlink: STE channel shape mismatch");
    if (h_ca_dte[k].rows() != n_bs_ * n_ue_ || h_ca_dte[k].cols() != phases.size())
      throw DimensionError("EquivalentDownlink: cascaded channel shape mismatch");
    std::vector<CMatrix> s;
    s.reserve(phases.size());
    for (Index m = 0; m < phases.size(); ++m)
      s.push_back(mat(h_ca_dte[k].col(m), n_bs_, n_ue_).adjoint());
    slices_.push_back(std::move(s));
    h_ste_.push_back(h_eq[k].adjoint());
  }
  for (std::size_t k = 0; k < h_ste_.size(); ++k) h_e_.push_back(rebuild(static_cast<Index>(k)));
}

CMatrix EquivalentDownlink::rebuild(Index k) const {
  CMatrix h = h_ste_[k];
  for (Index m = 0; m < n_dte(); ++m) h += phases_(m) * slices_[k][m];
  return h;
}

CMatrix EquivalentDownlink::stacked() const {
  CMatrix s(users() * n_ue_, n_bs_);
  for (Index k = 0; k < users(); ++k) s.middleRows(k * n_ue_, n_ue_) = h_e_[k];
  return s;
}

void EquivalentDownlink::set_phase(Index m, Complex value) {
  const Complex delta = value - phases_(m);
  if (delta == Complex(0.0, 0.0)) return;
  for (Index k = 0; k < users(); ++k) h_e_[k] += delta * slices_[k][m];
  phases_(m) = value;
}

CMatrix user_block(const CMatrix& v, Index k, Index n_s) { return v.middleCols(k * n_s, n_s); }

CMatrix interference_covariance(const std::vector<CMatrix>& h_e, const CMatrix& v, Index k,
                                Index n_s, double noise) {
  const CMatrix& h = h_e[k];
  CMatrix lambda = noise * CMatrix::Identity(h.rows(), h.rows());
  for (Index i = 0; i < static_cast<Index>(h_e.size()); ++i) {
    if (i == k) continue;
    const CMatrix hv = h * user_block(v, i, n_s);
    lambda += hv * hv.adjoint();
  }
  return lambda;
}

std::vector<double> effective_rate(const std::vector<CMatrix>& h_e, const CMatrix& v, double noise,
                                   Index n_s, double t_tra, double t_tot) {
  check_users(h_e, v, n_s);
  if (!(noise > 0.0)) throw std::invalid_argument("effective_rate: noise power must be positive");
  if (!(t_tot > 0.0) || t_tra < 0.0) throw std::invalid_argument("effective_rate: bad block lengths");
  const double prefactor = std::max(0.0, 1.0 - t_tra / t_tot);
  std::vector<double> rates;
  for (Index k = 0; k < static_cast<Index>(h_e.size()); ++k) {
    const CMatrix hv = h_e[k] * user_block(v, k, n_s);
    const CMatrix lambda = interference_covariance(h_e, v, k, n_s, noise);
    const CMatrix m = CMatrix::Identity(n_s, n_s) + hv.adjoint() * lambda.ldlt().solve(hv);
    rates.push_back(prefactor * log_det_hpd(m) / std::log(2.0));
  }
  return rates;
}

CMatrix mse_matrix(const CMatrix& h_k, const CMatrix& v, const CMatrix& w, Index k, Index n_s,
                   double noise) {
  const CMatrix a = w.adjoint() * h_k * v;  // N_s x K N_s
  CMatrix e = noise * w.adjoint() * w + a * a.adjoint();
  const CMatrix own = a.middleCols(k * n_s, n_s);
  e -= own + own.adjoint();
  e += CMatrix::Identity(n_s, n_s);
  return 0.5 * (e + e.adjoint());
}

std::vector<CMatrix> mmse_receivers(const std::vector<CMatrix>& h_e, const CMatrix& v, Index n_s,
                                    double noise) {
  check_users(h_e, v, n_s);
  if (!(noise > 0.0)) throw std::invalid_argument("mmse_receivers: noise power must be positive");
  std::vector<CMatrix> w;
  for (Index k = 0; k < static_cast<Index>(h_e.size()); ++k) {
    const CMatrix hv = h_e[k] * v;
    const CMatrix j = hv * hv.adjoint() + noise * CMatrix::Identity(hv.rows(), hv.rows());
    w.push_back(j.ldlt().solve(h_e[k] * user_block(v, k, n_s)));
  }
  return w;
}

CMatrix inverse_mse_weight(const CMatrix& e) {
  const CMatrix sym = 0.5 * (e + e.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(sym);
  const RVector& lambda = eig.eigenvalues();
  CMatrix x = sym;
  if (lambda.minCoeff() <= 1e-12 * std::max(lambda.maxCoeff(), 0.0)) {
    const double ridge = 1e-12 * std::max(sym.trace().real(), 1e-300) / static_cast<double>(e.rows());
    x += ridge * CMatrix::Identity(e.rows(), e.rows());
  }
  const CMatrix inv = x.inverse();
  return 0.5 * (inv + inv.adjoint());
}

Receivers wmmse_update_receivers(const std::vector<CMatrix>& h_e, const CMatrix& v, Index n_s,
                                 double noise) {
  Receivers r;
  r.w = mmse_receivers(h_e, v, n_s, noise);
  for (Index k = 0; k < static_cast<Index>(h_e.size()); ++k) {
    r.mse.push_back(mse_matrix(h_e[k], v, r.w[k], k, n_s, noise));
    r.weights.push_back(inverse_mse_weight(r.mse.back()));
  }
  return r;
}

double wmmse_cost(const std::vector<CMatrix>& h_e, const CMatrix& v, const std::vector<CMatrix>& w,
                  const std::vector<CMatrix>& weights, Index n_s, double noise) {
  check_users(h_e, v, n_s);
  double f = 0.0;
  for (Index k = 0; k < static_cast<Index>(h_e.size()); ++k) {
    const CMatrix e = mse_matrix(h_e[k], v, w[k], k, n_s, noise);
    f += (weights[k] * e).trace().real() - log_det_hpd(weights[k]);
  }
  return f;
}

PrecoderUpdate wmmse_update_precoder(const std::vector<CMatrix>& h_e, const std::vector<CMatrix>& w,
                                     const std::vector<CMatrix>& weights, double power, Index n_s) {
  if (h_e.empty() || w.size() != h_e.size() || weights.size() != h_e.size())
    throw DimensionError("wmmse_update_precoder: per-user inputs disagree");
  if (!(power >= 0.0)) throw std::invalid_argument("wmmse_update_precoder: negative power budget");
  const Index n_bs = h_e.front().cols();
  const Index users = static_cast<Index>(h_e.size());
  CMatrix a = CMatrix::Zero(n_bs, n_bs);
  CMatrix b(n_bs, users * n_s);
  for (Index k = 0; k < users; ++k) {
    const CMatrix hw = h_e[k].adjoint() * w[k];  // N_BS x N_s
    a += hw * weights[k] * hw.adjoint();
    b.middleCols(k * n_s, n_s) = hw * weights[k];
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (a + a.adjoint()));
  const RVector lambda = eig.eigenvalues();
  const CMatrix q = eig.eigenvectors();
  const CMatrix c = q.adjoint() * b;
  RVector energy(n_bs);
  for (Index i = 0; i < n_bs; ++i) energy(i) = c.row(i).squaredNorm();
  if (!energy.allFinite() || !lambda.allFinite())
    throw NumericalError("wmmse_update_precoder: non-finite inputs");

  const double floor = 1e-12 * std::max(lambda.maxCoeff(), 0.0);
  auto precoder_power = [&](double mu) {
    double p = 0.0;
    for (Index i = 0; i < n_bs; ++i) {
      const double d = lambda(i) + mu;
      if (mu == 0.0 && lambda(i) <= floor) continue;
      p += energy(i) / (d * d);
    }
    return p;
  };
  auto precoder = [&](double mu) {
    CMatrix scaled = c;
    for (Index i = 0; i < n_bs; ++i) {
      const double d = lambda(i) + mu;
      if (mu == 0.0 && lambda(i) <= floor)
        scaled.row(i).setZero();
      else
        scaled.row(i) /= d;
    }
    return CMatrix(q * scaled);
  };

  PrecoderUpdate out;
  if (precoder_power(0.0) <= power) {
    out.v = precoder(0.0);
    return out;
  }
  double lo = 0.0;
  double hi = std::sqrt(energy.sum() / power);
  if (!(hi > 0.0) || !std::isfinite(hi))
    throw NumericalError("wmmse_update_precoder: cannot bracket the multiplier");
  while (precoder_power(hi) > power) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (precoder_power(mid) > power ? lo : hi) = mid;
  }
  out.mu = hi;
  out.v = precoder(hi);
  return out;
}

Complex ei_coefficient(const EquivalentDownlink& link, Index m, const std::vector<CMatrix>& w,
                       const std::vector<CMatrix>& weights, const CMatrix& v, Index n_s) {
  Complex c(0.0, 0.0);
  for (Index k = 0; k < link.users(); ++k) {
    const CMatrix& u = link.slice(k, m);
    const CMatrix t = link.residual(k, m);
    const CMatrix wt = w[k].adjoint() * t * v;  // N_s x K N_s
    const CMatrix wu = w[k].adjoint() * u * v;
    c += (weights[k] * wt * wu.adjoint()).trace();
    c -= (weights[k] * wu.middleCols(k * n_s, n_s).adjoint()).trace();
  }
  return c;
}

void ei_update_dte_phases(EquivalentDownlink& link, const std::vector<CMatrix>& w,
                          const std::vector<CMatrix>& weights, const CMatrix& v, Index n_s,
                          const std::vector<Complex>& levels) {
  for (Index m = 0; m < link.n_dte(); ++m) {
    const Complex c = ei_coefficient(link, m, w, weights, v, n_s);
    if (std::abs(c) == 0.0) continue;
    Complex best = link.phases()(m);
    if (levels.empty()) {
      best = -c / std::abs(c);
    } else {
      double best_value = (c * std::conj(best)).real();
      for (const Complex& level : levels) {
        const double value = (c * std::conj(level)).real();
        if (value < best_value) {
          best_value = value;
          best = level;
        }
      }
    }
    link.set_phase(m, best);
  }
}

void gain_ascent_phases(EquivalentDownlink& link, const std::vector<Complex>& levels, int sweeps) {
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    bool changed = false;
    for (Index m = 0; m < link.n_dte(); ++m) {
      Complex d(0.0, 0.0);
      for (Index k = 0; k < link.users(); ++k)
        d += (link.residual(k, m).adjoint() * link.slice(k, m)).trace();
      if (std::abs(d) == 0.0) continue;
      const Complex current = link.phases()(m);
      Complex best = current;
      if (levels.empty()) {
        best = std::conj(d) / std::abs(d);
        changed = changed || std::abs(best - current) > 1e-12;
      } else {
        double best_value = (current * d).real();
        for (const Complex& level : levels) {
          const double value = (level * d).real();
          if (value > best_value) {
            best_value = value;
            best = level;
            changed = true;
          }
        }
      }
      link.set_phase(m, best);
    }
    if (!changed) break;
  }
}

namespace {

BeamformingSolution wmmse_ei_from(const std::vector<CMatrix>& h_ca_dte, const std::vector<CMatrix>& h_eq,
                                  double power, double noise, const std::vector<Complex>& levels,
                                  const WmmseOptions& options, const CVector& phases, bool refine_start) {
  const Index n_dte = phases.size();
  EquivalentDownlink link(h_ca_dte, h_eq, phases);
  const Index users = link.users();
  const Index n_s = options.streams;
  if (n_s < 1 || n_s > std::min(link.n_bs(), link.n_ue()))
    throw DimensionError("wmmse_ei: streams out of range");
  const std::vector<Complex> used_levels =
      options.continuous_phases ? std::vector<Complex>{} : levels;
  if (!options.continuous_phases && levels.empty() && n_dte > 0)
    throw std::invalid_argument("wmmse_ei: discrete phases need a level set");
  if (refine_start) gain_ascent_phases(link, used_levels, options.init_sweeps);

  BeamformingSolution sol;
  // Eigen-beam start with equal power per stream.
  sol.v = CMatrix::Zero(link.n_bs(), users * n_s);
  const double amp = std::sqrt(power / static_cast<double>(users * n_s));
  for (Index k = 0; k < users; ++k) {
    const CMatrix& h = link.channel(k);
    if (h.norm() > 0.0) {
      Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeThinV);
      sol.v.middleCols(k * n_s, n_s) = amp * svd.matrixV().leftCols(n_s);
    } else {
      for (Index s = 0; s < n_s; ++s) sol.v((k * n_s + s) % link.n_bs(), k * n_s + s) = amp;
    }
  }
  sol.w.assign(users, CMatrix::Zero(link.n_ue(), n_s));
  sol.weights.assign(users, CMatrix::Identity(n_s, n_s));

  auto cost = [&] { return wmmse_cost(link.channels(), sol.v, sol.w, sol.weights, n_s, noise); };
  double f = cost();
  sol.cost_trace.push_back(f);
  for (int it = 0; it < options.max_iterations; ++it) {
    const double f_start = f;
    sol.w = mmse_receivers(link.channels(), sol.v, n_s, noise);
    sol.cost_trace.push_back(cost());
    for (Index k = 0; k < users; ++k)
      sol.weights[k] = inverse_mse_weight(mse_matrix(link.channel(k), sol.v, sol.w[k], k, n_s, noise));
    sol.cost_trace.push_back(cost());
    sol.v = wmmse_update_precoder(link.channels(), sol.w, sol.weights, power, n_s).v;
    sol.cost_trace.push_back(cost());
    if (n_dte > 0) {
      ei_update_dte_phases(link, sol.w, sol.weights, sol.v, n_s, used_levels);
      sol.cost_trace.push_back(cost());
    }
    f = sol.cost_trace.back();
    const std::vector<double> r = effective_rate(link.channels(), sol.v, noise, n_s, 0.0, 1.0);
    sol.rate_trace.push_back(std::accumulate(r.begin(), r.end(), 0.0));
    ++sol.iterations;
    if (!std::isfinite(f)) throw NumericalError("wmmse_ei: non-finite cost");
    if (std::abs(f_start - f) <= options.tolerance * std::max(1.0, std::abs(f))) break;
  }
  sol.dte_phases = link.phases();
  return sol;
}

}  // namespace

BeamformingSolution wmmse_ei(const std::vector<CMatrix>& h_ca_dte, const std::vector<CMatrix>& h_eq,
                             double power, double noise, const std::vector<Complex>& levels,
                             const WmmseOptions& options, const CVector& initial_phases) {
  const Index n_dte = h_ca_dte.empty() ? 0 : h_ca_dte.front().cols();
  if (initial_phases.size() != 0) {
    if (initial_phases.size() != n_dte) throw DimensionError("wmmse_ei: initial phases size mismatch");
    return wmmse_ei_from(h_ca_dte, h_eq, power, noise, levels, options, initial_phases, false);
  }
  BeamformingSolution best =
      wmmse_ei_from(h_ca_dte, h_eq, power, noise, levels, options, CVector::Ones(n_dte), true);
  if (n_dte == 0 || options.restarts < 1 || best.rate_trace.empty()) return best;

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  const bool continuous = options.continuous_phases || levels.empty();
  for (int r = 0; r < options.restarts; ++r) {
    CVector start(n_dte);
    for (Index m = 0; m < n_dte; ++m)
      start(m) = continuous ? std::polar(1.0, angle(rng)) : levels[rng() % levels.size()];
    BeamformingSolution s = wmmse_ei_from(h_ca_dte, h_eq, power, noise, levels, options, start, false);
    if (s.rate_trace.back() > best.rate_trace.back()) best = std::move(s);
  }
  return best;
}

}  // namespace heirs
