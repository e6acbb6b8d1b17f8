#include "cvmbqc/wire.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include <unsupported/Eigen/KroneckerProduct>

#include "cvmbqc/su2.hpp"

namespace cvmbqc::wire {

namespace {

std::vector<double> gate_to_floats(const ComplexMatrix& g) {
  std::vector<double> out;
  out.reserve(2 * g.size());
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      out.push_back(g(i, j).real());
      out.push_back(g(i, j).imag());
    }
  return out;
}

double gate_unitarity_defect(const ComplexMatrix& g) {
  const ComplexMatrix d = g.adjoint() * g - ComplexMatrix::Identity(g.rows(), g.cols());
  return d.operatorNorm();
}

// Simpson weights on a uniform grid with an odd number of points.
double simpson(const std::vector<double>& f, double h) {
  double s = f.front() + f.back();
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i] * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

WireTensor matrices_from_interaction(const ComplexMatrix& u,
                                     const Eigen::VectorXcd& input_state, int bond_dim,
                                     const Tolerances& tol) {
  const int site_dim = static_cast<int>(input_state.size());
  if (u.rows() != u.cols() || u.rows() != bond_dim * site_dim)
    throw std::invalid_argument("matrices_from_interaction: dimension mismatch");
  WireTensor w;
  w.bond_dim = bond_dim;
  w.site_matrices.assign(site_dim, ComplexMatrix::Zero(bond_dim, bond_dim));
  for (int i = 0; i < site_dim; ++i)
    for (int k = 0; k < bond_dim; ++k)
      for (int j = 0; j < bond_dim; ++j) {
        Complex acc = 0.0;
        for (int m = 0; m < site_dim; ++m)
          acc += u(k * site_dim + i, j * site_dim + m) * input_state[m];
        w.site_matrices[i](k, j) = acc;
      }
  w.boundary_right = Eigen::VectorXcd::Zero(bond_dim);
  w.boundary_right[0] = 1.0;
  w.completeness_defect = completeness_defect(w.site_matrices, bond_dim);
  if (w.completeness_defect > tol.completeness)
    throw NumericalContractViolation(
        "matrices_from_interaction: completeness defect " +
        std::to_string(w.completeness_defect) + " signals insufficient n_max");
  return w;
}

double completeness_defect(const std::vector<ComplexMatrix>& mats, int bond_dim) {
  ComplexMatrix sum = ComplexMatrix::Zero(bond_dim, bond_dim);
  for (const auto& a : mats) sum += a.adjoint() * a;
  return (sum - ComplexMatrix::Identity(bond_dim, bond_dim)).operatorNorm();
}

std::vector<ComplexMatrix> skew_measure(const WireTensor& w,
                                        const std::vector<Eigen::RowVectorXcd>& basis_rows) {
  std::vector<ComplexMatrix> out;
  out.reserve(basis_rows.size());
  for (const auto& row : basis_rows) {
    if (row.size() != static_cast<Eigen::Index>(w.site_matrices.size()))
      throw std::invalid_argument("skew_measure: row length mismatch");
    ComplexMatrix m = ComplexMatrix::Zero(w.bond_dim, w.bond_dim);
    for (Eigen::Index i = 0; i < row.size(); ++i)
      if (row[i] != Complex(0, 0)) m += row[i] * w.site_matrices[i];
    out.push_back(std::move(m));
  }
  return out;
}

ComplexMatrix homodyne_gate(const WireTensor& w, double theta, double x) {
  const int d = static_cast<int>(w.site_matrices.size());
  std::vector<double> psi(d);
  fock::quadrature_wavefunctions(d - 1, x, psi.data());
  ComplexMatrix m = ComplexMatrix::Zero(w.bond_dim, w.bond_dim);
  for (int n = 0; n < d; ++n)
    m += std::exp(Complex(0, theta * n)) * psi[n] * w.site_matrices[n];
  return m;
}

ComplexMatrix controlled_rotation_interaction(double theta, int n_max) {
  const int d = n_max + 1;
  ComplexMatrix u = ComplexMatrix::Zero(2 * d, 2 * d);
  const ComplexMatrix r_minus = fock::rotation_op(theta, n_max).matrix;   // e^{-i theta n}
  const ComplexMatrix r_plus = fock::rotation_op(-theta, n_max).matrix;   // e^{+i theta n}
  u.topLeftCorner(d, d) = r_minus;
  u.bottomRightCorner(d, d) = r_plus;
  return u;
}

ComplexMatrix controlled_rotation_with_hadamard(double theta, int n_max) {
  const int d = n_max + 1;
  const Gate2 h = su2::hadamard();
  ComplexMatrix hh = ComplexMatrix::Zero(2 * d, 2 * d);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      hh.block(a * d, b * d, d, d) = h(a, b) * ComplexMatrix::Identity(d, d);
  return hh * controlled_rotation_interaction(theta, n_max);
}

namespace {

StepResult sample_discrete(const WireTensor& w, const CorrelationState& state,
                           const DiscreteBasis& basis, Rng& rng, const Tolerances& tol) {
  std::vector<ComplexMatrix> mats;
  if (basis.rows.empty())
    mats = w.site_matrices;
  else
    mats = skew_measure(w, basis.rows);
  std::vector<double> probs(mats.size());
  double total = 0.0;
  for (std::size_t k = 0; k < mats.size(); ++k) {
    probs[k] = (mats[k] * state).squaredNorm();
    total += probs[k];
  }
  if (std::abs(total - 1.0) > tol.probability_mass)
    throw NumericalContractViolation("sample_step: discrete probability mass defect " +
                                     std::to_string(std::abs(total - 1.0)));
  const double u = rng.uniform() * total;
  double cum = 0.0;
  std::size_t pick = mats.size() - 1;
  for (std::size_t k = 0; k < mats.size(); ++k) {
    cum += probs[k];
    if (u < cum) {
      pick = k;
      break;
    }
  }
  StepResult res;
  res.outcome = static_cast<double>(pick);
  const ComplexMatrix normalized = mats[pick] / std::sqrt(probs[pick]);
  res.state = (mats[pick] * state) / std::sqrt(probs[pick]);
  res.state /= res.state.norm();
  res.record.basis = basis.label;
  res.record.outcome = res.outcome;
  res.record.probability = probs[pick];
  res.record.gate = gate_to_floats(normalized);
  res.record.unitarity_defect = gate_unitarity_defect(normalized);
  return res;
}

}  // namespace

ContinuousCache prepare_continuous(const WireTensor& w, const ContinuousBasis& basis,
                                   const Tolerances& tol) {
  ContinuousCache cache;
  cache.theta = basis.theta;
  int n_pts = basis.initial_points | 1;
  const int d = w.bond_dim;
  for (int pass = 0; pass < 6; ++pass) {
    cache.xs.resize(n_pts);
    cache.gates.resize(n_pts);
    const double h = 2.0 * basis.x_lim / (n_pts - 1);
    ComplexMatrix accum = ComplexMatrix::Zero(d, d);
    for (int i = 0; i < n_pts; ++i) {
      cache.xs[i] = -basis.x_lim + h * i;
      cache.gates[i] = homodyne_gate(w, basis.theta, cache.xs[i]);
      const double simpson_w = (i == 0 || i == n_pts - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      accum += simpson_w * (cache.gates[i].adjoint() * cache.gates[i]);
    }
    accum *= h / 3.0;
    cache.completeness_defect = (accum - ComplexMatrix::Identity(d, d)).operatorNorm();
    if (cache.completeness_defect <= tol.quadrature) break;
    n_pts = 2 * (n_pts - 1) + 1;
  }
  return cache;
}

namespace {

StepResult sample_continuous(const WireTensor& w, const ContinuousCache& cache,
                             const CorrelationState& state, const std::string& label, Rng& rng,
                             const Tolerances& tol) {
  const std::size_t n_pts = cache.xs.size();
  const double h = cache.xs[1] - cache.xs[0];
  std::vector<double> dens(n_pts);
  for (std::size_t i = 0; i < n_pts; ++i) dens[i] = (cache.gates[i] * state).squaredNorm();
  const double total = simpson(dens, h);
  if (std::abs(total - 1.0) > tol.probability_mass)
    throw NumericalContractViolation("sample_step: continuous probability mass defect " +
                                     std::to_string(std::abs(total - 1.0)));
  // Inverse CDF on the trapezoid approximation, linear density within a cell;
  // the gate at the sampled point is then evaluated exactly.
  double trap_total = 0.0;
  for (std::size_t i = 0; i + 1 < n_pts; ++i) trap_total += 0.5 * (dens[i] + dens[i + 1]) * h;
  const double target = rng.uniform() * trap_total;
  double cum = 0.0;
  double x_star = cache.xs.back();
  for (std::size_t i = 0; i + 1 < n_pts; ++i) {
    const double cell = 0.5 * (dens[i] + dens[i + 1]) * h;
    if (target <= cum + cell || i + 2 == n_pts) {
      const double r = target - cum;
      const double a = dens[i];
      const double slope = (dens[i + 1] - dens[i]) / h;
      double t;
      if (std::abs(slope) < 1e-14 * std::max(1.0, a)) {
        t = a > 0 ? r / a : 0.5 * h;
      } else {
        const double disc = std::max(0.0, a * a + 2.0 * slope * r);
        t = (-a + std::sqrt(disc)) / slope;
      }
      x_star = cache.xs[i] + std::clamp(t, 0.0, h);
      break;
    }
    cum += cell;
  }
  const ComplexMatrix gate = homodyne_gate(w, cache.theta, x_star);
  const double density = (gate * state).squaredNorm();
  StepResult res;
  res.outcome = x_star;
  const ComplexMatrix normalized = gate / std::sqrt(density);
  res.state = (gate * state) / std::sqrt(density);
  res.state /= res.state.norm();
  res.record.basis = label;
  res.record.outcome = x_star;
  res.record.probability = density;
  res.record.gate = gate_to_floats(normalized);
  res.record.unitarity_defect = gate_unitarity_defect(normalized);
  return res;
}

}  // namespace

StepResult sample_step(const WireTensor& w, const CorrelationState& state, const Basis& basis,
                       Rng& rng, const Tolerances& tol) {
  if (std::abs(state.squaredNorm() - 1.0) > 1e-9)
    throw std::invalid_argument("sample_step: state not normalized");
  if (std::holds_alternative<DiscreteBasis>(basis))
    return sample_discrete(w, state, std::get<DiscreteBasis>(basis), rng, tol);
  const auto& cb = std::get<ContinuousBasis>(basis);
  const ContinuousCache cache = prepare_continuous(w, cb, tol);
  return sample_continuous(w, cache, state, cb.label, rng, tol);
}

StepResult sample_step(const WireTensor& w, const ContinuousCache& cache,
                       const CorrelationState& state, Rng& rng, const std::string& label,
                       const Tolerances& tol) {
  if (std::abs(state.squaredNorm() - 1.0) > 1e-9)
    throw std::invalid_argument("sample_step: state not normalized");
  return sample_continuous(w, cache, state, label, rng, tol);
}

std::vector<ComplexMatrix> two_site_matrices(const WireTensor& w1, const WireTensor& w2,
                                             const ComplexMatrix& coupling,
                                             const std::vector<Eigen::RowVectorXcd>& rows1,
                                             const std::vector<Eigen::RowVectorXcd>& rows2) {
  const int d1 = static_cast<int>(w1.site_matrices.size());
  const int d2 = static_cast<int>(w2.site_matrices.size());
  if (coupling.rows() != d1 * d2 || coupling.cols() != d1 * d2)
    throw std::invalid_argument("two_site_matrices: coupling dimension mismatch");
  // <x1,x2| W in the computational product basis.
  std::vector<Eigen::RowVectorXcd> left;
  const int n1 = rows1.empty() ? d1 : static_cast<int>(rows1.size());
  const int n2 = rows2.empty() ? d2 : static_cast<int>(rows2.size());
  left.reserve(static_cast<std::size_t>(n1) * n2);
  for (int a = 0; a < n1; ++a)
    for (int b = 0; b < n2; ++b) {
      Eigen::RowVectorXcd row = Eigen::RowVectorXcd::Zero(d1 * d2);
      if (rows1.empty() && rows2.empty()) {
        row = coupling.row(a * d2 + b);
      } else {
        Eigen::RowVectorXcd bra = Eigen::RowVectorXcd::Zero(d1 * d2);
        for (int i = 0; i < d1; ++i)
          for (int j = 0; j < d2; ++j) {
            const Complex c1 = rows1.empty() ? Complex(i == a ? 1 : 0, 0) : rows1[a][i];
            const Complex c2 = rows2.empty() ? Complex(j == b ? 1 : 0, 0) : rows2[b][j];
            bra[i * d2 + j] = c1 * c2;
          }
        row = bra * coupling;
      }
      left.push_back(std::move(row));
    }
  const int db = w1.bond_dim * w2.bond_dim;
  std::vector<ComplexMatrix> out;
  out.reserve(left.size());
  for (const auto& row : left) {
    ComplexMatrix m = ComplexMatrix::Zero(db, db);
    for (int i = 0; i < d1; ++i)
      for (int j = 0; j < d2; ++j) {
        const Complex c = row[i * d2 + j];
        if (c == Complex(0, 0)) continue;
        m += c * Eigen::kroneckerProduct(w1.site_matrices[i], w2.site_matrices[j]).eval();
      }
    out.push_back(std::move(m));
  }
  return out;
}

EncodedWire encode(const WireTensor& w, const EncodingIsometry& iso) {
  const ComplexMatrix& v = iso.v;
  if (v.rows() != w.bond_dim || v.cols() > v.rows())
    throw std::invalid_argument("encode: isometry shape mismatch");
  if ((v.adjoint() * v - ComplexMatrix::Identity(v.cols(), v.cols())).operatorNorm() > 1e-12)
    throw std::invalid_argument("encode: V is not an isometry");
  EncodedWire out;
  out.wire.bond_dim = static_cast<int>(v.cols());
  const ComplexMatrix proj =
      ComplexMatrix::Identity(v.rows(), v.rows()) - v * v.adjoint();
  for (const auto& a : w.site_matrices) {
    out.wire.site_matrices.push_back(v.adjoint() * a * v);
    out.invariance_defect = std::max(out.invariance_defect, (proj * a * v).operatorNorm());
  }
  out.wire.boundary_right = v.adjoint() * w.boundary_right;
  out.wire.completeness_defect = completeness_defect(out.wire.site_matrices, out.wire.bond_dim);
  return out;
}

double fidelity_min_conditioned(const Gate2& product) {
  const Eigen::Vector2d s = Eigen::JacobiSVD<Gate2>(product).singularValues();
  const double sum = s[0] + s[1];
  if (sum <= 0) return 0.0;
  return 4.0 * s[0] * s[1] / (sum * sum);
}

TransportResult transport_fidelity_trace(const WireTensor& w, int n_steps, const Basis& basis,
                                         int n_traj, std::uint64_t master_seed, int threads,
                                         bool keep_records, const Tolerances& tol) {
  if (w.bond_dim != 2)
    throw std::invalid_argument("transport_fidelity_trace: bond dimension 2 only");
  std::vector<std::vector<double>> f(n_traj, std::vector<double>(n_steps + 1, 1.0));
  std::vector<Gate2> finals(n_traj, Gate2::Identity());
  std::vector<std::vector<StepRecord>> recs(keep_records ? n_traj : 0);

  // The gate family of a continuous basis is fixed across steps and
  // trajectories; build its grid once.
  std::optional<ContinuousCache> cache;
  std::string basis_label;
  if (std::holds_alternative<ContinuousBasis>(basis)) {
    const auto& cb = std::get<ContinuousBasis>(basis);
    cache = prepare_continuous(w, cb, tol);
    basis_label = cb.label;
  }

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= n_traj) return;
      Rng rng(master_seed, static_cast<std::uint64_t>(t));
      CorrelationState state = w.boundary_right;
      state /= state.norm();
      Gate2 product = Gate2::Identity();
      for (int s = 0; s < n_steps; ++s) {
        StepResult step = cache ? sample_continuous(w, *cache, state, basis_label, rng, tol)
                                : sample_step(w, state, basis, rng, tol);
        state = step.state;
        Gate2 g;
        g << Complex(step.record.gate[0], step.record.gate[1]),
            Complex(step.record.gate[2], step.record.gate[3]),
            Complex(step.record.gate[4], step.record.gate[5]),
            Complex(step.record.gate[6], step.record.gate[7]);
        product = g * product;
        product /= product.norm() / std::sqrt(2.0);  // scale only; f is scale-invariant
        f[t][s + 1] = fidelity_min_conditioned(product);
        if (keep_records) {
          step.record.traj = t;
          step.record.step = s;
          recs[t].push_back(std::move(step.record));
        }
      }
      finals[t] = product;
    }
  };
  std::vector<std::thread> pool;
  const int n_workers = std::max(1, threads);
  pool.reserve(n_workers);
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  TransportResult out;
  out.mean_f.assign(n_steps + 1, 0.0);
  out.mean_infidelity.assign(n_steps + 1, 0.0);
  out.min_f.assign(n_steps + 1, 1.0);
  for (int t = 0; t < n_traj; ++t)
    for (int s = 0; s <= n_steps; ++s) {
      out.mean_f[s] += f[t][s];
      out.mean_infidelity[s] += 1.0 - f[t][s];
      out.min_f[s] = std::min(out.min_f[s], f[t][s]);
    }
  for (int s = 0; s <= n_steps; ++s) {
    out.mean_f[s] /= n_traj;
    out.mean_infidelity[s] /= n_traj;
  }
  out.final_products = std::move(finals);
  if (keep_records)
    for (auto& r : recs)
      for (auto& rec : r) out.records.push_back(std::move(rec));
  return out;
}

double transport_blind_fidelity(const std::vector<Gate2>& products, Rng& rng) {
  if (products.empty()) return 1.0;
  // For a fixed undo U, the figure is E over records of min_psi
  // |<psi|U M|psi>|^2 / ||M psi||^2; the min is taken on a Bloch grid.
  auto value_for = [&](const Gate2& u) {
    double acc = 0.0;
    for (const auto& m : products) {
      const Gate2 k = u * m;
      double worst = 1.0;
      const int na = 24, nb = 24;
      for (int ia = 0; ia <= na; ++ia) {
        const double a = 3.141592653589793 * ia / na;
        for (int ib = 0; ib < nb; ++ib) {
          const double b = 6.283185307179586 * ib / nb;
          Eigen::Vector2cd psi(std::cos(0.5 * a),
                               std::exp(Complex(0, b)) * std::sin(0.5 * a));
          const double den = (m * psi).squaredNorm();
          if (den < 1e-30) continue;
          const Complex ov = psi.adjoint() * (k * psi);
          worst = std::min(worst, std::norm(ov) / den);
        }
      }
      acc += worst;
    }
    return acc / static_cast<double>(products.size());
  };
  // Candidates: identity plus the adjoint polar factors of a few products,
  // plus random unitaries; keep the best.
  double best = value_for(Gate2::Identity());
  for (std::size_t i = 0; i < std::min<std::size_t>(products.size(), 8); ++i) {
    Eigen::JacobiSVD<Gate2> svd(products[i], Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Gate2 polar = svd.matrixU() * svd.matrixV().adjoint();
    best = std::max(best, value_for(polar.adjoint()));
  }
  for (int i = 0; i < 48; ++i) best = std::max(best, value_for(su2::haar_random_su2(rng)));
  return best;
}

WireTensor synthetic_ratio_wire(double ratio) {
  if (ratio <= 0 || ratio > 1)
    throw std::invalid_argument("synthetic_ratio_wire: ratio in (0,1] required");
  WireTensor w;
  w.bond_dim = 2;
  const double c = 1.0 / std::sqrt(1.0 + ratio * ratio);
  Gate2 a0;
  a0 << c, 0, 0, c * ratio;
  const Gate2 a1 = su2::hadamard() * Gate2(Eigen::Vector2cd(c * ratio, c).asDiagonal());
  w.site_matrices = {a0, a1};
  w.boundary_right = Eigen::Vector2cd(1, 0);
  w.completeness_defect = completeness_defect(w.site_matrices, 2);
  return w;
}

}  // namespace cvmbqc::wire
