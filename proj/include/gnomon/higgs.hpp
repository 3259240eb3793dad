#pragma once

// Truncated two-mode oscillator representation of the curved-space Hamiltonian
// and of the reservoir coupling operators, expanded to first order in the
// curvature parameter.  Everything is assembled from real symmetric (positions)
// and real antisymmetric (momenta, p = iB) matrices, so hermiticity is exact by
// construction and the spectrum comes from a real symmetric eigensolver.

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <stdexcept>
#include <vector>

#include "gnomon/common.hpp"
#include "gnomon/fock.hpp"
#include "gnomon/potential.hpp"

namespace gnomon {

struct OperatorMatrix {
  Eigen::MatrixXcd M;
  bool hermitian = false;
};

struct XPOperators {
  OperatorMatrix x1, x2, p1, p2;
};

// ladder scale set by the reference frequency (unit mass): x ~ sqrt(hbar/w0),
// p ~ sqrt(hbar w0).  With the default w0 = 1 this is the standard convention.
inline XPOperators build_xp(const FockBasis2D& b, double omega0 = 1.0, Units u = {}) {
  if (!(omega0 > 0)) throw std::invalid_argument("build_xp: omega0 must be > 0");
  const double sx = std::sqrt(u.hbar / omega0);
  const double sp = std::sqrt(u.hbar * omega0);
  const std::complex<double> im(0.0, 1.0);
  XPOperators out;
  out.x1 = {detail::position_matrix(b, 0, sx).cast<std::complex<double>>(), true};
  out.x2 = {detail::position_matrix(b, 1, sx).cast<std::complex<double>>(), true};
  out.p1 = {im * detail::momentum_b_matrix(b, 0, sp).cast<std::complex<double>>(), true};
  out.p2 = {im * detail::momentum_b_matrix(b, 1, sp).cast<std::complex<double>>(), true};
  return out;
}

namespace detail {

struct RealXP {
  Eigen::MatrixXd X1, X2;  // symmetric
  Eigen::MatrixXd B1, B2;  // antisymmetric, p = iB
};

inline RealXP real_xp(const FockBasis2D& b, double omega0, Units u) {
  const double sx = std::sqrt(u.hbar / omega0);
  const double sp = std::sqrt(u.hbar * omega0);
  return {position_matrix(b, 0, sx), position_matrix(b, 1, sx),
          momentum_b_matrix(b, 0, sp), momentum_b_matrix(b, 1, sp)};
}

// H = 1/2  	pi.pi + (lambda/2) L^2 + V with pi = p + (lambda/2)[x(x.p)+(p.x)x].
// In the real representation pi_a = i Pi_a, L = i Lam, so
// H = -1/2 Pi.Pi - (lambda/2) Lam^2 + V, exactly symmetric.
inline Eigen::MatrixXd higgs_real(const FockBasis2D& b, double lambda,
                                  const Potential& pot, Units u) {
  if (pot.kind != Potential::Kind::Harmonic)
    throw std::invalid_argument("build_higgs_hamiltonian: requires a harmonic potential");
  if (lambda < 0) throw std::invalid_argument("build_higgs_hamiltonian: lambda must be >= 0");
  const auto xp = real_xp(b, pot.omega0, u);

  const Eigen::MatrixXd C = xp.X1 * xp.B1 + xp.X2 * xp.B2;  // real part of x.p
  const Eigen::MatrixXd Ct = -C.transpose();                // real part of p.x
  const Eigen::MatrixXd Pi1 = xp.B1 + 0.5 * lambda * (xp.X1 * C + Ct * xp.X1);
  const Eigen::MatrixXd Pi2 = xp.B2 + 0.5 * lambda * (xp.X2 * C + Ct * xp.X2);

  // angular momentum, symmetrized so the matrix is exactly antisymmetric
  const Eigen::MatrixXd X1B2 = xp.X1 * xp.B2;
  const Eigen::MatrixXd X2B1 = xp.X2 * xp.B1;
  const Eigen::MatrixXd Lam =
      0.5 * (X1B2 - X1B2.transpose()) - 0.5 * (X2B1 - X2B1.transpose());

  const Eigen::MatrixXd R2 = xp.X1 * xp.X1 + xp.X2 * xp.X2;
  Eigen::MatrixXd H = -0.5 * (Pi1 * Pi1 + Pi2 * Pi2) - 0.5 * lambda * (Lam * Lam) +
                      0.5 * sqr(pot.omega0) * R2;
  return 0.5 * (H + H.transpose());  // scrub rounding asymmetry
}

}  // namespace detail

inline OperatorMatrix build_higgs_hamiltonian(const FockBasis2D& b, double lambda,
                                              const Potential& pot, Units u = {}) {
  return {detail::higgs_real(b, lambda, pot, u).cast<std::complex<double>>(), true};
}

struct EigenSolution {
  Eigen::VectorXd energies;     // ascending
  Eigen::MatrixXd vectors;      // orthonormal columns (real representation)
  std::vector<int> multiplet;   // group label per state, gap-based
  double multiplet_gap = 0.0;
};

// Dense symmetric diagonalization.  The operator must be hermitian with a real
// matrix representation (which every operator built here has); states closer
// than `gap` in energy are assigned to the same multiplet.
inline EigenSolution eigensolve(const OperatorMatrix& H, double gap = 1e-2) {
  if (!H.hermitian) throw std::invalid_argument("eigensolve: operator not flagged hermitian");
  const double scale = H.M.norm();
  if (H.M.imag().cwiseAbs().maxCoeff() > 1e-13 * (1.0 + scale))
    throw std::invalid_argument("eigensolve: expected a real-representable operator");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.M.real());
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolve: diagonalization failed");

  EigenSolution out;
  out.energies = es.eigenvalues();
  out.vectors = es.eigenvectors();
  out.multiplet_gap = gap;
  out.multiplet.resize(std::size_t(out.energies.size()));
  int group = 0;
  for (Eigen::Index i = 0; i < out.energies.size(); ++i) {
    if (i > 0 && out.energies[i] - out.energies[i - 1] > gap) ++group;
    out.multiplet[std::size_t(i)] = group;
  }
  return out;
}

struct VielbeinTerms {
  // A_j = i S[j], A'_j = i Sprime[j]; S real antisymmetric
  std::array<Eigen::MatrixXd, 3> S;
  std::array<Eigen::MatrixXd, 3> Sprime;
  double lambda = 0.0;

  OperatorMatrix A(int j) const {
    const std::complex<double> im(0.0, 1.0);
    return {im * S.at(std::size_t(j)).cast<std::complex<double>>(), true};
  }
  OperatorMatrix Aprime(int j) const {
    const std::complex<double> im(0.0, 1.0);
    return {im * Sprime.at(std::size_t(j)).cast<std::complex<double>>(), true};
  }
};

// Reservoir coupling operators A_j = p_b abar_{jb} + h.c. with the frame
// expanded through first order in lambda:
//   in-plane   abar_{gb} = d_{gb}(1 - lambda r^2/2) - lambda x_g x_b
//   out-plane  abar_{3b} = -sqrt(lambda) x_b
// plus the first-order remainder A'_j = {p_j, r^2} (in-plane only), so the
// full in-plane coupling is reassembled as A_j + lambda A'_j where needed.
// All x-products are symmetrized before use.
inline VielbeinTerms vielbein_operator_terms(const FockBasis2D& b, double lambda,
                                             double omega0 = 1.0, Units u = {}) {
  if (lambda < 0) throw std::invalid_argument("vielbein_operator_terms: lambda must be >= 0");
  const auto xp = detail::real_xp(b, omega0, u);
  const int D = b.dimension();

  const Eigen::MatrixXd R2 = xp.X1 * xp.X1 + xp.X2 * xp.X2;
  const Eigen::MatrixXd X1X2 = 0.5 * (xp.X1 * xp.X2 + xp.X2 * xp.X1);

  // frame components as real symmetric matrices, M[g][b]
  std::array<std::array<Eigen::MatrixXd, 2>, 2> M;
  const Eigen::MatrixXd diag = Eigen::MatrixXd::Identity(D, D) - 0.5 * lambda * R2;
  M[0][0] = diag - lambda * (xp.X1 * xp.X1);
  M[1][1] = diag - lambda * (xp.X2 * xp.X2);
  M[0][1] = -lambda * X1X2;
  M[1][0] = M[0][1];

  const std::array<const Eigen::MatrixXd*, 2> B = {&xp.B1, &xp.B2};
  auto anti = [](const Eigen::MatrixXd& Bm, const Eigen::MatrixXd& Sym) {
    return Eigen::MatrixXd(Bm * Sym + Sym * Bm);  // exactly antisymmetric
  };

  VielbeinTerms out;
  out.lambda = lambda;
  for (int g = 0; g < 2; ++g) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(D, D);
    for (int be = 0; be < 2; ++be) S += anti(*B[std::size_t(be)], M[std::size_t(g)][std::size_t(be)]);
    out.S[std::size_t(g)] = S;
    out.Sprime[std::size_t(g)] = anti(*B[std::size_t(g)], R2);
  }
  const double sq = std::sqrt(lambda);
  out.S[2] = -sq * (anti(xp.B1, xp.X1) + anti(xp.B2, xp.X2));
  out.Sprime[2] = Eigen::MatrixXd::Zero(D, D);
  return out;
}

struct CouplingElements {
  std::array<std::complex<double>, 3> V;   // <n| A_j |m>
  std::array<std::complex<double>, 3> Vp;  // <n| A'_j |m>
};

inline CouplingElements matrix_elements(const EigenSolution& eig, const VielbeinTerms& terms,
                                        int m, int n) {
  const Eigen::Index D = eig.vectors.rows();
  if (m < 0 || n < 0 || m >= D || n >= D)
    throw std::invalid_argument("matrix_elements: state index out of range");
  CouplingElements out;
  const Eigen::VectorXd& vm = eig.vectors.col(m);
  const Eigen::VectorXd& vn = eig.vectors.col(n);
  for (int j = 0; j < 3; ++j) {
    out.V[std::size_t(j)] = std::complex<double>(0.0, vn.dot(terms.S[std::size_t(j)] * vm));
    out.Vp[std::size_t(j)] = std::complex<double>(0.0, vn.dot(terms.Sprime[std::size_t(j)] * vm));
  }
  return out;
}

}  // namespace gnomon
