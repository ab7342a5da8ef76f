#pragma once

#include <Eigen/Dense>

#include "sitekit/pcfg.hpp"

namespace sitekit {

/// m(i, j): expected number of occurrences of non-terminal j produced by one
/// expansion of non-terminal i. Indexed like Pcfg::nonterminals().
using CharMatrix = Eigen::MatrixXd;
using EntropyVector = Eigen::VectorXd;
using LengthVector = Eigen::VectorXd;

struct RateReport {
  double entropy = 0.0;          // bits
  double mlu = 0.0;              // terminal symbols per derivation
  double rate = 0.0;             // bits per symbol
  double spectral_radius = 0.0;
};

CharMatrix characteristic_matrix(const Pcfg& g);

/// Entropy in bits of each non-terminal's rule choice, with 0 log 0 = 0.
EntropyVector local_entropies(const Pcfg& g);

/// Expected number of terminals emitted directly by one expansion.
LengthVector local_lengths(const Pcfg& g);

/// Largest eigenvalue modulus of a non-negative square matrix.
///
/// The matrix is split into strongly connected blocks; singleton blocks are
/// read off the diagonal, and larger (irreducible) blocks are handled by power
/// iteration on block + I from the all-ones vector, stopping once the
/// Collatz-Wielandt bounds agree to 1e-10 relative. Throws NumericalError if
/// that takes more than 1e5 iterations.
double spectral_radius(const CharMatrix& m);

/// Solves (I - M) x = v. Throws DivergenceError when the spectral radius of M
/// is at least 1, and NumericalError when the system is singular to working
/// precision or the residual exceeds 1e-8 |v|_inf.
Eigen::VectorXd solve_system(const CharMatrix& m, const Eigen::VectorXd& v);
Eigen::MatrixXd solve_system(const CharMatrix& m, const Eigen::MatrixXd& v);

/// Per-non-terminal derivational entropies (I - M)^-1 h0, in bits.
EntropyVector derivational_entropies(const Pcfg& g);

/// Derivational entropy of the grammar: the root component of
/// derivational_entropies().
double derivational_entropy(const Pcfg& g);

/// Expected number of terminals in a derivation from the root.
double grammar_mlu(const Pcfg& g);

RateReport entropy_rate(const Pcfg& g);

}  // namespace sitekit
