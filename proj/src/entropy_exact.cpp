#include "sitekit/entropy_exact.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sitekit/errors.hpp"

namespace sitekit {

CharMatrix characteristic_matrix(const Pcfg& g) {
  const auto n = static_cast<Eigen::Index>(g.nonterminals().size());
  CharMatrix m = CharMatrix::Zero(n, n);
  for (const auto& r : g.rules())
    for (const auto& s : r.rhs)
      if (!s.terminal) m(r.lhs, s.index) += r.prob;
  return m;
}

EntropyVector local_entropies(const Pcfg& g) {
  const auto n = static_cast<Eigen::Index>(g.nonterminals().size());
  EntropyVector h = EntropyVector::Zero(n);
  for (std::uint32_t a = 0; a < g.nonterminals().size(); ++a) {
    double acc = 0.0;
    for (auto r : g.rules_of(a)) {
      const double p = g.rules()[r].prob;
      if (p > 0.0) acc -= p * std::log2(p);
    }
    h(a) = acc;
  }
  return h;
}

LengthVector local_lengths(const Pcfg& g) {
  const auto n = static_cast<Eigen::Index>(g.nonterminals().size());
  LengthVector l = LengthVector::Zero(n);
  for (const auto& r : g.rules()) l(r.lhs) += r.prob * static_cast<double>(r.terminal_count());
  return l;
}

namespace {

constexpr double kRadiusTolerance = 1e-10;
constexpr int kRadiusMaxIterations = 100000;

// Tarjan's algorithm on the sparsity pattern of m (edge i -> j iff m(i,j) > 0).
std::vector<std::vector<Eigen::Index>> strongly_connected_blocks(const CharMatrix& m) {
  const Eigen::Index n = m.rows();
  std::vector<std::vector<Eigen::Index>> adj(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (m(i, j) > 0.0) adj[i].push_back(j);

  std::vector<Eigen::Index> index(n, -1), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<Eigen::Index> stack;
  std::vector<std::vector<Eigen::Index>> blocks;
  Eigen::Index counter = 0;

  struct Frame {
    Eigen::Index v;
    std::size_t next;
  };
  for (Eigen::Index s = 0; s < n; ++s) {
    if (index[s] >= 0) continue;
    std::vector<Frame> call{{s, 0}};
    index[s] = low[s] = counter++;
    stack.push_back(s);
    on_stack[s] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.next < adj[f.v].size()) {
        const Eigen::Index w = adj[f.v][f.next++];
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const Eigen::Index v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<Eigen::Index> block;
        Eigen::Index w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          block.push_back(w);
        } while (w != v);
        blocks.push_back(std::move(block));
      }
    }
  }
  return blocks;
}

// Perron root of an irreducible non-negative block.
double irreducible_radius(const Eigen::MatrixXd& b) {
  const Eigen::Index n = b.rows();
  Eigen::MatrixXd shifted = b + Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  for (int it = 0; it < kRadiusMaxIterations; ++it) {
    Eigen::VectorXd y = shifted * x;
    const Eigen::ArrayXd ratio = y.array() / x.array();
    const double lo = ratio.minCoeff();
    const double hi = ratio.maxCoeff();
    if (hi - lo <= kRadiusTolerance * hi) return 0.5 * (lo + hi) - 1.0;
    x = y / y.maxCoeff();
  }
  throw NumericalError("power iteration did not converge in " + std::to_string(kRadiusMaxIterations) +
                       " iterations");
}

}  // namespace

double spectral_radius(const CharMatrix& m) {
  if (m.rows() != m.cols()) throw InputError("spectral radius needs a square matrix");
  if ((m.array() < 0.0).any()) throw InputError("spectral radius expects a non-negative matrix");
  if (m.rows() == 0) return 0.0;
  if (m.rows() == 1) return m(0, 0);
  double rho = 0.0;
  for (const auto& block : strongly_connected_blocks(m)) {
    if (block.size() == 1) {
      rho = std::max(rho, m(block[0], block[0]));
      continue;
    }
    const auto k = static_cast<Eigen::Index>(block.size());
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j) sub(i, j) = m(block[i], block[j]);
    rho = std::max(rho, irreducible_radius(sub));
  }
  return rho;
}

Eigen::MatrixXd solve_system(const CharMatrix& m, const Eigen::MatrixXd& v) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n || v.rows() != n) throw InputError("solve_system: dimension mismatch");
  if (n == 0) return v;
  const double rho = spectral_radius(m);
  if (rho >= 1.0) {
    std::ostringstream os;
    os << "spectral radius " << rho << " >= 1: derivational entropies and lengths diverge";
    throw DivergenceError(os.str());
  }
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - m;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    std::ostringstream os;
    os << "I - M is singular to working precision (reciprocal condition estimate " << rcond << ")";
    throw NumericalError(os.str());
  }
  Eigen::MatrixXd x = lu.solve(v);
  const double vnorm = v.cwiseAbs().maxCoeff();
  auto residual = [&] { return (a * x - v).cwiseAbs().maxCoeff(); };
  const double bound = 1e-8 * vnorm;
  if (residual() > bound) {
    x += lu.solve(v - a * x);  // one step of iterative refinement
    if (residual() > bound) {
      std::ostringstream os;
      os << "linear solve residual " << residual() << " exceeds " << bound << " (reciprocal condition estimate "
         << rcond << ")";
      throw NumericalError(os.str());
    }
  }
  return x;
}

Eigen::VectorXd solve_system(const CharMatrix& m, const Eigen::VectorXd& v) {
  return solve_system(m, Eigen::MatrixXd(v)).col(0);
}

EntropyVector derivational_entropies(const Pcfg& g) {
  return solve_system(characteristic_matrix(g), Eigen::VectorXd(local_entropies(g)));
}

double derivational_entropy(const Pcfg& g) { return derivational_entropies(g)(g.root()); }

double grammar_mlu(const Pcfg& g) {
  return solve_system(characteristic_matrix(g), Eigen::VectorXd(local_lengths(g)))(g.root());
}

RateReport entropy_rate(const Pcfg& g) {
  const CharMatrix m = characteristic_matrix(g);
  const auto n = m.rows();
  Eigen::MatrixXd rhs(n, 2);
  rhs.col(0) = local_entropies(g);
  rhs.col(1) = local_lengths(g);
  const Eigen::MatrixXd x = solve_system(m, rhs);
  RateReport rep;
  rep.entropy = x(g.root(), 0);
  rep.mlu = x(g.root(), 1);
  rep.spectral_radius = spectral_radius(m);
  if (!(rep.mlu > 0.0)) throw NumericalError("grammar MLU is zero; entropy rate undefined");
  rep.rate = rep.entropy / rep.mlu;
  return rep;
}

}  // namespace sitekit
