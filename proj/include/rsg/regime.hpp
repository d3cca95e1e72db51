#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace rsg {

/// Transition-rate matrix of a finite-state continuous-time Markov chain.
/// Regimes are 0-based in the API.
class Generator {
 public:
  /// Single regime, zero rates.
  Generator() : rates_(Eigen::MatrixXd::Zero(1, 1)) {}

  /// Validates sign and row-sum invariants (row sums within 1e-12).
  /// Throws Error{kNegativeOffDiagonal | kRowSumNonzero | kInvalidArgument}.
  static Generator validate(const Eigen::MatrixXd& rates);

  int size() const { return static_cast<int>(rates_.rows()); }
  double rate(int i, int j) const { return rates_(i, j); }
  double exit_rate(int i) const { return -rates_(i, i); }
  const Eigen::MatrixXd& rates() const { return rates_; }

 private:
  explicit Generator(Eigen::MatrixXd rates) : rates_(std::move(rates)) {}
  Eigen::MatrixXd rates_;
};

/// Which per-path random stream to draw from.
enum class Stream : std::uint32_t { kChain = 0, kBrownian = 1 };

/// Engine for path `path` of a run with master seed `seed`. The seed
/// sequence is {seed_lo, seed_hi, path_lo, path_hi, stream}, so every
/// (seed, path, stream) triple is reproducible in isolation.
std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t path, Stream stream);

struct ChainPath {
  double horizon = 0.0;
  std::vector<double> jump_times;  // strictly increasing, in (0, horizon]
  std::vector<int> states;         // states.size() == jump_times.size() + 1

  int initial() const { return states.front(); }
  /// Regime in force just before time t (left limit).
  int left_limit(double t) const;
};

/// Exact (Gillespie) simulation on [0, T] starting in regime i0.
ChainPath sample_chain(const Generator& gen, int i0, double T, std::mt19937_64& rng);
ChainPath sample_chain(const Generator& gen, int i0, double T, std::uint64_t seed);

/// Regime per grid index k = 0..N at t_k = kT/N, left-limit convention:
/// a jump exactly at t_k leaves index k in the pre-jump regime.
std::vector<int> project_to_grid(const ChainPath& path, int N, double T);

struct MartingaleLedger {
  Eigen::MatrixXi counts;          // [M_ij](T)
  Eigen::MatrixXd compensators;    // <M_ij>(T) = lambda_ij * occupation(i)
  Eigen::VectorXd occupation;      // time spent in each regime
  Eigen::MatrixXd residuals() const { return counts.cast<double>() - compensators; }
};

MartingaleLedger martingale_ledger(const ChainPath& path, const Generator& gen, double T);

}  // namespace rsg
