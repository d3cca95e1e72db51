#include "rsg/regime.hpp"

#include <cmath>
#include <sstream>

#include "rsg/errors.hpp"

namespace rsg {

Generator Generator::validate(const Eigen::MatrixXd& rates) {
  if (rates.rows() < 1 || rates.rows() != rates.cols())
    throw Error(Errc::kInvalidArgument, "generator must be a non-empty square matrix");
  if (!rates.allFinite()) throw Error(Errc::kInvalidArgument, "generator has non-finite entries");
  const int m = static_cast<int>(rates.rows());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j && rates(i, j) < 0.0) {
        std::ostringstream os;
        os << "negative off-diagonal rate at (" << i + 1 << ", " << j + 1 << "): " << rates(i, j);
        throw Error(Errc::kNegativeOffDiagonal, os.str());
      }
  int worst = -1;
  double worst_sum = 0.0;
  for (int i = 0; i < m; ++i) {
    const double s = rates.row(i).sum();
    if (std::abs(s) > 1e-12 && std::abs(s) > std::abs(worst_sum)) {
      worst = i;
      worst_sum = s;
    }
  }
  if (worst >= 0) {
    std::ostringstream os;
    os << "row " << worst + 1 << " sums to " << worst_sum;
    throw Error(Errc::kRowSumNonzero, os.str());
  }
  return Generator(rates);
}

std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t path, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

int ChainPath::left_limit(double t) const {
  std::size_t n = 0;
  while (n < jump_times.size() && jump_times[n] < t) ++n;
  return states[n];
}

ChainPath sample_chain(const Generator& gen, int i0, double T, std::mt19937_64& rng) {
  if (i0 < 0 || i0 >= gen.size()) throw Error(Errc::kInvalidArgument, "initial regime out of range");
  if (!(T > 0.0)) throw Error(Errc::kInvalidArgument, "horizon must be positive");
  ChainPath path;
  path.horizon = T;
  path.states.push_back(i0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double t = 0.0;
  int i = i0;
  for (;;) {
    const double q = gen.exit_rate(i);
    if (q <= 0.0) break;  // absorbing
    std::exponential_distribution<double> hold(q);
    t += hold(rng);
    if (t > T) break;
    // embedded chain: pick j != i with probability lambda_ij / q
    const double u = unif(rng) * q;
    double acc = 0.0;
    int next = -1;
    for (int j = 0; j < gen.size(); ++j) {
      if (j == i) continue;
      acc += gen.rate(i, j);
      next = j;
      if (u < acc) break;
    }
    path.jump_times.push_back(t);
    path.states.push_back(next);
    i = next;
  }
  return path;
}

ChainPath sample_chain(const Generator& gen, int i0, double T, std::uint64_t seed) {
  auto rng = path_engine(seed, 0, Stream::kChain);
  return sample_chain(gen, i0, T, rng);
}

std::vector<int> project_to_grid(const ChainPath& path, int N, double T) {
  if (N < 1) throw Error(Errc::kInvalidArgument, "N must be at least 1");
  std::vector<int> out(N + 1);
  std::size_t n = 0;
  for (int k = 0; k <= N; ++k) {
    const double tk = k * T / N;
    while (n < path.jump_times.size() && path.jump_times[n] < tk) ++n;
    out[k] = path.states[n];
  }
  return out;
}

MartingaleLedger martingale_ledger(const ChainPath& path, const Generator& gen, double T) {
  const int m = gen.size();
  MartingaleLedger led;
  led.counts = Eigen::MatrixXi::Zero(m, m);
  led.compensators = Eigen::MatrixXd::Zero(m, m);
  led.occupation = Eigen::VectorXd::Zero(m);
  double last = 0.0;
  std::size_t n = 0;
  for (; n < path.jump_times.size() && path.jump_times[n] <= T; ++n) {
    led.occupation[path.states[n]] += path.jump_times[n] - last;
    last = path.jump_times[n];
    led.counts(path.states[n], path.states[n + 1]) += 1;
  }
  led.occupation[path.states[n]] += T - last;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j) led.compensators(i, j) = gen.rate(i, j) * led.occupation[i];
  return led;
}

}  // namespace rsg
