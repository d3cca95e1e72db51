#pragma once

namespace rsg {

/// Uniform partition t_k = kT/N, k = 0..N, of [0, T].
struct TimeGrid {
  double T = 1.0;
  int N = 1;

  double dt() const { return T / N; }
  double t(int k) const { return k * T / N; }
  bool operator==(const TimeGrid&) const = default;
};

}  // namespace rsg
