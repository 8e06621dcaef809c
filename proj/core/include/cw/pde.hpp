#pragma once

#include <functional>
#include <span>

#include "cw/diagnostics.hpp"

namespace cw {

struct StepOptions {
  // Extra passes re-freezing the diffusion coefficient at the latest iterate.
  int picard_sweeps = 0;
  double picard_tol = 1e-10;
};

// Linearly implicit backward Euler for dv/dt = s v' + w' + (phi(v) v')' in the wave frame.
// w is transported exactly, w(t, xi) = w0(xi + s (t - t0)). The right end is held at v_eps,
// the left end carries the background total flux s v_plus + w.
class Stepper {
public:
  Stepper(const Profile& profile, const State& origin, StepOptions opt = {});

  void advance(State& state, double dt);
  Field transported_w(double t) const;
  // Semi-discrete dv/dt of the scheme at the given state.
  Field rate(const State& state) const;

private:
  void faces(std::span<const double> v);
  void residual(std::span<const double> v, std::span<const double> w);

  const Profile& profile_;
  StepOptions opt_;
  Field w0_;
  double t0_;
  Field a_, r_, sub_, diag_, sup_, delta_, scratch_, iterate_;
};

State step(const State& state, double dt, const Profile& profile, StepOptions opt = {});

double default_dt(const Grid& grid, const ModelParams& p);

struct RunOptions {
  double t_end = 50.0;
  double dt = 0.0;  // <= 0 selects default_dt
  std::size_t snapshot_stride = 100;
  DiagnosticWeights weights{};
  StepOptions step{};
  // Observers always see the full state; this only controls what the trajectory stores.
  bool keep_states = true;
};

using Observer = std::function<void(const Snapshot&)>;

Trajectory run(const State& state0, const Profile& profile, const RunOptions& opt,
               std::span<const Observer> observers = {});

}  // namespace cw
