#pragma once

#include "shiftlab/core.hpp"
#include "shiftlab/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace shiftlab::drift {

enum class ConceptKind { RotatingHalfspace, ShiftingThreshold, AbruptSwitch };

ConceptKind concept_kind_from_string(const std::string& name);
std::string to_string(ConceptKind kind);

/// Time-indexed binary concept h_t on R^2 with bounded per-step
/// disagreement under the sampling distribution:
///  - rotating-halfspace: halfspace through the origin rotating by
///    pi * delta per step; features uniform on the unit disk, so the
///    per-step disagreement mass is exactly delta.
///  - shifting-threshold: h_t(x) = 1[x_1 >= theta_t] with theta moving by
///    2 * delta per step (reflected at +-1); features uniform on [-1,1]^2.
///  - abrupt-switch: fixed halfspace complemented at switch_step (breaks
///    the slow-drift premise on purpose, for detector tests).
class ConceptSequence {
 public:
  ConceptSequence(ConceptKind kind, double delta, std::uint64_t seed,
                  int switch_step = 50);

  int label(int t, const Vector& x) const;
  Matrix sample_points(int n, CounterRng& rng) const;

  ConceptKind kind() const { return kind_; }
  double delta() const { return delta_; }
  int switch_step() const { return switch_step_; }

 private:
  ConceptKind kind_;
  double delta_;
  int switch_step_;
  double phase0_;
  double direction_;
};

ConceptSequence make_concept(ConceptKind kind, double delta, std::uint64_t seed,
                             int switch_step = 50);

enum class Strategy { SlidingWindow, MixedRefresh, DecayWeighted, DetectAndReset };

Strategy strategy_from_string(const std::string& name);
std::string to_string(Strategy strategy);

struct TrackingOptions {
  int eval_samples = 2000;
  /// Age constant (in steps) of the exponential decay weighting.
  double decay_tau = 2.0;
  int detector_window = 5;
  double detector_threshold = 0.15;
  double learner_reg = 1e-3;
  int learner_max_iter = 200;
};

struct RiskTrace {
  std::vector<double> risks;
  std::string strategy;
  int window = 0;
  std::vector<int> detection_steps;
};

/// Emits the step indices where the mean loss of the trailing window
/// exceeds the mean of the window before it by more than threshold; both
/// windows refill from scratch after an event.
std::vector<int> drift_detector(const std::vector<double>& losses, int window,
                                double threshold);

/// Runs `steps` rounds: draw samples_per_step labeled points from h_t,
/// refresh the strategy's training set, retrain the softmax learner and
/// estimate the true risk against h_{t+1} on a fresh Monte-Carlo batch.
/// Deterministic given the seed.
RiskTrace simulate_tracking(const ConceptSequence& sequence, Strategy strategy,
                            int m, int steps, int samples_per_step,
                            std::uint64_t seed,
                            const TrackingOptions& options = {});

struct SweepOptions {
  Strategy strategy = Strategy::SlidingWindow;
  int steps = 60;
  int samples_per_step = 250;
  /// Risk summary = mean over the last `tail` steps of each run.
  int tail = 50;
  TrackingOptions tracking;
};

struct SweepResult {
  std::vector<double> delta_grid;
  std::vector<int> m_grid;
  /// median over seeds of the tail-mean risk; delta indexes rows.
  Matrix median_risk;
  /// One delta x m matrix of tail-mean risks per seed, in seed order.
  std::vector<Matrix> seed_risk;
  /// Adjacent-cell monotonicity violations (risk dropping as delta grows,
  /// risk growing as m grows).
  int delta_inversions = 0;
  int m_inversions = 0;
};

double tail_mean_risk(const RiskTrace& trace, int tail);

SweepResult tradeoff_sweep(ConceptKind kind, const std::vector<double>& delta_grid,
                           const std::vector<int>& m_grid,
                           const std::vector<std::uint64_t>& seeds,
                           const SweepOptions& options = {});

}  // namespace shiftlab::drift
