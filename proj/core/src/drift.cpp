#include "shiftlab/drift.hpp"

#include "shiftlab/models.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace shiftlab::drift {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

ConceptKind concept_kind_from_string(const std::string& name) {
  if (name == "rotating-halfspace") return ConceptKind::RotatingHalfspace;
  if (name == "shifting-threshold") return ConceptKind::ShiftingThreshold;
  if (name == "abrupt-switch") return ConceptKind::AbruptSwitch;
  throw std::invalid_argument("unknown concept kind: " + name);
}

std::string to_string(ConceptKind kind) {
  switch (kind) {
    case ConceptKind::RotatingHalfspace: return "rotating-halfspace";
    case ConceptKind::ShiftingThreshold: return "shifting-threshold";
    case ConceptKind::AbruptSwitch: return "abrupt-switch";
  }
  throw std::invalid_argument("unknown concept kind");
}

Strategy strategy_from_string(const std::string& name) {
  if (name == "sliding-window") return Strategy::SlidingWindow;
  if (name == "mixed-refresh") return Strategy::MixedRefresh;
  if (name == "decay-weighted") return Strategy::DecayWeighted;
  if (name == "detect-and-reset") return Strategy::DetectAndReset;
  throw std::invalid_argument("unknown tracking strategy: " + name);
}

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::SlidingWindow: return "sliding-window";
    case Strategy::MixedRefresh: return "mixed-refresh";
    case Strategy::DecayWeighted: return "decay-weighted";
    case Strategy::DetectAndReset: return "detect-and-reset";
  }
  throw std::invalid_argument("unknown tracking strategy");
}

ConceptSequence::ConceptSequence(ConceptKind kind, double delta,
                                 std::uint64_t seed, int switch_step)
    : kind_(kind), delta_(delta), switch_step_(switch_step) {
  detail::require(delta >= 0.0 && delta <= 1.0, "ConceptSequence: delta outside [0,1]");
  detail::require(switch_step >= 0, "ConceptSequence: negative switch step");
  CounterRng rng(seed);
  direction_ = rng.next_double() < 0.5 ? -1.0 : 1.0;
  if (kind_ == ConceptKind::ShiftingThreshold)
    phase0_ = rng.next_double() - 0.5;  // start away from the edges
  else
    phase0_ = 2.0 * kPi * rng.next_double();
}

namespace {

// Triangle-wave fold of tau into [-1, 1].
double reflect_into_unit(double tau) {
  double y = std::fmod(tau + 1.0, 4.0);
  if (y < 0.0) y += 4.0;
  return y <= 2.0 ? y - 1.0 : 3.0 - y;
}

}  // namespace

int ConceptSequence::label(int t, const Vector& x) const {
  detail::require(x.size() == 2, "ConceptSequence: features must be 2-D");
  switch (kind_) {
    case ConceptKind::RotatingHalfspace: {
      const double phi = phase0_ + direction_ * t * kPi * delta_;
      return std::cos(phi) * x[0] + std::sin(phi) * x[1] >= 0.0 ? 1 : 0;
    }
    case ConceptKind::ShiftingThreshold: {
      const double theta = reflect_into_unit(phase0_ + direction_ * t * 2.0 * delta_);
      return x[0] >= theta ? 1 : 0;
    }
    case ConceptKind::AbruptSwitch: {
      const int base =
          std::cos(phase0_) * x[0] + std::sin(phase0_) * x[1] >= 0.0 ? 1 : 0;
      return t < switch_step_ ? base : 1 - base;
    }
  }
  throw std::invalid_argument("unknown concept kind");
}

Matrix ConceptSequence::sample_points(int n, CounterRng& rng) const {
  detail::require(n >= 0, "sample_points: negative count");
  Matrix pts(n, 2);
  for (int i = 0; i < n; ++i) {
    if (kind_ == ConceptKind::ShiftingThreshold) {
      pts(i, 0) = 2.0 * rng.next_double() - 1.0;
      pts(i, 1) = 2.0 * rng.next_double() - 1.0;
    } else {
      const double radius = std::sqrt(rng.next_double());
      const double angle = 2.0 * kPi * rng.next_double();
      pts(i, 0) = radius * std::cos(angle);
      pts(i, 1) = radius * std::sin(angle);
    }
  }
  return pts;
}

ConceptSequence make_concept(ConceptKind kind, double delta, std::uint64_t seed,
                             int switch_step) {
  return ConceptSequence(kind, delta, seed, switch_step);
}

std::vector<int> drift_detector(const std::vector<double>& losses, int window,
                                double threshold) {
  detail::require(window >= 2, "drift_detector: window must be >= 2");
  std::vector<int> events;
  std::size_t start = 0;
  const std::size_t w = static_cast<std::size_t>(window);
  for (std::size_t t = 0; t < losses.size(); ++t) {
    if (t + 1 < start + 2 * w) continue;
    double recent = 0.0, reference = 0.0;
    for (std::size_t k = 0; k < w; ++k) {
      recent += losses[t - k];
      reference += losses[t - w - k];
    }
    if ((recent - reference) / static_cast<double>(w) > threshold) {
      events.push_back(static_cast<int>(t));
      start = t + 1;
    }
  }
  return events;
}

namespace {

// Constant fallback for windows where only one class is present.
struct TrackedModel {
  std::optional<models::SoftmaxClassifier> clf;
  int constant_label = 0;

  int predict(const Vector& x) const {
    return clf ? clf->predict(x) : constant_label;
  }
  double error_rate(const Matrix& X, const IntVector& y) const {
    double wrong = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      wrong += predict(X.row(i)) != y[i] ? 1.0 : 0.0;
    return wrong / static_cast<double>(X.rows());
  }
};

TrackedModel train_model(const Matrix& X, const IntVector& y, const Vector& weights,
                         const TrackingOptions& options) {
  int first = y[0];
  bool degenerate = true;
  for (Eigen::Index i = 1; i < y.size() && degenerate; ++i)
    degenerate = y[i] == first;
  if (degenerate) return TrackedModel{std::nullopt, first};

  LabeledDataset data(X, y.cast<double>());
  models::SoftmaxOptions fit_options;
  fit_options.max_iter = options.learner_max_iter;
  return TrackedModel{
      models::fit_softmax(data, weights, options.learner_reg, fit_options), 0};
}

struct Observation {
  Vector x;
  int y;
  int born;
};

}  // namespace

RiskTrace simulate_tracking(const ConceptSequence& sequence, Strategy strategy,
                            int m, int steps, int samples_per_step,
                            std::uint64_t seed, const TrackingOptions& options) {
  detail::require(m >= 1, "simulate_tracking: window must be >= 1");
  detail::require(steps >= 0, "simulate_tracking: negative step count");
  detail::require(samples_per_step >= 1, "simulate_tracking: empty step batch");
  detail::require(options.eval_samples >= 1, "simulate_tracking: empty eval batch");

  RiskTrace trace{.strategy = to_string(strategy), .window = m};
  CounterRng rng(derive_seed(seed, 0x5eed));
  std::vector<Observation> history;
  std::vector<double> stream_losses;
  TrackedModel model{std::nullopt, 0};
  std::size_t reset_start = 0;

  for (int t = 0; t < steps; ++t) {
    const Matrix batch = sequence.sample_points(samples_per_step, rng);
    IntVector batch_labels(samples_per_step);
    for (int i = 0; i < samples_per_step; ++i)
      batch_labels[i] = sequence.label(t, batch.row(i));

    if (strategy == Strategy::DetectAndReset) {
      // Prequential loss of the standing model on the fresh batch feeds the
      // change detector; an event drops all pre-event history.
      if (t > 0) {
        stream_losses.push_back(model.error_rate(batch, batch_labels));
        const std::vector<int> events = drift_detector(
            stream_losses, options.detector_window, options.detector_threshold);
        if (!events.empty() &&
            events.back() == static_cast<int>(stream_losses.size()) - 1) {
          trace.detection_steps.push_back(t);
          reset_start = history.size();
        }
      }
    }

    for (int i = 0; i < samples_per_step; ++i)
      history.push_back({batch.row(i), batch_labels[i], t});

    // Assemble the training set for this strategy.
    std::vector<Eigen::Index> rows;
    std::vector<double> weights;
    const std::size_t total = history.size();
    switch (strategy) {
      case Strategy::SlidingWindow: {
        const std::size_t take = std::min<std::size_t>(m, total);
        for (std::size_t i = total - take; i < total; ++i) rows.push_back(i);
        break;
      }
      case Strategy::MixedRefresh: {
        // Fresh window plus a uniform subsample of half that much old data.
        const std::size_t take = std::min<std::size_t>(m, total);
        const std::size_t old_count = total - take;
        for (std::size_t i = total - take; i < total; ++i) rows.push_back(i);
        const std::size_t extra = std::min<std::size_t>(m / 2, old_count);
        for (std::size_t k = 0; k < extra; ++k)
          rows.push_back(static_cast<Eigen::Index>(rng.next_below(old_count)));
        break;
      }
      case Strategy::DecayWeighted: {
        // Weights exp(-age/tau); ages beyond ~7 tau contribute nothing.
        const int horizon = static_cast<int>(std::ceil(options.decay_tau * 7.0));
        for (std::size_t i = 0; i < total; ++i) {
          const int age = t - history[i].born;
          if (age > horizon) continue;
          rows.push_back(i);
          weights.push_back(std::exp(-age / options.decay_tau));
        }
        break;
      }
      case Strategy::DetectAndReset: {
        for (std::size_t i = reset_start; i < total; ++i) rows.push_back(i);
        break;
      }
    }

    Matrix X(rows.size(), 2);
    IntVector y(rows.size());
    Vector w(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      X.row(k) = history[rows[k]].x;
      y[k] = history[rows[k]].y;
      w[k] = weights.empty() ? 1.0 : weights[k];
    }
    model = train_model(X, y, w, options);

    // True-risk estimate against the next concept.
    const Matrix eval_pts = sequence.sample_points(options.eval_samples, rng);
    double wrong = 0.0;
    for (int i = 0; i < options.eval_samples; ++i)
      wrong += model.predict(eval_pts.row(i)) != sequence.label(t + 1, eval_pts.row(i))
                   ? 1.0
                   : 0.0;
    trace.risks.push_back(wrong / options.eval_samples);
  }
  return trace;
}

double tail_mean_risk(const RiskTrace& trace, int tail) {
  detail::require(!trace.risks.empty(), "tail_mean_risk: empty trace");
  const std::size_t take =
      std::min<std::size_t>(std::max(tail, 1), trace.risks.size());
  double sum = 0.0;
  for (std::size_t i = trace.risks.size() - take; i < trace.risks.size(); ++i)
    sum += trace.risks[i];
  return sum / static_cast<double>(take);
}

namespace {

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

SweepResult tradeoff_sweep(ConceptKind kind, const std::vector<double>& delta_grid,
                           const std::vector<int>& m_grid,
                           const std::vector<std::uint64_t>& seeds,
                           const SweepOptions& options) {
  detail::require(!delta_grid.empty() && !m_grid.empty(), "tradeoff_sweep: empty grid");
  detail::require(!seeds.empty(), "tradeoff_sweep: no seeds");

  SweepResult result{.delta_grid = delta_grid,
                     .m_grid = m_grid,
                     .median_risk = Matrix(delta_grid.size(), m_grid.size())};
  result.seed_risk.assign(seeds.size(),
                          Matrix(delta_grid.size(), m_grid.size()));
  for (std::size_t a = 0; a < delta_grid.size(); ++a) {
    for (std::size_t b = 0; b < m_grid.size(); ++b) {
      std::vector<double> cell;
      cell.reserve(seeds.size());
      for (std::size_t si = 0; si < seeds.size(); ++si) {
        const ConceptSequence sequence =
            make_concept(kind, delta_grid[a], derive_seed(seeds[si], 17));
        const RiskTrace trace = simulate_tracking(
            sequence, options.strategy, m_grid[b], options.steps,
            options.samples_per_step, seeds[si], options.tracking);
        const double risk = tail_mean_risk(trace, options.tail);
        result.seed_risk[si](a, b) = risk;
        cell.push_back(risk);
      }
      result.median_risk(a, b) = median(std::move(cell));
    }
  }

  for (std::size_t b = 0; b < m_grid.size(); ++b)
    for (std::size_t a = 0; a + 1 < delta_grid.size(); ++a)
      if (result.median_risk(a + 1, b) < result.median_risk(a, b))
        ++result.delta_inversions;
  for (std::size_t a = 0; a < delta_grid.size(); ++a)
    for (std::size_t b = 0; b + 1 < m_grid.size(); ++b)
      if (result.median_risk(a, b + 1) > result.median_risk(a, b))
        ++result.m_inversions;
  return result;
}

}  // namespace shiftlab::drift
