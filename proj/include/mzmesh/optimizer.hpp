#pragma once

#include <atomic>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "mzmesh/gradient.hpp"
#include "mzmesh/mesh.hpp"

namespace mzmesh {

// Initialization knobs. Widths start at default + offset + jitter, lengths at
// the upper bound minus a random shortfall, so every taper begins feasible
// and close to the fabrication-friendly default.
struct InitConfig {
  double default_width_nm = 450.0;
  double width_jitter_nm = 10.0;  // typically chosen between 5 and 20
  double width_offset_nm = 40.0;  // typically chosen between 30 and 50
  double width_min_nm = 400.0;
  double width_max_nm = 520.0;
  double length_min_um = 6.0;
  double length_max_um = 10.0;
  double length_jitter_um = 2.0;
  int widths_per_taper = 5;
  std::uint64_t seed = 1;

  bool operator==(const InitConfig&) const = default;

  // Throws std::invalid_argument listing every violated constraint.
  void validate() const;
};

// Uniform variates with a platform-independent bit mapping from the
// mt19937_64 stream, so seeded runs reproduce everywhere.
class UniformRng {
 public:
  explicit UniformRng(std::uint64_t seed) : engine_(seed) {}
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }  // [0, 1)
  double symmetric() { return 2.0 * unit() - 1.0; }                           // [-1, 1)

 private:
  std::mt19937_64 engine_;
};

// Seeded initial parameter vector in slot-layout order:
//   width  = default + offset + p_w * jitter,  p_w uniform on [-1, 1)
//   length = max - p_L * jitter,               p_L uniform on [0, 1)
std::vector<double> initialize_parameters(const NetworkTopology& topology,
                                          const InitConfig& config);

// Learning rate decays exponentially from the initial value and is floored;
// with the defaults the floor is reached at iteration 1000.
struct LearningRateSchedule {
  double initial = 3e-3;
  double floor = 1e-4;
  double decay_iterations = 294.0;

  double operator()(std::size_t iteration) const;
};

double learning_rate(std::size_t iteration);

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment estimates plus the current and best-so-far parameter vectors. The
// slot kinds and bounds are captured so steps can clip in place.
struct OptimizerState {
  std::size_t iteration = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  double learning_rate = 3e-3;
  std::vector<double> params;
  double best_objective = std::numeric_limits<double>::infinity();
  std::vector<double> best_params;
  std::size_t best_iteration = 0;
  AdamSettings adam{};
  TaperBounds bounds{};
  std::vector<std::uint8_t> length_slot;
};

OptimizerState make_optimizer_state(const DeviceState& device);

// One bias-corrected moment update followed by clipping widths and lengths
// onto their feasibility intervals. Throws on a non-finite gradient.
void adam_step(OptimizerState& state, std::span<const double> grad);

enum class StopReason { converged, max_iterations, user_abort };

struct TracePoint {
  std::size_t iter = 0;
  double objective = 0.0;
  double penalty = 0.0;
  double learning_rate = 0.0;
  double wall_ms = 0.0;
};

struct Checkpoint {
  std::size_t iter = 0;
  std::vector<double> params;
};

struct OptimizationTrace {
  std::vector<TracePoint> points;
  std::vector<Checkpoint> checkpoints;
  StopReason stop_reason = StopReason::max_iterations;
  double total_wall_ms = 0.0;
  std::size_t best_iteration = 0;
  double best_objective = std::numeric_limits<double>::infinity();
};

const char* to_string(StopReason reason);

struct ConvergenceSettings {
  double relative_tolerance = 1e-3;
  int window = 10;  // iterations over which every successive change must stay small
  std::size_t max_iterations = 5000;
};

// Stop decision on the recorded objective history: either every successive
// relative change across the trailing window is below tolerance, or the
// iteration cap is reached.
bool convergence_check(const OptimizationTrace& trace, const ConvergenceSettings& settings = {});

struct OptimizeOptions {
  ConvergenceSettings convergence{};
  LearningRateSchedule schedule{};
  AdamSettings adam{};
  std::size_t checkpoint_every = 0;  // 0 disables parameter snapshots
  const std::atomic<bool>* abort = nullptr;
};

// Full training loop: gradient, Adam step, clip, record, until the stop rule
// fires. On return the device holds the best-objective parameters seen.
OptimizationTrace optimize_device(DeviceState& device, const DesignObjective& objective,
                                  const OptimizeOptions& options = {});

}  // namespace mzmesh
