#include "mzmesh/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mzmesh {

void InitConfig::validate() const {
  std::string problems;
  const auto complain = [&problems](const std::string& p) {
    if (!problems.empty()) problems += "; ";
    problems += p;
  };

  if (widths_per_taper < 1) complain("widths_per_taper must be at least 1");
  if (length_min_um < 1.0 * (widths_per_taper + 1)) {
    complain("length_min_um must be at least 1 um per width segment, i.e. " +
             std::to_string(widths_per_taper + 1) + " um");
  }
  if (width_jitter_nm < 0.0) complain("width_jitter_nm must be non-negative");
  if (length_jitter_um < 0.0) complain("length_jitter_um must be non-negative");
  const double lo = default_width_nm + width_offset_nm - width_jitter_nm;
  const double hi = default_width_nm + width_offset_nm + width_jitter_nm;
  if (lo < width_min_nm || hi > width_max_nm) {
    complain("initial widths [" + std::to_string(lo) + ", " + std::to_string(hi) +
             "] nm must lie within [" + std::to_string(width_min_nm) + ", " +
             std::to_string(width_max_nm) + "] nm");
  }
  if (length_max_um - length_jitter_um < length_min_um) {
    complain("length_jitter_um must not push initial lengths below length_min_um");
  }
  if (length_max_um < length_min_um) complain("length_max_um must be at least length_min_um");
  if (!problems.empty()) throw std::invalid_argument(problems);
}

std::vector<double> initialize_parameters(const NetworkTopology& topology,
                                          const InitConfig& config) {
  config.validate();
  UniformRng rng(config.seed);
  const int xi = config.widths_per_taper;

  std::vector<double> params;
  params.reserve(static_cast<std::size_t>(topology.unit_count()) * 4 * (xi + 1));
  for (int u = 0; u < topology.unit_count(); ++u) {
    for (int t = 0; t < 4; ++t) {
      for (int i = 0; i < xi; ++i) {
        const double w_nm =
            config.default_width_nm + config.width_offset_nm + rng.symmetric() * config.width_jitter_nm;
        params.push_back(w_nm * 1e-3);
      }
      params.push_back(config.length_max_um - rng.unit() * config.length_jitter_um);
    }
  }
  return params;
}

double LearningRateSchedule::operator()(std::size_t iteration) const {
  return std::max(floor, initial * std::exp(-static_cast<double>(iteration) / decay_iterations));
}

double learning_rate(std::size_t iteration) { return LearningRateSchedule{}(iteration); }

OptimizerState make_optimizer_state(const DeviceState& device) {
  device.validate();
  OptimizerState st;
  st.params = device.params;
  st.best_params = device.params;
  st.first_moment.assign(device.params.size(), 0.0);
  st.second_moment.assign(device.params.size(), 0.0);
  st.bounds = device.config.bounds;
  st.length_slot.resize(device.params.size());
  for (std::size_t i = 0; i < device.params.size(); ++i) {
    st.length_slot[i] = is_length_slot(device.config, i) ? 1 : 0;
  }
  return st;
}

void adam_step(OptimizerState& st, std::span<const double> grad) {
  if (grad.size() != st.params.size()) {
    throw std::invalid_argument("gradient length does not match parameter vector");
  }
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw std::runtime_error("non-finite gradient at parameter " + std::to_string(i) +
                               " in iteration " + std::to_string(st.iteration + 1));
    }
  }

  st.iteration += 1;
  const double t = static_cast<double>(st.iteration);
  const double bc1 = 1.0 - std::pow(st.adam.beta1, t);
  const double bc2 = 1.0 - std::pow(st.adam.beta2, t);

  for (std::size_t i = 0; i < grad.size(); ++i) {
    double& m = st.first_moment[i];
    double& v = st.second_moment[i];
    m = st.adam.beta1 * m + (1.0 - st.adam.beta1) * grad[i];
    v = st.adam.beta2 * v + (1.0 - st.adam.beta2) * grad[i] * grad[i];
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    double x = st.params[i] - st.learning_rate * m_hat / (std::sqrt(v_hat) + st.adam.epsilon);

    const bool length = st.length_slot[i] != 0;
    const double lo = length ? st.bounds.length_min_um : st.bounds.width_min_um;
    const double hi = length ? st.bounds.length_max_um : st.bounds.width_max_um;
    if (x < lo) x = lo;
    if (x > hi) x = hi;
    st.params[i] = x;
  }
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::converged: return "converged";
    case StopReason::max_iterations: return "max_iterations";
    case StopReason::user_abort: return "user_abort";
  }
  return "unknown";
}

namespace {

// True when every successive relative change across the trailing `window`
// recorded objectives is below tolerance.
bool window_converged(const std::vector<TracePoint>& points, double tolerance, int window) {
  if (static_cast<int>(points.size()) < window || window < 2) return false;
  const std::size_t first = points.size() - window;
  for (std::size_t i = first + 1; i < points.size(); ++i) {
    const double cur = points[i].objective;
    const double prev = points[i - 1].objective;
    const double denom = std::max(cur, prev);
    const double change = denom == 0.0 ? 0.0 : std::abs(cur - prev) / denom;
    if (change >= tolerance) return false;
  }
  return true;
}

}  // namespace

bool convergence_check(const OptimizationTrace& trace, const ConvergenceSettings& settings) {
  if (trace.points.size() >= settings.max_iterations) return true;
  return window_converged(trace.points, settings.relative_tolerance, settings.window);
}

OptimizationTrace optimize_device(DeviceState& device, const DesignObjective& objective,
                                  const OptimizeOptions& options) {
  using clock = std::chrono::steady_clock;
  const auto run_start = clock::now();

  OptimizerState st = make_optimizer_state(device);
  GradientWorkspace ws;
  OptimizationTrace trace;
  trace.stop_reason = StopReason::max_iterations;

  for (std::size_t iter = 0; iter < options.convergence.max_iterations; ++iter) {
    if (options.abort && options.abort->load()) {
      trace.stop_reason = StopReason::user_abort;
      break;
    }
    const auto iter_start = clock::now();
    st.learning_rate = options.schedule(iter);
    device.params = st.params;
    const GradientReport report = gradient(device, objective, ws);

    if (report.objective < st.best_objective) {
      st.best_objective = report.objective;
      st.best_params = st.params;
      st.best_iteration = iter;
    }

    const double wall_ms =
        std::chrono::duration<double, std::milli>(clock::now() - iter_start).count();
    trace.points.push_back(
        TracePoint{iter, report.objective, report.penalty, st.learning_rate, wall_ms});

    if (options.checkpoint_every > 0 && iter % options.checkpoint_every == 0) {
      trace.checkpoints.push_back(Checkpoint{iter, st.params});
    }

    if (window_converged(trace.points, options.convergence.relative_tolerance,
                         options.convergence.window)) {
      trace.stop_reason = StopReason::converged;
      break;
    }

    adam_step(st, report.gradient);
  }

  device.params = st.best_params;
  trace.best_iteration = st.best_iteration;
  trace.best_objective = st.best_objective;
  trace.total_wall_ms = std::chrono::duration<double, std::milli>(clock::now() - run_start).count();
  return trace;
}

}  // namespace mzmesh
