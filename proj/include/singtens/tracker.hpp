#pragma once

#include <stdexcept>
#include <string>

#include "singtens/system.hpp"

namespace singtens {

struct TrackerConfig {
  double newton_tol = 1e-10;       // endpoint residual (max-norm) required for success
  int max_corrector_iters = 3;
  double initial_step = 0.1;
  double min_step = 1e-8;
  double max_step = 0.25;
  double step_expand = 2.0;
  double step_shrink = 0.5;
  int max_steps = 10000;
  int endpoint_refine_iters = 5;
  // Corrector converges once |dx|_inf <= corrector_tol * (1 + |x|_inf).
  double corrector_tol = 1e-9;
  double divergence_norm = 1e10;

  void validate() const {
    if (!(newton_tol > 0 && corrector_tol > 0)) throw std::invalid_argument("tracker tolerances must be positive");
    if (!(min_step > 0 && min_step <= initial_step && initial_step <= max_step)) {
      throw std::invalid_argument("tracker steps must satisfy 0 < min_step <= initial_step <= max_step");
    }
    if (!(step_shrink > 0 && step_shrink < 1 && step_expand >= 1)) {
      throw std::invalid_argument("tracker step factors out of range");
    }
    if (max_corrector_iters < 1 || max_steps < 1 || endpoint_refine_iters < 0) {
      throw std::invalid_argument("tracker iteration limits must be positive");
    }
  }
};

enum class TrackStatus { success, step_underflow, max_steps_exceeded, singular_jacobian, diverged };

inline const char* to_string(TrackStatus s) {
  switch (s) {
    case TrackStatus::success: return "success";
    case TrackStatus::step_underflow: return "step_underflow";
    case TrackStatus::max_steps_exceeded: return "max_steps_exceeded";
    case TrackStatus::singular_jacobian: return "singular_jacobian";
    case TrackStatus::diverged: return "diverged";
  }
  return "?";
}

struct TrackResult {
  TrackStatus status = TrackStatus::success;
  SystemPoint endpoint;
  double endpoint_residual = 0.0;
  int steps_taken = 0;
};

struct RefineResult {
  SystemPoint point;
  double residual = 0.0;
  int iterations = 0;
};

/// Newton's method at fixed U. Stops as soon as the residual drops below tol
/// or after `iters` updates; the final residual is always reported.
/// Throws SingularMatrix when the Jacobian is numerically singular.
inline RefineResult newton_refine(const SingularSystem& sys, const SystemPoint& p, const CTensor& U, double tol,
                                  int iters) {
  RefineResult out{p, 0.0, 0};
  CVector r = evaluate(sys, out.point, U);
  out.residual = max_norm(r);
  while (out.residual >= tol && out.iterations < iters) {
    const CVector dx = lu_solve(jacobian(sys, out.point, U), r);
    CVector v = sys.flatten(out.point);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dx[i];
    out.point = sys.unflatten(v);
    r = evaluate(sys, out.point, U);
    out.residual = max_norm(r);
    ++out.iterations;
  }
  return out;
}

namespace detail {

/// Newton corrector for the step: succeeds when updates contract and become
/// negligible within max_iters.
inline bool correct(const SingularSystem& sys, CVector& v, const CTensor& U, const TrackerConfig& cfg) {
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.max_corrector_iters; ++it) {
    const SystemPoint p = sys.unflatten(v);
    const CVector r = evaluate(sys, p, U);
    const CVector dx = lu_solve(jacobian(sys, p, U), r);
    const double step = max_norm(dx);
    if (step > 0.5 * prev) return false;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dx[i];
    if (step <= cfg.corrector_tol * (1.0 + max_norm(v))) return true;
    prev = step;
  }
  return false;
}

}  // namespace detail

/// Continues `start` along U(t) = (1-t) gamma U_from + t U_to, t: 0 -> 1.
///
/// `start` solves the system for U_from. Scaling U by gamma scales every
/// lambda_i by gamma and leaves x unchanged, so the start is moved onto the
/// effective path start gamma U_from before tracking.
inline TrackResult track(const SingularSystem& sys, const SystemPoint& start, const CTensor& U_from,
                         const CTensor& U_to, cplx gamma, const TrackerConfig& cfg) {
  cfg.validate();
  sys.check(start);
  sys.check(U_from);
  sys.check(U_to);

  TrackResult res;
  SystemPoint p0 = start;
  for (auto& l : p0.lambda) l *= gamma;
  CVector v = sys.flatten(p0);

  const CTensor A = gamma * U_from;
  const CTensor dU = U_to - A;
  auto at = [&](double t) {
    CTensor U = A;
    for (std::size_t i = 0; i < U.size(); ++i) U[i] += t * dU[i];
    return U;
  };

  double t = 0.0;
  double h = cfg.initial_step;
  int streak = 0;
  try {
    while (t < 1.0) {
      if (res.steps_taken >= cfg.max_steps) {
        res.status = TrackStatus::max_steps_exceeded;
        res.endpoint = sys.unflatten(v);
        res.endpoint_residual = residual_norm(sys, res.endpoint, U_to);
        return res;
      }
      h = std::min(h, 1.0 - t);

      // Euler predictor on J dv/dt = -dH/dt.
      const SystemPoint p = sys.unflatten(v);
      const CVector rhs = param_tangent(sys, p, dU);
      const CVector dv = lu_solve(jacobian(sys, p, at(t)), rhs);
      CVector trial = v;
      for (std::size_t i = 0; i < v.size(); ++i) trial[i] -= h * dv[i];

      const double t_next = (1.0 - t <= h) ? 1.0 : t + h;
      bool ok = false;
      try {
        ok = detail::correct(sys, trial, at(t_next), cfg);
      } catch (const SingularMatrix&) {
        ok = false;
      }
      if (ok) {
        v = std::move(trial);
        t = t_next;
        ++res.steps_taken;
        if (max_norm(v) > cfg.divergence_norm) {
          res.status = TrackStatus::diverged;
          res.endpoint = sys.unflatten(v);
          res.endpoint_residual = residual_norm(sys, res.endpoint, at(t));
          return res;
        }
        if (++streak >= 2) {
          h = std::min(h * cfg.step_expand, cfg.max_step);
          streak = 0;
        }
      } else {
        streak = 0;
        h *= cfg.step_shrink;
        if (h < cfg.min_step) {
          res.status = TrackStatus::step_underflow;
          res.endpoint = sys.unflatten(v);
          res.endpoint_residual = residual_norm(sys, res.endpoint, U_to);
          return res;
        }
      }
    }
    auto refined = newton_refine(sys, sys.unflatten(v), U_to, cfg.newton_tol, cfg.endpoint_refine_iters);
    res.endpoint = std::move(refined.point);
    res.endpoint_residual = refined.residual;
    if (max_norm(sys.flatten(res.endpoint)) > cfg.divergence_norm) {
      res.status = TrackStatus::diverged;
    } else {
      res.status = refined.residual < cfg.newton_tol ? TrackStatus::success : TrackStatus::step_underflow;
    }
  } catch (const SingularMatrix&) {
    res.status = TrackStatus::singular_jacobian;
    res.endpoint = sys.unflatten(v);
    res.endpoint_residual = residual_norm(sys, res.endpoint, U_to);
  }
  return res;
}

}  // namespace singtens
