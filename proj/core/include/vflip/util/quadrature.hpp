#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace vflip {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// Gauss-Legendre nodes/weights by Newton iteration on P_n.
const GaussRule& gauss_legendre(int n);

/// Integrate f over [a, b] with an n-point Gauss-Legendre rule.
double integrate_gl(const std::function<double(double)>& f, double a, double b, int n);

/// Adaptive Simpson quadrature to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 48);

/// Integrate a smooth, exponentially decaying f over [0, T] with composite
/// Gauss-Legendre on dyadic windows [0,w0], [w0,2w0], [2w0,4w0], ...
double integrate_dyadic(const std::function<double(double)>& f, double w0, double T,
                        int nodes_per_window = 16);

/// Same windowing for vector-valued integrands (accumulated into acc[0..dim)).
void integrate_dyadic_vec(const std::function<void(double, double*)>& f, int dim,
                          double w0, double T, double* acc, int nodes_per_window = 16);

}  // namespace vflip
