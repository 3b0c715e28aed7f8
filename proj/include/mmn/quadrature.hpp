#pragma once

#include <functional>
#include <vector>

namespace mmn {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

// Cached n-point Gauss-Legendre rule. Thread-safe.
const GaussRule& gauss_legendre(int n);

double gl_integrate(const std::function<double(double)>& f, double a, double b, int n);

struct QuadOptions {
  double rel_tol = 1e-13;
  int panel_nodes = 20;
  int max_depth = 48;
  double tail_drop = 64.0;  // panels are cut where log f falls this far below its peak
};

// log of the integral of exp(logf) over [lo, hi] for a unimodal logf.
// xm/width locate the peak; both are hints only, the panel recursion does the rest.
// Throws QuadratureNotConverged.
double log_integrate_unimodal(const std::function<double(double)>& logf, double lo, double hi,
                              double xm, double width, const QuadOptions& opt = {});

// Golden-section maximiser for a unimodal function on [lo, hi].
double golden_argmax(const std::function<double(double)>& f, double lo, double hi,
                     double xtol = 1e-10, int max_iter = 300);

}  // namespace mmn
