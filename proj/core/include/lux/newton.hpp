#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lux {

// F(x) for the damped Newton driver.  Returning nullopt marks x as
// outside the domain; the line search treats it as infinite merit.
using ResidualFn = std::function<std::optional<std::vector<double>>(const std::vector<double>&)>;

struct NewtonOptions {
    double tol = 1e-10;        // convergence threshold on ||F||_inf
    int max_iter = 200;
    double backtrack = 0.5;    // step shrink factor in the Armijo search
    double min_step = 1e-12;   // give up on the line search below this
    double fd_eps = 1e-7;      // relative forward-difference perturbation
};

struct NewtonReport {
    bool converged = false;
    std::vector<double> x;
    std::vector<double> residual;
    double residual_norm = 0;  // ||F||_inf at x
    int iterations = 0;
    std::string message;       // failure reason when not converged
};

// Damped Newton with a forward-difference Jacobian and Armijo
// backtracking on the merit 0.5||F||^2.  The linear stage is partial
// pivoting Gaussian elimination, adequate for the n <= 8 systems here.
NewtonReport damped_newton(const ResidualFn& F, std::vector<double> x0,
                           const NewtonOptions& opt = {});

// In-place solve of A x = b, A given row-major n*n.  Returns false when
// a pivot falls below 1e-14 * max|A|.
bool solve_linear(std::vector<double>& A, std::vector<double>& b, int n);

}  // namespace lux
