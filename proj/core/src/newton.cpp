#include "lux/newton.hpp"

#include <algorithm>
#include <cmath>

namespace lux {

bool solve_linear(std::vector<double>& A, std::vector<double>& b, int n) {
    double amax = 0.0;
    for (double v : A) amax = std::max(amax, std::abs(v));
    if (amax == 0.0) return false;
    const double tiny = 1e-14 * amax;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int row = col + 1; row < n; ++row) {
            if (std::abs(A[row * n + col]) > std::abs(A[piv * n + col])) piv = row;
        }
        if (std::abs(A[piv * n + col]) < tiny) return false;
        if (piv != col) {
            for (int k = col; k < n; ++k) std::swap(A[col * n + k], A[piv * n + k]);
            std::swap(b[col], b[piv]);
        }
        const double d = A[col * n + col];
        for (int row = col + 1; row < n; ++row) {
            const double m = A[row * n + col] / d;
            if (m == 0.0) continue;
            for (int k = col; k < n; ++k) A[row * n + k] -= m * A[col * n + k];
            b[row] -= m * b[col];
        }
    }
    for (int row = n - 1; row >= 0; --row) {
        double s = b[row];
        for (int k = row + 1; k < n; ++k) s -= A[row * n + k] * b[k];
        b[row] = s / A[row * n + row];
    }
    return true;
}

namespace {

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double merit(const std::vector<double>& F) {
    double s = 0.0;
    for (double x : F) s += x * x;
    return 0.5 * s;
}

bool finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace

NewtonReport damped_newton(const ResidualFn& F, std::vector<double> x0,
                           const NewtonOptions& opt) {
    NewtonReport rep;
    const int n = static_cast<int>(x0.size());
    auto fx = F(x0);
    if (!fx || !finite(*fx)) {
        rep.message = "initial point outside the residual domain";
        return rep;
    }
    std::vector<double> x = std::move(x0);
    std::vector<double> r = std::move(*fx);

    for (int it = 0; it < opt.max_iter; ++it) {
        rep.iterations = it;
        if (inf_norm(r) <= opt.tol) {
            rep.converged = true;
            break;
        }

        // Forward-difference Jacobian, column by column.
        std::vector<double> J(static_cast<size_t>(n) * n);
        bool jac_ok = true;
        for (int col = 0; col < n && jac_ok; ++col) {
            const double h = opt.fd_eps * std::max(1.0, std::abs(x[col]));
            std::vector<double> xp = x;
            xp[col] += h;
            auto fp = F(xp);
            if (!fp || !finite(*fp)) {
                xp[col] = x[col] - h;  // fall back to a backward difference
                fp = F(xp);
                if (!fp || !finite(*fp)) { jac_ok = false; break; }
                for (int row = 0; row < n; ++row) {
                    J[row * n + col] = (r[row] - (*fp)[row]) / h;
                }
            } else {
                for (int row = 0; row < n; ++row) {
                    J[row * n + col] = ((*fp)[row] - r[row]) / h;
                }
            }
        }
        if (!jac_ok) {
            rep.message = "Jacobian evaluation left the domain";
            break;
        }

        std::vector<double> step(r.size());
        for (int i = 0; i < n; ++i) step[i] = -r[i];
        if (!solve_linear(J, step, n)) {
            rep.message = "singular Jacobian";
            break;
        }

        const double m0 = merit(r);
        double alpha = 1.0;
        bool accepted = false;
        while (alpha >= opt.min_step) {
            std::vector<double> xt = x;
            for (int i = 0; i < n; ++i) xt[i] += alpha * step[i];
            auto ft = F(xt);
            if (ft && finite(*ft) && merit(*ft) < m0 * (1.0 - 1e-4 * alpha)) {
                x = std::move(xt);
                r = std::move(*ft);
                accepted = true;
                break;
            }
            alpha *= opt.backtrack;
        }
        if (!accepted) {
            rep.message = "line search failed";
            break;
        }
    }
    if (!rep.converged && rep.message.empty()) rep.message = "iteration budget exhausted";
    if (inf_norm(r) <= opt.tol) rep.converged = true;
    rep.x = std::move(x);
    rep.residual_norm = inf_norm(r);
    rep.residual = std::move(r);
    return rep;
}

}  // namespace lux
