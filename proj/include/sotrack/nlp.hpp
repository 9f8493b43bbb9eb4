#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace sotrack {

/// Bounds with absolute value at or above this are treated as infinite.
inline constexpr double kInfinity = 1e20;

inline bool is_finite_bound(double b) { return b > -kInfinity && b < kInfinity; }

/// Fixed sparsity structure in triplet order; values are produced in the
/// same order by the paired evaluation callback.
struct JacobianPattern {
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;
    std::size_t nnz() const { return rows.size(); }
};

/// A smooth constrained program
///
///     min f(x)  s.t.  c_E(x) = 0,  g_lo <= c_I(x) <= g_hi,  x_lo <= x <= x_hi
///
/// presented through callbacks. Jacobian rows are the equalities followed by
/// the inequalities, pattern fixed across evaluations.
///
/// When `slack_offset` is set, the variable vector already carries one
/// dedicated slack per inequality row starting at that index; the callbacks
/// ignore those entries (their Jacobian columns are empty) and the solver
/// pairs them with the inequality rows instead of allocating its own slacks.
struct Nlp {
    std::size_t num_vars = 0;
    std::vector<double> x_lo, x_hi;

    std::size_t num_eq = 0;
    std::size_t num_ineq = 0;
    std::vector<double> ineq_lo, ineq_hi;
    std::optional<std::size_t> slack_offset;

    std::function<double(std::span<const double>)> objective;
    std::function<void(std::span<const double>, std::span<double>)> objective_gradient;
    std::function<void(std::span<const double>, std::span<double>)> equalities;
    std::function<void(std::span<const double>, std::span<double>)> inequalities;
    JacobianPattern jac_pattern;
    std::function<void(std::span<const double>, std::span<double>)> jacobian;

    // Diagonal preconditioning hints. Empty x_scale means all ones. The
    // objective_scale multiplies f inside the solver only; reported values
    // stay in natural units.
    std::vector<double> x_scale;
    double objective_scale = 1.0;

    // Optional diagonal of the objective Hessian (natural units, constant
    // entries only); improves the solver's metric for stiff objectives.
    std::function<void(std::span<double>)> objective_diag;
};

}  // namespace sotrack
