#include "nuosc/pmns_fit.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "nuosc/rng.hpp"

namespace nuosc {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Entangling block between rotation layers: permutation that flips the high
// qubit exactly when the low qubit is 0. Symmetric, hence its own inverse.
constexpr std::array<int, 4> entangler_perm = {2, 1, 0, 3};  // column c maps to row perm[c]

std::array<double, 16> apply_entangler(const std::array<double, 16>& m) {
    // Left-multiply by the permutation: row r of the result is row r' of m
    // where perm[r'] == r; the permutation is an involution so r' = perm[r].
    std::array<double, 16> out{};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) out[static_cast<std::size_t>(r * 4 + c)] = m[static_cast<std::size_t>(entangler_perm[static_cast<std::size_t>(r)] * 4 + c)];
    return out;
}

std::array<double, 16> apply_rotation_layer(double high_angle, double low_angle,
                                            const std::array<double, 16>& m) {
    // Left-multiply by kron(R(high), R(low)) with R(x) the real half-angle
    // rotation [[c, -s], [s, c]].
    const double ch = std::cos(0.5 * high_angle), sh = std::sin(0.5 * high_angle);
    const double cl = std::cos(0.5 * low_angle), sl = std::sin(0.5 * low_angle);
    const double r_high[2][2] = {{ch, -sh}, {sh, ch}};
    const double r_low[2][2] = {{cl, -sl}, {sl, cl}};
    std::array<double, 16> out{};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 4; ++c) {
                double sum = 0.0;
                for (int a2 = 0; a2 < 2; ++a2)
                    for (int b2 = 0; b2 < 2; ++b2)
                        sum += r_high[a][a2] * r_low[b][b2] *
                               m[static_cast<std::size_t>((a2 * 2 + b2) * 4 + c)];
                out[static_cast<std::size_t>((a * 2 + b) * 4 + c)] = sum;
            }
    return out;
}

void require_orthogonal(const TargetUnitary& target) {
    double defect = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double dot = 0.0;
            for (int k = 0; k < 4; ++k)
                dot += target.m[static_cast<std::size_t>(k * 4 + i)] *
                       target.m[static_cast<std::size_t>(k * 4 + j)];
            defect = std::max(defect, std::abs(dot - (i == j ? 1.0 : 0.0)));
        }
    if (defect > 1e-4)
        throw std::invalid_argument("fit target is not orthogonal (defect " +
                                    std::to_string(defect) + ")");
}

// Plain gradient descent with central-difference gradients and a backtracking
// line search. Returns the number of accepted steps; x is refined in place
// until the gradient vanishes or the step size underflows.
int minimize(const std::function<double(const std::vector<double>&)>& f, std::vector<double>& x,
             int max_iterations) {
    const double grad_step = 1e-7;
    const double armijo_c = 1e-4;
    double eta = 0.1;
    double fx = f(x);
    int iterations = 0;
    std::vector<double> grad(x.size()), trial(x.size());

    for (; iterations < max_iterations; ++iterations) {
        double grad_norm_sq = 0.0, grad_inf = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double saved = x[k];
            x[k] = saved + grad_step;
            const double fp = f(x);
            x[k] = saved - grad_step;
            const double fm = f(x);
            x[k] = saved;
            grad[k] = (fp - fm) / (2.0 * grad_step);
            grad_norm_sq += grad[k] * grad[k];
            grad_inf = std::max(grad_inf, std::abs(grad[k]));
        }
        if (grad_inf < 1e-13) break;

        bool accepted = false;
        while (eta > 1e-16) {
            for (std::size_t k = 0; k < x.size(); ++k) trial[k] = x[k] - eta * grad[k];
            const double ft = f(trial);
            if (ft <= fx - armijo_c * eta * grad_norm_sq) {
                x = trial;
                fx = ft;
                eta *= 1.3;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted) break;
    }
    return iterations;
}

double max_abs_error(const std::array<double, 16>& m, const TargetUnitary& target) {
    double e = 0.0;
    for (std::size_t i = 0; i < 16; ++i) e = std::max(e, std::abs(m[i] - target.m[i]));
    return e;
}

FitResult run_one_fit(const TargetUnitary& target, const GateTemplateParams& start,
                      int max_iterations) {
    std::vector<double> x(start.angles.begin(), start.angles.end());
    const auto objective = [&target](const std::vector<double>& p) {
        GateTemplateParams g;
        std::copy(p.begin(), p.end(), g.angles.begin());
        return residual(g, target);
    };
    FitResult result;
    result.iterations = minimize(objective, x, max_iterations);
    std::copy(x.begin(), x.end(), result.params.angles.begin());
    result.params = canonicalize(result.params);
    result.residual = residual(result.params, target);
    result.max_elem_error = max_abs_error(evaluate_template(result.params), target);
    result.converged = result.max_elem_error < 1e-6;
    return result;
}

}  // namespace

double canonicalize_angle(double angle) {
    double wrapped = std::remainder(angle, 2.0 * two_pi);
    if (wrapped <= -two_pi) wrapped += 2.0 * two_pi;
    return wrapped;
}

GateTemplateParams canonicalize(const GateTemplateParams& params) {
    GateTemplateParams out;
    for (std::size_t k = 0; k < 6; ++k) out.angles[k] = canonicalize_angle(params.angles[k]);
    return out;
}

std::array<double, 16> evaluate_template(const GateTemplateParams& params) {
    std::array<double, 16> m{};
    for (int i = 0; i < 4; ++i) m[static_cast<std::size_t>(i * 4 + i)] = 1.0;
    m = apply_rotation_layer(params.angles[0], params.angles[1], m);
    m = apply_entangler(m);
    m = apply_rotation_layer(params.angles[2], params.angles[3], m);
    m = apply_entangler(m);
    m = apply_rotation_layer(params.angles[4], params.angles[5], m);
    return m;
}

double residual(const GateTemplateParams& params, const TargetUnitary& target) {
    const auto m = evaluate_template(params);
    double sum = 0.0;
    for (std::size_t i = 0; i < 16; ++i) {
        const double d = m[i] - target.m[i];
        sum += d * d;
    }
    return sum;
}

GateTemplateParams invert_params(const GateTemplateParams& params) {
    const auto& a = params.angles;
    return GateTemplateParams{{-a[4], -a[5], -a[2], -a[3], -a[0], -a[1]}};
}

FitResult fit(const TargetUnitary& target, const FitOptions& options) {
    require_orthogonal(target);

    if (options.seed_params) return run_one_fit(target, *options.seed_params, options.max_iterations);

    Rng rng(options.seed);
    FitResult best;
    bool have_best = false;
    for (int restart = 0; restart < options.n_restarts; ++restart) {
        GateTemplateParams start;
        for (auto& angle : start.angles) angle = std::numbers::pi * (1.0 - 2.0 * rng.uniform());
        FitResult candidate = run_one_fit(target, start, options.max_iterations);
        if (!have_best || candidate.residual < best.residual) {
            best = candidate;
            have_best = true;
        }
        if (best.converged) break;
    }
    return best;
}

TargetUnitary reference_mixing_matrix() {
    return TargetUnitary{{0.821427, 0.550313, 0.149708, 0.0,     //
                          -0.481513, 0.528538, 0.699138, 0.0,    //
                          0.305618, -0.646377, 0.699138, 0.0,    //
                          0.0, 0.0, 0.0, 1.0}};
}

GateTemplateParams reference_mixing_angles() {
    return GateTemplateParams{{-0.6031, -2.0125, 0.7966, 1.0139, 0.7053, 1.3599}};
}

CMatrix evaluate_cp_template(const CpTemplateParams& params) {
    GateTemplateParams base;
    std::copy(params.angles.begin(), params.angles.begin() + 6, base.angles.begin());
    const auto real_part = evaluate_template(base);
    CMatrix m(4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) m.at(r, c) = real_part[static_cast<std::size_t>(r * 4 + c)];
    // Phase dressing: S on the high qubit, then a controlled phase that tags
    // only |11>. Left-multiplied, so it acts after the real template.
    const cxd high_phase = std::polar(1.0, params.angles[6]);
    const cxd pair_phase = std::polar(1.0, params.angles[7]);
    for (int c = 0; c < 4; ++c) {
        m.at(2, c) *= high_phase;
        m.at(3, c) *= high_phase * pair_phase;
    }
    return m;
}

CpFitResult fit_cp(const CMatrix& target, const FitOptions& options) {
    if (target.dim() != 4) throw std::invalid_argument("cp fit target must be 4x4");
    if (target.unitarity_defect() > 1e-4)
        throw std::invalid_argument("cp fit target is not unitary");

    const auto objective = [&target](const std::vector<double>& p) {
        CpTemplateParams g;
        std::copy(p.begin(), p.end(), g.angles.begin());
        const CMatrix m = evaluate_cp_template(g);
        double sum = 0.0;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) sum += std::norm(m.at(r, c) - target.at(r, c));
        return sum;
    };
    const auto finish = [&](std::vector<double> x, int iterations) {
        CpFitResult result;
        std::copy(x.begin(), x.end(), result.params.angles.begin());
        for (auto& angle : result.params.angles) angle = canonicalize_angle(angle);
        result.iterations = iterations;
        result.residual = objective(
            std::vector<double>(result.params.angles.begin(), result.params.angles.end()));
        const CMatrix m = evaluate_cp_template(result.params);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                result.max_elem_error =
                    std::max(result.max_elem_error, std::abs(m.at(r, c) - target.at(r, c)));
        result.converged = result.max_elem_error < 1e-6;
        return result;
    };

    if (options.seed_params) {
        std::vector<double> x(8, 0.0);
        std::copy(options.seed_params->angles.begin(), options.seed_params->angles.end(),
                  x.begin());
        const int iterations = minimize(objective, x, options.max_iterations);
        return finish(std::move(x), iterations);
    }

    Rng rng(options.seed);
    CpFitResult best;
    bool have_best = false;
    for (int restart = 0; restart < options.n_restarts; ++restart) {
        std::vector<double> x(8);
        for (auto& angle : x) angle = std::numbers::pi * (1.0 - 2.0 * rng.uniform());
        const int iterations = minimize(objective, x, options.max_iterations);
        CpFitResult candidate = finish(std::move(x), iterations);
        if (!have_best || candidate.residual < best.residual) {
            best = candidate;
            have_best = true;
        }
        if (best.converged) break;
    }
    return best;
}

}  // namespace nuosc
