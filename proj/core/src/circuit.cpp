#include "pinnlab/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "pinnlab/errors.hpp"

namespace pinnlab {

namespace {

void require_positive(double value, const char* name) {
    if (!std::isfinite(value) || value <= 0.0) {
        throw ConfigError(std::string(name) + " must be positive and finite");
    }
}

constexpr std::size_t kMaxEigOrder = 8;
constexpr int kMaxQrIterations = 10'000;
constexpr double kQrTolerance = 1e-12;

}  // namespace

void SingleStageSpec::validate() const {
    require_positive(R, "R");
    require_positive(C, "C");
}

void TwoStageSpec::validate() const {
    require_positive(R1, "R1");
    require_positive(C1, "C1");
    require_positive(R2, "R2");
    require_positive(C2, "C2");
}

void LadderSpec::validate() const {
    if (stages.empty()) {
        throw ConfigError("ladder needs at least one stage");
    }
    for (const auto& s : stages) {
        require_positive(s.R, "R");
        require_positive(s.C, "C");
    }
}

LadderSpec to_ladder(const CircuitSpec& spec) {
    return std::visit(
        [](const auto& s) -> LadderSpec {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, SingleStageSpec>) {
                return LadderSpec{{{s.R, s.C}}};
            } else if constexpr (std::is_same_v<T, TwoStageSpec>) {
                return LadderSpec{{{s.R1, s.C1}, {s.R2, s.C2}}};
            } else {
                return s;
            }
        },
        spec);
}

std::size_t circuit_order(const CircuitSpec& spec) {
    return to_ladder(spec).order();
}

double pole_single(const SingleStageSpec& spec) {
    spec.validate();
    return -1.0 / (spec.R * spec.C);
}

std::pair<double, double> real_quadratic_roots(double a, double b, double c) {
    if (a == 0.0 || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
        throw NumericError("quadratic coefficients must be finite with a != 0");
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) {
        throw NumericError("quadratic has complex roots (discriminant " + std::to_string(disc) + ")");
    }
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    double r1 = q / a;
    double r2 = q != 0.0 ? c / q : 0.0;
    if (r1 < r2) {
        std::swap(r1, r2);
    }
    return {r1, r2};
}

std::pair<double, double> poles_two(const TwoStageSpec& spec) {
    spec.validate();
    const double a = (spec.R1 * spec.C1) * (spec.R2 * spec.C2);
    const double b = spec.R2 * spec.C2 + spec.R1 * (spec.C1 + spec.C2);
    return real_quadratic_roots(a, b, 1.0);
}

Matrix state_matrix(const LadderSpec& spec) {
    spec.validate();
    const std::size_t n = spec.order();
    Matrix a{n, std::vector<double>(n * n, 0.0)};
    for (std::size_t k = 0; k < n; ++k) {
        const double ck = spec.stages[k].C;
        const double g_in = 1.0 / spec.stages[k].R;
        a(k, k) -= g_in / ck;
        if (k > 0) {
            a(k, k - 1) += g_in / ck;
        }
        if (k + 1 < n) {
            const double g_out = 1.0 / spec.stages[k + 1].R;
            a(k, k) -= g_out / ck;
            a(k, k + 1) += g_out / ck;
        }
    }
    return a;
}

std::vector<double> input_vector(const LadderSpec& spec) {
    spec.validate();
    std::vector<double> b(spec.order(), 0.0);
    b[0] = 1.0 / (spec.stages[0].R * spec.stages[0].C);
    return b;
}

namespace {

// Eigenvalues of a matrix with real spectrum, descending. Each is accurate
// to roughly eps times the norm of `a`.
std::vector<double> qr_eigenvalues(Matrix a) {
    const std::size_t n = a.n;
    auto lower_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                s += a(i, j) * a(i, j);
            }
        }
        return std::sqrt(s);
    };
    auto frobenius = [&] {
        double s = 0.0;
        for (const double v : a.data) s += v * v;
        return std::sqrt(s);
    };

    int iter = 0;
    while (lower_norm() >= kQrTolerance * frobenius()) {
        if (++iter > kMaxQrIterations) {
            throw NumericError("QR iteration did not converge in 10000 iterations");
        }
        // A = QR, A' = RQ = Q^T A Q, built from Givens rotations.
        Matrix r = a;
        Matrix q{n, std::vector<double>(n * n, 0.0)};
        for (std::size_t i = 0; i < n; ++i) q(i, i) = 1.0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            for (std::size_t i = n - 1; i > k; --i) {
                const double x = r(i - 1, k);
                const double y = r(i, k);
                if (y == 0.0) {
                    continue;
                }
                const double h = std::hypot(x, y);
                const double c = x / h;
                const double s = y / h;
                for (std::size_t j = 0; j < n; ++j) {
                    const double u = r(i - 1, j);
                    const double v = r(i, j);
                    r(i - 1, j) = c * u + s * v;
                    r(i, j) = -s * u + c * v;
                    // Q accumulates G^T on the right.
                    const double qu = q(j, i - 1);
                    const double qv = q(j, i);
                    q(j, i - 1) = c * qu + s * qv;
                    q(j, i) = -s * qu + c * qv;
                }
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < n; ++k) acc += r(i, k) * q(k, j);
                a(i, j) = acc;
            }
        }
    }
    std::vector<double> values;
    for (std::size_t i = 0; i < n; ++i) values.push_back(a(i, i));
    std::sort(values.begin(), values.end(), std::greater<>());
    return values;
}

// A^-1 = -G^-1 C where G^-1(i, j) is the resistance shared by the paths from
// nodes i and j to the source: a sum of positive terms, no cancellation.
Matrix inverse_state_matrix(const LadderSpec& spec) {
    const std::size_t n = spec.order();
    Matrix inv{n, std::vector<double>(n * n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double r = 0.0;
            for (std::size_t k = 0; k <= std::min(i, j); ++k) r += spec.stages[k].R;
            inv(i, j) = -r * spec.stages[j].C;
        }
    }
    return inv;
}

}  // namespace

Poles poles_eig(const LadderSpec& spec) {
    spec.validate();
    const std::size_t n = spec.order();
    if (n > kMaxEigOrder) {
        throw ConfigError("eigenvalue oracle supports at most 8 stages");
    }
    // QR resolves each eigenvalue to eps times the matrix norm, so slow poles
    // of a stiff ladder are taken from the inverse, where they dominate.
    const std::vector<double> fast = qr_eigenvalues(state_matrix(spec));
    std::vector<double> slow = qr_eigenvalues(inverse_state_matrix(spec));
    for (double& v : slow) v = 1.0 / v;
    std::sort(slow.begin(), slow.end(), std::greater<>());
    const double split = std::sqrt(std::abs(fast.front()) * std::abs(fast.back()));
    Poles poles;
    for (std::size_t i = 0; i < n; ++i) {
        poles.values.push_back(std::abs(slow[i]) < split ? slow[i] : fast[i]);
    }
    return poles;
}

double analytic_step_single(const SingleStageSpec& spec, double V, double t) {
    spec.validate();
    if (t < 0.0) {
        throw ConfigError("analytic step response is defined for t >= 0");
    }
    return V * (1.0 - std::exp(-t / (spec.R * spec.C)));
}

}  // namespace pinnlab
