#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace gdce {

// Retention schedule for the discrete forward chain. alpha[t] is the per-step
// probability of keeping a category, alpha_bar[t] the cumulative product,
// with alpha_bar[0] = 1 and alpha_bar[T] ~ 0.
struct NoiseSchedule {
    int T = 0;
    std::vector<double> alpha;      // index 1..T (index 0 unused, set to 1)
    std::vector<double> alpha_bar;  // index 0..T

    NoiseSchedule() = default;

    bool operator==(const NoiseSchedule&) const = default;

    explicit NoiseSchedule(std::vector<double> alpha_bar_in)
        : T(static_cast<int>(alpha_bar_in.size()) - 1), alpha_bar(std::move(alpha_bar_in)) {
        if (T < 1) throw std::invalid_argument("NoiseSchedule: need T >= 1");
        if (alpha_bar[0] != 1.0) throw std::invalid_argument("NoiseSchedule: alpha_bar[0] != 1");
        alpha.assign(static_cast<std::size_t>(T) + 1, 1.0);
        for (int t = 1; t <= T; ++t) {
            if (!(alpha_bar[t] >= 0.0 && alpha_bar[t] <= alpha_bar[t - 1]))
                throw std::invalid_argument("NoiseSchedule: alpha_bar must be non-increasing");
            alpha[t] = alpha_bar[t] / alpha_bar[t - 1];
        }
    }
};

/// Cosine retention schedule: alpha_bar(t) = cos^2(((t/T + eps)/(1 + eps)) * pi/2),
/// normalized so alpha_bar(0) = 1.
inline NoiseSchedule build_schedule(int T, double eps = 0.008) {
    if (T < 1) throw std::invalid_argument("build_schedule: T must be >= 1");
    auto f = [&](double t) {
        const double u = (t / T + eps) / (1.0 + eps) * (3.14159265358979323846 / 2.0);
        const double c = std::cos(u);
        return c * c;
    };
    std::vector<double> ab(static_cast<std::size_t>(T) + 1);
    const double f0 = f(0.0);
    ab[0] = 1.0;
    for (int t = 1; t <= T; ++t) ab[t] = f(static_cast<double>(t)) / f0;
    return NoiseSchedule(std::move(ab));
}

}  // namespace gdce
