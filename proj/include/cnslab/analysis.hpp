#pragma once

#include <cmath>
#include <vector>

#include "asymptotics.hpp"

namespace cnslab {

// Measured-vs-predicted analyses of a profile series, shared by the CLI and the acceptance recipes.

inline ProfileSeries window(const ProfileSeries& s, double t_a, double t_b) {
    ProfileSeries out;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s.t[i] < t_a * (1 - 1e-12) || s.t[i] > t_b * (1 + 1e-12)) continue;
        out.t.push_back(s.t[i]);
        out.w1.push_back(s.w1[i]);
        out.w2.push_back(s.w2[i]);
    }
    return out;
}

/// w2(xi_k) with the u1 phase e^{-3i l1 |W1|^2 log t} removed.
inline std::vector<cplx> derotated(const ProfileSeries& s, int k, double l1, cplx W1k) {
    std::vector<cplx> beta;
    for (size_t i = 0; i < s.size(); ++i) beta.push_back(s.w2[i][k] * std::polar(1.0, 3 * l1 * std::norm(W1k) * std::log(s.t[i])));
    return beta;
}

struct TwoModeReport {
    int k0 = 0;
    double xi0 = 0;
    cplx W1{};
    double lambda_c = 0;
    FitResult fit;
    double predicted = 0;  // lambda_c |W1(xi0)|^2
    double rel_error = 0;
    struct Side {
        double xi, omega, predicted;
    };
    std::vector<Side> half_width;  // same fit at the half-maximum points of |W1|
};

inline TwoModeReport analyze_two_mode(const Grid& g, const ProfileSeries& series, double l1, double l6, double t_a,
                                      double t_b) {
    auto win = window(series, t_a, t_b);
    auto sd = extract_scattering_data(win, l1);
    TwoModeReport r;
    r.lambda_c = lambda_c(l1, l6);
    const double wmax = sup_norm(sd.W1);
    std::vector<double> s;
    for (double t : win.t) s.push_back(std::log(t));
    auto fit_at = [&](int k) { return fit_two_phasor(s, derotated(win, k, l1, sd.W1[k]), 4 * r.lambda_c * wmax * wmax); };

    r.k0 = argmax_abs(sd.W1);
    r.xi0 = g.xi(r.k0);
    r.W1 = sd.W1[r.k0];
    r.fit = fit_at(r.k0);
    r.fit.xi0 = r.xi0;
    r.predicted = r.lambda_c * std::norm(r.W1);
    r.rel_error = std::abs(r.fit.omega - r.predicted) / r.predicted;

    int hw = 0;
    while (r.k0 + hw + 1 < g.N && std::abs(sd.W1[r.k0 + hw + 1]) > wmax / 2) ++hw;
    if (hw > 0)
        for (int k : {r.k0 - hw, r.k0 + hw}) r.half_width.push_back({g.xi(k), fit_at(k).omega, r.lambda_c * std::norm(sd.W1[k])});
    return r;
}

struct LogReport {
    LogSlopeFit amplitude;  // ||u2||_inf sqrt(t) against log t
    int k0 = 0;
    double xi0 = 0;
    cplx W1{}, W2{};
    LogSlopeFit slope;      // de-rotated w2(xi0) against log t
    cplx predicted{};       // W from W1(xi0) and the fitted W2
    double angle_deg = 0;
    double magnitude_ratio = 0;
};

/// `u2_scaled` holds ||u2(t)||_inf sqrt(t) at `times`; the amplitude fit uses [t_amp, t_b], the slope fit [t_a, t_b].
inline LogReport analyze_log_amplitude(const Grid& g, const ProfileSeries& series, const std::vector<double>& times,
                                       const std::vector<double>& u2_scaled, double l1, LogCase c, double t_amp,
                                       double t_a, double t_b) {
    LogReport r;
    std::vector<double> ta, ya;
    for (size_t i = 0; i < times.size(); ++i)
        if (times[i] >= t_amp * (1 - 1e-12) && times[i] <= t_b * (1 + 1e-12)) {
            ta.push_back(times[i]);
            ya.push_back(u2_scaled[i]);
        }
    r.amplitude = fit_log_slope(ta, ya);

    auto win = window(series, t_a, t_b);
    auto sd = extract_scattering_data(win, l1);
    r.k0 = argmax_abs(sd.W1);
    r.xi0 = g.xi(r.k0);
    r.W1 = sd.W1[r.k0];
    r.slope = fit_log_slope(win.t, derotated(win, r.k0, l1, r.W1));
    r.W2 = r.slope.intercept;
    r.predicted = log_amplitude_w(Field{r.W1}, Field{r.W2}, l1, c)[0];
    r.angle_deg = angle_deg(r.slope.slope, r.predicted);
    r.magnitude_ratio = std::abs(r.slope.slope) / std::abs(r.predicted);
    return r;
}

struct FreeReport {
    int k0 = 0;
    double xi0 = 0;
    double w1_drift = 0;    // max over snapshots of |w1 - W1|
    LogSlopeFit slope;      // w2(xi0) against log t
    LogSlopeFit oracle;     // same fit on the quadrature oracle
    cplx display{};         // -i |W1|^2 W1
    double angle_deg = 0;
    double oracle_rel = 0;  // | |slope| - |oracle slope| | / |oracle slope|
    double display_ratio = 0;
};

inline FreeReport analyze_free(const Grid& g, const ProfileSeries& series, const Field& W1, double t_a, double t_b) {
    auto win = window(series, t_a, t_b);
    if (win.size() < 6) throw InsufficientSnapshots("free-driven fit needs at least 6 snapshots in the window");
    FreeReport r;
    for (auto& w : series.w1)
        for (size_t k = 0; k < w.size(); ++k) r.w1_drift = std::max(r.w1_drift, std::abs(w[k] - W1[k]));
    r.k0 = argmax_abs(W1);
    r.xi0 = g.xi(r.k0);
    std::vector<cplx> z, zo;
    for (auto& w : win.w2) z.push_back(w[r.k0]);
    r.slope = fit_log_slope(win.t, z);
    for (auto& w : d21_profile_oracle(g, W1, win.t, win.w2.front())) zo.push_back(w[r.k0]);
    r.oracle = fit_log_slope(win.t, zo);
    r.display = cplx(0, -1) * std::norm(W1[r.k0]) * W1[r.k0];
    r.angle_deg = angle_deg(r.slope.slope, r.display);
    r.oracle_rel = std::abs(std::abs(r.slope.slope) - std::abs(r.oracle.slope)) / std::abs(r.oracle.slope);
    r.display_ratio = std::abs(r.slope.slope) / std::abs(r.display);
    return r;
}

} // namespace cnslab
