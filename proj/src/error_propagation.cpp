#include "cfcal/error_propagation.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace cfcal {

namespace {
void require_zero_start(const std::vector<double>& eps_a) {
    if (eps_a.empty()) throw std::runtime_error("error series must not be empty");
    if (eps_a[0] != 0.0) throw std::runtime_error("error series must start at 0 (eps_a[0] = 0)");
}

/// sum of j^2 for j = 1..m
double sum_squares(std::size_t m) {
    double md = double(m);
    return md * (md + 1.0) * (2.0 * md + 1.0) / 6.0;
}
}  // namespace

std::vector<double> speed_error_closed_form(const std::vector<double>& eps_a) {
    require_zero_start(eps_a);
    std::vector<double> out(eps_a.size(), 0.0);
    for (std::size_t t = 1; t < eps_a.size(); ++t) out[t] = out[t - 1] + eps_a[t];
    return out;
}

std::vector<double> position_error_closed_form(const std::vector<double>& eps_a) {
    require_zero_start(eps_a);
    const std::size_t n = eps_a.size();
    std::vector<double> out(n, 0.0);
    // eps_x[t] = sum_{t'=1}^{t} (t+1-t') eps_a[t'] = eps_x[t-1] + eps_v[t]
    double eps_v = 0.0;
    for (std::size_t t = 1; t < n; ++t) {
        eps_v += eps_a[t];
        out[t] = out[t - 1] + eps_v;
    }
    return out;
}

SpeedMseDecomposition mse_speed_decomposition(const std::vector<double>& eps_a) {
    require_zero_start(eps_a);
    const std::size_t T = eps_a.size() - 1;
    if (T == 0) throw std::runtime_error("decomposition needs T >= 1");
    SpeedMseDecomposition d;
    // extended precision: the terms cancel, plain double accumulation loses
    // digits against the directly computed MSE
    long double mse_a = 0.0L, conv = 0.0L, cross = 0.0L;
    for (std::size_t t = 1; t <= T; ++t) {
        const long double e2 = (long double)eps_a[t] * eps_a[t];
        mse_a += e2;
        conv += (long double)(T - t) * e2;
    }
    // suffix sums of (T - t' + 1) eps_{t'}
    long double suffix = 0.0L;
    for (std::size_t t = T; t >= 1; --t) {
        cross += (long double)eps_a[t] * suffix;
        suffix += (long double)(T - t + 1) * eps_a[t];
    }
    d.mse_a = double(mse_a / (long double)T);
    d.convolution = double(conv / (long double)T);
    d.cross = double(cross * 2.0L / (long double)T);
    d.total = double((mse_a + conv + cross * 2.0L) / (long double)T);
    return d;
}

PositionMseDecomposition mse_position_decomposition(const std::vector<double>& eps_a) {
    require_zero_start(eps_a);
    const std::size_t T = eps_a.size() - 1;
    if (T == 0) throw std::runtime_error("decomposition needs T >= 1");
    PositionMseDecomposition d;
    // extended precision: diagonal_correction and cross largely cancel the
    // leading term, so double accumulation leaves visible residue
    const long double cube = (long double)(T + 1) * (T + 1) * (T + 1);
    long double mse_a = 0.0L, diag = 0.0L, cross = 0.0L;
    for (std::size_t t = 1; t <= T; ++t) {
        const long double e2 = (long double)eps_a[t] * eps_a[t];
        mse_a += e2;
        // exact diagonal weight: sum_{t''=t}^{T} (t''+1-t)^2
        diag += ((long double)sum_squares(T + 1 - t) - cube) * e2;
    }
    for (std::size_t tp = 1; tp <= T; ++tp) {
        if (eps_a[tp] == 0.0) continue;
        for (std::size_t tpp = tp + 1; tpp <= T; ++tpp) {
            if (eps_a[tpp] == 0.0) continue;
            long double w = 0.0L;
            for (std::size_t t = tpp; t <= T; ++t)
                w += (long double)(t + 1 - tp) * (long double)(t + 1 - tpp);
            cross += w * eps_a[tp] * eps_a[tpp];
        }
    }
    d.leading = double(cube * mse_a / (long double)T);
    d.diagonal_correction = double(diag / (long double)T);
    d.cross = double(cross * 2.0L / (long double)T);
    d.total = double((cube * mse_a + diag + cross * 2.0L) / (long double)T);
    return d;
}

std::vector<std::vector<double>> multi_vehicle_error(
    const std::vector<std::vector<double>>& residuals, const LinearParams& k) {
    if (residuals.empty()) throw std::runtime_error("need at least one vehicle");
    const std::size_t horizon = residuals[0].size();
    for (const auto& row : residuals) {
        if (row.size() != horizon) throw std::runtime_error("ragged residual arrays");
        if (!row.empty() && row[0] != 0.0)
            throw std::runtime_error("residuals must vanish at t = 0");
    }
    for (double v : residuals[0])
        if (v != 0.0) throw std::runtime_error("lead vehicle residuals must be all zero");

    const std::size_t N = residuals.size();
    std::vector<std::vector<double>> eps(N, std::vector<double>(horizon, 0.0));
    // Coupling coefficient (k2 - k1 (t - i)) comes from differencing twin
    // simulations of the linear law under the semi-implicit unit-step update.
    for (std::size_t n = 1; n < N; ++n) {
        for (std::size_t t = 1; t < horizon; ++t) {
            double acc = residuals[n][t];
            for (std::size_t i = 1; i < t; ++i) {
                const double coef = k.k2 - k.k1 * double(t - i);
                acc += coef * (eps[n - 1][i] - eps[n][i]);
            }
            eps[n][t] = acc;
        }
    }
    return eps;
}

std::vector<FigureRow> figure_case_rows(FigureCase c) {
    std::vector<FigureRow> rows;
    if (c == FigureCase::InstantSingleVehicle) {
        std::vector<double> eps_a(21, 0.0);
        eps_a[5] = 0.2;
        auto eps_v = speed_error_closed_form(eps_a);
        auto eps_x = position_error_closed_form(eps_a);
        for (std::size_t t = 0; t < eps_a.size(); ++t)
            rows.push_back({0, t, eps_a[t], eps_v[t], eps_x[t]});
        return rows;
    }
    const std::size_t N = 4, T = 50;
    std::vector<std::vector<double>> r(N, std::vector<double>(T + 1, 0.0));
    r[1][1] = 5.0;
    LinearParams k{-0.053, 0.284, 0.918};
    auto eps_a = multi_vehicle_error(r, k);
    for (std::size_t n = 0; n < N; ++n) {
        auto eps_v = speed_error_closed_form(eps_a[n]);
        auto eps_x = position_error_closed_form(eps_a[n]);
        for (std::size_t t = 0; t <= T; ++t)
            rows.push_back({n, t, eps_a[n][t], eps_v[t], eps_x[t]});
    }
    return rows;
}

void write_figure_csv(const std::string& path, const std::vector<FigureRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "n,t,eps_a,eps_v,eps_x\n";
    out.precision(12);
    for (const auto& r : rows)
        out << r.vehicle << ',' << r.t << ',' << r.eps_a << ',' << r.eps_v << ',' << r.eps_x
            << '\n';
}

}  // namespace cfcal
