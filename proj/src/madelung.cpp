#include "caslab/madelung.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace caslab {

void GridWavefunction::validate() const {
    if (values.size() < 16) throw std::invalid_argument("GridWavefunction: need at least 16 grid points");
    if (!(dx > 0.0)) throw std::invalid_argument("GridWavefunction: dx must be > 0");
    if (!(hbar > 0.0)) throw std::invalid_argument("GridWavefunction: hbar must be > 0");
    if (!(mass > 0.0)) throw std::invalid_argument("GridWavefunction: mass must be > 0");
    double norm = 0.0;
    for (const auto& v : values) norm += std::norm(v);
    norm *= dx;
    if (std::abs(norm - 1.0) > 1e-8) throw std::invalid_argument("GridWavefunction: discrete norm is not 1");
}

HydroFields decompose(const GridWavefunction& psi, double mask_threshold) {
    psi.validate();
    const std::size_t n = psi.size();
    HydroFields f;
    f.x0 = psi.x0;
    f.dx = psi.dx;
    f.amplitude.resize(n);
    f.action.assign(n, 0.0);
    f.action_valid.assign(n, false);
    double max_r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        f.amplitude[i] = std::abs(psi.values[i]);
        max_r = std::max(max_r, f.amplitude[i]);
    }
    if (max_r == 0.0) throw std::invalid_argument("decompose: all-zero wavefunction");

    std::vector<double> phase(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (f.amplitude[i] > mask_threshold) {
            phase[i] = std::arg(psi.values[i]);
            f.action_valid[i] = true;
        }
    }
    // Anchor: unmasked point nearest to the center.
    const std::size_t center = n / 2;
    std::size_t anchor = n;
    for (std::size_t d = 0; d <= n && anchor == n; ++d) {
        if (center + d < n && f.action_valid[center + d]) anchor = center + d;
        else if (d <= center && f.action_valid[center - d]) anchor = center - d;
    }
    if (anchor == n) return f;

    auto continue_from = [&](double previous, double raw) {
        return raw + 2.0 * M_PI * std::round((previous - raw) / (2.0 * M_PI));
    };
    std::vector<double> unwrapped(n, 0.0);
    unwrapped[anchor] = phase[anchor];
    double last = phase[anchor];
    for (std::size_t i = anchor + 1; i < n; ++i) {
        if (!f.action_valid[i]) continue;
        unwrapped[i] = continue_from(last, phase[i]);
        last = unwrapped[i];
    }
    last = phase[anchor];
    for (std::size_t i = anchor; i-- > 0;) {
        if (!f.action_valid[i]) continue;
        unwrapped[i] = continue_from(last, phase[i]);
        last = unwrapped[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (f.action_valid[i]) f.action[i] = psi.hbar * unwrapped[i];
    }
    return f;
}

void quantum_potential(HydroFields& fields, double mass, double hbar, double relative_mask) {
    if (!(mass > 0.0)) throw std::invalid_argument("quantum_potential: mass must be > 0");
    if (!(hbar > 0.0)) throw std::invalid_argument("quantum_potential: hbar must be > 0");
    const auto& r = fields.amplitude;
    const std::size_t n = r.size();
    fields.quantum_potential.assign(n, 0.0);
    fields.potential_valid.assign(n, false);
    const double max_r = r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
    const double cutoff = relative_mask * max_r;
    const double inv = 1.0 / (12.0 * fields.dx * fields.dx);
    for (std::size_t i = 2; i + 2 < n; ++i) {
        if (!(r[i] > cutoff)) continue;
        const double second = (-r[i - 2] + 16.0 * r[i - 1] - 30.0 * r[i] + 16.0 * r[i + 1] - r[i + 2]) * inv;
        fields.quantum_potential[i] = -(hbar * hbar / (2.0 * mass)) * second / r[i];
        fields.potential_valid[i] = true;
    }
}

void momentum_field(HydroFields& fields) {
    const auto& s = fields.action;
    const std::size_t n = s.size();
    fields.momentum.assign(n, 0.0);
    fields.momentum_valid.assign(n, false);
    const double inv = 1.0 / (12.0 * fields.dx);
    for (std::size_t i = 2; i + 2 < n; ++i) {
        bool ok = true;
        for (std::size_t j = i - 2; j <= i + 2; ++j) ok = ok && fields.action_valid[j];
        if (!ok) continue;
        fields.momentum[i] = (-s[i + 2] + 8.0 * s[i + 1] - 8.0 * s[i - 1] + s[i - 2]) * inv;
        fields.momentum_valid[i] = true;
    }
}

ClassicalLimitScan classical_limit_scan(const GridWavefunction& shape, const std::vector<double>& hbar_values) {
    if (hbar_values.empty()) throw std::invalid_argument("classical_limit_scan: empty hbar list");
    HydroFields fields = decompose(shape);
    ClassicalLimitScan scan;
    for (double hbar : hbar_values) {
        if (!(hbar > 0.0)) throw std::invalid_argument("classical_limit_scan: hbar must be > 0");
        quantum_potential(fields, shape.mass, hbar);
        double max_q = 0.0;
        for (std::size_t i = 0; i < fields.quantum_potential.size(); ++i) {
            if (fields.potential_valid[i]) max_q = std::max(max_q, std::abs(fields.quantum_potential[i]));
        }
        scan.points.push_back({hbar, max_q});
    }
    if (scan.points.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const auto m = static_cast<double>(scan.points.size());
        for (const auto& p : scan.points) {
            const double lx = std::log(p.hbar), ly = std::log(p.max_abs_q);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        const double den = m * sxx - sx * sx;
        if (den != 0.0) scan.loglog_slope = (m * sxy - sx * sy) / den;
    }
    return scan;
}

}  // namespace caslab
