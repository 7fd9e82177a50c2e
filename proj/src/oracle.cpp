#include "nuosc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "nuosc/units.hpp"

namespace nuosc {

namespace {

void require_positive_energy(double e_gev) {
    if (!(e_gev > 0.0)) throw std::invalid_argument("energy must be positive");
}

void require_splitting_count(const CMatrix& u, const std::vector<double>& dm2_list) {
    if (static_cast<int>(dm2_list.size()) != u.dim() - 1)
        throw std::invalid_argument("expected " + std::to_string(u.dim() - 1) +
                                    " mass splittings for a " + std::to_string(u.dim()) +
                                    "-state mixing matrix, got " +
                                    std::to_string(dm2_list.size()));
}

void require_unitary(const CMatrix& u) {
    if (u.unitarity_defect() > 1e-10)
        throw std::invalid_argument("mixing matrix is not unitary");
}

std::vector<double> phase_list(const std::vector<double>& dm2_list, double l_km, double e_gev) {
    std::vector<double> phases(dm2_list.size() + 1, 0.0);
    for (std::size_t i = 0; i < dm2_list.size(); ++i)
        phases[i + 1] = 2.0 * osc_coeff * dm2_list[i] * l_km / e_gev;
    return phases;
}

double off_diagonal_frobenius_sq(const CMatrix& h) {
    double s = 0.0;
    for (int p = 0; p < h.dim(); ++p)
        for (int q = 0; q < h.dim(); ++q)
            if (p != q) s += std::norm(h.at(p, q));
    return s;
}

}  // namespace

double two_flavor_probability(double theta, double dm2, double l_km, double e_gev,
                              FlavorLabel initial, FlavorLabel final) {
    require_positive_energy(e_gev);
    const double s2 = std::sin(2.0 * theta);
    const double arg = std::sin(osc_coeff * dm2 * l_km / e_gev);
    const double survival = 1.0 - s2 * s2 * arg * arg;
    return initial == final ? survival : 1.0 - survival;
}

std::vector<std::vector<double>> n_flavor_probability(const CMatrix& u,
                                                      const std::vector<double>& dm2_list,
                                                      double l_km, double e_gev) {
    require_positive_energy(e_gev);
    require_splitting_count(u, dm2_list);
    require_unitary(u);
    const int n = u.dim();
    const auto phases = phase_list(dm2_list, l_km, e_gev);
    std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            cxd amp(0.0, 0.0);
            for (int i = 0; i < n; ++i)
                amp += u.at(b, i) * std::polar(1.0, -phases[i]) * std::conj(u.at(a, i));
            p[a][b] = std::norm(amp);
        }
    return p;
}

std::vector<std::vector<double>> damped_n_flavor_probability(const CMatrix& u,
                                                             const std::vector<double>& dm2_list,
                                                             double l_km, double e_gev,
                                                             double gamma_per_km) {
    require_positive_energy(e_gev);
    require_splitting_count(u, dm2_list);
    require_unitary(u);
    const int n = u.dim();
    const auto phases = phase_list(dm2_list, l_km, e_gev);
    const double damp = std::exp(-gamma_per_km * l_km);
    std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            cxd sum(0.0, 0.0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    cxd term = u.at(b, i) * std::conj(u.at(a, i)) * std::conj(u.at(b, j)) *
                               u.at(a, j) * std::polar(1.0, phases[j] - phases[i]);
                    if (((i ^ j) & 1) != 0) term *= damp;
                    sum += term;
                }
            p[a][b] = sum.real();
        }
    return p;
}

EigenSystem diagonalize_hermitian(const CMatrix& h) {
    if (h.hermiticity_defect() > 1e-9)
        throw std::invalid_argument("matrix is not Hermitian");
    if (h.dim() > 4) throw std::invalid_argument("diagonalizer supports dimensions up to 4");

    const int n = h.dim();
    CMatrix a = h;
    // Keep the working copy exactly Hermitian so the rotation formulas see
    // real diagonals.
    for (int i = 0; i < n; ++i) a.at(i, i) = a.at(i, i).real();
    CMatrix v = CMatrix::identity(n);

    for (int sweep = 0; sweep < 100; ++sweep) {
        if (off_diagonal_frobenius_sq(a) < 1e-28) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const double mag = std::abs(a.at(p, q));
                if (mag == 0.0) continue;
                const double phi = std::arg(a.at(p, q));
                const double rot =
                    0.5 * std::atan2(2.0 * mag, a.at(p, p).real() - a.at(q, q).real());
                const double c = std::cos(rot);
                const double s = std::sin(rot);
                CMatrix j = CMatrix::identity(n);
                j.at(p, p) = c;
                j.at(q, q) = c;
                j.at(p, q) = -s * std::polar(1.0, phi);
                j.at(q, p) = s * std::polar(1.0, -phi);
                a = j.dagger() * a * j;
                v = v * j;
                for (int i = 0; i < n; ++i) a.at(i, i) = a.at(i, i).real();
            }
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return a.at(x, x).real() < a.at(y, y).real(); });

    EigenSystem es;
    es.values.resize(static_cast<std::size_t>(n));
    CMatrix sorted(n);
    for (int k = 0; k < n; ++k) {
        es.values[static_cast<std::size_t>(k)] = a.at(order[static_cast<std::size_t>(k)],
                                                      order[static_cast<std::size_t>(k)])
                                                     .real();
        for (int r = 0; r < n; ++r) sorted.at(r, k) = v.at(r, order[static_cast<std::size_t>(k)]);
    }
    es.u_m = sorted.dagger();
    return es;
}

CMatrix build_vacuum_hamiltonian(const CMatrix& u, const std::vector<double>& dm2_list,
                                 double e_gev) {
    require_positive_energy(e_gev);
    require_splitting_count(u, dm2_list);
    const int n = u.dim();
    CMatrix d(n);
    for (int i = 1; i < n; ++i) d.at(i, i) = dm2_list[static_cast<std::size_t>(i - 1)] / (2.0 * e_gev);
    return u * d * u.dagger();
}

CMatrix build_matter_hamiltonian(const CMatrix& u, const std::vector<double>& dm2_list,
                                 double e_gev, const MatterParams& matter) {
    if (matter.n_e_cm3 < 0.0) throw std::invalid_argument("electron density must be >= 0");
    CMatrix h = build_vacuum_hamiltonian(u, dm2_list, e_gev);
    h.at(0, 0) += (1.0 + matter.eps_ee) * matter_potential_per_cm3 * matter.n_e_cm3;
    return h;
}

CMatrix build_lv_hamiltonian(const CMatrix& h_vac, const LvParams& lv, double e_gev) {
    CMatrix h = h_vac;
    const auto add_term = [&h, &h_vac](const CMatrix& coeff, double weight, const char* name) {
        if (coeff.dim() == 0) return;  // default-constructed matrices count as zero
        if (coeff.dim() != h_vac.dim())
            throw std::invalid_argument(std::string(name) +
                                        " dimension does not match the vacuum Hamiltonian");
        if (coeff.hermiticity_defect() > 1e-9)
            throw std::invalid_argument(std::string(name) + " must be Hermitian");
        h = h + coeff.scaled(weight);
    };
    add_term(lv.a3, 1.0, "a3");
    add_term(lv.c4, e_gev, "c4");
    add_term(lv.a5, e_gev * e_gev, "a5");
    add_term(lv.c6, e_gev * e_gev * e_gev, "c6");
    return h;
}

EffectiveParams matter_effective_params(double theta0, double dm2, double e_gev, double n_e_cm3) {
    require_positive_energy(e_gev);
    if (n_e_cm3 < 0.0) throw std::invalid_argument("electron density must be >= 0");
    const double delta = dm2 / (2.0 * e_gev);
    const double potential = matter_potential_per_cm3 * n_e_cm3;
    const double x = delta * std::cos(2.0 * theta0) - potential;
    const double y = delta * std::sin(2.0 * theta0);
    EffectiveParams out;
    out.theta_m = 0.5 * std::atan2(y, x);
    out.lambda = std::hypot(x, y);
    return out;
}

std::vector<std::vector<double>> probability_from_hamiltonian(const CMatrix& h, double l_km) {
    const EigenSystem es = diagonalize_hermitian(h);
    const int n = h.dim();
    CMatrix d(n);
    for (int k = 0; k < n; ++k)
        d.at(k, k) = std::polar(1.0, -es.values[static_cast<std::size_t>(k)] * ham_phase_coeff * l_km);
    const CMatrix amp = es.u_m.dagger() * d * es.u_m;
    std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) p[a][b] = std::norm(amp.at(b, a));
    return p;
}

}  // namespace nuosc
