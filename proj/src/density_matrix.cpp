#include "nuosc/density_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nuosc {

namespace {

void check_qubit(const DensityMatrix& rho, int qubit) {
    if (qubit < 0 || qubit >= rho.n_qubits)
        throw std::out_of_range("qubit index " + std::to_string(qubit) + " out of range for " +
                                std::to_string(rho.n_qubits) + " qubit(s)");
}

}  // namespace

DensityMatrix density_from_state(const StateVector& s) {
    DensityMatrix rho;
    rho.n_qubits = s.n_qubits;
    const int d = s.dim();
    rho.m.assign(static_cast<std::size_t>(d) * d, cxd(0.0, 0.0));
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c)
            rho.at(r, c) = s.amp[static_cast<std::size_t>(r)] * std::conj(s.amp[static_cast<std::size_t>(c)]);
    return rho;
}

DensityMatrix make_density_basis_state(int n_qubits, int basis_index) {
    return density_from_state(make_basis_state(n_qubits, basis_index));
}

cxd trace(const DensityMatrix& rho) {
    cxd t(0.0, 0.0);
    for (int i = 0; i < rho.dim(); ++i) t += rho.at(i, i);
    return t;
}

double hermiticity_defect(const DensityMatrix& rho) {
    double m = 0.0;
    for (int r = 0; r < rho.dim(); ++r)
        for (int c = 0; c < rho.dim(); ++c)
            m = std::max(m, std::abs(rho.at(r, c) - std::conj(rho.at(c, r))));
    return m;
}

void apply_channel_in_place(DensityMatrix& rho, const GateOp& op) {
    check_qubit(rho, op.target);
    const int d = rho.dim();
    const int tbit = 1 << op.target;

    if (op.kind == GateKind::measure) {
        // Non-selective measurement: kill coherences between the qubit's 0 and
        // 1 subspaces, keep populations.
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c)
                if (((r ^ c) & tbit) != 0) rho.at(r, c) = cxd(0.0, 0.0);
        return;
    }
    if (op.kind == GateKind::reset) {
        // Measure, then flip the 1 outcome down: the |1><1| block folds onto
        // the |0><0| block, all coherences to the qubit vanish.
        for (int r = 0; r < d; ++r) {
            if (r & tbit) continue;
            for (int c = 0; c < d; ++c) {
                if (c & tbit) continue;
                rho.at(r, c) += rho.at(r | tbit, c | tbit);
            }
        }
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c)
                if ((r & tbit) || (c & tbit)) rho.at(r, c) = cxd(0.0, 0.0);
        return;
    }

    const auto m = gate_payload_matrix(op);
    const int cbit = is_controlled_kind(op.kind) ? (1 << op.control) : 0;
    if (cbit) {
        check_qubit(rho, op.control);
        if (op.control == op.target) throw std::invalid_argument("control and target must differ");
    }

    // rho -> G rho: mix row pairs.
    for (int r0 = 0; r0 < d; ++r0) {
        if (r0 & tbit) continue;
        if (cbit && !(r0 & cbit)) continue;
        const int r1 = r0 | tbit;
        for (int c = 0; c < d; ++c) {
            const cxd a0 = rho.at(r0, c);
            const cxd a1 = rho.at(r1, c);
            rho.at(r0, c) = m[0] * a0 + m[1] * a1;
            rho.at(r1, c) = m[2] * a0 + m[3] * a1;
        }
    }
    // rho -> rho G^dagger: mix column pairs.
    for (int c0 = 0; c0 < d; ++c0) {
        if (c0 & tbit) continue;
        if (cbit && !(c0 & cbit)) continue;
        const int c1 = c0 | tbit;
        for (int r = 0; r < d; ++r) {
            const cxd a0 = rho.at(r, c0);
            const cxd a1 = rho.at(r, c1);
            rho.at(r, c0) = a0 * std::conj(m[0]) + a1 * std::conj(m[1]);
            rho.at(r, c1) = a0 * std::conj(m[2]) + a1 * std::conj(m[3]);
        }
    }
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
    if (keep.empty()) throw std::invalid_argument("partial_trace: keep set must be non-empty");
    std::vector<int> kept = keep;
    std::sort(kept.begin(), kept.end());
    if (std::adjacent_find(kept.begin(), kept.end()) != kept.end())
        throw std::invalid_argument("partial_trace: duplicate qubit in keep set");
    for (int q : kept) check_qubit(rho, q);

    std::vector<int> traced;
    for (int q = 0; q < rho.n_qubits; ++q)
        if (!std::binary_search(kept.begin(), kept.end(), q)) traced.push_back(q);

    const int nk = static_cast<int>(kept.size());
    const int nt = static_cast<int>(traced.size());
    DensityMatrix out;
    out.n_qubits = nk;
    out.m.assign(static_cast<std::size_t>(1) << (2 * nk), cxd(0.0, 0.0));

    auto scatter = [](int bits, const std::vector<int>& positions) {
        int idx = 0;
        for (std::size_t k = 0; k < positions.size(); ++k)
            if (bits & (1 << k)) idx |= 1 << positions[k];
        return idx;
    };

    for (int i = 0; i < (1 << nk); ++i)
        for (int j = 0; j < (1 << nk); ++j) {
            cxd sum(0.0, 0.0);
            for (int t = 0; t < (1 << nt); ++t) {
                const int r = scatter(i, kept) | scatter(t, traced);
                const int c = scatter(j, kept) | scatter(t, traced);
                sum += rho.at(r, c);
            }
            out.at(i, j) = sum;
        }
    return out;
}

}  // namespace nuosc
