#include "nuosc/circuit.hpp"

#include <set>
#include <stdexcept>
#include <string>

namespace nuosc {

namespace {

void check_index(int value, int limit, const char* what) {
    if (value < 0 || value >= limit)
        throw std::invalid_argument(std::string(what) + " index " + std::to_string(value) +
                                    " out of range [0, " + std::to_string(limit) + ")");
}

std::string slot_key(const std::vector<int>& slot_bits) {
    std::string key(slot_bits.size(), '0');
    for (std::size_t s = 0; s < slot_bits.size(); ++s)
        key[slot_bits.size() - 1 - s] = slot_bits[s] ? '1' : '0';
    return key;
}

}  // namespace

void validate(const Circuit& circuit) {
    if (circuit.n_qubits < 1 || circuit.n_qubits > 3)
        throw std::invalid_argument("circuit must have 1 to 3 qubits, got " +
                                    std::to_string(circuit.n_qubits));
    if (circuit.n_classical_slots < 0)
        throw std::invalid_argument("negative classical slot count");

    std::set<int> used_slots;
    // Last op kind seen per qubit; GateKind::measure unlocks a Reset.
    std::vector<bool> touched(static_cast<std::size_t>(circuit.n_qubits), false);
    std::vector<GateKind> last_kind(static_cast<std::size_t>(circuit.n_qubits), GateKind::u3);

    for (const GateOp& op : circuit.ops) {
        check_index(op.target, circuit.n_qubits, "qubit");
        if (is_controlled_kind(op.kind)) {
            check_index(op.control, circuit.n_qubits, "control qubit");
            if (op.control == op.target)
                throw std::invalid_argument("control and target must differ");
        }
        if (op.kind == GateKind::measure) {
            check_index(op.slot, circuit.n_classical_slots, "classical slot");
            if (!used_slots.insert(op.slot).second)
                throw std::invalid_argument("classical slot " + std::to_string(op.slot) +
                                            " written by more than one measure");
        }
        if (op.kind == GateKind::reset) {
            const auto q = static_cast<std::size_t>(op.target);
            if (touched[q] && last_kind[q] != GateKind::measure)
                throw std::invalid_argument(
                    "reset on qubit " + std::to_string(op.target) +
                    " must be the first op on that qubit or directly follow a measure on it");
        }
        touched[static_cast<std::size_t>(op.target)] = true;
        last_kind[static_cast<std::size_t>(op.target)] = op.kind;
        if (is_controlled_kind(op.kind)) {
            touched[static_cast<std::size_t>(op.control)] = true;
            last_kind[static_cast<std::size_t>(op.control)] = op.kind;
        }
    }
}

StateVector run_statevector(const Circuit& circuit, const StateVector& initial) {
    validate(circuit);
    if (initial.n_qubits != circuit.n_qubits)
        throw std::invalid_argument("initial state has " + std::to_string(initial.n_qubits) +
                                    " qubits, circuit has " + std::to_string(circuit.n_qubits));
    StateVector s = initial;
    for (const GateOp& op : circuit.ops) {
        if (!is_unitary_kind(op.kind))
            throw std::invalid_argument(
                std::string("circuit contains ") + gate_kind_name(op.kind) +
                "; run_statevector handles unitary ops only, use run_shots or run_density");
        apply_gate_in_place(s, op);
    }
    return s;
}

CountsHistogram run_shots(const Circuit& circuit, const StateVector& initial, std::uint64_t n_shots,
                          std::uint64_t seed) {
    validate(circuit);
    if (initial.n_qubits != circuit.n_qubits)
        throw std::invalid_argument("initial state has " + std::to_string(initial.n_qubits) +
                                    " qubits, circuit has " + std::to_string(circuit.n_qubits));
    if (n_shots == 0) throw std::invalid_argument("n_shots must be at least 1");

    std::set<int> written;
    for (const GateOp& op : circuit.ops)
        if (op.kind == GateKind::measure) written.insert(op.slot);
    for (int s = 0; s < circuit.n_classical_slots; ++s)
        if (!written.count(s))
            throw std::invalid_argument("classical slot " + std::to_string(s) +
                                        " is never measured");

    CountsHistogram hist;
    hist.n_slots = circuit.n_classical_slots;
    hist.total_shots = n_shots;

    std::vector<int> slot_bits(static_cast<std::size_t>(circuit.n_classical_slots), 0);
    for (std::uint64_t shot = 0; shot < n_shots; ++shot) {
        Rng rng(seed + shot);
        StateVector s = initial;
        for (const GateOp& op : circuit.ops) {
            if (op.kind == GateKind::measure)
                slot_bits[static_cast<std::size_t>(op.slot)] = measure_qubit(s, op.target, rng);
            else if (op.kind == GateKind::reset)
                reset_qubit(s, op.target, rng);
            else
                apply_gate_in_place(s, op);
        }
        ++hist.counts[slot_key(slot_bits)];
    }
    return hist;
}

DensityMatrix run_density(const Circuit& circuit, const DensityMatrix& initial) {
    validate(circuit);
    if (initial.n_qubits != circuit.n_qubits)
        throw std::invalid_argument("initial state has " + std::to_string(initial.n_qubits) +
                                    " qubits, circuit has " + std::to_string(circuit.n_qubits));
    DensityMatrix rho = initial;
    for (const GateOp& op : circuit.ops) apply_channel_in_place(rho, op);
    return rho;
}

std::vector<double> to_probabilities(const CountsHistogram& hist) {
    if (hist.total_shots == 0) throw std::invalid_argument("empty histogram");
    std::vector<double> p(static_cast<std::size_t>(1) << hist.n_slots, 0.0);
    for (const auto& [key, count] : hist.counts) {
        if (static_cast<int>(key.size()) != hist.n_slots)
            throw std::invalid_argument("histogram key '" + key + "' does not match slot count");
        std::size_t idx = 0;
        for (char c : key) idx = idx * 2 + (c == '1' ? 1 : 0);
        p[idx] += static_cast<double>(count) / static_cast<double>(hist.total_shots);
    }
    return p;
}

CountsHistogram marginalize(const CountsHistogram& hist, const std::vector<int>& keep) {
    if (keep.empty()) throw std::invalid_argument("marginalize: keep set must be non-empty");
    for (std::size_t k = 0; k < keep.size(); ++k) {
        if (keep[k] < 0 || keep[k] >= hist.n_slots)
            throw std::invalid_argument("marginalize: slot " + std::to_string(keep[k]) +
                                        " out of range");
        if (k > 0 && keep[k] <= keep[k - 1])
            throw std::invalid_argument("marginalize: keep slots must be strictly increasing");
    }
    CountsHistogram out;
    out.n_slots = static_cast<int>(keep.size());
    out.total_shots = hist.total_shots;
    for (const auto& [key, count] : hist.counts) {
        std::string sub(keep.size(), '0');
        for (std::size_t k = 0; k < keep.size(); ++k)
            sub[keep.size() - 1 - k] = key[static_cast<std::size_t>(hist.n_slots - 1 - keep[k])];
        out.counts[sub] += count;
    }
    return out;
}

}  // namespace nuosc
