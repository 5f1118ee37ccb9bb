"""Walk through the sign-agnostic stabilizer machinery.

Builds small states, applies Cliffords, measures Paulis, and shows how
entanglement entropies come out of GF(2) ranks.
"""

import numpy as np

from mipt2d import (LatticeGeometry, PauliString, StabilizerTableau,
                    sample_clifford)

# A Bell-like pair: measure XX then ZZ on a fresh |00> state. Signs are
# never tracked, so "measuring" means updating the stabilizer group.
state = StabilizerTableau.product_state(2, "Z")
print("fresh state:", state.to_labels())
print("measure XX ->", state.measure_pauli(PauliString.from_label("XX")))
print("measure ZZ ->", state.measure_pauli(PauliString.from_label("ZZ")))
print("generators:", state.to_labels())
print("entropy of qubit 0:", state.entanglement_entropy([0]), "bit")

# Random Clifford dynamics on five qubits: the tableau invariants
# (full rank, commuting rows) survive arbitrary symplectic conjugation.
rng = np.random.default_rng(7)
state = StabilizerTableau.product_state(5, "Z")
for _ in range(10):
    state.apply_clifford(sample_clifford(5, rng).matrix, range(5))
print("\nafter 10 random five-qubit Cliffords:", state.to_labels())
print("still a valid pure stabilizer state:", state.is_valid())

# The five-body cluster operator on a torus: Z at the center, X on the
# four neighbors. Measuring all of them turns a product state into the 2D
# cluster state.
geom = LatticeGeometry(4)
state = StabilizerTableau.product_state(geom.n, "Z")
for center in range(geom.n):
    state.measure_pauli(geom.cluster_stabilizer(center))
print("\ncluster state on a 4x4 torus, half-system entropy:",
      state.entanglement_entropy(geom.rows(0, 2)), "bits")
