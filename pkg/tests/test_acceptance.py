"""Acceptance sweep: one test per advertised guarantee, at its stated tolerance.

Four checks pin cost and scaling figures that exact accounting does not
reproduce: the compressed-cost targets for the bundled adder treat it as
collapsing to its single final cross-register gate, and one scaling
equality is claimed where the split count actually exceeds the merged
count. Those tests assert the advertised figures anyway and are expected
to fail; loosening them would hide the discrepancy. Everything else must
stay green.

Expected failures: criterion 6b, 6c, 6d, and the criterion 9 target.
"""

from __future__ import annotations

import functools
import itertools
import time
from fractions import Fraction

import numpy as np

from conftest import random_amplitudes, random_trigger_indices
from qompress.compress import (
    classify_gates,
    cost_report,
    qfa_circuit,
    qfa_layout,
    simulate_compressed,
    trigger_sets,
)
from qompress.mcz import BsmModel, TriggerSet, multi_level_cz, prepare_ancillas
from qompress.optics import (
    TwoPhotonState,
    build_smr_mesh,
    evolve_two_photon,
    postselect_coincidence,
    route_with_ancilla,
    smr_abstract,
)
from qompress.qstate import PureState, apply, fidelity_up_to_phase, tensor
from qompress.schemes import run_state_dependent, run_state_independent_joint

DIMS = (2, 4, 8)

# independently derived full-adder truth table, kept literal on purpose
ADDER_TABLE = {
    (0, 0, 0): (0, 0),
    (0, 0, 1): (1, 0),
    (0, 1, 0): (1, 0),
    (0, 1, 1): (0, 1),
    (1, 0, 0): (1, 0),
    (1, 0, 1): (0, 1),
    (1, 1, 0): (0, 1),
    (1, 1, 1): (1, 1),
}


def criterion(label):
    """Print one verdict line per criterion next to pytest's own."""

    def deco(fn):
        @functools.wraps(fn)
        def run():
            try:
                fn()
            except BaseException:
                print(f"{label}: FAIL")
                raise
            print(f"{label}: PASS")

        return run

    return deco


def random_register(d: int, rng: np.random.Generator) -> PureState:
    return PureState((d,), random_amplitudes(d, rng))


def all_trigger_sets(d: int) -> list[tuple[int, ...]]:
    return [s for r in range(1, d) for s in itertools.combinations(range(d), r)]


@criterion("criterion 1")
def test_criterion_1_state_dependent_matches_gate():
    rng = np.random.default_rng(101)
    model = BsmModel.linear_optics()
    start = time.perf_counter()
    for d1, d2 in itertools.product(DIMS, repeat=2):
        for _ in range(50):
            c1 = random_trigger_indices(d1, rng)
            c2 = random_trigger_indices(d2, rng)
            gate = multi_level_cz(d1, d2, c1, c2).on(0, 1)
            for _ in range(20):
                psi1, psi2 = random_register(d1, rng), random_register(d2, rng)
                want = apply(gate, tensor(psi1, psi2))
                result = run_state_dependent(psi1, psi2, c1, c2, model=model)
                assert result.branches
                for branch in result.branches:
                    assert fidelity_up_to_phase(branch.output, want) >= 1.0 - 1e-10
    assert time.perf_counter() - start < 60.0


@criterion("criterion 2")
def test_criterion_2_success_probability_exact():
    rng = np.random.default_rng(102)
    for d1, d2 in itertools.product(DIMS, repeat=2):
        for _ in range(5):
            c1 = random_trigger_indices(d1, rng)
            c2 = random_trigger_indices(d2, rng)
            for _ in range(3):
                psi1, psi2 = random_register(d1, rng), random_register(d2, rng)
                # the runners verify the simulated probability mass against
                # the rational internally, at 1e-10
                lo = run_state_dependent(psi1, psi2, c1, c2, model=BsmModel.linear_optics())
                ideal = run_state_dependent(psi1, psi2, c1, c2, model=BsmModel.ideal())
                assert lo.success_probability == Fraction(1, 8)
                assert ideal.success_probability == Fraction(1, 4)


@criterion("criterion 3")
def test_criterion_3_router_coincidence_probability():
    rng = np.random.default_rng(103)
    for d in DIMS:
        for _ in range(4):
            triggers = TriggerSet(random_trigger_indices(d, rng), d)
            for _ in range(200):
                psi1, psi2 = random_register(d, rng), random_register(d, rng)
                anc1, anc2 = prepare_ancillas(psi1, psi2, triggers, triggers)
                _, p1 = postselect_coincidence(route_with_ancilla(psi1, anc1, triggers))
                _, p2 = postselect_coincidence(route_with_ancilla(psi2, anc2, triggers))
                assert abs(p1 - 0.5) <= 1e-10
                assert abs(p1 * p2 - 0.25) <= 1e-10
            # basis inputs hit the zero-trigger-mass ancilla fallback
            for m in range(d):
                psi = PureState.basis((d,), (m,))
                anc, _ = prepare_ancillas(psi, psi, triggers, triggers)
                _, p = postselect_coincidence(route_with_ancilla(psi, anc, triggers))
                assert abs(p - 0.5) <= 1e-10


@criterion("criterion 4")
def test_criterion_4_mesh_reproduces_routing_table():
    start = time.perf_counter()
    for d in range(2, 9):
        sets = [s for s in all_trigger_sets(d) if len(s) <= 3]
        for indices in sets:
            triggers = TriggerSet(indices, d)
            mesh = build_smr_mesh(d, triggers)
            for x, y in itertools.product(range(d), repeat=2):
                out = evolve_two_photon(mesh, TwoPhotonState.pair_basis(2 * d, d, x, d + y))
                expected = smr_abstract(x, y, triggers, d)
                # permutation arithmetic on dyadic weights is exact
                assert out.amplitude(*expected.modes) == 1.0
                assert abs(out.norm - 1.0) < 1e-15
    assert time.perf_counter() - start < 30.0


@criterion("criterion 5")
def test_criterion_5_state_independent_scheme():
    rng = np.random.default_rng(105)
    model = BsmModel.linear_optics()
    for d1, d2 in itertools.product(DIMS, repeat=2):
        rows, cols = np.arange(d1)[:, None], np.arange(d2)[None, :]
        for _ in range(50):
            c1 = random_trigger_indices(d1, rng)
            c2 = random_trigger_indices(d2, rng)
            k = len(c1) + len(c2)
            gate = multi_level_cz(d1, d2, c1, c2).on(0, 1)
            flags1 = np.isin(np.arange(d1), c1).astype(int)[:, None]
            flags2 = np.isin(np.arange(d2), c2).astype(int)[None, :]
            for _ in range(20):
                joint = PureState((d1, d2), random_amplitudes(d1 * d2, rng))
                want = apply(gate, joint)
                result = run_state_independent_joint(joint, c1, c2, model=model)
                assert result.success_probability == Fraction(1, 2) * Fraction(1, 8) ** k
                assert result.branches
                for branch in result.branches:
                    assert fidelity_up_to_phase(branch.output, want) >= 1.0 - 1e-10
                # flags mark trigger membership, register amplitudes untouched
                expect = np.zeros((d1, d2, 2, 2), dtype=complex)
                expect[rows, cols, flags1, flags2] = joint.amps
                np.testing.assert_allclose(result.resource_state.amps, expect, atol=1e-12)


@criterion("criterion 6a")
def test_criterion_6a_adder_uncompressed_cost():
    row = cost_report(qfa_circuit(), qfa_layout()).row("uncompressed")
    assert row.gate_count == 9
    assert row.success_probability == Fraction(1, 9) ** 9


@criterion("criterion 6b")
def test_criterion_6b_adder_standard_cost_target():
    row = cost_report(qfa_circuit(), qfa_layout()).row("standard")
    # exact accounting: both cross-register gates survive, 4 two-level
    # gates and (1/9)**4 in total
    assert row.gate_count == 2
    assert row.success_probability == Fraction(1, 9) ** 2


@criterion("criterion 6c")
def test_criterion_6c_adder_router_cost_target():
    row = cost_report(qfa_circuit(), qfa_layout()).row("state-dependent")
    # exact accounting: the second cross-register gate sees an unknown
    # marginal, so the router backend is not legal on this circuit at all
    assert row.legal
    assert row.gate_count == 1
    assert row.success_probability == Fraction(1, 8)


@criterion("criterion 6d")
def test_criterion_6d_adder_teleportation_cost_target():
    row = cost_report(qfa_circuit(), qfa_layout()).row("state-independent")
    # exact accounting: two cross-register gates at 3 two-level gates
    # each, 6 gates and (1/1024)**2 in total
    assert row.gate_count == 3
    assert row.success_probability == Fraction(1, 2) * Fraction(1, 8) ** 3


@criterion("criterion 6e")
def test_criterion_6e_adder_trigger_sets():
    circuit, layout = qfa_circuit(), qfa_layout()
    tags = classify_gates(circuit, layout)
    crossing = [g for g, t in zip(circuit.gates, tags) if not t.local]
    derivation = trigger_sets(crossing[-1], layout)
    assert derivation.first.indices == (3, 7)
    assert derivation.second.indices == (1,)


@criterion("criterion 7")
def test_criterion_7_adder_truth_table():
    for backend in ("uncompressed", "standard", "state-independent"):
        table = simulate_compressed(qfa_circuit(), qfa_layout(), backend)
        for (a, b, cin), (total, carry) in ADDER_TABLE.items():
            assert table[(a, b, cin, 0)] == (a, b, total, carry), backend


@criterion("criterion 8")
def test_criterion_8_gate_structure_exhaustive():
    # every dimension pair up to 8, every trigger-set pair; a sign
    # diagonal with unit entries is Hermitian, unitary, and involutory,
    # so assert exactly that structure, entrywise and exactly
    for d1 in range(2, 9):
        sets1 = all_trigger_sets(d1)
        for d2 in range(2, 9):
            sets2 = all_trigger_sets(d2)
            n = d1 * d2
            ones = np.ones(n)
            off_diagonal = ~np.eye(n, dtype=bool)
            for c1 in sets1:
                for c2 in sets2:
                    u = multi_level_cz(d1, d2, c1, c2).entries
                    diag = np.diagonal(u)
                    assert not u[off_diagonal].any()
                    assert not diag.imag.any()
                    assert np.array_equal(np.abs(diag.real), ones)
                    assert int(np.sum(diag.real == -1.0)) == len(c1) * len(c2)
    # direct matrix-algebra form of the same properties on the small dims
    for d1, d2 in itertools.product(range(2, 6), repeat=2):
        eye = np.eye(d1 * d2)
        for c1 in all_trigger_sets(d1):
            for c2 in all_trigger_sets(d2):
                u = multi_level_cz(d1, d2, c1, c2).entries
                assert np.array_equal(u, u.conj().T)
                assert np.array_equal(u @ u, eye)
                assert np.array_equal(u.conj().T @ u, eye)


@criterion("criterion 9")
def test_criterion_9_scaling_crossover_target():
    # split-count target: 2**r1 + 2**r2 never exceeds 2**(r1+r2), with
    # equality on all of {r1, r2} <= 1; fails at r1 == r2 == 0 already
    for r1 in range(7):
        for r2 in range(7):
            split, merged = 2**r1 + 2**r2, 2 ** (r1 + r2)
            assert split <= merged
            assert (split == merged) == ({r1, r2} <= {0, 1} and r1 + r2 <= 2)


@criterion("criterion 9 corrected")
def test_criterion_9_computed_crossover():
    for r1 in range(7):
        for r2 in range(7):
            split, merged = 2**r1 + 2**r2, 2 ** (r1 + r2)
            assert (split <= merged) == (r1 >= 1 and r2 >= 1)
            assert (split == merged) == (r1 == r2 == 1)
