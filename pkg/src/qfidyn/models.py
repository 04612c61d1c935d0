"""Worked models: the two-qubit XX pair with its analytic symmetry set, and
the seven-site chain preset behind the frequency-comb studies."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import DomainError
from .operators import (
    PauliString,
    SpinChainSpec,
    build_xx_hamiltonian,
    local_generator,
    operator_from_strings,
)


def two_qubit_symmetry_strings():
    """The eight analytic eigenoperators of the two-site XX model, by label.

    A1 = s0- - z0 s1-, A2 = A1^dag, A3 = s0- + z0 s1-, A4 = A3^dag; under
    [H, A] = omega A their frequencies are -+2(J+h) for A1, A2 and
    +-2(J-h) for A3, A4.  Each frequency eigenspace of the commutator map is
    two dimensional, and B1..B4 are the site-mirrored partners of A1..A4 at
    the same frequencies; a frequency block {Ak, Bk} spans its eigenspace,
    which is what makes the block bounds saturate.
    """

    def lowering(site, other, sign):
        return (
            PauliString(1.0, ((site, "-"),)),
            PauliString(sign, ((site, "z"), (other, "-"))),
        )

    def raising(site, other, sign):
        # dagger of lowering: ladder factors flip, the z factor stays
        return (
            PauliString(1.0, ((site, "+"),)),
            PauliString(sign, ((site, "z"), (other, "+"))),
        )

    return {
        "A1": lowering(0, 1, -1.0),
        "A2": raising(0, 1, -1.0),
        "A3": lowering(0, 1, +1.0),
        "A4": raising(0, 1, +1.0),
        "B1": lowering(1, 0, -1.0),
        "B2": raising(1, 0, -1.0),
        "B3": lowering(1, 0, +1.0),
        "B4": raising(1, 0, +1.0),
    }


def two_qubit_frequencies(coupling=1.0, field=0.5):
    """Expected eigenfrequencies under [H, A] = omega A, keyed by label."""
    j, h = float(coupling), float(field)
    return {
        "A1": -2.0 * (j + h),
        "A2": +2.0 * (j + h),
        "A3": +2.0 * (j - h),
        "A4": -2.0 * (j - h),
        "B1": -2.0 * (j + h),
        "B2": +2.0 * (j + h),
        "B3": +2.0 * (j - h),
        "B4": -2.0 * (j - h),
    }


def two_qubit_symmetry_operators(labels=None):
    """Dense 4x4 operators for the requested labels (default: all eight)."""
    strings = two_qubit_symmetry_strings()
    if labels is None:
        labels = tuple(strings)
    ops = {}
    for label in labels:
        if label not in strings:
            raise DomainError(
                f"unknown symmetry label {label!r}; valid labels are {tuple(strings)}"
            )
        ops[label] = operator_from_strings(strings[label], 2)
    return ops


LOW_FIELD_SUBSET = ("A2", "A3")
HIGH_FIELD_SUBSET = ("A4",)


def regime_subset(field, coupling=1.0):
    """Labels of the symmetry subset whose bound saturates the QFI at low T.

    Below the level crossing |h| = |J| the ground state is the singlet and
    the two operators with nonzero thermal norm on it sit at the two gap
    frequencies; above the crossing the polarized ground state leaves a
    single such operator.  At the crossing itself the frequencies collide
    and no proper subset is distinguished.
    """
    if abs(field) == abs(coupling):
        raise DomainError("no saturating subset at the level crossing |field| = |coupling|")
    return LOW_FIELD_SUBSET if abs(field) < abs(coupling) else HIGH_FIELD_SUBSET


@dataclass(frozen=True)
class ModelPreset:
    """A named starting point: chain spec plus the generator used with it."""

    name: str
    spec: SpinChainSpec
    generator: str


# The chain field 0.3 lifts all degeneracies between levels the staggered
# generator connects, so the zero-frequency comb weight is exhausted by the
# eigenprojector Mazur weight (at h = 0 it is not).
PRESETS = {
    "two-qubit": ModelPreset("two-qubit", SpinChainSpec(2, 1.0, 0.5, "open"), "antisymmetric-x"),
    "chain": ModelPreset("chain", SpinChainSpec(7, 1.0, 0.3, "open"), "staggered-x"),
}


def preset(name, sites=None, coupling=None, field=None, boundary=None, generator=None):
    """Look up a preset and apply parameter overrides."""
    if name not in PRESETS:
        raise DomainError(f"unknown preset {name!r}; valid presets are {tuple(PRESETS)}")
    base = PRESETS[name]
    spec = base.spec
    updates = {}
    if sites is not None:
        updates["sites"] = int(sites)
    if coupling is not None:
        updates["coupling"] = float(coupling)
    if field is not None:
        updates["field"] = float(field)
    if boundary is not None:
        updates["boundary"] = str(boundary)
    if updates:
        spec = replace(spec, **updates)
    gen = base.generator if generator is None else str(generator)
    return ModelPreset(base.name, spec, gen)


def build_preset(model, max_sites=None):
    """Hamiltonian and generator for a ModelPreset (site basis)."""
    h_op = build_xx_hamiltonian(model.spec, max_sites=max_sites)
    gen = local_generator(model.generator, model.spec.sites, max_sites=max_sites)
    return h_op, gen
