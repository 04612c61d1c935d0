"""Delta-comb representations of thermal response functions.

Finite systems have purely discrete spectra, so the dynamical response
G(omega), the structure factor S(omega) and the dissipative susceptibility
are sums of delta peaks.  A FrequencyComb stores the Kronecker-side weights
(one finite number per frequency cluster); the Dirac-side densities follow
from the documented conversion S(omega) = 2 pi sum_k s_k delta(omega - w_k),
and likewise for the other kinds, so no 2 pi factors live in the data.

Frequency clustering is shared with the dynamical-symmetry machinery
(cluster_values with the same tolerance), which makes comb frequencies align
bin-for-bin with the trivial complete set's block frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynsym import cluster_values, default_omega_tol, is_complete_pair_partition, mazur_weight
from .errors import DomainError, NumericError

KINDS = ("response", "structure", "susceptibility", "cross")

# Rounding can push mathematically nonnegative weights slightly below zero;
# values in [-NEG_WEIGHT_TOL, 0) are clamped to 0 and counted.
NEG_WEIGHT_TOL = 1e-12

# Tolerance for the structure comb's omega -> -omega symmetry certificate.
MIRROR_RTOL = 1e-9


@dataclass(frozen=True)
class FrequencyComb:
    """Sorted frequencies with one weight per frequency.

    Weights are stored complex; for every kind except cross they are real
    (validated).  clamped counts tiny negative weights zeroed at build time.
    """

    omegas: np.ndarray
    weights: np.ndarray
    kind: str
    clamped: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown comb kind {self.kind!r}; valid kinds are {KINDS}")
        om = np.array(self.omegas, dtype=float)
        w = np.array(self.weights, dtype=complex)
        if om.ndim != 1 or om.shape != w.shape:
            raise DomainError("omegas and weights must be matching 1-d arrays")
        if om.size > 1 and np.any(np.diff(om) <= 0):
            raise DomainError("omegas must be strictly increasing")
        scale = float(np.abs(w).max()) if w.size else 0.0
        if self.kind != "cross" and w.size:
            if np.abs(w.imag).max() > 1e-12 * max(1.0, scale):
                raise NumericError(f"{self.kind} comb has complex weights")
        if self.kind == "response" and w.size:
            if w.real.min() < -NEG_WEIGHT_TOL * max(1.0, scale):
                raise NumericError(
                    f"response weights must be nonnegative, found {w.real.min():.3e}"
                )
        if self.kind == "structure":
            self._check_mirror(om, w, scale)
        om.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "omegas", om)
        object.__setattr__(self, "weights", w)

    @staticmethod
    def _check_mirror(om, w, scale):
        if not np.array_equal(om, -om[::-1]):
            raise NumericError("structure comb frequencies are not symmetric about 0")
        dev = np.abs(w - w[::-1]).max() if w.size else 0.0
        if dev > MIRROR_RTOL * max(1.0, scale):
            raise NumericError(f"structure comb weights asymmetric by {dev:.3e}")

    @property
    def size(self):
        return self.omegas.size

    def total(self):
        """Sum of all weights (real for real-weight kinds)."""
        val = complex(self.weights.sum())
        if self.kind != "cross":
            return val.real
        return val

    def weight_at(self, omega, tol=0.0):
        """Weight at a frequency, 0 when absent; nearest match within tol."""
        if self.size == 0:
            return 0.0 if self.kind != "cross" else 0j
        i = int(np.argmin(np.abs(self.omegas - omega)))
        if abs(self.omegas[i] - omega) <= tol:
            w = self.weights[i]
            return complex(w) if self.kind == "cross" else float(w.real)
        return 0.0 if self.kind != "cross" else 0j

    def prune(self, atol):
        """Drop entries with |weight| <= atol; structure keeps its 0 entry."""
        keep = np.abs(self.weights) > atol
        if self.kind == "structure":
            keep |= self.omegas == 0.0
        return FrequencyComb(self.omegas[keep], self.weights[keep], self.kind, self.clamped)

    def to_csv(self):
        """Comb as CSV text with columns omega, weight_re, weight_im, kind."""
        lines = ["omega,weight_re,weight_im,kind"]
        for om, w in zip(self.omegas, self.weights):
            lines.append(f"{om:.12e},{w.real:.12e},{w.imag:.12e},{self.kind}")
        return "\n".join(lines) + "\n"


def _require_eigenbasis_hermitian(op_eig, dim, name="operator"):
    mat = np.asarray(op_eig, dtype=complex)
    if mat.shape != (dim, dim):
        raise DomainError(f"{name} shape {mat.shape} does not match dim {dim}")
    scale = float(np.abs(mat).max()) if mat.size else 0.0
    if np.abs(mat - mat.conj().T).max() > 1e-10 * max(1.0, scale):
        raise DomainError(f"{name} must be Hermitian")
    return mat


def _clustered_pair_weights(ensemble, values_flat, omega_tol):
    """Cluster all omega_mn = E_m - E_n and bin the given per-pair values.

    Returns (reps, binned) over every cluster, zero-weight bins included, so
    +-omega bins stay aligned for symmetrization.
    """
    energies = ensemble.energies
    if omega_tol is None:
        omega_tol = default_omega_tol(energies)
    flat = (energies[:, None] - energies[None, :]).ravel()
    reps, labels = cluster_values(flat, omega_tol, symmetric=True)
    binned = np.bincount(labels, weights=values_flat, minlength=reps.size)
    return reps, binned


def response_comb(op_eig, ensemble, omega_tol=None):
    """Dynamical-response comb: g(omega_k) = sum over the cluster of
    p_n |<E_m|O|E_n>|^2.

    Zero-weight entries are dropped; weights are nonnegative by construction.
    """
    mat = _require_eigenbasis_hermitian(op_eig, ensemble.dim)
    values = (ensemble.weights[None, :] * np.abs(mat) ** 2).ravel()
    reps, binned = _clustered_pair_weights(ensemble, values, omega_tol)
    keep = binned != 0.0
    return FrequencyComb(reps[keep], binned[keep], "response")


def structure_factor_comb(op_eig, ensemble, omega_tol=None):
    """Structure-factor comb: s(omega_k) = g(omega_k) + g(-omega_k) for
    omega_k != 0 and s(0) = 2 g(0) - 2 <O>^2.

    The connected zero peak can round slightly negative; values within
    NEG_WEIGHT_TOL (relative) are clamped to 0 and counted in clamped.
    Dirac-side convention: S(omega) = 2 pi sum_k s_k delta(omega - omega_k).
    """
    mat = _require_eigenbasis_hermitian(op_eig, ensemble.dim)
    p = ensemble.weights
    values = (p[None, :] * np.abs(mat) ** 2).ravel()
    reps, g = _clustered_pair_weights(ensemble, values, omega_tol)
    s = g + g[::-1]
    mean = float(np.dot(p, np.real(np.diagonal(mat))))
    zero = np.flatnonzero(reps == 0.0)
    if zero.size != 1:
        raise NumericError("clustering produced no unique zero-frequency bin")
    s[zero[0]] = 2.0 * g[zero[0]] - 2.0 * mean**2
    clamped = 0
    scale = max(1.0, float(np.abs(s).max()))
    if -NEG_WEIGHT_TOL * scale <= s[zero[0]] < 0.0:
        s[zero[0]] = 0.0
        clamped = 1
    keep = (s != 0.0) | (reps == 0.0)
    return FrequencyComb(reps[keep], s[keep], "structure", clamped)


def susceptibility_comb(op_eig, ensemble, omega_tol=None):
    """Dissipative-susceptibility comb via the fluctuation-dissipation
    relation: x(omega_k) = tanh(beta omega_k / 2) s(omega_k).

    Entries mirror the structure comb's frequencies (so zeros are kept);
    the omega = 0 entry is exactly 0.
    """
    s = structure_factor_comb(op_eig, ensemble, omega_tol)
    factor = np.zeros_like(s.omegas)
    nz = s.omegas != 0.0
    with np.errstate(over="ignore"):
        factor[nz] = np.tanh(ensemble.beta * s.omegas[nz] / 2.0)
    return FrequencyComb(s.omegas, factor * s.weights, "susceptibility", s.clamped)


def cross_response_comb(opa_eig, opb_eig, ensemble, omega_tol=None):
    """Cross-response comb with complex weights
    sum over the cluster of p_n <E_m|O_a|E_n><E_n|O_b|E_m>.

    Reduces to response_comb when both operators coincide; swapping the
    operators conjugates every weight.
    """
    dim = ensemble.dim
    mat_a = _require_eigenbasis_hermitian(opa_eig, dim, "first operator")
    mat_b = _require_eigenbasis_hermitian(opb_eig, dim, "second operator")
    values = (ensemble.weights[None, :] * mat_a * mat_b.conj()).ravel()
    reps, re = _clustered_pair_weights(ensemble, values.real, omega_tol)
    _, im = _clustered_pair_weights(ensemble, values.imag, omega_tol)
    w = re + 1j * im
    keep = w != 0.0
    return FrequencyComb(reps[keep], w[keep], "cross")


@dataclass(frozen=True)
class BoundCheckReport:
    """Outcome of comparing a response comb against Mazur weights.

    rows holds (omega_k, g, D_k, margin) with margin = g - D_k; equality is
    set when the blocks form the trivial complete pair partition, in which
    case every margin is zero up to rounding.
    """

    rows: tuple
    equality: bool

    @property
    def max_violation(self):
        return max((-(m) for *_, m in self.rows), default=0.0)


def comb_bound_check(comb, blocks, ensemble, op_eig, atol=1e-10):
    """Certify g(omega_k) >= D_k(O) for every block against a response comb.

    Block frequencies are matched to comb entries within the shared
    clustering tolerance (an absent entry counts as g = 0).  A violation
    beyond atol raises NumericError listing every offending frequency;
    otherwise a BoundCheckReport is returned.
    """
    if comb.kind != "response":
        raise DomainError(f"bound check needs a response comb, got kind {comb.kind!r}")
    match_tol = default_omega_tol(ensemble.energies)
    rows = []
    for block in blocks:
        d_k = mazur_weight(block, ensemble, op_eig)
        g = comb.weight_at(block.omega, tol=match_tol)
        rows.append((float(block.omega), float(g), float(d_k), float(g - d_k)))
    bad = [r for r in rows if r[3] < -atol]
    if bad:
        listing = "; ".join(f"omega={o:.6g}: g={g:.6e} < D={d:.6e}" for o, g, d, _ in bad)
        raise NumericError(f"response comb violates the Mazur bound at {listing}")
    equality = is_complete_pair_partition(blocks, ensemble.dim)
    return BoundCheckReport(tuple(rows), equality)
