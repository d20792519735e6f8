"""Quantum channel representations and constructors.

The canonical representation is the unnormalized Choi operator

    J = sum_ij |i><j| (x) psi(|i><j|)

on H_in (x) H_out with the input index major, so ``Tr J = dim_in`` and trace
preservation reads ``Tr_out J = I_in``. Kraus and Stinespring forms are
derived views; the complementary channel is always computed from an explicit
Kraus set because it depends on the chosen dilation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import (
    dag,
    frob,
    kron,
    partial_trace,
    project_psd,
    swap_unitary,
)

EPS_PSD = 1e-9
EPS_TP = 1e-9
EPS_RANK = 1e-9
EPS_EQ = 1e-8

__all__ = [
    "EPS_PSD",
    "EPS_TP",
    "EPS_RANK",
    "EPS_EQ",
    "Channel",
    "KrausSet",
    "StinespringIsometry",
    "cptp_defects",
    "validate_channel",
    "choi_distance",
    "choi_from_kraus",
    "kraus_from_choi",
    "isometry_from_kraus",
    "kraus_from_isometry",
    "apply",
    "compose_choi",
    "tensor",
    "complementary",
    "identity",
    "completely_depolarizing",
    "unitary_channel",
    "isometry_channel",
    "trace_out_channel",
    "output_marginal",
    "append_maximally_mixed",
    "trace_out_pair",
    "self_complementary_qubit",
    "amplitude_damping",
    "constant_channel",
    "random_measure_prepare",
    "catalysis_reduction",
    "swap_output",
    "random_unitary",
    "random_kraus",
    "random_channel",
]


@dataclass(frozen=True)
class Channel:
    """A quantum channel stored as its Choi operator.

    ``choi`` is a Hermitian ``(dim_in*dim_out) x (dim_in*dim_out)`` matrix on
    H_in (x) H_out, input-major. CPTP validity is checked explicitly via
    :func:`validate_channel` rather than at construction so that
    solver-produced witnesses (accurate to a feasibility tolerance) can be
    carried by the same type.
    """

    dim_in: int
    dim_out: int
    choi: np.ndarray = field(repr=False)

    def __post_init__(self):
        side = self.dim_in * self.dim_out
        choi = np.asarray(self.choi, dtype=complex)
        if choi.shape != (side, side):
            raise ValueError(
                f"Choi shape {choi.shape} does not match dims {self.dim_in}x{self.dim_out}"
            )
        object.__setattr__(self, "choi", choi)


@dataclass(frozen=True)
class KrausSet:
    """Kraus operators {K_i}, each ``dim_out x dim_in``."""

    dim_in: int
    dim_out: int
    operators: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        if not ops:
            raise ValueError("KrausSet needs at least one operator")
        for k in ops:
            if k.shape != (self.dim_out, self.dim_in):
                raise ValueError(
                    f"Kraus operator shape {k.shape} does not match "
                    f"{self.dim_out}x{self.dim_in}"
                )
        object.__setattr__(self, "operators", ops)

    @property
    def dim_env(self) -> int:
        return len(self.operators)

    def completeness_defect(self) -> float:
        s = sum(dag(k) @ k for k in self.operators)
        return frob(s - np.eye(self.dim_in))


@dataclass(frozen=True)
class StinespringIsometry:
    """Isometry V: H_in -> H_out (x) H_env, rows ordered out-major."""

    dim_in: int
    dim_out: int
    dim_env: int
    v: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.v, dtype=complex)
        if v.shape != (self.dim_out * self.dim_env, self.dim_in):
            raise ValueError(
                f"isometry shape {v.shape} does not match "
                f"({self.dim_out}*{self.dim_env}) x {self.dim_in}"
            )
        object.__setattr__(self, "v", v)

    def isometry_defect(self) -> float:
        return frob(dag(self.v) @ self.v - np.eye(self.dim_in))


def cptp_defects(channel: Channel) -> tuple[float, float]:
    """(CP defect, TP defect): most negative eigenvalue magnitude and
    Frobenius distance of the output partial trace from the identity."""
    h = 0.5 * (channel.choi + dag(channel.choi))
    wmin = float(np.linalg.eigvalsh(h)[0])
    cp = max(0.0, -wmin)
    tp = frob(
        partial_trace(h, (channel.dim_in, channel.dim_out), keep=(0,))
        - np.eye(channel.dim_in)
    )
    return cp, tp


def validate_channel(channel: Channel, atol: float = EPS_PSD, name: str = "channel") -> None:
    """Raise ``ValueError`` unless the channel is CPTP within ``atol``."""
    cp, tp = cptp_defects(channel)
    if cp > atol:
        raise ValueError(f"{name} is not completely positive: min eigenvalue -{cp:.3e}")
    if tp > atol:
        raise ValueError(f"{name} is not trace preserving: TP defect {tp:.3e}")


def choi_distance(a: Channel, b: Channel) -> float:
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out):
        raise ValueError("channel dimensions differ")
    return frob(a.choi - b.choi)


# ---------------------------------------------------------------------------
# Representation conversions
# ---------------------------------------------------------------------------


def choi_from_kraus(k: KrausSet, atol: float = EPS_TP) -> Channel:
    """Choi operator of the channel with Kraus operators ``k``.

    Each Kraus operator contributes the rank-one term w w^dag with
    w = sum_i |i> (x) K|i>. Raises if the set is not trace preserving
    within ``atol``.
    """
    defect = k.completeness_defect()
    if defect > atol:
        raise ValueError(f"Kraus set violates completeness: defect {defect:.3e}")
    side = k.dim_in * k.dim_out
    j = np.zeros((side, side), dtype=complex)
    for op in k.operators:
        w = op.T.reshape(-1)
        j += np.outer(w, w.conj())
    return Channel(k.dim_in, k.dim_out, j)


def kraus_from_choi(c: Channel, eps_rank: float = EPS_RANK, eps_psd: float = EPS_PSD) -> KrausSet:
    """Canonical Kraus set from the Choi eigendecomposition.

    Eigenpairs with eigenvalue above ``eps_rank`` are kept; a negative
    eigenvalue below ``-eps_psd`` means the map is not completely positive
    and raises.
    """
    h = 0.5 * (c.choi + dag(c.choi))
    w, v = np.linalg.eigh(h)
    if w[0] < -eps_psd:
        raise ValueError(f"Choi operator has negative eigenvalue {w[0]:.3e}")
    ops = []
    for lam, vec in zip(w, v.T):
        if lam > eps_rank:
            ops.append(np.sqrt(lam) * vec.reshape(c.dim_in, c.dim_out).T)
    if not ops:
        raise ValueError("Choi operator has no eigenvalue above the rank threshold")
    return KrausSet(c.dim_in, c.dim_out, tuple(ops))


def isometry_from_kraus(k: KrausSet) -> StinespringIsometry:
    """Stack Kraus operators into V = sum_i K_i (x) |i>_env."""
    d_env = k.dim_env
    v = np.zeros((k.dim_out * d_env, k.dim_in), dtype=complex)
    for i, op in enumerate(k.operators):
        e = np.zeros((d_env, 1))
        e[i, 0] = 1.0
        v += kron(op, e)
    return StinespringIsometry(k.dim_in, k.dim_out, d_env, v)


def kraus_from_isometry(v: StinespringIsometry) -> KrausSet:
    """Slice K_i = (I (x) <i|_env) V out of the isometry."""
    blocks = v.v.reshape(v.dim_out, v.dim_env, v.dim_in)
    ops = tuple(blocks[:, i, :] for i in range(v.dim_env))
    return KrausSet(v.dim_in, v.dim_out, ops)


# ---------------------------------------------------------------------------
# Channel action and combination
# ---------------------------------------------------------------------------


def apply(c: Channel, rho: np.ndarray) -> np.ndarray:
    """Evaluate the channel on an operator via its Choi blocks."""
    rho = np.asarray(rho)
    if rho.shape != (c.dim_in, c.dim_in):
        raise ValueError(f"operator shape {rho.shape} does not match dim_in {c.dim_in}")
    jt = c.choi.reshape(c.dim_in, c.dim_out, c.dim_in, c.dim_out)
    return np.einsum("imjn,ij->mn", jt, rho)


def compose_choi(psi: Channel, theta: Channel) -> Channel:
    """Choi operator of the sequential composition theta o psi."""
    if psi.dim_out != theta.dim_in:
        raise ValueError(
            f"cannot compose: first output dim {psi.dim_out} != second input dim {theta.dim_in}"
        )
    jp = psi.choi.reshape(psi.dim_in, psi.dim_out, psi.dim_in, psi.dim_out)
    jt = theta.choi.reshape(theta.dim_in, theta.dim_out, theta.dim_in, theta.dim_out)
    out = np.einsum("ibjd,bcdn->icjn", jp, jt)
    side = psi.dim_in * theta.dim_out
    return Channel(psi.dim_in, theta.dim_out, out.reshape(side, side))


def tensor(c1: Channel, c2: Channel) -> Channel:
    """Parallel composition with subsystem order (A A') (x) (B B')."""
    j1 = c1.choi.reshape(c1.dim_in, c1.dim_out, c1.dim_in, c1.dim_out)
    j2 = c2.choi.reshape(c2.dim_in, c2.dim_out, c2.dim_in, c2.dim_out)
    out = np.einsum("abcd,efgh->aebfcgdh", j1, j2)
    dim_in = c1.dim_in * c2.dim_in
    dim_out = c1.dim_out * c2.dim_out
    side = dim_in * dim_out
    return Channel(dim_in, dim_out, out.reshape(side, side))


def complementary(k: KrausSet) -> Channel:
    """Environment view of the channel for this particular Kraus set.

    Implements psi_c(rho) = sum_ij Tr[K_i^dag K_j rho] |j><i| on an
    environment of dimension ``len(k.operators)``; equals tracing the system
    out of the Stinespring dilation built from the same operators.
    """
    stack = np.stack(k.operators)  # (env, out, in)
    out = np.einsum("jma,imb->ajbi", stack, stack.conj())
    side = k.dim_in * k.dim_env
    return Channel(k.dim_in, k.dim_env, out.reshape(side, side))


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def identity(d: int) -> Channel:
    w = np.eye(d, dtype=complex).reshape(-1)
    return Channel(d, d, np.outer(w, w.conj()))


def completely_depolarizing(d: int) -> Channel:
    """Constant map rho -> Tr(rho) I/d."""
    return Channel(d, d, np.eye(d * d, dtype=complex) / d)


def unitary_channel(u: np.ndarray) -> Channel:
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    if u.shape != (d, d) or frob(dag(u) @ u - np.eye(d)) > 1e-9:
        raise ValueError("input is not unitary")
    return choi_from_kraus(KrausSet(d, d, (u,)))


def isometry_channel(v: StinespringIsometry) -> Channel:
    """Channel rho -> V rho V^dag onto the full dilated space out (x) env."""
    return choi_from_kraus(
        KrausSet(v.dim_in, v.dim_out * v.dim_env, (v.v,)),
        atol=max(EPS_TP, 10.0 * v.isometry_defect()),
    )


def trace_out_channel(dims: Sequence[int], keep: Sequence[int]) -> Channel:
    """CPTP map on a composite space that traces out the subsystems not kept.

    The Choi operator is a 0/1 pattern: basis units |i><l| with equal traced
    sub-indices map to the matrix unit of their kept sub-indices, so the
    entries are filled block-wise instead of summing Kronecker products.
    """
    dims = tuple(dims)
    keep = tuple(sorted(set(keep)))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    d_in = int(np.prod(dims))
    kept_dims = [dims[k] for k in keep]
    traced = [i for i in range(len(dims)) if i not in keep]
    d_out = int(np.prod(kept_dims)) if keep else 1
    midx = np.array(np.unravel_index(np.arange(d_in), dims)).reshape(len(dims), d_in)
    kept_ravel = (
        np.ravel_multi_index(tuple(midx[k] for k in keep), kept_dims)
        if keep
        else np.zeros(d_in, dtype=int)
    )
    traced_ravel = (
        np.ravel_multi_index(tuple(midx[t] for t in traced), [dims[t] for t in traced])
        if traced
        else np.zeros(d_in, dtype=int)
    )
    j = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for tval in range(int(traced_ravel.max()) + 1):
        idx = np.nonzero(traced_ravel == tval)[0]
        rows = idx * d_out + kept_ravel[idx]
        j[np.ix_(rows, rows)] = 1.0
    return Channel(d_in, d_out, j)


def output_marginal(c: Channel, out_dims: Sequence[int], keep: Sequence[int]) -> Channel:
    """Marginal channel obtained by tracing subsystems out of the output.

    ``out_dims`` factor the output space; the Choi operator of the marginal is
    the partial trace of the channel's Choi operator over the dropped output
    factors.
    """
    out_dims = tuple(out_dims)
    if int(np.prod(out_dims)) != c.dim_out:
        raise ValueError("out_dims do not factor the output dimension")
    keep = tuple(sorted(set(keep)))
    dims = (c.dim_in,) + out_dims
    keep_full = (0,) + tuple(1 + k for k in keep)
    d_out = int(np.prod([out_dims[k] for k in keep])) if keep else 1
    return Channel(c.dim_in, d_out, partial_trace(c.choi, dims, keep_full))


def append_maximally_mixed(d_sys: int, d_anc: int) -> Channel:
    """CPTP map rho -> rho (x) I/d_anc, ancilla appended after the system."""
    mixed = np.eye(d_anc, dtype=complex) / d_anc
    d_out = d_sys * d_anc
    j = np.zeros((d_sys * d_out, d_sys * d_out), dtype=complex)
    for i in range(d_sys):
        for l in range(d_sys):
            e = np.zeros((d_sys, d_sys), dtype=complex)
            e[i, l] = 1.0
            j += kron(e, kron(e, mixed))
    return Channel(d_sys, d_out, j)


def trace_out_pair(psi_local: Channel, phi_local: Channel) -> tuple[Channel, Channel, Channel]:
    """Compatible pair on H_A = H_B (x) H_C with an explicit compatibilizer.

    Given local channels psi_local: B -> B and phi_local: C -> C, returns
    (psi_local o Tr_C, phi_local o Tr_B, psi_local (x) phi_local). The third
    channel reproduces the first two as its output marginals.
    """
    db, dc = psi_local.dim_in, phi_local.dim_in
    to_b = trace_out_channel((db, dc), keep=(0,))
    to_c = trace_out_channel((db, dc), keep=(1,))
    psi = compose_choi(to_b, psi_local)
    phi = compose_choi(to_c, phi_local)
    return psi, phi, tensor(psi_local, phi_local)


def self_complementary_qubit(family: int, alpha: float, beta: float) -> KrausSet:
    """Two-parameter qubit Kraus families whose channel equals its own
    complementary channel.

    ``alpha`` in [0, pi], ``beta`` in [0, 2 pi]; family 1 at (0, 0) is the
    dephasing-type point used throughout the regression suite.
    """
    if not 0.0 <= alpha <= np.pi:
        raise ValueError(f"alpha={alpha} outside [0, pi]")
    if not 0.0 <= beta <= 2.0 * np.pi:
        raise ValueError(f"beta={beta} outside [0, 2 pi]")
    s, c = np.sin(alpha), np.cos(alpha)
    phase = np.exp(1j * beta)
    r = 1.0 / np.sqrt(2.0)
    if family == 1:
        k1 = np.array([[s, 0.0], [0.0, r]], dtype=complex)
        k2 = np.array([[0.0, r], [phase * c, 0.0]], dtype=complex)
    elif family == 2:
        k1 = np.array([[1.0, 0.0], [0.0, r * s]], dtype=complex)
        k2 = np.array([[0.0, r * s], [0.0, phase * c]], dtype=complex)
    else:
        raise ValueError(f"family must be 1 or 2, got {family}")
    return KrausSet(2, 2, (k1, k2))


def constant_channel(sigma: np.ndarray, dim_in: int) -> Channel:
    """Preparation map rho -> Tr(rho) sigma; self-compatible by construction."""
    sigma = np.asarray(sigma, dtype=complex)
    return Channel(dim_in, sigma.shape[0], kron(np.eye(dim_in), sigma))


def random_measure_prepare(dim: int, rng: np.random.Generator) -> KrausSet:
    """Measure in a random orthonormal basis, prepare a random pure state per
    outcome. Such channels are self-compatible, which makes them valid
    ancillas for the catalysis checks."""
    basis = random_unitary(dim, rng)
    ops = []
    for k in range(dim):
        g = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        state = g / np.linalg.norm(g)
        ops.append(np.outer(state, basis[:, k].conj()))
    return KrausSet(dim, dim, tuple(ops))


def amplitude_damping(gamma: float) -> KrausSet:
    """Qubit amplitude damping; degradable for gamma < 1/2, anti-degradable
    for gamma > 1/2."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma={gamma} outside [0, 1]")
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=complex)
    k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    return KrausSet(2, 2, (k0, k1))


def catalysis_reduction(theta_joint: Channel, out_dims: Sequence[int], d_anc: int) -> Channel:
    """Strip an ancilla channel out of a joint compatibilizer.

    ``theta_joint`` maps A (x) A' to B (x) B' (x) C (x) B'' with output
    subsystem dimensions ``out_dims = (dB, dB', dC, dB'')``; the reduction
    feeds I/d_anc into A' and traces out B' and B'', leaving a channel
    A -> B (x) C.
    """
    out_dims = tuple(out_dims)
    if len(out_dims) != 4:
        raise ValueError("out_dims must be (dB, dB', dC, dB'')")
    if int(np.prod(out_dims)) != theta_joint.dim_out:
        raise ValueError("out_dims do not factor the joint output dimension")
    if theta_joint.dim_in % d_anc != 0:
        raise ValueError("ancilla dimension does not divide the joint input dimension")
    d_a = theta_joint.dim_in // d_anc
    prep = append_maximally_mixed(d_a, d_anc)
    post = trace_out_channel(out_dims, keep=(0, 2))
    return compose_choi(compose_choi(prep, theta_joint), post)


def swap_output(c: Channel, d_first: int, d_second: int) -> Channel:
    """Swap the two output factors of a channel into X2 (x) X1 order."""
    if d_first * d_second != c.dim_out:
        raise ValueError("output factors do not multiply to dim_out")
    return compose_choi(c, unitary_channel(swap_unitary(d_first, d_second)))


# ---------------------------------------------------------------------------
# Random sampling (reproducible given an explicit generator)
# ---------------------------------------------------------------------------


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def random_kraus(dim_in: int, dim_out: int, dim_env: int, rng: np.random.Generator) -> KrausSet:
    """Haar-style CPTP sample: QR-orthonormalize a complex Gaussian matrix
    into a Stinespring isometry and slice its Kraus operators."""
    if dim_out * dim_env < dim_in:
        raise ValueError("dim_out*dim_env must be at least dim_in for an isometry")
    g = rng.standard_normal((dim_out * dim_env, dim_in)) + 1j * rng.standard_normal(
        (dim_out * dim_env, dim_in)
    )
    q, _ = np.linalg.qr(g)
    return kraus_from_isometry(StinespringIsometry(dim_in, dim_out, dim_env, q))


def random_channel(
    dim_in: int, dim_out: int, rng: np.random.Generator, dim_env: int | None = None
) -> Channel:
    if dim_env is None:
        dim_env = int(rng.integers(2, 4))
    return choi_from_kraus(random_kraus(dim_in, dim_out, dim_env, rng))
