"""Flat Toda connections, discrete curvature and the elliptic residual.

Sign conventions fixed here (and relied on by the solver and CLI):

* connection one-form A_z dz + A_zbar dzbar with the field parts kept
  separately: the dz part of the full connection is A_z + Phi, the dzbar
  part A_zbar + Psi;
* curvature is stored as the coefficient of dz ^ dzbar,
  F = d_z(A_zbar + Psi) - d_zbar(A_z + Phi) + [A_z + Phi, A_zbar + Psi];
* with these signs the curvature of the Toda-gauge connection equals
  minus the elliptic residual of ``higgs_residual`` in the continuum.

Ad of exp(s * Omega) for Cartan Omega acts diagonally on root slots by the
character exp(s * beta(Omega)) and is never computed through a series.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .chevalley import ChevalleyAlgebra, PrincipalSL2, rho_hat
from .grids import DomainGrid, HFieldGrid, QDifferential
from .rootdata import coxeter_number


def root_character_matrix(alg: ChevalleyAlgebra) -> np.ndarray:
    """(dim, l) matrix of beta(h_a) per basis slot; zero rows on the Cartan."""
    cached = getattr(alg, "_root_char_matrix", None)
    if cached is not None:
        return cached
    rs = alg.rs
    l = alg.rank
    RC = np.zeros((alg.dim, l))
    for idx in range(l, alg.dim):
        beta = alg.root_of_index(idx)
        for a in range(l):
            RC[idx, a] = sum(beta[j] * rs.cartan_matrix[a][j] for j in range(l))
    alg._root_char_matrix = RC
    return RC


def simple_character_matrix(alg: ChevalleyAlgebra) -> np.ndarray:
    """(l, l) matrix P with P[i][a] = alpha_i(h_a)."""
    cached = getattr(alg, "_simple_char_matrix", None)
    if cached is not None:
        return cached
    rs = alg.rs
    l = alg.rank
    P = np.array([[rs.cartan_matrix[a][i] for a in range(l)] for i in range(l)], dtype=float)
    alg._simple_char_matrix = P
    return P


def char_scale(alg: ChevalleyAlgebra, values: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Ad of exp(H) for Cartan-valued H: root slots scale by exp(beta(H))."""
    RC = root_character_matrix(alg)
    chars = np.einsum("...a,da->...d", np.asarray(H, dtype=complex), RC)
    return values * np.exp(chars)


def embed_cartan(alg: ChevalleyAlgebra, coeffs: np.ndarray) -> np.ndarray:
    out = np.zeros(coeffs.shape[:-1] + (alg.dim,), dtype=complex)
    out[..., : alg.rank] = coeffs
    return out


@dataclass
class ConnectionData:
    """Grids of connection and field coefficients in a declared gauge."""

    gauge: str  # "toda" | "higgs" | "custom"
    grid: DomainGrid
    omega: HFieldGrid
    q: QDifferential
    A_z: np.ndarray  # (nx, ny, dim) complex
    A_zbar: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    constants: Tuple[float, ...]  # c_0..c_l = d_0..d_l


def reality_constants(sl2: PrincipalSL2) -> Tuple[float, ...]:
    """c_0 = 1 and c_i = sqrt(r_i) for the real form of the equations."""
    return (1.0,) + tuple(float(ri) ** 0.5 for ri in sl2.r)


def build_toda_connection(
    omega: HFieldGrid,
    q: QDifferential,
    alg: ChevalleyAlgebra,
    sl2: PrincipalSL2,
    gauge: str = "toda",
) -> ConnectionData:
    """Flat connection generated by a Cartan field and a top differential.

    Toda gauge:  A_z = -Omega_z, A_zbar = +Omega_zbar,
                 Phi = Ad_{exp(-Omega)} E-, Psi = Ad_{exp(+Omega)} E+,
    Higgs gauge: A_z = -2 Omega_z, A_zbar = 0,
                 Phi = E-, Psi = Ad_{exp(2 Omega)} E+,
    where E- carries sqrt(r_i) on the lowered simple slots and q on the
    raised highest-root slot, and E+ is its mirror with qbar.
    """
    if gauge not in ("toda", "higgs"):
        raise ValueError(f"unknown gauge {gauge!r}")
    if q.degree != coxeter_number(alg.rs):
        raise ValueError("q differential degree does not match the Coxeter number")
    grid = omega.grid
    vals = omega.values
    if not np.all(np.isfinite(vals)):
        raise ValueError("field contains non-finite values")
    l = alg.rank
    consts = reality_constants(sl2)
    qv = q.sample(grid)

    eminus = np.zeros((grid.nx, grid.ny, alg.dim), dtype=complex)
    eplus = np.zeros_like(eminus)
    rs = alg.rs
    for i in range(l):
        lo = alg.root_index(tuple(-c for c in rs.simple_root(i)))
        hi = alg.root_index(rs.simple_root(i))
        eminus[..., lo] = consts[i + 1]
        eplus[..., hi] = consts[i + 1]
    eminus[..., alg.highest_root_index] = consts[0] * qv
    eplus[..., alg.lowest_root_index] = consts[0] * np.conj(qv)

    om_z = grid.d_dz(vals.astype(complex))
    om_zbar = grid.d_dzbar(vals.astype(complex))
    if gauge == "toda":
        A_z = embed_cartan(alg, -om_z)
        A_zbar = embed_cartan(alg, om_zbar)
        phi = char_scale(alg, eminus, -vals)
        psi = char_scale(alg, eplus, +vals)
    else:
        A_z = embed_cartan(alg, -2 * om_z)
        A_zbar = np.zeros_like(embed_cartan(alg, om_zbar))
        phi = eminus
        psi = char_scale(alg, eplus, 2 * vals)
    return ConnectionData(
        gauge=gauge, grid=grid, omega=omega, q=q,
        A_z=A_z, A_zbar=A_zbar, phi=phi, psi=psi, constants=consts,
    )


def conjugate_star(conn: ConnectionData, alg: ChevalleyAlgebra) -> np.ndarray:
    """Phi* = -rho(Phi) for the unitary structure of the declared gauge.

    In the Toda gauge the metric involution is the compact one; in the
    Higgs gauge it is dressed by Ad of exp(2 Omega).
    """
    if conn.gauge == "toda":
        return -rho_hat(alg, conn.phi)
    if conn.gauge == "higgs":
        return -char_scale(alg, rho_hat(alg, conn.phi), 2 * conn.omega.values)
    raise ValueError("star is defined only in the toda and higgs gauges")


def curvature(conn: ConnectionData, alg: ChevalleyAlgebra) -> np.ndarray:
    """Discrete curvature, coefficient of dz ^ dzbar, O(dx^2) accurate."""
    grid = conn.grid
    az = conn.A_z + conn.phi
    azbar = conn.A_zbar + conn.psi
    F = grid.d_dz(azbar) - grid.d_dzbar(az) + alg.bracket(az, azbar)
    return F


def gauge_transform(conn: ConnectionData, H: HFieldGrid, alg: ChevalleyAlgebra) -> ConnectionData:
    """Gauge action of exp(H) for Cartan-valued H.

    Field parts conjugate by the character action; the Cartan connection
    parts shift by the discrete derivatives of H.  H equal to the
    generating field maps the Toda gauge to the Higgs gauge exactly.
    """
    grid = conn.grid
    hv = H.values
    Hz = grid.d_dz(hv.astype(complex))
    Hzbar = grid.d_dzbar(hv.astype(complex))
    A_z = conn.A_z - embed_cartan(alg, Hz)
    A_zbar = conn.A_zbar - embed_cartan(alg, Hzbar)
    phi = char_scale(alg, conn.phi, hv)
    psi = char_scale(alg, conn.psi, hv)
    if not np.any(hv):
        gauge = conn.gauge
    elif conn.gauge == "toda" and np.array_equal(hv, conn.omega.values):
        gauge = "higgs"
    else:
        gauge = "custom"
    return ConnectionData(
        gauge=gauge, grid=grid, omega=conn.omega, q=conn.q,
        A_z=A_z, A_zbar=A_zbar, phi=phi, psi=psi, constants=conn.constants,
    )


def higgs_residual(
    omega: HFieldGrid,
    q: QDifferential,
    alg: ChevalleyAlgebra,
    sl2: PrincipalSL2,
    check_bracket: bool = True,
) -> np.ndarray:
    """Elliptic residual of the coupled equations as an h-valued grid.

    R = -2 Omega_{z zbar} + sum_i r_i e^{2 alpha_i(Omega)} h_i
        + |q|^2 e^{-2 delta(Omega)} h_{-delta},
    returned in coroot coordinates, shape (nx, ny, l).  When
    ``check_bracket`` is set the commutator of the field with its adjoint
    is also formed explicitly and compared against the closed form; a
    mismatch beyond 1e-12 signals broken structure constants.
    """
    grid = omega.grid
    rs = alg.rs
    l = alg.rank
    vals = omega.values
    P = simple_character_matrix(alg)
    av = vals @ P.T
    delta_co = np.array(rs.coroot(rs.highest_root), dtype=float)
    marks = np.array(rs.highest_root, dtype=float)
    dv = av @ marks
    r = np.array([float(c) for c in sl2.r])
    qv = q.sample(grid)
    q2 = np.abs(qv) ** 2
    expo = r * np.exp(2 * av)
    exp0 = q2 * np.exp(-2 * dv)
    pointwise = expo - exp0[..., None] * delta_co
    if check_bracket:
        closed = -pointwise  # the commutator [Phi, Phi*] in closed form
        phi = np.zeros((grid.nx, grid.ny, alg.dim), dtype=complex)
        for i in range(l):
            phi[..., alg.root_index(tuple(-c for c in rs.simple_root(i)))] = r[i] ** 0.5
        phi[..., alg.highest_root_index] = qv
        phi_star = -char_scale(alg, rho_hat(alg, phi), 2 * vals)
        comm = alg.bracket(phi, phi_star)
        defect = np.abs(comm - embed_cartan(alg, closed)).max()
        scale = max(1.0, float(np.abs(closed).max()))
        if defect > 1e-12 * scale:
            raise RuntimeError(
                f"commutator mismatch {defect:.3e}: structure constants are broken"
            )
    lap = grid.laplacian(vals)
    R = -0.5 * lap + pointwise
    if not grid.periodic:
        R[~grid.interior_mask()] = 0.0
    return R


def commutator_defect(
    omega: HFieldGrid, q: QDifferential, alg: ChevalleyAlgebra, sl2: PrincipalSL2
) -> float:
    """Max deviation between the explicit bracket [Phi, Phi*] and its closed form."""
    grid = omega.grid
    rs = alg.rs
    vals = omega.values
    P = simple_character_matrix(alg)
    av = vals @ P.T
    dv = av @ np.array(rs.highest_root, dtype=float)
    r = np.array([float(c) for c in sl2.r])
    qv = q.sample(grid)
    closed = -(r * np.exp(2 * av)) + (np.abs(qv) ** 2 * np.exp(-2 * dv))[..., None] * np.array(
        rs.coroot(rs.highest_root), dtype=float
    )
    phi = np.zeros((grid.nx, grid.ny, alg.dim), dtype=complex)
    for i in range(alg.rank):
        phi[..., alg.root_index(tuple(-c for c in rs.simple_root(i)))] = r[i] ** 0.5
    phi[..., alg.highest_root_index] = qv
    phi_star = -char_scale(alg, rho_hat(alg, phi), 2 * vals)
    comm = alg.bracket(phi, phi_star)
    return float(np.abs(comm - embed_cartan(alg, closed)).max())


def chart_transition(
    values: np.ndarray,
    g: np.ndarray | complex,
    alg: ChevalleyAlgebra,
    form_degree: int = 0,
) -> np.ndarray:
    """Transport coefficients between charts.

    Root-space components scale by g**height, Cartan components are
    untouched; ``form_degree`` adds the canonical-bundle power of a tensor
    coefficient (1 for the dz part of a field) so that transported
    coefficients can be compared directly with ones built on the target
    chart.  ``g`` is the derivative of the source coordinate with respect
    to the target coordinate and must not vanish.
    """
    garr = np.asarray(g, dtype=complex)
    if np.any(garr == 0):
        raise ValueError("chart transition function vanishes")
    powers = alg.heights + form_degree
    scale = garr[..., None] ** powers if garr.ndim else garr**powers
    return values * scale


def equivalence_defect(
    omega: HFieldGrid, q: QDifferential, alg: ChevalleyAlgebra, sl2: PrincipalSL2
) -> Tuple[float, float, float]:
    """(curvature norm, residual norm, mismatch norm) in the Toda gauge.

    The mismatch F + R measures the discretization gap between the
    zero-curvature and elliptic forms of the same equations; it shrinks at
    second order under grid refinement.
    """
    conn = build_toda_connection(omega, q, alg, sl2, gauge="toda")
    F = curvature(conn, alg)
    R = higgs_residual(omega, q, alg, sl2, check_bracket=False)
    grid = omega.grid
    mismatch = F + embed_cartan(alg, R)
    return (
        grid.max_norm(np.abs(F).max(axis=-1)),
        grid.max_norm(np.abs(R).max(axis=-1)),
        grid.max_norm(np.abs(mismatch).max(axis=-1)),
    )
