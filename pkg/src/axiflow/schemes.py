"""Residuals and exact Jacobians of the fully discrete schemes.

Unknowns are stored node-major: node ``j`` owns the entries
``j * nf + [r, z, fields...]`` where the scalar fields are

* surface diffusion, conserved mean curvature flow: ``[curvature]``
* intermediate flow: ``[Y, curvature]``

and ``curvature`` is the mean curvature for the stabilized schemes and the
curve curvature for the equidistributing ones.  Row ``j * nf + 0/1`` holds the
equation tested with the vector hat at node ``j``, row ``j * nf + 2`` the
equation tested with the scalar hat (volume equation), and for the
intermediate flow row ``j * nf + 3`` the equation for ``Y``.

All element integrals are computed on the reference element ``t in [0, 1]``;
the factor ``J`` in ``X_rho`` cancels against the element width ``h``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (BoundaryClass, BoundarySpec, Curve, DegenerateMesh,
                       element_geometry, perp)
from .linsolve import BandedMatrix
from .quadrature import GAUSS_T, GAUSS_W, lambda_offsets

FLOWS = ("sd", "intermediate", "cmcf")
VARIANTS = ("stabilized", "equidistributing")

_PHI = np.stack([1.0 - GAUSS_T, GAUSS_T])          # (2 local nodes, Q)
_SGN = np.array([-1.0, 1.0])                        # d(phi_k)/dt


@dataclass(frozen=True)
class FlowSpec:
    kind: str = "sd"
    scheme: str = "stabilized"
    alpha: float = 1.0
    xi: float = 1.0

    def __post_init__(self):
        if self.kind not in FLOWS:
            raise ValueError(f"unknown flow {self.kind!r}")
        if self.scheme not in VARIANTS:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.kind == "intermediate" and not (self.alpha > 0 and self.xi > 0):
            raise ValueError("alpha and xi must be positive")

    @property
    def n_scalar(self) -> int:
        return 2 if self.kind == "intermediate" else 1

    @property
    def equidistributing(self) -> bool:
        return self.scheme == "equidistributing"


@dataclass
class StepState:
    """Curve plus nodal scalar fields at one time level."""

    curve: Curve
    kappa: np.ndarray
    y: np.ndarray | None = None

    def copy(self) -> "StepState":
        return StepState(self.curve.copy(), self.kappa.copy(),
                         None if self.y is None else self.y.copy())


@dataclass
class DofMap:
    n_nodes: int
    nf: int
    closed: bool
    constrained: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @classmethod
    def build(cls, curve: Curve, bspec: BoundarySpec, flow: FlowSpec) -> "DofMap":
        nf = 2 + flow.n_scalar
        fixed = []
        if not curve.closed:
            for p, kind in enumerate(bspec.classes):
                j = bspec.endpoint_index(p, curve)
                if kind in (BoundaryClass.AXIS, BoundaryClass.WALL):
                    fixed.append(j * nf)
                elif kind is BoundaryClass.PLANE:
                    fixed.append(j * nf + 1)
                elif kind is BoundaryClass.FIXED:
                    fixed.extend([j * nf, j * nf + 1])
        return cls(curve.n_nodes, nf, curve.closed, np.array(sorted(fixed), dtype=int))

    @property
    def size(self) -> int:
        return self.n_nodes * self.nf

    @property
    def n_unknowns(self) -> int:
        """Number of free unknowns after eliminating the constrained positions."""
        return self.size - self.constrained.size

    @property
    def free(self) -> np.ndarray:
        mask = np.ones(self.size, dtype=bool)
        mask[self.constrained] = False
        return mask

    def index(self, node: int, comp: int) -> int:
        return node * self.nf + comp

    def pack(self, state: StepState) -> np.ndarray:
        u = np.empty((self.n_nodes, self.nf))
        u[:, :2] = state.curve.nodes
        if self.nf == 4:
            u[:, 2] = state.y
            u[:, 3] = state.kappa
        else:
            u[:, 2] = state.kappa
        return u.ravel()

    def unpack(self, u: np.ndarray, closed: bool) -> StepState:
        u = u.reshape(self.n_nodes, self.nf)
        curve = Curve(u[:, :2].copy(), closed=closed)
        if self.nf == 4:
            return StepState(curve, u[:, 3].copy(), u[:, 2].copy())
        return StepState(curve, u[:, 2].copy())


@dataclass
class SchemeSystem:
    residual: np.ndarray
    jacobian: BandedMatrix | None
    dofs: DofMap
    flow: FlowSpec
    dt: float


class Scheme:
    """One time step of a scheme: everything that depends on the old level only."""

    def __init__(self, flow: FlowSpec, old: Curve, bspec: BoundarySpec, dt: float):
        if dt <= 0:
            raise ValueError("time step must be positive")
        bspec.validate(old)
        self.flow, self.old, self.bspec, self.dt = flow, old, bspec, float(dt)
        self.dofs = DofMap.build(old, bspec, flow)
        nf = self.dofs.nf
        self.ia, self.ib = old.element_nodes()
        geo = element_geometry(old)
        self.Lm = geo.length
        self.num = geo.normal
        Xm = old.nodes
        self.Xm_a, self.Xm_b = Xm[self.ia], Xm[self.ib]
        self.dm = self.Xm_b - self.Xm_a
        self.rm_q = self.Xm_a[:, None, 0] * _PHI[0] + self.Xm_b[:, None, 0] * _PHI[1]
        self.w_stiff = 0.5 * (self.Xm_a[:, 0] + self.Xm_b[:, 0]) / self.Lm
        # weighted mass  L^m * int r^m phi_k phi_l dt
        self.mass_r = self.Lm[:, None, None] * np.einsum(
            "q,eq,kq,lq->ekl", GAUSS_W, self.rm_q, _PHI, _PHI)
        cvec = np.zeros(old.n_nodes)
        local_c = self.mass_r.sum(axis=2)
        np.add.at(cvec, self.ia, local_c[:, 0])
        np.add.at(cvec, self.ib, local_c[:, 1])
        self.cvec = cvec
        self.cdenom = cvec.sum()
        if flow.equidistributing:
            self.slope, self.offset = lambda_offsets(old, bspec)
        else:
            self.slope = np.zeros(old.n_nodes)
            self.offset = np.zeros(old.n_nodes)
        # global row/col index arrays for the local blocks (E, 2, nf, 2, nf)
        nodes = np.stack([self.ia, self.ib], axis=1)
        gidx = nodes[:, :, None] * nf + np.arange(nf)[None, None, :]
        self.rows = np.broadcast_to(gidx[:, :, :, None, None], (len(self.ia), 2, nf, 2, nf))
        self.cols = np.broadcast_to(gidx[:, None, None, :, :], (len(self.ia), 2, nf, 2, nf))
        self.gidx = gidx
        self.bandwidth = 2 * nf - 1

    # -- field helpers ---------------------------------------------------
    @property
    def curv_field(self) -> int:
        return 3 if self.flow.kind == "intermediate" else 2

    def effective_curvature(self, kappa: np.ndarray) -> np.ndarray:
        """Mean curvature entering the volume equation, kappa - lambda for equi."""
        if not self.flow.equidistributing:
            return kappa
        return (1.0 + self.slope) * kappa - self.offset

    # -- assembly ----------------------------------------------------------
    def assemble(self, state: StepState, jacobian: bool = True) -> SchemeSystem:
        flow, dofs = self.flow, self.dofs
        nf = dofs.nf
        E = len(self.ia)
        new = state.curve
        if new.n_nodes != self.old.n_nodes or new.closed != self.old.closed:
            raise ValueError("trial curve does not match the old curve")
        X = new.nodes
        Xa, Xb = X[self.ia], X[self.ib]
        dn = Xb - Xa
        L = np.hypot(dn[:, 0], dn[:, 1])
        if np.any(L <= 1e-14 * new.diameter()):
            raise DegenerateMesh("degenerate element in trial curve")
        Da, Db = Xa - self.Xm_a, Xb - self.Xm_b
        kap = state.kappa
        keff = self.effective_curvature(kap)
        dkeff = 1.0 + self.slope  # d keff / d kappa, nodal

        R = np.zeros((E, 2, nf))
        Jl = np.zeros((E, 2, nf, 2, nf)) if jacobian else None

        cf = self.curv_field
        vol = 2  # row of the volume equation
        inv_dt = 1.0 / self.dt

        # Gauss point data (E, Q)
        rq = Xa[:, None, 0] * _PHI[0] + Xb[:, None, 0] * _PHI[1]
        Dq = Da[:, None, :] * _PHI[0][None, :, None] + Db[:, None, :] * _PHI[1][None, :, None]
        rm = self.rm_q
        g = ((2 * rm + rq)[..., None] * self.dm[:, None, :]
             + (2 * rq + rm)[..., None] * dn[:, None, :])
        fh = -perp(g) / 6.0                              # h * f^{m+1/2}
        Dfh = np.sum(Dq * fh, axis=2)                     # (E, Q)

        # volume equation: (1/dt) <X^{m+1} - X^m, chi f>
        R[:, :, vol] += inv_dt * np.einsum("q,kq,eq->ek", GAUSS_W, _PHI, Dfh)
        if jacobian:
            # derivative of dg w.r.t. X_{l,c}: (E, Q, l, c, 2)
            dg = np.zeros((E, len(GAUSS_T), 2, 2, 2))
            coef = (2 * rq + rm)                          # (E, Q)
            for l in range(2):
                dg[:, :, l, 0, :] += _PHI[l][None, :, None] * (self.dm + 2 * dn)[:, None, :]
                for c in range(2):
                    dg[:, :, l, c, c] += coef * _SGN[l]
            dfh = -perp(dg) / 6.0
            # d(D.fh)/dX_{l,c} = phi_l fh_c + D . dfh
            dDfh = (_PHI.T[None, :, :, None] * fh[:, :, None, :]
                    + np.einsum("eqd,eqlcd->eqlc", Dq, dfh))
            Jl[:, :, vol, :, 0:2] += inv_dt * np.einsum("q,kq,eqlc->eklc", GAUSS_W, _PHI, dDfh)

        # volume equation: driving term
        if flow.kind == "intermediate":
            self._stiffness(R, Jl, vol, 2, state.y, -1.0, None)
        elif flow.kind == "sd":
            self._stiffness(R, Jl, vol, cf, keff, -1.0, dkeff)
        else:
            self._mass(R, Jl, vol, cf, keff, -1.0, dkeff)
            nonlocal_avg = np.dot(self.cvec, keff) / self.cdenom

        # intermediate Y equation
        if flow.kind == "intermediate":
            ze = 3
            self._stiffness(R, Jl, ze, 2, state.y, 1.0 / flow.xi, None)
            self._mass(R, Jl, ze, 2, state.y, 1.0 / flow.alpha, None)
            self._mass(R, Jl, ze, cf, keff, -1.0, dkeff)

        # curvature (vector test function) equations
        if flow.equidistributing:
            # lumped <kappa nu^m, eta |X^m_rho|>^h
            half = 0.5 * self.Lm
            for k, idx in enumerate((self.ia, self.ib)):
                R[:, k, 0:2] += (kap[idx] * half)[:, None] * self.num
                if jacobian:
                    Jl[:, k, 0:2, k, cf] += half[:, None] * self.num
            # <X_rho, eta_rho / |X^m_rho|>
            for k in range(2):
                R[:, k, 0:2] += _SGN[k] * dn / self.Lm[:, None]
                if jacobian:
                    for l in range(2):
                        for c in range(2):
                            Jl[:, k, c, l, c] += _SGN[k] * _SGN[l] / self.Lm
        else:
            kq = kap[self.ia][:, None] * _PHI[0] + kap[self.ib][:, None] * _PHI[1]
            # <kappa f, eta>
            R[:, :, 0:2] += np.einsum("q,kq,eq,eqc->ekc", GAUSS_W, _PHI, kq, fh)
            if jacobian:
                Jl[:, :, 0:2, :, 0:2] += np.einsum(
                    "q,kq,eq,eqlcd->ekdlc", GAUSS_W, _PHI, kq, dfh)
                Jl[:, :, 0:2, :, cf] += np.einsum(
                    "q,kq,lq,eqc->ekcl", GAUSS_W, _PHI, _PHI, fh)
            # <eta . e1, |X_rho|>
            R[:, :, 0] += 0.5 * L[:, None]
            if jacobian:
                for l in range(2):
                    Jl[:, :, 0, l, 0:2] += 0.5 * _SGN[l] * (dn / L[:, None])[:, None, :]
            # <r^m X_rho, eta_rho / |X^m_rho|>
            for k in range(2):
                R[:, k, 0:2] += (self.w_stiff * _SGN[k])[:, None] * dn
                if jacobian:
                    for l in range(2):
                        for c in range(2):
                            Jl[:, k, c, l, c] += self.w_stiff * _SGN[k] * _SGN[l]

        # scatter
        res = np.zeros(dofs.size)
        np.add.at(res, self.gidx.ravel(), R.ravel())
        jac = None
        if jacobian:
            jac = BandedMatrix.zeros(dofs.size, self.bandwidth, self.bandwidth)
            jac.add(self.rows, self.cols, Jl)

        if flow.kind == "cmcf":
            rows = np.arange(self.old.n_nodes) * nf + vol
            res[rows] += self.cvec * nonlocal_avg
            if jacobian:
                u = np.zeros(dofs.size)
                v = np.zeros(dofs.size)
                u[rows] = self.cvec / self.cdenom
                v[np.arange(self.old.n_nodes) * nf + cf] = self.cvec * dkeff
                jac.add_low_rank(u, v)

        self._contact(res, jac, new)

        res[dofs.constrained] = 0.0
        if jacobian:
            for i in dofs.constrained:
                jac.set_identity_row(int(i))
        return SchemeSystem(res, jac, dofs, flow, self.dt)

    def _stiffness(self, R, Jl, row, col, values, scale, dvalues):
        """Add ``scale * <r^m s_rho, chi_rho |X^m_rho|^{-1}>`` for nodal field s."""
        s = np.asarray(values)
        ds = s[self.ib] - s[self.ia]
        for k in range(2):
            R[:, k, row] += scale * self.w_stiff * ds * _SGN[k]
        if Jl is not None:
            for k in range(2):
                for l, idx in enumerate((self.ia, self.ib)):
                    d = 1.0 if dvalues is None else dvalues[idx]
                    Jl[:, k, row, l, col] += scale * self.w_stiff * _SGN[k] * _SGN[l] * d

    def _mass(self, R, Jl, row, col, values, scale, dvalues):
        """Add ``scale * <r^m s, chi |X^m_rho|>`` for nodal field s."""
        s = np.asarray(values)
        se = np.stack([s[self.ia], s[self.ib]], axis=1)
        R[:, :, row] += scale * np.einsum("ekl,el->ek", self.mass_r, se)
        if Jl is not None:
            for l, idx in enumerate((self.ia, self.ib)):
                d = 1.0 if dvalues is None else dvalues[idx]
                Jl[:, :, row, l, col] += scale * self.mass_r[:, :, l] * np.asarray(d)[..., None]

    def _contact(self, res, jac, new: Curve) -> None:
        terms, dterm = contact_terms(self.bspec, self.old, new, self.flow.scheme)
        nf = self.dofs.nf
        res[0::nf] += terms[:, 0]
        res[1::nf] += terms[:, 1]
        if jac is not None:
            for j, val in dterm:
                jac.add([j * nf], [j * nf], [val])


def contact_terms(bspec: BoundarySpec, old: Curve, new: Curve, variant: str):
    """Boundary contributions of the contact energies to the vector-test rows.

    Returns ``(terms, derivs)``: ``terms`` is ``(n_nodes, 2)`` (added to the
    residual of the equation tested with the vector hat at each endpoint)
    and ``derivs`` lists ``(node, d term_r / d r)`` for the implicit part.
    """
    terms = np.zeros((old.n_nodes, 2))
    derivs = []
    if bspec.is_closed:
        return terms, derivs
    for p, kind in enumerate(bspec.classes):
        rho = bspec.rho[p]
        if kind in (BoundaryClass.AXIS, BoundaryClass.FIXED):
            if rho != 0.0:
                raise ValueError(f"contact energy on endpoint {p} of class {kind.value}")
            continue
        if rho == 0.0:
            continue
        j = bspec.endpoint_index(p, old)
        if variant == "equidistributing":
            terms[j, 1 if kind is BoundaryClass.WALL else 0] += rho
        elif kind is BoundaryClass.WALL:
            terms[j, 1] += rho * old.r[j]
        else:
            pos, neg = max(rho, 0.0), min(rho, 0.0)
            terms[j, 0] += pos * new.r[j] + neg * old.r[j]
            if pos:
                derivs.append((j, pos))
    return terms, derivs


# -- functional entry points ------------------------------------------------

def _residual(flow: FlowSpec, old: Curve, trial: StepState, dt: float,
              bspec: BoundarySpec | None) -> np.ndarray:
    bspec = bspec if bspec is not None else BoundarySpec.axis_both()
    return Scheme(flow, old, bspec, dt).assemble(trial, jacobian=False).residual


def residual_sd_stab(old, trial, dt, bspec=None):
    return _residual(FlowSpec("sd", "stabilized"), old, trial, dt, bspec)


def residual_sd_equi(old, trial, dt, bspec=None):
    return _residual(FlowSpec("sd", "equidistributing"), old, trial, dt, bspec)


def residual_intermediate(old, trial, dt, alpha, xi, bspec=None, scheme="stabilized"):
    if not (alpha > 0 and xi > 0):
        raise ValueError("alpha and xi must be positive")
    return _residual(FlowSpec("intermediate", scheme, alpha, xi), old, trial, dt, bspec)


def residual_cmcf(old, trial, dt, bspec=None, scheme="stabilized"):
    return _residual(FlowSpec("cmcf", scheme), old, trial, dt, bspec)


def assemble_jacobian(flow: FlowSpec, old: Curve, trial: StepState, dt: float,
                      bspec: BoundarySpec | None = None) -> SchemeSystem:
    bspec = bspec if bspec is not None else BoundarySpec.axis_both()
    return Scheme(flow, old, bspec, dt).assemble(trial)


def initial_state(flow: FlowSpec, curve: Curve, bspec: BoundarySpec) -> StepState:
    """Scalar fields consistent with the curve at the initial time.

    The curvature solves the vector-test equations at ``X^{m+1} = X^m`` in
    the least-squares sense (they are linear in it); ``Y`` then solves its
    own equation exactly.
    """
    n = curve.n_nodes
    zeros = np.zeros(n)
    state = StepState(curve.copy(), zeros.copy(),
                      zeros.copy() if flow.kind == "intermediate" else None)
    scheme = Scheme(flow, curve, bspec, 1.0)
    system = scheme.assemble(state)
    dofs = scheme.dofs
    A = system.jacobian.to_dense()
    nf = dofs.nf
    free = dofs.free
    vec_rows = np.array([i for i in range(dofs.size) if i % nf < 2 and free[i]])
    kcols = np.arange(n) * nf + scheme.curv_field
    kappa, *_ = np.linalg.lstsq(A[np.ix_(vec_rows, kcols)], -system.residual[vec_rows],
                                rcond=None)
    state.kappa = kappa
    if flow.kind == "intermediate":
        system = scheme.assemble(state)
        A = system.jacobian.to_dense()
        yrows = np.arange(n) * nf + 3
        ycols = np.arange(n) * nf + 2
        state.y = np.linalg.solve(A[np.ix_(yrows, ycols)], -system.residual[yrows])
    return state
