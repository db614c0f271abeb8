"""Standard-form second-order cone programs and a pluggable solve backend.

A program holds a linear objective, second-order cone constraints
``||A x + b|| <= c.x + d`` and linear equalities, plus a name registry mapping
solver columns back to planner quantities.  Quadratic objective terms enter
through an epigraph cone.  The reference backend wraps cvxopt's cone LP
solver, sized comfortably for the few-thousand-variable programs the planner
produces.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

# Feasibility tolerance a SolveResult must meet for status "optimal".
FEASIBILITY_TOL = 1e-6

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_NUMERICAL = "numerical-failure"


@dataclass
class SocConstraint:
    """||A x + b||_2 <= c.x + d; A may have zero rows (linear inequality)."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: float
    label: str = ""

    def residual(self, x: np.ndarray) -> float:
        """Slack c.x + d - ||A x + b||; nonnegative when satisfied."""
        lhs = float(np.linalg.norm(self.A @ x + self.b)) if self.A.shape[0] else 0.0
        return float(self.c @ x) + self.d - lhs


@dataclass
class SolveResult:
    status: str
    x: Optional[np.ndarray]
    objective: Optional[float]
    iterations: int = 0
    wall_time: float = 0.0


class CvxoptBackend:
    """Reference interior-point backend on cvxopt's cone LP solver."""

    name = "cvxopt"

    def __init__(self, abstol=1e-9, reltol=1e-9, feastol=1e-9, maxiters=200):
        self.options = {
            "show_progress": False,
            "abstol": abstol,
            "reltol": reltol,
            "feastol": feastol,
            "maxiters": maxiters,
        }

    def solve(self, f, socs, E, g):
        from cvxopt import matrix, solvers, spmatrix

        n = len(f)
        rows_lin, rows_soc, q_dims = [], [], []
        for soc in socs:
            if soc.A.shape[0] == 0:
                rows_lin.append(soc)
            else:
                rows_soc.append(soc)
                q_dims.append(soc.A.shape[0] + 1)

        # G x + s = h with s in the nonnegative orthant then the product of
        # second-order cones: each cone contributes the row block [-c; -A]
        # against [d; b].
        vals, ri, ci = [], [], []
        h = []
        row = 0

        def put_row(vec, rhs):
            nonlocal row
            nz = np.nonzero(vec)[0]
            vals.extend((-vec[nz]).tolist())
            ri.extend([row] * len(nz))
            ci.extend(nz.tolist())
            h.append(rhs)
            row += 1

        for soc in rows_lin:
            put_row(soc.c, soc.d)
        for soc in rows_soc:
            put_row(soc.c, soc.d)
            for k in range(soc.A.shape[0]):
                put_row(soc.A[k], float(soc.b[k]))

        G = spmatrix(vals, ri, ci, (row, n))
        hvec = matrix(np.asarray(h))
        dims = {"l": len(rows_lin), "q": q_dims, "s": []}

        A_eq = b_eq = None
        if E is not None and E.shape[0] > 0:
            evals, eri, eci = [], [], []
            for i in range(E.shape[0]):
                nz = np.nonzero(E[i])[0]
                evals.extend(E[i, nz].tolist())
                eri.extend([i] * len(nz))
                eci.extend(nz.tolist())
            A_eq = spmatrix(evals, eri, eci, (E.shape[0], n))
            b_eq = matrix(np.asarray(g))

        t0 = time.perf_counter()
        try:
            sol = solvers.conelp(
                matrix(np.asarray(f)), G, hvec, dims, A=A_eq, b=b_eq, options=self.options
            )
        except (ValueError, ArithmeticError, ZeroDivisionError) as exc:
            return SolveResult(STATUS_NUMERICAL, None, None, 0, time.perf_counter() - t0), str(exc)
        elapsed = time.perf_counter() - t0

        status_map = {
            "optimal": STATUS_OPTIMAL,
            "primal infeasible": STATUS_INFEASIBLE,
            "dual infeasible": STATUS_UNBOUNDED,
            "unknown": STATUS_NUMERICAL,
        }
        status = status_map.get(sol["status"], STATUS_NUMERICAL)
        x = np.asarray(sol["x"]).ravel() if sol["x"] is not None and status == STATUS_OPTIMAL else None
        obj = float(np.dot(f, x)) if x is not None else None
        return SolveResult(status, x, obj, int(sol.get("iterations", 0)), elapsed), ""


_DEFAULT_BACKEND = None


def default_backend() -> CvxoptBackend:
    global _DEFAULT_BACKEND
    if _DEFAULT_BACKEND is None:
        _DEFAULT_BACKEND = CvxoptBackend()
    return _DEFAULT_BACKEND


class ConicProgram:
    """Mutable SOCP under construction; single-owner until solved."""

    def __init__(self):
        self._names: list[str] = []
        self._index: dict[str, int] = {}
        self._objective: dict[int, float] = {}
        self.socs: list[SocConstraint] = []
        self._eq_rows: list[np.ndarray] = []
        self._eq_rhs: list[float] = []

    # -- variables -----------------------------------------------------------
    @property
    def num_vars(self) -> int:
        return len(self._names)

    @property
    def names(self) -> list[str]:
        return list(self._names)

    def add_variable(self, name: str) -> int:
        if name in self._index:
            raise ValueError(f"duplicate variable name {name!r}")
        self._index[name] = len(self._names)
        self._names.append(name)
        return self._index[name]

    def column(self, name: str) -> int:
        return self._index[name]

    def unit_vector(self, name: str) -> np.ndarray:
        e = np.zeros(self.num_vars)
        e[self.column(name)] = 1.0
        return e

    # -- objective -----------------------------------------------------------
    def add_objective_term(self, name: str, coeff: float) -> None:
        col = self.column(name)
        self._objective[col] = self._objective.get(col, 0.0) + float(coeff)

    def objective_vector(self) -> np.ndarray:
        f = np.zeros(self.num_vars)
        for col, coeff in self._objective.items():
            f[col] = coeff
        return f

    # -- constraints ----------------------------------------------------------
    def _pad(self, vec: np.ndarray) -> np.ndarray:
        vec = np.asarray(vec, dtype=float).ravel()
        if len(vec) > self.num_vars:
            raise ValueError("coefficient vector longer than variable count")
        if len(vec) < self.num_vars:
            vec = np.concatenate([vec, np.zeros(self.num_vars - len(vec))])
        return vec

    def add_soc(self, A, b, c, d, label: str = "") -> int:
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.size == 0:
            A = np.zeros((0, self.num_vars))
        b = np.asarray(b, dtype=float).ravel()
        if A.shape[0] != len(b):
            raise ValueError(f"A has {A.shape[0]} rows but b has {len(b)} entries")
        if A.shape[0] > 0:
            if A.shape[1] > self.num_vars:
                raise ValueError("A has more columns than variables")
            if A.shape[1] < self.num_vars:
                A = np.hstack([A, np.zeros((A.shape[0], self.num_vars - A.shape[1]))])
        self.socs.append(SocConstraint(A, b, self._pad(c), float(d), label))
        return len(self.socs) - 1

    def add_linear_ge(self, c, d, label: str = "") -> int:
        """Degenerate cone: the linear inequality c.x + d >= 0."""
        return self.add_soc(np.zeros((0, self.num_vars)), np.zeros(0), c, d, label)

    def add_equality(self, e, g: float) -> int:
        self._eq_rows.append(self._pad(e))
        self._eq_rhs.append(float(g))
        return len(self._eq_rows) - 1

    def add_square_epigraph(self, F, w_name: str, label: str = "") -> int:
        """Constrain variable w >= ||F x||^2 via ||(2 F x, w - 1)|| <= w + 1."""
        F = np.atleast_2d(np.asarray(F, dtype=float))
        if F.shape[1] > self.num_vars:
            raise ValueError("F has more columns than variables")
        if F.shape[1] < self.num_vars:
            F = np.hstack([F, np.zeros((F.shape[0], self.num_vars - F.shape[1]))])
        e_w = self.unit_vector(w_name)
        A = np.vstack([2.0 * F, e_w])
        b = np.concatenate([np.zeros(F.shape[0]), [-1.0]])
        return self.add_soc(A, b, e_w, 1.0, label or f"epigraph:{w_name}")

    def equalities(self):
        if not self._eq_rows:
            return None, None
        E = np.vstack([self._pad(r) for r in self._eq_rows])
        return E, np.asarray(self._eq_rhs)

    # -- solving ---------------------------------------------------------------
    def solve(self, backend=None) -> SolveResult:
        if self.num_vars == 0:
            raise ValueError("program has no variables")
        backend = backend or default_backend()
        f = self.objective_vector()
        socs = []
        for s in self.socs:
            A = s.A
            if A.shape[0] == 0:
                A = np.zeros((0, self.num_vars))
            elif A.shape[1] < self.num_vars:
                A = np.hstack([A, np.zeros((A.shape[0], self.num_vars - A.shape[1]))])
            socs.append(SocConstraint(A, s.b, self._pad(s.c), s.d, s.label))
        E, g = self.equalities()
        result, _diag = backend.solve(f, socs, E, g)

        if result.status == STATUS_OPTIMAL:
            worst = min((s.residual(result.x) for s in socs), default=0.0)
            eq_resid = float(np.max(np.abs(E @ result.x - g))) if E is not None else 0.0
            if worst < -FEASIBILITY_TOL or eq_resid > FEASIBILITY_TOL:
                return SolveResult(STATUS_NUMERICAL, None, None, result.iterations, result.wall_time)
        return result

    # -- debug dump --------------------------------------------------------------
    def dump(self, path: str) -> None:
        """Plain-text (JSON) dump for reproducing solver issues."""
        E, g = self.equalities()
        doc = {
            "format": "flatplan-socp-dump-1",
            "variables": self._names,
            "objective": self.objective_vector().tolist(),
            "cones": [
                {
                    "A": s.A.tolist(),
                    "b": s.b.tolist(),
                    "c": self._pad(s.c).tolist(),
                    "d": s.d,
                    "label": s.label,
                }
                for s in self.socs
            ],
            "equalities": {
                "E": E.tolist() if E is not None else [],
                "g": g.tolist() if g is not None else [],
            },
        }
        with open(path, "w") as fh:
            json.dump(doc, fh)

    @classmethod
    def load(cls, path: str) -> "ConicProgram":
        with open(path) as fh:
            doc = json.load(fh)
        prog = cls()
        for name in doc["variables"]:
            prog.add_variable(name)
        for col, coeff in enumerate(doc["objective"]):
            if coeff != 0.0:
                prog.add_objective_term(doc["variables"][col], coeff)
        for cone in doc["cones"]:
            A = np.asarray(cone["A"], dtype=float)
            if A.size == 0:
                A = np.zeros((0, prog.num_vars))
            prog.add_soc(A, cone["b"], cone["c"], cone["d"], cone.get("label", ""))
        for row, rhs in zip(doc["equalities"]["E"], doc["equalities"]["g"]):
            prog.add_equality(row, rhs)
        return prog


def symmetric_square_root(Q: np.ndarray, clip: float = 0.0) -> np.ndarray:
    """R with R^T R = Q for symmetric PSD Q (tiny negative eigenvalues clipped)."""
    sym = 0.5 * (Q + Q.T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    eigvals = np.clip(eigvals, clip, None)
    return (eigvecs * np.sqrt(eigvals)).T
