"""Brute-force under-approximation of reachable sets.

Simulates piecewise-constant bang-bang controls through the exact step
map x_{k+1} = e^(A d) x_k + (int_0^d e^(As) ds) B u_k, both factors
enclosed by certified series (the integral factor has its own series, so
singular A is fine).  Every endpoint box is guaranteed to contain an
exactly reachable point, which makes the cloud an independent oracle for
support dominance and membership tests.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from . import _kernel as K
from . import qlinalg as ql
from .algnum import exp_and_phi, tol_bits
from .dyadic import DyInterval, bits, getbits
from .exppoly import form_fc
from .model import Hypercube, ReachProblem, Singleton, ZeroInput


@dataclass
class ControlSchedule:
    step: Fraction            # duration of each piece
    values: tuple             # tuple of input vectors (each a tuple of rationals)

    @property
    def total_time(self) -> Fraction:
        return self.step * len(self.values)


def _step_matrices(a_rows, b_cols, delta: Fraction, prec: int):
    e_flat, phi_flat = exp_and_phi(a_rows, delta, prec)
    n = len(a_rows)
    m = len(b_cols[0])
    with bits(prec):
        b_iv = [DyInterval.from_fraction(x, prec) for row in b_cols for x in row]
        fb = []
        for i in range(n):
            row = []
            for j in range(m):
                acc = DyInterval.exact(0)
                for k in range(n):
                    acc = acc + phi_flat[i * n + k] * b_iv[k * m + j]
                row.append(acc)
            fb.append(row)
    return e_flat, fb


def simulate_schedule(a_rows, b_cols, sched: ControlSchedule, tol) -> list:
    """Certified enclosure of the endpoint x(T) of a piecewise-constant run."""
    tol = Fraction(tol)
    n = len(a_rows)
    if not sched.values:
        return [DyInterval.exact(0)] * n
    prec = max(getbits(), tol_bits(tol) + 16 + len(sched.values).bit_length() * 2)
    for _ in range(6):
        e_flat, fb = _step_matrices(a_rows, b_cols, sched.step, prec)
        gs = []
        seen = {}
        picks = []
        with bits(prec):
            for u in sched.values:
                key = tuple(Fraction(x) for x in u)
                if key not in seen:
                    seen[key] = len(gs)
                    g = []
                    for i in range(n):
                        acc = DyInterval.exact(0)
                        for j, uj in enumerate(key):
                            acc = acc + fb[i][j] * DyInterval.from_fraction(uj, prec)
                        g.append(acc)
                    gs.append([x.t for x in g])
                picks.append(seen[key])
            out = K.run_schedule([x.t for x in e_flat], gs, picks, n, prec)
        res = [DyInterval(t) for t in out]
        if max(x.width for x in res) <= tol:
            return res
        prec *= 2
    raise ArithmeticError("simulate_schedule: tolerance unreachable")


def _vertices(m: int):
    out = []
    for mask in range(1 << m):
        out.append(tuple(Fraction(1 if (mask >> j) & 1 else -1) for j in range(m)))
    return out


def sample_reachable_cloud(problem: ReachProblem, n_schedules: int, t_total,
                           steps: int, seed: int = 0, tol=Fraction(1, 10 ** 9),
                           extremal_directions=()) -> list:
    """Certified-reachable endpoint boxes from random + extremal schedules.

    Deterministic under the seed.  Extremal schedules follow the optimal
    bang-bang shape: per column j, u_j(t) = sgn(c^T e^(At) b_j) sampled
    at step midpoints for each requested direction c.
    """
    t_total = Fraction(t_total)
    if n_schedules <= 0:
        return []
    if not isinstance(problem.input_set, (Hypercube, Singleton)):
        raise ValueError("cloud sampling needs a hypercube or singleton input")
    delta = t_total / steps
    rng = random.Random(seed)
    m = problem.m
    a_rows, b_cols = problem.a, problem.b
    schedules = []
    if isinstance(problem.input_set, Singleton):
        u = tuple(Fraction(x) for x in problem.input_set.value)
        for i in range(n_schedules):
            length = rng.randrange(0, steps + 1)
            schedules.append(ControlSchedule(delta, (u,) * length))
    else:
        verts = _vertices(m)
        for c in extremal_directions:
            f_by_col = [form_fc(a_rows, problem.column(j), c) for j in range(m)]
            vals = []
            with bits(96):
                for k in range(steps):
                    mid = DyInterval.from_fraction(delta * k + delta / 2)
                    u = []
                    for j in range(m):
                        if f_by_col[j].identically_zero:
                            u.append(Fraction(1))
                            continue
                        s = f_by_col[j].eval(mid, 96)
                        u.append(Fraction(1 if s.mid >= 0 else -1))
                    vals.append(tuple(u))
            schedules.append(ControlSchedule(delta, tuple(vals)))
        while len(schedules) < n_schedules:
            length = rng.randrange(1, steps + 1)
            vals = tuple(verts[rng.randrange(len(verts))] for _ in range(length))
            schedules.append(ControlSchedule(delta, vals))
    schedules = schedules[:n_schedules]

    # one shared pair of step matrices per (A, delta); schedules only
    # differ in their vertex picks, so the kernel loop does all the work
    prec = max(getbits(), tol_bits(Fraction(tol)) + 16 + steps.bit_length() * 2)
    e_flat, fb = _step_matrices(a_rows, b_cols, delta, prec)
    n = len(a_rows)
    gs = []
    seen = {}
    with bits(prec):
        cloud = []
        e_t = [x.t for x in e_flat]
        for sched in schedules:
            picks = []
            for u in sched.values:
                if u not in seen:
                    g = []
                    for i in range(n):
                        acc = DyInterval.exact(0)
                        for j, uj in enumerate(u):
                            acc = acc + fb[i][j] * DyInterval.from_fraction(uj, prec)
                        g.append(acc)
                    seen[u] = len(gs)
                    gs.append([x.t for x in g])
                picks.append(seen[u])
            out = K.run_schedule(e_t, gs, picks, n, prec)
            cloud.append([DyInterval(t) for t in out])
    return cloud


def cloud_to_csv(cloud) -> str:
    """CSV with one row per endpoint: lo/hi per coordinate."""
    if not cloud:
        return "\n"
    n = len(cloud[0])
    header = ",".join(
        "x%d_lo,x%d_hi" % (i, i) for i in range(n)
    )
    lines = [header]
    for box in cloud:
        cells = []
        for e in box:
            cells.append("%.17g" % float(e.lo))
            cells.append("%.17g" % float(e.hi))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
