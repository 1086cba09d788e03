"""Batched stochastic-Heun stepping for the two-junction loop equations.

Everything in this module works in dimensionless junction units: currents in
I0, voltages in I0*R, time in Phi0/(2*pi*I0*R), flux in Phi0.  Each task in a
batch owns an independent noise stream seeded from (seed, task index), so any
partition of a batch into sub-batches (serial, threaded, re-grouped) produces
bit-identical trajectories.

The stepping kernels are JIT-compiled with numba when available; set
SLUGSIM_NO_NUMBA=1 to force the pure-Python fallback (slow, same arithmetic).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import IntegrationStabilityError

# Accumulator columns: sum v1, sum v2, sum v1*cos, sum v1*sin, sum v2*cos,
# sum v2*sin, sum cos, sum sin, running max |v|.
ACC_V1, ACC_V2, ACC_V1C, ACC_V1S, ACC_V2C, ACC_V2S, ACC_C, ACC_S, ACC_MAXV = range(9)
NACC = 9


def _heun_overdamped(d1, d2, ib0, phia, ampf, ampb, omega, cbias, sin_scale,
                     beta_l, noise, dt, t0, acc,
                     stride, idx_base, pd1, pd2, st_d1, st_d2, st_v1, st_v2):
    nsteps = noise.shape[0]
    n = d1.shape[0]
    inv_pi = 1.0 / np.pi
    for k in range(nsteps):
        t = t0 + k * dt
        ca = np.cos(omega * t)
        cb = np.cos(omega * (t + dt))
        ph = omega * (t + 0.5 * dt)
        c = np.cos(ph)
        s = np.sin(ph)
        for i in range(n):
            ib_a = ib0[i] + ampb[i] * ca
            ib_b = ib0[i] + ampb[i] * cb
            ph_a = phia[i] + ampf[i] * ca + cbias * ib_a
            ph_b = phia[i] + ampf[i] * cb + cbias * ib_b
            w1 = noise[k, i, 0]
            w2 = noise[k, i, 1]
            x1 = d1[i]
            x2 = d2[i]
            j = ((x2 - x1) * inv_pi - 2.0 * ph_a) / beta_l
            f1 = 0.5 * ib_a + j - sin_scale * np.sin(x1) + w1
            f2 = 0.5 * ib_a - j - sin_scale * np.sin(x2) + w2
            p1 = x1 + dt * f1
            p2 = x2 + dt * f2
            jb = ((p2 - p1) * inv_pi - 2.0 * ph_b) / beta_l
            g1 = 0.5 * ib_b + jb - sin_scale * np.sin(p1) + w1
            g2 = 0.5 * ib_b - jb - sin_scale * np.sin(p2) + w2
            y1 = x1 + 0.5 * dt * (f1 + g1)
            y2 = x2 + 0.5 * dt * (f2 + g2)
            v1 = (y1 - x1) / dt
            v2 = (y2 - x2) / dt
            d1[i] = y1
            d2[i] = y2
            acc[i, 0] += v1
            acc[i, 1] += v2
            acc[i, 2] += v1 * c
            acc[i, 3] += v1 * s
            acc[i, 4] += v2 * c
            acc[i, 5] += v2 * s
            acc[i, 6] += c
            acc[i, 7] += s
            av = abs(v1)
            if abs(v2) > av:
                av = abs(v2)
            if av > acc[i, 8]:
                acc[i, 8] = av
        if stride > 0 and (k + 1) % stride == 0:
            idx = idx_base + (k + 1) // stride - 1
            for i in range(n):
                st_d1[idx, i] = d1[i]
                st_d2[idx, i] = d2[i]
                st_v1[idx, i] = (d1[i] - pd1[i]) / (stride * dt)
                st_v2[idx, i] = (d2[i] - pd2[i]) / (stride * dt)
                pd1[i] = d1[i]
                pd2[i] = d2[i]


def _heun_rcsj(d1, d2, u1, u2, ib0, phia, ampf, ampb, omega, cbias, sin_scale,
               beta_l, beta_c, noise, dt, t0, acc,
               stride, idx_base, pd1, pd2, st_d1, st_d2, st_v1, st_v2):
    nsteps = noise.shape[0]
    n = d1.shape[0]
    inv_pi = 1.0 / np.pi
    inv_bc = 1.0 / beta_c
    for k in range(nsteps):
        t = t0 + k * dt
        ca = np.cos(omega * t)
        cb = np.cos(omega * (t + dt))
        ph = omega * (t + 0.5 * dt)
        c = np.cos(ph)
        s = np.sin(ph)
        for i in range(n):
            ib_a = ib0[i] + ampb[i] * ca
            ib_b = ib0[i] + ampb[i] * cb
            ph_a = phia[i] + ampf[i] * ca + cbias * ib_a
            ph_b = phia[i] + ampf[i] * cb + cbias * ib_b
            w1 = noise[k, i, 0]
            w2 = noise[k, i, 1]
            x1 = d1[i]
            x2 = d2[i]
            q1 = u1[i]
            q2 = u2[i]
            j = ((x2 - x1) * inv_pi - 2.0 * ph_a) / beta_l
            a1 = (0.5 * ib_a + j - sin_scale * np.sin(x1) + w1 - q1) * inv_bc
            a2 = (0.5 * ib_a - j - sin_scale * np.sin(x2) + w2 - q2) * inv_bc
            px1 = x1 + dt * q1
            px2 = x2 + dt * q2
            pq1 = q1 + dt * a1
            pq2 = q2 + dt * a2
            jb = ((px2 - px1) * inv_pi - 2.0 * ph_b) / beta_l
            b1 = (0.5 * ib_b + jb - sin_scale * np.sin(px1) + w1 - pq1) * inv_bc
            b2 = (0.5 * ib_b - jb - sin_scale * np.sin(px2) + w2 - pq2) * inv_bc
            y1 = x1 + 0.5 * dt * (q1 + pq1)
            y2 = x2 + 0.5 * dt * (q2 + pq2)
            u1[i] = q1 + 0.5 * dt * (a1 + b1)
            u2[i] = q2 + 0.5 * dt * (a2 + b2)
            v1 = (y1 - x1) / dt
            v2 = (y2 - x2) / dt
            d1[i] = y1
            d2[i] = y2
            acc[i, 0] += v1
            acc[i, 1] += v2
            acc[i, 2] += v1 * c
            acc[i, 3] += v1 * s
            acc[i, 4] += v2 * c
            acc[i, 5] += v2 * s
            acc[i, 6] += c
            acc[i, 7] += s
            av = abs(v1)
            if abs(v2) > av:
                av = abs(v2)
            if av > acc[i, 8]:
                acc[i, 8] = av
        if stride > 0 and (k + 1) % stride == 0:
            idx = idx_base + (k + 1) // stride - 1
            for i in range(n):
                st_d1[idx, i] = d1[i]
                st_d2[idx, i] = d2[i]
                st_v1[idx, i] = (d1[i] - pd1[i]) / (stride * dt)
                st_v2[idx, i] = (d2[i] - pd2[i]) / (stride * dt)
                pd1[i] = d1[i]
                pd2[i] = d2[i]


if os.environ.get("SLUGSIM_NO_NUMBA"):
    _numba = None
else:
    try:
        import numba as _numba
    except ImportError:  # pragma: no cover
        _numba = None

if _numba is not None:
    _jit = _numba.njit(cache=True, nogil=True)
    _heun_overdamped = _jit(_heun_overdamped)
    _heun_rcsj = _jit(_heun_rcsj)

_EMPTY_STORE = np.empty((0, 0))

# Default chunk length: bounds the pre-generated noise buffer to a few MB per
# hundred tasks while keeping kernel-call overhead negligible.
CHUNK_STEPS = 8192


@dataclass
class Task:
    """One simulation in a batch, in dimensionless units."""

    index: int
    ib0: float
    phia: float
    amp_flux: float = 0.0
    amp_bias: float = 0.0
    omega: float = 0.0
    noise_scale: float = 0.0


@dataclass
class EngineScalars:
    """Device-level scalars shared by every task in a batch."""

    beta_l: float
    beta_c: float = 0.0
    cbias: float = 0.0       # flux coupled per unit bias current (topology)
    sin_scale: float = 1.0   # 0.0 switches the Josephson elements off


@dataclass
class TaskStats:
    """Accumulated sums for one task, converted to estimates on demand."""

    nsteps: int = 0
    sums: np.ndarray = field(default_factory=lambda: np.zeros(NACC))
    # Per-block quadrature samples used for standard-error estimation:
    # rows of (n, v1, v2, x1, y1, x2, y2) where x/y are DC-corrected
    # lock-in quadratures of the per-junction velocities for that block.
    blocks: list = field(default_factory=list)

    def v_means(self):
        return self.sums[ACC_V1] / self.nsteps, self.sums[ACC_V2] / self.nsteps

    def quadratures(self):
        """DC-leakage-corrected lock-in quadratures over the full span."""
        n = self.nsteps
        mv1 = self.sums[ACC_V1] / n
        mv2 = self.sums[ACC_V2] / n
        x1 = 2.0 * (self.sums[ACC_V1C] - mv1 * self.sums[ACC_C]) / n
        y1 = 2.0 * (self.sums[ACC_V1S] - mv1 * self.sums[ACC_S]) / n
        x2 = 2.0 * (self.sums[ACC_V2C] - mv2 * self.sums[ACC_C]) / n
        y2 = 2.0 * (self.sums[ACC_V2S] - mv2 * self.sums[ACC_S]) / n
        return x1, y1, x2, y2

    def block_table(self):
        return np.asarray(self.blocks)


class Batch:
    """Lockstep integration of tasks sharing device scalars and probe frequency.

    All tasks advance by the same step counts; each owns an independent
    generator so results do not depend on how tasks are grouped into batches.
    """

    def __init__(self, scalars: EngineScalars, tasks, seed: int, dt: float,
                 chunk_steps: int = CHUNK_STEPS, stability_bound: float = 1e3):
        self.scalars = scalars
        self.tasks = list(tasks)
        self.dt = float(dt)
        self.chunk_steps = int(chunk_steps)
        self.stability_bound = float(stability_bound)
        n = len(self.tasks)
        if n == 0:
            raise ValueError("batch needs at least one task")
        omegas = {t.omega for t in self.tasks}
        if len(omegas) != 1:
            raise ValueError("all tasks in a batch must share the probe frequency")
        self.omega = omegas.pop()
        self.t = 0.0
        self.d1 = np.zeros(n)
        self.d2 = np.zeros(n)
        self.u1 = np.zeros(n)
        self.u2 = np.zeros(n)
        self.ib0 = np.array([t.ib0 for t in self.tasks])
        self.phia = np.array([t.phia for t in self.tasks])
        self.ampf = np.array([t.amp_flux for t in self.tasks])
        self.ampb = np.array([t.amp_bias for t in self.tasks])
        self.noise_scale = np.array([t.noise_scale for t in self.tasks])
        self.rngs = [np.random.Generator(np.random.PCG64(
            np.random.SeedSequence((seed, t.index)))) for t in self.tasks]
        self.acc = np.zeros((n, NACC))
        self.stats = [TaskStats() for _ in self.tasks]

    @property
    def n(self):
        return len(self.tasks)

    def _noise(self, nsteps: int) -> np.ndarray:
        out = np.zeros((nsteps, self.n, 2))
        for i, rng in enumerate(self.rngs):
            sc = self.noise_scale[i]
            if sc > 0.0:
                out[:, i, :] = rng.standard_normal((nsteps, 2))
        scaled = self.noise_scale[None, :, None]
        if scaled.any():
            out *= scaled
        return out

    def _step_chunk(self, nsteps, stride=0, idx_base=0, pd1=None, pd2=None,
                    stores=(None, None, None, None)):
        noise = self._noise(nsteps)
        sc = self.scalars
        st = [s if s is not None else _EMPTY_STORE for s in stores]
        if pd1 is None:
            pd1 = np.empty(0)
            pd2 = np.empty(0)
        if sc.beta_c > 0.0:
            _heun_rcsj(self.d1, self.d2, self.u1, self.u2, self.ib0, self.phia,
                       self.ampf, self.ampb, self.omega, sc.cbias, sc.sin_scale,
                       sc.beta_l, sc.beta_c, noise, self.dt, self.t, self.acc,
                       stride, idx_base, pd1, pd2, st[0], st[1], st[2], st[3])
        else:
            _heun_overdamped(self.d1, self.d2, self.ib0, self.phia,
                             self.ampf, self.ampb, self.omega, sc.cbias,
                             sc.sin_scale, sc.beta_l, noise, self.dt, self.t,
                             self.acc, stride, idx_base, pd1, pd2,
                             st[0], st[1], st[2], st[3])
        self.t += nsteps * self.dt
        vmax = self.acc[:, ACC_MAXV].max() if self.n else 0.0
        if not np.isfinite(self.d1).all() or vmax > self.stability_bound:
            raise IntegrationStabilityError(
                f"phase velocity exceeded {self.stability_bound:g} junction "
                f"units (max {vmax:g}); reduce dt or raise stability_bound")

    def advance(self, nsteps: int, record_block: bool = False):
        """Advance all tasks by nsteps, accumulating into running sums.

        With record_block the sums gathered over this span are appended to
        each task's block table for standard-error estimation.
        """
        before = self.acc.copy()
        done = 0
        while done < nsteps:
            step = min(self.chunk_steps, nsteps - done)
            self._step_chunk(step)
            done += step
        delta = self.acc - before
        delta[:, ACC_MAXV] = self.acc[:, ACC_MAXV]
        for i, stat in enumerate(self.stats):
            stat.nsteps += nsteps
            stat.sums[:NACC - 1] += delta[i, :NACC - 1]
            stat.sums[ACC_MAXV] = self.acc[i, ACC_MAXV]
            if record_block:
                row = _quadrature_row(delta[i], nsteps)
                stat.blocks.append(row)
        return delta

    def reset_accumulators(self):
        """Forget everything accumulated so far (used after transients)."""
        self.acc[:] = 0.0
        self.stats = [TaskStats() for _ in self.tasks]

    def drop(self, keep_mask):
        """Compact the batch to the tasks where keep_mask is True.

        Returns the (task, stats) pairs that were removed.
        """
        keep = np.asarray(keep_mask, dtype=bool)
        removed = [(t, s) for t, s, k in zip(self.tasks, self.stats, keep) if not k]
        self.tasks = [t for t, k in zip(self.tasks, keep) if k]
        self.stats = [s for s, k in zip(self.stats, keep) if k]
        self.rngs = [r for r, k in zip(self.rngs, keep) if k]
        for name in ("d1", "d2", "u1", "u2", "ib0", "phia", "ampf", "ampb",
                     "noise_scale"):
            setattr(self, name, getattr(self, name)[keep])
        self.acc = self.acc[keep]
        return removed

    def run_trajectory(self, n_transient: int, n_main: int, stride: int):
        """Integrate with trajectory storage; returns stored arrays.

        The stored per-junction velocities are averages over each stride
        window, so their mean over the stored samples equals the plain time
        average over the whole recorded span exactly.
        """
        if n_main % stride:
            raise ValueError("main span must divide into whole storage windows")
        done = 0
        while done < n_transient:
            step = min(self.chunk_steps, n_transient - done)
            self._step_chunk(step)
            done += step
        self.reset_accumulators()
        nstore = n_main // stride
        st_d1 = np.empty((nstore, self.n))
        st_d2 = np.empty((nstore, self.n))
        st_v1 = np.empty((nstore, self.n))
        st_v2 = np.empty((nstore, self.n))
        pd1 = self.d1.copy()
        pd2 = self.d2.copy()
        # Keep chunk boundaries aligned with storage windows.
        chunk = stride * max(1, self.chunk_steps // stride)
        done = 0
        while done < n_main:
            step = min(chunk, n_main - done)
            self._step_chunk(step, stride=stride, idx_base=done // stride,
                             pd1=pd1, pd2=pd2,
                             stores=(st_d1, st_d2, st_v1, st_v2))
            done += step
        for i, stat in enumerate(self.stats):
            stat.nsteps += n_main
            stat.sums[:NACC - 1] += self.acc[i, :NACC - 1]
            stat.sums[ACC_MAXV] = self.acc[i, ACC_MAXV]
        return st_d1, st_d2, st_v1, st_v2


def _quadrature_row(delta, nsteps):
    """Block row (n, v1, v2, x1, y1, x2, y2) from accumulator deltas."""
    mv1 = delta[ACC_V1] / nsteps
    mv2 = delta[ACC_V2] / nsteps
    x1 = 2.0 * (delta[ACC_V1C] - mv1 * delta[ACC_C]) / nsteps
    y1 = 2.0 * (delta[ACC_V1S] - mv1 * delta[ACC_S]) / nsteps
    x2 = 2.0 * (delta[ACC_V2C] - mv2 * delta[ACC_C]) / nsteps
    y2 = 2.0 * (delta[ACC_V2S] - mv2 * delta[ACC_S]) / nsteps
    return np.array([nsteps, mv1, mv2, x1, y1, x2, y2])


def block_steps_for(omega: float, dt: float, target_time: float) -> int:
    """Step count near target_time covering an integer number of probe periods."""
    if omega == 0.0:
        return max(1, int(round(target_time / dt)))
    period = 2.0 * np.pi / omega
    n_per = max(1, int(round(target_time / period)))
    return max(1, int(round(n_per * period / dt)))
