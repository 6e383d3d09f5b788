"""Minimal CMA-ES in numpy: ask/tell interface, rank-mu update, step-size
control via the evolution path, and a restart flag for the increasing-
population schedule.

Only what the weight search needs is implemented: non-negative recombination
weights, no active (negative-weight) update, no bound handling (candidates
are normalized downstream anyway).
"""

from __future__ import annotations

import math

import numpy as np


class CmaEs:
    """Covariance matrix adaptation evolution strategy, minimizing."""

    def __init__(self, x0, sigma0: float, rng: np.random.Generator, popsize: "int | None" = None):
        x0 = np.asarray(x0, dtype=float).reshape(-1)
        if sigma0 <= 0:
            raise ValueError("sigma0 must be positive")
        n = len(x0)
        self.n = n
        self.rng = rng
        self.mean = x0.copy()
        self.sigma = float(sigma0)

        self.lam = int(popsize) if popsize else 4 + int(3 * math.log(n))
        self.mu = self.lam // 2
        weights = math.log(self.mu + 0.5) - np.log(np.arange(1, self.mu + 1))
        self.weights = weights / weights.sum()
        self.mueff = 1.0 / float(np.sum(self.weights**2))

        self.cc = (4 + self.mueff / n) / (n + 4 + 2 * self.mueff / n)
        self.cs = (self.mueff + 2) / (n + self.mueff + 5)
        self.c1 = 2 / ((n + 1.3) ** 2 + self.mueff)
        self.cmu = min(
            1 - self.c1,
            2 * (self.mueff - 2 + 1 / self.mueff) / ((n + 2) ** 2 + self.mueff),
        )
        self.damps = 1 + 2 * max(0.0, math.sqrt((self.mueff - 1) / (n + 1)) - 1) + self.cs
        self.chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))

        self.pc = np.zeros(n)
        self.ps = np.zeros(n)
        self.cov = np.eye(n)
        self.generation = 0
        self.should_restart = False

    def _sample_basis(self):
        # eigendecomposition each generation; n is small so this is cheap
        cov = (self.cov + self.cov.T) / 2.0
        eigvals, eigvecs = np.linalg.eigh(cov)
        eigvals = np.maximum(eigvals, 1e-20)
        return eigvecs, np.sqrt(eigvals)

    def ask(self) -> "list[np.ndarray]":
        basis, scales = self._sample_basis()
        self._basis, self._scales = basis, scales
        z = self.rng.standard_normal((self.lam, self.n))
        return [self.mean + self.sigma * (basis @ (scales * zi)) for zi in z]

    def tell(self, candidates, fitnesses) -> None:
        if len(candidates) != self.lam or len(fitnesses) != self.lam:
            raise ValueError(f"tell expects exactly {self.lam} candidates")
        order = np.argsort(fitnesses)
        selected = np.array([candidates[i] for i in order[: self.mu]])
        y = (selected - self.mean) / self.sigma

        mean_old = self.mean
        y_w = self.weights @ y
        self.mean = mean_old + self.sigma * y_w

        basis, scales = self._basis, self._scales
        # whitened mean step for the sigma path
        c_inv_sqrt_yw = basis @ ((basis.T @ y_w) / scales)
        self.ps = (1 - self.cs) * self.ps + math.sqrt(
            self.cs * (2 - self.cs) * self.mueff
        ) * c_inv_sqrt_yw

        self.generation += 1
        ps_norm = float(np.linalg.norm(self.ps))
        hsig = ps_norm / math.sqrt(
            1 - (1 - self.cs) ** (2 * self.generation)
        ) / self.chi_n < 1.4 + 2 / (self.n + 1)
        self.pc = (1 - self.cc) * self.pc + (
            math.sqrt(self.cc * (2 - self.cc) * self.mueff) * y_w if hsig else 0.0
        )

        rank_one = np.outer(self.pc, self.pc)
        if not hsig:
            rank_one = rank_one + self.cc * (2 - self.cc) * self.cov
        rank_mu = (y * self.weights[:, None]).T @ y
        self.cov = (
            (1 - self.c1 - self.cmu) * self.cov + self.c1 * rank_one + self.cmu * rank_mu
        )

        self.sigma *= math.exp((self.cs / self.damps) * (ps_norm / self.chi_n - 1))

        f_sorted = np.sort(np.asarray(fitnesses, dtype=float))
        finite = f_sorted[np.isfinite(f_sorted)]
        flat = len(finite) >= 2 and float(finite[-1] - finite[0]) < 1e-14
        if flat or self.sigma < 1e-12 or not np.all(np.isfinite(self.cov)):
            self.should_restart = True
