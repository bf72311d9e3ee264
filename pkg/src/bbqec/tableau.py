"""Stabilizer-tableau simulator used as a verification oracle.

Standard destabilizer/stabilizer tableau with sign tracking: rows 0..n-1
hold destabilizers, rows n..2n-1 stabilizers. Pauli rows are stored as
(x bits, z bits, sign bit) and products are accumulated with the usual
group-phase bookkeeping. This is deliberately the slow-but-transparent
route: the fast Pauli-frame sampler in the noise module is checked against
it on random circuits.

Measurements take their coin flips from an injectable source so that runs
replay deterministically.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

__all__ = ["StabilizerTableau"]

CoinSource = Callable[[], int]


class StabilizerTableau:
    """n-qubit stabilizer state, initialized to the all-zeros state."""

    def __init__(self, n: int, coin: CoinSource | None = None):
        if n < 1:
            raise ValueError("need at least one qubit")
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=np.uint8)
        self.z = np.zeros((2 * n, n), dtype=np.uint8)
        self.r = np.zeros(2 * n, dtype=np.uint8)
        for i in range(n):
            self.x[i, i] = 1          # destabilizer X_i
            self.z[n + i, i] = 1      # stabilizer Z_i
        self._coin = coin if coin is not None else (lambda: 0)

    def copy(self) -> "StabilizerTableau":
        dup = StabilizerTableau.__new__(StabilizerTableau)
        dup.n = self.n
        dup.x = self.x.copy()
        dup.z = self.z.copy()
        dup.r = self.r.copy()
        dup._coin = self._coin
        return dup

    # ---- gates ----

    def h(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def s(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.z[:, q] ^= self.x[:, q]

    def cnot(self, c: int, t: int) -> None:
        self.r ^= self.x[:, c] & self.z[:, t] & (self.x[:, t] ^ self.z[:, c] ^ 1)
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]

    def cz(self, a: int, b: int) -> None:
        # composition H(b) CNOT(a,b) H(b) reduced to a direct update
        self.r ^= self.x[:, a] & self.x[:, b] & (self.z[:, a] ^ self.z[:, b])
        self.z[:, a] ^= self.x[:, b]
        self.z[:, b] ^= self.x[:, a]

    def pauli_x(self, q: int) -> None:
        self.r ^= self.z[:, q]

    def pauli_z(self, q: int) -> None:
        self.r ^= self.x[:, q]

    def pauli_y(self, q: int) -> None:
        self.r ^= self.x[:, q] ^ self.z[:, q]

    def apply_gate(self, gate: str, qubits: Sequence[int]) -> None:
        table = {
            "H": self.h,
            "S": self.s,
            "X": self.pauli_x,
            "Z": self.pauli_z,
            "Y": self.pauli_y,
            "CNOT": self.cnot,
            "CZ": self.cz,
        }
        table[gate](*qubits)

    # ---- phase bookkeeping ----

    @staticmethod
    def _g(x1, z1, x2, z2):
        # exponent of i contributed by multiplying single-qubit Paulis
        return (
            x1 * z1 * (z2 - x2)
            + x1 * (1 - z1) * z2 * (2 * x2 - 1)
            + (1 - x1) * z1 * x2 * (1 - 2 * z2)
        )

    def _rowsum_into(self, xh, zh, rh, i: int) -> tuple[np.ndarray, np.ndarray, int]:
        """Multiply row i into the explicit row (xh, zh, rh); returns the product."""
        phase = 2 * rh + 2 * int(self.r[i]) + int(
            self._g(
                self.x[i].astype(np.int64),
                self.z[i].astype(np.int64),
                xh.astype(np.int64),
                zh.astype(np.int64),
            ).sum()
        )
        phase %= 4
        if phase not in (0, 2):
            raise AssertionError("non-Hermitian rowsum; tableau corrupted")
        return xh ^ self.x[i], zh ^ self.z[i], phase // 2

    def _rowsum(self, h: int, i: int) -> None:
        xh, zh, rh = self._rowsum_into(self.x[h], self.z[h], int(self.r[h]), i)
        self.x[h], self.z[h], self.r[h] = xh, zh, rh

    # ---- measurement ----

    def measure(self, q: int) -> int:
        """Z-basis measurement of qubit q; collapses the state."""
        n = self.n
        stab_hits = np.nonzero(self.x[n:, q])[0]
        if stab_hits.size:
            p = n + int(stab_hits[0])
            # row p-n is about to be overwritten by row p; multiplying it
            # first would form an anti-Hermitian product, so skip it
            for i in range(2 * n):
                if i != p and i != p - n and self.x[i, q]:
                    self._rowsum(i, p)
            self.x[p - n] = self.x[p]
            self.z[p - n] = self.z[p]
            self.r[p - n] = self.r[p]
            self.x[p] = 0
            self.z[p] = 0
            self.z[p, q] = 1
            outcome = int(self._coin()) & 1
            self.r[p] = outcome
            return outcome
        # deterministic: accumulate the matching stabilizer product
        xh = np.zeros(n, dtype=np.uint8)
        zh = np.zeros(n, dtype=np.uint8)
        rh = 0
        for i in range(n):
            if self.x[i, q]:
                xh, zh, rh = self._rowsum_into(xh, zh, rh, i + n)
        return rh

    def measure_deterministic(self, q: int) -> int | None:
        """Outcome of measuring Z_q if determined, else None. No collapse."""
        if self.x[self.n :, q].any():
            return None
        return self.copy().measure(q)

    def z_parity(self, support: Sequence[int]) -> int:
        """Sampled joint parity of Z over the support qubits.

        Measures a copy qubit-by-qubit; the XOR of individual outcomes is a
        valid sample of the product observable (all factors commute).
        """
        dup = self.copy()
        out = 0
        for q in support:
            out ^= dup.measure(q)
        return out

    def z_parity_deterministic(self, support: Sequence[int]) -> int | None:
        """Joint Z parity when the product observable is fixed, else None.

        The Z product over the support is determined exactly when it lies in
        the stabilizer group (up to sign); membership is solved over GF(2)
        with the row combination tracked, and the sign accumulated by
        multiplying the selected stabilizer rows together.
        """
        n = self.n
        target = np.zeros(2 * n, dtype=np.uint8)
        for q in support:
            target[n + q] ^= 1
        # RREF the stabilizer rows [x | z] while tracking row combinations,
        # then reduce the target against the pivots
        work = np.hstack([self.x[n:], self.z[n:]]).astype(np.uint8)
        combo = np.eye(n, dtype=np.uint8)
        pivots: list[int] = []
        r = 0
        for col in range(2 * n):
            if r == n:
                break
            hits = np.nonzero(work[r:, col])[0]
            if hits.size == 0:
                continue
            p = r + int(hits[0])
            if p != r:
                work[[r, p]] = work[[p, r]]
                combo[[r, p]] = combo[[p, r]]
            for i in np.nonzero(work[:, col])[0]:
                if i != r:
                    work[i] ^= work[r]
                    combo[i] ^= combo[r]
            pivots.append(col)
            r += 1
        residue = target.copy()
        picked = np.zeros(n, dtype=np.uint8)
        for r_idx, col in enumerate(pivots):
            if residue[col]:
                residue ^= work[r_idx]
                picked ^= combo[r_idx]
        if residue.any():
            return None
        xh = np.zeros(n, dtype=np.uint8)
        zh = np.zeros(n, dtype=np.uint8)
        rh = 0
        for i in np.nonzero(picked)[0]:
            xh, zh, rh = self._rowsum_into(xh, zh, rh, n + int(i))
        return rh
