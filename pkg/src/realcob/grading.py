"""RO(Z/2 x Z/2)-degree bookkeeping.

Degrees are formal integer combinations of the four irreducible real
representations 1, alpha, gamma, gamma*alpha of Z/2 x Z/2.  Two grading
conventions coexist in the engine:

* the "plane" convention used for the coefficient diagrams, where the
  orientation variable u sits in degree -1 - gamma*alpha and the b_k
  generators in k*(1 + gamma*alpha);
* the "line" convention used inside the Borel cohomology spectral
  sequence charts, where u sits in -1 - alpha and sigma in alpha - 1.

All degrees are graded homologically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True)
class RODegree:
    """Element of the representation-ring grading lattice."""

    c1: int = 0
    c_alpha: int = 0
    c_gamma: int = 0
    c_gamma_alpha: int = 0

    def __add__(self, other: "RODegree") -> "RODegree":
        return RODegree(
            self.c1 + other.c1,
            self.c_alpha + other.c_alpha,
            self.c_gamma + other.c_gamma,
            self.c_gamma_alpha + other.c_gamma_alpha,
        )

    def __sub__(self, other: "RODegree") -> "RODegree":
        return self + (-other)

    def __neg__(self) -> "RODegree":
        return RODegree(-self.c1, -self.c_alpha, -self.c_gamma, -self.c_gamma_alpha)

    def scale(self, n: int) -> "RODegree":
        return RODegree(
            n * self.c1, n * self.c_alpha, n * self.c_gamma, n * self.c_gamma_alpha
        )

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.c1, self.c_alpha, self.c_gamma, self.c_gamma_alpha)

    def __str__(self) -> str:
        parts = []
        for coeff, name in zip(self.as_tuple(), ("", "a", "g", "ga")):
            if coeff == 0:
                continue
            parts.append(f"{coeff:+d}{name}")
        return "".join(parts) if parts else "0"


ZERO = RODegree()

# The sign representation alpha of the "Real" Z/2 shows up as alpha in the
# chart convention and as gamma*alpha in the plane convention.
ALPHA = RODegree(c_alpha=1)
GAMMA = RODegree(c_gamma=1)
GAMMA_ALPHA = RODegree(c_gamma_alpha=1)
ONE = RODegree(c1=1)


def v_weight(n: int) -> int:
    """1-part of |v_n|; the twisted part has the same coefficient."""
    return (1 << n) - 1


def v_degree(n: int, twist: RODegree = ALPHA) -> RODegree:
    # |v_n| = (2^n - 1)(1 + twist), twist = alpha in charts, gamma*alpha
    # in the coefficient plane.
    return (ONE + twist).scale(v_weight(n))


def u_degree(twist: RODegree = ALPHA) -> RODegree:
    return -(ONE + twist)


def sigma_degree() -> RODegree:
    return ALPHA - ONE


def a_degree() -> RODegree:
    return -ALPHA


def vexp_weight(vexp: Iterable[int]) -> int:
    """1-part of the degree of a v-monomial v_1^{e_1} v_2^{e_2} ..."""
    return sum(e * v_weight(n + 1) for n, e in enumerate(vexp))


def monomial_degree(
    vexp: Iterable[int] = (),
    u_exp: int = 0,
    sigma_exp: int = 0,
    a_exp: int = 0,
    twist: RODegree = ALPHA,
) -> RODegree:
    """Degree of v^E a^e sigma^s u^j in the chart convention by default."""
    deg = ZERO
    for n, e in enumerate(vexp):
        if e:
            deg = deg + v_degree(n + 1, twist).scale(e)
    if u_exp:
        deg = deg + u_degree(twist).scale(u_exp)
    if sigma_exp:
        deg = deg + sigma_degree().scale(sigma_exp)
    if a_exp:
        deg = deg + a_degree().scale(a_exp)
    return deg
