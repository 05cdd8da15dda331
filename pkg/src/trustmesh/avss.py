"""Asynchronous verifiable secret sharing over bivariate polynomials.

The dealer samples a t-by-t coefficient matrix (degree t-1 in each variable)
with the secret at position [0][0], plus a fully random companion matrix for
blinding, and commits to both through a matrix of dual-generator commitments.
Each node i receives the row polynomials f(i, y), f'(i, y) and the column
polynomials f(x, i), f'(x, i).  Nodes that never hear from the dealer can
rebuild their polynomials from the overlap points their peers send, checking
every point against the commitment matrix, so t honest deliveries are enough
for the whole network to complete.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

from .groups import GroupBackend, GroupElement, Scalar
from .polynomials import Polynomial, interpolate_at, interpolate_polynomial


@dataclass(frozen=True, slots=True)
class BivariatePolynomial:
    """t-by-t coefficient matrix: coeffs[j][l] multiplies x^l * y^j."""

    coeffs: tuple[tuple[Scalar, ...], ...]

    def __post_init__(self):
        side = len(self.coeffs)
        if side == 0 or any(len(row) != side for row in self.coeffs):
            raise ValueError("coefficient matrix must be square and non-empty")

    @property
    def side(self) -> int:
        return len(self.coeffs)

    @property
    def q(self) -> int:
        return self.coeffs[0][0].q

    def evaluate(self, x: int, y: int) -> Scalar:
        q = self.q
        total = 0
        ypow = 1
        for row in self.coeffs:
            xpow = 1
            for c in row:
                total = (total + c.value * xpow % q * ypow) % q
                xpow = xpow * x % q
            ypow = ypow * y % q
        return Scalar(total, q)

    def row_polynomial(self, i: int) -> Polynomial:
        """f(i, y) as a polynomial in y."""
        q = self.q
        coeffs = []
        for row in self.coeffs:
            acc, xpow = 0, 1
            for c in row:
                acc = (acc + c.value * xpow) % q
                xpow = xpow * i % q
            coeffs.append(Scalar(acc, q))
        return Polynomial(tuple(coeffs))

    def column_polynomial(self, i: int) -> Polynomial:
        """f(x, i) as a polynomial in x."""
        q = self.q
        side = self.side
        coeffs = []
        for l in range(side):
            acc, ypow = 0, 1
            for j in range(side):
                acc = (acc + self.coeffs[j][l].value * ypow) % q
                ypow = ypow * i % q
            coeffs.append(Scalar(acc, q))
        return Polynomial(tuple(coeffs))


def random_bivariate(secret: Scalar, t: int, rng) -> BivariatePolynomial:
    """Uniform t-by-t matrix with the secret planted at [0][0]."""
    if t < 1:
        raise ValueError("threshold must be >= 1")
    q = secret.q
    rows = []
    for j in range(t):
        row = []
        for l in range(t):
            if j == 0 and l == 0:
                row.append(secret)
            else:
                row.append(Scalar(rng.randbelow(q), q))
        rows.append(tuple(row))
    return BivariatePolynomial(tuple(rows))


@dataclass(frozen=True, slots=True)
class CommitmentMatrix:
    """entries[j][l] = coeffs[j][l]*G + coeffs'[j][l]*H for the dealer's pair."""

    entries: tuple[tuple[GroupElement, ...], ...]

    @property
    def side(self) -> int:
        return len(self.entries)

    @property
    def backend(self) -> GroupBackend:
        return self.entries[0][0].backend

    def share_commitment(self, m: int) -> GroupElement:
        """Committed value of the main share f(m, 0): sum of (m^l) * entries[0][l]."""
        q = self.backend.order
        acc = self.entries[0][0]
        power = 1
        for entry in self.entries[0][1:]:
            power = power * m % q
            acc = acc + power * entry
        return acc

    def point_commitment(self, x: int, y: int) -> GroupElement:
        """Committed value of f(x, y): sum over (x^l * y^j) * entries[j][l]."""
        q = self.backend.order
        acc = self.backend.identity()
        ypow = 1
        for row in self.entries:
            xpow = 1
            for entry in row:
                k = xpow * ypow % q
                acc = acc + k * entry
                xpow = xpow * x % q
            ypow = ypow * y % q
        return acc

    def to_bytes(self) -> bytes:
        return b"".join(e.encode() for row in self.entries for e in row)


def commitment_matrix(
    backend: GroupBackend, f: BivariatePolynomial, f_prime: BivariatePolynomial
) -> CommitmentMatrix:
    if f.side != f_prime.side:
        raise ValueError("polynomial and companion must have the same dimensions")
    g = backend.generator()
    h = backend.second_generator()
    return CommitmentMatrix(tuple(
        tuple(a * g + b * h for a, b in zip(row, prow))
        for row, prow in zip(f.coeffs, f_prime.coeffs)
    ))


@dataclass(frozen=True, slots=True)
class AvssDeal:
    """What the dealer hands node ``recipient``: row and column polynomials."""

    recipient: int
    commitment: CommitmentMatrix
    a: Polynomial          # f(recipient, y)
    a_prime: Polynomial    # f'(recipient, y)
    b: Polynomial          # f(x, recipient)
    b_prime: Polynomial    # f'(x, recipient)

    def share(self) -> Scalar:
        """The node's main secret share f(recipient, 0)."""
        return self.a.evaluate(0)

    def share_blinding(self) -> Scalar:
        return self.a_prime.evaluate(0)


def avss_deal(secret: Scalar, t: int, n: int, rng, backend: GroupBackend):
    """Dealer side: commitment matrix plus one deal per node id 1..n."""
    if t < 1 or t > n:
        raise ValueError(f"threshold must satisfy 1 <= t <= n (t={t}, n={n})")
    if n >= secret.q:
        raise ValueError(f"cannot deal to {n} distinct nodes modulo {secret.q}")
    f = random_bivariate(secret, t, rng)
    f_prime = random_bivariate(backend.random_scalar(rng), t, rng)
    commitment = commitment_matrix(backend, f, f_prime)
    deals = [
        AvssDeal(
            recipient=i,
            commitment=commitment,
            a=f.row_polynomial(i),
            a_prime=f_prime.row_polynomial(i),
            b=f.column_polynomial(i),
            b_prime=f_prime.column_polynomial(i),
        )
        for i in range(1, n + 1)
    ]
    return commitment, deals


def avss_verify_share(
    commitment: CommitmentMatrix, m: int, sigma: Scalar, sigma_prime: Scalar
) -> bool:
    """Check a claimed main share (sigma, sigma') = (f(m,0), f'(m,0)) against C."""
    backend = commitment.backend
    lhs = sigma * backend.generator() + sigma_prime * backend.second_generator()
    return lhs == commitment.share_commitment(m)


def avss_point_valid(
    commitment: CommitmentMatrix, x: int, y: int, value: Scalar, blinding: Scalar
) -> bool:
    """Check a claimed overlap point (f(x,y), f'(x,y)) against C."""
    backend = commitment.backend
    lhs = value * backend.generator() + blinding * backend.second_generator()
    return lhs == commitment.point_commitment(x, y)


@dataclass(frozen=True, slots=True)
class PointExchange:
    """Overlap points node ``sender`` forwards to node ``recipient``.

    row_value/row_blind claim f(recipient, sender) and f'(recipient, sender)
    (a point on the recipient's row polynomial); col_value/col_blind claim
    f(sender, recipient) and f'(sender, recipient) (a point on its column).
    """

    sender: int
    recipient: int
    row_value: Scalar
    row_blind: Scalar
    col_value: Scalar
    col_blind: Scalar


def exchange_messages(deal: AvssDeal, recipients: Sequence[int]) -> list[PointExchange]:
    """The overlap points a dealt node sends to each peer."""
    out = []
    for j in recipients:
        if j == deal.recipient:
            continue
        out.append(PointExchange(
            sender=deal.recipient,
            recipient=j,
            row_value=deal.b.evaluate(j),
            row_blind=deal.b_prime.evaluate(j),
            col_value=deal.a.evaluate(j),
            col_blind=deal.a_prime.evaluate(j),
        ))
    return out


def exchange_message_valid(commitment: CommitmentMatrix, msg: PointExchange) -> bool:
    """Both claimed overlap points must match the commitment matrix."""
    return avss_point_valid(
        commitment, msg.recipient, msg.sender, msg.row_value, msg.row_blind
    ) and avss_point_valid(
        commitment, msg.sender, msg.recipient, msg.col_value, msg.col_blind
    )


@dataclass
class NodeRecovery:
    """Per-node outcome of the exchange round."""

    node: int
    complete: bool = False
    a: Optional[Polynomial] = None
    a_prime: Optional[Polynomial] = None
    b: Optional[Polynomial] = None
    b_prime: Optional[Polynomial] = None
    flagged: set[int] = field(default_factory=set)

    def share(self) -> Scalar:
        if not self.complete:
            raise ValueError(f"node {self.node} has not completed its share yet")
        return self.a.evaluate(0)


def avss_exchange_and_interpolate(
    commitment: CommitmentMatrix,
    deals: Mapping[int, AvssDeal],
    t: int,
    n: int,
    tamper: Optional[Mapping[int, Callable[[PointExchange], PointExchange]]] = None,
) -> dict[int, NodeRecovery]:
    """One full overlap-point exchange among nodes 1..n.

    ``deals`` holds whatever the dealer managed to deliver; nodes without a
    deal reconstruct from t commitment-consistent points.  ``tamper`` lets
    tests corrupt the messages of specific senders in flight.  Nodes with
    fewer than t valid points stay incomplete (no failure: the exchange can
    be rerun once more deals or points arrive).
    """
    tamper = tamper or {}
    results = {j: NodeRecovery(node=j) for j in range(1, n + 1)}

    # nodes holding a deal already have their polynomials
    for j, deal in deals.items():
        results[j].complete = True
        results[j].a = deal.a
        results[j].a_prime = deal.a_prime
        results[j].b = deal.b
        results[j].b_prime = deal.b_prime

    inboxes: dict[int, list[PointExchange]] = {j: [] for j in range(1, n + 1)}
    for sender, deal in deals.items():
        mutate = tamper.get(sender)
        for msg in exchange_messages(deal, range(1, n + 1)):
            inboxes[msg.recipient].append(mutate(msg) if mutate else msg)

    for j, inbox in inboxes.items():
        recovery = results[j]
        row_points, row_blind_points = [], []
        col_points, col_blind_points = [], []
        for msg in inbox:
            if not exchange_message_valid(commitment, msg):
                recovery.flagged.add(msg.sender)
                continue
            row_points.append((msg.sender, msg.row_value))
            row_blind_points.append((msg.sender, msg.row_blind))
            col_points.append((msg.sender, msg.col_value))
            col_blind_points.append((msg.sender, msg.col_blind))
        if recovery.complete or len(row_points) < t:
            continue
        recovery.a = interpolate_polynomial(row_points[:t])
        recovery.a_prime = interpolate_polynomial(row_blind_points[:t])
        recovery.b = interpolate_polynomial(col_points[:t])
        recovery.b_prime = interpolate_polynomial(col_blind_points[:t])
        recovery.complete = True
    return results


def avss_recover_secret(shares: Sequence[tuple[int, Scalar]]) -> Scalar:
    """Interpolate main shares (i, f(i, 0)) at 0 to recover f(0, 0)."""
    if not shares:
        raise ValueError("no shares given")
    ids = [i for i, _ in shares]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate share ids")
    q = shares[0][1].q
    return interpolate_at(list(shares), Scalar(0, q))
