"""Two-round binding threshold Schnorr signing over DKG outputs.

Round 1 publishes per-signer lists of single-use nonce commitment pairs.
Round 2 binds every partial response to the exact message and commitment set
through per-signer binding values, so responses from different sessions can
never be mixed into a valid signature.  Any participant can aggregate:
partials are individually verifiable, and a bad one aborts the session naming
its author.  The final signature satisfies the single-party Schnorr equation
z*G = R + H2(R || pk || m)*pk, so verifiers never learn it was thresholded.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .errors import NonceReuseError, ProtocolAbort
from .groups import GroupBackend, GroupElement, Scalar, hash_bytes, hash_to_scalar, id_bytes
from .polynomials import lagrange_coefficient


@dataclass(frozen=True, slots=True)
class Signature:
    R: GroupElement
    z: Scalar

    def to_bytes(self, backend: GroupBackend) -> bytes:
        return self.R.encode() + backend.encode_scalar(self.z)

    @classmethod
    def from_bytes(cls, data: bytes, backend: GroupBackend) -> "Signature":
        eb = backend.element_bytes
        if len(data) != eb + backend.scalar_bytes:
            raise ValueError("bad signature length")
        return cls(backend.decode_element(data[:eb]), backend.decode_scalar(data[eb:]))


def challenge_scalar(backend: GroupBackend, R: GroupElement, pk: GroupElement, message: bytes) -> Scalar:
    return hash_to_scalar(backend, "H2", [R.encode(), pk.encode(), message])


def verify(pk: GroupElement, message: bytes, sig: Signature) -> bool:
    """Accept iff z*G = R + H2(R || pk || m)*pk."""
    backend = pk.backend
    if not sig.R.is_valid():
        return False
    c = challenge_scalar(backend, sig.R, pk, message)
    return sig.z * backend.generator() == sig.R + c * pk


def sign_with_nonce(sk: Scalar, message: bytes, nonce: Scalar, backend: GroupBackend) -> Signature:
    """Schnorr signature with a caller-supplied nonce (single-party path)."""
    g = backend.generator()
    R = nonce * g
    c = challenge_scalar(backend, R, sk * g, message)
    return Signature(R, nonce + sk * c)


def single_party_sign(sk: Scalar, message: bytes, rng, backend: GroupBackend) -> Signature:
    """Plain Schnorr signing under the same verify contract as threshold runs."""
    if sk.value == 0:
        warnings.warn("signing with a zero secret key: the public key is the identity")
    return sign_with_nonce(sk, message, backend.random_nonzero_scalar(rng), backend)


# ---------------------------------------------------------------------------
# Key material
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KeyShare:
    """A participant's slice of a thresholded key, as produced by the DKG."""

    backend: GroupBackend
    id: int
    t: int
    n: int
    sk_share: Scalar
    group_pk: GroupElement
    pk_shares: Mapping[int, GroupElement]

    @classmethod
    def from_participant(cls, participant) -> "KeyShare":
        if participant.sk_share is None:
            raise ValueError("participant has not finished key generation")
        return cls(
            backend=participant.backend,
            id=participant.id,
            t=participant.t,
            n=participant.n,
            sk_share=participant.sk_share,
            group_pk=participant.group_pk,
            pk_shares=dict(participant.peer_pk_shares),
        )


# ---------------------------------------------------------------------------
# Nonce commitments and signing packages
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class NonceCommitmentList:
    """Published view of a signer's nonce pairs: commitment points only."""

    owner: int
    pairs: tuple[tuple[GroupElement, GroupElement], ...]

    def to_bytes(self) -> bytes:
        return id_bytes(self.owner) + b"".join(a.encode() + b.encode() for a, b in self.pairs)


@dataclass
class _Nonce:
    a: Optional[Scalar]
    b: Optional[Scalar]
    A: GroupElement
    B: GroupElement
    consumed: bool = False

    def scrub(self) -> None:
        self.a = None
        self.b = None
        self.consumed = True


@dataclass(frozen=True)
class SigningPackage:
    """The shared round-2 context: message, coalition, one pair per signer."""

    message: bytes
    coalition: tuple[int, ...]
    commitments: tuple[tuple[int, GroupElement, GroupElement], ...]

    @classmethod
    def build(
        cls, message: bytes, commitments: Mapping[int, tuple[GroupElement, GroupElement]]
    ) -> "SigningPackage":
        coalition = tuple(sorted(commitments))
        if not coalition:
            raise ValueError("empty signing coalition")
        packed = []
        for member in coalition:
            a, b = commitments[member]
            if not (a.is_valid() and b.is_valid()):
                raise ValueError(f"nonce commitment from {member} is not a valid group element")
            packed.append((member, a, b))
        return cls(message=message, coalition=coalition, commitments=tuple(packed))

    def pair(self, member: int) -> tuple[GroupElement, GroupElement]:
        for owner, a, b in self.commitments:
            if owner == member:
                return a, b
        raise KeyError(member)

    def commitment_bytes(self) -> bytes:
        return b"".join(id_bytes(i) + a.encode() + b.encode() for i, a, b in self.commitments)

    def context_hash(self) -> bytes:
        return hash_bytes("sign-context", [self.message, self.commitment_bytes()])[:32]


def binding_values(backend: GroupBackend, package: SigningPackage) -> dict[int, Scalar]:
    """Per-signer binding value tying the response to message and commitments."""
    pairs_bytes = package.commitment_bytes()
    return {
        member: hash_to_scalar(backend, "H1", [id_bytes(member), package.message, pairs_bytes])
        for member in package.coalition
    }


def bound_commitments(
    backend: GroupBackend, package: SigningPackage
) -> tuple[GroupElement, dict[int, GroupElement]]:
    """Group commitment R and each signer's bound share R_i = A_i + beta_i*B_i."""
    betas = binding_values(backend, package)
    per_signer = {}
    for member, a, b in package.commitments:
        per_signer[member] = a + betas[member] * b
    R = backend.element_sum(per_signer[m] for m in package.coalition)
    return R, per_signer


# ---------------------------------------------------------------------------
# Signer
# ---------------------------------------------------------------------------


class Signer:
    """Per-node signing state: owns the key share and the nonce pool."""

    def __init__(self, key: KeyShare):
        self.key = key
        self._pool: list[_Nonce] = []

    def round1(self, rng, count: int = 1) -> NonceCommitmentList:
        """Generate ``count`` fresh single-use nonce pairs; publish commitments."""
        g = self.key.backend.generator()
        fresh = []
        for _ in range(count):
            a = self.key.backend.random_nonzero_scalar(rng)
            b = self.key.backend.random_nonzero_scalar(rng)
            fresh.append(_Nonce(a=a, b=b, A=a * g, B=b * g))
        self._pool.extend(fresh)
        return NonceCommitmentList(self.key.id, tuple((n.A, n.B) for n in fresh))

    def _find_nonce(self, pair: tuple[GroupElement, GroupElement]) -> _Nonce:
        a_pub, b_pub = pair
        for nonce in self._pool:
            if nonce.A == a_pub and nonce.B == b_pub:
                if nonce.consumed:
                    raise NonceReuseError(
                        "nonce pair already consumed; reuse would leak the key share"
                    )
                return nonce
        raise NonceReuseError("package references an unknown nonce pair")

    def round2_partial(self, package: SigningPackage) -> Scalar:
        """Compute this signer's bound partial response and burn the nonce pair."""
        key = self.key
        if key.id not in package.coalition:
            raise ValueError(f"signer {key.id} is not in the coalition {package.coalition}")
        if len(package.coalition) < key.t:
            raise ValueError(
                f"coalition of {len(package.coalition)} is below the threshold {key.t}"
            )
        nonce = self._find_nonce(package.pair(key.id))
        backend = key.backend
        betas = binding_values(backend, package)
        lam = lagrange_coefficient(key.id, package.coalition, backend.scalar(0))
        R, _ = bound_commitments(backend, package)
        c = challenge_scalar(backend, R, key.group_pk, package.message)
        z = nonce.a + nonce.b * betas[key.id] + lam * key.sk_share * c
        nonce.scrub()
        return z


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


class PartialVerifier:
    """Precomputed per-signer checks for one signing session.

    A partial z_i is valid iff z_i*G = R_i + (c * lambda_i) * pk_i; the right
    side is frozen per signer so each check costs one base multiplication.
    """

    def __init__(
        self,
        package: SigningPackage,
        pk_shares: Mapping[int, GroupElement],
        group_pk: GroupElement,
    ):
        backend = group_pk.backend
        self.backend = backend
        self.package = package
        self.group_pk = group_pk
        self.context_hash = package.context_hash()
        R, per_signer = bound_commitments(backend, package)
        self.R = R
        self.challenge = challenge_scalar(backend, R, group_pk, package.message)
        zero = backend.scalar(0)
        self._targets = {}
        for member in package.coalition:
            lam = lagrange_coefficient(member, package.coalition, zero)
            self._targets[member] = per_signer[member] + (self.challenge * lam) * pk_shares[member]

    def verify(self, member: int, z: Scalar) -> bool:
        target = self._targets.get(member)
        if target is None:
            return False
        return z * self.backend.generator() == target


def aggregate(
    package: SigningPackage,
    partials: Mapping[int, Scalar],
    pk_shares: Mapping[int, GroupElement],
    group_pk: GroupElement,
) -> Signature:
    """Verify every coalition partial and sum them into the final signature."""
    missing = sorted(set(package.coalition) - set(partials))
    if missing:
        raise ValueError(f"incomplete session: missing partials from {missing}")
    verifier = PartialVerifier(package, pk_shares, group_pk)
    faulty = sorted(
        member for member in package.coalition if not verifier.verify(member, partials[member])
    )
    if faulty:
        raise ProtocolAbort(f"partial verification failed for {faulty}", faulty)
    backend = group_pk.backend
    z = backend.scalar(sum(partials[m].value for m in package.coalition))
    return Signature(verifier.R, z)
