"""Two-round leaderless distributed key generation.

Every participant simultaneously deals a threshold sharing of its own random
secret: round 1 broadcasts per-coefficient commitments plus a Schnorr proof of
knowledge of the dealt secret (bound to a common reference string against
replay); round 2 privately distributes shares, verifies everything received
against the broadcast commitments, and derives the signing share as the sum
of all received shares.  The group public key is the sum of the constant-term
commitments, so no party ever holds the group secret.

Here the threshold t is the signing coalition size: each dealt polynomial has
degree t-1 and commitment vectors carry t entries.  Any verification failure
aborts the run naming the misbehaving dealer; there is no complaint round.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import ProtocolAbort
from .groups import GroupBackend, GroupElement, Scalar, hash_bytes, hash_to_scalar, id_bytes
from .polynomials import Polynomial, lagrange_coefficient, random_polynomial
from .sharing import CommitmentVector


def make_crs(domain_id: str, epoch: int = 0) -> bytes:
    """Run-scoped common reference string from a domain label and epoch."""
    return hash_bytes("trustmesh/crs", [domain_id.encode("utf-8"), epoch.to_bytes(8, "big")])[:32]


@dataclass(frozen=True, slots=True)
class ProofOfKnowledge:
    """Schnorr proof that the broadcaster knows its committed secret."""

    commitment: GroupElement   # k * G
    response: Scalar           # k + secret * challenge

    def to_bytes(self, backend: GroupBackend) -> bytes:
        return self.commitment.encode() + backend.encode_scalar(self.response)


def _pok_challenge(
    backend: GroupBackend, sender: int, crs: bytes, public_secret: GroupElement, nonce_commitment: GroupElement
) -> Scalar:
    return hash_to_scalar(
        backend, "H", [id_bytes(sender), crs, public_secret.encode(), nonce_commitment.encode()]
    )


def pok_prove(backend: GroupBackend, sender: int, crs: bytes, secret: Scalar, rng) -> ProofOfKnowledge:
    k = backend.random_scalar(rng)
    commitment = k * backend.generator()
    challenge = _pok_challenge(backend, sender, crs, secret * backend.generator(), commitment)
    return ProofOfKnowledge(commitment, k + secret * challenge)


def pok_verify(
    backend: GroupBackend, sender: int, crs: bytes, public_secret: GroupElement, proof: ProofOfKnowledge
) -> bool:
    challenge = _pok_challenge(backend, sender, crs, public_secret, proof.commitment)
    lhs = proof.response * backend.generator()
    return lhs == proof.commitment + challenge * public_secret


@dataclass(frozen=True, slots=True)
class Round1Broadcast:
    """Round-1 message: coefficient commitments plus proof of knowledge."""

    sender: int
    commitment: CommitmentVector
    proof: ProofOfKnowledge

    def to_bytes(self, backend: GroupBackend) -> bytes:
        return id_bytes(self.sender) + self.commitment.to_bytes() + self.proof.to_bytes(backend)


class Phase(enum.Enum):
    INIT = "init"
    ROUND1_DONE = "round1-done"
    ROUND2_DONE = "round2-done"
    ABORTED = "aborted"


@dataclass
class Participant:
    """Per-node DKG state machine."""

    id: int
    t: int
    n: int
    crs: bytes
    backend: GroupBackend
    phase: Phase = Phase.INIT
    own_polynomial: Optional[Polynomial] = None
    received_broadcasts: dict[int, Round1Broadcast] = field(default_factory=dict)
    pending_shares: dict[int, Scalar] = field(default_factory=dict)
    self_share: Optional[Scalar] = None
    sk_share: Optional[Scalar] = None
    pk_share: Optional[GroupElement] = None
    group_pk: Optional[GroupElement] = None
    peer_pk_shares: dict[int, GroupElement] = field(default_factory=dict)
    abort_reason: Optional[str] = None
    transcript: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if self.t < 2:
            raise ValueError("threshold must be >= 2 (a degree t-1 sharing needs t >= 2)")
        if self.t > self.n:
            raise ValueError(f"threshold {self.t} exceeds participant count {self.n}")
        if not 1 <= self.id <= self.n:
            raise ValueError(f"participant id must be in 1..{self.n}")
        if self.n >= self.backend.order:
            raise ValueError("participant ids must be distinct modulo the group order")

    def _require_phase(self, expected: Phase, action: str) -> None:
        if self.phase is not expected:
            raise ValueError(f"cannot {action} in phase {self.phase.value}")

    def _abort(self, reason: str, faulty_ids) -> None:
        self.phase = Phase.ABORTED
        self.abort_reason = reason
        raise ProtocolAbort(reason, faulty_ids)

    def _record(self, round_no: int, payload: bytes) -> None:
        self.transcript.append({
            "node": self.id,
            "round": round_no,
            "hash": hash_bytes("transcript", [payload]).hex()[:32],
        })


def dkg_round1(state: Participant, rng) -> Round1Broadcast:
    """Sample the dealing polynomial, commit to it and prove the secret."""
    state._require_phase(Phase.INIT, "run round 1")
    secret = state.backend.random_scalar(rng)
    state.own_polynomial = random_polynomial(secret, state.t - 1, rng)
    g = state.backend.generator()
    commitment = CommitmentVector(tuple(c * g for c in state.own_polynomial.coefficients))
    proof = pok_prove(state.backend, state.id, state.crs, secret, rng)
    broadcast = Round1Broadcast(state.id, commitment, proof)
    state.received_broadcasts[state.id] = broadcast
    state.self_share = state.own_polynomial.evaluate(state.id)
    state.phase = Phase.ROUND1_DONE
    state._record(1, broadcast.to_bytes(state.backend))
    return broadcast


def dkg_verify_round1(
    broadcasts: Mapping[int, Round1Broadcast], crs: bytes, backend: GroupBackend, t: Optional[int] = None
) -> list[int]:
    """Verify every broadcast's proof; return the (possibly empty) faulty set."""
    faulty = []
    for sender, bc in broadcasts.items():
        if bc.sender != sender:
            faulty.append(sender)
            continue
        if t is not None and len(bc.commitment) != t:
            faulty.append(sender)
            continue
        if not pok_verify(backend, sender, crs, bc.commitment.entries[0], bc.proof):
            faulty.append(sender)
    return sorted(faulty)


def dkg_accept_round1(state: Participant, broadcasts: Mapping[int, Round1Broadcast]) -> None:
    """Store and verify all peers' round-1 broadcasts; abort on any bad proof."""
    state._require_phase(Phase.ROUND1_DONE, "accept round 1 broadcasts")
    missing = sorted(set(range(1, state.n + 1)) - set(broadcasts) - {state.id})
    if missing:
        state._abort(f"missing round-1 broadcasts from {missing}", missing)
    merged = dict(broadcasts)
    merged[state.id] = state.received_broadcasts[state.id]
    faulty = dkg_verify_round1(merged, state.crs, state.backend, state.t)
    if faulty:
        state._abort(f"invalid proof of knowledge from {faulty}", faulty)
    state.received_broadcasts = merged


def dkg_round2_send(state: Participant) -> list[tuple[int, Scalar]]:
    """Evaluate the own polynomial for every peer; the self share is retained."""
    state._require_phase(Phase.ROUND1_DONE, "send round 2 shares")
    return [
        (peer, state.own_polynomial.evaluate(peer))
        for peer in range(1, state.n + 1)
        if peer != state.id
    ]


def _share_matches_commitment(
    backend: GroupBackend, recipient: int, share: Scalar, commitment: CommitmentVector
) -> bool:
    return share * backend.generator() == commitment.share_commitment(recipient)


def dkg_round2_finalize(
    state: Participant,
    shares: Mapping[int, Scalar],
    broadcasts: Optional[Mapping[int, Round1Broadcast]] = None,
):
    """Verify all received shares, then derive key material.

    Returns (sk_share, pk_share, group_pk).  Received share values are
    dropped from the state once the signing share is derived.
    """
    state._require_phase(Phase.ROUND1_DONE, "finalize round 2")
    if broadcasts is None:
        broadcasts = state.received_broadcasts
    if len(broadcasts) != state.n:
        raise ValueError("round-1 broadcasts must be accepted before finalizing")

    all_shares = dict(shares)
    all_shares.setdefault(state.id, state.self_share)
    missing = sorted(set(range(1, state.n + 1)) - set(all_shares))
    if missing:
        state._abort(f"missing round-2 shares from {missing}", missing)

    backend = state.backend
    faulty = sorted(
        sender for sender, value in all_shares.items()
        if not _share_matches_commitment(backend, state.id, value, broadcasts[sender].commitment)
    )
    if faulty:
        state._abort(f"share verification failed for {faulty}", faulty)

    sk = backend.scalar(sum(v.value for v in all_shares.values()))
    state.sk_share = sk
    state.pk_share = sk * backend.generator()
    state.group_pk = backend.element_sum(
        broadcasts[sender].commitment.entries[0] for sender in sorted(broadcasts)
    )

    # everyone can compute every peer's verification share from the broadcast
    # commitments: first sum the commitment vectors, then evaluate per peer
    summed = [
        backend.element_sum(broadcasts[s].commitment.entries[k] for s in sorted(broadcasts))
        for k in range(state.t)
    ]
    summed_vector = CommitmentVector(tuple(summed))
    state.peer_pk_shares = {
        peer: summed_vector.share_commitment(peer) for peer in range(1, state.n + 1)
    }

    state.pending_shares.clear()
    state.phase = Phase.ROUND2_DONE
    state._record(2, b"".join(backend.encode_scalar(all_shares[s]) for s in sorted(all_shares)))
    state._record(3, state.group_pk.encode())
    return sk, state.pk_share, state.group_pk


def transcript_jsonl(participants) -> str:
    """Transcript log as JSON lines, one record per round per node."""
    lines = []
    for p in participants:
        for record in p.transcript:
            lines.append(json.dumps(record, sort_keys=True))
    return "\n".join(lines) + "\n"


def combine_signing_shares(participants, coalition, at: int = 0) -> Scalar:
    """Lagrange-combine coalition signing shares at the given point.

    The result s* satisfies s* . G = group_pk when the coalition has at least
    t members of a completed run; used by tests and the CLI to cross-check a
    finished DKG without ever materializing the key on one node in protocol
    flows.
    """
    by_id = {p.id: p for p in participants}
    backend = by_id[next(iter(coalition))].backend
    x = backend.scalar(at)
    total = backend.scalar(0)
    for member in coalition:
        lam = lagrange_coefficient(member, coalition, x)
        total = total + lam * by_id[member].sk_share
    return total


def run_dkg(backend: GroupBackend, t: int, n: int, rng, crs: Optional[bytes] = None) -> list[Participant]:
    """Convenience in-process honest run; returns all finalized participants."""
    if crs is None:
        crs = make_crs("default")
    participants = [Participant(i, t, n, crs, backend) for i in range(1, n + 1)]
    broadcasts = {}
    for p in participants:
        broadcasts[p.id] = dkg_round1(p, rng.fork(f"dkg/{p.id}"))
    for p in participants:
        dkg_accept_round1(p, broadcasts)
    outbound = {p.id: dkg_round2_send(p) for p in participants}
    for p in participants:
        inbound = {
            sender: dict(messages)[p.id]
            for sender, messages in outbound.items()
            if sender != p.id
        }
        dkg_round2_finalize(p, inbound)
    return participants
