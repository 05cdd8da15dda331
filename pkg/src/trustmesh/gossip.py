"""Gossip-based signature aggregation without a distinguished aggregator.

Signers seed per-node transcripts with their own verified partial response.
Each round a node forwards its transcript to a logarithmic fan-out of random
peers; receivers verify every previously unseen contribution against the
session context before merging, so forged partials never spread.  Once a
node's transcript holds enough contributions to aggregate, it broadcasts the
full transcript with small probability; everyone who observes a broadcast
aggregates it into the final signature and stops gossiping.  Ties between
concurrent broadcasts break deterministically on (context hash, content hash).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import ProtocolAbort
from .groups import GroupBackend, Scalar, hash_bytes, id_bytes
from .signing import PartialVerifier, Signature, aggregate


def fan_out(n: int, c: int) -> int:
    """Peers contacted per round: ceil(c * log2 n), capped at everyone else."""
    if n < 2:
        return 0
    return min(n - 1, math.ceil(c * math.log2(n)))


@dataclass
class Transcript:
    """A mergeable set of verified partial responses for one session."""

    context_hash: bytes
    contributions: dict[int, Scalar] = field(default_factory=dict)

    def copy(self) -> "Transcript":
        return Transcript(self.context_hash, dict(self.contributions))

    def to_bytes(self, backend: GroupBackend) -> bytes:
        body = b"".join(
            id_bytes(i) + backend.encode_scalar(self.contributions[i])
            for i in sorted(self.contributions)
        )
        return self.context_hash + body

    def content_hash(self, backend: GroupBackend) -> bytes:
        return hash_bytes("transcript-content", [self.to_bytes(backend)])


@dataclass
class GossipNode:
    """Per-node aggregation-gossip state for one signing session."""

    node_id: int
    peers: tuple[int, ...]            # everyone else in the domain
    verifier: PartialVerifier
    required: int                     # contributions needed before broadcasting
    c: int = 4
    broadcast_prob_num: int = 2       # broadcast probability = num / (peers+1)
    transcript: Transcript = None
    flagged: set[int] = field(default_factory=set)
    stopped: bool = False
    adopted: Optional[Transcript] = None
    finalized: Optional[Signature] = None

    def __post_init__(self):
        if self.transcript is None:
            self.transcript = Transcript(self.verifier.context_hash)

    @property
    def n(self) -> int:
        return len(self.peers) + 1

    def seed_own_partial(self, z: Scalar, verify: bool = True) -> bool:
        """Install this node's own partial; optionally self-check it first."""
        if verify and not self.verifier.verify(self.node_id, z):
            return False
        self.transcript.contributions[self.node_id] = z
        return True

    def is_complete(self) -> bool:
        return len(self.transcript.contributions) >= self.required


def gossip_round(node: GossipNode, rng) -> list[tuple[int, Transcript]]:
    """Pick this round's fan-out peers and address them a transcript copy."""
    if node.stopped or not node.transcript.contributions:
        return []
    k = fan_out(node.n, node.c)
    if k == 0:
        return []
    targets = sorted(rng.sample(list(node.peers), k))
    return [(peer, node.transcript.copy()) for peer in targets]


def gossip_receive(node: GossipNode, sender: int, incoming: Transcript) -> None:
    """Merge an incoming transcript, verifying every new contribution.

    A context mismatch drops the whole message; an invalid contribution is
    dropped and its carrier flagged, while valid entries still merge.
    """
    if incoming.context_hash != node.transcript.context_hash:
        return
    mine = node.transcript.contributions
    for member in sorted(incoming.contributions):
        z = incoming.contributions[member]
        held = mine.get(member)
        if held is not None and held == z:
            continue
        if node.verifier.verify(member, z):
            mine[member] = z
        else:
            node.flagged.add(sender)


def gossip_maybe_terminate(node: GossipNode, rng) -> Optional[Transcript]:
    """With probability num/n, broadcast a complete transcript."""
    if node.stopped or not node.is_complete():
        return None
    if rng.randbelow(node.n) < node.broadcast_prob_num:
        node.stopped = True
        return node.transcript.copy()
    return None


def observe_broadcast(node: GossipNode, transcript: Transcript, pk_shares, group_pk) -> None:
    """Adopt the smallest broadcast seen so far and aggregate it.

    Every broadcast eventually reaches every node, so adopting the minimum of
    (context hash, content hash) converges to one signature network-wide.
    Broadcasts that cannot be aggregated (wrong context, missing or invalid
    partials) are ignored.
    """
    if transcript.context_hash != node.transcript.context_hash:
        return
    backend = node.verifier.backend
    if node.adopted is not None:
        current = (node.adopted.context_hash, node.adopted.content_hash(backend))
        candidate = (transcript.context_hash, transcript.content_hash(backend))
        if candidate >= current:
            return
    coalition = set(node.verifier.package.coalition)
    if not coalition <= set(transcript.contributions):
        return  # cannot aggregate a partial coalition
    try:
        signature = aggregate(
            node.verifier.package,
            {m: transcript.contributions[m] for m in coalition},
            pk_shares,
            group_pk,
        )
    except ProtocolAbort:
        return
    node.adopted = transcript.copy()
    node.finalized = signature
    node.stopped = True
