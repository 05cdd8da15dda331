"""Aggregation gossip: fan-out, verified merging, probabilistic termination."""

import pytest

from trustmesh.dkg import run_dkg
from trustmesh.gossip import (
    GossipNode,
    Transcript,
    fan_out,
    gossip_maybe_terminate,
    gossip_receive,
    gossip_round,
    observe_broadcast,
)
from trustmesh.rng import SeededRng
from trustmesh.signing import KeyShare, PartialVerifier, Signer, SigningPackage, verify


@pytest.fixture
def session(toy):
    """A 4-node key with a full-coalition signing session on the toy backend."""
    parts = run_dkg(toy, 2, 4, SeededRng(31))
    keys = {p.id: KeyShare.from_participant(p) for p in parts}
    signers = {i: Signer(keys[i]) for i in keys}
    rng = SeededRng(32)
    coalition = (1, 2)
    lists = {i: signers[i].round1(rng.fork(str(i))) for i in coalition}
    package = SigningPackage.build(b"gossip", {i: lists[i].pairs[0] for i in coalition})
    partials = {i: signers[i].round2_partial(package) for i in coalition}
    return keys, package, partials


def make_node(keys, package, node_id, n=4, required=2, prob=2):
    verifier = PartialVerifier(package, keys[1].pk_shares, keys[1].group_pk)
    peers = tuple(i for i in range(1, n + 1) if i != node_id)
    return GossipNode(
        node_id=node_id, peers=peers, verifier=verifier,
        required=required, c=4, broadcast_prob_num=prob,
    )


class TestFanOut:
    def test_capped_at_everyone_else(self):
        assert fan_out(8, 4) == 7      # ceil(4*log2 8) = 12, capped
        assert fan_out(16, 4) == 15    # ceil(4*log2 16) = 16, capped
        assert fan_out(2, 4) == 1

    def test_logarithmic_regime(self):
        assert fan_out(64, 4) == 24
        assert fan_out(256, 4) == 32

    def test_degenerate(self):
        assert fan_out(1, 4) == 0


class TestRounds:
    def test_round_targets_are_deterministic_under_seed(self, session):
        keys, package, partials = session
        node = make_node(keys, package, 1)
        node.seed_own_partial(partials[1])
        out1 = gossip_round(node, SeededRng(77).fork("g"))
        out2 = gossip_round(node, SeededRng(77).fork("g"))
        assert [peer for peer, _ in out1] == [peer for peer, _ in out2]

    def test_no_partial_no_gossip(self, session):
        keys, package, _ = session
        node = make_node(keys, package, 3)
        assert gossip_round(node, SeededRng(1)) == []

    def test_n2_always_sends_to_single_peer(self, session):
        keys, package, partials = session
        verifier = PartialVerifier(package, keys[1].pk_shares, keys[1].group_pk)
        node = GossipNode(node_id=1, peers=(2,), verifier=verifier, required=2)
        node.seed_own_partial(partials[1])
        for seed in range(5):
            out = gossip_round(node, SeededRng(seed))
            assert [peer for peer, _ in out] == [2]


class TestReceive:
    def test_disjoint_merge_is_union(self, session):
        keys, package, partials = session
        node = make_node(keys, package, 3)
        t1 = Transcript(node.transcript.context_hash, {1: partials[1]})
        t2 = Transcript(node.transcript.context_hash, {2: partials[2]})
        gossip_receive(node, 1, t1)
        gossip_receive(node, 2, t2)
        assert set(node.transcript.contributions) == {1, 2}
        assert node.is_complete()

    def test_merge_idempotent(self, session):
        keys, package, partials = session
        node = make_node(keys, package, 3)
        t1 = Transcript(node.transcript.context_hash, {1: partials[1]})
        gossip_receive(node, 1, t1)
        snapshot = dict(node.transcript.contributions)
        gossip_receive(node, 1, t1)
        assert node.transcript.contributions == snapshot
        assert node.flagged == set()

    def test_forged_entry_dropped_valid_entries_merged(self, session):
        keys, package, partials = session
        node = make_node(keys, package, 3)
        mixed = Transcript(node.transcript.context_hash, {
            1: partials[1],
            2: partials[2] + 1,   # forged
        })
        gossip_receive(node, 4, mixed)
        assert set(node.transcript.contributions) == {1}
        assert node.flagged == {4}

    def test_context_mismatch_drops_whole_message(self, session):
        keys, package, partials = session
        node = make_node(keys, package, 3)
        alien = Transcript(b"\x00" * 32, {1: partials[1]})
        gossip_receive(node, 2, alien)
        assert node.transcript.contributions == {}


class TestTermination:
    def test_incomplete_transcript_never_broadcasts(self, session):
        keys, package, partials = session
        node = make_node(keys, package, 1, prob=4)  # probability 1
        node.seed_own_partial(partials[1])
        assert gossip_maybe_terminate(node, SeededRng(1)) is None

    def test_forced_probability_one_broadcasts(self, session):
        keys, package, partials = session
        node = make_node(keys, package, 1, prob=4)
        node.seed_own_partial(partials[1])
        gossip_receive(node, 2, Transcript(node.transcript.context_hash, {2: partials[2]}))
        broadcast = gossip_maybe_terminate(node, SeededRng(1))
        assert broadcast is not None
        assert node.stopped

    def test_all_nodes_converge_on_broadcast(self, session):
        keys, package, partials = session
        nodes = {i: make_node(keys, package, i) for i in range(1, 5)}
        full = Transcript(nodes[1].transcript.context_hash, dict(partials))
        signatures = set()
        for node in nodes.values():
            observe_broadcast(node, full, keys[1].pk_shares, keys[1].group_pk)
            assert node.finalized is not None
            signatures.add(node.finalized.to_bytes(keys[1].backend))
        assert len(signatures) == 1
        sig = nodes[1].finalized
        assert verify(keys[1].group_pk, b"gossip", sig)

    def test_tie_break_is_order_independent(self, session):
        keys, package, partials = session
        ctx = make_node(keys, package, 1).transcript.context_hash
        t_small = Transcript(ctx, dict(partials))
        # same aggregatable coalition, extra (unverified) entry changes the
        # content hash: nodes must still converge on the hash-rule minimum
        extra = dict(partials)
        extra[9] = partials[1]
        t_big = Transcript(ctx, extra)
        backend = keys[1].backend
        order = sorted(
            [t_small, t_big], key=lambda t: (t.context_hash, t.content_hash(backend))
        )
        adopted = []
        for first, second in ([t_small, t_big], [t_big, t_small]):
            node = make_node(keys, package, 2)
            observe_broadcast(node, first, keys[1].pk_shares, keys[1].group_pk)
            observe_broadcast(node, second, keys[1].pk_shares, keys[1].group_pk)
            adopted.append(node.adopted.content_hash(backend))
        assert adopted[0] == adopted[1] == order[0].content_hash(backend)

    def test_invalid_broadcast_ignored(self, session):
        keys, package, partials = session
        node = make_node(keys, package, 2)
        forged = Transcript(node.transcript.context_hash, {1: partials[1], 2: partials[2] + 1})
        observe_broadcast(node, forged, keys[1].pk_shares, keys[1].group_pk)
        assert node.finalized is None
        assert not node.stopped

    def test_incomplete_coalition_broadcast_ignored(self, session):
        keys, package, partials = session
        node = make_node(keys, package, 2)
        partial_only = Transcript(node.transcript.context_hash, {1: partials[1]})
        observe_broadcast(node, partial_only, keys[1].pk_shares, keys[1].group_pk)
        assert node.finalized is None
