"""Seeded discrete-event network simulator for the protocol suite.

The simulator hosts key generation, signing and gossip aggregation across
overlapping trust domains (a node may belong to several), plus standalone
verifiable-sharing and asynchronous-sharing scenarios.  Time advances in
ticks; each tick delivers due messages (FIFO by send sequence) and then lets
every live node act, so a run is a pure function of its configuration,
including the seed.  Adversary hooks mutate a node's outbound payloads
(corrupt_shares), split its view of the world (equivocate), silence it, or
crash it at a chosen tick.

The report separates a deterministic core (keys, signatures, verdicts, tick
spans, message counts, trace hash) from wall-clock CPU timings, which are
excluded from the canonical serialization.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from . import avss as avss_mod
from . import dkg as dkg_mod
from . import gossip as gossip_mod
from . import sharing as sharing_mod
from . import signing as signing_mod
from .errors import ConfigError, ProtocolAbort
from .groups import get_backend, id_bytes
from .rng import SeededRng

# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

_BEHAVIORS = ("crash", "corrupt_shares", "equivocate", "silent")
_PROTOCOLS = ("dkg_sign", "pedersen_vss", "avss")


@dataclass(frozen=True)
class DelaySpec:
    model: str = "fixed"     # "fixed" or "uniform"
    ticks: int = 1           # fixed delay
    lo: int = 1
    hi: int = 1

    def validate(self) -> None:
        if self.model == "fixed":
            if self.ticks < 1:
                raise ConfigError("delay.ticks: must be >= 1")
        elif self.model == "uniform":
            if not 1 <= self.lo <= self.hi:
                raise ConfigError("delay: need 1 <= lo <= hi")
        else:
            raise ConfigError(f"delay.model: unknown model {self.model!r}")

    def draw(self, rng) -> int:
        if self.model == "fixed":
            return self.ticks
        return rng.randint(self.lo, self.hi)


@dataclass(frozen=True)
class AdversarySpec:
    node: int
    behavior: str
    at_tick: Optional[int] = None

    def validate(self, nodes: int) -> None:
        if self.behavior not in _BEHAVIORS:
            raise ConfigError(f"adversaries: unknown behavior {self.behavior!r}")
        if not 1 <= self.node <= nodes:
            raise ConfigError(f"adversaries: node {self.node} outside 1..{nodes}")
        if self.behavior == "crash" and self.at_tick is None:
            raise ConfigError("adversaries: crash needs at_tick")


@dataclass(frozen=True)
class DomainSpec:
    domain_id: str
    members: tuple[int, ...]
    threshold: int
    protocol: str = "dkg_sign"
    coalition: Optional[tuple[int, ...]] = None   # global node ids (dkg_sign)
    secret: int = 5                               # planted secret (vss / avss)
    deliver_to: Optional[tuple[int, ...]] = None  # avss: who the dealer reaches

    def validate(self, nodes: int) -> None:
        prefix = f"domains[{self.domain_id}]"
        if self.protocol not in _PROTOCOLS:
            raise ConfigError(f"{prefix}.protocol: unknown protocol {self.protocol!r}")
        if len(set(self.members)) != len(self.members):
            raise ConfigError(f"{prefix}.members: duplicate node ids")
        for m in self.members:
            if not 1 <= m <= nodes:
                raise ConfigError(f"{prefix}.members: node {m} outside 1..{nodes}")
        if not 1 <= self.threshold <= len(self.members):
            raise ConfigError(f"{prefix}.threshold: need 1 <= t <= members")
        if self.protocol == "dkg_sign" and self.threshold < 2:
            raise ConfigError(f"{prefix}.threshold: key generation needs t >= 2")
        if self.coalition is not None:
            bad = set(self.coalition) - set(self.members)
            if bad:
                raise ConfigError(f"{prefix}.coalition: {sorted(bad)} not members")
            if len(self.coalition) < self.threshold:
                raise ConfigError(f"{prefix}.coalition: smaller than the threshold")
        if self.deliver_to is not None:
            bad = set(self.deliver_to) - set(self.members)
            if bad:
                raise ConfigError(f"{prefix}.deliver_to: {sorted(bad)} not members")


@dataclass(frozen=True)
class GossipSpec:
    c: int = 4
    broadcast_prob_num: int = 2
    contributions_required: Optional[int] = None

    def validate(self) -> None:
        if self.c < 4:
            raise ConfigError("gossip.c: success parameter must be >= 4")
        if self.broadcast_prob_num < 1:
            raise ConfigError("gossip.broadcast_prob_num: must be >= 1")


@dataclass(frozen=True)
class SimConfig:
    seed: int
    nodes: int
    domains: tuple[DomainSpec, ...]
    backend: str = "toy"
    message: bytes = b"agree"
    delay: DelaySpec = DelaySpec()
    adversaries: tuple[AdversarySpec, ...] = ()
    gossip: GossipSpec = GossipSpec()
    max_ticks: int = 300
    timeout_ticks: int = 50
    exfiltrate_domains: tuple[str, ...] = ()

    def validate(self) -> None:
        if self.nodes < 1:
            raise ConfigError("nodes: must be >= 1")
        if not self.domains:
            raise ConfigError("domains: at least one domain required")
        seen = set()
        for d in self.domains:
            if d.domain_id in seen:
                raise ConfigError(f"domains: duplicate id {d.domain_id!r}")
            seen.add(d.domain_id)
            d.validate(self.nodes)
        for a in self.adversaries:
            a.validate(self.nodes)
        self.delay.validate()
        self.gossip.validate()
        get_backend(self.backend)

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        def need(key, typ, where="config"):
            if key not in data:
                raise ConfigError(f"{where}.{key}: missing")
            value = data[key]
            if not isinstance(value, typ):
                raise ConfigError(f"{where}.{key}: expected {typ.__name__}")
            return value

        domains = []
        for i, dd in enumerate(data.get("domains", [])):
            if not isinstance(dd, dict):
                raise ConfigError(f"domains[{i}]: expected an object")
            try:
                domains.append(DomainSpec(
                    domain_id=str(dd["id"]),
                    members=tuple(dd["members"]),
                    threshold=int(dd["threshold"]),
                    protocol=dd.get("protocol", "dkg_sign"),
                    coalition=tuple(dd["coalition"]) if dd.get("coalition") else None,
                    secret=int(dd.get("secret", 5)),
                    deliver_to=tuple(dd["deliver_to"]) if dd.get("deliver_to") else None,
                ))
            except KeyError as exc:
                raise ConfigError(f"domains[{i}].{exc.args[0]}: missing") from None
        delay_d = data.get("delay", {})
        adversaries = []
        for i, ad in enumerate(data.get("adversaries", [])):
            try:
                adversaries.append(AdversarySpec(
                    node=int(ad["node"]),
                    behavior=str(ad["behavior"]),
                    at_tick=int(ad["at_tick"]) if ad.get("at_tick") is not None else None,
                ))
            except KeyError as exc:
                raise ConfigError(f"adversaries[{i}].{exc.args[0]}: missing") from None
        gossip_d = data.get("gossip", {})
        config = cls(
            seed=need("seed", int),
            nodes=need("nodes", int),
            domains=tuple(domains),
            backend=data.get("backend", "toy"),
            message=str(data.get("message", "agree")).encode("utf-8"),
            delay=DelaySpec(
                model=delay_d.get("model", "fixed"),
                ticks=int(delay_d.get("ticks", 1)),
                lo=int(delay_d.get("lo", 1)),
                hi=int(delay_d.get("hi", 1)),
            ),
            adversaries=tuple(adversaries),
            gossip=GossipSpec(
                c=int(gossip_d.get("c", 4)),
                broadcast_prob_num=int(gossip_d.get("broadcast_prob_num", 2)),
                contributions_required=(
                    int(gossip_d["contributions_required"])
                    if gossip_d.get("contributions_required") is not None else None
                ),
            ),
            max_ticks=int(data.get("max_ticks", 300)),
            timeout_ticks=int(data.get("timeout_ticks", 50)),
            exfiltrate_domains=tuple(data.get("exfiltrate_domains", [])),
        )
        config.validate()
        return config


def load_scenario(ref: str) -> SimConfig:
    """Load a scenario from a path or from the bundled scenario set."""
    path = Path(ref)
    if path.exists():
        text = path.read_text()
    else:
        name = ref.removesuffix(".json") + ".json"
        try:
            text = resources.files("trustmesh.scenarios").joinpath(name).read_text()
        except (FileNotFoundError, ModuleNotFoundError):
            raise ConfigError(f"scenario {ref!r}: not a file and not a bundled scenario")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario {ref!r}: invalid JSON ({exc})") from None
    return SimConfig.from_dict(data)


# ---------------------------------------------------------------------------
# Messages and report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Message:
    seq: int
    domain: str
    src: int
    dst: int
    kind: str
    payload: object
    send_tick: int
    deliver_at: int


class SimReport:
    """Run outcome: deterministic core plus wall-clock timings."""

    def __init__(self, core: dict, timings: dict):
        self.core = core
        self.timings = timings

    @property
    def trace_hash(self) -> str:
        return self.core["trace_hash"]

    def domain(self, domain_id: str) -> dict:
        return self.core["domains"][domain_id]

    def canonical_json(self) -> str:
        return json.dumps(self.core, sort_keys=True, separators=(",", ":"))

    def to_json(self, indent: int = 2) -> str:
        full = dict(self.core)
        full["timings"] = self.timings
        return json.dumps(full, sort_keys=True, indent=indent)


# ---------------------------------------------------------------------------
# Domain engines
# ---------------------------------------------------------------------------


class _DomainEngine:
    def __init__(self, sim: "Simulator", spec: DomainSpec):
        self.sim = sim
        self.spec = spec
        self.backend = sim.backend
        self.members = tuple(sorted(spec.members))
        self.local = {g: i + 1 for i, g in enumerate(self.members)}
        self.globl = {i + 1: g for i, g in enumerate(self.members)}
        self.verdicts: list[str] = []
        self.completed = False
        self.failed = False
        self.phase = "init"
        self.marks: dict[str, int] = {}

    def mark(self, name: int | str, tick: int) -> None:
        self.marks.setdefault(name, tick)

    def globals_of(self, local_ids) -> list[int]:
        return sorted(self.globl[i] for i in local_ids)

    def live_members(self, tick: int) -> list[int]:
        return [m for m in self.members if self.sim.is_live(m, tick)]

    def behavior(self, node: int) -> Optional[str]:
        return self.sim.behavior(node)

    def send(self, tick, src, dst, kind, payload, payload_bytes) -> None:
        self.sim.send(tick, self.spec.domain_id, src, dst, kind, payload, payload_bytes)

    def finish(self, failed: bool = False) -> None:
        self.completed = True
        self.failed = self.failed or failed

    # overridden by engines
    def start(self) -> None:
        raise NotImplementedError

    def on_message(self, node: int, msg: Message, tick: int) -> None:
        raise NotImplementedError

    def on_tick(self, node: int, tick: int) -> None:
        pass

    def on_timeout(self, tick: int) -> None:
        if not self.completed:
            self.verdicts.append(f"timeout at tick {tick}")
            self.finish(failed=True)

    def report(self) -> dict:
        raise NotImplementedError


class DkgSignEngine(_DomainEngine):
    """Key generation, a two-round signing session, then gossip aggregation."""

    def __init__(self, sim, spec):
        super().__init__(sim, spec)
        n = len(self.members)
        self.crs = dkg_mod.make_crs(spec.domain_id, epoch=sim.config.seed)
        self.participants = {}
        self.shadows = {}      # equivocators' second dealing
        self.bcast_buf = {m: {} for m in self.members}
        self.share_buf = {m: {} for m in self.members}
        self.nonce_buf = {m: {} for m in self.members}
        self.signers = {}
        self.gnodes: dict[int, gossip_mod.GossipNode] = {}
        self.group_pks = {}
        self.aborted: dict[int, str] = {}
        self.dkg_done: set[int] = set()
        self.sign_start: Optional[int] = None
        coalition = spec.coalition or self.members[: spec.threshold]
        self.coalition = tuple(sorted(coalition))
        self.required = sim.config.gossip.contributions_required or len(self.coalition)
        self.finalized: dict[int, bytes] = {}
        self.flagged: dict[int, list[int]] = {}

    # -- round 1 ------------------------------------------------------------

    def start(self) -> None:
        self.phase = "dkg_round1"
        self.mark("dkg_start", 0)
        n = len(self.members)
        for node in self.live_members(0):
            local = self.local[node]
            p = dkg_mod.Participant(local, self.spec.threshold, n, self.crs, self.backend)
            rng = self.sim.proto_rng(self.spec.domain_id, node)
            bc = dkg_mod.dkg_round1(p, rng)
            self.participants[node] = p
            variant = None
            if self.behavior(node) == "equivocate":
                shadow = dkg_mod.Participant(local, self.spec.threshold, n, self.crs, self.backend)
                variant = dkg_mod.dkg_round1(shadow, rng.fork("equivocate"))
                self.shadows[node] = shadow
            for peer in self.members:
                if peer == node:
                    continue
                payload = variant if (variant is not None and peer > node) else bc
                self.send(0, node, peer, "dkg-round1", payload, payload.to_bytes(self.backend))

    def _try_round2(self, node: int, tick: int) -> None:
        p = self.participants.get(node)
        if p is None or node in self.aborted or node in self.dkg_done:
            return
        if len(self.bcast_buf[node]) < len(self.members) - 1:
            return
        try:
            dkg_mod.dkg_accept_round1(p, self.bcast_buf[node])
        except ProtocolAbort as abort:
            self._record_abort(node, abort)
            return
        self.mark("round1_verified", tick)
        behavior = self.behavior(node)
        shadow = self.shadows.get(node)
        for local_peer, value in dkg_mod.dkg_round2_send(p):
            peer = self.globl[local_peer]
            if behavior == "corrupt_shares":
                value = value + 1
            elif shadow is not None and peer > node:
                value = shadow.own_polynomial.evaluate(local_peer)
            payload = (p.id, value)
            self.send(tick, node, peer, "dkg-round2",
                      payload, id_bytes(p.id) + self.backend.encode_scalar(value))

    def _try_finalize(self, node: int, tick: int) -> None:
        p = self.participants.get(node)
        if p is None or node in self.aborted or node in self.dkg_done:
            return
        if len(self.share_buf[node]) < len(self.members) - 1:
            return
        try:
            dkg_mod.dkg_round2_finalize(p, self.share_buf[node])
        except ProtocolAbort as abort:
            self._record_abort(node, abort)
            return
        self.group_pks[node] = p.group_pk
        self.dkg_done.add(node)
        if self.dkg_done >= set(self.live_members(tick)):
            self._dkg_complete(tick)

    def _record_abort(self, node: int, abort: ProtocolAbort) -> None:
        culprits = self.globals_of(abort.faulty_ids)
        self.aborted[node] = str(abort)
        self.verdicts.append(f"node {node} aborted key generation blaming {culprits}")
        self.finish(failed=True)

    def _dkg_complete(self, tick: int) -> None:
        self.mark("dkg_done", tick)
        encodings = {pk.encode() for pk in self.group_pks.values()}
        if len(encodings) != 1:
            self.verdicts.append("group key disagreement: equivocation detected")
            self.finish(failed=True)
            return
        self.verdicts.append("key generation complete: group keys agree")
        self.phase = "signing"
        self.sign_start = tick + 1

    # -- signing + gossip -----------------------------------------------------

    def on_tick(self, node: int, tick: int) -> None:
        if self.completed:
            return
        if tick >= self.sim.config.timeout_ticks and self.sign_start is None:
            self.on_timeout(tick)
            return
        if self.sign_start is not None and tick == self.sign_start and node in self.coalition:
            self.mark("sign_start", tick)
            p = self.participants[node]
            signer = signing_mod.Signer(signing_mod.KeyShare.from_participant(p))
            self.signers[node] = signer
            nl = signer.round1(self.sim.proto_rng(self.spec.domain_id, node).fork("nonce"))
            self.nonce_buf[node][node] = nl
            for peer in self.members:
                if peer != node:
                    self.send(tick, node, peer, "nonce-list", nl, nl.to_bytes())
            self._try_build_session(node, tick)
            return
        gnode = self.gnodes.get(node)
        if gnode is not None and not gnode.stopped:
            self.phase = "gossip"
            if tick - self.marks.get("gossip_start", tick) >= self.sim.config.timeout_ticks:
                self.verdicts.append("gossip did not terminate before the deadline")
                self.finish(failed=True)
                return
            grng = self.sim.gossip_rng(self.spec.domain_id, node)
            for peer_local, transcript in gossip_mod.gossip_round(gnode, grng):
                peer = self.globl[peer_local]
                self.send(tick, node, peer, "gossip", transcript,
                          transcript.to_bytes(self.backend))
            broadcast = gossip_mod.gossip_maybe_terminate(gnode, grng)
            if broadcast is not None:
                self.mark("first_broadcast", tick)
                payload_bytes = broadcast.to_bytes(self.backend)
                for peer in self.members:
                    if peer != node:
                        self.send(tick, node, peer, "gossip-broadcast", broadcast, payload_bytes)
                self._observe(node, broadcast, tick)

    def _try_build_session(self, node: int, tick: int) -> None:
        if node in self.gnodes or node in self.aborted or node not in self.dkg_done:
            return
        buf = self.nonce_buf[node]
        if set(buf) < set(self.coalition):
            return
        self.mark("gossip_start", tick)
        p = self.participants[node]
        package = signing_mod.SigningPackage.build(
            self.sim.config.message,
            {self.local[m]: buf[m].pairs[0] for m in self.coalition},
        )
        verifier = signing_mod.PartialVerifier(package, p.peer_pk_shares, p.group_pk)
        gnode = gossip_mod.GossipNode(
            node_id=self.local[node],
            peers=tuple(self.local[m] for m in self.members if m != node),
            verifier=verifier,
            required=self.required,
            c=self.sim.config.gossip.c,
            broadcast_prob_num=self.sim.config.gossip.broadcast_prob_num,
        )
        if node in self.coalition:
            signer = self.signers[node]
            z = signer.round2_partial(package)
            forged = self.behavior(node) == "corrupt_shares"
            if forged:
                z = z + 1
            if not gnode.seed_own_partial(z, verify=not forged):
                self.verdicts.append(f"node {node} computed an invalid own partial")
        self.gnodes[node] = gnode

    def _observe(self, node: int, transcript, tick: int) -> None:
        gnode = self.gnodes.get(node)
        if gnode is None:
            return
        p = self.participants[node]
        gossip_mod.observe_broadcast(gnode, transcript, p.peer_pk_shares, p.group_pk)
        if gnode.finalized is not None:
            self.finalized[node] = gnode.finalized.to_bytes(self.backend)
            if not self.completed and set(self.finalized) >= set(self.live_members(tick)):
                self.mark("all_finalized", tick)
                self._conclude(tick)

    def _conclude(self, tick: int) -> None:
        self.phase = "done"
        signatures = set(self.finalized.values())
        ok = len(signatures) == 1
        if ok:
            any_node = next(iter(self.finalized))
            sig = signing_mod.Signature.from_bytes(
                self.finalized[any_node], self.backend
            )
            ok = signing_mod.verify(self.group_pks[any_node], self.sim.config.message, sig)
        self.verdicts.append(
            "signature agreement and verification succeeded" if ok
            else "signature agreement or verification failed"
        )
        for node, gnode in sorted(self.gnodes.items()):
            if gnode.flagged:
                self.flagged[node] = self.globals_of(gnode.flagged)
                self.verdicts.append(f"node {node} flagged {self.flagged[node]} during gossip")
        self.finish(failed=not ok)

    def on_message(self, node: int, msg: Message, tick: int) -> None:
        if self.completed and msg.kind != "gossip-broadcast":
            return
        if msg.kind == "dkg-round1":
            self.bcast_buf[node][self.local[msg.src]] = msg.payload
            self._try_round2(node, tick)
        elif msg.kind == "dkg-round2":
            sender_local, value = msg.payload
            self.share_buf[node][sender_local] = value
            self._try_finalize(node, tick)
        elif msg.kind == "nonce-list":
            self.nonce_buf[node][msg.src] = msg.payload
            self._try_build_session(node, tick)
        elif msg.kind == "gossip":
            gnode = self.gnodes.get(node)
            if gnode is not None:
                gossip_mod.gossip_receive(gnode, self.local[msg.src], msg.payload)
        elif msg.kind == "gossip-broadcast":
            self._observe(node, msg.payload, tick)

    def on_timeout(self, tick: int) -> None:
        if self.completed:
            return
        for node in self.live_members(tick):
            if node in self.aborted:
                continue
            if node not in self.dkg_done:
                waiting_r1 = self.globals_of(
                    set(range(1, len(self.members) + 1))
                    - set(self.bcast_buf[node]) - {self.local[node]}
                )
                waiting_r2 = self.globals_of(
                    set(range(1, len(self.members) + 1))
                    - set(self.share_buf[node]) - {self.local[node]}
                )
                missing = waiting_r1 or waiting_r2
                self.verdicts.append(f"node {node} timed out waiting for {missing}")
        self.verdicts.append(f"timeout at tick {tick}")
        self.finish(failed=True)

    def report(self) -> dict:
        pk = None
        encodings = {pk_.encode() for pk_ in self.group_pks.values()}
        if len(encodings) == 1:
            pk = encodings.pop().hex()
        sig_hex = None
        sigs = set(self.finalized.values())
        if len(sigs) == 1:
            sig_hex = sigs.pop().hex()
        rounds = None
        if "first_broadcast" in self.marks and "gossip_start" in self.marks:
            rounds = self.marks["first_broadcast"] - self.marks["gossip_start"] + 1
        out = {
            "protocol": "dkg_sign",
            "members": list(self.members),
            "threshold": self.spec.threshold,
            "coalition": list(self.coalition),
            "group_pk": pk,
            "group_pk_agreement": len(encodings) == 0 and pk is not None,
            "signature": sig_hex,
            "completed_members": sorted(self.finalized),
            "aborted": {str(k): v for k, v in sorted(self.aborted.items())},
            "flagged": {str(k): v for k, v in sorted(self.flagged.items())},
            "verdicts": self.verdicts,
            "gossip_rounds": rounds,
            "marks": {k: v for k, v in sorted(self.marks.items())},
            "ok": self.completed and not self.failed,
        }
        if self.spec.domain_id in self.sim.config.exfiltrate_domains:
            out["exfiltrated_sk_shares"] = {
                str(node): self.backend.encode_scalar(p.sk_share).hex()
                for node, p in sorted(self.participants.items())
                if p.sk_share is not None
            }
        return out


class PedersenVssEngine(_DomainEngine):
    """A dealer distributes blinded verifiable shares; complaints are adjudicated."""

    def __init__(self, sim, spec):
        super().__init__(sim, spec)
        self.dealer = self.members[0]
        self.share_results: dict[int, bool] = {}
        self.complaint_verdicts: dict[int, str] = {}
        self.expected_adjudicators: set[int] = set()
        self.complaints_sent = 0

    def start(self) -> None:
        self.phase = "dealing"
        self.mark("deal_start", 0)
        if not self.sim.is_live(self.dealer, 0) or self.behavior(self.dealer) == "silent":
            return
        rng = self.sim.proto_rng(self.spec.domain_id, self.dealer)
        secret = self.backend.scalar(self.spec.secret)
        commitments, shares = sharing_mod.pedersen_split(
            secret, self.spec.threshold, len(self.members), rng, self.backend
        )
        corrupt = self.behavior(self.dealer) == "corrupt_shares"
        for share in shares:
            recipient = self.globl[share.id]
            if corrupt and recipient != self.dealer:
                share = sharing_mod.SharePacket(share.id, share.value + 1, share.blinding)
            payload = (commitments, share)
            self.send(0, self.dealer, recipient, "vss-share",
                      payload, share.to_bytes(self.backend))
        self.share_results[self.local[self.dealer]] = True

    def on_message(self, node: int, msg: Message, tick: int) -> None:
        if msg.kind == "vss-share":
            commitments, share = msg.payload
            ok = sharing_mod.pedersen_verify(share, commitments)
            self.share_results[share.id] = ok
            if not ok:
                complaint = sharing_mod.Complaint(share.id, share, commitments)
                self.complaints_sent += 1
                for peer in self.members:
                    if peer != node:
                        self.send(tick, node, peer, "vss-complaint",
                                  complaint, share.to_bytes(self.backend))
                self.expected_adjudicators.update(self.live_members(tick))
                verdict = sharing_mod.adjudicate_complaint(complaint)
                self.complaint_verdicts[node] = verdict.value
            self._maybe_finish(tick)
        elif msg.kind == "vss-complaint":
            verdict = sharing_mod.adjudicate_complaint(msg.payload)
            self.complaint_verdicts[node] = verdict.value
            self._maybe_finish(tick)

    def _maybe_finish(self, tick: int) -> None:
        live = set(self.live_members(tick))
        if set(self.globl[i] for i in self.share_results) < live:
            return
        if self.expected_adjudicators and set(self.complaint_verdicts) < self.expected_adjudicators:
            return
        self.mark("done", tick)
        all_ok = all(self.share_results.values())
        if all_ok:
            self.verdicts.append("all shares verified")
        else:
            unique = sorted(set(self.complaint_verdicts.values()))
            self.verdicts.append(f"complaint adjudicated: {', '.join(unique)}")
        self.finish(failed=False)

    def report(self) -> dict:
        return {
            "protocol": "pedersen_vss",
            "members": list(self.members),
            "threshold": self.spec.threshold,
            "dealer": self.dealer,
            "share_results": {str(self.globl[i]): ok for i, ok in sorted(self.share_results.items())},
            "complaint_verdicts": {str(n): v for n, v in sorted(self.complaint_verdicts.items())},
            "verdicts": self.verdicts,
            "marks": {k: v for k, v in sorted(self.marks.items())},
            "ok": self.completed and not self.failed,
        }


class AvssEngine(_DomainEngine):
    """Bivariate dealing with overlap-point exchange for undealt nodes."""

    def __init__(self, sim, spec):
        super().__init__(sim, spec)
        self.dealer = self.members[0]
        self.commitment = None
        self.deals: dict[int, avss_mod.AvssDeal] = {}       # by local id
        self.exchanged: set[int] = set()
        self.points: dict[int, dict[str, list]] = {}
        self.recovered: dict[int, object] = {}               # local id -> Scalar
        self.flagged: dict[int, set[int]] = {}

    def start(self) -> None:
        self.phase = "dealing"
        self.mark("deal_start", 0)
        if not self.sim.is_live(self.dealer, 0):
            return
        rng = self.sim.proto_rng(self.spec.domain_id, self.dealer)
        secret = self.backend.scalar(self.spec.secret)
        self.commitment, deals = avss_mod.avss_deal(
            secret, self.spec.threshold, len(self.members), rng, self.backend
        )
        targets = self.spec.deliver_to or self.members
        for deal in deals:
            recipient = self.globl[deal.recipient]
            if recipient not in targets:
                continue
            self.send(0, self.dealer, recipient, "avss-deal",
                      deal, self.backend.encode_scalar(deal.share()))

    def on_message(self, node: int, msg: Message, tick: int) -> None:
        local = self.local[node]
        if msg.kind == "avss-deal":
            deal = msg.payload
            if not avss_mod.avss_verify_share(
                deal.commitment, local, deal.share(), deal.share_blinding()
            ):
                self.verdicts.append(f"node {node} rejected its deal")
                return
            self.deals[local] = deal
            self.recovered[local] = deal.share()
            self._maybe_finish(tick)
        elif msg.kind == "avss-point":
            self._accept_point(node, msg.payload, tick)

    def on_tick(self, node: int, tick: int) -> None:
        local = self.local[node]
        if local in self.deals and local not in self.exchanged:
            self.exchanged.add(local)
            deal = self.deals[local]
            corrupt = self.behavior(node) == "corrupt_shares"
            for pmsg in avss_mod.exchange_messages(deal, list(self.globl)):
                if corrupt:
                    pmsg = avss_mod.PointExchange(
                        pmsg.sender, pmsg.recipient,
                        pmsg.row_value + 1, pmsg.row_blind,
                        pmsg.col_value, pmsg.col_blind,
                    )
                recipient = self.globl[pmsg.recipient]
                self.send(tick, node, recipient, "avss-point", pmsg,
                          self.backend.encode_scalar(pmsg.row_value))

    def _accept_point(self, node: int, pmsg, tick: int) -> None:
        local = self.local[node]
        if local in self.deals or self.commitment is None:
            if self.commitment is not None and not avss_mod.exchange_message_valid(self.commitment, pmsg):
                self.flagged.setdefault(local, set()).add(pmsg.sender)
            return
        if not avss_mod.exchange_message_valid(self.commitment, pmsg):
            self.flagged.setdefault(local, set()).add(pmsg.sender)
            return
        bucket = self.points.setdefault(local, {"row": [], "rowb": [], "col": [], "colb": []})
        if any(s == pmsg.sender for s, _ in bucket["row"]):
            return
        bucket["row"].append((pmsg.sender, pmsg.row_value))
        bucket["rowb"].append((pmsg.sender, pmsg.row_blind))
        bucket["col"].append((pmsg.sender, pmsg.col_value))
        bucket["colb"].append((pmsg.sender, pmsg.col_blind))
        t = self.spec.threshold
        if len(bucket["row"]) >= t:
            from .polynomials import interpolate_polynomial

            a = interpolate_polynomial(bucket["row"][:t])
            a_prime = interpolate_polynomial(bucket["rowb"][:t])
            b = interpolate_polynomial(bucket["col"][:t])
            b_prime = interpolate_polynomial(bucket["colb"][:t])
            self.deals[local] = avss_mod.AvssDeal(
                recipient=local, commitment=self.commitment,
                a=a, a_prime=a_prime, b=b, b_prime=b_prime,
            )
            self.recovered[local] = a.evaluate(0)
            self._maybe_finish(tick)

    def _maybe_finish(self, tick: int) -> None:
        live_locals = {self.local[m] for m in self.live_members(tick)}
        if set(self.recovered) < live_locals:
            return
        self.mark("done", tick)
        t = self.spec.threshold
        sample = sorted(self.recovered)[:t]
        secret = avss_mod.avss_recover_secret([(i, self.recovered[i]) for i in sample])
        planted = self.backend.scalar(self.spec.secret)
        if secret == planted:
            self.verdicts.append("all nodes completed; recovered secret matches")
            self.finish(failed=False)
        else:
            self.verdicts.append("recovered secret does not match the planted value")
            self.finish(failed=True)

    def report(self) -> dict:
        return {
            "protocol": "avss",
            "members": list(self.members),
            "threshold": self.spec.threshold,
            "dealer": self.dealer,
            "completed_members": self.globals_of(self.recovered),
            "flagged": {
                str(self.globl[i]): self.globals_of(s) for i, s in sorted(self.flagged.items())
            },
            "verdicts": self.verdicts,
            "marks": {k: v for k, v in sorted(self.marks.items())},
            "ok": self.completed and not self.failed,
        }


_ENGINES = {
    "dkg_sign": DkgSignEngine,
    "pedersen_vss": PedersenVssEngine,
    "avss": AvssEngine,
}


# ---------------------------------------------------------------------------
# Simulator core
# ---------------------------------------------------------------------------


class Simulator:
    def __init__(self, config: SimConfig):
        config.validate()
        self.config = config
        self.backend = get_backend(config.backend)
        self.root_rng = SeededRng(config.seed)
        self.delay_rng = self.root_rng.fork("delay")
        self._proto_rngs: dict[tuple, SeededRng] = {}
        self._gossip_rngs: dict[tuple, SeededRng] = {}
        self.queue: list = []
        self.seq = 0
        self.trace: list[str] = []
        self.counts: dict[str, int] = {}
        self.cpu: dict[str, float] = {}
        self.adversaries = {a.node: a for a in config.adversaries}
        self.engines = {
            d.domain_id: _ENGINES[d.protocol](self, d) for d in config.domains
        }

    # -- node status / rng streams ------------------------------------------

    def behavior(self, node: int) -> Optional[str]:
        adv = self.adversaries.get(node)
        return adv.behavior if adv else None

    def is_live(self, node: int, tick: int) -> bool:
        adv = self.adversaries.get(node)
        if adv and adv.behavior == "crash" and tick >= adv.at_tick:
            return False
        return True

    def proto_rng(self, domain: str, node: int) -> SeededRng:
        key = (domain, node, "proto")
        if key not in self._proto_rngs:
            self._proto_rngs[key] = self.root_rng.fork(f"proto/{domain}/{node}")
        return self._proto_rngs[key]

    def gossip_rng(self, domain: str, node: int) -> SeededRng:
        key = (domain, node, "gossip")
        if key not in self._gossip_rngs:
            self._gossip_rngs[key] = self.root_rng.fork(f"gossip/{domain}/{node}")
        return self._gossip_rngs[key]

    # -- messaging -------------------------------------------------------------

    def send(self, tick, domain, src, dst, kind, payload, payload_bytes) -> None:
        if not self.is_live(src, tick) or self.behavior(src) == "silent":
            return
        delay = self.config.delay.draw(self.delay_rng)
        deliver_at = tick + delay
        digest = hashlib.sha256(payload_bytes).hexdigest()[:16]
        self.trace.append(f"{tick}>{deliver_at}|{domain}|{src}>{dst}|{kind}|{digest}")
        self.counts[kind] = self.counts.get(kind, 0) + 1
        msg = Message(self.seq, domain, src, dst, kind, payload, tick, deliver_at)
        heapq.heappush(self.queue, (deliver_at, self.seq, msg))
        self.seq += 1

    # -- main loop ---------------------------------------------------------------

    def run(self) -> SimReport:
        started = time.perf_counter()
        for domain_id in sorted(self.engines):
            self._timed(domain_id, self.engines[domain_id].start)
        tick = 0
        while tick <= self.config.max_ticks:
            while self.queue and self.queue[0][0] == tick:
                _, _, msg = heapq.heappop(self.queue)
                engine = self.engines[msg.domain]
                if engine.completed and msg.kind not in ("gossip-broadcast",):
                    continue
                if not self.is_live(msg.dst, tick):
                    continue
                self._timed(msg.domain, engine.on_message, msg.dst, msg, tick)
            for domain_id in sorted(self.engines):
                engine = self.engines[domain_id]
                if engine.completed:
                    continue
                for node in engine.members:
                    if self.is_live(node, tick):
                        self._timed(domain_id, engine.on_tick, node, tick)
            if all(e.completed for e in self.engines.values()) and not self.queue:
                break
            tick += 1
        for domain_id in sorted(self.engines):
            engine = self.engines[domain_id]
            if not engine.completed:
                engine.on_timeout(min(tick, self.config.max_ticks))
        return self._report(tick, time.perf_counter() - started)

    def _timed(self, domain_id: str, fn, *args) -> None:
        label = f"{domain_id}/{self.engines[domain_id].phase}"
        t0 = time.perf_counter()
        fn(*args)
        self.cpu[label] = self.cpu.get(label, 0.0) + (time.perf_counter() - t0)

    def _report(self, final_tick: int, wall: float) -> SimReport:
        trace_hash = hashlib.sha256("\n".join(self.trace).encode()).hexdigest()
        core = {
            "seed": self.config.seed,
            "backend": self.config.backend,
            "nodes": self.config.nodes,
            "message": self.config.message.hex(),
            "final_tick": final_tick,
            "message_counts": {k: v for k, v in sorted(self.counts.items())},
            "domains": {
                domain_id: engine.report() for domain_id, engine in sorted(self.engines.items())
            },
            "trace_hash": trace_hash,
            "ok": all(not e.failed for e in self.engines.values()),
        }
        timings = {
            "wall_s": wall,
            "cpu_s_by_phase": {k: round(v, 6) for k, v in sorted(self.cpu.items())},
        }
        return SimReport(core, timings)


def run_simulation(config: SimConfig) -> SimReport:
    """Execute one deterministic scenario and return its report."""
    return Simulator(config).run()
