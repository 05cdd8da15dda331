"""In-process scaling benchmark for key generation and signing.

Measures computation only (no simulated network delays): round 1 is broadcast
generation plus every node verifying every proof, round 2 is share
distribution plus verification and key derivation at every node, and the
signing column is a full t-sized coalition session over the fresh key.  Each
row reports medians over a configurable number of repetitions after one
warm-up run; absolute numbers are hardware-specific, the growth shape is the
interesting output.
"""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass

from . import dkg as dkg_mod
from . import signing as signing_mod
from .groups import get_backend
from .rng import SeededRng


@dataclass(frozen=True)
class BenchRow:
    t: int
    n: int
    round1_ms: float
    round2_ms: float
    sign_ms: float
    backend: str
    repetitions: int
    dispersion: float   # relative std-dev of the round-2 samples


def _dkg_timed(backend, t, n, rng):
    crs = dkg_mod.make_crs("bench")
    participants = [dkg_mod.Participant(i, t, n, crs, backend) for i in range(1, n + 1)]

    start = time.perf_counter()
    broadcasts = {p.id: dkg_mod.dkg_round1(p, rng.fork(f"r1/{p.id}")) for p in participants}
    for p in participants:
        dkg_mod.dkg_accept_round1(p, broadcasts)
    round1 = time.perf_counter() - start

    start = time.perf_counter()
    outbound = {p.id: dict(dkg_mod.dkg_round2_send(p)) for p in participants}
    for p in participants:
        inbound = {s: msgs[p.id] for s, msgs in outbound.items() if s != p.id}
        dkg_mod.dkg_round2_finalize(p, inbound)
    round2 = time.perf_counter() - start

    return round1, round2, participants


def _sign_timed(participants, coalition, rng):
    keys = {p.id: signing_mod.KeyShare.from_participant(p) for p in participants}
    any_key = keys[coalition[0]]

    start = time.perf_counter()
    signers = {i: signing_mod.Signer(keys[i]) for i in coalition}
    lists = {i: signers[i].round1(rng.fork(f"nonce/{i}")) for i in coalition}
    package = signing_mod.SigningPackage.build(
        b"benchmark message", {i: lists[i].pairs[0] for i in coalition}
    )
    partials = {i: signers[i].round2_partial(package) for i in coalition}
    sig = signing_mod.aggregate(partials=partials, package=package,
                                pk_shares=any_key.pk_shares, group_pk=any_key.group_pk)
    elapsed = time.perf_counter() - start

    if not signing_mod.verify(any_key.group_pk, b"benchmark message", sig):
        raise AssertionError("benchmark produced an invalid signature")
    return elapsed


def run_benchmark(backend_name: str, t: int, n_list, repetitions: int = 5, seed: int = 0):
    """One BenchRow per n: medians over ``repetitions`` runs after a warm-up."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    backend = get_backend(backend_name)
    rng = SeededRng(seed)
    rows = []
    for n in n_list:
        if t > n:
            raise ValueError(f"threshold {t} exceeds n={n}")
        coalition = tuple(range(1, t + 1))
        r1_samples, r2_samples, sign_samples = [], [], []
        for rep in range(repetitions + 1):  # first iteration is the warm-up
            rep_rng = rng.fork(f"bench/{n}/{rep}")
            r1, r2, participants = _dkg_timed(backend, t, n, rep_rng)
            sig = _sign_timed(participants, coalition, rep_rng.fork("sign"))
            if rep == 0:
                continue
            r1_samples.append(r1)
            r2_samples.append(r2)
            sign_samples.append(sig)
        med_r2 = statistics.median(r2_samples)
        dispersion = (statistics.pstdev(r2_samples) / med_r2) if med_r2 > 0 else 0.0
        rows.append(BenchRow(
            t=t,
            n=n,
            round1_ms=statistics.median(r1_samples) * 1000,
            round2_ms=med_r2 * 1000,
            sign_ms=statistics.median(sign_samples) * 1000,
            backend=backend_name,
            repetitions=repetitions,
            dispersion=dispersion,
        ))
    return rows


def write_csv(rows, path) -> None:
    """Schema-stable CSV: t,n,round1_ms,round2_ms,sign_ms."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "n", "round1_ms", "round2_ms", "sign_ms"])
        for row in rows:
            writer.writerow([
                row.t, row.n,
                f"{row.round1_ms:.3f}", f"{row.round2_ms:.3f}", f"{row.sign_ms:.3f}",
            ])


def format_table(rows) -> str:
    header = f"{'t':>3} {'n':>5} {'round1_ms':>12} {'round2_ms':>12} {'sign_ms':>10} {'disp':>6}"
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(
            f"{r.t:>3} {r.n:>5} {r.round1_ms:>12.3f} {r.round2_ms:>12.3f} "
            f"{r.sign_ms:>10.3f} {r.dispersion:>6.2f}"
        )
    return "\n".join(lines)
