"""End-to-end runs: commit, open, update a batch, refresh every holder's proof.

Every refreshed proof must verify against the new commitment and equal a
fresh opening on the updated state. Homomorphic backends also check the
published-node and proof-update bounds of the tradeoff parameter.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import logging
import random
import time
from typing import Any, Dict, List, Optional, Tuple

import setproctitle
from tqdm import tqdm

from vcstack.api.interface import VectorCommitment
from vcstack.backends import get_backend
from vcstack.bench.report import ExperimentReport, ReportRow
from vcstack.logging import setup_logging
from vcstack.schemas import OpCounter, UpdateBatch, UpdateCounters, UpdateInfo
from vcstack.sublinear import engine

logger = logging.getLogger(__name__)

# Backends whose update information is shaped by nu, with their locality.
HOMOMORPHIC_LOCALITY = {"amt": 1, "lattice": 0}

_worker_vc: Optional[VectorCommitment] = None


@dataclass
class E2eSettings:
    backend: str
    n: int
    k: int
    nu: Any = "1/2"
    seed: int = 0
    c: int = 4
    mode: str = "structured"
    users: Optional[int] = None
    workers: int = 1
    insecure_debug: bool = False
    kzg_table_limit: int = 2**10
    progress: bool = False
    debug: bool = False

    def backend_options(self) -> Dict[str, Any]:
        return {
            "nu": engine.TradeoffParam.of(self.nu).nu,
            "mode": self.mode,
            "arity": self.c,
            "insecure_debug": self.insecure_debug,
            "table_limit": self.kzg_table_limit,
        }


@dataclass
class ProofResult:
    index: int
    proof: Any
    counter: OpCounter
    seconds: float


@dataclass
class E2eOutcome:
    report: ExperimentReport
    update_info: UpdateInfo
    batch: UpdateBatch
    counters: Optional[UpdateCounters] = None
    failures: List[int] = field(default_factory=list)


def _init_worker(settings: E2eSettings):
    global _worker_vc
    setup_logging(settings.debug)
    setproctitle.setproctitle("vcstack_e2e_worker")
    _worker_vc = build_backend(settings)


def _refresh(
    proof: Any, index: int, batch: UpdateBatch, update_info: UpdateInfo
) -> ProofResult:
    counter = OpCounter()
    start = time.perf_counter()
    new_proof = _worker_vc.proof_update(proof, index, batch, update_info, counter)
    return ProofResult(index, new_proof, counter, time.perf_counter() - start)


def build_backend(settings: E2eSettings) -> VectorCommitment:
    return get_backend(
        settings.backend, settings.n, settings.seed, **settings.backend_options()
    )


def random_batch(
    vc: VectorCommitment, messages: List[Any], k: int, rng: random.Random
) -> UpdateBatch:
    indices = sorted(rng.sample(range(len(messages)), k))
    return UpdateBatch.of((i, messages[i], vc.random_message(rng)) for i in indices)


def choose_users(n: int, users: Optional[int], batch: UpdateBatch, rng) -> List[int]:
    if users is None or users >= n:
        return list(range(n))
    chosen = set(rng.sample(range(n), users))
    # at least one holder whose own message changed
    chosen.add(batch.indices[0])
    return sorted(chosen)


def refresh_proofs(
    settings: E2eSettings,
    vc: VectorCommitment,
    proofs: Dict[int, Any],
    batch: UpdateBatch,
    update_info: UpdateInfo,
) -> Dict[int, ProofResult]:
    """Proof updates for every holder, in index order."""
    global _worker_vc
    results: Dict[int, ProofResult] = {}
    bar = tqdm(
        total=len(proofs),
        desc=f"{settings.backend} proof updates",
        disable=not settings.progress,
    )
    if settings.workers > 1 and len(proofs) > 1:
        with ProcessPoolExecutor(
            max_workers=settings.workers,
            initializer=_init_worker,
            initargs=(settings,),
        ) as pool:
            futures = [
                pool.submit(_refresh, proof, index, batch, update_info)
                for index, proof in proofs.items()
            ]
            for future in futures:
                result = future.result()
                results[result.index] = result
                bar.update(1)
    else:
        _worker_vc = vc
        for index, proof in proofs.items():
            results[index] = _refresh(proof, index, batch, update_info)
            bar.update(1)
    bar.close()
    return dict(sorted(results.items()))


def _update_counters(
    settings: E2eSettings, vc: VectorCommitment, batch: UpdateBatch
) -> Optional[UpdateCounters]:
    if settings.backend not in HOMOMORPHIC_LOCALITY:
        return None
    counters = getattr(vc, "last_counters", None)
    if counters is None:
        # No-info AMT: nothing published, every changed node absorbs up to k digests.
        counters = UpdateCounters(published=0, max_unpublished_count=batch.k)
    return counters


def run_e2e(settings: E2eSettings) -> E2eOutcome:
    rng = random.Random(settings.seed)
    logger.info(
        f"Setting up {settings.backend} for N={settings.n}, k={settings.k}, "
        f"nu={settings.nu}, seed={settings.seed}"
    )
    vc = build_backend(settings)
    messages = [vc.random_message(rng) for _ in range(settings.n)]
    commitment, aux = vc.commit(messages)

    batch = random_batch(vc, messages, settings.k, rng)
    users = choose_users(settings.n, settings.users, batch, rng)
    proofs = {i: vc.open(aux, i) for i in users}
    logger.info(f"Opened {len(proofs)} proofs")

    new_commitment, update_info, new_aux = vc.update(aux, batch)
    update_bytes = len(update_info.encode())
    logger.info(f"Batch of {batch.k} updates, U has {len(update_info)} entries")

    results = refresh_proofs(settings, vc, proofs, batch, update_info)
    new_messages = batch.apply(messages)

    failures = []
    for index, result in results.items():
        if not vc.verify(new_commitment, new_messages[index], index, result.proof):
            logger.error(f"Refreshed proof {index} does not verify")
            failures.append(index)
            continue
        if not vc.proof_equal(result.proof, vc.open(new_aux, index)):
            logger.error(f"Refreshed proof {index} differs from a fresh opening")
            failures.append(index)

    counters = _update_counters(settings, vc, batch)
    bounds_ok = True
    if counters is not None:
        for index, result in results.items():
            counters.proof_digests[index] = result.counter.digests
        nu = 0 if settings.mode == "no-info" else settings.nu
        bounds_ok = engine.verify_counters(
            counters,
            batch.k,
            nu,
            settings.n,
            HOMOMORPHIC_LOCALITY[settings.backend],
        )
        if not bounds_ok:
            logger.error(f"Update counters exceed the bounds for nu={nu}: {counters}")

    ops = max(
        (max(r.counter.exps, r.counter.compositions) for r in results.values()),
        default=0,
    )
    seconds = sum(r.seconds for r in results.values()) / max(len(results), 1)
    label = str(settings.c) if settings.backend == "verkle" else str(settings.nu)
    report = ExperimentReport(
        title=f"e2e {settings.backend}, N={settings.n}, k={settings.k}",
        rows=[
            ReportRow(
                nu_or_c=label,
                published_nodes=len(update_info),
                update_info_bytes=update_bytes,
                ops=ops,
                seconds=seconds,
                display={
                    "nu or c": label,
                    "published nodes": str(len(update_info)),
                    "|U| (B)": str(update_bytes),
                    "max ops per proof update": str(ops),
                    "mean proof update (s)": f"{seconds:.4f}",
                    "proofs verified": f"{len(results) - len(failures)}/{len(results)}",
                },
            )
        ],
        passed=not failures and bounds_ok,
    )
    if counters is not None:
        report.notes.append(
            f"max partial digests per proof update: {counters.max_proof_digests}, "
            f"max unpublished count: {counters.max_unpublished_count}"
        )
    logger.info(
        f"{len(results) - len(failures)}/{len(results)} proofs verified, "
        f"bounds {'hold' if bounds_ok else 'violated'}"
    )
    return E2eOutcome(report, update_info, batch, counters, failures)


def run_trials(settings: E2eSettings, trials: int) -> List[E2eOutcome]:
    """Independent runs with consecutive seeds."""
    outcomes = []
    for t in range(trials):
        trial = E2eSettings(**{**settings.__dict__, "seed": settings.seed + t})
        outcomes.append(run_e2e(trial))
    return outcomes


def first_batch(settings: E2eSettings) -> Tuple[UpdateInfo, UpdateBatch]:
    """U and the batch of a run, without refreshing any proof."""
    rng = random.Random(settings.seed)
    vc = build_backend(settings)
    messages = [vc.random_message(rng) for _ in range(settings.n)]
    _, aux = vc.commit(messages)
    batch = random_batch(vc, messages, settings.k, rng)
    _, update_info, _ = vc.update(aux, batch)
    return update_info, batch
