"""Wall-clock proof updates against the exponentiation cost model.

The AMT is committed to the zero vector, so building it is free and every
measured cost comes from the update itself.
"""

from dataclasses import dataclass, field
import logging
import random
import statistics
import time
from typing import List, Optional

from prometheus_client import CollectorRegistry, write_to_textfile
from prometheus_client.core import GaugeMetricFamily
from prometheus_client.registry import Collector
from py_ecc.optimized_bls12_381 import G1
from tqdm import tqdm

from vcstack.backends import seed_bytes
from vcstack.backends.amt import AmtVC
from vcstack.bench.report import ExperimentReport, ReportRow
from vcstack.crypto.pairing import mul
from vcstack.crypto.polynomial import P
from vcstack.schemas import OpCounter, UpdateBatch

logger = logging.getLogger(__name__)

MAX_MODEL_RATIO = 3.0
# Runs faster than this are reported, never failed.
MIN_MODEL_RATIO = 1 / 3


@dataclass
class BenchSettings:
    n: int = 2**16
    k: int = 460
    nu: str = "1/2"
    seed: int = 0
    users: int = 16
    exp_samples: int = 32
    insecure_debug: bool = False
    progress: bool = False


@dataclass
class ProofTiming:
    index: int
    seconds: float
    exps: int
    digests: int


@dataclass
class BenchResult:
    settings: BenchSettings
    t_group_seconds: float
    update_seconds: float
    published_nodes: int
    update_info_bytes: int
    timings: List[ProofTiming] = field(default_factory=list)

    @property
    def modelled_seconds(self) -> float:
        return sum(t.digests for t in self.timings) * self.t_group_seconds

    @property
    def measured_seconds(self) -> float:
        return sum(t.seconds for t in self.timings)

    @property
    def ratio(self) -> Optional[float]:
        """Measured time over partial digests times T_G.

        Proofs that applied no partial digest are left out.
        """
        measured = [t for t in self.timings if t.digests > 0]
        if not measured:
            return None
        modelled = sum(t.digests for t in measured) * self.t_group_seconds
        return sum(t.seconds for t in measured) / modelled

    @property
    def passed(self) -> bool:
        return self.ratio is None or self.ratio <= MAX_MODEL_RATIO

    @property
    def below_model(self) -> bool:
        return self.ratio is not None and self.ratio < MIN_MODEL_RATIO


def measure_group_exponentiation(samples: int, rng: random.Random) -> float:
    """Mean seconds of one G1 scalar multiplication by a random scalar."""
    scalars = [rng.randrange(1, P) for _ in range(samples)]
    start = time.perf_counter()
    for s in scalars:
        mul(G1, s)
    return (time.perf_counter() - start) / samples


def run_bench(settings: BenchSettings) -> BenchResult:
    rng = random.Random(settings.seed)
    logger.info(f"Measuring T_G over {settings.exp_samples} exponentiations")
    t_group = measure_group_exponentiation(settings.exp_samples, rng)
    logger.info(f"T_G = {t_group:.6f} s")

    vc = AmtVC.setup(
        settings.n,
        seed_bytes(settings.seed),
        insecure_debug=settings.insecure_debug,
        nu=settings.nu,
    )
    _, tree = vc.commit([0] * settings.n)
    indices = sorted(rng.sample(range(settings.n), settings.k))
    batch = UpdateBatch.of((i, 0, rng.randrange(1, P)) for i in indices)
    users = sorted(rng.sample(range(settings.n), min(settings.users, settings.n)))
    proofs = {i: vc.open(tree, i) for i in users}

    logger.info(f"Applying k={settings.k} updates to N={settings.n}")
    start = time.perf_counter()
    _, update_info, _ = vc.update(tree, batch)
    update_seconds = time.perf_counter() - start
    result = BenchResult(
        settings,
        t_group,
        update_seconds,
        len(update_info),
        len(update_info.encode()),
    )

    for index, proof in tqdm(
        proofs.items(), desc="proof updates", disable=not settings.progress
    ):
        counter = OpCounter()
        start = time.perf_counter()
        vc.proof_update(proof, index, batch, update_info, counter)
        seconds = time.perf_counter() - start
        result.timings.append(
            ProofTiming(index, seconds, counter.exps, counter.digests)
        )

    ratio = result.ratio
    mean = statistics.mean(t.seconds for t in result.timings)
    logger.info(
        f"Mean proof update {mean:.4f} s, "
        f"measured/model ratio {'n/a' if ratio is None else f'{ratio:.2f}'}"
    )
    if result.below_model:
        logger.warning(
            f"Proof updates ran {ratio:.2f}x the model, below {MIN_MODEL_RATIO:.2f}"
        )
    return result


def bench_report(result: BenchResult) -> ExperimentReport:
    s = result.settings
    ratio = result.ratio
    report = ExperimentReport(
        title=f"bench amt, N={s.n}, k={s.k}, nu={s.nu}",
        notes=[
            f"T_G measured on this host: {result.t_group_seconds:.6f} s.",
            f"Update of the batch took {result.update_seconds:.2f} s.",
            f"Measured/modelled ratio {'n/a' if ratio is None else f'{ratio:.2f}'} "
            f"(bound {MAX_MODEL_RATIO:g}).",
        ],
        passed=result.passed,
    )
    if result.below_model:
        report.notes.append(
            f"Proof updates ran faster than modelled (floor {MIN_MODEL_RATIO:.2f})."
        )
    for t in result.timings:
        report.rows.append(
            ReportRow(
                nu_or_c=s.nu,
                published_nodes=result.published_nodes,
                update_info_bytes=result.update_info_bytes,
                ops=t.exps,
                seconds=t.seconds,
                display={
                    "holder": str(t.index),
                    "partial digests": str(t.digests),
                    "exps": str(t.exps),
                    "measured (s)": f"{t.seconds:.4f}",
                    "model (s)": f"{t.digests * result.t_group_seconds:.4f}",
                },
            )
        )
    return report


class BenchCollector(Collector):
    _provider = "vcstack"

    def __init__(self, result: BenchResult):
        self._result = result

    def collect(self):
        labels = ["provider", "index"]
        result = self._result

        t_group = GaugeMetricFamily(
            "vcstack_group_exponentiation_seconds",
            "Measured time of one G1 exponentiation",
            labels=["provider"],
        )
        t_group.add_metric([self._provider], result.t_group_seconds)
        yield t_group

        update = GaugeMetricFamily(
            "vcstack_batch_update_seconds",
            "Time to apply the batch and structure the update information",
            labels=["provider"],
        )
        update.add_metric([self._provider], result.update_seconds)
        yield update

        seconds = GaugeMetricFamily(
            "vcstack_proof_update_seconds",
            "Wall time of one proof update",
            labels=labels,
        )
        digests = GaugeMetricFamily(
            "vcstack_proof_update_partial_digests",
            "Partial digests applied by one proof update",
            labels=labels,
        )
        for t in result.timings:
            seconds.add_metric([self._provider, str(t.index)], t.seconds)
            digests.add_metric([self._provider, str(t.index)], t.digests)
        yield seconds
        yield digests

        if result.ratio is not None:
            ratio = GaugeMetricFamily(
                "vcstack_model_ratio",
                "Measured over modelled proof update time",
                labels=["provider"],
            )
            ratio.add_metric([self._provider], result.ratio)
            yield ratio


def write_metrics(result: BenchResult, path: str):
    registry = CollectorRegistry()
    registry.register(BenchCollector(result))
    write_to_textfile(path, registry)
    logger.info(f"Wrote metrics to {path}")
