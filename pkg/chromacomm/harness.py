"""
Experiment driver
Runs protocols over graph families and seeds, checks every coloring, writes CSV and summaries
"""
import logging
import socket
import time
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import partial
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from .channel import MemorySession, Party, SharedRandomStream, open_socket_session
from .graph import (
    Graph,
    PartitionedGraph,
    PartitionMode,
    StructuredFamily,
    gen_clique_union,
    gen_random_bounded,
    gen_structured,
    partition_edges,
    slack_profile,
    verify_coloring,
)
from .protocols import DEFAULT_TRIAL_CAP, PROTOCOLS, ProtocolRun, expected_rejection_cost, run_protocol
from .slackint import DEFAULT_C_SAMPLE, overlapping_instance, sample_probability
from .utils import bit_width, ceil_log2, derive_seed

CSV_COLUMNS = [
    "experiment", "family", "n", "delta", "seed", "protocol", "partition",
    "total_bits", "bits_per_vertex", "proper", "rounds", "wall_time",
]

FAMILIES = ["clique-union", "random"] + [f.value.replace("_", "-") for f in StructuredFamily]
TRANSPORTS = ("memory", "socket")


class ExperimentConfigError(ValueError):
    pass


class ImproperColoringError(RuntimeError):
    """A protocol returned a coloring that is not a proper (Delta+1)-coloring"""
    pass


@dataclass
class ExperimentConfig:
    name: str = "run"
    protocol: str = "main"
    family: str = "clique-union"
    n: int = 64
    delta: int = 7
    partition: str = "uniform"
    base_seed: int = 0
    trials: int = 1
    c_sample: float = DEFAULT_C_SAMPLE
    trial_cap: int = DEFAULT_TRIAL_CAP
    transport: str = "memory"
    csv_path: Optional[str] = None
    edge_prob: Optional[float] = None
    allow_overlap: bool = False
    record_wall_time: bool = False
    workers: int = 1
    host: str = "127.0.0.1"
    connect_timeout: float = 10.0
    connect_retries: int = 50

    def __post_init__(self) -> None:
        self.family = self.family.replace("_", "-").lower()
        self.partition = self.partition.replace("-", "_").lower()

    def validate(self) -> None:
        if self.trials < 1:
            raise ExperimentConfigError(f"trials must be >= 1, got {self.trials}")
        if self.protocol not in PROTOCOLS:
            raise ExperimentConfigError(f"Unknown protocol '{self.protocol}'. Choose from: {', '.join(PROTOCOLS)}")
        if self.family not in FAMILIES:
            raise ExperimentConfigError(f"Unknown family '{self.family}'. Choose from: {', '.join(FAMILIES)}")
        if self.transport not in TRANSPORTS:
            raise ExperimentConfigError(f"Unknown transport '{self.transport}'. Choose from: {', '.join(TRANSPORTS)}")
        try:
            mode = PartitionMode(self.partition)
        except ValueError:
            raise ExperimentConfigError(f"Unknown partition mode '{self.partition}'")
        if mode is PartitionMode.OVERLAP:
            if not self.allow_overlap:
                raise ExperimentConfigError("Overlapping partitions need allow_overlap")
            if self.protocol != "rejection":
                raise ExperimentConfigError("Only the rejection protocol accepts overlapping partitions")
        if self.n < 1 or self.delta < 0:
            raise ExperimentConfigError(f"Need n >= 1 and delta >= 0, got n={self.n}, delta={self.delta}")
        if self.workers < 1:
            raise ExperimentConfigError(f"workers must be >= 1, got {self.workers}")

    @property
    def seeds(self) -> List[int]:
        return [self.base_seed + index for index in range(self.trials)]


@dataclass
class TrialRecord:
    experiment: str
    family: str
    n: int
    delta: int
    seed: int
    protocol: str
    partition: str
    total_bits: int
    bits_per_vertex: float
    proper: bool
    rounds: int
    wall_time: Optional[float] = None
    # not part of the CSV
    mean_slack: float = field(default=0.0, compare=False)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: List[TrialRecord]
    frame: pd.DataFrame
    summary: Dict[str, float]


def build_graph(cfg: ExperimentConfig, seed: int) -> Graph:
    if cfg.family == "clique-union":
        return gen_clique_union(max(1, cfg.n // (cfg.delta + 1)), cfg.delta)
    if cfg.family == "random":
        edge_prob = cfg.edge_prob
        if edge_prob is None:
            edge_prob = min(1.0, cfg.delta / (cfg.n - 1)) if cfg.n > 1 else 0.0
        return gen_random_bounded(cfg.n, cfg.delta, edge_prob, derive_seed(seed, "graph"))
    return gen_structured(cfg.family, cfg.n)


def build_instance(cfg: ExperimentConfig, seed: int) -> PartitionedGraph:
    g = build_graph(cfg, seed)
    return partition_edges(g, cfg.partition, derive_seed(seed, "partition"))


def run_over_sockets(
    protocol: str,
    pg: PartitionedGraph,
    shared_seed: int,
    c_sample=DEFAULT_C_SAMPLE,
    trial_cap: int = DEFAULT_TRIAL_CAP,
    host: str = "127.0.0.1",
    timeout: float = 10.0,
    retries: int = 50,
) -> Tuple[ProtocolRun, ProtocolRun]:
    """Run Alice and Bob in two threads over a localhost TCP connection"""
    listener = socket.create_server((host, 0))
    address = (host, listener.getsockname()[1])

    def play(role: Party) -> ProtocolRun:
        session = open_socket_session(
            role, address, shared_seed,
            listener=listener if role is Party.ALICE else None,
            timeout=timeout, retries=retries,
        )
        with session:
            run = run_protocol(protocol, pg, session, c_sample=c_sample, trial_cap=trial_cap)
            logging.debug(f"{role.name}: {run.total_bits} payload bits, {session.framing_bytes} framing bytes")
            return run

    try:
        with ThreadPoolExecutor(max_workers=2) as pool:
            alice_future = pool.submit(play, Party.ALICE)
            bob_future = pool.submit(play, Party.BOB)
            alice_run, bob_run = alice_future.result(), bob_future.result()
    finally:
        listener.close()

    if alice_run.coloring != bob_run.coloring or alice_run.total_bits != bob_run.total_bits:
        raise ImproperColoringError("Alice and Bob finished the socket run with different results")
    return alice_run, bob_run


def execute(cfg: ExperimentConfig, pg: PartitionedGraph, seed: int) -> ProtocolRun:
    shared_seed = derive_seed(seed, "shared")
    if cfg.transport == "socket":
        run, _ = run_over_sockets(
            cfg.protocol, pg, shared_seed, cfg.c_sample, cfg.trial_cap,
            cfg.host, cfg.connect_timeout, cfg.connect_retries,
        )
        return run
    return run_protocol(cfg.protocol, pg, MemorySession(shared_seed), c_sample=cfg.c_sample, trial_cap=cfg.trial_cap)


def run_trial(cfg: ExperimentConfig, seed: int) -> TrialRecord:
    pg = build_instance(cfg, seed)
    start = time.perf_counter()
    run = execute(cfg, pg, seed)
    elapsed = time.perf_counter() - start
    proper = verify_coloring(pg.base, run.coloring, pg.delta + 1)
    if not proper:
        raise ImproperColoringError(
            f"{cfg.protocol} produced an improper coloring on {cfg.family} n={pg.n} seed={seed}"
        )
    slack = slack_profile(pg.base, run.permutation, pg.delta)[1:]
    return TrialRecord(
        experiment=cfg.name,
        family=cfg.family,
        n=pg.n,
        delta=pg.delta,
        seed=seed,
        protocol=cfg.protocol,
        partition=cfg.partition.replace("_", "-"),
        total_bits=run.total_bits,
        bits_per_vertex=run.total_bits / pg.n,
        proper=proper,
        rounds=run.rounds,
        wall_time=round(elapsed, 6) if cfg.record_wall_time else None,
        mean_slack=float(np.mean(slack)) if slack else 0.0,
    )


def records_frame(records: Sequence[TrialRecord]) -> pd.DataFrame:
    rows = [{column: getattr(r, column) for column in CSV_COLUMNS} for r in records]
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def summarize(values: Sequence[float]) -> Dict[str, float]:
    """mean, std, min, max and p99 of a sample"""
    series = pd.Series(values, dtype=float)
    return {
        "count": int(series.size),
        "mean": float(series.mean()),
        "std": float(series.std(ddof=1)) if series.size > 1 else 0.0,
        "min": float(series.min()),
        "max": float(series.max()),
        "p99": float(series.quantile(0.99)),
    }


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run one trial per seed, write the CSV when csv_path is set, and summarize bits per vertex"""
    cfg.validate()
    logging.info(f"Experiment '{cfg.name}': {cfg.protocol} on {cfg.family} n={cfg.n} delta={cfg.delta}, {cfg.trials} trials")
    worker = partial(run_trial, cfg)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(worker, cfg.seeds))
    else:
        records = [worker(seed) for seed in cfg.seeds]

    frame = records_frame(records)
    if cfg.csv_path:
        Path(cfg.csv_path).parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(cfg.csv_path, index=False)
        logging.info(f"Wrote {len(frame)} records to {cfg.csv_path}")

    summary = summarize(frame["bits_per_vertex"])
    summary["mean_slack"] = float(np.mean([r.mean_slack for r in records]))
    return ExperimentResult(cfg, records, frame, summary)


def deterministic_bound_per_vertex(delta: int) -> int:
    """Worst-case bits per vertex of the deterministic protocol"""
    palette = delta + 1
    return 2 * bit_width(palette) * ceil_log2(palette)


@dataclass
class CliqueScalingResult:
    table: pd.DataFrame
    ratios: Dict[str, float]


def experiment_clique_scaling(
    deltas: Sequence[int] = (3, 7, 15, 31, 63, 127),
    n: int = 1024,
    seeds: int = 200,
    protocols: Sequence[str] = ("rejection", "main", "deterministic"),
    c_sample=DEFAULT_C_SAMPLE,
    flatness_c_sample=1.0,
    base_seed: int = 0,
    workers: int = 1,
    csv_path: Optional[str] = None,
) -> CliqueScalingResult:
    """Mean bits per vertex for each protocol on (Delta+1)-clique unions

    The main protocol runs at c_sample and, when different, again at
    flatness_c_sample. `ratios` compares the largest and smallest Delta.
    """
    runs: List[Tuple[str, float]] = []
    for protocol in protocols:
        if protocol == "main":
            runs.extend(("main", c) for c in dict.fromkeys([c_sample, flatness_c_sample]))
        else:
            runs.append((protocol, c_sample))

    rows = []
    frames = []
    for protocol, c in runs:
        for delta in deltas:
            cfg = ExperimentConfig(
                name="clique-scaling", protocol=protocol, family="clique-union", n=n, delta=delta,
                partition="uniform", base_seed=base_seed, trials=seeds, c_sample=c, workers=workers,
            )
            result = run_experiment(cfg)
            frames.append(result.frame)
            reference = None
            if protocol == "rejection":
                reference = float(expected_rejection_cost(delta))
            elif protocol == "deterministic":
                reference = float(deterministic_bound_per_vertex(delta))
            rows.append({
                "protocol": protocol,
                "c_sample": float(c),
                "delta": delta,
                "mean_bits_per_vertex": result.summary["mean"],
                "std_bits_per_vertex": result.summary["std"],
                "p99_bits_per_vertex": result.summary["p99"],
                "reference": reference,
            })

    table = pd.DataFrame(rows)
    if csv_path:
        pd.concat(frames, ignore_index=True).to_csv(csv_path, index=False)
        logging.info(f"Wrote clique-scaling records to {csv_path}")

    ratios = {}
    low, high = min(deltas), max(deltas)
    for (protocol, c), group in table.groupby(["protocol", "c_sample"], sort=False):
        by_delta = group.set_index("delta")["mean_bits_per_vertex"]
        if by_delta[low] > 0:
            ratios[f"{protocol}@c={c:g}"] = float(by_delta[high] / by_delta[low])
    return CliqueScalingResult(table, ratios)


def slack_failure_frequency(m: int, k: int, draws: int, seed: int, c_sample=DEFAULT_C_SAMPLE) -> float:
    """Fraction of sampled S with |S ∩ X| + |S ∩ Y| >= |S| for the overlapping instance with slack k"""
    inst = overlapping_instance(m, k)
    x_mask = np.zeros(m, dtype=bool)
    y_mask = np.zeros(m, dtype=bool)
    x_mask[[e - 1 for e in inst.x_set]] = True
    y_mask[[e - 1 for e in inst.y_set]] = True
    p = sample_probability(m, k, c_sample)
    stream = SharedRandomStream(derive_seed(seed, f"slack:{m}:{k}"))
    failures = 0
    for _ in range(draws):
        s = stream.subset_mask(m, p)
        size = int(s.sum())
        if size == 0 or int((s & x_mask).sum()) + int((s & y_mask).sum()) >= size:
            failures += 1
    return failures / draws


def slack_levels(m: int) -> List[int]:
    """sqrt(200 m), m/4 and m/2, rounded"""
    return [int(round((200 * m) ** 0.5)), m // 4, m // 2]


def experiment_slack_concentration(
    ms: Sequence[int] = (256, 4096),
    draws: int = 10_000,
    seed: int = 0,
    c_sample=DEFAULT_C_SAMPLE,
) -> pd.DataFrame:
    """Failure frequency of the sampled slack test with the guess equal to the true slack"""
    threshold = 0.5 + 3 * (0.25 / draws) ** 0.5
    rows = []
    for m in ms:
        for k in slack_levels(m):
            if not 1 <= k < m:
                continue
            frequency = slack_failure_frequency(m, k, draws, seed, c_sample)
            failures = int(round(frequency * draws))
            p_value = stats.binomtest(failures, draws, 0.5, alternative="greater").pvalue
            rows.append({
                "m": m,
                "k": k,
                "p": float(sample_probability(m, k, c_sample)),
                "draws": draws,
                "failure_frequency": frequency,
                "threshold": threshold,
                "binom_p_value": float(p_value),
                "within_bound": frequency <= threshold,
            })
            logging.info(f"Slack concentration m={m} k={k}: failure frequency {frequency:.4f}")
    return pd.DataFrame(rows)


@dataclass
class TailResult:
    quantiles: Dict[str, float]
    p99_over_median: float
    histogram: pd.DataFrame
    all_proper: bool
    summary: Dict[str, float] = field(default_factory=dict)


def experiment_tail(
    family: str = "clique-union",
    n: int = 256,
    delta: int = 15,
    seeds: int = 10_000,
    bins: int = 50,
    c_sample=DEFAULT_C_SAMPLE,
    base_seed: int = 0,
    workers: int = 1,
    csv_path: Optional[str] = None,
    histogram_path: Optional[str] = None,
) -> TailResult:
    """Distribution of total bits for the main protocol over many seeds"""
    cfg = ExperimentConfig(
        name="tail", protocol="main", family=family, n=n, delta=delta, base_seed=base_seed,
        trials=seeds, c_sample=c_sample, workers=workers, csv_path=csv_path,
    )
    result = run_experiment(cfg)
    totals = result.frame["total_bits"].to_numpy(dtype=float)
    levels = {"p50": 0.5, "p90": 0.9, "p99": 0.99, "p999": 0.999}
    quantiles = {name: float(np.quantile(totals, q)) for name, q in levels.items()}
    quantiles["max"] = float(totals.max())
    counts, edges = np.histogram(totals, bins=bins)
    histogram = pd.DataFrame({"bin_start": edges[:-1], "bin_end": edges[1:], "count": counts})
    if histogram_path:
        histogram.to_csv(histogram_path, index=False)
        logging.info(f"Wrote tail histogram to {histogram_path}")
    median = quantiles["p50"]
    return TailResult(
        quantiles=quantiles,
        p99_over_median=quantiles["p99"] / median if median else float("nan"),
        histogram=histogram,
        all_proper=bool(result.frame["proper"].all()),
        summary=result.summary,
    )


def config_from_settings(settings, **overrides: Any) -> ExperimentConfig:
    """ExperimentConfig seeded from a loaded Config, then overridden field by field"""
    base = ExperimentConfig(
        c_sample=settings.c_sample,
        trial_cap=settings.rejection_trial_cap,
        base_seed=settings.base_seed,
        trials=settings.seeds,
        csv_path=settings.csv_path,
        allow_overlap=settings.allow_overlap,
        record_wall_time=settings.record_wall_time,
        workers=settings.workers,
        host=settings.host,
        connect_timeout=settings.connect_timeout,
        connect_retries=settings.connect_retries,
    )
    return replace(base, **{k: v for k, v in overrides.items() if v is not None})


def summary_record(result: ExperimentResult) -> Dict[str, Any]:
    record = {k: v for k, v in asdict(result.config).items() if k not in ("host", "connect_timeout", "connect_retries")}
    record.update({f"bits_per_vertex_{k}": v for k, v in result.summary.items()})
    return record
