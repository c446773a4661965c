"""Run orchestration: build a network from a scenario, run it, report."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

from .dsr import DsrAgent, DsrConfig
from .essdsr import EssdsrAgent, EssdsrConfig
from .network import Network
from .scenario import Scenario
from .traffic import (Flow, MetricsLog, NetworkLifetime, TrafficManager,
                      compute_network_lifetime, compute_node_lifetimes)

# the improvement the reference study reports for its own two lifetimes
REPORTED_IMPROVEMENT_PERCENT = 61.71


def agent_config(s: Scenario, protocol: str, **overrides):
    common = dict(
        max_rreq_jitter=s.dsr.max_rreq_jitter,
        retransmit_limit=s.dsr.retransmit_limit,
        retransmit_timeout=s.dsr.retransmit_timeout,
        discovery_timeout=s.dsr.discovery_timeout,
        discovery_attempts=s.dsr.discovery_attempts,
        intermediate_cache_reply=s.toggles.intermediate_cache_reply,
    )
    if protocol == "dsr":
        return DsrConfig(**{**common, **overrides})
    return EssdsrConfig(**{**common,
                          "threshold_fraction": s.essdsr_threshold_fraction,
                          "jitter": s.essdsr_jitter,
                          "rrep_energy_jitter": s.toggles.rrep_energy_jitter,
                          **overrides})


class Simulation:
    """One self-contained simulator instance for a scenario."""

    def __init__(self, scenario: Scenario, protocol: Optional[str] = None,
                 trace: bool = True, **config_overrides) -> None:
        self.scenario = scenario
        self.protocol = protocol or scenario.protocol
        self.net = Network(scenario.positions, scenario.energies, scenario.radio,
                           seed=scenario.seed, promiscuous_rx=scenario.toggles.promiscuous_rx,
                           trace=trace)
        config = agent_config(scenario, self.protocol, **config_overrides)
        cls = EssdsrAgent if self.protocol == "essdsr" else DsrAgent
        # each agent gets its own config copy so test hooks can be set per node
        self.net.attach(lambda n, net: cls(n, net, replace(config)))
        self.flows = [Flow(f.source, f.destination, f.send_interval, f.start, f.data_bytes,
                           f.ack_bytes, flow_id=i) for i, f in enumerate(scenario.flows)]
        self.traffic = TrafficManager(self.net, self.flows, scenario.snapshot_interval)

    def run(self) -> "RunResult":
        self.traffic.start()
        self.net.queue.run_until(self.scenario.horizon)
        log = self.traffic.finish()
        return RunResult(self.scenario, self.protocol, log, list(self.net.trace), self,
                         make_report(self.scenario, self.protocol, log, self.flows))


@dataclass
class RunReport:
    scenario_digest: str
    protocol: str
    seed: int
    horizon: float
    network_lifetime: float
    lifetime_cause: str
    stall_time: Optional[float]
    final_residuals: dict[str, float]
    death_times: dict[str, float]
    low_energy_nodes: list[int]
    packet_counters: dict[str, dict[str, int]]
    flows: list[dict[str, int]]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls(**json.loads(text))


@dataclass
class RunResult:
    scenario: Scenario
    protocol: str
    log: MetricsLog
    trace: list[str]
    simulation: Simulation = field(repr=False)
    report: RunReport = None

    def write(self, out_dir: Union[str, Path], prefix: Optional[str] = None) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        prefix = prefix or self.protocol
        files = {
            f"{prefix}_energy.csv": self.log.energy_csv(),
            f"{prefix}_deaths.csv": self.log.deaths_csv(),
            f"{prefix}_trace.txt": "\n".join(self.trace) + "\n",
            f"{prefix}_report.json": self.report.to_json(),
        }
        written = []
        for name, text in files.items():
            path = out / name
            path.write_text(text)
            written.append(path)
        return written


def network_lifetime(scenario: Scenario, log: MetricsLog) -> NetworkLifetime:
    flow = scenario.flows[0]
    return compute_network_lifetime(log.deaths, scenario.positions, scenario.radio,
                                    flow.source, flow.destination, scenario.horizon)


def make_report(scenario: Scenario, protocol: str, log: MetricsLog, flows: list[Flow]) -> RunReport:
    if scenario.flows:
        lifetime = network_lifetime(scenario, log)
    else:
        lifetime = NetworkLifetime(scenario.horizon, "horizon")
    stalls = [t for t, kind, _ in log.lifetime_events if kind == "unreachable"]
    nodes = compute_node_lifetimes(log)
    return RunReport(
        scenario_digest=scenario.digest(),
        protocol=protocol,
        seed=scenario.seed,
        horizon=scenario.horizon,
        network_lifetime=lifetime.value,
        lifetime_cause=lifetime.cause,
        stall_time=min(stalls) if stalls else None,
        final_residuals={str(n): v.final_residual for n, v in nodes.items()},
        death_times={str(n): v.death_time for n, v in nodes.items() if v.death_time is not None},
        low_energy_nodes=[int(d) for t, kind, d in log.lifetime_events if kind == "low-energy"],
        packet_counters=log.packet_counters,
        flows=[{"source": f.source, "destination": f.destination, "injected": f.injected,
                "delivered": len(f.delivered), "acked": len(f.acked)} for f in flows],
    )


def run(scenario: Scenario, protocol: Optional[str] = None,
        out_dir: Union[str, Path, None] = None, **config_overrides) -> RunResult:
    result = Simulation(scenario, protocol, **config_overrides).run()
    if out_dir is not None:
        result.write(out_dir)
    return result


@dataclass
class Comparison:
    dsr: RunResult
    essdsr: RunResult

    @property
    def improvement_percent(self) -> float:
        return improvement_percent(self.dsr.report.network_lifetime, self.essdsr.report.network_lifetime)

    def residual_deltas(self) -> list[tuple[int, float, float, float]]:
        """(node, dsr residual, essdsr residual, essdsr - dsr) per node."""
        a = self.dsr.report.final_residuals
        b = self.essdsr.report.final_residuals
        return [(int(n), a[n], b[n], b[n] - a[n]) for n in sorted(a, key=int)]

    def to_json(self) -> str:
        record = {
            "dsr_lifetime": self.dsr.report.network_lifetime,
            "essdsr_lifetime": self.essdsr.report.network_lifetime,
            "improvement_percent": self.improvement_percent,
            "reported_improvement_percent": REPORTED_IMPROVEMENT_PERCENT,
            "residual_deltas": [
                {"node": n, "dsr": d, "essdsr": e, "delta": x} for n, d, e, x in self.residual_deltas()
            ],
        }
        return json.dumps(record, indent=2, sort_keys=True) + "\n"

    def write(self, out_dir: Union[str, Path]) -> list[Path]:
        out = Path(out_dir)
        written = self.dsr.write(out, "dsr") + self.essdsr.write(out, "essdsr")
        path = out / "comparison.json"
        path.write_text(self.to_json())
        csv_path = out / "residual_deltas.csv"
        rows = ["node,dsr_residual,essdsr_residual,delta"]
        rows += [f"{n},{d!r},{e!r},{x!r}" for n, d, e, x in self.residual_deltas()]
        csv_path.write_text("\n".join(rows) + "\n")
        return written + [path, csv_path]


def improvement_percent(dsr_lifetime: float, essdsr_lifetime: float) -> float:
    return 100.0 * (essdsr_lifetime - dsr_lifetime) / dsr_lifetime


def compare(scenario: Scenario, out_dir: Union[str, Path, None] = None,
            parallel: bool = False) -> Comparison:
    """Run both protocols on the same scenario and seed."""
    if parallel:
        with ThreadPoolExecutor(max_workers=2) as pool:
            futures = [pool.submit(run, scenario, p) for p in ("dsr", "essdsr")]
            dsr, ess = (f.result() for f in futures)
    else:
        dsr, ess = run(scenario, "dsr"), run(scenario, "essdsr")
    comparison = Comparison(dsr, ess)
    if out_dir is not None:
        comparison.write(out_dir)
    return comparison
