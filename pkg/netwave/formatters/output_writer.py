"""Formatters and writers for run artifacts: CSV tables, normalized JSON, Rich summary."""

import csv
import io
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from ..core.entities import EventRecord, FunctionalSample, RunResult, Snapshot
from ..core.network import NetworkSpec, flux_tv_budget
from ..parsers.network_config import serialize_network
from ..services.simulation import SweepRow

logger = logging.getLogger(__name__)

TELEMETRY_HEADER = ["t", "event_idx", "tv_density", "tv_flux", "N", "mass"]
EVENTS_HEADER = [
    "event_idx",
    "t",
    "kind",
    "road_id",
    "junction_id",
    "rho_before",
    "rho_after",
    "fronts_created",
    "fronts_removed",
    "balance_residual",
    "tv_density",
    "tv_flux",
    "N",
    "mass",
]
SNAPSHOT_HEADER = ["road_id", "x_left", "x_right", "rho"]
EVENT_SNAPSHOT_HEADER = ["event_idx", "t"] + SNAPSHOT_HEADER
SWEEP_HEADER = ["run", "parameter", "events", "tv_flux", "N", "mass"]


def _num(value: float) -> str:
    return f"{value:.17g}"


def _densities(values: Sequence[float]) -> str:
    return " ".join(_num(v) for v in values)


def _csv(header: List[str], rows: List[List[Any]]) -> str:
    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return output.getvalue()


def snapshot_rows(snapshot: Snapshot) -> List[List[str]]:
    return [
        [road.road_id, _num(left), _num(right), _num(rho)]
        for road in snapshot.roads.values()
        for left, right, rho in road.segments()
    ]


class ArtifactFormatter:
    """Base class for artifact formatters."""

    def format(self, *args, **kwargs) -> str:
        """Format an artifact to string."""
        raise NotImplementedError


class TelemetryFormatter(ArtifactFormatter):
    """Format functional samples as telemetry CSV."""

    def format(
        self, samples: Sequence[FunctionalSample], phi_columns: bool = False, **kwargs
    ) -> str:
        junction_ids = sorted(samples[0].junction_bad_counts) if samples and phi_columns else []
        header = TELEMETRY_HEADER + [f"phi_{jid}" for jid in junction_ids]
        rows = []
        for sample in samples:
            row = [
                _num(sample.time),
                sample.event_index,
                _num(sample.tv_density),
                _num(sample.tv_flux),
                sample.big_wave_count,
                _num(sample.mass),
            ]
            row.extend(sample.junction_bad_counts[jid] for jid in junction_ids)
            rows.append(row)
        return _csv(header, rows)


class EventLogFormatter(ArtifactFormatter):
    """Format event records, joined with the functional values sampled after them."""

    def format(
        self,
        events: Sequence[EventRecord],
        samples: Sequence[FunctionalSample] = (),
        **kwargs,
    ) -> str:
        """
        Format the event log.

        Args:
            events: Processed events in order
            samples: Telemetry samples; the first sample carrying an event
                index supplies that event's functional values

        Returns:
            CSV string
        """
        after: Dict[int, FunctionalSample] = {}
        for sample in samples:
            after.setdefault(sample.event_index, sample)
        rows = []
        for record in events:
            sample = after.get(record.index)
            functionals = (
                [_num(sample.tv_density), _num(sample.tv_flux), sample.big_wave_count,
                 _num(sample.mass)]
                if sample is not None
                else ["", "", "", ""]
            )
            rows.append(
                [
                    record.index,
                    _num(record.time),
                    record.kind.value,
                    record.road_id or "",
                    record.junction_id or "",
                    _densities(record.rho_before),
                    _densities(record.rho_after),
                    record.fronts_created,
                    record.fronts_removed,
                    _num(record.balance_residual),
                ]
                + functionals
            )
        return _csv(EVENTS_HEADER, rows)


class SnapshotFormatter(ArtifactFormatter):
    """Format one snapshot as road segments."""

    def format(self, snapshot: Snapshot, **kwargs) -> str:
        return _csv(SNAPSHOT_HEADER, snapshot_rows(snapshot))


class SweepFormatter(ArtifactFormatter):
    """Format sweep rows."""

    def format(self, rows: Sequence[SweepRow], **kwargs) -> str:
        return _csv(
            SWEEP_HEADER,
            [
                [row.run, row.label, row.events, _num(row.tv_flux), row.big_wave_count,
                 _num(row.mass)]
                for row in rows
            ],
        )


class FormatterFactory:
    """Factory for creating artifact formatters."""

    FORMATTERS = {
        "telemetry": TelemetryFormatter,
        "events": EventLogFormatter,
        "snapshot": SnapshotFormatter,
        "sweep": SweepFormatter,
    }

    @classmethod
    def get_formatter(cls, kind: str) -> ArtifactFormatter:
        """
        Get a formatter instance.

        Raises:
            ValueError: If the artifact kind is unknown
        """
        formatter_class = cls.FORMATTERS.get(kind.lower())
        if not formatter_class:
            raise ValueError(f"Unknown artifact kind: {kind}")
        return formatter_class()

    @classmethod
    def list_kinds(cls) -> List[str]:
        return list(cls.FORMATTERS.keys())


def snapshot_filename(t: float) -> str:
    return f"snapshot_{t:g}.csv"


class EventSnapshotWriter:
    """Observer streaming the post-event state of every event to snapshots.csv."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._handle: Optional[TextIO] = None
        self._writer = None

    def __enter__(self) -> "EventSnapshotWriter":
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = open(self.path, "w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._handle, lineterminator="\n")
        self._writer.writerow(EVENT_SNAPSHOT_HEADER)
        self._last_index = -1
        return self

    def __exit__(self, *exc) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None

    def __call__(self, snapshot: Snapshot, record: Optional[EventRecord]) -> None:
        index = record.index if record is not None else 0
        if record is None and self._last_index >= 0:
            return
        self._last_index = index
        for row in snapshot_rows(snapshot):
            self._writer.writerow([index, _num(snapshot.time)] + row)


class OutputWriter:
    """Writes run artifacts into an output directory."""

    def __init__(self, out_dir: Path, phi_columns: bool = False):
        self.out_dir = Path(out_dir)
        self.phi_columns = phi_columns

    def _write(self, name: str, text: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        path.write_text(text, encoding="utf-8")
        logger.debug("Wrote %s", path)
        return path

    def event_snapshots(self) -> EventSnapshotWriter:
        return EventSnapshotWriter(self.out_dir / "snapshots.csv")

    def write_run(self, spec: NetworkSpec, result: RunResult) -> List[Path]:
        """Write telemetry, event log, requested snapshots and the normalized spec."""
        written = [
            self._write(
                "telemetry.csv",
                FormatterFactory.get_formatter("telemetry").format(
                    result.samples, phi_columns=self.phi_columns
                ),
            ),
            self._write(
                "events.csv",
                FormatterFactory.get_formatter("events").format(result.events, result.samples),
            ),
            self._write("spec_normalized.json", serialize_network(spec) + "\n"),
        ]
        snapshot_formatter = FormatterFactory.get_formatter("snapshot")
        for t, snapshot in sorted(result.snapshots.items()):
            written.append(self._write(snapshot_filename(t), snapshot_formatter.format(snapshot)))
        return written

    def write_sweep(self, rows: Sequence[SweepRow]) -> Path:
        return self._write("sweep.csv", FormatterFactory.get_formatter("sweep").format(rows))


class RunSummary:
    """Rich rendering of a finished run."""

    def __init__(self, console: Optional[Console] = None):
        self.console = console or Console()

    def table(self, spec: NetworkSpec, result: RunResult, title: str = "Run Summary") -> Table:
        table = Table(title=title, show_header=True, header_style="bold magenta")
        table.add_column("quantity", style="cyan")
        table.add_column("value", style="white")

        initial = result.samples[0] if result.samples else None
        final = result.final_sample
        table.add_row("horizon", f"{result.horizon:g}")
        table.add_row("events", str(result.event_count))
        table.add_row("roads / junctions", f"{len(spec.roads)} / {len(spec.junctions)}")
        table.add_row("flux", f"{spec.flux.family.value} (fmax={spec.flux.fmax:g})")
        table.add_row("delta", f"{spec.delta:g}")
        if initial is not None and final is not None:
            table.add_row("tv_flux", f"{initial.tv_flux:.6g} -> {final.tv_flux:.6g}")
            table.add_row("tv_density", f"{initial.tv_density:.6g} -> {final.tv_density:.6g}")
            table.add_row("N", f"{initial.big_wave_count} -> {final.big_wave_count}")
            table.add_row("mass", f"{initial.mass:.12g} -> {final.mass:.12g}")
        table.add_row("flux TV budget", f"{flux_tv_budget(spec, 0.0, result.horizon):g}")
        return table

    def print_run(self, spec: NetworkSpec, result: RunResult) -> None:
        self.console.print(self.table(spec, result))
        for warning in spec.warnings:
            self.console.print(Panel(warning, title="warning", border_style="yellow"))

    def print_sweep(self, rows: Sequence[SweepRow]) -> None:
        table = Table(title="Sweep", show_header=True, header_style="bold magenta")
        for column in SWEEP_HEADER:
            table.add_column(column, style="cyan")
        for row in rows:
            table.add_row(
                str(row.run), row.label, str(row.events), f"{row.tv_flux:.6g}",
                str(row.big_wave_count), f"{row.mass:.6g}",
            )
        self.console.print(table)
