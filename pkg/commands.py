"""Command handler: channel ingestion, command dispatch and report writing."""
import argparse
import csv
import logging
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ValidationError, model_validator

from config import TOOL_VERSION, settings
from info_core import validate_distribution
from marton import (
    marton_sum_rate_max,
    outer_bound_search,
    rtd_equality_check,
    rtd_sum_rate_max,
)
from models import (
    BroadcastChannel,
    GateJoint,
    JointPMF,
    MartonWitness,
    OptimizerConfig,
    RtdEqualityCheck,
    RtdPoint,
    TransitionMatrix,
    VerificationReport,
)
from sampling import channel_from_name, random_channel, trial_seed
from stationarity import and_sweep, xor_sweep
from theorem import margin, search_violation, verify_binary_channel
from utils import parallel_map

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FINDING = 2
EXIT_EXHAUSTED = 3


class ChannelSpecError(ValueError):
    """Channel file or name that cannot be turned into a BroadcastChannel."""


class ChannelSpecFile(BaseModel):
    """{"input_size", "to_y", "to_z"} with numeric or decimal-string entries, or {"named"}."""

    input_size: int | None = None
    to_y: list[list[float]] | None = None
    to_z: list[list[float]] | None = None
    named: str | None = None

    @model_validator(mode="after")
    def _check_form(self) -> "ChannelSpecFile":
        if self.named is not None:
            if self.to_y is not None or self.to_z is not None:
                raise ValueError("give either 'named' or the two matrices, not both")
            return self
        if self.to_y is None or self.to_z is None:
            raise ValueError("'to_y' and 'to_z' are required without 'named'")
        return self

    def to_channel(self) -> BroadcastChannel:
        if self.named is not None:
            return channel_from_name(self.named)
        matrices = []
        for field, rows in (("to_y", self.to_y), ("to_z", self.to_z)):
            checked = []
            for index, row in enumerate(rows):
                try:
                    checked.append(validate_distribution(row, settings.ingest_tolerance))
                except ValueError as e:
                    raise ChannelSpecError(f"{field}[{index}]: {e}") from e
            matrices.append(TransitionMatrix(rows=tuple(checked)))
        size = self.input_size if self.input_size is not None else matrices[0].input_size
        try:
            return BroadcastChannel(input_size=size, to_y=matrices[0], to_z=matrices[1])
        except ValidationError as e:
            raise ChannelSpecError(str(e)) from e


def load_channel(source: str) -> BroadcastChannel:
    """Read a channel from a JSON file path or resolve a channel name."""
    path = Path(source)
    if path.is_file():
        try:
            document = ChannelSpecFile.model_validate_json(path.read_text(encoding="utf-8"))
        except ValidationError as e:
            raise ChannelSpecError(f"{path}: {e}") from e
        return document.to_channel()
    try:
        return channel_from_name(source)
    except ValueError as e:
        raise ChannelSpecError(f"'{source}' is neither a channel file nor a known name: {e}") from e


class ReportFile(BaseModel):
    tool_version: str = TOOL_VERSION
    command: str
    arguments: dict[str, Any]
    config: OptimizerConfig | None = None
    channel_digest: str | None = None
    payload: dict[str, Any]


class SumRatePayload(BaseModel):
    rtd_value: float
    rtd_argmax: RtdPoint
    marton_value: float
    marton_witness: MartonWitness
    outer_estimate: float
    outer_witness: JointPMF
    marton_rtd_gap: float
    outer_minus_marton: float
    rtd_equality: RtdEqualityCheck


class HuntPayload(BaseModel):
    trials: int
    seed: int
    ny: int
    nz: int
    min_margin: float
    worst_seed: int
    worst_digest: str
    violating_seeds: list[int]


class CounterexamplePayload(BaseModel):
    found: bool
    margin: float | None = None
    witness: GateJoint | None = None


class CommandHandler:
    """Run toolkit commands and write their reports."""

    def __init__(self):
        self.commands = {
            "verify": self._handle_verify,
            "sumrate": self._handle_sumrate,
            "hunt": self._handle_hunt,
            "counterexample": self._handle_counterexample,
            "stationarity": self._handle_stationarity,
        }
        logger.debug(f"Command handler initialized with: {', '.join(self.commands)}")

    def execute(self, args: argparse.Namespace) -> int:
        """Dispatch to the command handler; returns the process exit code."""
        handler = self.commands.get(args.command)
        if handler is None:
            logger.error(f"❌ Unknown command '{args.command}'")
            return EXIT_USAGE
        logger.info(f"🎯 COMMAND - {args.command}")
        try:
            code = handler(args)
        except ValueError as e:
            logger.error(f"❌ {args.command} failed: {e}", exc_info=True)
            return EXIT_USAGE
        except OSError as e:
            logger.error(f"❌ {args.command} could not read or write a file: {e}", exc_info=True)
            return EXIT_USAGE
        logger.info(f"✅ COMMAND COMPLETED - {args.command} (exit {code})")
        return code

    def _config(self, args: argparse.Namespace) -> OptimizerConfig:
        return OptimizerConfig.from_settings(
            grid_resolution=getattr(args, "grid", None),
            refine_iterations=getattr(args, "refine", None),
            seed=getattr(args, "seed", None),
        )

    def _write(
        self,
        args: argparse.Namespace,
        payload: BaseModel,
        cfg: OptimizerConfig | None,
        channel: BroadcastChannel | None,
    ) -> None:
        arguments = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
        report = ReportFile(
            command=args.command,
            arguments=arguments,
            config=cfg,
            channel_digest=channel.digest() if channel is not None else None,
            payload=payload.model_dump(mode="json"),
        )
        text = report.model_dump_json(indent=2) + "\n"
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
            logger.info(f"📤 Report written to {args.out}")
        else:
            print(text, end="")

    def _handle_verify(self, args: argparse.Namespace) -> int:
        channel = load_channel(args.channel)
        cfg = self._config(args)
        report = verify_binary_channel(channel, cfg)
        self._write(args, report, cfg, channel)
        if args.csv:
            self._write_margin_table(Path(args.csv), report)
        return EXIT_OK if report.holds else EXIT_FINDING

    def _write_margin_table(self, path: Path, report: VerificationReport) -> None:
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(
                ["gate", "case", "max_lhs", "rhs_at_argmax", "margin", "min_margin"]
            )
            for r in report.per_gate_results:
                writer.writerow(
                    [r.label, r.case.case_id.value, repr(r.max_lhs), repr(r.rhs_at_argmax),
                     repr(r.margin), repr(r.min_margin)]
                )
        logger.info(f"📤 Margin table written to {path}")

    def _handle_sumrate(self, args: argparse.Namespace) -> int:
        channel = load_channel(args.channel)
        cfg = self._config(args)
        rtd_value, rtd_argmax = rtd_sum_rate_max(channel, cfg)
        marton_value, witness = marton_sum_rate_max(channel, cfg)
        outer_value, outer_witness = outer_bound_search(channel, cfg)
        payload = SumRatePayload(
            rtd_value=rtd_value,
            rtd_argmax=rtd_argmax,
            marton_value=marton_value,
            marton_witness=witness,
            outer_estimate=outer_value,
            outer_witness=outer_witness,
            marton_rtd_gap=abs(marton_value - rtd_value),
            outer_minus_marton=outer_value - marton_value,
            rtd_equality=rtd_equality_check(channel, witness, rtd_value),
        )
        self._write(args, payload, cfg, channel)
        return EXIT_OK if payload.rtd_equality.holds else EXIT_FINDING

    def _handle_hunt(self, args: argparse.Namespace) -> int:
        if args.trials < 1:
            raise ValueError("--trials must be at least 1")
        cfg = self._config(args)
        if args.grid is None:
            cfg = cfg.model_copy(update={"grid_resolution": settings.hunt_grid_resolution})
        seeds = [trial_seed(args.seed, i) for i in range(args.trials)]

        def run(seed: int) -> tuple[float, str]:
            channel = random_channel(args.ny, args.nz, seed)
            report = verify_binary_channel(channel, cfg, settings.hunt_oracle_resolution)
            return report.global_min_margin, channel.digest()

        outcomes = parallel_map(run, seeds)
        worst = min(range(len(seeds)), key=lambda i: (outcomes[i][0], seeds[i]))
        violating = [s for s, (m, _) in zip(seeds, outcomes) if m < -settings.margin_tolerance]
        payload = HuntPayload(
            trials=args.trials,
            seed=args.seed,
            ny=args.ny,
            nz=args.nz,
            min_margin=outcomes[worst][0],
            worst_seed=seeds[worst],
            worst_digest=outcomes[worst][1],
            violating_seeds=violating,
        )
        logger.info(
            f"📊 Hunt over {args.trials} channels: min margin {payload.min_margin:.3e}, "
            f"{len(violating)} violations"
        )
        self._write(args, payload, cfg, None)
        return EXIT_FINDING if violating else EXIT_OK

    def _handle_counterexample(self, args: argparse.Namespace) -> int:
        channel = load_channel(args.channel)
        if channel.input_size < 3:
            raise ValueError("counterexample search needs |X| >= 3; use 'verify' for binary inputs")
        cfg = self._config(args)
        witness = search_violation(channel, cfg)
        if witness is None:
            payload = CounterexamplePayload(found=False)
        else:
            payload = CounterexamplePayload(
                found=True, margin=margin(witness, channel), witness=witness
            )
        self._write(args, payload, cfg, channel)
        return EXIT_OK if payload.found else EXIT_EXHAUSTED

    def _handle_stationarity(self, args: argparse.Namespace) -> int:
        channel = load_channel(args.channel)
        cfg = self._config(args)
        if args.gate == "and":
            payload = and_sweep(channel, p11_points=args.points)
        else:
            payload = xor_sweep(channel, cfg, points=args.points)
        self._write(args, payload, cfg, channel)
        return EXIT_FINDING if payload.inconclusive else EXIT_OK
