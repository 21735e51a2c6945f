"""Command-line front end: channel specs in, experiment reports out.

    qcap <info|bound|ensemble|moments|typicality|rate-demo>
         --channel <file|builtin:name:params> [--code-dim K] [--rate R]
         [--n-min a --n-max b] [--epsilon e] [--samples s] --seed S
         [--format json|csv] [--out path] [--threads T]

Every JSON report embeds the fully resolved run configuration, carries no
timestamps, and renders with sorted keys, so identical configurations give
byte-identical output for any thread count.  Exit codes: 0 success, 2 input
error, 3 domain invariant violation, 4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import asdict, dataclass

from . import channels as qch
from . import codes, linalg, random_coding as rc, serialize, typicality as tp
from .errors import CapExceededError, FormatError, InvariantViolationError

# stream index reserved for builtin channel construction, clear of sample indices
CHANNEL_STREAM_INDEX = 1 << 48


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    channel: str
    code_dim: int | None
    rate: float | None
    n_min: int | None
    n_max: int | None
    epsilon: float | None
    samples: int | None
    master_seed: int
    output_format: str
    out_path: str | None
    threads: int


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcap",
        description="channel-coding numerics: bounds, ensembles, typicality demos",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in ("info", "bound", "ensemble", "moments", "typicality", "rate-demo"):
        p = sub.add_parser(name)
        p.add_argument("--channel", required=True,
                       help="channel JSON file or builtin:name:params")
        p.add_argument("--code-dim", type=int, default=None)
        p.add_argument("--rate", type=float, default=None)
        p.add_argument("--n-min", type=int, default=None)
        p.add_argument("--n-max", type=int, default=None)
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", default=None)
        p.add_argument("--threads", type=int, default=1)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.seed < 0:
        raise ValueError("--seed must be nonnegative")
    if args.threads < 1:
        raise ValueError("--threads must be >= 1")
    return RunConfig(
        subcommand=args.subcommand,
        channel=args.channel,
        code_dim=args.code_dim,
        rate=args.rate,
        n_min=args.n_min,
        n_max=args.n_max,
        epsilon=args.epsilon,
        samples=args.samples,
        master_seed=args.seed,
        output_format=args.format,
        out_path=args.out,
        threads=args.threads,
    )


# ------------------------------------------------------------------ channel resolution

def _parse_builtin(spec: str, master_seed: int) -> qch.KrausChannel:
    parts = spec.split(":")
    if len(parts) != 3:
        raise FormatError("builtin channel spec must look like builtin:name:params")
    _, name, raw = parts
    params = [p for p in raw.split(",") if p]

    def channel_rng(seed_param: str | None):
        seed = int(seed_param) if seed_param is not None else master_seed
        return rc.sample_stream(seed, CHANNEL_STREAM_INDEX)

    try:
        if name == "identity":
            (dim,) = params
            return qch.identity_channel(int(dim))
        if name == "phase_flip":
            (p,) = params
            return qch.phase_flip(float(p))
        if name == "depolarizing":
            p = float(params[0])
            dim = int(params[1]) if len(params) > 1 else 2
            return qch.depolarizing(p, dim)
        if name == "haar_random":
            in_dim, out_dim, count = (int(x) for x in params[:3])
            rng = channel_rng(params[3] if len(params) > 3 else None)
            return qch.haar_random_channel(in_dim, out_dim, count, rng)
        if name == "random_unitary":
            dim, count = int(params[0]), int(params[1])
            rng = channel_rng(params[2] if len(params) > 2 else None)
            unitaries = [linalg.haar_unitary(dim, rng) for _ in range(count)]
            return qch.random_unitary_channel(unitaries)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvariantViolationError):
            raise
        raise FormatError(f"bad parameters for builtin channel {name!r}: {exc}") from exc
    raise FormatError(f"unknown builtin channel {name!r}")


def resolve_channel(config: RunConfig) -> qch.KrausChannel:
    if config.channel.startswith("builtin:"):
        return _parse_builtin(config.channel, config.master_seed)
    return serialize.load_channel(config.channel)


def _config_record(config: RunConfig) -> dict:
    """Embedded experiment description: everything that determines the numbers.

    Execution knobs that cannot change any result (thread count, output
    destination) are excluded, so runs differing only in those are
    byte-comparable.
    """
    record = asdict(config)
    record.pop("threads")
    record.pop("out_path")
    return record


def _require(config: RunConfig, **fields) -> None:
    for attr, flag in fields.items():
        if getattr(config, attr) is None:
            raise ValueError(f"{config.subcommand} requires {flag}")


def _n_range(config: RunConfig) -> range:
    _require(config, n_min="--n-min", n_max="--n-max")
    if config.n_min < 1 or config.n_max < config.n_min:
        raise ValueError("need 1 <= n-min <= n-max")
    return range(config.n_min, config.n_max + 1)


# ------------------------------------------------------------------ subcommands

def cmd_info(config: RunConfig) -> tuple[dict, list[str], list[list]]:
    ch = resolve_channel(config)
    report = qch.classify(ch)
    record = {"config": _config_record(config), "channel_name": ch.name,
              "input_dim": ch.input_dim, "output_dim": ch.output_dim,
              "report": asdict(report)}
    header = ["is_trace_preserving", "is_unital", "is_uniform", "length",
              "output_entropy", "entropy_exchange", "coherent_information"]
    row = [getattr(report, h) for h in header]
    return record, header, [row]


def cmd_bound(config: RunConfig) -> tuple[dict, list[str], list[list]]:
    ch = resolve_channel(config)
    _require(config, code_dim="--code-dim")
    samples = config.samples if config.samples is not None else 1
    reports = []
    for i in range(samples):
        code = rc.sample_code(ch.input_dim, config.code_dim, rc.sample_stream(config.master_seed, i))
        rep = codes.bound_report(code, ch)
        reports.append({"sample": i, **asdict(rep)})
    record = {"config": _config_record(config), "reports": reports}
    header = ["sample", "transmission", "deviation_trace_norm",
              "deviation_frobenius_sq", "bound_kraus", "bound_states"]
    rows = [[r[h] for h in header] for r in reports]
    return record, header, rows


def cmd_ensemble(config: RunConfig) -> tuple[dict, list[str], list[list]]:
    ch = resolve_channel(config)
    _require(config, code_dim="--code-dim", samples="--samples")
    k, n, seed = config.code_dim, config.samples, config.master_seed
    d2_mc = rc.mc_deviation_sq(ch, k, n, seed, threads=config.threads)
    d2_exact = rc.exact_average_deviation_sq(ch, k)
    d2_pass = abs(d2_mc.mean - d2_exact) <= max(4.0 * d2_mc.std_error, 1e-12)
    bound_mc = rc.mc_average_bound(ch, k, n, seed, threads=config.threads)
    bound_analytic = rc.averaged_fidelity_bound(ch, k)
    bound_pass = bound_mc.mean >= bound_analytic - 4.0 * bound_mc.std_error
    d2_upper = rc.deviation_sq_upper_bound(ch)
    record = {
        "config": _config_record(config),
        "deviation_sq": {"estimate": asdict(d2_mc), "closed_form": d2_exact,
                         "upper_bound": d2_upper, "pass": d2_pass},
        "fidelity_bound": {"estimate": asdict(bound_mc), "closed_form": bound_analytic,
                           "pass": bound_pass},
    }
    header = ["quantity", "mean", "std_error", "sample_count", "reference", "pass"]
    rows = [
        ["deviation_sq", d2_mc.mean, d2_mc.std_error, d2_mc.sample_count, d2_exact, d2_pass],
        ["fidelity_bound", bound_mc.mean, bound_mc.std_error, bound_mc.sample_count,
         bound_analytic, bound_pass],
    ]
    return record, header, rows


def cmd_moments(config: RunConfig) -> tuple[dict, list[str], list[list]]:
    ch = resolve_channel(config)
    _require(config, samples="--samples")
    report = rc.haar_moment_suite(ch.input_dim, config.samples, config.master_seed,
                                  threads=config.threads)
    record = {"config": _config_record(config), "report": asdict(report),
              "all_pass": report.all_pass}
    header = ["name", "estimate", "std_error", "target", "passed"]
    rows = [[c.name, c.estimate, c.std_error, c.target, c.passed] for c in report.checks]
    return record, header, rows


def cmd_typicality(config: RunConfig) -> tuple[dict, list[str], list[list]]:
    ch = resolve_channel(config)
    _require(config, epsilon="--epsilon")
    ns = _n_range(config)
    weights = tp.kraus_distribution(qch.minimal_kraus(ch))
    seq_reports, seq_fit = tp.typical_set_series(weights, config.epsilon, ns)
    verification = tp.verify_reduction_bounds(ch, ns, config.epsilon)
    record = {
        "config": _config_record(config),
        "kraus_weights": list(map(float, weights)),
        "sequence_reports": [asdict(r) for r in seq_reports],
        "sequence_decay": asdict(seq_fit),
        "channel_reports": [asdict(r) for r in verification.reports],
        "counts_within_bounds": verification.counts_within_bounds,
        "norms_within_bounds": verification.norms_within_bounds,
        "typical_decay": asdict(verification.typical_decay),
        "reduced_decay": asdict(verification.reduced_decay),
    }
    header = ["n", "typical_count", "count_bound", "sequence_mass", "length",
              "length_bound", "typical_transmission", "transmission",
              "frobenius_sq", "frobenius_bound"]
    rows = []
    for seq_rep, ch_rep in zip(seq_reports, verification.reports):
        rows.append([ch_rep.n, seq_rep.typical_count, seq_rep.count_bound, seq_rep.mass,
                     ch_rep.length, ch_rep.length_bound, ch_rep.typical_transmission,
                     ch_rep.transmission, ch_rep.frobenius_sq, ch_rep.frobenius_bound])
    return record, header, rows


def cmd_rate_demo(config: RunConfig) -> tuple[dict, list[str], list[list]]:
    ch = resolve_channel(config)
    _require(config, rate="--rate", epsilon="--epsilon")
    ns = _n_range(config)
    table = tp.achievable_rate_table(ch, config.rate, config.epsilon, ns)
    record = {
        "config": _config_record(config),
        "coherent_information": table.coherent_information,
        "geometric_decay_expected": table.geometric_decay_expected,
        "rows": [asdict(r) for r in table.rows],
    }
    if qch.classify(ch).is_unital:
        curve = rc.hamming_rate_curve(ch, config.rate, ns)
        record["unital_curve"] = asdict(curve)
    header = ["n", "K_n", "reduced_length", "transmission", "penalty", "bound"]
    rows = [[r.n, r.code_dim, r.reduced_length, r.transmission, r.penalty, r.bound]
            for r in table.rows]
    return record, header, rows


_COMMANDS = {
    "info": cmd_info,
    "bound": cmd_bound,
    "ensemble": cmd_ensemble,
    "moments": cmd_moments,
    "typicality": cmd_typicality,
    "rate-demo": cmd_rate_demo,
}


# ------------------------------------------------------------------ rendering

def render_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([serialize.csv_number(x) if isinstance(x, (int, float, bool))
                         else str(x) for x in row])
    return buf.getvalue()


def run(config: RunConfig) -> str:
    record, header, rows = _COMMANDS[config.subcommand](config)
    if config.output_format == "csv":
        return render_csv(header, rows)
    return serialize.canonical_json(record)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        text = run(config)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except InvariantViolationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (FormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
