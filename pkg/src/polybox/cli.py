"""``polybox`` command line: eval, solve, gen, bench.

Exit codes: 0 success, 2 invalid input (flags, files, schema), 1 runtime
failure. Every error prints exactly one line on stderr.
"""

from __future__ import annotations

import csv
import json
import logging
import sys
from pathlib import Path

import click
import numpy as np

from . import bench
from .errors import PolyboxError, ValidationError
from .generate import GenSpec, generate_random_pol
from .poly import eval_batch, problem_from_record, to_record
from .solver import Box, SolveOptions, solve


class InputError(ValidationError):
    pass


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def _load_problem(path: str):
    return problem_from_record(_read_json(path))


def _read_points(path: str, nx: int) -> np.ndarray:
    rows = []
    try:
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or all(not cell.strip() for cell in row):
                    continue
                try:
                    point = [float(cell) for cell in row]
                except ValueError:
                    raise InputError(f"{path}:{lineno}: non-numeric value") from None
                if len(point) != nx:
                    raise InputError(f"{path}:{lineno}: point has {len(point)} components, expected {nx}")
                if not np.all(np.isfinite(point)):
                    raise InputError(f"{path}:{lineno}: non-finite value")
                rows.append(point)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    return np.array(rows, dtype=np.float64).reshape(len(rows), nx)


def _vector(text: str | None, n: int, flag: str) -> np.ndarray | None:
    """Parse ``"a,b,c"``; a single value is broadcast to ``n`` components."""
    if text is None:
        return None
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"{flag}: expected comma-separated numbers, got {text!r}") from None
    if len(values) == 1:
        values = values * n
    if len(values) != n:
        raise InputError(f"{flag}: expected 1 or {n} values, got {len(values)}")
    return np.array(values)


@click.group()
def cli():
    """Box-constrained optimization of sparse multivariate polynomials."""


@cli.command("eval")
@click.option("--problem", "problem_path", required=True, help="Problem JSON document.")
@click.option("--points", "points_path", required=True, help="CSV, one point per line, no header.")
@click.option("--json", "as_json", is_flag=True, help="Print a JSON object instead of one value per line.")
def cmd_eval(problem_path, points_path, as_json):
    """Evaluate the polynomial at every point."""
    pol, _, _ = _load_problem(problem_path)
    values = eval_batch(pol, _read_points(points_path, pol.nx))
    if as_json:
        click.echo(json.dumps({"values": values.tolist()}))
    else:
        for v in values:
            click.echo(repr(float(v)))


@cli.command("solve")
@click.option("--problem", "problem_path", required=True, help="Problem JSON document.")
@click.option("--xmin", help="Lower bounds, comma-separated or one value for all.")
@click.option("--xmax", help="Upper bounds, comma-separated or one value for all.")
@click.option("--x0", help="Initial guess (default: origin, clamped into the box).")
@click.option("--mode", type=click.Choice(["min", "max", "root"]), default="min", show_default=True)
@click.option("--ntrials", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--ngrid", type=click.IntRange(min=2), default=1000, show_default=True)
@click.option("--iter-max", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--eps", type=click.FloatRange(min=0), default=1e-2, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Accepted for symmetry; output is always JSON.")
def cmd_solve(problem_path, xmin, xmax, x0, mode, ntrials, ngrid, iter_max, eps, seed, as_json):
    """Minimize, maximize or find a root over the box; prints the solution as JSON."""
    pol, doc_min, doc_max = _load_problem(problem_path)
    lo = _vector(xmin, pol.nx, "--xmin")
    hi = _vector(xmax, pol.nx, "--xmax")
    lo = doc_min if lo is None else lo
    hi = doc_max if hi is None else hi
    if lo is None or hi is None:
        raise InputError("box bounds missing: give --xmin/--xmax or put xmin/xmax in the problem file")
    opts = SolveOptions(x0=_vector(x0, pol.nx, "--x0"), Ntrials=ntrials, ngrid=ngrid,
                        iter_max=iter_max, eps=eps, mode=mode, seed=seed)
    sol = solve(pol, Box(lo, hi), opts)
    click.echo(json.dumps(sol.to_dict()))


@cli.command("gen")
@click.option("--nx", type=click.IntRange(min=1), required=True)
@click.option("--deg", type=click.IntRange(min=1), required=True)
@click.option("--card", type=click.IntRange(min=1), required=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("-o", "--out", "out_path", help="Output file (default: stdout).")
def cmd_gen(nx, deg, card, seed, out_path):
    """Write a random problem document."""
    text = json.dumps(to_record(generate_random_pol(GenSpec(nx, deg, card, seed)))) + "\n"
    if out_path is None:
        click.echo(text, nl=False)
    else:
        Path(out_path).write_text(text)


@cli.command("bench")
@click.option("--config", "config_path", help="Bench config JSON (default: the full 1000-problem suite).")
@click.option("--out", "out_dir", required=True, help="Directory for the CSV files.")
@click.option("--seed", type=click.IntRange(min=0), help="Override the config seed.")
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Print the output paths as JSON.")
def cmd_bench(config_path, out_dir, seed, jobs, as_json):
    """Run the benchmark suite and write results/summary/improvement CSVs."""
    doc = _read_json(config_path) if config_path else {}
    cfg, adapters = bench.load_config(doc)
    if seed is not None:
        cfg.seed = seed
    records = bench.run_benchmark(cfg, adapters, jobs=jobs)
    paths = bench.write_outputs(records, cfg, out_dir)
    if as_json:
        click.echo(json.dumps({"problems": len(records), **{k: str(v) for k, v in paths.items()}}))
    else:
        click.echo(f"{len(records)} problems; wrote {', '.join(str(p) for p in paths.values())}")


def _fail(message: str, code: int) -> int:
    click.echo(f"polybox: error: {' '.join(str(message).split())}", err=True)
    return code


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="polybox: %(levelname)s: %(message)s")
    try:
        rv = cli.main(args=argv, prog_name="polybox", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        return _fail(exc.format_message(), 2)
    except click.Abort:
        return _fail("aborted", 1)
    except ValidationError as exc:
        return _fail(str(exc), 2)
    except PolyboxError as exc:
        return _fail(str(exc), 1)
    except Exception as exc:
        return _fail(f"{type(exc).__name__}: {exc}", 1)
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
