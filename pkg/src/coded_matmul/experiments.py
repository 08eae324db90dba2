"""Scenario sweeps, preset experiments, the exactness self-test and plot data.

A scenario fixes the cluster parameters, picks the schemes to compare and
sweeps one variable.  Every sweep point yields one CSV row per scheme with
the simulated mean, both closed-form predictions and the communication
overheads.  Rows are written in sweep order with fixed float formatting, so
the same config and seed always give byte-identical output.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

from .arraycode import builtin_5222, decode_nodes, encode_tasks, max_blocklength, max_blocklength_asym, search_code
from .baselines import (
    InsufficientResults,
    MatDotSpec,
    PolyCodeSpec,
    matdot_decode,
    matdot_encode,
    poly_decode,
    poly_encode,
    poly_layout,
    uncoded_decode,
    uncoded_plan,
)
from .comm import comm_symbols, normalized_overhead_asym
from .latency import SCHEMES, LatencyParams, closed_form_phases
from .linalg import DEFAULT_PRIME, DenseMatrix, assemble, matmul_oracle, random_matrix
from .simulate import mc_simulate

CSV_VERSION = "# coded-matmul csv v1"
COLUMNS = (
    "scenario", "scheme", "sweep", "x", "k", "n", "t", "b", "b_prime", "epsilon", "sigma", "p", "c", "mu",
    "trials", "seed", "mc_mean", "mc_var", "mc_stderr", "mc_encode", "mc_parallel", "mc_decode",
    "closed_natural", "closed_harmonic", "ms_overhead", "sm_overhead", "total_overhead", "asym_tradeoff_cost", "error",
)
SWEEPS = ("k", "p_equals_c", "epsilon", "comm_cost")
STRAGGLER_RULES = ("bound", "asym_bound", "ratio", "fixed")


class ConfigError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Scenario:
    name: str = "scenario"
    schemes: tuple[str, ...] = ("uncoded", "poly", "matdot", "amds")
    sweep: str = "k"
    values: tuple[float, ...] = ()
    k: int = 1000
    b: int = 20
    c: float = 50.0
    sigma: int = 7
    p: int = 50
    mu: float = 1.0
    # a number, or "auto": smallest multiple of 1/b whose blocklength bound admits n
    epsilon: float | str = 0.0
    delta: float | None = None
    stragglers: str = "bound"
    straggler_ratio: float = 0.1
    t: int | None = None
    trials: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.sweep not in SWEEPS:
            raise ValueError(f"sweep must be one of {SWEEPS}")
        if self.stragglers not in STRAGGLER_RULES:
            raise ValueError(f"stragglers must be one of {STRAGGLER_RULES}")
        if not self.values:
            raise ValueError("sweep range is empty")
        if not self.schemes:
            raise ValueError("no schemes selected")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad:
            raise ValueError(f"unknown schemes {bad}")
        if self.stragglers == "fixed" and self.t is None:
            raise ValueError("stragglers = fixed needs t")


# -- config files --------------------------------------------------------------------


def _parse_values(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError("range must be start:stop:step with step > 0")
        start, stop, step = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        out = [start + i * step for i in range(count)]
    else:
        out = [float(x) for x in text.split(",") if x.strip()]
    return tuple(int(v) if float(v).is_integer() else v for v in out)


def _coerce(name: str, raw: str):
    raw = raw.strip()
    if name == "schemes":
        return tuple(s.strip() for s in raw.split(",") if s.strip())
    if name == "values":
        return _parse_values(raw)
    if name in ("name", "sweep", "stragglers"):
        return raw
    if name == "epsilon":
        return raw if raw == "auto" else float(raw)
    if name in ("delta", "t") and raw.lower() in ("", "none"):
        return None
    if name in ("k", "b", "sigma", "p", "trials", "seed", "t"):
        return int(raw)
    return float(raw)


def parse_config(text: str) -> list[Scenario]:
    """Parse flat ``key = value`` text with one ``[scenario]`` section per scenario."""
    known = {f.name for f in fields(Scenario)}
    scenarios: list[Scenario] = []
    current: dict | None = None
    start = 0

    def finish():
        if current is not None:
            try:
                scenarios.append(Scenario(**current))
            except (TypeError, ValueError) as exc:
                raise ConfigError(start, str(exc)) from None

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if line != "[scenario]":
                raise ConfigError(lineno, f"unknown section {line}")
            finish()
            current, start = {}, lineno
            continue
        if current is None:
            raise ConfigError(lineno, "key outside a [scenario] section")
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(lineno, "expected key = value")
        if key not in known:
            raise ConfigError(lineno, f"unknown key {key!r}")
        try:
            current[key] = _coerce(key, value)
        except ValueError as exc:
            raise ConfigError(lineno, f"bad value for {key}: {exc}") from None
    finish()
    if not scenarios:
        raise ConfigError(1, "no [scenario] sections")
    return scenarios


# -- sweep points --------------------------------------------------------------------


def _auto_epsilon(n: int, k: int, b: int, sigma: int, max_steps: int = 100_000) -> float:
    """Smallest epsilon on the 1/b grid whose asym blocklength bound reaches n."""
    for j in range(max_steps):
        eps = j / b
        try:
            if max_blocklength_asym(k, b, sigma, eps) >= n:
                return eps
        except ValueError:
            if sigma * (1 + eps) >= k:
                break
    raise ValueError(f"no epsilon lets an asym code reach n={n} at k={k}, b={b}, sigma={sigma}")


def resolve_point(sc: Scenario, scheme: str, value) -> tuple[LatencyParams, float]:
    """Cluster parameters at one sweep point; raises ValueError when infeasible."""
    k, p, c, eps = sc.k, sc.p, sc.c, sc.epsilon
    if sc.sweep in ("k", "comm_cost"):
        k = int(value)
    elif sc.sweep == "p_equals_c":
        p, c = int(value), float(value)
    elif sc.sweep == "epsilon":
        eps = float(value)
    b, sigma = sc.b, sc.sigma

    if sc.stragglers == "bound":
        n = max_blocklength(k, b, sigma)
    elif sc.stragglers == "asym_bound":
        if scheme == "amds":
            n = max_blocklength(k, b, sigma)
        else:
            n = max_blocklength_asym(k, b, sigma, 0.0 if eps == "auto" else eps)
    elif sc.stragglers == "ratio":
        n = k + math.ceil(sc.straggler_ratio * k - 1e-9)
    else:
        n = k + int(sc.t)

    if scheme == "asym":
        if eps == "auto":
            eps = _auto_epsilon(n, k, b, sigma)
        elif max_blocklength_asym(k, b, sigma, eps) < n:
            raise ValueError(f"n={n} exceeds the asym blocklength bound at epsilon={eps}")
    elif scheme == "amds" and n > k and n > max_blocklength(k, b, sigma):
        raise ValueError(f"n={n} exceeds the array-code blocklength bound {max_blocklength(k, b, sigma)}")
    if scheme != "asym":
        eps = 0.0
    params = LatencyParams(k=k, n=n, b=b, sigma=sigma, mu=sc.mu, c=c, p=p, epsilon=float(eps), delta=sc.delta)
    return params, float(eps)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def run_scenario(sc: Scenario, workers: int = 1) -> list[dict]:
    """One row per (sweep point, scheme), in sweep order."""
    rows = []
    for value in sc.values:
        for scheme in sc.schemes:
            row = dict.fromkeys(COLUMNS)
            row.update(scenario=sc.name, scheme=scheme, sweep=sc.sweep, trials=sc.trials, seed=sc.seed)
            try:
                params, eps = resolve_point(sc, scheme, value)
                row.update(
                    k=params.k, n=params.n, t=params.t, b=params.b, b_prime=float(params.b_prime), epsilon=eps,
                    sigma=params.sigma, p=params.p, c=float(params.c), mu=float(params.mu),
                )
                comm = comm_symbols(scheme, params.k, params.n, params.b, params.sigma, eps)
                row.update(ms_overhead=comm.normalized_overhead_ms, sm_overhead=comm.normalized_overhead_sm,
                           total_overhead=comm.total_overhead)
                if scheme == "asym":
                    row["asym_tradeoff_cost"] = normalized_overhead_asym(params.n, params.k, eps, params.sigma).total
                row["x"] = float(value)
                if sc.sweep == "comm_cost":
                    row["x"] = row["asym_tradeoff_cost"] if scheme == "asym" else comm.total_overhead
                out = mc_simulate(scheme, params, sc.trials, sc.seed, workers=workers)
                row.update(
                    mc_mean=out.total_mean, mc_var=out.total_var, mc_stderr=out.stderr,
                    mc_encode=out.mean.t_encode, mc_parallel=out.mean.t_parallel, mc_decode=out.mean.t_decode,
                    closed_natural=closed_form_phases(scheme, params, "natural").total,
                    closed_harmonic=closed_form_phases(scheme, params, "harmonic").total,
                )
            except ValueError as exc:
                if row["k"] is None:
                    row.update(k=int(value) if sc.sweep in ("k", "comm_cost") else sc.k, b=sc.b, sigma=sc.sigma)
                row["x"] = row["x"] if row["x"] is not None else float(value)
                row["error"] = str(exc)
            rows.append(row)
    return rows


def write_csv(rows: Iterable[dict], out) -> None:
    out.write(CSV_VERSION + "\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row.get(col)) for col in COLUMNS])


def csv_text(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        return []
    reader = csv.reader(lines)
    header = next(reader)
    if "scheme" not in header or "x" not in header:
        raise ValueError("malformed CSV: header lacks 'scheme' and 'x' columns")
    rows = []
    for i, rec in enumerate(reader, 2):
        if len(rec) != len(header):
            raise ValueError(f"malformed CSV: row {i} has {len(rec)} fields, header has {len(header)}")
        rows.append(dict(zip(header, rec)))
    return rows


# -- presets ---------------------------------------------------------------------------


def _k_range(lo: int, hi: int, step: int) -> tuple[int, ...]:
    return tuple(range(lo, hi + 1, step))


def preset_scenarios(name: str, seed: int = 0, trials: int = 10_000) -> list[Scenario]:
    common = dict(seed=seed, trials=trials, b=20, c=50.0, sigma=7, p=50, mu=1.0)
    if name == "fig1":
        return [Scenario(name="fig1", schemes=("uncoded", "poly", "matdot", "amds"), sweep="k",
                         values=_k_range(100, 2000, 100), stragglers="bound", **common)]
    if name == "fig2":
        return [Scenario(name="fig2", schemes=("uncoded", "poly", "matdot", "amds"), sweep="p_equals_c",
                         values=(2, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100), k=1000, stragglers="bound", **common)]
    if name == "fig4":
        return [Scenario(name="fig4", schemes=("uncoded", "poly", "matdot", "amds", "asym"), sweep="k",
                         values=_k_range(100, 2000, 100), stragglers="ratio", straggler_ratio=0.1,
                         epsilon="auto", **common)]
    if name == "fig5":
        out = []
        for b in (50, 100):
            for eps in (3, 4, 5):
                params = dict(common, b=b)
                out.append(Scenario(name=f"fig5_b{b}_eps{eps}", schemes=("asym",), sweep="comm_cost",
                                    values=(50, 100, 200, 300, 500, 750, 1000, 1500, 2000, 3000),
                                    epsilon=float(eps), stragglers="asym_bound", **params))
        return out
    if name == "table4":
        return [Scenario(name="table4", schemes=("poly", "matdot", "amds", "asym"), sweep="k", values=(100, 1000),
                         epsilon=3.0, stragglers="asym_bound", **dict(common, b=100))]
    raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")


PRESETS = ("fig1", "fig2", "fig4", "fig5", "table4")


def run_preset(name: str, seed: int = 0, trials: int = 10_000, workers: int = 1) -> list[dict]:
    rows: list[dict] = []
    for sc in preset_scenarios(name, seed, trials):
        rows.extend(run_scenario(sc, workers))
    if name == "table4":
        # Table layout: scheme-major, k ascending.
        order = {s: i for i, s in enumerate(("poly", "matdot", "amds", "asym"))}
        rows.sort(key=lambda r: (order[r["scheme"]], r["k"] or 0))
    return rows


# -- exactness self-test ---------------------------------------------------------------


@dataclass
class SelftestReport:
    scheme: str
    recovered: bool
    expected_recoverable: bool
    stragglers: tuple[int, ...]
    survivors: int
    trace_length: int
    detail: str = ""
    params: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.recovered == self.expected_recoverable

    def summary(self) -> str:
        verdict = "PASS" if self.ok else "FAIL"
        outcome = "recovered exactly" if self.recovered else "unrecoverable"
        note = "" if self.recovered or not self.ok else " (expected)"
        return (f"{verdict} {self.scheme} {self.params}: {outcome}{note}; stragglers={list(self.stragglers)}, "
                f"survivors={self.survivors}, trace={self.trace_length}. {self.detail}").strip()


def _first_diff(got: DenseMatrix, want: DenseMatrix) -> str:
    if got.shape != want.shape:
        return f"shape {got.shape} != {want.shape}"
    for (i, j), v in _enumerate(got):
        if v != want.data[i, j]:
            return f"first mismatch at ({i}, {j}): {v} != {want.data[i, j]}"
    return ""


def _enumerate(M: DenseMatrix):
    for i in range(M.rows):
        for j in range(M.cols):
            yield (i, j), M.data[i, j]


def selftest(
    scheme: str,
    k: int = 2,
    b: int = 2,
    sigma: int = 2,
    seed: int = 0,
    n: int | None = None,
    stragglers: int | None = None,
    s: int = 8,
    modulus: int = DEFAULT_PRIME,
) -> SelftestReport:
    """Encode random operands over Z_q, drop a random straggler set, decode, compare.

    By default the straggler set has the largest size the scheme tolerates.
    ``poly`` and ``matdot`` use an m = b split over ``n b`` workers (n = 5
    unless given); ``amds`` uses the built-in [5,2,2,2] code for
    k = b = sigma = 2 and a searched code otherwise.
    """
    rng = random.Random(seed)
    params = dict(k=k, b=b, sigma=sigma, s=s, seed=seed)

    if scheme == "matdot":
        s = -(-s // b) * b
    A = random_matrix(s, k, modulus, seed)
    B = random_matrix(s, b, modulus, seed + 1)
    truth = matmul_oracle(A, B)

    def report(recovered, expected, dropped, survivors, trace, detail=""):
        return SelftestReport(scheme, recovered, expected, tuple(sorted(dropped)), survivors, trace, detail, params)

    if scheme == "uncoded":
        plan, tasks = uncoded_plan(A, B)
        stragglers = 0 if stragglers is None else stragglers
        dropped = set(rng.sample(range(1, len(tasks) + 1), stragglers))
        results = {t.index: t.compute(A, B) for t in tasks if t.index not in dropped}
        try:
            got = uncoded_decode(results, plan)
        except InsufficientResults as exc:
            return report(False, stragglers == 0, dropped, len(results), 0, str(exc))
        return report(got == truth, True, dropped, len(results), 0, _first_diff(got, truth))

    if scheme == "amds":
        if (k, b, sigma) == (2, 2, 2) and n in (None, 5):
            code = builtin_5222()
        else:
            code = search_code(n or max_blocklength(k, b, sigma), k, b, sigma, seed)
        params["n"] = code.n
        plan, tasks = uncoded_plan(A, B)
        cluster = encode_tasks(code, tasks)
        tolerable = code.n - code.k
        stragglers = tolerable if stragglers is None else stragglers
        dropped = set(rng.sample(range(code.n), stragglers))
        alive = [i for i in range(code.n) if i not in dropped]
        outputs = cluster.execute(A, B, alive)
        res = decode_nodes(code, outputs, alive)
        expected = stragglers <= tolerable
        if not res.complete:
            return report(False, expected, dropped, len(alive), len(res.trace),
                          f"peeling stuck with {len(res.unresolved)} unresolved sources")
        got = assemble(res.values, plan)
        return report(got == truth, expected, dropped, len(alive), len(res.trace), _first_diff(got, truth))

    if scheme in ("poly", "matdot"):
        nodes = 5 if n is None else n
        params["n"] = nodes
        workers = nodes * b
        if scheme == "poly":
            spec = PolyCodeSpec(m=b, workers=workers, modulus=modulus)
            tasks = poly_encode(A, B, spec)
        else:
            spec = MatDotSpec(m=b, workers=workers, modulus=modulus)
            tasks = matdot_encode(A, B, spec)
        threshold = spec.recovery_threshold
        stragglers = workers - threshold if stragglers is None else stragglers
        dropped = set(rng.sample(range(workers), stragglers))
        results = [(t.point, t.compute()) for t in tasks if t.worker not in dropped]
        expected = workers - stragglers >= threshold
        try:
            if scheme == "poly":
                got = assemble(poly_decode(results, spec), poly_layout(A, B, spec))
            else:
                got = matdot_decode(results, spec)
        except InsufficientResults as exc:
            return report(False, expected, dropped, len(results), 0, str(exc))
        return report(got == truth, expected, dropped, len(results), threshold, _first_diff(got, truth))

    raise ValueError(f"selftest supports uncoded, poly, matdot, amds; got {scheme!r}")


# -- plot data -------------------------------------------------------------------------


def emit_plotdata(csv_source: str | Path, out_dir: str | Path) -> list[Path]:
    """Split a scenario CSV into whitespace-separated series files, one per curve.

    Cost sweeps get one series per (b, epsilon) with ``(total cost, E[T])``
    pairs; other sweeps one series per scheme, plus a ``log10`` column for
    log-scale axes.
    """
    text = Path(csv_source).read_text() if isinstance(csv_source, Path) or (
        isinstance(csv_source, str) and "\n" not in csv_source and Path(csv_source).exists()
    ) else csv_source
    rows = [r for r in read_csv(text) if not r.get("error")]
    out_dir = Path(out_dir)
    series: dict[str, list[dict]] = {}
    for r in rows:
        if r["sweep"] == "comm_cost":
            key = f"{r['scheme']}_b{r['b']}_eps{r['epsilon']}"
        else:
            key = f"{r['scenario']}_{r['scheme']}"
        series.setdefault(key, []).append(r)
    written = []
    if series:
        out_dir.mkdir(parents=True, exist_ok=True)
    for key, items in series.items():
        path = out_dir / f"{key}.dat"
        lines = ["# x mc_mean closed_harmonic closed_natural log10_mc_mean"]
        for r in items:
            mean = float(r["mc_mean"])
            lines.append(f"{r['x']} {r['mc_mean']} {r['closed_harmonic']} {r['closed_natural']} "
                         f"{math.log10(mean) if mean > 0 else float('nan'):.6g}")
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written
