"""Plain-text code catalog, so externally constructed codes can be plugged in.

Rectangular codes::

    arraycode 5 2 2 2
    1 1 : 1
    1 2 : 2+3
    ...

one ``node proc : i1+i2+...`` line per cell (all 1-based).  Codes with
unequal column sizes::

    asymcode n k b
    col 1 3 :
    1
    2+5
    ...

``col i b_i :`` followed by ``b_i`` equation lines.  Blank lines and ``#``
comments are ignored.  :func:`dumps` writes the canonical form (sources
sorted ascending, node-major order), and ``loads(dumps(c)) == c``.
"""

from __future__ import annotations

from pathlib import Path

from .arraycode import ArrayCode, AsymArrayCode


class CatalogError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _cell_text(cell) -> str:
    return "+".join(str(s) for s in sorted(cell))


def dumps(code: ArrayCode | AsymArrayCode) -> str:
    if isinstance(code, ArrayCode):
        lines = [f"arraycode {code.n} {code.k} {code.b} {code.sigma}"]
        for i, col in enumerate(code.grid, 1):
            for j, cell in enumerate(col, 1):
                lines.append(f"{i} {j} : {_cell_text(cell)}")
    else:
        lines = [f"asymcode {code.n} {code.k} {code.b}"]
        for i, col in enumerate(code.columns, 1):
            lines.append(f"col {i} {len(col)} :")
            lines.extend(_cell_text(cell) for cell in col)
    return "\n".join(lines) + "\n"


def _parse_cell(text: str, lineno: int) -> frozenset[int]:
    try:
        items = [int(tok) for tok in text.split("+")]
    except ValueError:
        raise CatalogError(lineno, f"bad equation {text!r}") from None
    if len(set(items)) != len(items):
        raise CatalogError(lineno, f"repeated source in {text!r}")
    return frozenset(items)


def _ints(tokens, lineno: int, what: str) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise CatalogError(lineno, f"non-integer {what}") from None


def loads(text: str) -> ArrayCode | AsymArrayCode:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((lineno, line))
    if not lines:
        raise CatalogError(1, "empty catalog")
    lineno, header = lines[0]
    head = header.split()
    body = lines[1:]
    try:
        if head[0] == "arraycode":
            if len(head) != 5:
                raise CatalogError(lineno, "expected 'arraycode n k b sigma'")
            n, k, b, sigma = _ints(head[1:], lineno, "header field")
            grid: list[list[frozenset[int] | None]] = [[None] * b for _ in range(n)]
            for ln, line in body:
                left, sep, right = line.partition(":")
                if not sep:
                    raise CatalogError(ln, "expected 'node proc : i1+i2+...'")
                pos = left.split()
                if len(pos) != 2:
                    raise CatalogError(ln, "expected 'node proc' before ':'")
                node, proc = _ints(pos, ln, "node/proc")
                if not (1 <= node <= n and 1 <= proc <= b):
                    raise CatalogError(ln, f"cell ({node}, {proc}) outside {n} x {b} grid")
                if grid[node - 1][proc - 1] is not None:
                    raise CatalogError(ln, f"cell ({node}, {proc}) given twice")
                grid[node - 1][proc - 1] = _parse_cell(right.strip(), ln)
            missing = [(i + 1, j + 1) for i in range(n) for j in range(b) if grid[i][j] is None]
            if missing:
                raise CatalogError(lineno, f"missing cells {missing[:5]}")
            return ArrayCode(n=n, k=k, b=b, sigma=sigma, grid=grid)
        if head[0] == "asymcode":
            if len(head) != 4:
                raise CatalogError(lineno, "expected 'asymcode n k b'")
            n, k, b = _ints(head[1:], lineno, "header field")
            columns: list[list[frozenset[int]]] = []
            expected = 0
            for ln, line in body:
                if line.startswith("col"):
                    if len(columns) and len(columns[-1]) != expected:
                        raise CatalogError(ln, f"column {len(columns)} has {len(columns[-1])} cells, declared {expected}")
                    toks = line.rstrip(":").split()
                    if len(toks) != 3 or not line.endswith(":"):
                        raise CatalogError(ln, "expected 'col i b_i :'")
                    idx, expected = _ints(toks[1:], ln, "column header")
                    if idx != len(columns) + 1:
                        raise CatalogError(ln, f"columns out of order: got {idx}, expected {len(columns) + 1}")
                    columns.append([])
                else:
                    if not columns:
                        raise CatalogError(ln, "equation before first 'col' line")
                    columns[-1].append(_parse_cell(line, ln))
            if columns and len(columns[-1]) != expected:
                raise CatalogError(lines[-1][0], f"column {len(columns)} has {len(columns[-1])} cells, declared {expected}")
            return AsymArrayCode(n=n, k=k, b=b, columns=columns)
    except CatalogError:
        raise
    except ValueError as exc:
        raise CatalogError(lineno, str(exc)) from None
    raise CatalogError(lineno, f"unknown code kind {head[0]!r}")


def load(path: str | Path) -> ArrayCode | AsymArrayCode:
    return loads(Path(path).read_text())


def dump(code: ArrayCode | AsymArrayCode, path: str | Path) -> None:
    Path(path).write_text(dumps(code))
