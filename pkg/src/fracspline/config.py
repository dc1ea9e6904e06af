"""Line-oriented run configuration: [section] headers and key = value pairs.

The format is deliberately tiny so configs diff cleanly and parse with
no dependencies.  Parse errors and semantic validation errors both
carry the offending line number.

Example::

    [problem]
    m = 2
    A = -1.5 0.5 0.5 -1.5
    X0 = 1 2
    gamma = 0.5
    T = 1

    [discretization]
    n = 3
    j = 6
    s = j+1

    [output]
    grid_level = 9
    solution_csv = solution.csv
    convergence_csv = convergence.csv

Forcing and reference terms attach per component, e.g.
``forcing1 = poly 2 1.0, caputo_power 2 1.0`` and
``reference1 = poly 2 1.0`` (reference terms are plain powers only).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError
from .solver import CollocationConfig, ForcingTerm, FractionalProblem, make_forcing

__all__ = ["RunConfig", "parse_config", "parse_config_file", "dump_config"]

_SECTIONS = {
    "problem": {"m", "a", "x0", "gamma", "t"},  # plus forcing<i>/reference<i>
    "discretization": {"n", "j", "s"},
    "output": {"grid_level", "solution_csv", "convergence_csv"},
}


@dataclass(frozen=True)
class RunConfig:
    """A fully validated run description, equal-comparable and dumpable."""

    m: int
    a_entries: tuple[float, ...]  # row-major
    x0: tuple[float, ...]
    gamma: float
    T: int
    forcing: Optional[tuple[tuple[ForcingTerm, ...], ...]]
    reference: Optional[tuple[tuple[ForcingTerm, ...], ...]]
    n: int
    j: int
    s: Optional[int]  # None means the default rule s = j + 1
    grid_level: Optional[int]
    solution_csv: str = "solution.csv"
    convergence_csv: str = "convergence.csv"

    def problem(self) -> FractionalProblem:
        forcing = None
        if self.forcing is not None:
            forcing = make_forcing(self.forcing, self.gamma)
        return FractionalProblem(
            A=np.array(self.a_entries, dtype=float).reshape(self.m, self.m),
            X0=np.array(self.x0, dtype=float),
            gamma=self.gamma,
            T=self.T,
            forcing=forcing,
        )

    def collocation(self) -> CollocationConfig:
        return CollocationConfig(n=self.n, j=self.j, s=self.s, T=self.T)

    def effective_grid_level(self) -> int:
        return self.grid_level if self.grid_level is not None else self.collocation().s + 2

    def reference_evaluator(self):
        """Per-point exact-solution evaluator from the reference terms, or None."""
        if self.reference is None:
            return None
        per_comp = make_forcing(self.reference, self.gamma)
        return lambda t: np.array([f(t) for f in per_comp])


def _fail(lineno: int, message: str) -> "ConfigError":
    return ConfigError(f"line {lineno}: {message}")


def _scan(text: str) -> dict[tuple[str, str], tuple[str, int]]:
    """Map (section, key) -> (raw value, line number), validating structure."""
    entries: dict[tuple[str, str], tuple[str, int]] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in _SECTIONS:
                raise _fail(lineno, f"unknown section [{section}]")
            continue
        if "=" not in line:
            raise _fail(lineno, f"expected key = value, got {line!r}")
        if section is None:
            raise _fail(lineno, "key outside any [section]")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        known = _SECTIONS[section]
        is_per_component = section == "problem" and (
            key.startswith("forcing") or key.startswith("reference")
        )
        if key not in known and not is_per_component:
            raise _fail(lineno, f"unknown key {key!r} in section [{section}]")
        if (section, key) in entries:
            raise _fail(lineno, f"duplicate key {key!r} in section [{section}]")
        entries[(section, key)] = (value, lineno)
    return entries


def _take(entries, section: str, key: str, required: bool = False):
    item = entries.pop((section, key), None)
    if item is None and required:
        raise ConfigError(f"missing required key {key!r} in section [{section}]")
    return item


def _parse_int(item, name: str) -> int:
    value, lineno = item
    try:
        return int(value)
    except ValueError:
        raise _fail(lineno, f"{name} must be an integer, got {value!r}") from None


def _parse_float(item, name: str) -> float:
    value, lineno = item
    try:
        return float(value)
    except ValueError:
        raise _fail(lineno, f"{name} must be a number, got {value!r}") from None


def _parse_floats(item, name: str, count: int) -> tuple[float, ...]:
    value, lineno = item
    parts = value.split()
    try:
        numbers = tuple(float(p) for p in parts)
    except ValueError:
        raise _fail(lineno, f"{name} must be whitespace-separated numbers") from None
    if len(numbers) != count:
        raise _fail(lineno, f"{name} needs {count} entries, got {len(numbers)}")
    return numbers


def _parse_terms(item, name: str, kinds: tuple[str, ...]) -> tuple[ForcingTerm, ...]:
    value, lineno = item
    terms = []
    for chunk in value.split(","):
        parts = chunk.split()
        if len(parts) != 3:
            raise _fail(lineno, f"{name}: each term is '<kind> <power> <coef>', got {chunk.strip()!r}")
        kind, power, coef = parts
        if kind not in kinds:
            raise _fail(lineno, f"{name}: unknown term kind {kind!r} (expected one of {kinds})")
        try:
            terms.append(ForcingTerm(kind, float(power), float(coef)))
        except ValueError as exc:
            raise _fail(lineno, f"{name}: {exc}") from None
    return tuple(terms)


def _per_component(entries, prefix: str, m: int, kinds: tuple[str, ...]):
    found = {}
    for (section, key), item in list(entries.items()):
        if section == "problem" and key.startswith(prefix):
            suffix = key[len(prefix):]
            _, lineno = item
            if not suffix.isdigit():
                raise _fail(lineno, f"{prefix}<i> needs a 1-based component index, got {key!r}")
            comp = int(suffix)
            if not 1 <= comp <= m:
                raise _fail(lineno, f"component index {comp} outside 1..{m}")
            found[comp - 1] = _parse_terms(item, key, kinds)
            del entries[(section, key)]
    if not found:
        return None
    return tuple(found.get(i, ()) for i in range(m))


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config; raises ConfigError with a line anchor."""
    entries = _scan(text)

    m_item = _take(entries, "problem", "m", required=True)
    m = _parse_int(m_item, "m")
    if m < 1:
        raise _fail(m_item[1], f"m must be >= 1, got {m}")

    a_item = _take(entries, "problem", "a", required=True)
    a_entries = _parse_floats(a_item, "A", m * m)
    x0_item = _take(entries, "problem", "x0", required=True)
    x0 = _parse_floats(x0_item, "X0", m)

    gamma_item = _take(entries, "problem", "gamma", required=True)
    gamma = _parse_float(gamma_item, "gamma")
    if not 0.0 < gamma <= 1.0:
        raise _fail(gamma_item[1], f"gamma must lie in (0, 1], got {gamma}")

    t_item = _take(entries, "problem", "t", required=True)
    horizon = _parse_int(t_item, "T")
    if horizon < 1:
        raise _fail(t_item[1], f"T must be >= 1, got {horizon}")

    forcing = _per_component(entries, "forcing", m, ("poly", "caputo_power"))
    reference = _per_component(entries, "reference", m, ("poly",))

    n_item = _take(entries, "discretization", "n", required=True)
    n = _parse_int(n_item, "n")
    if n < 0:
        raise _fail(n_item[1], f"n must be >= 0, got {n}")
    if gamma < 1.0 and n < 1:
        raise _fail(n_item[1], "fractional orders (gamma < 1) need spline degree n >= 1")

    j_item = _take(entries, "discretization", "j", required=True)
    j = _parse_int(j_item, "j")
    if j < 0:
        raise _fail(j_item[1], f"j must be >= 0, got {j}")

    s: Optional[int] = None
    s_item = _take(entries, "discretization", "s")
    if s_item is not None:
        value, lineno = s_item
        if value.replace(" ", "") != "j+1":
            try:
                s = int(value)
            except ValueError:
                raise _fail(lineno, f"s must be an integer or 'j+1', got {value!r}") from None
            if s < 0:
                raise _fail(lineno, f"s must be >= 0, got {s}")
    s_effective = s if s is not None else j + 1
    s_lineno = s_item[1] if s_item is not None else j_item[1]
    if (1 << s_effective) * horizon + 1 < (1 << j) * horizon + n:
        raise _fail(
            s_lineno,
            "solvability condition violated: need 2^s*T + 1 >= 2^j*T + n, "
            f"got {(1 << s_effective) * horizon + 1} < {(1 << j) * horizon + n}",
        )

    grid_level = None
    gl_item = _take(entries, "output", "grid_level")
    if gl_item is not None:
        grid_level = _parse_int(gl_item, "grid_level")
        if grid_level < 0:
            raise _fail(gl_item[1], f"grid_level must be >= 0, got {grid_level}")

    sol_item = _take(entries, "output", "solution_csv")
    conv_item = _take(entries, "output", "convergence_csv")

    if entries:
        (section, key), (_, lineno) = next(iter(entries.items()))
        raise _fail(lineno, f"unhandled key {key!r} in section [{section}]")

    return RunConfig(
        m=m,
        a_entries=a_entries,
        x0=x0,
        gamma=gamma,
        T=horizon,
        forcing=forcing,
        reference=reference,
        n=n,
        j=j,
        s=s,
        grid_level=grid_level,
        solution_csv=sol_item[0] if sol_item else "solution.csv",
        convergence_csv=conv_item[0] if conv_item else "convergence.csv",
    )


def parse_config_file(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def _format_number(x: float) -> str:
    return f"{x:.17g}"


def dump_config(cfg: RunConfig) -> str:
    """Canonical text form; parse_config(dump_config(c)) == c."""
    lines = ["[problem]"]
    lines.append(f"m = {cfg.m}")
    lines.append("A = " + " ".join(_format_number(x) for x in cfg.a_entries))
    lines.append("X0 = " + " ".join(_format_number(x) for x in cfg.x0))
    lines.append(f"gamma = {_format_number(cfg.gamma)}")
    lines.append(f"T = {cfg.T}")
    for label, table in (("forcing", cfg.forcing), ("reference", cfg.reference)):
        if table is None:
            continue
        for i, terms in enumerate(table, start=1):
            if not terms:
                continue
            rendered = ", ".join(
                f"{t.kind} {_format_number(t.power)} {_format_number(t.coef)}" for t in terms
            )
            lines.append(f"{label}{i} = {rendered}")
    lines.append("")
    lines.append("[discretization]")
    lines.append(f"n = {cfg.n}")
    lines.append(f"j = {cfg.j}")
    lines.append(f"s = {cfg.s if cfg.s is not None else 'j+1'}")
    lines.append("")
    lines.append("[output]")
    if cfg.grid_level is not None:
        lines.append(f"grid_level = {cfg.grid_level}")
    lines.append(f"solution_csv = {cfg.solution_csv}")
    lines.append(f"convergence_csv = {cfg.convergence_csv}")
    return "\n".join(lines) + "\n"
