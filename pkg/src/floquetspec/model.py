"""Periodic linear FDE models and their right-hand-side functional ``L(t)``.

Three kinds are supported:

``DDE``
    ``x'(t) = sum_j A_j(t) x(t - tau_j) + int K(t, s) x(t - s) ds`` with lags in ``(0, h]``.
``IDDE``
    As ``DDE`` but kernels may extend to ``s = inf``; the state space carries
    the weight ``exp(rho theta)`` and the kernel is truncated at ``s_max``.
``MFDE``
    ``x'(t) = sum_j A_j(t) x(t + theta_j) + int K(t, s) x(t + s) ds`` with signed
    shifts in ``[r_minus, r_plus]``.

Shift values in a model keep the convention of its kind; :func:`signed_shift`
is the only place where they are turned into the signed ``theta`` used by
the numerics (argument ``t + theta``).
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml
from scipy import integrate

from .expr import Expression, ExpressionError, compile_expression
from .history import HistoryGrid

__all__ = [
    "Kind",
    "Coefficient",
    "DelayTerm",
    "DistributedKernel",
    "FdeModel",
    "ModelError",
    "ValidationReport",
    "signed_shift",
    "validate",
    "apply_L",
    "load_model",
    "parse_model",
    "model_from_dict",
]

TAIL_TOL = 1e-12


class Kind(str, enum.Enum):
    DDE = "DDE"
    IDDE = "IDDE"
    MFDE = "MFDE"


class ModelError(ValueError):
    """Raised for unparsable or invalid models; carries every problem found."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def signed_shift(kind: Kind, shift: float) -> float:
    """Signed ``theta`` such that the term reads ``x(t + theta)``."""
    return float(shift) if Kind(kind) is Kind.MFDE else -float(shift)


# ---------------------------------------------------------------------------
# coefficients and kernels


def _as_matrix(entry, n: int, what: str):
    """Normalise a scalar or an n x n nested list to an n x n list of entries."""
    if n == 1 and not isinstance(entry, (list, tuple)):
        return [[entry]]
    if (
        not isinstance(entry, (list, tuple))
        or len(entry) != n
        or any(not isinstance(row, (list, tuple)) or len(row) != n for row in entry)
    ):
        raise ModelError(f"{what}: expected an {n}x{n} matrix")
    return [list(row) for row in entry]


def _as_complex(v, what: str) -> complex:
    if isinstance(v, bool):
        raise ModelError(f"{what}: expected a number")
    if isinstance(v, (int, float, complex)):
        return complex(v)
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", "").replace("i", "j") if "j" not in v else v.replace(" ", ""))
        except ValueError:
            pass
    raise ModelError(f"{what}: cannot read {v!r} as a complex number")


class Coefficient:
    """A T-periodic ``n x n`` matrix function of time.

    Either a matrix of expressions in ``t`` or a Fourier-mode table
    ``{k: C_k}`` meaning ``sum_k C_k exp(2 pi i k t / T)``.
    """

    def __init__(self, n: int, period: float, *, exprs=None, modes=None):
        if (exprs is None) == (modes is None):
            raise ValueError("give exactly one of exprs or modes")
        self.n = n
        self.period = float(period)
        self.exprs: list[list[Expression]] | None = exprs
        self.modes: dict[int, np.ndarray] | None = (
            {int(k): np.asarray(v, dtype=complex).reshape(n, n) for k, v in modes.items()}
            if modes is not None
            else None
        )

    @classmethod
    def constant(cls, value, n: int = 1, period: float = 1.0) -> "Coefficient":
        return cls(n, period, modes={0: np.asarray(value, dtype=complex).reshape(n, n)})

    @classmethod
    def from_spec(cls, spec, n: int, period: float, what: str = "coeff") -> "Coefficient":
        if isinstance(spec, dict):
            unknown = set(spec) - {"fourier"}
            if unknown:
                raise ModelError(f"{what}: unknown keys {sorted(unknown)}")
            table = spec.get("fourier")
            if not isinstance(table, list) or not table:
                raise ModelError(f"{what}: 'fourier' must be a non-empty list of modes")
            modes: dict[int, np.ndarray] = {}
            for i, row in enumerate(table):
                if not isinstance(row, dict) or set(row) != {"k", "value"}:
                    raise ModelError(f"{what}.fourier[{i}]: expected keys 'k' and 'value'")
                k = row["k"]
                if isinstance(k, bool) or not isinstance(k, int):
                    raise ModelError(f"{what}.fourier[{i}]: k must be an integer")
                mat = _as_matrix(row["value"], n, f"{what}.fourier[{i}]")
                val = np.array([[_as_complex(v, f"{what}.fourier[{i}]") for v in r] for r in mat])
                modes[k] = modes.get(k, 0) + val
            return cls(n, period, modes=modes)
        mat = _as_matrix(spec, n, what)
        try:
            exprs = [[compile_expression(v, ("t",)) for v in row] for row in mat]
        except ExpressionError as exc:
            raise ModelError(f"{what}: {exc}") from None
        return cls(n, period, exprs=exprs)

    def __call__(self, t) -> np.ndarray:
        """Values at times ``t``; shape ``(len(t), n, n)`` (scalar ``t`` gives ``(n, n)``)."""
        scalar = np.ndim(t) == 0
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        if self.modes is not None:
            out = np.zeros((tt.size, self.n, self.n), dtype=complex)
            for k, c in self.modes.items():
                out += np.exp(2j * np.pi * k * tt / self.period)[:, None, None] * c
        else:
            out = np.empty((tt.size, self.n, self.n), dtype=complex)
            for a in range(self.n):
                for b in range(self.n):
                    out[:, a, b] = self.exprs[a][b](t=tt)
        return out[0] if scalar else out

    @property
    def is_constant(self) -> bool:
        if self.modes is not None:
            return all(k == 0 or not np.any(c) for k, c in self.modes.items())
        return all(not e.free_variables for row in self.exprs for e in row)

    def constant_value(self) -> np.ndarray:
        if not self.is_constant:
            raise ValueError("coefficient depends on t")
        return self(0.0)

    def sup_norm(self, samples: int = 256) -> float:
        vals = self(np.arange(samples) * self.period / samples)
        return float(np.max(np.linalg.norm(vals, ord=2, axis=(1, 2))))

    def describe(self):
        if self.modes is not None:
            return {
                "fourier": [
                    {"k": k, "value": [[repr(complex(x)) for x in row] for row in c]}
                    for k, c in sorted(self.modes.items())
                ]
            }
        return [[e.source for e in row] for row in self.exprs]


@dataclass(frozen=True)
class DelayTerm:
    """Point term ``A(t) x(t - shift)`` (DDE/IDDE) or ``A(t) x(t + shift)`` (MFDE)."""

    shift: float
    coeff: Coefficient


@dataclass(frozen=True)
class DistributedKernel:
    """Density ``K(t, s)`` integrated over ``s`` in ``support``.

    ``s`` follows the same convention as :class:`DelayTerm` shifts.
    ``order`` is the Gauss-Legendre order per quadrature panel.
    """

    density: tuple
    support: tuple[float, float]
    order: int = 16
    n: int = 1

    def __call__(self, t, s) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        shape = np.broadcast_shapes(t.shape, s.shape)
        out = np.empty(shape + (self.n, self.n), dtype=complex)
        for a in range(self.n):
            for b in range(self.n):
                out[..., a, b] = self.density[a][b](t=t, s=s)
        return out

    @property
    def is_constant_in_t(self) -> bool:
        return all("t" not in e.free_variables for row in self.density for e in row)

    def describe(self):
        return {
            "density": [[e.source for e in row] for row in self.density],
            "support": [_fmt_bound(self.support[0]), _fmt_bound(self.support[1])],
            "order": self.order,
        }


def _fmt_bound(x: float):
    return "inf" if math.isinf(x) else float(x)


@dataclass(frozen=True)
class FdeModel:
    kind: Kind
    T: float
    n: int
    terms: tuple[DelayTerm, ...] = ()
    kernels: tuple[DistributedKernel, ...] = ()
    rho: float | None = None
    r_minus: float = 0.0
    r_plus: float = 0.0
    s_max: float | None = None
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def h(self) -> float:
        return -self.r_minus

    def signed_terms(self) -> list[tuple[float, Coefficient]]:
        return [(signed_shift(self.kind, term.shift), term.coeff) for term in self.terms]

    def signed_kernel_support(self, kernel: DistributedKernel) -> tuple[float, float]:
        lo, hi = kernel.support
        if self.kind is Kind.IDDE and self.s_max is not None:
            hi = min(hi, self.s_max)
        if self.kind is Kind.MFDE:
            return float(lo), float(hi)
        return -float(hi), -float(lo)

    def kernel_density_signed(self, kernel: DistributedKernel, t, theta) -> np.ndarray:
        """Density as a function of signed ``theta``."""
        s = theta if self.kind is Kind.MFDE else -np.asarray(theta)
        return kernel(t, s)

    def is_autonomous(self) -> bool:
        return all(term.coeff.is_constant for term in self.terms) and all(
            k.is_constant_in_t for k in self.kernels
        )

    def describe(self) -> dict:
        d = {
            "kind": self.kind.value,
            "T": self.T,
            "n": self.n,
            "terms": [{"shift": t.shift, "coeff": t.coeff.describe()} for t in self.terms],
            "kernels": [k.describe() for k in self.kernels],
        }
        if self.rho is not None:
            d["rho"] = self.rho
        if self.kind is Kind.IDDE:
            d["s_max"] = self.s_max
        d["r_minus"] = self.r_minus
        d["r_plus"] = self.r_plus
        return d

    @property
    def model_hash(self) -> str:
        blob = json.dumps(self.describe(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def history_grid(self, M: int = 64, max_panel: float | None = None) -> HistoryGrid:
        """Tensor-grid theta discretisation with the model's shifts as breakpoints."""
        extra = [theta for theta, _ in self.signed_terms()]
        for k in self.kernels:
            extra.extend(self.signed_kernel_support(k))
        lo, hi = self.r_minus, self.r_plus
        if self.kind is Kind.IDDE:
            lo = -float(self.s_max)
        return HistoryGrid.for_interval(
            lo, hi, M, extra=extra, max_panel=max_panel or self.T,
            rho=self.rho if self.kind is Kind.IDDE else None,
        )

    def norm_estimate(self) -> float:
        """Sum of coefficient sup norms plus kernel masses (upper bound for ||L||)."""
        total = sum(term.coeff.sup_norm() for term in self.terms)
        for k in self.kernels:
            lo, hi = self.signed_kernel_support(k)
            total += _kernel_mass(self, k, lo, hi)
        return total


def _kernel_envelope(model: FdeModel, kernel: DistributedKernel, theta) -> np.ndarray:
    ts = np.arange(32) * model.T / 32
    vals = model.kernel_density_signed(kernel, ts[:, None], np.atleast_1d(theta)[None, :])
    return np.max(np.linalg.norm(vals, ord=2, axis=(-2, -1)), axis=0)


def _kernel_mass(model, kernel, lo, hi) -> float:
    if hi <= lo:
        return 0.0
    x, w = np.polynomial.legendre.leggauss(64)
    edges = np.linspace(lo, hi, int(np.ceil(hi - lo)) + 2)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        th = 0.5 * (a + b) + 0.5 * (b - a) * x
        total += float(np.sum(0.5 * (b - a) * w * _kernel_envelope(model, kernel, th)))
    return total


def _truncation_point(kernel: DistributedKernel, rho: float, T: float, support_lo: float) -> float:
    """Smallest ``s`` with ``exp(-rho s) * tail_mass(s) < TAIL_TOL`` (tail over sup_t |K|)."""
    ts = np.arange(32) * T / 32

    def env(s):
        v = kernel(ts, np.full_like(ts, s))
        return float(np.max(np.linalg.norm(v, ord=2, axis=(-2, -1))))

    def tail(s):
        val, _ = integrate.quad(env, s, np.inf, limit=400)
        return val

    def ok(s):
        return math.exp(-rho * s) * tail(s) < TAIL_TOL

    a = max(support_lo, 0.0)
    b = max(a, 1.0)
    while not ok(b):
        b *= 2.0
        if b > 1e4:
            raise ModelError("kernel tail is not integrable against the exponential weight")
    for _ in range(60):
        mid = 0.5 * (a + b)
        if ok(mid):
            b = mid
        else:
            a = mid
        if b - a < 1e-6:
            break
    return float(b)


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    model: FdeModel
    warnings: list[str]
    norm_L: float
    mfde_condition: dict | None = None

    @property
    def conditional(self) -> bool:
        return bool(self.mfde_condition) and not self.mfde_condition["holds"]


def validate(model: FdeModel) -> ValidationReport:
    """Check every model invariant; raise :class:`ModelError` listing all violations."""
    errors: list[str] = []
    warnings: list[str] = []
    kind = Kind(model.kind)
    if not (model.T > 0 and math.isfinite(model.T)):
        errors.append("T must be a positive finite number")
    if not (isinstance(model.n, int) and model.n >= 1):
        errors.append("n must be a positive integer")
    for i, term in enumerate(model.terms):
        if term.coeff.n != model.n:
            errors.append(f"terms[{i}].coeff: dimension mismatch (expected {model.n}x{model.n})")
        if term.coeff.period != model.T:
            errors.append(f"terms[{i}].coeff: period differs from T")
        if not math.isfinite(term.shift):
            errors.append(f"terms[{i}].shift must be finite")
            continue
        if kind in (Kind.DDE, Kind.IDDE):
            if term.shift <= 0:
                errors.append(f"terms[{i}]: lag must be positive (got {term.shift})")
            elif kind is Kind.DDE and term.shift > model.h + 1e-14:
                errors.append(f"terms[{i}]: lag {term.shift} exceeds h = {model.h}")
        else:
            if not (model.r_minus - 1e-14 <= term.shift <= model.r_plus + 1e-14):
                errors.append(
                    f"terms[{i}]: shift {term.shift} outside [{model.r_minus}, {model.r_plus}]"
                )
    for i, k in enumerate(model.kernels):
        lo, hi = k.support
        if k.n != model.n:
            errors.append(f"kernels[{i}]: dimension mismatch")
        if not lo < hi:
            errors.append(f"kernels[{i}]: support must satisfy lo < hi")
        if k.order < 1:
            errors.append(f"kernels[{i}]: quadrature order must be positive")
        if kind is Kind.DDE and (lo < 0 or hi > model.h + 1e-14 or math.isinf(hi)):
            errors.append(f"kernels[{i}]: support must lie in [0, h]")
        if kind is Kind.IDDE and lo < 0:
            errors.append(f"kernels[{i}]: support must lie in [0, inf)")
        if kind is Kind.MFDE and (lo < model.r_minus - 1e-14 or hi > model.r_plus + 1e-14):
            errors.append(f"kernels[{i}]: support must lie in [r_minus, r_plus]")
    if kind is Kind.IDDE:
        if model.rho is None:
            errors.append("rho is required for kind IDDE")
        elif not model.rho > 0:
            errors.append("rho must be positive")
    elif model.rho is not None:
        warnings.append("rho is ignored unless kind is IDDE")
    if kind is Kind.DDE and not model.h > 0:
        errors.append("DDE needs a positive maximal delay h")
    if kind is Kind.MFDE and not (model.r_minus < 0 < model.r_plus):
        errors.append("MFDE needs r_minus < 0 < r_plus")
    if not model.terms and not model.kernels:
        warnings.append("model has no terms (L = 0)")
    if errors:
        raise ModelError(errors)

    norm_L = model.norm_estimate()
    mfde = None
    if kind is Kind.MFDE:
        lhs = min(-model.r_minus, model.r_plus)
        rhs = math.inf if norm_L == 0 else 1.0 / (math.e * norm_L)
        mfde = {"min_shift": lhs, "bound": rhs, "holds": lhs < rhs}
        if not mfde["holds"]:
            warnings.append(
                "sufficient condition for a nonempty resolvent set fails; results are conditional"
            )
    return ValidationReport(model=model, warnings=warnings, norm_L=norm_L, mfde_condition=mfde)


# ---------------------------------------------------------------------------
# the functional L(t)


def apply_L(model: FdeModel, t: float, phi, grid: HistoryGrid | None = None,
            panel: float = 1.0) -> np.ndarray:
    """Evaluate ``L(t) phi`` for a history segment ``phi``.

    ``phi`` is either a callable ``theta -> (len(theta), n)`` or an array of
    values on ``grid.theta`` with shape ``(grid.size, n)``.  For callables,
    kernels use composite Gauss-Legendre panels of width ``panel``.
    """
    n = model.n
    if callable(phi):
        def at(theta):
            return np.asarray(phi(np.atleast_1d(theta)), dtype=complex).reshape(-1, n)
    else:
        if grid is None:
            raise ValueError("grid values need their HistoryGrid")
        vals = np.asarray(phi, dtype=complex).reshape(grid.size, n)

        def at(theta):
            return grid.interp_matrix(theta) @ vals

    out = np.zeros(n, dtype=complex)
    for theta, coeff in model.signed_terms():
        out += coeff(t) @ at(np.array([theta]))[0]
    for k in model.kernels:
        lo, hi = model.signed_kernel_support(k)
        if grid is not None:
            nodes, weights, P = grid.quadrature(lo, hi, k.order)
            values = P @ vals
        else:
            nodes, weights = _gauss_panels(lo, hi, k.order, panel=panel)
            values = at(nodes)
        dens = model.kernel_density_signed(k, np.full(nodes.shape, float(t)), nodes)
        out += np.einsum("m,mab,mb->a", weights, dens, values)
    return out


def _gauss_panels(lo: float, hi: float, order: int, panel: float):
    x, w = np.polynomial.legendre.leggauss(order)
    m = max(1, int(np.ceil((hi - lo) / panel - 1e-9)))
    edges = np.linspace(lo, hi, m + 1)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (a + b) + 0.5 * (b - a) * x).ravel()
    weights = (0.5 * (b - a) * w).ravel()
    return nodes, weights


def kernel_quadrature(model: FdeModel, kernel: DistributedKernel, panel: float):
    """Composite Gauss-Legendre nodes (signed theta) and weights for a kernel."""
    lo, hi = model.signed_kernel_support(kernel)
    return _gauss_panels(lo, hi, kernel.order, panel)


# ---------------------------------------------------------------------------
# ingest


class _LineDict(dict):
    line: int = 0
    lines: dict


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader: _LineLoader, node: yaml.MappingNode) -> _LineDict:
    loader.flatten_mapping(node)
    out = _LineDict()
    out.lines = {}
    out.line = node.start_mark.line + 1
    for key_node, value_node in node.value:
        key = loader.construct_object(key_node, deep=True)
        if key in out:
            raise ModelError(f"line {key_node.start_mark.line + 1}: duplicate key {key!r}")
        out[key] = loader.construct_object(value_node, deep=True)
        out.lines[key] = key_node.start_mark.line + 1
    return out


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)

_TOP_KEYS = {"kind", "T", "n", "terms", "kernels", "rho", "h", "r_minus", "r_plus", "name"}
_TERM_KEYS = {"shift", "coeff"}
_KERNEL_KEYS = {"density", "support", "order"}


def _where(d, key=None) -> str:
    lines = getattr(d, "lines", {})
    line = lines.get(key) if key is not None else None
    line = line or getattr(d, "line", None)
    return f"line {line}: " if line else ""


def _entry_where(data, message: str) -> str:
    """Line of the term or kernel a validation message refers to."""
    m = re.match(r"(terms|kernels)\[(\d+)\]", message)
    if m:
        seq = data.get(m.group(1)) or []
        i = int(m.group(2))
        if i < len(seq) and isinstance(seq[i], dict):
            return _where(seq[i])
    return _where(data)


def _number(v, what: str, where: str) -> float:
    if isinstance(v, bool):
        raise ModelError(f"{where}{what}: expected a number")
    if isinstance(v, str) and v.strip().lower() in {"inf", "+inf", "infinity", ".inf"}:
        return math.inf
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        try:
            return float(compile_expression(v, ())().real)
        except ExpressionError:
            pass
    raise ModelError(f"{where}{what}: expected a number, got {v!r}")


def model_from_dict(data, *, source: str = "") -> FdeModel:
    """Build and validate a model from a parsed mapping (see README for the schema)."""
    if not isinstance(data, dict):
        raise ModelError("model document must be a mapping")
    errors: list[str] = []
    unknown = set(data) - _TOP_KEYS
    for key in sorted(unknown, key=str):
        errors.append(f"{_where(data, key)}unknown key {key!r}")
    for req in ("kind", "T", "n"):
        if req not in data:
            errors.append(f"{_where(data)}missing required key {req!r}")
    if errors:
        raise ModelError(errors)
    try:
        kind = Kind(str(data["kind"]).upper())
    except ValueError:
        raise ModelError(f"{_where(data, 'kind')}kind must be one of DDE, IDDE, MFDE") from None
    T = _number(data["T"], "T", _where(data, "T"))
    n = data["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ModelError(f"{_where(data, 'n')}n must be a positive integer")

    terms = []
    raw_terms = data.get("terms") or []
    if not isinstance(raw_terms, list):
        raise ModelError(f"{_where(data, 'terms')}terms must be a list")
    for i, entry in enumerate(raw_terms):
        where = _where(entry) if isinstance(entry, dict) else _where(data, "terms")
        if not isinstance(entry, dict):
            errors.append(f"{where}terms[{i}] must be a mapping")
            continue
        for key in sorted(set(entry) - _TERM_KEYS, key=str):
            errors.append(f"{_where(entry, key)}terms[{i}]: unknown key {key!r}")
        if not _TERM_KEYS <= set(entry):
            errors.append(f"{where}terms[{i}]: needs 'shift' and 'coeff'")
            continue
        try:
            shift = _number(entry["shift"], f"terms[{i}].shift", _where(entry, "shift"))
            coeff = Coefficient.from_spec(entry["coeff"], n, T, f"terms[{i}].coeff")
            terms.append(DelayTerm(shift, coeff))
        except ModelError as exc:
            errors.extend(
                e if e.startswith("line") else f"{_where(entry, 'coeff')}{e}" for e in exc.errors
            )

    kernels = []
    raw_kernels = data.get("kernels") or []
    if not isinstance(raw_kernels, list):
        raise ModelError(f"{_where(data, 'kernels')}kernels must be a list")
    for i, entry in enumerate(raw_kernels):
        if not isinstance(entry, dict):
            errors.append(f"{_where(data, 'kernels')}kernels[{i}] must be a mapping")
            continue
        for key in sorted(set(entry) - _KERNEL_KEYS, key=str):
            errors.append(f"{_where(entry, key)}kernels[{i}]: unknown key {key!r}")
        if not {"density", "support"} <= set(entry):
            errors.append(f"{_where(entry)}kernels[{i}]: needs 'density' and 'support'")
            continue
        try:
            mat = _as_matrix(entry["density"], n, f"kernels[{i}].density")
            dens = tuple(tuple(compile_expression(v, ("t", "s")) for v in row) for row in mat)
            sup = entry["support"]
            if not isinstance(sup, list) or len(sup) != 2:
                raise ModelError(f"kernels[{i}].support must be [lo, hi]")
            lo = _number(sup[0], f"kernels[{i}].support", "")
            hi = _number(sup[1], f"kernels[{i}].support", "")
            order = entry.get("order", 16)
            if isinstance(order, bool) or not isinstance(order, int):
                raise ModelError(f"kernels[{i}].order must be an integer")
            kernels.append(DistributedKernel(dens, (lo, hi), order, n))
        except (ModelError, ExpressionError) as exc:
            msgs = exc.errors if isinstance(exc, ModelError) else [str(exc)]
            errors.extend(m if m.startswith("line") else f"{_where(entry)}{m}" for m in msgs)
    if errors:
        raise ModelError(errors)

    rho = None
    if data.get("rho") is not None:
        rho = _number(data["rho"], "rho", _where(data, "rho"))
    if kind is Kind.IDDE and rho is None:
        raise ModelError(f"{_where(data)}rho is required for kind IDDE")

    signed = [signed_shift(kind, t.shift) for t in terms]
    for k in kernels:
        lo, hi = k.support
        if kind is Kind.MFDE:
            signed.extend([lo, hi])
        elif math.isfinite(hi):
            signed.extend([-hi, -lo])
    if kind is Kind.DDE:
        h = _number(data["h"], "h", _where(data, "h")) if "h" in data else -min(signed, default=0.0)
        r_minus, r_plus = -h, 0.0
    elif kind is Kind.IDDE:
        r_minus, r_plus = min(signed, default=0.0), 0.0
    else:
        r_minus = (
            _number(data["r_minus"], "r_minus", _where(data, "r_minus"))
            if "r_minus" in data
            else min(signed + [0.0])
        )
        r_plus = (
            _number(data["r_plus"], "r_plus", _where(data, "r_plus"))
            if "r_plus" in data
            else max(signed + [0.0])
        )

    s_max = None
    if kind is Kind.IDDE and rho is not None and rho > 0:
        s_max = 0.0
        for t_ in terms:
            s_max = max(s_max, t_.shift)
        for k in kernels:
            lo, hi = k.support
            s_max = max(s_max, hi if math.isfinite(hi) else _truncation_point(k, rho, T, lo))
        r_minus = -s_max

    model = FdeModel(
        kind=kind,
        T=T,
        n=n,
        terms=tuple(terms),
        kernels=tuple(kernels),
        rho=rho,
        r_minus=r_minus,
        r_plus=r_plus,
        s_max=s_max,
        name=str(data.get("name", "")),
        meta={"source": source},
    )
    try:
        validate(model)
    except ModelError as exc:
        raise ModelError([f"{_entry_where(data, e)}{e}" for e in exc.errors]) from None
    return model


def parse_model(text: str, *, source: str = "<string>") -> FdeModel:
    try:
        data = yaml.load(text, Loader=_LineLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}: " if mark is not None else ""
        raise ModelError(f"{where}cannot parse model file: {getattr(exc, 'problem', exc)}") from None
    return model_from_dict(data, source=source)


def load_model(path) -> FdeModel:
    """Read, parse and validate a model file."""
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    return parse_model(text, source=str(p))
