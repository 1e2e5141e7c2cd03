"""Command-line front end.

::

    floquetspec spectrum --model dde_pi_half --region -1,1,-3,3 --out run.json
    floquetspec jordan --model dde_double_root --sigma -1
    floquetspec verify --model mfde_symmetric
    floquetspec resolvent --model dde_pi_half --z 0.3,0.2
    floquetspec export-plot --model dde_pi_half --out plots/

Exit codes: 0 success, 1 validation, 2 numerical failure, 3 I/O.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .charop import assemble_delta, history_grid, resolvent_A_apply
from .checks import (
    check_chain_defects,
    check_elementary_residuals,
    check_equivalence,
    check_periodicity,
    check_resolvent,
    oracle_closed_form,
    oracle_monodromy,
)
from .errors import DomainError, FloquetError, SingularError
from .floquet import eigenfunction
from .model import FdeModel, Kind, ModelError, load_model
from .probes import random_field
from .report import dumps, fmt_complex, fmt_real, write_table
from .spectrum import Region, default_region, jordan_chains, spectrum

log = logging.getLogger("floquetspec")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    model: str
    region: list | None = None
    strip: bool = False
    N: int = 64
    M: int = 64
    M_h: int = 64
    tol: float = 1e-8
    rank_tol: float = 1e-8
    oracle: bool = False
    resolution: int = 256
    seed: int = 0
    out: str | None = None
    sigma: list | None = None
    z: list | None = None
    verbosity: int = 0
    notes: list = field(default_factory=list)

    def validate(self) -> None:
        for name in ("tol", "rank_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise UsageError(f"--{name.replace('_', '-')} must be positive, got {v}")
        for name in ("N", "M", "M_h", "resolution"):
            v = getattr(self, name)
            if v < 4:
                raise UsageError(f"--{name} must be at least 4, got {v}")
        for name in ("N", "M"):
            v = getattr(self, name)
            if v & (v - 1):
                self.notes.append(f"{name} = {v} is not a power of two")

    def echo(self) -> dict:
        """Every setting that affects results; output location and verbosity are left out
        so that reruns into different files stay byte-identical."""
        d = asdict(self)
        for key in ("notes", "verbosity", "out"):
            d.pop(key)
        return d


# ---------------------------------------------------------------------------
# argument handling


def _floats(text: str, count: int | tuple, what: str) -> list[float]:
    try:
        vals = [float(x) for x in text.replace(" ", "").split(",")]
    except ValueError:
        raise UsageError(f"cannot parse {what} {text!r}") from None
    counts = count if isinstance(count, tuple) else (count,)
    if len(vals) not in counts:
        raise UsageError(f"{what} needs {' or '.join(map(str, counts))} comma-separated numbers")
    return vals


def parse_complex(text: str, what: str = "complex number") -> complex:
    """``"re,im"`` or any literal accepted by :class:`complex` (``"-1"``, ``"1.5j"``)."""
    if "," in text:
        re, im = _floats(text, 2, what)
        return complex(re, im)
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"cannot parse {what} {text!r}") from None


def parse_region(text: str) -> list[float]:
    return _floats(text, 4, "--region")


def _fixture_path(name: str) -> Path | None:
    base = resources.files("floquetspec") / "fixtures"
    stem = name[:-5] if name.endswith(".yaml") else name
    cand = base / f"{stem}.yaml"
    return Path(str(cand)) if cand.is_file() else None


def resolve_model_path(text: str) -> Path:
    p = Path(text)
    if p.exists():
        return p
    if p.parent == Path(".") and (fx := _fixture_path(text)) is not None:
        return fx
    raise FileNotFoundError(f"model file not found: {text}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, metavar="PATH",
                        help="model file (YAML); bare names fall back to the bundled fixtures")
    common.add_argument("--region", metavar="re_min,re_max,im_min,im_max")
    common.add_argument("--strip", action="store_true", help="reduce exponents to Im in (-pi/T, pi/T]")
    common.add_argument("--N", type=int, default=64, help="Fourier collocation points")
    common.add_argument("--M", type=int, default=64, help="Chebyshev nodes per theta panel")
    common.add_argument("--Mh", dest="M_h", type=int, default=64,
                        help="nodes per panel of the monodromy oracle")
    common.add_argument("--tol", type=float, default=1e-8, help="residual tolerance")
    common.add_argument("--rank-tol", dest="rank_tol", type=float, default=1e-8)
    common.add_argument("--oracle", action="store_true", help="cross-check against the oracles")
    common.add_argument("--resolution", type=int, default=256,
                        help="oracle time steps per maximal delay")
    common.add_argument("--seed", type=int, default=0, help="seed for probing matrices and test fields")
    common.add_argument("--out", metavar="PATH", help="structured output file (directory for export-plot)")
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("-q", "--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="floquetspec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="Floquet exponents in a region")
    p = sub.add_parser("jordan", parents=[common], help="Jordan chains at one exponent")
    p.add_argument("--sigma", required=True, help="exponent, as re,im or a complex literal")
    sub.add_parser("verify", parents=[common], help="run the property checks")
    p = sub.add_parser("resolvent", parents=[common], help="resolvent of the generator at z")
    p.add_argument("--z", default="0.3,0.2", help="point, as re,im or a complex literal")
    sub.add_parser("export-plot", parents=[common], help="write plot data as delimited text")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(
        command=ns.command, model=ns.model,
        region=parse_region(ns.region) if ns.region else None,
        strip=ns.strip, N=ns.N, M=ns.M, M_h=ns.M_h, tol=ns.tol, rank_tol=ns.rank_tol,
        oracle=ns.oracle, resolution=ns.resolution, seed=ns.seed, out=ns.out,
        verbosity=-1 if ns.quiet else ns.verbose,
    )
    if ns.command == "jordan":
        s = parse_complex(ns.sigma, "--sigma")
        cfg.sigma = [s.real, s.imag]
    if ns.command == "resolvent":
        z = parse_complex(ns.z, "--z")
        cfg.z = [z.real, z.imag]
    cfg.validate()
    return cfg


def make_region(cfg: RunConfig, model: FdeModel) -> Region:
    if cfg.region is None:
        r = default_region(model)
        return Region(r.kind, r.bounds, rank_tol=cfg.rank_tol)
    try:
        return Region.rect(*cfg.region, rank_tol=cfg.rank_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------
# console output


class Console:
    def __init__(self, verbosity: int = 0, stream=None):
        self.verbosity = verbosity
        self.stream = stream or sys.stdout

    def line(self, text: str = "", level: int = 0) -> None:
        if self.verbosity >= level:
            print(text, file=self.stream)

    def table(self, header, rows) -> None:
        if self.verbosity < 0:
            return
        cells = [list(map(str, header))] + [[str(c) for c in r] for r in rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
        for i, r in enumerate(cells):
            print("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip(), file=self.stream)
            if i == 0:
                print("  ".join("-" * w for w in widths), file=self.stream)


def _point_rows(points):
    rows = []
    for p in points:
        delta = "-" if p.refinement_delta is None else fmt_real(p.refinement_delta, 3)
        chain = max(p.residuals, default=float("nan"))
        rows.append([fmt_complex(p.sigma), p.m_g, ",".join(map(str, p.partials)),
                     fmt_real(p.residual, 3), fmt_real(chain, 3), delta])
    return rows


POINT_HEADER = ["sigma", "m_g", "partials", "residual", "chain_defect", "delta_2N"]


def _chain_samples(chain) -> dict:
    return {"t": chain[0].grid, "q": [q.values for q in chain]}


# ---------------------------------------------------------------------------
# commands


def _oracle_checks(model, cfg, region, sigmas):
    return [
        oracle_monodromy(model, sigmas, region, M_h=_oracle_mh(model, cfg),
                         resolution=_oracle_resolution(model, cfg),
                         threshold=_oracle_threshold(model)),
        oracle_closed_form(model, sigmas, region, N=cfg.N),
    ]


def _oracle_mh(model, cfg) -> int:
    # infinite delay: one panel per unit of the truncated history
    return min(cfg.M_h, 16) if model.kind is Kind.IDDE else cfg.M_h


def _oracle_resolution(model, cfg) -> int:
    return min(cfg.resolution, 32) if model.kind is Kind.IDDE else cfg.resolution


def _oracle_threshold(model) -> float:
    return 1e-4 if model.kind is Kind.IDDE else 1e-6


def cmd_spectrum(model: FdeModel, cfg: RunConfig, console: Console) -> tuple[dict, int]:
    region = make_region(cfg, model)
    res = spectrum(model, region, cfg.N, tol=cfg.tol, strip=cfg.strip, seed=cfg.seed)
    console.line(f"{len(res)} exponent(s) in {region.describe()['bounds']}")
    console.table(POINT_HEADER, _point_rows(res.points))
    out = {"points": [p.to_dict() for p in res.points], "metadata": res.metadata}
    code = EXIT_OK
    if cfg.oracle:
        checks = _oracle_checks(model, cfg, region, res.sigmas)
        out["oracle"] = [c.to_dict() for c in checks]
        for c in checks:
            dist = c.detail.get("max_strip_distance")
            console.line(f"oracle {c.name}: {c.status}"
                         + ("" if dist is None else f" (max strip distance {fmt_real(dist, 3)})"))
        if any(c.status == "fail" for c in checks):
            code = EXIT_NUMERICAL
    return out, code


def cmd_jordan(model: FdeModel, cfg: RunConfig, console: Console) -> tuple[dict, int]:
    sigma = complex(*cfg.sigma)
    pt = jordan_chains(model, sigma, cfg.N, rank_tol=cfg.rank_tol)
    console.table(POINT_HEADER, _point_rows([pt]))
    out = pt.to_dict()
    out["chains"] = [
        {"length": len(ch), "defect": pt.residuals[i], "vectors": _chain_samples(ch)}
        for i, ch in enumerate(pt.chains)
    ]
    return out, EXIT_OK


def run_checks(model: FdeModel, cfg: RunConfig) -> list:
    rng = np.random.default_rng(cfg.seed)
    region = make_region(cfg, model)
    checks = [check_equivalence(model, rng, N=cfg.N, M=cfg.M)]
    checks.append(check_resolvent(model, rng, N=cfg.N, M=cfg.M))
    res = spectrum(model, region, cfg.N, tol=cfg.tol, strip=cfg.strip, seed=cfg.seed)
    sigmas = res.sigmas
    checks.append(check_periodicity(model, res.points, N=cfg.N))
    checks.append(check_chain_defects(res.points))
    checks.append(check_elementary_residuals(model, res.points))
    checks.extend(_oracle_checks(model, cfg, region, sigmas))
    return checks, res


def cmd_verify(model: FdeModel, cfg: RunConfig, console: Console) -> tuple[dict, int]:
    checks, res = run_checks(model, cfg)
    rows = [[c.name, c.status, "-" if c.value is None else fmt_real(c.value, 3),
             "-" if c.threshold is None else fmt_real(c.threshold, 3)] for c in checks]
    console.table(["check", "status", "value", "threshold"], rows)
    failed = [c.name for c in checks if c.status == "fail"]
    out = {
        "checks": [c.to_dict() for c in checks],
        "exponents": [[s.real, s.imag] for s in res.sigmas],
        "passed": not failed,
        "failed": failed,
    }
    return out, EXIT_NUMERICAL if failed else EXIT_OK


def cmd_resolvent(model: FdeModel, cfg: RunConfig, console: Console) -> tuple[dict, int]:
    z = complex(*cfg.z)
    D = assemble_delta(model, z, cfg.N)
    s = D.singular_values()
    out = {"z": [z.real, z.imag], "sigma_min": float(s[-1]), "sigma_max": float(s[0]),
           "threshold": D.threshold(), "delta_inverse_norm": None, "identity_residual": None}
    if s[-1] <= D.threshold():
        raise SingularError(z, float(s[-1]), D.threshold())
    out["delta_inverse_norm"] = float(1.0 / s[-1])
    check = check_resolvent(model, np.random.default_rng(cfg.seed), z=z, N=cfg.N, M=cfg.M)
    out["identity_residual"] = check.value
    out["identity_threshold"] = check.threshold
    phi = random_field(np.random.default_rng(cfg.seed), model, history_grid(model, cfg.M), cfg.N)
    r = resolvent_A_apply(model, z, phi)
    out["resolvent_gain"] = r.norm() / phi.norm()
    console.line(f"z = {fmt_complex(z)}")
    console.line(f"sigma_min(Delta_N(z)) = {fmt_real(s[-1])}")
    console.line(f"||Delta_N(z)^-1||_2 = {fmt_real(1.0 / s[-1])}")
    console.line(f"||R(z, A) phi|| / ||phi|| = {fmt_real(out['resolvent_gain'])}")
    console.line(f"identity residual = {fmt_real(check.value, 3)}")
    return out, EXIT_OK if check.passed else EXIT_NUMERICAL


def cmd_export_plot(model: FdeModel, cfg: RunConfig, console: Console) -> tuple[dict, int]:
    outdir = Path(cfg.out or "plots")
    outdir.mkdir(parents=True, exist_ok=True)
    region = make_region(cfg, model)
    res = spectrum(model, region, cfg.N, tol=cfg.tol, strip=cfg.strip, seed=cfg.seed)
    files = []
    tag = f"model_hash={model.model_hash} N={cfg.N} seed={cfg.seed}"
    scatter = outdir / "spectrum.tsv"
    write_table(scatter, ["re", "im", "m_a"],
                [[p.sigma.real, p.sigma.imag, p.m_a] for p in res.points], [tag])
    files.append(scatter)
    T = model.T
    b = region.bounds
    k0 = math.ceil((b[2] * T / math.pi - 1) / 2)
    k1 = math.floor((b[3] * T / math.pi - 1) / 2)
    strips = outdir / "strips.tsv"
    write_table(strips, ["im"], [[(2 * k + 1) * math.pi / T] for k in range(k0, k1 + 1)],
                [tag, "horizontal lines Im z = (2k + 1) pi / T inside the region"])
    files.append(strips)
    grid = history_grid(model, cfg.M)
    times = np.arange(cfg.N) * T / cfg.N
    for i, p in enumerate(res.points):
        phi = eigenfunction(p.sigma, p.chains[0], 0, grid)
        path = outdir / f"eigenfunction_{i}.tsv"
        rows = [[a, t, th, phi.values[it, m, a].real, phi.values[it, m, a].imag]
                for a in range(model.n)
                for it, t in enumerate(times)
                for m, th in enumerate(grid.theta)]
        write_table(path, ["component", "t", "theta", "re", "im"], rows,
                    [tag, f"sigma = {p.sigma.real!r}, {p.sigma.imag!r}",
                     f"grid {phi.N} x {grid.size} (t x theta)"])
        files.append(path)
    console.line(f"wrote {len(files)} file(s) to {outdir}")
    for f in files:
        console.line(f"  {f.name}", level=1)
    return {"files": [f.name for f in files], "directory": str(outdir),
            "points": [p.to_dict() for p in res.points]}, EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "jordan": cmd_jordan,
    "verify": cmd_verify,
    "resolvent": cmd_resolvent,
    "export-plot": cmd_export_plot,
}


# ---------------------------------------------------------------------------


def _document(cfg: RunConfig | None, model: FdeModel | None, results, code: int, error=None,
              warns=()) -> dict:
    doc = {
        "tool": {"name": "floquetspec", "version": __version__},
        "exit_code": code,
        "status": "ok" if code == EXIT_OK else ("failed" if error is None else "error"),
        "config": cfg.echo() if cfg else None,
        "model": None if model is None else {"hash": model.model_hash, **model.describe()},
        "results": results,
        "warnings": sorted(set(warns)),
    }
    if error is not None:
        doc["error"] = error
    return doc


_VALUE_FLAGS = ("--region", "--sigma", "--z")


def _glue_values(argv: list[str]) -> list[str]:
    """Attach values such as ``-1,1,-3,3`` to their flag so argparse does not read them as options."""
    out = []
    it = iter(argv)
    for a in it:
        if a in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _glue_values(list(sys.argv[1:] if argv is None else argv))
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_VALIDATION
    cfg = None
    model = None
    results = None
    error = None
    console = Console(-1 if ns.quiet else ns.verbose)
    logging.basicConfig(level=logging.DEBUG if ns.verbose > 1 else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            cfg = config_from_args(ns)
            path = resolve_model_path(cfg.model)
            model = load_model(path)
            results, code = COMMANDS[cfg.command](model, cfg, console)
        except (UsageError, ModelError, DomainError) as exc:
            code, error = EXIT_VALIDATION, _error_text(exc)
        except FloquetError as exc:
            code, error = EXIT_NUMERICAL, str(exc)
        except np.linalg.LinAlgError as exc:
            code, error = EXIT_NUMERICAL, f"linear algebra failure: {exc}"
        except OSError as exc:
            code, error = EXIT_IO, str(exc)
        except ValueError as exc:
            code, error = EXIT_VALIDATION, str(exc)
    warns = [str(w.message) for w in caught] + (cfg.notes if cfg else [])
    for w in sorted(set(warns)):
        print(f"warning: {w}", file=sys.stderr)
    if error is not None:
        print(f"error: {error}", file=sys.stderr)
    if cfg is not None and cfg.out and cfg.command != "export-plot":
        try:
            Path(cfg.out).write_text(dumps(_document(cfg, model, results, code, error, warns)),
                                     encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot write {cfg.out}: {exc}", file=sys.stderr)
            return EXIT_IO
    elif cfg is not None and cfg.command == "export-plot" and error is None:
        try:
            (Path(cfg.out or "plots") / "run.json").write_text(
                dumps(_document(cfg, model, results, code, error, warns)), encoding="utf-8")
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
    return code


def _error_text(exc) -> str:
    if isinstance(exc, ModelError):
        return "invalid model: " + "; ".join(exc.errors)
    return str(exc)


if __name__ == "__main__":
    sys.exit(main())
