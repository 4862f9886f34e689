"""Command-line front end: validated run configurations, JSON result records and a content-hash cache."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import re
import sys
import time
from collections.abc import Callable
from dataclasses import asdict, dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any

import click
import numpy as np

from . import connections as cn
from . import fusion as fu
from . import liealg as la
from . import qgroup as qg
from .diagrams import Diagram, MaximalNestedSet, enumerate_nested_sets
from .errors import CasmonError, ConfigInvalid
from .odecore import HbarSeries
from .report import VerificationReport

COMMANDS = ("associator", "flatness", "dcp", "monodromy", "fusion", "twist", "centraliser", "qcqtqba",
            "quantum", "equivalence")
DEFAULT_REP = {"sl2": "V1", "A1": "V1", "sl3": "sl3", "A2": "sl3", "sl4": "sl4", "A3": "sl4"}
DEFAULT_ORDER = {"associator": 4, "qcqtqba": 2}
MAX_ORDER = 8
FORMATS = ("json", "csv-summary")


def artifact_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0.0.0"


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def parse_complex(text: str) -> complex:
    """Parse '0.1', '1.7i', 'i', '0.1+0.05j' or '-2i'."""
    s = text.strip().replace(" ", "").replace("I", "i").replace("j", "i")
    s = re.sub(r"(^|[+-])i", r"\g<1>1i", s)
    try:
        return complex(s.replace("i", "j"))
    except ValueError:
        raise ConfigInvalid(f"cannot parse complex number {text!r}") from None


def parse_complex_list(text: str) -> list[complex]:
    return [parse_complex(t) for t in text.split(",") if t.strip()]


def parse_word(text: str) -> list[int]:
    try:
        word = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigInvalid(f"braid word {text!r} must be comma-separated integers") from None
    if not word or 0 in word:
        raise ConfigInvalid(f"braid word {text!r} needs nonzero 1-based letters")
    return word


def parse_mns(text: str) -> list[list[int]]:
    """'1/12' is the nested set {{1}, {1,2}} (1-based vertices)."""
    try:
        return [sorted(int(ch) - 1 for ch in part) for part in text.split("/") if part]
    except ValueError:
        raise ConfigInvalid(f"nested set {text!r} must look like 1/12/123") from None


def _encode(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


@dataclass
class RunConfig:
    """Everything a command needs; io fields (out, cache_dir, fmt) do not enter the cache key."""

    command: str
    algebra: str = "sl2"
    reps: list[str] = field(default_factory=list)
    order: int | None = None
    nu: list[complex] = field(default_factory=list)
    hbar: list[complex] = field(default_factory=list)
    tol: float | None = None
    mns: str | None = None
    words: list[list[int]] = field(default_factory=list)
    route: str = "nabla0"
    variant: str = "kappa"
    sign: int = 1
    mu: list[complex] = field(default_factory=list)
    z_probes: list[float] = field(default_factory=lambda: [1.0, 2.0])
    recursive: bool = False
    out: str | None = None
    cache_dir: str | None = None
    fmt: str = "json"

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigInvalid(f"unknown command {self.command!r}")
        if self.algebra not in la.CARTAN:
            raise ConfigInvalid(f"unknown algebra {self.algebra!r}; expected one of {sorted(la.CARTAN)}")
        if self.order is not None and not 0 <= self.order <= MAX_ORDER:
            raise ConfigInvalid(f"order must lie in [0, {MAX_ORDER}], got {self.order}")
        if self.tol is not None and not self.tol > 0:
            raise ConfigInvalid("tolerance must be positive")
        if self.nu and self.hbar:
            raise ConfigInvalid("give either --nu or --hbar, not both")
        if self.route not in fu.ROUTES:
            raise ConfigInvalid(f"unknown route {self.route!r}; expected one of {fu.ROUTES}")
        if self.variant not in ("kappa", "C", "both"):
            raise ConfigInvalid("variant must be kappa, C or both")
        if self.sign not in (1, -1):
            raise ConfigInvalid("sign must be +1 or -1")
        if any(z == 0 for z in self.z_probes) or len({abs(z) for z in self.z_probes}) < 2:
            raise ConfigInvalid("z-probes must be two or more distinct nonzero values")
        if self.fmt not in FORMATS:
            raise ConfigInvalid(f"format must be one of {FORMATS}")
        rank = la.root_system(self.algebra).rank
        if self.mu and len(self.mu) != rank:
            raise ConfigInvalid(f"--mu needs {rank} root values for {self.algebra}")
        if self.mu and any(abs(np.real(m)) > 1e-14 or np.imag(m) <= 0 for m in self.mu):
            raise ConfigInvalid("--mu root values must lie in i R_+ (a point of i C)")
        for word in self.words:
            if any(abs(x) > rank for x in word):
                raise ConfigInvalid(f"braid word {word} uses a vertex outside 1..{rank}")
        self.representation()

    def representation(self) -> la.Representation:
        spec = self.reps[0] if self.reps else DEFAULT_REP.get(self.algebra)
        if spec is None:
            raise ConfigInvalid(f"no default representation for {self.algebra}; pass --rep")
        try:
            rep = la.build_representation(spec)
        except (CasmonError, ValueError, OSError) as exc:
            raise ConfigInvalid(f"bad representation {spec!r}: {exc}") from exc
        if not np.array_equal(np.asarray(rep.rs.cartan_matrix), np.asarray(la.CARTAN[self.algebra])):
            raise ConfigInvalid(f"representation {spec!r} is not a module over {self.algebra}")
        return rep

    def key_dict(self) -> dict[str, Any]:
        d = asdict(self)
        for k in ("out", "cache_dir", "fmt"):
            d.pop(k)
        for k in ("nu", "hbar", "mu"):
            d[k] = [_encode(z) for z in d[k]]
        return d

    def cache_key(self) -> str:
        blob = json.dumps({"config": self.key_dict(), "version": artifact_version()}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# Result records
# ---------------------------------------------------------------------------


def encode_series(X: HbarSeries | np.ndarray) -> dict[str, Any]:
    if isinstance(X, HbarSeries):
        return {"kind": "hbar_series", "coefficients": [la.encode_matrix(c) for c in X.coeffs]}
    return {"kind": "matrix", "matrix": la.encode_matrix(np.asarray(X))}


def _report_entry(name: str, report: VerificationReport) -> dict[str, Any]:
    return {"name": name, "pass": report.passed, "checks": report.to_list()}


def make_record(cfg: RunConfig, reports: list[tuple[str, VerificationReport]], matrices: dict[str, Any],
                seconds: float, error: dict[str, str] | None = None) -> dict[str, Any]:
    passed = error is None and all(r.passed for _, r in reports)
    return {
        "command": cfg.command,
        "config": cfg.key_dict(),
        "version": artifact_version(),
        "reports": [_report_entry(n, r) for n, r in reports],
        "matrices": matrices,
        "timings": {"total_seconds": round(seconds, 3)},
        "pass": passed,
        "error": error,
    }


def export(record: dict[str, Any], fmt: str = "json") -> str:
    """Serialize a record: the full JSON, or a CSV with one row per identity."""
    if fmt == "json":
        return json.dumps(record, indent=2, sort_keys=True) + "\n"
    if fmt == "csv-summary":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["report", "identity", "residual", "tolerance", "pass"])
        for rep in record.get("reports", []):
            for c in rep["checks"]:
                writer.writerow([rep["name"], c["identity"], repr(c["residual"]), repr(c["tolerance"]), c["pass"]])
        return buf.getvalue()
    raise ConfigInvalid(f"unknown export format {fmt!r}")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

Result = tuple[list[tuple[str, VerificationReport]], dict[str, Any]]


def _order(cfg: RunConfig, default: int = 3) -> int:
    return DEFAULT_ORDER.get(cfg.command, default) if cfg.order is None else cfg.order


def _nus(cfg: RunConfig, default: tuple[complex, ...] = (0.1,)) -> list[complex]:
    if cfg.nu:
        return list(cfg.nu)
    if cfg.hbar:
        return [h / (np.pi * 1j) for h in cfg.hbar]
    return list(default)


def _tol(cfg: RunConfig, default: float) -> float:
    return default if cfg.tol is None else cfg.tol


def _variants(cfg: RunConfig) -> tuple[str, ...]:
    return ("kappa", "C") if cfg.variant == "both" else (cfg.variant,)


def _root_values(cfg: RunConfig, rep: la.Representation) -> np.ndarray:
    if cfg.mu:
        return np.array(cfg.mu, dtype=complex)
    return np.array([1j * (1.0 + 0.7 * k) for k in range(rep.rs.rank)])


def _select_mns(cfg: RunConfig, rep: la.Representation) -> MaximalNestedSet | None:
    if cfg.mns is None:
        return None
    data = enumerate_nested_sets(Diagram.from_root_system(rep.rs))
    want = sorted(parse_mns(cfg.mns))
    for F in data.mns:
        if sorted(F.serialize()) == want:
            return F
    raise ConfigInvalid(f"{cfg.mns!r} is not a maximal nested set of {cfg.algebra}")


def cmd_associator(cfg: RunConfig, rep: la.Representation) -> Result:
    order = _order(cfg)
    report = cn.associator_report(rep, order=order, tol=_tol(cfg, 1e-8))
    phi = cn.kz_associator([rep] * 3, order=order)
    return [("associator", report)], {"Phi_KZ": {**encode_series(phi), "order": order}}


def cmd_flatness(cfg: RunConfig, rep: la.Representation) -> Result:
    tol = _tol(cfg, 1e-10)
    out = []
    for nu in _nus(cfg):
        tag = f"nu={_encode(nu)}"
        dyn = cn.build_connection("DynamicalKZ_n", [rep, rep], nu=nu)
        out.append((f"dynamical_kz {tag}", cn.verify_flatness(dyn, tol=tol)))
        for kind in ("KZ_n", "Casimir_kappa", "Casimir_C"):
            conn = cn.build_connection(kind, [rep] * 3 if kind == "KZ_n" else rep, nu=nu)
            out.append((f"{kind} {tag}", cn.verify_flatness(conn, tol=tol)))
    return out, {}


def cmd_dcp(cfg: RunConfig, rep: la.Representation) -> Result:
    out, matrices = [], {}
    for nu in _nus(cfg):
        for variant in _variants(cfg):
            out.append((f"dcp {variant} nu={_encode(nu)}", cn.dcp_report(rep, nu=nu, variant=variant,
                                                                         tol=_tol(cfg, 1e-7))))
    F = _select_mns(cfg, rep)
    if F is not None:
        fam = cn.default_adapted_family(rep.rs)
        cd = cn.casimir_data(rep, nu=_nus(cfg)[0], variant=_variants(cfg)[0])
        psi = cn.dcp_solution(F, fam, cd)(cn.default_base_point(rep.rs))
        matrices["Psi_F"] = {**encode_series(psi), "mns": F.serialize()}
    return out, matrices


def cmd_monodromy(cfg: RunConfig, rep: la.Representation) -> Result:
    out, matrices = [], {}
    F = _select_mns(cfg, rep)
    for nu in _nus(cfg):
        for variant in _variants(cfg):
            out.append((f"monodromy {variant} nu={_encode(nu)}", cn.monodromy_report(rep, nu=nu, variant=variant,
                                                                                  tol=_tol(cfg, 1e-7))))
            for word in cfg.words:
                M = cn.braid_monodromy(rep, word, nu=nu, variant=variant, F=F)
                matrices[f"word {word} {variant} nu={_encode(nu)}"] = encode_series(M)
    return out, matrices


def cmd_fusion(cfg: RunConfig, rep: la.Representation) -> Result:
    order = _order(cfg)
    y = _root_values(cfg, rep)
    c = fu.point_from_root_values(rep.rs, y)
    report = fu.fusion_report([rep, rep], c, cfg.sign, order, recursive=cfg.recursive, tol=_tol(cfg, 1e-9))
    fs = fu.fusion_solve([rep, rep], [1.0, 0.0], c, cfg.sign, order)
    meta = {"mu_root_values": [_encode(v) for v in y], "sign": cfg.sign, "order": order}
    return [("fusion", report)], {"H": {**encode_series(fs.H()), **meta}, "J": {**encode_series(fs.J()), **meta}}


def cmd_twist(cfg: RunConfig, rep: la.Representation) -> Result:
    order = _order(cfg)
    y = _root_values(cfg, rep)
    report = fu.twist_report(rep, y, cfg.sign, order, cfg.z_probes, tol=_tol(cfg, 1e-8))
    dt = fu.differential_twist([rep, rep], fu.point_from_root_values(rep.rs, y), cfg.sign, order, cfg.z_probes)
    meta = {"mu_root_values": [_encode(v) for v in y], "sign": cfg.sign, "order": order, "z": list(dt.probes)}
    return [("twist", report)], {"F": {**encode_series(dt.F), **meta}}


def cmd_centraliser(cfg: RunConfig, rep: la.Representation) -> Result:
    order = _order(cfg)
    report = fu.centraliser_report(rep, cfg.sign, order, tol=_tol(cfg, 1e-6))
    matrices = {}
    for i in range(rep.rs.rank):
        C = fu.centraliser_constant([rep, rep], i, cfg.sign, order, cfg.route)
        matrices[f"C_{i + 1}"] = {**encode_series(C), "route": cfg.route, "sign": cfg.sign, "order": order}
    return [("centraliser", report)], matrices


def cmd_qcqtqba(cfg: RunConfig, rep: la.Representation) -> Result:
    order = _order(cfg)
    report = fu.assemble_qcqtqba(rep, order, cfg.sign, route=cfg.route, nu=_nus(cfg)[0], tol=_tol(cfg, 1e-6))
    return [("qcqtqba", report)], {}


def cmd_quantum(cfg: RunConfig, rep: la.Representation) -> Result:
    hbars = cfg.hbar or ([np.pi * 1j * nu for nu in cfg.nu] if cfg.nu else [0.05, 0.1, 0.1 + 0.05j])
    return [("quantum", qg.quantum_report(rep, hbars=hbars, tol=_tol(cfg, 1e-10)))], {}


def cmd_equivalence(cfg: RunConfig, rep: la.Representation) -> Result:
    order = _order(cfg)
    words = cfg.words or qg.default_words(rep.rs.rank)
    nus = _nus(cfg, default=(0.05, 0.1 + 0.05j))
    variants = ("kappa", "C") if cfg.variant in ("both", "kappa") and not cfg.words else _variants(cfg)
    out = []
    for variant in variants:
        out.append((f"equivalence {variant}", qg.monodromy_equivalence(rep, words, order=order, nus=nus,
                                                                        variant=variant, tol=_tol(cfg, 1e-5))))
    return out, {}


HANDLERS: dict[str, Callable[[RunConfig, la.Representation], Result]] = {
    "associator": cmd_associator,
    "flatness": cmd_flatness,
    "dcp": cmd_dcp,
    "monodromy": cmd_monodromy,
    "fusion": cmd_fusion,
    "twist": cmd_twist,
    "centraliser": cmd_centraliser,
    "qcqtqba": cmd_qcqtqba,
    "quantum": cmd_quantum,
    "equivalence": cmd_equivalence,
}


def resolve_cache_dir(cfg: RunConfig) -> Path | None:
    """CASMON_CACHE, when set, overrides --cache-dir."""
    env = os.environ.get("CASMON_CACHE")
    chosen = env or cfg.cache_dir
    return Path(chosen) if chosen else None


def run(cfg: RunConfig) -> tuple[dict[str, Any], str]:
    """Validate, compute (or load from cache) and return the record with its JSON text.

    ConfigInvalid propagates before any computation.
    """
    cfg.validate()
    cache = resolve_cache_dir(cfg)
    path = cache / f"{cfg.command}-{cfg.cache_key()}.json" if cache else None
    if path is not None and path.exists():
        text = path.read_text()
        return json.loads(text), text
    rep = cfg.representation()
    start = time.perf_counter()
    try:
        reports, matrices = HANDLERS[cfg.command](cfg, rep)
        record = make_record(cfg, reports, matrices, time.perf_counter() - start)
    except ConfigInvalid:
        raise
    except (CasmonError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        error = {"type": type(exc).__name__, "message": str(exc)}
        record = make_record(cfg, [], {}, time.perf_counter() - start, error)
    text = export(record, "json")
    if path is not None and record["error"] is None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return record, text


def exit_code(record: dict[str, Any]) -> int:
    return 0 if record["pass"] else 1


# ---------------------------------------------------------------------------
# click wiring
# ---------------------------------------------------------------------------


def _common(fn):
    options = [
        click.option("--algebra", default="sl2", show_default=True, help="sl2, sl3, sl4, A1-A3, B2, G2."),
        click.option("--rep", "reps", multiple=True, help="V<m> (sl2), sl<n> (defining) or a JSON file."),
        click.option("--order", type=int, default=None, help="hbar-series order."),
        click.option("--nu", default=None, help="Comma-separated coupling values nu (hbar = pi i nu)."),
        click.option("--hbar", default=None, help="Comma-separated hbar values."),
        click.option("--tol", type=float, default=None, help="Override the default tolerance."),
        click.option("--mns", default=None, help="Maximal nested set, e.g. 1/12."),
        click.option("--word", "words", multiple=True, help="Braid word, e.g. 1,2,-1 (repeatable)."),
        click.option("--route", default="nabla0", show_default=True, help="Centraliser route."),
        click.option("--variant", default="kappa", show_default=True, help="kappa, C or both."),
        click.option("--sign", type=int, default=1, show_default=True, help="Half-plane sign +1 or -1."),
        click.option("--mu", default=None, help="Simple-root values of mu in i R_+, e.g. i,1.7i."),
        click.option("--z-probes", default="1,2", show_default=True, help="|z| probes for the twist."),
        click.option("--recursive/--no-recursive", default=False, help="Three-point limits in fusion."),
        click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the record here."),
        click.option("--format", "fmt", default="json", show_default=True, help="json or csv-summary."),
        click.option("--cache-dir", type=click.Path(file_okay=False), default=None,
                     help="Result cache (CASMON_CACHE overrides)."),
    ]
    for opt in reversed(options):
        fn = opt(fn)
    return fn


def build_config(command: str, kw: dict[str, Any]) -> RunConfig:
    try:
        z_probes = [float(t) for t in kw["z_probes"].split(",") if t.strip()]
    except ValueError:
        raise ConfigInvalid(f"bad --z-probes {kw['z_probes']!r}") from None
    return RunConfig(
        command=command,
        algebra=kw["algebra"],
        reps=list(kw["reps"]),
        order=kw["order"],
        nu=parse_complex_list(kw["nu"]) if kw["nu"] else [],
        hbar=parse_complex_list(kw["hbar"]) if kw["hbar"] else [],
        tol=kw["tol"],
        mns=kw["mns"],
        words=[parse_word(w) for w in kw["words"]],
        route=kw["route"],
        variant=kw["variant"],
        sign=kw["sign"],
        mu=parse_complex_list(kw["mu"]) if kw["mu"] else [],
        z_probes=z_probes,
        recursive=kw["recursive"],
        out=kw["out"],
        cache_dir=kw["cache_dir"],
        fmt=kw["fmt"],
    )


def _print_summary(record: dict[str, Any]) -> None:
    for rep in record["reports"]:
        for c in rep["checks"]:
            verdict = "PASS" if c["pass"] else "FAIL"
            click.echo(f"{verdict} {rep['name']}: {c['identity']} residual={c['residual']:.3e} tol={c['tolerance']:.1e}")
    if record.get("error"):
        click.echo(f"ERROR {record['error']['type']}: {record['error']['message']}", err=True)
    click.echo(f"{record['command']}: {'pass' if record['pass'] else 'fail'}")


def execute(command: str, kw: dict[str, Any]) -> int:
    try:
        cfg = build_config(command, kw)
        record, text = run(cfg)
    except ConfigInvalid as exc:
        click.echo(f"ConfigInvalid: {exc}", err=True)
        return 2
    if cfg.out:
        Path(cfg.out).write_text(text if cfg.fmt == "json" else export(record, cfg.fmt))
    _print_summary(record)
    return exit_code(record)


@click.group()
@click.version_option(artifact_version(), prog_name="casmon")
def main() -> None:
    """Verify Casimir/KZ connection identities, fusion twists and quantum Weyl group operators."""


def _make_command(name: str):
    @_common
    def command(**kw):
        sys.exit(execute(name, kw))

    command.__doc__ = f"Run the {name} verification."
    return main.command(name)(command)


for _name in COMMANDS:
    _make_command(_name)
