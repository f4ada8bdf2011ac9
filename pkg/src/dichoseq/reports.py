"""Batch analysis: run the requested tests on a parsed system spec and
emit machine-readable report JSON plus decay-envelope CSV files.

Reports are reproducible: the same (spec, config, seed) produces
byte-identical JSON apart from the timestamp field, and every verdict
embeds the tolerances and horizon that produced it.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DichoseqError, SpecParseError
from .subspaces import SubspaceBasis
from .systems import (
    BlockTriangularSystem,
    TimeDomain,
    system_from_json,
    system_to_json,
)
from .dichotomy import (
    DEFAULT_GAP_TOL,
    DEFAULT_HORIZON,
    DEFAULT_TOLERANCES,
    DichotomyCertificate,
    ProjectionFamily,
    ViolationReport,
    fit_projection_family,
    verify_dichotomy,
)

__all__ = ["AnalysisReport", "analyze", "sanitize"]

_DEFAULT_TESTS = ("perron", "dichotomy")


def sanitize(obj):
    """Recursively convert report payloads to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, (DichotomyCertificate, ViolationReport)):
        return sanitize(obj.to_json())
    if isinstance(obj, SubspaceBasis):
        return {"dim": obj.dim, "ambient_dim": obj.ambient_dim}
    if isinstance(obj, ProjectionFamily):
        return {"dim": obj.dim, "domain": obj.domain.kind}
    if hasattr(obj, "to_json"):
        return sanitize(obj.to_json())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if not np.isfinite(f):
            return repr(f)
        return f
    if isinstance(obj, (np.complexfloating, complex)):
        return {"re": sanitize(obj.real), "im": sanitize(obj.imag)}
    if isinstance(obj, np.ndarray):
        return sanitize(obj.tolist())
    if obj is None or isinstance(obj, str):
        return obj
    return repr(obj)


@dataclass
class AnalysisReport:
    digest: str
    config: dict
    tests: list
    verdicts: dict
    csv_paths: list = field(default_factory=list)
    runtime_seconds: float = 0.0
    timestamp: str = ""

    def to_json(self) -> dict:
        return {
            "digest": self.digest,
            "config": sanitize(self.config),
            "tests": list(self.tests),
            "verdicts": sanitize(self.verdicts),
            "csv_paths": list(self.csv_paths),
            "runtime_seconds": round(self.runtime_seconds, 3),
            "timestamp": self.timestamp,
        }

    def write(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")


def _digest(spec_obj) -> str:
    canon = json.dumps(spec_obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def write_envelope_csv(cert: DichotomyCertificate, path) -> None:
    """Decay envelope rows m,n,norm,bound (norm <= bound row by row when
    the verdict is a dichotomy)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "n", "norm", "bound"])
        for m, n, norm, bound in cert.envelope:
            w.writerow([m, n, repr(float(norm)), repr(float(bound))])


def _run_dichotomy(sys, horizon, gap_tol):
    if sys.is_symbolic():
        cert = verify_dichotomy(sys, ProjectionFamily.zero(sys.domain),
                                horizon=horizon)
        return cert, cert
    fam = fit_projection_family(sys, horizon, gap_tol)
    if fam is None:
        rep = ViolationReport(items=[])
        rep.add("fit", "no dichotomy projection family found at "
                f"gap_tol={gap_tol}", None)
        return rep, None
    cert = verify_dichotomy(sys, fam, horizon=horizon, gap_tol=gap_tol)
    return cert, (cert if cert.ok else None)


def _run_perron(sys, horizon, gap_tol, seed):
    from .admissibility import perron_test
    return perron_test(sys, horizon=horizon, gap_tol=gap_tol, seed=seed)


def _run_triangular(tri, horizon, gap_tol):
    from .triangular import (dimension_balance_test,
                             dimension_balance_test_zminus, tconv1_test)
    if tri.domain.kind == "Z":
        return tconv1_test(tri, horizon=horizon, gap_tol=gap_tol)
    if tri.domain.kind == "Z+":
        rep = dimension_balance_test(tri, horizon=horizon, gap_tol=gap_tol)
    else:
        rep = dimension_balance_test_zminus(tri, horizon=horizon,
                                            gap_tol=gap_tol)
    return {
        "d": rep.d, "d1": rep.d1, "d2": rep.d2, "balanced": rep.balanced,
        "domain": rep.domain,
        "triangular_certificate": rep.details.get("triangular_certificate"),
    }


def _run_duality(sys, horizon, gap_tol):
    from .duality import adjoint_time_reversal, transport_projections
    cert, ok = _run_dichotomy(sys, horizon, gap_tol)
    out = {"original": cert}
    if ok is None or sys.is_symbolic():
        out["transported"] = None
        return out
    pair = adjoint_time_reversal(sys)
    tf = transport_projections(ok.projections)
    dual_cert = verify_dichotomy(pair.dual, tf, horizon=horizon,
                                 gap_tol=gap_tol)
    out["transported"] = dual_cert
    if dual_cert.ok:
        out["alpha_match"] = abs(dual_cert.alpha - ok.alpha)
        out["K_ratio"] = dual_cert.K / ok.K
    return out


def analyze(spec_path, config=None) -> AnalysisReport:
    """Run the configured tests against a JSON system spec.

    config keys (all optional): tests (list of perron | dichotomy |
    triangular | duality), domain (override), horizon, gap_tol, seed,
    emit (directory for report JSON and envelope CSVs).
    """
    config = dict(config or {})
    t0 = time.monotonic()
    try:
        text = Path(spec_path).read_text()
    except OSError as exc:
        raise SpecParseError(f"cannot read {spec_path}: {exc}") from exc
    try:
        spec_obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(
            f"{spec_path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if config.get("domain"):
        spec_obj = dict(spec_obj)
        spec_obj["domain"] = config["domain"]
        for key in ("blocks11", "blocks22"):
            if isinstance(spec_obj.get(key), dict):
                spec_obj[key] = dict(spec_obj[key], domain=config["domain"])
    sys = system_from_json(spec_obj)

    horizon = int(config.get("horizon", DEFAULT_HORIZON))
    gap_tol = float(config.get("gap_tol", DEFAULT_GAP_TOL))
    seed = int(config.get("seed", 0))
    tests = list(config.get("tests") or _DEFAULT_TESTS)
    emit = config.get("emit")
    full_config = {
        "tests": tests, "horizon": horizon, "gap_tol": gap_tol,
        "seed": seed, "tolerances": DEFAULT_TOLERANCES,
        "domain": config.get("domain"),
    }

    plain = sys.assembled if isinstance(sys, BlockTriangularSystem) else sys
    verdicts = {}
    csv_paths = []
    cert_for_csv = None
    for test in tests:
        try:
            if test == "perron":
                verdicts[test] = _run_perron(plain, horizon, gap_tol, seed)
            elif test == "dichotomy":
                result, ok = _run_dichotomy(plain, horizon, gap_tol)
                verdicts[test] = result
                cert_for_csv = ok or cert_for_csv
            elif test == "triangular":
                if not isinstance(sys, BlockTriangularSystem):
                    raise SpecParseError(
                        "triangular test needs a block_triangular spec")
                verdicts[test] = _run_triangular(sys, horizon, gap_tol)
            elif test == "duality":
                verdicts[test] = _run_duality(plain, horizon, gap_tol)
            else:
                raise SpecParseError(f"unknown test {test!r}")
        except SpecParseError:
            raise
        except DichoseqError as exc:
            verdicts[test] = {"error": type(exc).__name__,
                              "message": str(exc)}

    report = AnalysisReport(
        digest=_digest(spec_obj),
        config=full_config,
        tests=tests,
        verdicts=verdicts,
        runtime_seconds=time.monotonic() - t0,
        timestamp=time.strftime("%Y-%m-%dT%H:%M:%S"),
    )
    if emit:
        out = Path(emit)
        out.mkdir(parents=True, exist_ok=True)
        if cert_for_csv is not None and cert_for_csv.envelope:
            csv_path = out / f"envelope-{report.digest}.csv"
            write_envelope_csv(cert_for_csv, csv_path)
            csv_paths.append(str(csv_path))
        report.csv_paths = csv_paths
        report.write(out / f"report-{report.digest}.json")
    return report
