"""CSV and design-record serialisation."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import tomlkit

from .errors import ValidationError
from .greens import UniaxialLayer, WaimStack

MAP_HEADER = ["theta_deg", "phi_deg", "freq_hz", "atc", "arl_db", "re_z", "im_z"]
CUTS_HEADER = MAP_HEADER + ["variant"]
TEXT_COLUMNS = {"variant"}
TRACE_HEADER = ["iteration", "best_cost", "best_cost_normalized", "evals", "elapsed_s"]


def _num(x) -> str:
    return repr(float(x))


def _arl_db(atc, arl_cap):
    g2 = np.clip(1.0 - np.asarray(atc, float), 0.0, None)
    with np.errstate(divide="ignore"):
        arl = np.where(g2 > 0, 1.0 / np.where(g2 > 0, g2, 1.0), np.inf)
    return 10 * np.log10(np.minimum(arl, arl_cap))


def _open(path: Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path.open("w", newline="")


def write_atc_map(result, path, arl_cap: float = 1e6) -> Path:
    """One row per (frequency, theta, phi) node of a scan result."""
    db = 10 * np.log10(np.asarray(result.arl, float))
    with _open(path) as fh:
        w = csv.writer(fh)
        w.writerow(MAP_HEADER)
        for fi, f in enumerate(result.freqs):
            for ti, t in enumerate(result.thetas):
                for pi, p in enumerate(result.phis):
                    z = result.Z[fi, ti, pi]
                    w.writerow([_num(t), _num(p), _num(f), _num(result.atc[fi, ti, pi]), _num(db[fi, ti, pi]),
                                _num(z.real), _num(z.imag)])
    return Path(path)


def write_cuts(variants: dict, f: float, path, arl_cap: float = 1e6) -> Path:
    """``variants`` maps a label to ``{phi: (thetas, atc, Z)}``."""
    with _open(path) as fh:
        w = csv.writer(fh)
        w.writerow(CUTS_HEADER)
        for label, cuts in variants.items():
            for phi, (th, atc, z) in cuts.items():
                db = _arl_db(atc, arl_cap)
                for i in range(len(th)):
                    w.writerow([_num(th[i]), _num(phi), _num(f), _num(atc[i]), _num(db[i]),
                                _num(z[i].real), _num(z[i].imag), label])
    return Path(path)


def read_csv(path) -> tuple[list[str], list[dict]]:
    """Parse an emitted CSV; numeric columns become floats."""
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = []
        for line in r:
            if len(line) != len(header):
                raise ValidationError([f"{path}: row has {len(line)} fields, expected {len(header)}"])
            rows.append({k: (v if k in TEXT_COLUMNS else float(v)) for k, v in zip(header, line)})
    return header, rows


def write_trace(trace, path) -> Path:
    with _open(path) as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_HEADER)
        for k in range(len(trace)):
            w.writerow([k, _num(trace.best_cost[k]), _num(trace.best_cost_normalized[k]), trace.evals[k],
                        _num(trace.elapsed[k])])
    return Path(path)


@dataclass
class DesignRecord:
    """Synthesised superstrate plus figures of merit and provenance."""

    layers: list[dict]
    anisotropic: bool
    delta_psi: float
    Psi: float
    Psi_norm: float
    fingerprint: str
    seed: int
    timing: dict = field(default_factory=dict)
    iterations: int = 0
    stagnated: bool = False

    @classmethod
    def from_result(cls, res, fingerprint: str, seed: int) -> "DesignRecord":
        layers = [{"t": la.t, "eps_xx": la.eps_xx, "eps_yy": la.eps_yy, "eps_zz": la.eps_zz}
                  for la in res.stack.layers]
        return cls(layers, res.encoding.anisotropic, float(res.report.delta_psi), float(res.report.Psi),
                   float(res.report.Psi_norm), fingerprint, seed, asdict(res.timing), res.iterations,
                   res.stagnated)

    @property
    def stack(self) -> WaimStack:
        return WaimStack(tuple(UniaxialLayer(d["t"], d["eps_xx"], d["eps_yy"], d["eps_zz"]) for d in self.layers))


def design_to_text(rec: DesignRecord) -> str:
    doc = tomlkit.document()
    doc.add(tomlkit.comment("Synthesised superstrate. Layer 1 touches the substrate; thickness in metres."))
    doc["fingerprint"] = rec.fingerprint
    doc["seed"] = rec.seed
    doc["anisotropic"] = rec.anisotropic
    doc["delta_psi"] = rec.delta_psi
    doc["Psi"] = rec.Psi
    doc["Psi_norm"] = rec.Psi_norm
    doc["iterations"] = rec.iterations
    doc["stagnated"] = rec.stagnated
    doc["timing"] = {k: float(v) for k, v in rec.timing.items()}
    aot = tomlkit.aot()
    for d in rec.layers:
        aot.append(tomlkit.item({k: float(v) for k, v in d.items()}))
    doc["layer"] = aot
    return tomlkit.dumps(doc)


def write_design(rec: DesignRecord, path) -> Path:
    with _open(path) as fh:
        fh.write(design_to_text(rec))
    return Path(path)


def read_design(path) -> DesignRecord:
    doc = tomlkit.parse(Path(path).read_text()).unwrap()
    return DesignRecord(doc["layer"], doc["anisotropic"], doc["delta_psi"], doc["Psi"], doc["Psi_norm"],
                        doc["fingerprint"], doc["seed"], doc.get("timing", {}), doc.get("iterations", 0),
                        doc.get("stagnated", False))
