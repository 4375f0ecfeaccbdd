"""Output formats: run manifests, metadata-headed CSV, raw binary arrays.

Text outputs are CSV with '#'-prefixed key=value metadata lines.  Large
grids additionally go out as raw little-endian float64 with a JSON
sidecar describing shape, axes and units.  All numeric formatting is
full-precision and deterministic, so byte-identical reruns are possible.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .grid import TRANSFORM_CONVENTION
from .observables import NoiseReport


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(raw_config: dict) -> str:
    return hashlib.sha256(canonical_json(raw_config).encode()).hexdigest()


@dataclass
class RunManifest:
    config_hash: str
    master_seed: int
    grid: dict
    software_version: str = __version__
    transform: str = TRANSFORM_CONVENTION
    wall_clock_s: float = 0.0
    diverged_trajectories: int = 0
    extra: dict = field(default_factory=dict)

    def write(self, out_dir: str) -> str:
        path = os.path.join(out_dir, "manifest.json")
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=1, sort_keys=True)
            fh.write("\n")
        return path


def read_manifest(out_dir: str) -> dict:
    with open(os.path.join(out_dir, "manifest.json")) as fh:
        return json.load(fh)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: str, columns: dict, metadata: dict) -> str:
    """Columns is an ordered name -> 1-d array mapping."""
    names = list(columns)
    arrays = [np.asarray(columns[k]) for k in names]
    length = len(arrays[0])
    if any(len(a) != length for a in arrays):
        raise ValueError("CSV columns must have equal lengths")
    with open(path, "w", newline="\n") as fh:
        for key in sorted(metadata):
            fh.write(f"# {key}={metadata[key]}\n")
        fh.write(",".join(names) + "\n")
        for i in range(length):
            fh.write(",".join(_fmt(a[i]) for a in arrays) + "\n")
    return path


def write_binary(path: str, array: np.ndarray, sidecar: dict) -> str:
    """Raw little-endian float64 dump plus a JSON descriptor next to it.

    Complex arrays are stored as interleaved (real, imag) float64 pairs.
    """
    arr = np.asarray(array)
    if np.iscomplexobj(arr):
        flat = np.empty(arr.shape + (2,), dtype="<f8")
        flat[..., 0] = arr.real
        flat[..., 1] = arr.imag
        stored_shape = list(flat.shape)
        kind = "complex128-as-f8-pairs"
        flat.tofile(path)
    else:
        flat = arr.astype("<f8")
        stored_shape = list(flat.shape)
        kind = "float64"
        flat.tofile(path)
    desc = {
        "dtype": "<f8",
        "kind": kind,
        "shape": stored_shape,
        "byte_order": "little-endian",
        "transform": TRANSFORM_CONVENTION,
        "software_version": __version__,
    }
    desc.update(sidecar)
    with open(path + ".json", "w") as fh:
        json.dump(desc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def read_binary(path: str) -> np.ndarray:
    with open(path + ".json") as fh:
        desc = json.load(fh)
    raw = np.fromfile(path, dtype="<f8").reshape(desc["shape"])
    if desc["kind"] == "complex128-as-f8-pairs":
        return raw[..., 0] + 1j * raw[..., 1]
    return raw


def report_metadata(report: NoiseReport, extra: dict | None = None) -> dict:
    meta = {
        "samples": report.samples,
        "diverged": report.diverged,
        "n_batches": report.n_batches,
        "n_bar": report.n_bar,
        "frequency_units": "1/t0 (dimensionless ordinary frequency)",
        "shot_noise_level": "0 dB (normal-ordered zero level)",
    }
    meta.update(report.metadata)
    if extra:
        meta.update(extra)
    return meta


def write_report(out_dir: str, report: NoiseReport, basename: str = "report") -> list:
    """NoiseReport -> <basename>.csv (spectra) + <basename>.json (scalars)."""
    os.makedirs(out_dir, exist_ok=True)
    meta = report_metadata(report)
    peak = float(np.max(np.abs(report.var_spectrum))) or 1.0
    csv_path = write_csv(
        os.path.join(out_dir, f"{basename}.csv"),
        {
            "nu": report.nu,
            "mean_spectrum": report.mean_spectrum,
            "mean_stderr": report.mean_stderr,
            "var_spectrum": report.var_spectrum,
            "var_stderr": report.var_stderr,
            "var_scaled": report.var_spectrum / peak,
        },
        meta,
    )
    payload = {
        "metadata": meta,
        "filtered": [
            {
                "cutoff": fs.cutoff,
                "center": fs.center,
                "mean_dimensionless": fs.mean_dimensionless,
                "var_dimensionless": fs.var_dimensionless,
                "mean_photons": fs.mean_photons,
                "mean_stderr": fs.mean_stderr,
                "fano_db": None if fs.fano_db != fs.fano_db else fs.fano_db,
                "fano_stderr_db": None
                if fs.fano_stderr_db != fs.fano_stderr_db
                else fs.fano_stderr_db,
                "clamped": fs.clamped,
                "degenerate": fs.degenerate,
                "imag_z": fs.imag_z,
            }
            for fs in report.filtered
        ],
    }
    json_path = os.path.join(out_dir, f"{basename}.json")
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return [csv_path, json_path]


def write_map(out_dir: str, name: str, nu, xi, var, var_stderr, mean, metadata: dict) -> list:
    """Gridded dataset -> raw binary + sidecar + per-plane CSV slices."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for label, arr in (("var", var), ("var_stderr", var_stderr), ("mean", mean)):
        p = os.path.join(out_dir, f"{name}_{label}.f64")
        write_binary(
            p,
            np.asarray(arr),
            {
                "axes": ["xi", "nu"],
                "xi": list(map(float, xi)),
                "nu_first": float(nu[0]),
                "nu_step": float(nu[1] - nu[0]),
                "quantity": label,
                **metadata,
            },
        )
        paths.append(p)
    for i, x in enumerate(xi):
        paths.append(
            write_csv(
                os.path.join(out_dir, f"{name}_xi{float(x):.3f}.csv"),
                {
                    "nu": nu,
                    "var_spectrum": np.asarray(var)[i],
                    "var_stderr": np.asarray(var_stderr)[i],
                    "mean_spectrum": np.asarray(mean)[i],
                },
                {**metadata, "xi": float(x)},
            )
        )
    return paths


def start_clock() -> float:
    return time.monotonic()


def elapsed(t0: float) -> float:
    return time.monotonic() - t0
