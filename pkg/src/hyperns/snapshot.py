"""Snapshot persistence and run manifests.

Snapshot layout (all integers and floats little-endian):

    bytes 0..3   magic "HYPF"
    bytes 4..7   format version (uint32)
    bytes 8..11  header length H (uint32)
    H bytes      UTF-8 key=value header lines
    payload      complex coefficients as float64 (re, im) pairs,
                 components in order, modes in row-major kappa order
"""
from __future__ import annotations

import datetime
import json
import struct
from pathlib import Path

import numpy as np

from . import __version__
from .config import SimConfig, canonical_text, config_hash
from .lattice import DIV_TOL, SpectralVelocity, WavenumberLattice

MAGIC = b"HYPF"
VERSION = 1


class SnapshotError(ValueError):
    """Corrupt or invalid snapshot file; names the violated invariant."""


def write_snapshot(u: SpectralVelocity, path, nu: float = 0.0,
                   eps: float = 0.0, symbol_spec: str = "") -> None:
    lat = u.lattice
    header = (
        f"dim={lat.dim}\n"
        f"n_per_dim={lat.n_per_dim}\n"
        f"box_length={lat.box_length:.17g}\n"
        f"t={u.t:.17g}\n"
        f"nu={nu:.17g}\n"
        f"eps={eps:.17g}\n"
        f"symbol={symbol_spec}\n"
    ).encode("utf-8")
    payload = np.ascontiguousarray(u.coeffs.astype("<c16")).tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(payload)


def read_snapshot(path):
    """Read and validate a snapshot; returns (SpectralVelocity, header dict)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12 or blob[:4] != MAGIC:
        raise SnapshotError(f"{path}: missing HYPF magic tag")
    version, = struct.unpack_from("<I", blob, 4)
    if version != VERSION:
        raise SnapshotError(f"{path}: unsupported format version {version}")
    hlen, = struct.unpack_from("<I", blob, 8)
    if len(blob) < 12 + hlen:
        raise SnapshotError(f"{path}: truncated header")
    header = {}
    for line in blob[12:12 + hlen].decode("utf-8").splitlines():
        key, _, val = line.partition("=")
        header[key] = val
    try:
        dim = int(header["dim"])
        n = int(header["n_per_dim"])
        box = float(header["box_length"])
        t = float(header["t"])
    except (KeyError, ValueError) as err:
        raise SnapshotError(f"{path}: malformed header ({err})") from None
    lat = WavenumberLattice(n, dim, box)
    expected = dim * n ** dim * 16
    payload = blob[12 + hlen:]
    if len(payload) != expected:
        raise SnapshotError(
            f"{path}: truncated payload ({len(payload)} of {expected} bytes)")
    coeffs = np.frombuffer(payload, dtype="<c16").astype(np.complex128)
    coeffs = coeffs.reshape((dim,) + (n,) * dim)
    u = SpectralVelocity(lat, coeffs, t)
    defect = u.hermitian_defect()
    if defect > 1e-12:
        raise SnapshotError(
            f"{path}: Hermitian symmetry violated ({defect:.3e} relative)")
    div = u.divergence_max()
    if div > DIV_TOL:
        raise SnapshotError(
            f"{path}: divergence tolerance violated ({div:.3e} relative)")
    return u, header


def write_manifest(run_dir: Path, cfg: SimConfig) -> Path:
    """Write the pre-run manifest; finalized later by finalize_manifest."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "config": canonical_text(cfg),
        "code_version": __version__,
        "seed": cfg.seed,
        "config_hash": config_hash(cfg),
        "started": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "ended": None,
        "files": [],
        "finalized": False,
    }
    path = run_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def finalize_manifest(run_dir: Path, files: list) -> None:
    path = Path(run_dir) / "manifest.json"
    manifest = json.loads(path.read_text())
    manifest["ended"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    manifest["files"] = sorted(str(f) for f in files)
    manifest["finalized"] = True
    path.write_text(json.dumps(manifest, indent=2) + "\n")
