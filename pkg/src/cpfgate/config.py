"""Flat ``key = value`` configuration files.

One file holds every physical parameter: cavity, efficiency chain, pulse
statistics, the calibrated error model and the Ramsey sequence. Lines
starting with ``#`` are comments.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .calibration import RamseyParams
from .cavity import CavityParams, EfficiencyChain, pulse_phase_statistics, solve_kappa_r
from .errors import ErrorParams, calibrate
from .photonsource import LOSS_BEFORE_GATE, PulseStats, multi_photon_weight

REFERENCE_CONFIG = "reference.cfg"

# file key -> (section, attribute)
_KEYS = {
    "g_mhz": ("cavity", "g"),
    "kappa_mhz": ("cavity", "kappa"),
    "kappa_r_mhz": ("cavity", "kappa_r"),
    "gamma_mhz": ("cavity", "gamma"),
    "delta_pol_khz": ("cavity", "delta_pol"),
    "t_fiber": ("chain", "t_fiber"),
    "r_cavity": ("chain", "r_cavity"),
    "t_optics": ("chain", "t_optics"),
    "nbar": ("pulse", "nbar"),
    "eta_chain": ("pulse", "eta_chain"),
    "loss_convention": ("top", "loss_convention"),
    "spectrum_fwhm_mhz": ("top", "spectrum_fwhm"),
    "quadrature_nodes": ("top", "nodes"),
    "sigma_dphi": ("errors", "sigma_dphi"),
    "sigma_bandwidth": ("errors", "sigma_bandwidth"),
    "xi": ("errors", "xi"),
    "p_prep": ("errors", "p_prep"),
    "p_det": ("errors", "p_det"),
    "p_dark": ("errors", "p_dark"),
    "p_mode": ("errors", "p_mode"),
    "dephase": ("errors", "dephase"),
    "multi_photon_weight": ("errors", "multi_photon_weight"),
    "p_optics": ("errors", "p_optics"),
    "correlated_dphi": ("errors", "correlated_dphi"),
    "rabi_khz": ("ramsey", "rabi"),
    "delta_offset_khz": ("ramsey", "delta_offset"),
    "light_shift_khz": ("ramsey", "light_shift"),
    "pulse_len_us": ("ramsey", "pulse_len"),
    "gap1_us": ("ramsey", "gap1"),
    "gap2_us": ("ramsey", "gap2"),
}


@dataclass(frozen=True)
class GateConfig:
    cavity: CavityParams = field(default_factory=CavityParams)
    chain: EfficiencyChain = field(default_factory=EfficiencyChain)
    pulse: PulseStats = field(default_factory=PulseStats)
    errors: ErrorParams = field(default_factory=ErrorParams)
    ramsey: RamseyParams = field(default_factory=RamseyParams)
    loss_convention: str = LOSS_BEFORE_GATE
    spectrum_fwhm: float = 0.7
    nodes: int = 16


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def _parse(v: str):
    low = v.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v


def parse_text(text: str) -> dict:
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected 'key = value', got {raw!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        if k not in _KEYS:
            raise ValueError(f"line {n}: unknown key {k!r}")
        out[k] = _parse(v)
    return out


def from_mapping(values: dict) -> GateConfig:
    sections = {"cavity": {}, "chain": {}, "pulse": {}, "errors": {}, "ramsey": {}, "top": {}}
    for k, v in values.items():
        sec, attr = _KEYS[k]
        sections[sec][attr] = v
    r = sections["ramsey"]
    if "gap1" in r or "gap2" in r:
        default = RamseyParams().gaps
        r["gaps"] = (r.pop("gap1", default[0]), r.pop("gap2", default[1]))
    floaty = {s: {k: (float(v) if isinstance(v, int) and not isinstance(v, bool) else v)
                  for k, v in d.items()} for s, d in sections.items() if s != "top"}
    top = sections["top"]
    return GateConfig(
        cavity=CavityParams(**floaty["cavity"]),
        chain=EfficiencyChain(**floaty["chain"]),
        pulse=PulseStats(**floaty["pulse"]),
        errors=ErrorParams(**floaty["errors"]),
        ramsey=RamseyParams(**floaty["ramsey"]),
        loss_convention=top.get("loss_convention", LOSS_BEFORE_GATE),
        spectrum_fwhm=float(top.get("spectrum_fwhm", 0.7)),
        nodes=int(top.get("nodes", 16)),
    )


def to_text(cfg: GateConfig, header: str = "") -> str:
    lines = [f"# {ln}" for ln in header.splitlines()]
    objs = {"cavity": cfg.cavity, "chain": cfg.chain, "pulse": cfg.pulse,
            "errors": cfg.errors, "ramsey": cfg.ramsey}
    for key, (sec, attr) in _KEYS.items():
        if sec == "top":
            v = {"loss_convention": cfg.loss_convention, "spectrum_fwhm": cfg.spectrum_fwhm,
                 "nodes": cfg.nodes}[attr]
        elif attr in ("gap1", "gap2"):
            v = cfg.ramsey.gaps[0 if attr == "gap1" else 1]
        else:
            v = getattr(objs[sec], attr)
        lines.append(f"{key} = {_fmt(v)}")
    return "\n".join(lines) + "\n"


def load(path) -> GateConfig:
    return from_mapping(parse_text(Path(path).read_text()))


def save(cfg: GateConfig, path, header: str = "") -> None:
    Path(path).write_text(to_text(cfg, header))


def config_hash(cfg: GateConfig) -> str:
    return hashlib.sha256(to_text(cfg).encode()).hexdigest()[:16]


def reference_config() -> GateConfig:
    """The persisted reference calibration shipped with the package."""
    text = resources.files("cpfgate").joinpath("data", REFERENCE_CONFIG).read_text()
    return from_mapping(parse_text(text))


def build_reference_config(loss_convention: str = LOSS_BEFORE_GATE, correlated_dphi: bool = False,
                           nodes: int = 16) -> GateConfig:
    """Derive every model parameter from the reference figures.

    The outcoupling rate is solved from the 67 % cavity reflectivity; the
    bandwidth phase spread comes from the 0.7 MHz photon spectrum; the
    two-photon weight from nbar; the remaining knobs from the budget figures.
    """
    cavity = solve_kappa_r(CavityParams(), EfficiencyChain().r_cavity)
    pulse = PulseStats()
    sigma_bw = pulse_phase_statistics(cavity, 0.7)[1]
    w = multi_photon_weight(pulse, loss_convention)
    errors = calibrate(sigma_bw, w, correlated_dphi=correlated_dphi, nodes=nodes)
    return GateConfig(cavity=cavity, chain=EfficiencyChain(), pulse=pulse, errors=errors,
                      ramsey=RamseyParams(), loss_convention=loss_convention,
                      spectrum_fwhm=0.7, nodes=nodes)
