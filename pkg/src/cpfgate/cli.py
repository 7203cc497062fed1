"""Command-line reproduction of the gate's figures of merit.

Every subcommand writes one file (or stdout) whose first line records the
config hash and seed. Exit codes: 0 success, 1 usage or config error,
2 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from itertools import product

import numpy as np

from . import config as cfgmod
from .calibration import (FitError, fit_with_restarts, noisy_spectrum, p_up_model,
                          spectrum_from_csv)
from .cavity import (conditional_phase, efficiency_budget, phase_accuracy_bandwidth,
                     pulse_phase_statistics, reflection_coefficient)
from .errors import ErrorParams, average_fidelity, fidelity_budget
from .protocol import GateChannel, Quadrature, trace_protocol
from .qcore import fidelity_pure, ket
from .tomography import (EXPORT_LABELS, POL_LABELS, PSI_PLUS, TOMO_SETTINGS, average_gate_fidelity,
                         bell_fidelity, entangling_capability, ideal_output, linear_inversion,
                         simulate_counts, split_by_outcome, truth_table, CNOT_INPUTS)


class UsageError(Exception):
    pass


def num(x) -> str:
    return format(float(x), ".17g")


class Report:
    """Scalars plus named tables, rendered as CSV or JSON."""

    def __init__(self, command: str, header: str):
        self.command = command
        self.header = header
        self.scalars: dict[str, object] = {}
        self.tables: dict[str, tuple[list[str], list[list]]] = {}

    def table(self, name, columns, rows):
        self.tables[name] = (list(columns), [list(r) for r in rows])

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self._csv()
        if fmt == "json":
            return self._json()
        raise UsageError(f"unknown format {fmt!r}")

    def _csv(self) -> str:
        out = io.StringIO()
        out.write(f"# {self.header}\n")
        out.write("quantity,value\n")
        for k, v in self.scalars.items():
            out.write(f"{k},{_cell(v)}\n")
        for name, (cols, rows) in self.tables.items():
            out.write(f"\n# table: {name}\n")
            out.write(",".join(cols) + "\n")
            for r in rows:
                out.write(",".join(_cell(v) for v in r) + "\n")
        return out.getvalue()

    def _json(self) -> str:
        doc = {"header": self.header, "command": self.command, "scalars": self.scalars,
               "tables": {n: {"columns": c, "rows": r} for n, (c, r) in self.tables.items()}}
        return _dump_json(doc) + "\n"


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return num(v)
    return str(v)


def _dump_json(obj, indent=0) -> str:
    pad = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad} "{k}": {_dump_json(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_dump_json(v) for v in obj) + "]"
        items = [pad + " " + _dump_json(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            return "null"
        return num(obj)
    if obj is None:
        return "null"
    return '"' + str(obj).replace("\\", "\\\\").replace('"', '\\"') + '"'


# -- subcommands -----------------------------------------------------------

def _channel(cfg, mode):
    e = ErrorParams.ideal() if mode == "ideal" else cfg.errors
    return GateChannel(e, Quadrature(cfg.nodes))


def _require_seed(args, why):
    if args.seed is None:
        raise UsageError(f"--seed is required for {why}")
    return args.seed


def cmd_truth_table(args, cfg, rep: Report):
    ch = _channel(cfg, args.mode)
    shots = args.shots
    if shots is not None:
        _require_seed(args, "sampled truth tables")
    table, f = truth_table(ch, shots, args.seed or 0)
    rep.scalars["mode"] = args.mode
    rep.scalars["F_CNOT"] = f
    rep.table("truth_table", ["input", *CNOT_INPUTS],
              [[lbl, *row] for lbl, row in zip(CNOT_INPUTS, table)])


def cmd_bell(args, cfg, rep: Report):
    ch = _channel(cfg, args.mode)
    DD = ket("D", "D").projector()
    rho = ch(DD)
    f_down, f_up = split_by_outcome(ch)
    rep.scalars.update(mode=args.mode, F_psi_plus_exact=bell_fidelity(rho),
                       capability_exact=entangling_capability(rho),
                       F_down_exact=f_down, F_up_exact=f_up)
    W = np.array([ket(*lbl).amplitudes for lbl in EXPORT_LABELS]).T
    if args.exact:
        m = W.conj().T @ rho.matrix @ W
        err_re = err_im = np.zeros((4, 4))
    else:
        seed = _require_seed(args, "sampled tomography (use --exact otherwise)")
        rec = linear_inversion(simulate_counts(rho, TOMO_SETTINGS, args.pairs, seed, "random"))
        m = W.conj().T @ rec.rho_hat.matrix @ W
        err_re, err_im = rec.entry_errors()
        rep.scalars.update(pairs=args.pairs, F_psi_plus=fidelity_pure(rec.rho_hat, PSI_PLUS),
                           F_psi_plus_err=rec.fidelity_error(PSI_PLUS),
                           capability=entangling_capability(rec.rho_hat),
                           physical=rec.rho_hat.physical,
                           entry_error_rms=float(np.sqrt(np.mean(
                               np.concatenate([err_re.ravel(), err_im[~np.eye(4, dtype=bool)]])**2))))
    rows = []
    for i, j in product(range(4), repeat=2):
        rows.append([EXPORT_LABELS[i], EXPORT_LABELS[j], m[i, j].real, m[i, j].imag,
                     err_re[i, j], err_im[i, j]])
    rep.table("density_matrix", ["row", "col", "real", "imag", "err_real", "err_imag"], rows)


def cmd_avg_fidelity(args, cfg, rep: Report):
    ch = _channel(cfg, args.mode)
    rows = []
    for a, b in product(POL_LABELS, repeat=2):
        rows.append([a + b, fidelity_pure(ch(ket(a, b).projector()), ideal_output(a, b))])
    rep.scalars["mode"] = args.mode
    rep.scalars["F_avg_exact"] = float(np.mean([r[1] for r in rows]))
    if not args.exact:
        seed = _require_seed(args, "sampled average fidelity (use --exact otherwise)")
        f, err = average_gate_fidelity(ch, args.pairs_per_state, seed)
        rep.scalars.update(pairs_per_state=args.pairs_per_state, F_avg_sampled=f,
                           F_avg_sampled_err=err)
    rep.table("state_fidelities", ["input", "fidelity"], rows)


def cmd_budget(args, cfg, rep: Report):
    e = ErrorParams.ideal() if args.mode == "ideal" else cfg.errors
    effects = fidelity_budget(e, cfg.nodes)
    rep.scalars["mode"] = args.mode
    rep.scalars["F_avg_all_effects"] = average_fidelity(e, cfg.nodes)
    for k in ("sigma_dphi", "sigma_bandwidth", "xi", "p_prep", "p_det", "p_dark", "p_mode",
              "dephase", "multi_photon_weight", "p_optics"):
        rep.scalars[k] = float(getattr(e, k))
    rep.scalars["correlated_dphi"] = e.correlated_dphi
    rep.table("budget", ["effect", "reduction_pp"], [[b.effect, b.reduction] for b in effects])


def cmd_efficiency(args, cfg, rep: Report):
    per, pair = efficiency_budget(cfg.chain)
    rep.scalars.update(t_fiber=cfg.chain.t_fiber, r_cavity=cfg.chain.r_cavity,
                       t_optics=cfg.chain.t_optics, per_photon=per, pair=pair)


def cmd_phase_spectrum(args, cfg, rep: Report):
    p = cfg.cavity
    tol = args.tol_pi * np.pi
    mean, std = pulse_phase_statistics(p, cfg.spectrum_fwhm)
    rep.scalars.update(kappa_r_mhz=p.kappa_r, cooperativity=p.cooperativity,
                       tol_rad=tol, bandwidth_mhz=phase_accuracy_bandwidth(p, tol),
                       spectrum_fwhm_mhz=cfg.spectrum_fwhm, phase_mean=mean, phase_std=std)
    rows = []
    for d in np.linspace(-args.span, args.span, args.points):
        rc = reflection_coefficient(p, d, True)
        re = reflection_coefficient(p, d, False)
        rows.append([d, rc.r.real, rc.r.imag, rc.reflectivity, re.r.real, re.r.imag,
                     re.reflectivity, conditional_phase(p, d)])
    rep.table("reflection", ["delta_mhz", "r_coupled_re", "r_coupled_im", "R_coupled",
                             "r_empty_re", "r_empty_im", "R_empty", "conditional_phase"], rows)


def cmd_ramsey(args, cfg, rep: Report):
    truth = cfg.ramsey
    if args.synthetic:
        seed = _require_seed(args, "synthetic spectra")
        deltas = np.linspace(-args.span, args.span, args.points)
        data = noisy_spectrum(truth, deltas, args.shots, seed)
    elif args.data:
        with open(args.data) as fh:
            data = spectrum_from_csv(fh.read())
    else:
        raise UsageError("ramsey needs --data PATH or --synthetic")
    guess = truth.__class__(rabi=args.guess_rabi, delta_offset=0.0,
                            light_shift=args.guess_light_shift, pulse_len=truth.pulse_len,
                            gaps=truth.gaps)
    fit = fit_with_restarts(data, guess, max_nfev=args.max_nfev)
    rep.scalars.update(rabi_khz=fit.params.rabi, rabi_err=fit.stderr["rabi"],
                       delta_offset_khz=fit.params.delta_offset,
                       delta_offset_err=fit.stderr["delta_offset"],
                       light_shift_khz=fit.params.light_shift,
                       light_shift_err=fit.stderr["light_shift"], chi2=fit.chi2,
                       points=int(data.detunings.size))
    model = p_up_model(fit.params, data.detunings)
    sig = data.sigma if data.sigma is not None else np.full(data.p_up.shape, np.nan)
    rep.table("spectrum", ["delta_khz", "p_up", "sigma", "p_up_fit"],
              [[d, p, s, m] for d, p, s, m in zip(data.detunings, data.p_up, sig, model)])


def cmd_trace(args, cfg, rep: Report):
    state = ket(*args.input)
    tr = trace_protocol(state)
    rep.scalars["input"] = args.input
    rep.scalars["p_up"], rep.scalars["p_down"] = tr.outcome_probs
    rows = []
    for step, (label, rho) in enumerate(tr.snapshots):
        diag = np.real(np.diag(rho.matrix))
        rows.append([step, label, *diag])
    cols = ["step", "label"] + ["".join(s) for s in product("ud", "RL", "RL")]
    rep.table("populations", cols, rows)
    rep.trace_json = tr.to_json()


def cmd_calibrate(args, cfg, rep: Report):
    new = cfgmod.build_reference_config(args.loss_convention, args.correlated, cfg.nodes)
    if args.write:
        cfgmod.save(new, args.write, header="calibrated by cpfgate calibrate")
    for key, val in cfgmod.parse_text(cfgmod.to_text(new)).items():
        rep.scalars[key] = val


COMMANDS = {
    "truth-table": cmd_truth_table,
    "bell": cmd_bell,
    "avg-fidelity": cmd_avg_fidelity,
    "budget": cmd_budget,
    "efficiency": cmd_efficiency,
    "phase-spectrum": cmd_phase_spectrum,
    "ramsey": cmd_ramsey,
    "trace": cmd_trace,
    "calibrate": cmd_calibrate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value parameter file (default: packaged reference config)")
    common.add_argument("--seed", type=int, help="RNG seed; required by sampling subcommands")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--mode", choices=("ideal", "error"), default="error")

    ap = argparse.ArgumentParser(prog="cpfgate", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("truth-table", parents=[common], help="CNOT truth table and F_CNOT")
    p.add_argument("--shots", type=int, help="pairs per input (default: exact probabilities)")

    p = sub.add_parser("bell", parents=[common], help="Bell state from |DD> via tomography")
    p.add_argument("--pairs", type=int, default=1378)
    p.add_argument("--exact", action="store_true", help="skip count sampling")

    p = sub.add_parser("avg-fidelity", parents=[common], help="36-state average gate fidelity")
    p.add_argument("--pairs-per-state", type=int, default=80)
    p.add_argument("--exact", action="store_true", help="exact mode only")

    sub.add_parser("budget", parents=[common], help="stand-alone fidelity reductions")
    sub.add_parser("efficiency", parents=[common], help="transmission chain")

    p = sub.add_parser("phase-spectrum", parents=[common], help="reflection and conditional phase")
    p.add_argument("--span", type=float, default=3.0, help="detuning half-range in MHz")
    p.add_argument("--points", type=int, default=121)
    p.add_argument("--tol-pi", type=float, default=0.1, help="phase tolerance in units of pi")

    p = sub.add_parser("ramsey", parents=[common], help="fit a three-pulse Ramsey spectrum")
    p.add_argument("--data", help="CSV with columns delta_khz, p_up, sigma")
    p.add_argument("--synthetic", action="store_true", help="simulate data from the config")
    p.add_argument("--shots", type=int, default=500)
    p.add_argument("--points", type=int, default=251)
    p.add_argument("--span", type=float, default=1250.0, help="detuning half-range in kHz")
    p.add_argument("--guess-rabi", type=float, default=250.0)
    p.add_argument("--guess-light-shift", type=float, default=40.0)
    p.add_argument("--max-nfev", type=int, default=2000, help="iteration cap per fit start")

    p = sub.add_parser("trace", parents=[common], help="step-by-step ideal protocol")
    p.add_argument("--input", default="DD", help="two polarization labels, e.g. DD or LR")

    p = sub.add_parser("calibrate", parents=[common], help="re-derive the calibrated parameters")
    p.add_argument("--loss-convention", default="loss-before-gate",
                   choices=("loss-before-gate", "loss-after-gate"))
    p.add_argument("--correlated", action="store_true", help="same dphi at both reflections")
    p.add_argument("--write", help="also write the result as a config file")
    return ap


def _load_config(path):
    if path is None:
        return cfgmod.reference_config()
    try:
        return cfgmod.load(path)
    except FileNotFoundError as exc:
        raise UsageError(f"config file not found: {path}") from exc
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad config {path}: {exc}") from exc


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        cfg = _load_config(args.config)
        if args.command == "trace" and (len(args.input) != 2 or
                                        any(c not in POL_LABELS for c in args.input)):
            raise UsageError(f"--input must be two labels from {''.join(POL_LABELS)}")
        header = (f"cpfgate {args.command} config_sha256={cfgmod.config_hash(cfg)} "
                  f"seed={args.seed if args.seed is not None else 'none'}")
        rep = Report(args.command, header)
        COMMANDS[args.command](args, cfg, rep)
        text = rep.render(args.format)
        if args.command == "trace" and args.format == "json":
            text = _dump_json({"header": header, "trace": json.loads(rep.trace_json)}) + "\n"
    except UsageError as exc:
        print(f"cpfgate: error: {exc}", file=sys.stderr)
        return 1
    except (FitError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"cpfgate: numerical failure: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
