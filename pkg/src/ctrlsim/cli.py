"""Command-line front end: run schemes, run the search, emit files.

Commands
--------
run
    Run a preset or a scheme/sequence file, compare against the scheme's
    analytic target state, write a JSON report.  Exit 0 when the
    fidelity reaches 1 - tolerance, 1 on fidelity failure, 2 on bad
    input.  Monitored presets report the mixed-state fidelity without a
    threshold.
nogo
    Run the fixed-circuit search and write the search report.
emit-scheme
    Write a preset's scheme (photonic) or sequence (ion) file.

Reports never contain wall-clock data, and all randomness flows from
the ``--seed`` flag plus gate-spec seeds, so identical invocations
produce byte-identical reports.  Files are written via a temporary
name and an atomic rename, so a failed run never leaves a partial
report behind.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__, ion, nogo, photonic
from .hilbert import Operator, StateVector, fidelity_mixed, fidelity_pure, haar_unitary

_PAULI = {
    "i": np.eye(2),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "s": np.diag([1, 1j]),
    "t": np.diag([1, np.exp(1j * np.pi / 4)]),
}

PHOTONIC_PRESETS = ("ctrl-u", "ctrl-u-monitored", "ctrl-switch")
ION_PRESETS = ("ion-ctrl-u", "ion-ctrl-switch")


def parse_gate_spec(text: str, dim: int = 2) -> Operator:
    """Parse a gate description into a unitary operator.

    Accepted forms: the named gates ``i x y z h s t``, rotations
    ``rx:θ ry:θ rz:θ`` (radians), ``haar:seed`` (deterministic in the
    seed, dimension ``dim``), and ``matrix:[[re,im],...]`` with the
    entries row-major.
    """
    text = text.strip()
    name, _, arg = text.partition(":")
    name = name.lower()
    if name in _PAULI and not arg:
        return Operator(_PAULI[name])
    if name in ("rx", "ry", "rz"):
        try:
            theta = float(arg)
        except ValueError:
            raise ValueError(f"malformed angle in gate spec {text!r}") from None
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        if name == "rx":
            return Operator([[c, -1j * s], [-1j * s, c]])
        if name == "ry":
            return Operator([[c, -s], [s, c]])
        return Operator(np.diag([np.exp(-1j * theta / 2), np.exp(1j * theta / 2)]))
    if name == "haar":
        try:
            seed = int(arg)
        except ValueError:
            raise ValueError(f"malformed seed in gate spec {text!r}") from None
        return haar_unitary(dim, np.random.default_rng(seed))
    if name == "matrix":
        try:
            pairs = json.loads(arg)
            flat = [complex(re, im) for re, im in pairs]
        except (ValueError, TypeError) as exc:
            raise ValueError(f"malformed matrix literal {text!r}: {exc}") from None
        d = int(round(np.sqrt(len(flat))))
        if d * d != len(flat):
            raise ValueError(f"matrix literal needs a square entry count, got {len(flat)}")
        m = np.array(flat, dtype=complex).reshape(d, d)
        try:
            return Operator(m, tol=1e-8)
        except ValueError as exc:
            raise ValueError(f"matrix literal is not unitary: {exc}") from None
    raise ValueError(f"unknown gate spec {text!r}")


def _complex_pairs(values: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in values]


def _matrix_pairs(m: np.ndarray) -> list[list[list[float]]]:
    return [_complex_pairs(row) for row in m]


def _write_json(payload: dict, out_path: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out_path is None:
        print(text)
        return
    directory = os.path.dirname(os.path.abspath(out_path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text + "\n")
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _control_amps(args) -> tuple[complex, complex]:
    alpha = complex(args.alpha)
    beta = complex(args.beta) * np.exp(1j * args.beta_phase)
    norm = np.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    if norm == 0:
        raise ValueError("alpha and beta cannot both be zero")
    if abs(norm - 1.0) > 1e-12:
        print(f"warning: normalizing control amplitudes by 1/{norm:.6g}", file=sys.stderr)
        alpha, beta = alpha / norm, beta / norm
    return alpha, beta


def _parse_psi(text: str | None, dim: int) -> np.ndarray:
    if text is None:
        psi = np.zeros(dim, dtype=complex)
        psi[0] = 1.0
        return psi
    values = [float(v) for v in text.split(",")]
    if len(values) != 2 * dim:
        raise ValueError(f"--psi expects {2 * dim} numbers (re,im per amplitude)")
    psi = np.array(
        [complex(values[2 * k], values[2 * k + 1]) for k in range(dim)], dtype=complex
    )
    norm = float(np.linalg.norm(psi))
    if norm == 0:
        raise ValueError("--psi cannot be the zero vector")
    if abs(norm - 1.0) > 1e-12:
        print(f"warning: normalizing system state by 1/{norm:.6g}", file=sys.stderr)
        psi = psi / norm
    return psi


def _collect_bindings(args, slots, dim: int) -> dict[str, Operator]:
    """Map slot names to parsed gates from --u/--uf/--ug/--bind."""
    specs: dict[str, str] = {}
    for entry in args.bind or []:
        slot, eq, spec = entry.partition("=")
        if not eq:
            raise ValueError(f"--bind expects SLOT=SPEC, got {entry!r}")
        specs[slot] = spec
    sugar = {"U": args.u, "Uf": args.uf, "Ug": args.ug}
    for slot, spec in sugar.items():
        if spec is not None:
            specs[slot] = spec
    missing = set(slots) - set(specs)
    if missing:
        raise ValueError(f"missing gate bindings for slots: {sorted(missing)}")
    return {slot: parse_gate_spec(specs[slot], dim) for slot in slots}


def _photonic_target(scheme: str, net, alpha, beta, psi, bindings) -> StateVector:
    if scheme == "ctrl-switch":
        uf, ug = bindings["Uf"].entries, bindings["Ug"].entries
        block = np.concatenate([alpha * (ug @ uf @ psi), beta * (uf @ ug @ psi)])
    else:
        u = bindings["U"].entries
        block = np.concatenate([alpha * psi, beta * (u @ psi)])
    return photonic.place_on_path(net.space, net.output_path, block)


def _ion_target(scheme: str, space, alpha, beta, psi, bindings) -> StateVector:
    amps = np.zeros(space.total_dim, dtype=complex)
    if scheme == "ion-ctrl-switch":
        uf, ug = bindings["Uf"].entries, bindings["Ug"].entries
        b_g, b_e = alpha * (ug @ uf @ psi), beta * (uf @ ug @ psi)
    else:
        u = bindings["U"].entries
        b_g, b_e = alpha * psi, beta * (u @ psi)
    for lv2 in (ion.G, ion.E):
        amps[space.flat(ion.G, lv2, 0)] = b_g[lv2]
        amps[space.flat(ion.E, lv2, 0)] = b_e[lv2]
    return StateVector(space.hilbert, amps)


def _run_photonic(args, net, scheme_id: str, known_preset: str | None) -> tuple[dict, int]:
    dim = net.space.internal_dim
    bindings = _collect_bindings(args, sorted(net.slots), dim)
    alpha, beta = _control_amps(args)
    psi = _parse_psi(args.psi, dim)
    inp = photonic.photon_input(net.space, net.input_path, (alpha, beta), psi)

    rng = np.random.default_rng(args.seed) if args.sample else None
    outcome = photonic.propagate(net, inp, bindings, rng=rng)

    target = None
    if known_preset in ("ctrl-u", "ctrl-u-monitored", "ctrl-switch"):
        target = _photonic_target(
            "ctrl-switch" if known_preset == "ctrl-switch" else "ctrl-u",
            net, alpha, beta, psi, bindings,
        )

    thresholded = True
    if isinstance(outcome, photonic.PureOutcome):
        output = {"kind": "pure", "amplitudes": _complex_pairs(outcome.state.amps)}
        fidelity = fidelity_pure(outcome.state, target) if target is not None else None
    elif isinstance(outcome, photonic.MixedOutcome):
        output = {
            "kind": "mixed",
            "density_matrix": _matrix_pairs(outcome.rho.entries),
            "branch_probabilities": [b.probability for b in outcome.branches],
        }
        fidelity = fidelity_mixed(outcome.rho, target) if target is not None else None
        thresholded = False
    else:
        output = {
            "kind": "sampled",
            "outcome": outcome.outcome,
            "probability": outcome.probability,
            "amplitudes": _complex_pairs(outcome.state.amps),
        }
        fidelity = None
        thresholded = False

    report = {
        "scheme": scheme_id,
        "bindings": {s: spec for s, spec in _binding_echo(args, net.slots).items()},
        "input": {
            "alpha": [alpha.real, alpha.imag],
            "beta": [beta.real, beta.imag],
            "psi": _complex_pairs(psi),
            "internal_dim": dim,
        },
        "slots": net.slot_info(),
        "output": output,
        "fidelity": fidelity,
        "seed": args.seed,
        "version": __version__,
    }
    if fidelity is not None and thresholded and fidelity < 1.0 - args.tolerance:
        return report, 1
    return report, 0


def _run_ion(args, seq, scheme_id: str, known_preset: str | None) -> tuple[dict, int]:
    space = ion.TrapSpace(fock_cutoff=args.fock)
    bindings = _collect_bindings(args, sorted(seq.slots), 2)
    alpha, beta = _control_amps(args)
    psi = _parse_psi(args.psi, 2)
    init = ion.ion_input(space, (alpha, beta), psi)
    final, _ = ion.run_sequence(seq, init, bindings, space=space)

    target = None
    if known_preset in ION_PRESETS:
        target = _ion_target(known_preset, space, alpha, beta, psi, bindings)
    fidelity = fidelity_pure(final, target) if target is not None else None

    report = {
        "scheme": scheme_id,
        "bindings": {s: spec for s, spec in _binding_echo(args, seq.slots).items()},
        "input": {
            "alpha": [alpha.real, alpha.imag],
            "beta": [beta.real, beta.imag],
            "psi": _complex_pairs(psi),
            "fock_cutoff": args.fock,
        },
        "slots": seq.slot_info(),
        "output": {"kind": "pure", "amplitudes": _complex_pairs(final.amps)},
        "fidelity": fidelity,
        "ground_mode": ion.assert_ground_mode(final, 1e-12),
        "seed": args.seed,
        "version": __version__,
    }
    if fidelity is not None and fidelity < 1.0 - args.tolerance:
        return report, 1
    return report, 0


def _binding_echo(args, slots) -> dict[str, str]:
    echo = {}
    sugar = {"U": args.u, "Uf": args.uf, "Ug": args.ug}
    for entry in args.bind or []:
        slot, _, spec = entry.partition("=")
        if slot in slots:
            echo[slot] = spec
    for slot, spec in sugar.items():
        if slot in slots and spec is not None:
            echo[slot] = spec
    return echo


def _build_preset(name: str, dim: int):
    if name == "ctrl-u":
        return photonic.preset_ctrl_u(dim)
    if name == "ctrl-u-monitored":
        return photonic.preset_ctrl_u_monitored(dim)
    if name == "ctrl-switch":
        return photonic.preset_ctrl_switch(dim)
    if name == "ion-ctrl-u":
        return ion.seq_ctrl_u()
    if name == "ion-ctrl-switch":
        return ion.seq_ctrl_switch()
    raise ValueError(f"unknown preset {name!r}")


def _cmd_run(args) -> int:
    sources = [args.preset, args.scheme, args.sequence]
    if sum(s is not None for s in sources) != 1:
        raise ValueError("need exactly one of --preset, --scheme, --sequence")
    if args.preset is not None:
        built = _build_preset(args.preset, args.dim)
        if args.preset in ION_PRESETS:
            report, code = _run_ion(args, built, args.preset, args.preset)
        else:
            report, code = _run_photonic(args, built, args.preset, args.preset)
    elif args.scheme is not None:
        with open(args.scheme) as fh:
            net = photonic.Network.from_json(fh.read())
        report, code = _run_photonic(args, net, args.scheme, None)
    else:
        with open(args.sequence) as fh:
            seq = ion.PulseSequence.from_json(fh.read())
        report, code = _run_ion(args, seq, args.sequence, None)
    _write_json(report, args.out)
    return code


def _cmd_nogo(args) -> int:
    kind = {"ctrl-u": nogo.CTRL_U, "switch": nogo.SWITCH}[args.kind]
    config = nogo.SearchConfig(
        restarts=args.restarts,
        max_iters=args.max_iters,
        sample_count=args.samples,
        seed=args.seed,
        system_dim=args.dim,
        ancilla_dim=args.ancilla,
    )
    report = nogo.optimize(kind, config)
    _write_json(report.to_json_dict(), args.out)
    return 0


def _cmd_emit_scheme(args) -> int:
    built = _build_preset(args.preset, args.dim)
    if args.preset in ION_PRESETS:
        payload = built.to_json_list()
    else:
        payload = built.to_json_dict()
    _write_json(payload, args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctrlsim",
        description="Simulate control of unknown operations; search fixed circuits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset or a scheme/sequence file")
    run.add_argument("--preset", choices=PHOTONIC_PRESETS + ION_PRESETS)
    run.add_argument("--scheme", help="photonic network JSON file")
    run.add_argument("--sequence", help="ion pulse-sequence JSON file")
    run.add_argument("--u", help="gate spec for slot U")
    run.add_argument("--uf", help="gate spec for slot Uf")
    run.add_argument("--ug", help="gate spec for slot Ug")
    run.add_argument("--bind", action="append", help="SLOT=SPEC binding (repeatable)")
    run.add_argument("--alpha", type=float, default=1 / np.sqrt(2))
    run.add_argument("--beta", type=float, default=1 / np.sqrt(2))
    run.add_argument("--beta-phase", type=float, default=0.0, help="radians")
    run.add_argument("--psi", help="system amplitudes re,im,re,im,...")
    run.add_argument("--dim", type=int, default=2, help="photonic internal dimension")
    run.add_argument("--fock", type=int, default=3, help="ion vibrational cutoff")
    run.add_argument("--sample", action="store_true", help="sample one monitored branch")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--tolerance", type=float, default=1e-9)
    run.add_argument("--out", help="report path (default stdout)")
    run.set_defaults(func=_cmd_run)

    ng = sub.add_parser("nogo", help="search fixed circuits for the controlled target")
    ng.add_argument("--kind", choices=("ctrl-u", "switch"), required=True)
    ng.add_argument("--dim", type=int, default=2)
    ng.add_argument("--ancilla", type=int, default=2)
    ng.add_argument("--restarts", type=int, default=20)
    ng.add_argument("--samples", type=int, default=16)
    ng.add_argument("--max-iters", type=int, default=1500)
    ng.add_argument("--seed", type=int, default=0)
    ng.add_argument("--out", help="report path (default stdout)")
    ng.set_defaults(func=_cmd_nogo)

    emit = sub.add_parser("emit-scheme", help="write a preset scheme/sequence file")
    emit.add_argument("--preset", choices=PHOTONIC_PRESETS + ION_PRESETS, required=True)
    emit.add_argument("--dim", type=int, default=2)
    emit.add_argument("--out", help="file path (default stdout)")
    emit.set_defaults(func=_cmd_emit_scheme)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
