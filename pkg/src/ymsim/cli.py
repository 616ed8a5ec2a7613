"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration
error, 3 capacity (the dense register would be too large).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .circuit import count_gates, gate_count_report, trotter_step
from .errors import CapacityError, InvalidConfig, YMSimError
from .hamiltonian import build_templates
from .runs import RunConfig, RunSetup, run_evolution, write_artifacts

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3

MODE_COLUMNS = ("kappa", "species", "site_x", "site_y", "site_z", "color", "spin_or_pol")

# flag -> RunConfig field
FLAG_FIELDS = {
    "group_n": "group_n",
    "cutoff": "boson_cutoff",
    "extent": "extent",
    "spacing": "spacing",
    "coupling": "coupling_g",
    "mass": "fermion_mass_m",
    "gluon_regulator": "gluon_mass_regulator",
    "polarizations": "polarization_count",
    "ghosts": "include_ghosts",
    "dt": "dt",
    "steps": "steps_n",
    "t0": "t0",
    "terms": "terms",
    "seed": "seed",
    "out": "out",
    "oracle": "oracle",
    "stride": "stride",
    "shots": "shots",
    "initial": "initial",
    "fused": "fused",
    "midpoint": "midpoint",
}


def parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run config; flags override its values")
    common.add_argument("--group-n", type=int)
    common.add_argument("--cutoff", type=int, help="boson occupation cutoff")
    common.add_argument("--extent", type=int, help="lattice sites per axis")
    common.add_argument("--spacing", type=float, help="momentum lattice spacing")
    common.add_argument("--coupling", type=float)
    common.add_argument("--mass", type=float, help="quark mass")
    common.add_argument("--gluon-regulator", type=float, help="infrared mass given to gluons and ghosts")
    common.add_argument("--polarizations", type=int, choices=(2, 4))
    common.add_argument("--ghosts", type=parse_bool, metavar="BOOL")
    common.add_argument("--dt", type=float)
    common.add_argument("--steps", type=int)
    common.add_argument("--t0", type=float)
    common.add_argument("--terms", help="comma-separated subset of FI,G4I,G3I,FPI (or H1,H2)")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--oracle", type=parse_bool, metavar="BOOL")
    common.add_argument("--stride", type=int, metavar="K", help="snapshot every K steps")
    common.add_argument("--shots", type=int, help="sample occupations with this many shots (0 = exact)")
    common.add_argument("--initial", choices=("vacuum", "quark", "singlet"))
    common.add_argument("--fused", type=parse_bool, metavar="BOOL",
                        help="apply rotations directly instead of running the gate programs")
    common.add_argument("--midpoint", type=parse_bool, metavar="BOOL")

    parser = argparse.ArgumentParser(prog="ymsim", description="Digital simulation of SU(N) Yang-Mills dynamics.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("modes", parents=[common], help="print the mode ordering as CSV")
    sub.add_parser("build-hamiltonian", parents=[common], help="write Pauli dumps and provenance of each term")
    sub.add_parser("synthesize", parents=[common], help="write the gate program of the first Trotter step")
    sub.add_parser("gate-count", parents=[common], help="count gates and compare against the bounds")
    sub.add_parser("evolve", parents=[common], help="run a Trotterized evolution")
    ver = sub.add_parser("verify", parents=[common], help="run the self-check suites")
    ver.add_argument("--corrupt-layout", action="store_true", help=argparse.SUPPRESS)
    sub.add_parser("demo-meson", parents=[common], help="evolve the colour-singlet quark pair")
    return parser


def resolve_config(args, base: RunConfig | None = None) -> RunConfig:
    """Base defaults, then the JSON config file, then explicit flags."""
    config = base or RunConfig()
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise InvalidConfig(f"cannot read config: {exc}") from None
        loaded = RunConfig.from_json(text)
        given = json.loads(text)
        config = RunConfig.from_dict({**config.to_dict(), **{k: getattr(loaded, k) for k in given}})
    overrides = {field: getattr(args, flag) for flag, field in FLAG_FIELDS.items() if getattr(args, flag) is not None}
    return config.replace(**overrides) if overrides else config


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, sort_keys=True, indent=1) + "\n")


def mode_rows(setup: RunSetup) -> list[tuple]:
    ordering = setup.layout.ordering
    return [(ordering.kappa(m), m.species.value, *m.site, m.color, m.index) for m in ordering.modes]


def cmd_modes(config: RunConfig, args) -> int:
    setup = RunSetup.from_config(config)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(MODE_COLUMNS)
    writer.writerows(mode_rows(setup))
    if args.out is not None:
        out = _out_dir(config)
        with open(out / "modes.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(MODE_COLUMNS)
            w.writerows(mode_rows(setup))
        (out / "layout.json").write_text(setup.layout.to_json() + "\n")
    return EXIT_OK


def cmd_build_hamiltonian(config: RunConfig, args) -> int:
    setup = RunSetup.from_config(config)
    layout = setup.layout
    out = _out_dir(config)
    provenance = {"config": config.to_dict(), "time": config.t0, "terms": {}}
    for tpl in build_templates(setup.params, setup.lattice, layout, config.terms):
        (out / f"hamiltonian_{tpl.label}.txt").write_text(tpl.at(config.t0).to_text())
        provenance["terms"][tpl.label] = {
            "strings": len(tpl),
            "file": f"hamiltonian_{tpl.label}.txt",
            "records": [{"legs": [leg.to_json(layout) for leg in rec.legs],
                         "coeff": [rec.coeff.real, rec.coeff.imag], "omega": rec.omega}
                        for rec in tpl.records],
        }
        print(f"{tpl.label}: {len(tpl)} Pauli strings, {len(tpl.records)} vertex records")
    _dump_json(out / "hamiltonian_provenance.json", provenance)
    return EXIT_OK


def cmd_synthesize(config: RunConfig, args) -> int:
    setup = RunSetup.from_config(config)
    templates = build_templates(setup.params, setup.lattice, setup.layout, config.terms)
    prog = trotter_step([(tpl.label, tpl.at(config.t0)) for tpl in templates], config.dt, setup.layout.total_qubits)
    out = _out_dir(config)
    (out / "program.txt").write_text(prog.to_text())
    counts = count_gates([prog])
    summary = {"qubits": prog.qubit_count, "aux_qubit": prog.aux_qubit, "gates": len(prog),
               "global_phase": prog.metadata.get("global_phase", 0.0), **counts.to_json()}
    _dump_json(out / "program.json", summary)
    print(f"{len(prog)} gates, {counts.cnot_count} CNOT, aux qubit {prog.aux_qubit}")
    return EXIT_OK


def cmd_gate_count(config: RunConfig, args) -> int:
    setup = RunSetup.from_config(config)
    report = gate_count_report(setup.params, setup.lattice, setup.layout, config.terms)
    data = {"config": config.to_dict(), "total_qubits": setup.layout.total_qubits, **report.to_json(),
            "within_bounds": report.within_bounds()}
    _dump_json(_out_dir(config) / "gate_count.json", data)
    for name, row in report.measured_vs_bound.items():
        print(f"{name}: measured {row['measured']} <= bound {row['bound']}: {row['measured'] <= row['bound']}")
    return EXIT_OK


def _report_run(result, config: RunConfig) -> int:
    out = write_artifacts(result, config.out)
    s = result.report.summary
    print(f"{len(result.report.norms)} steps, norm drift {s['norm_drift']:.3e}, artifacts in {out}")
    if result.report.oracle:
        print(f"oracle: {result.report.oracle}")
    return EXIT_OK


def cmd_evolve(config: RunConfig, args) -> int:
    return _report_run(run_evolution(config), config)


def cmd_demo_meson(config: RunConfig, args) -> int:
    from .hadronize import meson_demo

    return _report_run(meson_demo(config), config)


def cmd_verify(config: RunConfig, args) -> int:
    from .verify import run_verification

    verdict = run_verification(config, corrupt=args.corrupt_layout)
    _dump_json(_out_dir(config) / "verify.json", verdict)
    for suite in verdict["suites"]:
        print(f"{suite['name']}: {'pass' if suite['passed'] else 'FAIL'}")
    return EXIT_OK if verdict["passed"] else EXIT_VERIFY


COMMANDS = {
    "modes": cmd_modes,
    "build-hamiltonian": cmd_build_hamiltonian,
    "synthesize": cmd_synthesize,
    "gate-count": cmd_gate_count,
    "evolve": cmd_evolve,
    "verify": cmd_verify,
    "demo-meson": cmd_demo_meson,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            from .verify import DEFAULT_VERIFY_CONFIG

            config = resolve_config(args, DEFAULT_VERIFY_CONFIG)
        else:
            config = resolve_config(args)
        return COMMANDS[args.command](config, args)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (YMSimError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
