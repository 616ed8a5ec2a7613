"""Self-checks run by ``ymsim verify``.

Each suite returns a ``SuiteResult``; the verdict passes only if every suite
does. Suites that would need more qubits than the dense oracle allows report
a capacity failure instead of being skipped silently.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .circuit import gate_count_report, synthesize_pauli_exponential
from .errors import CapacityError, NotCoveredError, YMSimError
from .hamiltonian import build_h1, build_i2_closed_form, build_templates, g4i_records, i2_case, i2_generic
from .pauli import ORACLE_QUBIT_LIMIT, PauliString, PauliSum
from .runs import RunConfig, RunSetup, initial_for
from .simulator import evolve, initial_statevector, oracle_states

HERMITICITY_TOL = 1e-12
CROSS_PATH_TOL = 1e-10
SYNTHESIS_TOL = 1e-10
SLOPE_RANGE = (0.8, 1.2)
TROTTER_FLOOR = 1e-9

# A small configuration where every suite is meaningful and fast.
DEFAULT_VERIFY_CONFIG = RunConfig(group_n=2, coupling_g=0.02, polarization_count=4, spacing=2 * math.pi,
                                  terms="H1", dt=0.25, steps_n=4, initial="quark")


@dataclass
class SuiteResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def corrupt_layout(layout):
    """Negative-control hook: swap the qubits of the first two fermion modes."""
    modes = list(layout.fermion_qubits)
    if len(modes) < 2:
        return layout
    swapped = dict(layout.fermion_qubits)
    swapped[modes[0]], swapped[modes[1]] = swapped[modes[1]], swapped[modes[0]]
    return dataclasses.replace(layout, fermion_qubits=swapped)


def suite_layout(setup: RunSetup) -> SuiteResult:
    """Fermion qubit = kappa; gluon blocks contiguous, disjoint and after the fermions."""
    layout = setup.layout
    kappa = layout.ordering.kappa
    bad = [str(m) for m, q in layout.fermion_qubits.items() if q != kappa(m)]
    used = sorted(layout.fermion_qubits.values())
    for block in layout.boson_blocks.values():
        if len(block) != layout.cutoff + 1 or list(block) != list(range(block[0], block[0] + len(block))):
            bad.append(f"block {block}")
        used.extend(block)
    complete = used == list(range(layout.total_qubits))
    return SuiteResult("layout", not bad and complete, {"mismatched": bad[:10], "complete": complete})


def suite_hermiticity(setup: RunSetup, templates) -> SuiteResult:
    params = setup.params
    worst = 0.0
    for tpl in templates:
        for t in (params.t0, params.t0 + params.steps_n * params.dt):
            h = tpl.at(t)
            worst = max(worst, (h - h.adjoint()).max_abs())
    return SuiteResult("hermiticity", worst <= HERMITICITY_TOL, {"max_anti_hermitian": worst})


def suite_cross_path(setup: RunSetup, rng: np.random.Generator, samples: int = 6) -> SuiteResult:
    """Explicit decompositions against the generic Jordan-Wigner products."""
    params, lattice, layout = setup.params, setup.lattice, setup.layout
    worst = 0.0
    h1_jw = build_h1(params, lattice, layout, params.t0).pauli
    h1_closed = build_h1(params, lattice, layout, params.t0, method="closed").pauli
    worst = max(worst, (h1_jw - h1_closed).max_abs())
    checked = {"h1": 1, "i2_coincident": 0, "i2_distinct": 0}
    records = g4i_records(params, lattice, ((1, 1, -1, -1),))
    by_case = {"coincident": [], "distinct": []}
    for rec in records:
        modes = tuple(leg.mode for leg in rec.legs)
        case = i2_case(modes)
        if case in by_case:
            by_case[case].append(modes)
    for case, pool in by_case.items():
        for k in rng.permutation(len(pool))[:samples]:
            modes = pool[k]
            w = complex(rng.normal(), rng.normal())
            diff = build_i2_closed_form(modes, w, layout) - i2_generic(modes, w, layout)
            worst = max(worst, diff.max_abs())
            checked[f"i2_{case}"] += 1
    return SuiteResult("cross_path", worst <= CROSS_PATH_TOL, {"max_abs_diff": worst, "checked": checked})


def suite_synthesis(templates, rng: np.random.Generator, samples: int = 12) -> SuiteResult:
    """Synthesized exp(-i theta P) against the dense exponential, with the auxiliary restored."""
    strings = [(x, z) for tpl in templates for x, z in zip(tpl.xs, tpl.zs)]
    worst = 0.0
    checked = 0
    for k in rng.permutation(len(strings))[:samples]:
        x, z = int(strings[k][0]), int(strings[k][1])
        support = sorted(q for q in range((x | z).bit_length()) if (x | z) >> q & 1)
        if len(support) + 1 > ORACLE_QUBIT_LIMIT:
            continue
        pos = {q: i for i, q in enumerate(support)}
        lx = sum(1 << pos[q] for q in support if x >> q & 1)
        lz = sum(1 << pos[q] for q in support if z >> q & 1)
        worst = max(worst, _synthesis_error(PauliString(1.0, lx, lz), float(rng.uniform(-1, 1)), len(support)))
        checked += 1
    return SuiteResult("synthesis", worst <= SYNTHESIS_TOL, {"max_abs_diff": worst, "checked": checked})


def _synthesis_error(term: PauliString, theta: float, n: int) -> float:
    prog = synthesize_pauli_exponential(term, theta, n)
    got = prog.dense_matrix()
    want = expm(-1j * theta * PauliSum({(term.x, term.z): term.coeff}).to_dense_matrix(n))
    # auxiliary in |0>: the block acting on aux=0 must equal the exponential, aux=1 -> aux=0 must vanish
    dim = 1 << n
    return float(max(np.abs(got[:dim, :dim] - want).max(), np.abs(got[dim:, :dim]).max()))


def trotter_errors(config: RunConfig, ns=(4, 8, 16)) -> tuple[list, list]:
    """Final-state error against the exact slice product for several step counts at fixed T."""
    total = config.steps_n * config.dt
    errors = []
    for n in ns:
        cfg = config.replace(steps_n=n, dt=total / n)
        setup = RunSetup.from_config(cfg)
        templates = build_templates(setup.params, setup.lattice, setup.layout, cfg.terms)
        comps = initial_for(setup)
        traj = evolve(setup.params, setup.lattice, setup.layout, templates=templates, initial=comps,
                      stride=n, qubit_limit=ORACLE_QUBIT_LIMIT)
        psi0 = initial_statevector(traj.register, comps).amplitudes
        exact = oracle_states(setup.params, templates, traj.register, psi0)
        errors.append(float(np.linalg.norm(traj.state.amplitudes - exact)))
    return list(ns), errors


def fit_slope(ns, errors) -> float:
    """Slope of log(error) against log(1/n)."""
    return float(np.polyfit(np.log(1.0 / np.asarray(ns, dtype=float)), np.log(errors), 1)[0])


def suite_trotter(config: RunConfig) -> SuiteResult:
    ns, errors = trotter_errors(config)
    if max(errors) <= TROTTER_FLOOR:
        return SuiteResult("trotter_order", True, {"ns": ns, "errors": errors, "note": "below the error floor"})
    slope = fit_slope(ns, errors)
    lo, hi = SLOPE_RANGE
    return SuiteResult("trotter_order", lo <= slope <= hi, {"ns": ns, "errors": errors, "slope": slope})


def suite_bounds(setup: RunSetup) -> SuiteResult:
    report = gate_count_report(setup.params, setup.lattice, setup.layout, setup.config.terms)
    return SuiteResult("bounds", report.within_bounds(), report.measured_vs_bound)


def _guarded(name, fn, *args) -> SuiteResult:
    try:
        return fn(*args)
    except CapacityError as exc:
        return SuiteResult(name, False, {"capacity": str(exc)})
    except NotCoveredError as exc:
        return SuiteResult(name, False, {"not_covered": str(exc)})
    except YMSimError as exc:
        return SuiteResult(name, False, {"error": f"{type(exc).__name__}: {exc}"})


def run_verification(config: RunConfig = DEFAULT_VERIFY_CONFIG, corrupt: bool = False) -> dict:
    """All suites on ``config``; ``corrupt=True`` injects a broken layout."""
    setup = RunSetup.from_config(config)
    if corrupt:
        setup = dataclasses.replace(setup, layout=corrupt_layout(setup.layout))
    rng = np.random.default_rng(config.seed)
    templates = build_templates(setup.params, setup.lattice, setup.layout, config.terms)
    suites = [
        _guarded("layout", suite_layout, setup),
        _guarded("hermiticity", suite_hermiticity, setup, templates),
        _guarded("cross_path", suite_cross_path, setup, rng),
        _guarded("synthesis", suite_synthesis, templates, rng),
        _guarded("trotter_order", suite_trotter, config),
        _guarded("bounds", suite_bounds, setup),
    ]
    return {"passed": all(s.passed for s in suites), "suites": [s.to_dict() for s in suites],
            "config": config.to_dict()}
