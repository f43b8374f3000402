"""One-stop hypothesis audit.

Runs the structural checks every downstream result leans on (zero-state
normalization, shift invariance, coercivity, disjoint-support splitting,
potential conditions, the empirical interpolation constant, and the
hylomorphy verdict) under a probe budget, and emits a machine-readable
certificate.  Failures are verdicts with counterexample descriptors, not
exceptions; the CLI pipeline gates continuation runs on the certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .functionals import (PenaltyParams, choose_coercivity_params, gaussian_profile,
                          hylomorphy_check, nash_check, probe_states)
from .grid import (NBE, NLS, NWE, FieldState, LatticeShift, translate,
                   x_norm as state_x_norm)
from .models import ModelSpec, charge, energy, grad_charge, grad_energy
from .nonlinearity import (DoublePower, SinglePower, check_w_conditions,
                           critical_exponent)
from .rng import SplitMix64

__all__ = ["CheckResult", "HypothesisCertificate", "audit", "gate_passed"]

GATE_IDS = ("EC-1", "EC-2", "EC-3i", "EC-3ii", "EC-3iii", "EC-4-disjoint", "hh")

_THEOREM_FOR_TAG = {NLS: "NSE", NWE: "NWE", NBE: "NBE"}


@dataclass(frozen=True)
class CheckResult:
    verdict: str  # pass | fail | skipped
    kind: str     # analytic | sampled | probe-family
    parameters: dict = field(default_factory=dict)
    counterexample: dict | None = None


@dataclass
class HypothesisCertificate:
    model_tag: str
    results: dict[str, CheckResult]
    budget: int
    seed: int
    params: dict

    def passed(self, check_id: str) -> bool:
        res = self.results.get(check_id)
        return res is not None and res.verdict == "pass"


def gate_passed(cert: HypothesisCertificate) -> bool:
    """The continuation gate: core structural checks plus hylomorphy."""
    return all(cert.passed(cid) for cid in GATE_IDS)


def _zero_state_check(spec: ModelSpec) -> CheckResult:
    zero = spec.zero_state()
    vals = {
        "E0": energy(spec, zero),
        "C0": charge(spec, zero),
        "gradE0": max(float(np.abs(c).max()) for c in grad_energy(spec, zero).components),
        "gradC0": max(float(np.abs(c).max()) for c in grad_charge(spec, zero).components),
    }
    ok = all(v == 0.0 for v in vals.values())
    return CheckResult("pass" if ok else "fail", "analytic", vals,
                       None if ok else vals)


def _shift_invariance_check(spec: ModelSpec, rng: SplitMix64, count: int) -> CheckResult:
    worst = 0.0
    worst_case = None
    for i in range(count):
        amp = 0.1 + 2.0 * rng.uniform()
        state = _random_probe(spec, rng, amp)
        z = tuple(int(v) for v in rng.integers(spec.grid.dim, max(spec.grid.n)))
        moved = translate(state, LatticeShift(z))
        for f, name in ((energy, "E"), (charge, "C")):
            a, b = f(spec, state), f(spec, moved)
            rel = abs(a - b) / max(1.0, abs(a))
            if rel > worst:
                worst, worst_case = rel, {"functional": name, "shift": list(z), "rel": rel}
    ok = worst <= 1e-12
    return CheckResult("pass" if ok else "fail", "sampled",
                       {"states": count, "worst_rel": worst},
                       None if ok else worst_case)


def _random_probe(spec: ModelSpec, rng: SplitMix64, amplitude: float) -> FieldState:
    return probe_states(spec, rng, 1, amp_range=(amplitude, amplitude * 1.0000001))[0]


def _bulk(spec: ModelSpec, params: PenaltyParams, state: FieldState) -> float:
    return energy(spec, state) + params.a * abs(charge(spec, state)) ** params.s_exp


def _coercivity_floor_check(spec: ModelSpec, params: PenaltyParams,
                            rng: SplitMix64, count: int) -> CheckResult:
    """EC-3i: E + a|C|^s >= 0 on random probes plus a fixed-mass width sweep.

    The width sweep is the supercriticality detector: at fixed charge the
    energy of a narrowing bump must stay floored, otherwise the trend is
    the counterexample."""
    tol = 1e-9
    worst = np.inf
    bad = None
    for state in probe_states(spec, rng, count):
        val = _bulk(spec, params, state)
        if val < worst:
            worst = val
        if val < -tol and bad is None:
            bad = {"source": "random-probe", "value": val}
    g = spec.grid
    sig_hi = min(g.box_length) / 8.0
    sig_lo = max(3.0 * max(g.spacing), sig_hi / 32.0)
    sweep = []
    mass_scale = 2.0
    for sigma in np.geomspace(sig_hi, sig_lo, 8):
        amp = mass_scale * (sig_hi / sigma) ** (g.dim / 2.0)
        bump = gaussian_profile(g, amp, sigma)
        state = (FieldState.nls(g, bump.astype(np.complex128)) if spec.model_tag == NLS
                 else _pair_probe(spec, bump))
        sweep.append((float(sigma), float(_bulk(spec, params, state))))
    sweep_vals = [v for _, v in sweep]
    worst = min(worst, min(sweep_vals))
    if min(sweep_vals) < -tol:
        bad = {"source": "width-sweep", "sweep": sweep,
               "trend": "bulk decreases without floor as width shrinks"}
    ok = worst >= -tol
    return CheckResult("pass" if ok else "fail", "sampled",
                       {"probes": count, "min_bulk": float(worst), "width_sweep": sweep},
                       bad)


def _pair_probe(spec: ModelSpec, bump: np.ndarray) -> FieldState:
    if spec.model_tag == NWE:
        return FieldState.nwe(spec.grid, bump, np.zeros_like(bump, dtype=np.complex128))
    return FieldState.nbe(spec.grid, bump, np.zeros_like(bump))


def _coercivity_growth_check(spec: ModelSpec, params: PenaltyParams,
                             rng: SplitMix64) -> CheckResult:
    """EC-3ii: the bulk diverges along norm-growing rays."""
    base = _random_probe(spec, rng, 0.5)
    factors = np.geomspace(1.0, 32.0, 8)
    vals = []
    for f in factors:
        scaled = base.replace_components(tuple(f * c for c in base.components))
        vals.append(_bulk(spec, params, scaled))
    tail_increasing = all(b > a for a, b in zip(vals[-4:], vals[-3:]))
    ok = tail_increasing and vals[-1] > 10.0 * max(1.0, abs(vals[0]))
    return CheckResult("pass" if ok else "fail", "sampled",
                       {"factors": list(map(float, factors)), "values": list(map(float, vals))},
                       None if ok else {"values": list(map(float, vals))})


def _coercivity_vanishing_check(spec: ModelSpec, params: PenaltyParams) -> CheckResult:
    """EC-3iii: bulk -> 0 along shrinking amplitudes forces the norm to 0."""
    g = spec.grid
    sigma = min(g.box_length) / 10.0
    amps = 0.2 * 2.0 ** (-np.arange(8))
    bulks, norms = [], []
    for a in amps:
        bump = gaussian_profile(g, a, sigma)
        state = (FieldState.nls(g, bump.astype(np.complex128)) if spec.model_tag == NLS
                 else _pair_probe(spec, bump))
        bulks.append(_bulk(spec, params, state))
        norms.append(state_x_norm(state))
    bulk_to_zero = abs(bulks[-1]) <= 1e-3 * max(abs(bulks[0]), 1e-30)
    monotone = all(b < a for a, b in zip(norms, norms[1:]))
    ok = bulk_to_zero and monotone and norms[-1] < norms[0]
    return CheckResult("pass" if ok else "fail", "sampled",
                       {"bulks": list(map(float, bulks)), "xnorms": list(map(float, norms))},
                       None if ok else {"bulks": list(map(float, bulks))})


def _disjoint_support_bump(spec: ModelSpec, center_frac: float) -> np.ndarray:
    """Gaussian truncated to a quarter-box window: supports are exactly
    disjoint and the truncation happens below machine precision."""
    g = spec.grid
    sigma = min(g.box_length) / 24.0
    center = tuple(f * center_frac for f in g.box_length)
    bump = gaussian_profile(g, 1.0, sigma, center=center)
    window = np.ones(g.n, dtype=bool)
    for axis in range(g.dim):
        x = g.axis_coordinates(axis)
        L = g.box_length[axis]
        d = np.abs(x - center[axis])
        d = np.minimum(d, L - d)
        shape = [1] * g.dim
        shape[axis] = g.n[axis]
        window &= (d.reshape(shape) < L / 4.0 - 2.0 * g.spacing[axis])
    return np.where(window, bump, 0.0)


def _splitting_check(spec: ModelSpec) -> CheckResult:
    """EC-4 at its discretely exact instance: disjoint-support additivity."""
    left = _disjoint_support_bump(spec, 0.25)
    right = 0.7 * _disjoint_support_bump(spec, 0.75)
    if spec.model_tag == NLS:
        mk = lambda f: FieldState.nls(spec.grid, f.astype(np.complex128))
    elif spec.model_tag == NWE:
        mk = lambda f: FieldState.nwe(spec.grid, f, 0.3j * f)
    else:
        mk = lambda f: FieldState.nbe(spec.grid, f, 0.3 * f)
    u, w = mk(left), mk(right)
    both = u.replace_components(tuple(a + b for a, b in zip(u.components, w.components)))
    rel_e = abs(energy(spec, both) - energy(spec, u) - energy(spec, w)) / max(
        1.0, abs(energy(spec, both)))
    rel_c = abs(charge(spec, both) - charge(spec, u) - charge(spec, w)) / max(
        1.0, abs(charge(spec, both)))
    ok = rel_e <= 1e-10 and rel_c <= 1e-10
    return CheckResult("pass" if ok else "fail", "sampled",
                       {"rel_energy": rel_e, "rel_charge": rel_c,
                        "note": "disjoint-support instance only"},
                       None if ok else {"rel_energy": rel_e, "rel_charge": rel_c})


def _nash_stability_check(spec: ModelSpec, seed: int) -> CheckResult:
    fam = spec.w.family
    if spec.model_tag != NLS or not isinstance(fam, (SinglePower, DoublePower)):
        return CheckResult("skipped", "analytic",
                           {"reason": "interpolation constant probed for NLS power families only"})
    if fam.p >= critical_exponent(spec.grid.dim):
        return CheckResult("skipped", "analytic",
                           {"reason": f"supercritical p = {fam.p}"})
    b_half = nash_check(spec.grid, fam.p, seed=seed, n_random=300)
    b_full = nash_check(spec.grid, fam.p, seed=seed, n_random=600)
    drift = abs(b_full - b_half) / max(b_half, 1e-30)
    ok = np.isfinite(b_full) and drift <= 0.10
    return CheckResult("pass" if ok else "fail", "sampled",
                       {"b_emp": float(b_full), "sample_doubling_drift": float(drift)},
                       None if ok else {"b_half": b_half, "b_full": b_full})


def audit(spec: ModelSpec, params: PenaltyParams | None = None,
          budget: int = 10000, seed: int = 0) -> HypothesisCertificate:
    """Run every hypothesis check under the probe budget.

    budget = 0 marks everything skipped.  When params is omitted the
    coercivity parameters are chosen automatically; if no admissible
    exponent exists (supercritical power) a fixed fallback is used so the
    coercivity checks can exhibit their counterexample.
    """
    results: dict[str, CheckResult] = {}
    params_note = {}
    if budget <= 0:
        for cid in GATE_IDS + ("W-conditions", "Nash"):
            results[cid] = CheckResult("skipped", "analytic", {"reason": "zero budget"})
        return HypothesisCertificate(spec.model_tag, results, budget, seed, params_note)
    if params is None:
        try:
            params = choose_coercivity_params(spec, seed=seed,
                                              n_probes=min(budget, 2000))
            params_note["source"] = "auto"
        except ValueError as err:
            params = PenaltyParams(delta=0.01, a=1.0, s_exp=2.0)
            params_note["source"] = f"fallback ({err})"
    params_note.update(delta=params.delta, a=params.a, s_exp=params.s_exp)
    root = SplitMix64(seed)
    results["EC-1"] = _zero_state_check(spec)
    results["EC-2"] = _shift_invariance_check(spec, root.split("ec2"),
                                              count=min(50, budget))
    results["EC-3i"] = _coercivity_floor_check(spec, params, root.split("ec3i"),
                                               count=min(budget, 2000))
    results["EC-3ii"] = _coercivity_growth_check(spec, params, root.split("ec3ii"))
    results["EC-3iii"] = _coercivity_vanishing_check(spec, params)
    results["EC-4-disjoint"] = _splitting_check(spec)
    wreport = check_w_conditions(spec.w, _THEOREM_FOR_TAG[spec.model_tag],
                                 dim=spec.grid.dim)
    results["W-conditions"] = CheckResult(
        "pass" if wreport.all_passed() else "fail", "analytic",
        {k: {"passed": v.passed, "kind": v.kind, "witness": v.witness}
         for k, v in wreport.conditions.items()},
        None if wreport.all_passed() else
        {k: v.detail for k, v in wreport.conditions.items() if not v.passed})
    results["Nash"] = _nash_stability_check(spec, seed)
    hylo = hylomorphy_check(spec, params)
    results["hh"] = CheckResult(
        "pass" if hylo.verdict else "fail", "probe-family",
        {"lambda0_estimate": hylo.lambda0_estimate, "best_ratio": hylo.best_ratio,
         "margin": hylo.margin, "note": hylo.note},
        None if hylo.verdict else {"best_ratio": hylo.best_ratio,
                                   "lambda0_estimate": hylo.lambda0_estimate})
    return HypothesisCertificate(spec.model_tag, results, budget, seed, params_note)
