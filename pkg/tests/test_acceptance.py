"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The Monte-Carlo criteria drive the ``imfsic`` CLI with the figure presets
and read the CSV back, so they exercise the same path a user would run.
Sweeps are cached per session and reused by the determinism and
monotonicity checks. Expect about 90 minutes on one core.
"""

import math
import time

import numpy as np
import pytest

from imfsic.cli import main, read_csv
from imfsic.detectors import KINDS, DetectorConfig, detect
from imfsic.montecarlo import snr_gain_at_ber, snr_gaps, wilson_interval
from imfsic.signal_model import (
    RngStream,
    SystemDims,
    build_qam,
    generate_channel,
    generate_noise,
    random_frame,
    snr_to_sigma2,
)

from conftest import record_acceptance
from oracles import brute_force_ml

pytestmark = pytest.mark.acceptance



def report(number, ok, detail):
    record_acceptance(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def fmt(x):
    return "n/a" if x is None else f"{x:.2f}"


class Sweeps:
    """Lazily runs CLI sweeps once per session, keyed by name."""

    def __init__(self, root):
        self.root = root
        self.csv = {}

    def get(self, name, argv):
        if name not in self.csv:
            out = self.root / f"{name}.csv"
            rc = main(argv + ["--workers", "1", "--out", str(out)])
            assert rc == 0, f"sweep {name} exited with {rc}"
            self.csv[name] = out.read_bytes()
        return {c.detector: c for c in read_csv(self.csv[name].decode())}


@pytest.fixture(scope="session")
def sweeps(tmp_path_factory):
    return Sweeps(tmp_path_factory.mktemp("acceptance"))


FIG2 = ["--figure", "fig2", "--seed", "2024"]
FIG3 = ["--figure", "fig3", "--seed", "2024", "--detectors", "mf-sic,imf-sic"]
FIG5 = ["--figure", "fig5", "--seed", "2024", "--detectors", "ml,imf-sic,oimf-sic"]
# preset grids cut to the points each criterion reads; trials stay at 10^4
FIG4 = ["--figure", "fig4", "--seed", "2024", "--detectors", "imf-sic,oimf-sic", "--snr", "8:2:14"]
FIG6 = ["--figure", "fig6", "--seed", "2024", "--detectors", "imf-sic,oimf-sic", "--snr", "14:2:24"]


def instances(n, nt, m, snr_db, seed, max_cond=None, noiseless=False):
    """Seeded ``(h, frame, y, noise model)`` draws."""
    dims = SystemDims(nt, nt)
    c = build_qam(m)
    nm = snr_to_sigma2(snr_db, dims, c)
    out = []
    i = 0
    while len(out) < n:
        s = RngStream(seed, (i,))
        i += 1
        h = generate_channel(dims, s.child(0))
        if max_cond is not None and np.linalg.cond(h) >= max_cond:
            continue
        f = random_frame(dims, c, s.child(1))
        y = h @ f.symbols
        if not noiseless:
            y = y + generate_noise(dims, nm, s.child(2))
        out.append((h, f, y, nm))
    return c, out


# ---------------------------------------------------------------- 1


def test_criterion_1_reduction_lattice():
    c, draws = instances(1000, 4, 4, 10.0, seed=1)
    cfg = {
        "mf": DetectorConfig("mf-sic"),
        "mf_s1": DetectorConfig("mf-sic", s=1),
        "mf_d10": DetectorConfig("mf-sic", d_th=10),
        "imf_l1": DetectorConfig("imf-sic", l=1),
        "imf_d10": DetectorConfig("imf-sic", d_th=10),
    }
    h, _, y, nm = draws[0]
    for d in cfg.values():  # compile outside the timed region
        detect(y, h, c, nm, d)
    detect(y, h, c, nm, "sic")

    t0 = time.perf_counter()
    mismatches = dict.fromkeys(("mf_s1", "mf_d10", "imf_l1", "imf_d10"), 0)
    for h, _, y, nm in draws:
        sic = detect(y, h, c, nm, "sic").indices
        out = {k: detect(y, h, c, nm, d).indices for k, d in cfg.items()}
        mismatches["mf_s1"] += not np.array_equal(out["mf_s1"], sic)
        mismatches["mf_d10"] += not np.array_equal(out["mf_d10"], sic)
        mismatches["imf_l1"] += not np.array_equal(out["imf_l1"], out["mf"])
        mismatches["imf_d10"] += not np.array_equal(out["imf_d10"], sic)
    elapsed = time.perf_counter() - t0
    ok = sum(mismatches.values()) == 0 and elapsed < 60
    report(1, ok, f"mismatches {mismatches}, {elapsed:.1f} s for 1000 instances")


# ---------------------------------------------------------------- 2


@pytest.mark.parametrize("nt", [2, 4])
def test_criterion_2_ml_optimality(nt):
    c, draws = instances(1000, nt, 4, 10.0, seed=2 + nt)
    worse, brute_diff = 0, 0
    for h, _, y, nm in draws:
        ml = detect(y, h, c, nm, "ml")
        ref, _ = brute_force_ml(y, h, c.points)
        brute_diff += not np.array_equal(ml.indices, ref)
        r_ml = ml.stats["residual"]
        for kind in KINDS[1:]:
            s = detect(y, h, c, nm, kind).symbols
            r = float(np.real(np.vdot(y - h @ s, y - h @ s)))
            worse += r_ml > r * (1 + 1e-12)
    ok = worse == 0 and brute_diff == 0
    report(2, ok, f"{nt}x{nt}: {worse} residual violations, {brute_diff} brute-force mismatches")


# ---------------------------------------------------------------- 3


@pytest.mark.parametrize("m", [4, 16])
def test_criterion_3_noiseless_exactness(m):
    # filters use the sigma2 of a nominal 100 dB point; no noise is added
    c, draws = instances(1000, 4, m, 100.0, seed=30 + m, max_cond=1e3, noiseless=True)
    s = 8 if m == 16 else 4
    failures = {}
    for kind in KINDS:
        cfg = DetectorConfig(kind, s=s)
        bad = sum(not np.array_equal(detect(y, h, c, nm, cfg).indices, f.indices) for h, f, y, nm in draws)
        if bad:
            failures[kind] = bad
    report(3, not failures, f"4x4 {m}-QAM, 1000 instances per detector, failures {failures or 'none'}")


# ---------------------------------------------------------------- 4


def test_criterion_4a_fig2_imf_gain(sweeps):
    curves = sweeps.get("fig2", FIG2)
    try:
        gain = snr_gain_at_ber(curves["imf-sic"], curves["mf-sic"], 1e-3)
    except ValueError as exc:
        # diagnostic only, the criterion still fails: the same draws on a grid
        # extended to 16 dB, where the curves do reach 1e-3
        wider = sweeps.get("fig2_to16", FIG2 + ["--detectors", "mf-sic,imf-sic", "--snr", "0:2:16"])
        extended = snr_gain_at_ber(wider["imf-sic"], wider["mf-sic"], 1e-3)
        report("4a", False, f"{exc} (0-14 dB); diagnostic on 0-16 dB: {extended:.2f} dB, "
                            f"target 1 +/- 0.5")
    report("4a", abs(gain - 1.0) <= 0.5, f"IMF-SIC over MF-SIC at 1e-3: {gain:.2f} dB, target 1 +/- 0.5")


def test_criterion_4b_fig2_near_ml(sweeps):
    curves = sweeps.get("fig2", FIG2)
    ml = curves["ml"]
    worst = {}
    for kind in ("imf-sic", "oimf-sic"):
        gaps = [g for g in snr_gaps(curves[kind], ml) if g is not None]
        worst[kind] = max(gaps) if gaps else None
    ok = all(w is not None and w <= 0.5 for w in worst.values())
    report("4b", ok, "largest gap to ML: " + ", ".join(f"{k} {fmt(v)} dB" for k, v in worst.items()))


# ---------------------------------------------------------------- 5


def test_criterion_5_fig3_imf_gain(sweeps):
    curves = sweeps.get("fig3", FIG3)
    try:
        gain = snr_gain_at_ber(curves["imf-sic"], curves["mf-sic"], 2e-3)
    except ValueError as exc:
        report(5, False, str(exc))
    report(5, abs(gain - 2.0) <= 0.75, f"IMF-SIC over MF-SIC at 2e-3: {gain:.2f} dB, target 2 +/- 0.75")


# ---------------------------------------------------------------- 6


def test_criterion_6_fig5_ordering(sweeps):
    curves = sweeps.get("fig5", FIG5)
    try:
        to_ml = snr_gain_at_ber(curves["ml"], curves["oimf-sic"], 1e-3)
        ordering = snr_gain_at_ber(curves["oimf-sic"], curves["imf-sic"], 1e-3)
    except ValueError as exc:
        report(6, False, str(exc))
    ok = abs(to_ml) <= 0.5 and abs(ordering - 1.0) <= 0.5
    report(6, ok, f"OIMF-SIC gap to ML {to_ml:.2f} dB (<= 0.5), IMF->OIMF gain {ordering:.2f} dB (1 +/- 0.5)")


# ---------------------------------------------------------------- 7


def test_criterion_7_fig4_ordering_not_worse(sweeps):
    curves = sweeps.get("fig4", FIG4)
    imf, oimf = curves["imf-sic"].points, curves["oimf-sic"].points
    z = []
    for a, b in zip(oimf, imf):
        sd = math.sqrt(a.ber * (1 - a.ber) / a.total_bits + b.ber * (1 - b.ber) / b.total_bits)
        z.append((a.ber - b.ber) / sd if sd > 0 else 0.0)
    ok = all(v <= 3 for v in z)
    detail = ", ".join(f"{a.snr_db:g} dB: {a.ber:.2e} vs {b.ber:.2e} (z={v:+.1f})"
                       for a, b, v in zip(oimf, imf, z))
    report(7, ok, f"OIMF(L3) vs IMF(L2): {detail}")


# ---------------------------------------------------------------- 8


def test_criterion_8_fig6_ordering_gain(sweeps):
    curves = sweeps.get("fig6", FIG6)
    try:
        gain = snr_gain_at_ber(curves["oimf-sic"], curves["imf-sic"], 1e-3)
    except ValueError as exc:
        report(8, False, str(exc))
    report(8, gain >= 1.5, f"OIMF(L3) over IMF(L2) at 1e-3: {gain:.2f} dB (>= 1.5)")


# ---------------------------------------------------------------- 9


def test_criterion_9_determinism(sweeps, tmp_path):
    sweeps.get("fig2", FIG2)
    first = sweeps.csv["fig2"]
    out = tmp_path / "again.csv"
    assert main(FIG2 + ["--workers", "1", "--out", str(out)]) == 0
    report(9, out.read_bytes() == first, "fig2 rerun with the same seed, byte comparison of CSV")


# ---------------------------------------------------------------- 10


def test_criterion_10_monotone(sweeps):
    names = {"fig2": FIG2, "fig3": FIG3, "fig4": FIG4, "fig5": FIG5, "fig6": FIG6}
    violations = []
    n_curves = 0
    for name, argv in names.items():
        for det, curve in sweeps.get(name, argv).items():
            n_curves += 1
            for a, b in zip(curve.points, curve.points[1:]):
                # a rise counts only if the intervals at z = 3 separate
                if wilson_interval(b.bit_errors, b.total_bits, 3.0)[0] > \
                        wilson_interval(a.bit_errors, a.total_bits, 3.0)[1]:
                    violations.append(f"{name}/{det} {a.snr_db:g}->{b.snr_db:g} dB")
    report(10, not violations, f"{n_curves} curves, violations: {violations or 'none'}")
