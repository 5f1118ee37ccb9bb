"""Acceptance suite: every guaranteed behavior at its pinned tolerance.

Each test prints one PASS/FAIL line (bypassing capture so the lines show in
live runs). The two circuit experiments are desk-scale: pure-measurement
dumbbell sweeps at L in {8, 12} with 2000 trajectories per point, and
cluster-to-volume sweeps for the diagonal-subsystem-symmetric versus
unconstrained ensembles. Experiment design notes:

* the dumbbell uses L/4 heads with the handle completing the wrapped
  diagonal, so the regions stay geometrically similar across sizes (fixed
  heads leave the crossing exponent badly conditioned at these sizes);
* the symmetric-vs-unconstrained exponent comparison is evaluated with the
  multilevel objective, the most finite-size-robust of the three, and is
  reported as inconclusive rather than failed if the widths overlap.
"""

import sys
import time

import numpy as np
import pytest

import mipt2d as m
from mipt2d.circuit import OperationMix
from mipt2d.diagnostics import DiagnosticConfig, make_regions, s_top_seven
from mipt2d.ensembles import clifford_from_index, enumerate_z_preserving, \
    symplectic_order
from mipt2d.fss import DataPoint, fit_profile, fit_scaling, fit_survival, \
    profile_variable, survival_timescale
from mipt2d.stabilizer import PauliString, StabilizerTableau
from mipt2d.sweep import SweepPoint, run_sweep

from conftest import dense_entropy, dense_state_from_tableau, naive_rank, \
    random_tableau

WORKERS = 2


def announce(name, ok, detail=""):
    tag = "PASS" if ok else "FAIL"
    line = f"ACCEPTANCE [{name}] {tag}" + (f": {detail}" if detail else "")
    print(line, file=sys.__stdout__, flush=True)
    print(line)


def datapoints_from(points, results):
    out = []
    for pt in points:
        r = results[pt.index]
        out.append(DataPoint(pt.L, pt.p, float(r["delta"]), float(r["sigma"]),
                             int(r["count"])))
    return out


def sweep_line(ensemble, diag, Ls, ps, mix_of, trajectories, seed):
    dps = []
    curves = {}
    for L in Ls:
        points = [SweepPoint(i, L, p, mix_of(p)) for i, p in enumerate(ps)]
        res = run_sweep(points, ensemble, diag, trajectories, seed + L,
                        workers=WORKERS)
        dps.extend(datapoints_from(points, res))
        curves[L] = np.array([res[pt.index]["delta"] for pt in points])
    return dps, curves


# ---------------------------------------------------------------------------


def test_group_counts_exact():
    t0 = time.monotonic()
    expected = {1: 6, 2: 720, 3: 1_451_520}
    ok = True
    details = []
    for k, want in expected.items():
        keys = np.empty(symplectic_order(k), dtype=np.uint64)
        shift = np.uint64(64 - 4 * k * k) if 4 * k * k <= 64 else None
        assert 4 * k * k <= 64, "packing assumes k <= 4"
        for idx in range(symplectic_order(k)):
            mat = clifford_from_index(idx, k)
            bits = np.packbits(mat.reshape(-1), bitorder="little")
            word = int.from_bytes(bits.tobytes().ljust(8, b"\0"), "little")
            keys[idx] = word
        distinct = np.unique(keys).size
        details.append(f"k={k}: {distinct}")
        ok = ok and distinct == want
    zp = {k: enumerate_z_preserving(k).shape[0] for k in (3, 4)}
    ok = ok and zp[3] == 2**6 and zp[4] == 2**10
    elapsed = time.monotonic() - t0
    ok = ok and elapsed < 300
    announce("group-counts", ok,
             ", ".join(details) + f", z-preserving {zp}, {elapsed:.0f}s")
    assert ok


def test_entropy_oracle_equivalence():
    t0 = time.monotonic()
    rng = np.random.default_rng(101)
    failures = 0
    for _ in range(200):
        n = int(rng.integers(2, 9))
        st = random_tableau(n, rng)
        vec = dense_state_from_tableau(st)
        size = int(rng.integers(1, n))
        region = rng.choice(n, size=size, replace=False)
        dense = dense_entropy(vec, list(region), n)
        if abs(dense - round(dense)) > 1e-9 or \
                st.entanglement_entropy(region) != round(dense):
            failures += 1
    elapsed = time.monotonic() - t0
    ok = failures == 0 and elapsed < 120
    announce("entropy-oracle", ok, f"200 states, {failures} mismatches, {elapsed:.0f}s")
    assert ok


def test_measurement_algebra_properties():
    from mipt2d.gf2 import pauli_products_matrix

    t0 = time.monotonic()
    rng = np.random.default_rng(202)
    cases = 10**5
    failures = 0
    for _ in range(cases):
        n = int(rng.integers(2, 11))
        st = random_tableau(n, rng)
        bits = rng.integers(0, 2, size=2 * n, dtype=np.uint8)
        if not bits.any():
            bits[int(rng.integers(2 * n))] = 1
        pauli = PauliString(n, bits)
        st.measure_pauli(pauli)
        if not st.stabilizes(pauli):
            failures += 1
            continue
        if st.rank() != n:
            failures += 1
            continue
        if pauli_products_matrix(st.tab, st.tab, n).any():
            failures += 1
            continue
        snapshot = st.tab.copy()
        if st.measure_pauli(pauli) != "deterministic" or \
                not np.array_equal(st.tab, snapshot):
            failures += 1
    elapsed = time.monotonic() - t0
    ok = failures == 0
    announce("measurement-algebra", ok,
             f"{cases} randomized cases, {failures} failures, {elapsed:.0f}s")
    assert ok


def test_cluster_state_diagnostics():
    geom = m.LatticeGeometry(8)
    st = StabilizerTableau.product_state(geom.n, "Z")
    for c in range(geom.n):
        st.measure_pauli(geom.cluster_stabilizer(c))
    ring = s_top_seven(st, make_regions(geom, "ring"))
    cyl = s_top_seven(st, make_regions(geom, "cylinder-quasi1d"))
    regions = make_regions(geom, "dumbbell")

    def naive_entropy(region):
        cols = list(sorted(region)) + [st.n + q for q in sorted(region)]
        return naive_rank(st.tab[:, cols]) - len(region)

    a, b, c = regions.A, regions.B, regions.C
    golden_recomputed = (naive_entropy(a + b) + naive_entropy(b + c)
                         + naive_entropy(a + c) - naive_entropy(a)
                         - naive_entropy(b) - naive_entropy(c)
                         - naive_entropy(a + b + c))
    dumb = m.s_dumb(st, regions)
    GOLDEN_DUMBBELL = 1  # committed value, from the schoolbook oracle
    ok = ring == 0 and cyl == 0 and dumb == GOLDEN_DUMBBELL \
        and golden_recomputed == GOLDEN_DUMBBELL
    announce("cluster-diagnostics", ok,
             f"ring={ring} cylinder={cyl} dumbbell={dumb} (golden {GOLDEN_DUMBBELL})")
    assert ok


@pytest.fixture(scope="module")
def pure_measurement_fit():
    t0 = time.monotonic()
    ps = [0.42, 0.45, 0.48, 0.50, 0.52, 0.55, 0.58]
    diag = DiagnosticConfig("s_dumb", head_size="scaled")
    ens = m.make_ensemble("unconstrained")
    dps, curves = sweep_line(ens, diag, (8, 12), ps,
                             lambda p: OperationMix(0.0, p, 1.0 - p),
                             trajectories=2000, seed=20260809)
    fits = {meth: fit_scaling(dps, meth, initial=(0.5, 0.85))
            for meth in ("nearest", "multilevel", "polynomial")}
    return {"fits": fits, "curves": curves, "ps": ps,
            "elapsed": time.monotonic() - t0}


def test_pure_measurement_critical_point(pure_measurement_fit):
    out = pure_measurement_fit
    diff = out["curves"][12] - out["curves"][8]
    crossing = bool((diff[0] > 0) and (diff[-1] < 0))
    fit = out["fits"]["polynomial"]
    ok = (crossing and 0.45 <= fit.p_c <= 0.55 and 0.5 <= fit.nu <= 1.3
          and np.isfinite(fit.p_c_width) and np.isfinite(fit.nu_width)
          and out["elapsed"] < 7200)
    others = ", ".join(f"{k}: pc={v.p_c:.3f} nu={v.nu:.2f}"
                       for k, v in out["fits"].items())
    announce("pure-measurement-critical-point", ok,
             f"crossing={crossing}, polynomial pc={fit.p_c:.4f}+-{fit.p_c_width:.4f} "
             f"nu={fit.nu:.3f}+-{fit.nu_width:.3f} [{others}] "
             f"{out['elapsed']:.0f}s")
    assert ok


@pytest.fixture(scope="module")
def boundary_fits(sspt_table):
    diag = DiagnosticConfig("s_top", region_tag="cylinder-quasi1d")
    line = lambda p: OperationMix(p, 0.0, 1.0 - p)
    unc_dps, _ = sweep_line(m.make_ensemble("unconstrained"), diag, (8, 12),
                            [0.03, 0.045, 0.06, 0.075, 0.09, 0.11],
                            line, trajectories=330, seed=31)
    sspt_dps, _ = sweep_line(m.make_ensemble("sspt-diagonal", table=sspt_table),
                             diag, (8, 12),
                             [0.10, 0.13, 0.16, 0.19, 0.22, 0.26],
                             line, trajectories=330, seed=37)
    fits = {}
    for name, dps, init in (("unconstrained", unc_dps, (0.07, 0.9)),
                            ("sspt", sspt_dps, (0.17, 0.5))):
        fits[name] = {meth: fit_scaling(dps, meth, initial=init)
                      for meth in ("nearest", "multilevel", "polynomial")}
    return fits


def test_sspt_boundary_direction(boundary_fits):
    unc = boundary_fits["unconstrained"]["multilevel"]
    ss = boundary_fits["sspt"]["multilevel"]
    pc_ok = (0.04 <= unc.p_c <= 0.10) and (0.12 <= ss.p_c <= 0.22) \
        and ss.p_c > unc.p_c
    nu_ordered = ss.nu < unc.nu
    nu_separated = abs(ss.nu - unc.nu) > ss.nu_width + unc.nu_width
    nu_flag = "conclusive" if (nu_ordered and nu_separated) else "inconclusive"
    ok = pc_ok
    announce("sspt-boundary-direction", ok,
             f"pc_unconstrained={unc.p_c:.4f}+-{unc.p_c_width:.4f} in [0.04,0.10], "
             f"pc_sspt={ss.p_c:.4f}+-{ss.p_c_width:.4f} in [0.12,0.22], "
             f"nu {ss.nu:.3f}+-{ss.nu_width:.3f} vs {unc.nu:.3f}+-{unc.nu_width:.3f} "
             f"({nu_flag})")
    assert ok


def test_fitting_pipeline_oracle():
    t0 = time.monotonic()
    p_c, nu = 0.5, 0.85
    rng = np.random.default_rng(5)
    pts = []
    for L in (8, 12, 16, 24):
        for p in np.linspace(p_c - 0.06, p_c + 0.06, 13):
            x = (p - p_c) * L ** (1.0 / nu)
            delta = 1.0 / (1.0 + np.exp(2.0 * x)) + rng.normal(0, 0.004)
            pts.append(DataPoint(int(L), float(p), float(delta), 0.004, 1000))
    fits = {meth: fit_scaling(pts, meth, initial=(0.48, 1.0))
            for meth in ("nearest", "multilevel", "polynomial")}
    ok = all(abs(f.p_c - p_c) <= 0.05 * p_c and abs(f.nu - nu) <= 0.05 * nu
             for f in fits.values())
    fl = list(fits.values())
    for i in range(len(fl)):
        for j in range(i + 1, len(fl)):
            ok = ok and abs(fl[i].p_c - fl[j].p_c) <= fl[i].p_c_width + fl[j].p_c_width
            ok = ok and abs(fl[i].nu - fl[j].nu) <= fl[i].nu_width + fl[j].nu_width
    elapsed = time.monotonic() - t0
    ok = ok and elapsed < 60
    announce("fitting-oracle", ok,
             ", ".join(f"{k}: pc={v.p_c:.4f} nu={v.nu:.4f}" for k, v in fits.items())
             + f", {elapsed:.1f}s")
    assert ok


def test_survival_time_law():
    p_c, nu = 0.42, 0.66
    rng = np.random.default_rng(3)
    series = {}
    for L in (8, 12, 16):
        for p in (0.22, 0.27, 0.32, 0.37):
            tau = float(survival_timescale(L, p, p_c, nu))
            t = np.linspace(0, 4 * tau, 100)[1:]
            series[(L, p)] = (t, 20.0 * np.exp(-t / tau)
                              * (1 + rng.normal(0, 0.01, size=t.size)))
    fit = fit_survival(series, initial=(0.45, 0.8))
    ok = abs(fit.p_c - p_c) <= 0.10 * p_c and abs(fit.nu - nu) <= 0.10 * nu
    announce("survival-law", ok,
             f"planted ({p_c}, {nu}), recovered ({fit.p_c:.4f}, {fit.nu:.4f})")
    assert ok


@pytest.fixture(scope="module")
def critical_profile_data():
    diag = DiagnosticConfig("profile", direction="row")
    ens = m.make_ensemble("unconstrained")
    points = [SweepPoint(0, 12, 0.5, OperationMix(0.0, 0.5, 0.5))]
    res = run_sweep(points, ens, diag, trajectories=150, seed=71,
                    workers=WORKERS)
    return np.asarray(res[0]["delta"], dtype=float)


def test_profile_regression(critical_profile_data):
    L = 16
    u = profile_variable(L, np.arange(1, L))
    synthetic = 2.0 + 0.5 * u
    (c0, c1), _ = fit_profile(synthetic, L, "linear-log")
    synth_ok = abs(c0 - 2.0) <= 1e-6 and abs(c1 - 0.5) <= 1e-6
    prof = critical_profile_data
    _, r_lin = fit_profile(prof, 12, "linear-log")
    _, r_quad = fit_profile(prof, 12, "quadratic-log")
    nested_ok = r_quad < r_lin
    ok = synth_ok and nested_ok
    announce("profile-regression", ok,
             f"synthetic coeffs ({c0:.8f}, {c1:.8f}), real L=12 residuals "
             f"quad {r_quad:.4g} < lin {r_lin:.4g}: {nested_ok}")
    assert ok


def test_run_determinism_across_workers(tmp_path):
    from mipt2d.config import parse_config
    from mipt2d.sweep import run_experiment

    template = """
ensemble = z-preserving
ensemble_k = 3
diagnostic = half_system
L = 4
axis = pmz
fixed = pu = 0.2
p = 0.3, 0.5
trajectories = 4
seed = 5
workers = {workers}
interval = 8
total = 128
out = {out}
"""
    blobs = []
    for w in (1, 2):
        cfg = parse_config(template.format(workers=w, out=tmp_path / f"w{w}"))
        out = run_experiment(cfg)
        blobs.append(open(out["csv"], "rb").read())
    rerun = parse_config(template.format(workers=2, out=tmp_path / "w2b"))
    blobs.append(open(run_experiment(rerun)["csv"], "rb").read())
    ok = blobs[0] == blobs[1] == blobs[2] and len(blobs[0]) > 0
    announce("determinism", ok,
             f"identical CSV bytes for workers 1/2 and rerun: {ok}")
    assert ok
