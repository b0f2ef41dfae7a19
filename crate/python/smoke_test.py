#!/usr/bin/env python3
"""Smoke test for the stabsep_py extension module.

Builds nothing itself: run `cargo build --release -p stabsep-py` first.
The script locates the cdylib in target/, exposes it under the module name
stabsep_py, and exercises the main types and operations end to end.
"""

import math
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        ROOT / "target" / "release" / "libstabsep_py.so",
        ROOT / "target" / "debug" / "libstabsep_py.so",
        ROOT / "target" / "release" / "libstabsep_py.dylib",
        ROOT / "target" / "debug" / "libstabsep_py.dylib",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit(
            "stabsep_py cdylib not found; run `cargo build --release -p stabsep-py` first"
        )
    staging = pathlib.Path(tempfile.mkdtemp(prefix="stabsep_py_"))
    suffix = ".so" if built.suffix == ".so" else ".so"  # import machinery wants .so
    shutil.copy2(built, staging / f"stabsep_py{suffix}")
    sys.path.insert(0, str(staging))
    import stabsep_py

    return stabsep_py


def approx(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    sp = load_module()

    # states and criticality
    ghz = sp.PureState.ghz(3)
    critical, deviation = sp.check_critical(ghz)
    assert critical and deviation < 1e-12, (critical, deviation)

    w = sp.PureState.w(3)
    critical, _ = sp.check_critical(w)
    assert not critical
    assert sp.null_cone_flag(w) is True
    assert sp.null_cone_flag(ghz) is False

    # invariants
    assert approx(abs(sp.f4_three_qubit(ghz)), 0.25, 1e-12)
    bell = sp.PureState.bell()
    assert approx(abs(sp.f2_bipartite(bell)), 1.0, 1e-12)
    omega = complex(math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3))
    l_state = sp.PureState.crit4([1, omega, omega.conjugate(), 0])
    assert abs(sp.f2_four_qubit(l_state)) < 1e-10

    # norm minimality of the critical representative
    assert sp.kempf_ness_probe(ghz, trials=50, seed=7) >= 1 - 1e-9

    # normal form of a Schmidt state is the Bell state
    skew = sp.PureState.from_schmidt([0.6, 0.4])
    g, normal = sp.normalize_to_critical(skew)
    assert normal.overlap(bell) > 1 - 1e-8
    assert g.is_special

    # four-qubit orbit machinery
    z = [1, 2, 3j, 5]
    psi = sp.PureState.crit4(z)
    klein = sp.StabilizerGroup.catalog("klein4")
    assert klein.order == 4 and klein.is_unitary
    verified, residual = klein.verify(psi)
    assert verified and residual < 1e-10

    identity = sp.LocalOperator.identity([2, 2, 2, 2])
    single = sp.LocalOperator(
        [2, 2, 2, 2],
        [
            [[2, 0], [0, 0.5]],
            [[1, 0], [0, 1]],
            [[1, 0], [0, 1]],
            [[1, 0], [0, 1]],
        ],
    )
    double = sp.LocalOperator(
        [2, 2, 2, 2],
        [
            [[2, 0], [0, 0.5]],
            [[2, 0], [0, 0.5]],
            [[1, 0], [0, 1]],
            [[1, 0], [0, 1]],
        ],
    )

    # ADM spectrum of the single-party filter: {4, 1/4}/(17/8), x8 each
    spectrum = sp.adm_spectrum(psi, single)
    assert approx(spectrum[0], 4 / (17 / 8), 1e-12)
    assert approx(spectrum[-1], 0.25 / (17 / 8), 1e-12)

    # deterministic convertibility: one-party deformations are reachable
    # from the critical state, two-party diagonal ones are not
    v = sp.check_deterministic(psi, klein, identity, single)
    assert v.feasible and v.residual <= 1e-8, v
    v = sp.check_deterministic(psi, klein, identity, double)
    assert not v.feasible and v.method == "twirl-necessary-failed", v
    conv, tw = sp.sep_characterization_4q(z, double)
    assert not conv and tw > 1e-3

    # probability bounds collapse for a critical target
    bounds = sp.pmax_bounds(psi, klein, single, identity)
    lam_min = 0.25 / (17 / 8)
    assert bounds.exact_reason == "critical-target"
    assert approx(bounds.exact, lam_min, 1e-9)
    assert approx(bounds.lower, lam_min, 1e-8)
    assert approx(bounds.upper_psd, lam_min, 1e-6)
    assert approx(sp.pmax_to_critical(psi, single), lam_min, 1e-12)

    # majorization
    assert sp.check_bipartite([0.5, 0.3, 0.2], [0.6, 0.25, 0.15]) == "feasible"
    assert sp.check_bipartite([0.6, 0.25, 0.15], [0.5, 0.3, 0.2]) == "infeasible"
    assert (
        sp.check_bipartite([0.5, 0.5, 0.0], [0.5, 0.3, 0.2])
        == "different-slocc-class"
    )
    assert sp.majorizes([0.6, 0.25, 0.15], [0.5, 0.3, 0.2])

    # twirls
    zero = sp.PureState([2, 2, 2, 2], [1.0 + 0j] + [0j] * 15)
    proj = [[(1 + 0j) if i == 0 and j == 0 else 0j for j in range(16)] for i in range(16)]
    twirled = klein.twirl(proj)
    assert approx(twirled[0][0].real, 0.5, 1e-12)
    assert approx(twirled[15][15].real, 0.5, 1e-12)
    assert zero.overlap(zero) == 1.0

    sigma = [[0j] * 8 for _ in range(8)]
    sigma[1][2] = 1 + 0j
    out = sp.ghz_t0_twirl(sigma)
    assert all(abs(out[i][j]) == 0 for i in range(8) for j in range(8))
    sigma = [[0j] * 8 for _ in range(8)]
    sigma[0][0] = 1 + 0j
    out = sp.ghz_t_twirl(sigma)
    assert approx(out[0][0].real, 0.5, 1e-15) and approx(out[7][7].real, 0.5, 1e-15)

    # GHZ-class decisions
    id3 = sp.LocalOperator.identity([2, 2, 2])
    stretched = sp.LocalOperator(
        [2, 2, 2],
        [[[2, 0], [0, 0.5]], [[1, 0], [0, 1]], [[1, 0], [0, 1]]],
    )
    verdict, _ = sp.check_ghz_class(id3, stretched)
    assert verdict == "feasible"

    # monotones
    e = sp.monotones(psi, identity)
    assert approx(e[0], 16.0, 1e-9) and approx(e[-1], 1.0, 1e-9)
    assert approx(sp.teleportation_monotone(psi, identity), 0.0, 1e-9)

    print("stabsep_py smoke test: OK")


if __name__ == "__main__":
    main()
