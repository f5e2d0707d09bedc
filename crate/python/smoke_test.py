#!/usr/bin/env python3
"""Smoke test for the capflow Python extension.

Copies the built cdylib next to a temp directory as `capflow.so`, imports
it, and checks closed-form cap quantities, graph measurement, and a short
volume-preserving flow run.

Build the extension first:  cargo build -p capflow-py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def locate_cdylib() -> Path:
    candidates = []
    for profile in ("debug", "release"):
        for name in ("libcapflow_py.so", "libcapflow_py.dylib", "capflow_py.dll"):
            p = REPO / "target" / profile / name
            if p.exists():
                candidates.append(p)
    if not candidates:
        sys.exit("extension not found; run `cargo build -p capflow-py` first")
    return max(candidates, key=lambda p: p.stat().st_mtime)


def approx(a, b, tol=1e-10):
    assert abs(a - b) <= tol * max(1.0, abs(b)), f"{a} != {b} (tol {tol})"


def main():
    lib = locate_cdylib()
    tmp = Path(tempfile.mkdtemp(prefix="capflow-smoke-"))
    shutil.copy2(lib, tmp / "capflow.so")
    sys.path.insert(0, str(tmp))
    import capflow

    theta = math.pi / 3

    # Closed forms for the planar unit cap with theta = pi/3.
    q = capflow.cap_quantities(1, theta, 1.0)
    approx(q["volume"], theta - math.sin(theta) * math.cos(theta))
    approx(q["w_theta"], 2.0 * q["volume"])
    approx(q["i_theta"], 4.0 * q["volume"])
    approx(q["h"], 1.0)

    # Hemisphere in n = 2: I_theta = 18 pi.
    q2 = capflow.cap_quantities(2, math.pi / 2, 1.0)
    approx(q2["i_theta"], 18.0 * math.pi)

    # Measuring the discrete cap profile reproduces the closed forms and
    # satisfies the two-way capillary-area identity.
    phi, rho = capflow.cap_profile("planar", theta, 1.0, 401)
    assert len(phi) == len(rho) == 401
    m = capflow.measure("planar", theta, rho)
    approx(m["volume"], q["volume"], 1e-8)
    approx(m["w_theta"], m["w_theta_integral"], 1e-8)
    assert m["contact_residual"] < 1e-6
    assert abs(m["h_min"] - 1.0) < 1e-6 and abs(m["h_max"] - 1.0) < 1e-6

    # Radii of an exact cap pinch to its radius; the fit recovers it.
    lo, hi = capflow.capillary_radii("planar", theta, rho)
    assert abs(lo - 1.0) < 1e-4 and abs(hi - 1.0) < 1e-4
    x0, r, res = capflow.fit_cap("planar", theta, rho)
    approx(r, 1.0, 1e-8)
    assert res < 1e-8

    # The constraint inversion is consistent with the closed forms.
    approx(capflow.radius_from_constraint(1, theta, q["volume"], "volume"), 1.0)
    approx(capflow.radius_from_constraint(1, theta, q["w_theta"], "area"), 1.0)

    # A short perturbed volume-preserving run converges to a cap with the
    # initial volume, and the verification suite passes.
    out = capflow.run(
        "mode=planar\n"
        "alpha=1\n"
        f"theta={theta!r}\n"
        "variant=volume\n"
        "N=101\n"
        "perturb_modes=2:0.05\n"
    )
    assert out["verdict"] == "Converged", out["verdict"]
    assert out["suite_pass"], out["report"]
    v0 = out["snapshots"][0]["volume"]
    v1 = out["snapshots"][-1]["volume"]
    approx(v1, v0, 1e-12)
    assert out["radius_rel_error"] < 1e-3
    assert len(out["rho_final"]) == 101

    # Invalid input surfaces as ValueError.
    try:
        capflow.cap_quantities(3, theta, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError for n=3")

    print("smoke test: all checks passed")


if __name__ == "__main__":
    main()
