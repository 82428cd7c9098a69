#!/usr/bin/env python3
"""Smoke test for the lfrac_py extension module.

Builds nothing itself: it locates the compiled cdylib under target/
(release preferred, then debug), stages it as an importable module, and
exercises the main types and operations end to end.

    cargo build -p lfrac-py --release
    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def stage_module() -> Path:
    candidates = [
        REPO / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("liblfrac_py.so", "lfrac_py.so", "liblfrac_py.dylib")
    ]
    for built in candidates:
        if built.exists():
            stage = Path(tempfile.mkdtemp(prefix="lfrac_py_"))
            shutil.copy2(built, stage / "lfrac_py.so")
            return stage
    sys.exit("no built extension found; run: cargo build -p lfrac-py")


sys.path.insert(0, str(stage_module()))

import lfrac_py as lf  # noqa: E402

Q3 = math.log(2) / math.log(3)
GAMMA_1Q3 = 0.8973709406726663  # Γ(1+ln2/ln3), frozen reference
checks = 0


def check(label, ok):
    global checks
    checks += 1
    if not ok:
        sys.exit(f"FAIL {label}")
    print(f"ok {label}")


# --- sets ------------------------------------------------------------------
s = lf.SelfSimilarSet.middle_p(3.0)
check("dimension = ln2/ln3", abs(s.dimension - Q3) < 1e-14)
check("ratio = 1/3", abs(s.ratio - 1 / 3) < 1e-15)
check("ambient", s.ambient == (0.0, 1.0))

cover = s.refine(2)
check("depth-2 cover size", len(cover) == 4)
check("cover addresses", [c[2] for c in cover] == ["00", "01", "10", "11"])

loc = s.locate(0.5, 5)
check("1/2 in first gap", loc["kind"] == "gap" and loc["generation"] == 1)
loc = s.locate(2 / 3, 3)
check("2/3 address 100", loc["kind"] == "address" and loc["address"] == "100")

s2 = lf.SelfSimilarSet.from_json(s.to_json())
check("set JSON round-trip", abs(s2.dimension - s.dimension) < 1e-15)

# --- staircase and measure ---------------------------------------------------
check("cdf(1/3) = 1/2", abs(s.cdf(1 / 3) - 0.5) < 1e-14)
check("cdf(2/9) = 1/4", abs(s.cdf(2 / 9) - 0.25) < 1e-14)

st = lf.Staircase(s)
check("gamma factor", abs(st.gamma_factor - GAMMA_1Q3) < 1e-12)
check("normalization", abs(st.gamma_factor * st.value(1.0) - 1.0) < 1e-12)
check("gap constancy", st.value(0.4) == st.value(0.6))
check("gamma_plus_one(1/2) = sqrt(pi)/2",
      abs(lf.gamma_plus_one(0.5) - math.sqrt(math.pi) / 2) < 1e-13)

r = lf.integrate_riemann(s, "one", 10)
check("unit integrand collapses", r.lower == r.upper and abs(r.value - 1 / GAMMA_1Q3) < 1e-12)

rx = lf.integrate_recursive(s, "x", 18)
check("first moment", abs(st.gamma_factor * rx.value - 0.5) < 1e-9)
rx2 = lf.integrate_recursive(s, "x2", 18)
check("second moment", abs(st.gamma_factor * rx2.value - 0.375) < 1e-9)
check("certified brackets", rx.certified and rx.lower <= rx.value <= rx.upper)

s_far = lf.SelfSimilarSet.middle_p(3.0, 2.0, 3.0)
rsum = lf.integrate_sum([(s, "one", None), (s_far, "one", None)], 10)
check("superposition doubles", abs(rsum.value - 2 / GAMMA_1Q3) < 1e-11)

try:
    lf.integrate_sum([(s, "one", None), (lf.SelfSimilarSet.middle_p(4.0, 2.0, 3.0), "one", None)], 8)
    sys.exit("FAIL dimension mismatch accepted")
except ValueError:
    check("dimension mismatch rejected", True)

# --- solver -------------------------------------------------------------------
sol = lf.solve(s, "one", "linear", 0.0, 2.5, 12)
for x in (0.0, 0.3, 0.9, 1.0):
    want = 2.5 * math.exp(st.value(x))
    got = sol.value(x)
    assert abs(got - want) <= 1e-12 * want, (x, got, want)
check("exponential closed form", True)
check("initial value exact", sol.value(0.0) == 2.5)

y, lo, hi = sol.evaluate(0.7)
check("bracket ordering", lo <= y <= hi)

sol_neg = lf.solve_with_constant(s, "one", "quadratic", 0.0, 12)
x = 0.4
check("zero-constant branch = -1/P", abs(sol_neg.value(x) + 1 / st.value(x)) < 1e-12)

sol_blow = lf.solve(s, "one", "quadratic", 0.0, 1.0, 12)
check("blow-up detected", sol_blow.blowup is not None and abs(sol_blow.blowup - 0.9661293373272607) < 1e-10)
try:
    sol_blow.value(0.99)
    sys.exit("FAIL evaluation beyond blow-up accepted")
except RuntimeError:
    check("beyond blow-up rejected", True)

sol_sum = lf.solve_sum_rhs([(s, "one", None), (s_far, "one", None)], 0.0, 0.0, 10)
check("sum solution plateau", sol_sum.value(1.5) == sol_sum.value(1.0))
check("sum solution total", abs(sol_sum.value(3.0) - 2 * st.value(1.0)) < 1e-12)

eq = lf.solve(s, "one", "linear", 0.0, 0.0, 8)
check("equilibrium flag", eq.equilibrium == 0.0 and eq.value(0.6) == 0.0)

# --- LFD estimation -----------------------------------------------------------
est = lf.estimate_critical_order(lambda t: abs(t - 0.4) ** 0.5, 0.4)
check("power-law exponent", abs(est["critical_order"] - 0.5) < 0.02)

est = lf.lfd_at(lambda t: math.sqrt(max(t, 0.0)), 0.0, 0.5, side="right")
check("sqrt coefficient = Gamma(3/2)",
      abs(est["coefficient"] - math.gamma(1.5)) < 0.02 * math.gamma(1.5))

est = lf.estimate_critical_order(st.value, 0.0, side="right")
check("staircase exponent at 0", abs(est["critical_order"] - Q3) < 0.03)

est = lf.lfd_at(st.value, 0.5, Q3)
check("gap point locally constant", est["locally_constant"] and est["coefficient"] == 0.0)

report = lf.verify_solution(sol.value, s, "one", "linear", 0.0, 2.5, [0.0, 1 / 3, 1.0], 12)
check("solver output verifies", report["max_integral_residual"] <= 1e-9)

report = lf.verify_solution(lambda t: sol.value(t) + 0.1, s, "one", "linear", 0.0, 2.5, [0.0, 1.0], 12)
check("perturbed candidate flagged", report["max_integral_residual"] >= 0.01)

print(f"\nall {checks} smoke checks passed (lfrac_py {lf.__version__})")
