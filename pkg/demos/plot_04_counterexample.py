"""
When the distance is not bounded away from zero
===============================================

The lower half plane and the band |y| <= 1/(1+x^2) are disjoint, yet their
boundaries come arbitrarily close far out. The avoidance principle needs a
positive initial distance, so it says nothing here. On a box of half width 6
the measured gap is under two grid cells and the report says so rather than
returning a verdict.
"""

from importlib import resources

from mcf_avoid import load_config, run_scenario

text = (resources.files("mcf_avoid") / "scenarios" / "counterexample_graphs.yaml").read_text()
cfg = load_config(text)
h = cfg.build_grid().h

res = run_scenario(cfg)
print(f"D(0) = {res.details['D0']:.4f}, 2h = {2 * h:.4f}")
print("status:", res.report.status)
for row in res.rows:
    print(",".join(row))
