"""
Building a chain by pivoting the initial link
=============================================

Bend the standing torus by an angle psi, find the largest admissible angle
psi0 and the smallest number of link pairs m it allows, then close the chain
by rotating the pair about a vertical axis.
"""
import sys
from pathlib import Path

from antoine import (
    build_initial_link,
    build_theorem2_chain,
    enclosing_similar_torus,
    find_psi0,
    minimal_m,
    validate_chain,
)
from antoine import io

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo_output")
out.mkdir(parents=True, exist_ok=True)

b1, b2 = build_initial_link(1.0, 4.0)
psi0 = find_psi0(b1, b2)
m = minimal_m(psi0)
print(f"psi0 = {psi0:.12f}, smallest m = {m}, so {2 * m} links")

chain = build_theorem2_chain(1.0, 4.0, m=m)
verdict = validate_chain(chain, use_symmetry=False)
print("valid:", verdict.ok)
for family, margin in verdict.min_margins().items():
    print(f"  {family:12s} {margin: .6f}")

# a torus similar to the links can only enclose the chain when sin(pi/m) < r/R
chain13 = build_theorem2_chain(1.0, 4.0, m=13)
big = enclosing_similar_torus(chain13, 1.0, 4.0)
print(f"enclosing torus for 26 links: R = {big.R:.4f}, r = {big.r:.4f}")

io.write_chain_json(out / "chain12.json", chain, verdict)
io.write_obj(out / "chain12.obj", chain.links)
print("wrote", out / "chain12.json", "and", out / "chain12.obj")
