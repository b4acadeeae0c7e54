"""Smoke test for the nptasmc Python extension.

Build and install first:  pip install maturin && maturin develop -m crates/py/Cargo.toml
"""

import nptasmc

examples = {name: (model, query) for name, model, query in nptasmc.examples()}
text, qtext = examples["abt_time"]

model = nptasmc.Model(text)
query = nptasmc.Query(qtext, model)
print(repr(model), query)
assert model.components == ["A", "B", "T"]
assert query.bound == 2.0

trace, sat, hit = nptasmc.simulate(model, query, seed=1, index=0)
assert trace.startswith("run observer time bound 2.0")
assert sat == (hit is not None)

assert nptasmc.required_samples(0.05, 0.05) == 4794

est = nptasmc.estimate(model, query, epsilon=0.02, delta=0.05, seed=7)
print("estimate", est)
assert abs(est["p_hat"] - 0.75) < 0.02

p, err = nptasmc.oracle(model, query)
print("oracle", p, err)
assert abs(p - 0.75) < 1e-6

res = nptasmc.sprt(model, query, theta=0.6, seed=3)
print("sprt", res)
assert res["verdict"] == "H0"

m2 = nptasmc.Model(examples["ab_t_time"][0])
q2 = nptasmc.Query(qtext, m2)
res = nptasmc.compare(model, query, m2, q2, seed=11)
print("compare", res)
assert res["verdict"] == "Process1Superior"

try:
    nptasmc.Model("network broken\nautomaton A\n")
except ValueError as e:
    print("rejected:", e)
else:
    raise AssertionError("broken model accepted")

print("smoke test passed")
