#!/usr/bin/env python3
"""Writes the demo inputs: household templates, the model spec, a test spec
and the power scenario. The demo sample itself is simulated by build_demo.sh."""

import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
GROUPS = ["YC", "PA", "AD", "YA", "OF", "OM", "SN"]
# Generating values for the demo sample. The full polynomial 2-star and
# triangle structure is not estimable from a few hundred simulated
# households, so the demo model keeps the One modifier only, and the mixing
# coefficients are shifted so that no cell is saturated.
DEMO_TWOSTAR = (-0.4,)
DEMO_TRIANGLE = (1.2,)
DEMO_SHIFT = -1.5

# (cell a, cell b, coefficient); the cells partition all 28 group pairs.
MIX = [
    (["YC"], ["YC"], 8.60), (["YC"], ["PA"], 9.10), (["PA"], ["PA"], 8.17),
    (["AD"], ["AD"], 7.70), (["YC"], ["YA"], 9.64), (["PA"], ["YA"], 7.25),
    (["AD"], ["YA"], 7.73), (["YA"], ["YA"], 7.66), (["YC"], ["OF"], 10.26),
    (["PA"], ["OF"], 9.67), (["AD"], ["OF"], 8.90), (["OF"], ["OF"], 7.45),
    (["YC"], ["OM"], 9.09), (["PA"], ["OM"], 8.76), (["AD"], ["OM"], 8.20),
    (["OF"], ["OM"], 10.11), (["OM"], ["OM"], 6.59), (["OF"], ["SN"], 8.12),
    (["OM"], ["SN"], 7.51), (["SN"], ["SN"], 7.82), (["AD"], ["YC", "PA"], 8.07),
    (["YA"], ["OF", "OM"], 8.02), (["YC", "PA"], ["SN"], 8.29),
    (["AD", "YA"], ["SN"], 9.93),
]


def term(stat, mod=None, label=None):
    t = {"stat": stat}
    if mod:
        t["mod"] = mod
    if label:
        t["label"] = label
    return t


def model1(reduced=False, twostar=(1.91, -2.15, 0.34), triangle=(5.55, -3.46, 0.93), shift=0.0):
    """Model 1 structure; the reduced form keeps only the One modifier on the
    2-star and triangle terms."""
    terms, theta = [], []
    size = [({"kind": "logn"}, "logn"), ({"kind": "logn2"}, "logn2")]
    for mod, suffix in size:
        terms.append(term({"kind": "edges"}, mod, f"edges.{suffix}"))
    theta += [-14.28, 5.69]
    terms.append(term({"kind": "edges"}, {"kind": "flag", "name": "brussels"}, "edges.brussels"))
    terms.append(term({"kind": "edges"}, {"kind": "flag", "name": "weekend"}, "edges.weekend"))
    theta += [0.08, 0.14]
    for kind, coefs in (("twostar", twostar), ("triangle", triangle)):
        terms.append(term({"kind": kind}, None, kind))
        theta.append(coefs[0])
        if reduced:
            continue
        for (mod, suffix), coef in zip(size, coefs[1:]):
            terms.append(term({"kind": kind}, mod, f"{kind}.{suffix}"))
            theta.append(coef)
    for a, b, coef in MIX:
        name = "+".join(a) + "-" + "+".join(b)
        terms.append(term({"kind": "mix", "attr": "group", "a": a, "b": b}, None, f"mix.{name}"))
        theta.append(round(coef + shift, 2))
        if (a, b) == (["OF"], ["OM"]):
            terms.append(term({"kind": "mix", "attr": "group", "a": a, "b": b},
                              {"kind": "flag", "name": "child_absent"}, "mix.OF-OM.child_absent"))
            theta.append(-1.22)
    return {"terms": terms, "offsets": []}, theta


def household(rng, k):
    kind = rng.choices(["family", "single_parent", "couple", "seniors", "threegen", "adults"],
                       weights=[0.45, 0.1, 0.15, 0.1, 0.1, 0.1])[0]
    kids = lambda count: [rng.choice(["YC", "PA", "AD", "YA"]) for _ in range(count)]
    if kind == "family":
        groups = ["OF", "OM"] + kids(rng.choice([1, 1, 2, 2, 2, 3, 4]))
    elif kind == "single_parent":
        groups = [rng.choice(["OF", "OF", "OM"])] + kids(rng.choice([1, 2, 3]))
    elif kind == "couple":
        groups = ["OF", "OM"]
    elif kind == "seniors":
        groups = ["SN"] * rng.choice([1, 2, 2]) + (["OF"] if rng.random() < 0.3 else [])
        if len(groups) == 1:
            groups.append(rng.choice(["OF", "OM", "YA"]))
    elif kind == "threegen":
        groups = ["SN", "OF", "OM"] + kids(rng.choice([1, 2, 3]))
    else:
        groups = [rng.choice(["OF", "OM", "YA", "SN"]) for _ in range(rng.choice([2, 3, 4]))]
    nodes = []
    for g in groups:
        gender = {"OF": "F", "OM": "M"}.get(g, rng.choice(["F", "M"]))
        nodes.append({"group": g, "gender": gender})
    return {
        "id": f"h{k:04d}",
        "nodes": nodes,
        "edges": [],
        "attrs": {
            "weekend": rng.random() < 2 / 7,
            "brussels": rng.random() < 0.1,
            "log_pop_density": round(rng.gauss(6.0, 1.2), 3),
            "child_absent": rng.random() < 0.2,
        },
    }


def main():
    rng = random.Random(20100)
    with open(HERE / "templates.jsonl", "w") as f:
        f.write(json.dumps({"taxonomy": GROUPS}) + "\n")
        for k in range(1, 601):
            f.write(json.dumps(household(rng, k)) + "\n")

    model, theta = model1()
    (HERE / "model1.json").write_text(json.dumps(model, indent=2) + "\n")
    ses = [3.78, 1.71, 0.19, 0.06, 4.95, 5.87, 1.72, 11.55, 14.29, 4.38, 1.88, 1.88, 1.85, 1.84,
           2.07, 1.85, 1.80, 1.85, 1.85, 1.85, 1.84, 1.87, 1.87, 1.83, 1.85, 1.84, 0.30, 1.87,
           1.82, 1.86, 1.81, 1.85, 1.84, 1.93, 2.09]
    published = {
        "labels": [t["label"] for t in model["terms"]],
        "theta": theta,
        "sigma": [[ses[r] ** 2 if r == c else 0.0 for c in range(len(ses))] for r in range(len(ses))],
        "loglik_kind": "exact", "loglik": None, "aic": None, "converged": True,
        "message": "printed Model 1 estimates with a diagonal covariance from the printed standard errors",
    }
    (HERE / "model1_published_fit.json").write_text(json.dumps(published, indent=2) + "\n")

    demo, demo_theta = model1(reduced=True, twostar=DEMO_TWOSTAR, triangle=DEMO_TRIANGLE, shift=DEMO_SHIFT)
    (HERE / "model_demo.json").write_text(json.dumps(demo, indent=2) + "\n")
    (HERE / "model_demo.theta").write_text(",".join(repr(x) for x in demo_theta) + "\n")

    tests = {"tests": [
        {"kind": "omnibus", "label": "any logn or logn2",
         "terms": ["edges.logn", "edges.logn2", "twostar.logn", "twostar.logn2",
                   "triangle.logn", "triangle.logn2"]},
        {"kind": "omnibus", "label": "any logn2", "terms": ["edges.logn2", "twostar.logn2", "triangle.logn2"]},
        {"kind": "omnibus", "label": "twostar or triangle logn2", "terms": ["twostar.logn2", "triangle.logn2"]},
        {"kind": "contrast", "label": "OF-OM minus OM-OM", "weights": {"mix.OF-OM": 1, "mix.OM-OM": -1}},
        {"kind": "z", "label": "printed 1.16 (0.47)", "estimate": 1.16, "se": 0.47},
    ]}
    (HERE / "tests.json").write_text(json.dumps(tests, indent=2) + "\n")

    scenario = {"S_grid": [2, 4, 6, 8, 10, 15, 20, 30], "n": 8, "m": 20,
                "theta_h1": {"homophily": 1.1}, "test_term": "homophily",
                "alpha": 0.05, "replicates": 500, "seed": 1}
    (HERE / "power_fig1.json").write_text(json.dumps(scenario, indent=2) + "\n")
    null = dict(scenario, theta_h1={"homophily": 0.0}, replicates=1000)
    (HERE / "power_null.json").write_text(json.dumps(null, indent=2) + "\n")


if __name__ == "__main__":
    main()
