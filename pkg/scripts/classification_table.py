"""Classify the catalog examples and print their limit estimates."""

import argparse
import json
import math
from dataclasses import asdict, dataclass, field

from musielak_kit.nfunc import Grid, catalog, verify_axioms


@dataclass
class Config:
    tol: float = 1e-3
    cases: list = field(default_factory=lambda: [
        {"name": "power_tu2"},
        {"name": "exp_abs"},
        {"name": "exp_abs_literal"},
        {"name": "geo_minus_one", "params": {"a": math.e}, "t": [1.0, 2.0]},
        {"name": "affine_slope", "t": [1.0]},
    ])


def run(cfg: Config) -> list[dict]:
    rows = []
    for case in cfg.cases:
        m = catalog(case["name"], **case.get("params", {}))
        grid = Grid.build(m, t=case.get("t"))
        rep = verify_axioms(m, grid, cfg.tol)
        rows.append({
            "name": case["name"],
            "verdict": rep.classification.value,
            "axioms": {k: rep.verdicts[k] for k in ("axiom1", "axiom2", "axiom3", "axiom4", "zero_at_zero")},
            "limit0_estimate": rep.limit0_estimate,
            "limit_inf_slope": rep.limit_inf_slope,
        })
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tol", type=float, default=Config.tol)
    ap.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    args = ap.parse_args()
    cfg = Config(tol=args.tol)
    rows = run(cfg)
    if args.json:
        print(json.dumps({"config": asdict(cfg), "rows": rows}, indent=2))
        return
    print(f"{'function':<18}{'verdict':<22}{'lim0 M/u':>12}{'slope @Umax':>14}")
    for r in rows:
        print(f"{r['name']:<18}{r['verdict']:<22}{r['limit0_estimate']:>12.4g}{r['limit_inf_slope']:>14.4g}")


if __name__ == "__main__":
    main()
