"""Sup error of the simple approximants and the induced norm gaps."""

import argparse
import json
from dataclasses import asdict, dataclass, field

from musielak_kit.approx import approx_space_convergence
from musielak_kit.measure import ScalarField, lebesgue01
from musielak_kit.nfunc import catalog


@dataclass
class Config:
    functions: list = field(default_factory=lambda: ["power_tu2", "exp_abs"])
    rect: tuple = (-1.0, 1.0, 2.0)
    levels: list = field(default_factory=lambda: [6, 8, 10, 12])
    field_value: float = 1.0
    rel_tol: float = 1e-3


def run(cfg: Config) -> dict:
    out = {}
    for name in cfg.functions:
        rep = approx_space_convergence(catalog(name), cfg.rect, cfg.levels,
                                       ScalarField.constant(cfg.field_value), lebesgue01(), cfg.rel_tol)
        out[name] = rep.to_dict()
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", default="6,8,10,12")
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    cfg = Config(levels=[int(x) for x in args.levels.split(",")])
    res = run(cfg)
    if args.json:
        print(json.dumps({"config": asdict(cfg), "results": res}, indent=2))
        return
    for name, rep in res.items():
        print(f"{name}: target norm {rep['target_norm']:.10f}")
        for L, e, n, g in zip(rep["levels"], rep["sup_errors"], rep["norms"], rep["gaps"]):
            print(f"  L={L:>2}  sup error {e:.3e}  norm {n:.10f}  gap {g:.3e}")


if __name__ == "__main__":
    main()
