"""Norms of f = 1 on [0, 1] under a family and its sup/inf or limit."""

import argparse
import json
import math
from dataclasses import asdict, dataclass

from musielak_kit.measure import ScalarField, lebesgue01
from musielak_kit.nfunc import FunctionFamily, catalog
from musielak_kit.space import family_norm_check


@dataclass
class Config:
    variant: str = "monotone"
    expr: str = "(1 - 1/n)*(t*u)^2"
    start: int = 2
    tail: int = 64
    rel_tol: float = 1e-8
    quad_nodes: int = 1001


def run(cfg: Config) -> dict:
    dominator = catalog("power_tu2") if cfg.variant == "dominated" else None
    fam = FunctionFamily.from_expr(cfg.expr, start=cfg.start, tail=cfg.tail, dominator=dominator)
    rep = family_norm_check(fam, ScalarField.constant(1.0), lebesgue01(cfg.quad_nodes), cfg.rel_tol, cfg.variant)
    return rep.to_dict()


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--variant", choices=("monotone", "dominated"), default=Config.variant)
    ap.add_argument("--expr", default=None, help="member formula in t, u and the index n")
    ap.add_argument("--tail", type=int, default=Config.tail)
    args = ap.parse_args()
    expr = args.expr or (Config.expr if args.variant == "monotone" else "(t*u)^2/(1 + 1/n)")
    cfg = Config(variant=args.variant, expr=expr, tail=args.tail, start=2 if args.variant == "monotone" else 1)
    rep = run(cfg)
    print(json.dumps({"config": asdict(cfg), "report": rep, "reference": 1 / math.sqrt(3)}, indent=2))


if __name__ == "__main__":
    main()
