"""Command line front end.

    multicheb --paper --out results/
    multicheb --function runge2d --domain "-1,1;-1,1" --step 0.05 \\
        --mode rational --num-basis "(0,0)" --den-basis "(0,0);(2,0);(0,2)" --out r/
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import kernels
from .experiment import ExperimentConfig, ExperimentError, run_experiment, write_outputs

log = logging.getLogger("multicheb")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="multicheb",
        description="Best uniform polynomial / generalised rational approximation on a grid.",
    )
    p.add_argument("--paper", action="store_true",
                   help="preset: sqrt(|x|+|y|) on [-1,1]^2, step 0.01, both fits; "
                        "explicit flags override individual settings")
    p.add_argument("--function", help="registered function, e.g. sqrt_abs_sum, abs_x, "
                                      "runge2d, constant:<v>")
    p.add_argument("--domain", help='box as "lo,hi;lo,hi;..."')
    p.add_argument("--step", type=float, help="grid step")
    p.add_argument("--mode", choices=["polynomial", "rational", "both"])
    p.add_argument("--poly-basis", help='e.g. "paper2d:4:11", "grlex:3" or "(0,0);(1,0)"')
    p.add_argument("--num-basis", help="numerator basis, same syntax as --poly-basis")
    p.add_argument("--den-basis", help="denominator basis, same syntax as --poly-basis")
    p.add_argument("--epsilon", type=float, help="bisection bracket width (default 1e-4)")
    p.add_argument("--delta", type=float, help="denominator floor (default 1e-6)")
    p.add_argument("--backend", choices=["lp", "projection"],
                   help="feasibility backend for the rational fit (default lp)")
    p.add_argument("--coef-bound", type=float, dest="coefficient_bound",
                   help="box bound on rational coefficients (default 1e6)")
    p.add_argument("--out", help="output directory")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


_FIELDS = ("function", "domain", "step", "mode", "poly_basis", "num_basis", "den_basis",
           "epsilon", "delta", "backend", "coefficient_bound", "out")


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    given = {k: getattr(args, k) for k in _FIELDS if getattr(args, k) is not None}
    if args.paper:
        return ExperimentConfig.paper(**given)
    missing = [k for k in ("function", "domain", "step") if k not in given]
    if missing:
        raise ValueError("missing " + ", ".join("--" + m.replace("_", "-") for m in missing)
                         + " (or use --paper)")
    return ExperimentConfig(**given)


def _summary(result) -> str:
    rep = result.report
    lines = [f"grid points: {rep.grid_size}   kernels: {kernels.BACKEND}"]
    if rep.polynomial is not None:
        lines.append(f"polynomial  max deviation {rep.polynomial.max_deviation:.6f}  "
                     f"({rep.seconds['polynomial']:.2f} s)")
        for k, v in rep.polynomial.coefficients.items():
            lines.append(f"    {k:>10s}  {v: .4f}")
    if rep.rational is not None:
        r = rep.rational
        lines.append(f"rational    max deviation {r.max_deviation:.6f}  bracket "
                     f"[{r.bracket[0]:.6f}, {r.bracket[1]:.6f}]  {r.iterations} steps  "
                     f"({rep.seconds['rational']:.2f} s)")
        for k, v in r.numerator.items():
            lines.append(f"    num {k:>6s}  {v: .4f}")
        for k, v in r.denominator.items():
            lines.append(f"    den {k:>6s}  {v: .4f}")
    if rep.polynomial is not None and rep.rational is not None:
        better = rep.rational.max_deviation < rep.polynomial.max_deviation
        lines.append(f"rational beats polynomial: {better}")
    return "\n".join(lines)


def _glue_domain(argv: list[str]) -> list[str]:
    # "--domain -1,1;-1,1" would otherwise read the box as an unknown option
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--domain":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--domain={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_glue_domain(sys.argv[1:] if argv is None else list(argv)))
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = config_from_args(args)
    except (TypeError, ValueError) as exc:
        print(f"multicheb: error [config] {exc}", file=sys.stderr)
        return 2
    try:
        result = run_experiment(config)
        if config.out:
            try:
                paths = write_outputs(result, config.out)
            except OSError as exc:
                raise ExperimentError("emit", str(exc)) from exc
    except ExperimentError as exc:
        print(f"multicheb: error {exc}", file=sys.stderr)
        return 1
    print(_summary(result))
    if config.out:
        for key, path in paths.items():
            print(f"wrote {key}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
