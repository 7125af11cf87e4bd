"""Command-line front end: a thin client over the service handlers.

Commands build the same pydantic requests the HTTP endpoints accept and
call the handlers in-process, so CLI and service behavior cannot drift.
``serve`` starts the FastAPI app under uvicorn.

    smilekernel classify --a 1 --b 0 --c -1
    smilekernel spectrum --a 1 --b 0 --c -1 --out-dir out
    smilekernel kernel --a 1 --b 0 --c -1 --tau 0.5 --out-dir out
    smilekernel price --a 1 --b 0 --c -1 --kind call --strike 0 --maturity 1
    smilekernel validate
    smilekernel serve --port 8000

Shared flags: --config FILE (flat key=value; flags win), --a --b --c --r,
--grid-halfwidth, --grid-nodes, --kmax-mult, --k-nodes, --seed,
--out-dir. Verbosity via the SMILEKERNEL_LOG environment variable
(DEBUG/INFO/WARNING/ERROR).

All file output lands inside --out-dir; numbers are written with 17
significant digits so doubles round-trip exactly and reruns with the
same config and seed are byte-identical.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, RunConfig
from .service import handlers
from .service import schemas as sc

log = logging.getLogger("smilekernel")


def _setup_logging() -> None:
    level_name = os.environ.get("SMILEKERNEL_LOG", "WARNING").upper()
    level = getattr(logging, level_name, logging.WARNING)
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s", level=level)


def _add_shared_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=str, default=None, help="flat key=value config file")
    p.add_argument("--a", type=float, default=None, help="quadratic coefficient")
    p.add_argument("--b", type=float, default=None, help="linear coefficient")
    p.add_argument("--c", type=float, default=None, help="constant coefficient")
    p.add_argument("--r", type=float, default=None, help="risk-free rate")
    p.add_argument("--grid-halfwidth", type=float, default=None)
    p.add_argument("--grid-nodes", type=int, default=None)
    p.add_argument("--kmax-mult", type=float, default=None)
    p.add_argument("--k-nodes", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", type=str, default=None)


def _config_from(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    return cfg.override(
        a=args.a, b=args.b, c=args.c, r=args.r,
        grid_halfwidth=args.grid_halfwidth, grid_nodes=args.grid_nodes,
        kmax_mult=args.kmax_mult, k_nodes=args.k_nodes,
        seed=args.seed, out_dir=args.out_dir,
    )


def _model_spec(cfg: RunConfig) -> sc.ModelSpec:
    return sc.ModelSpec(a=cfg.a, b=cfg.b, c=cfg.c, r=cfg.r)


def _grid_spec(cfg: RunConfig) -> sc.GridSpec:
    return sc.GridSpec(halfwidth=cfg.grid_halfwidth, nodes=cfg.grid_nodes)


def _quad_spec(cfg: RunConfig) -> sc.QuadSpec:
    return sc.QuadSpec(kmax_mult=cfg.kmax_mult, nodes=cfg.k_nodes)


def _out_dir(cfg: RunConfig) -> Path:
    path = Path(cfg.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_classify(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    resp = handlers.handle_classify(sc.ClassifyRequest(model=_model_spec(cfg)))
    print(resp.description)
    return 0


def cmd_spectrum(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    resp = handlers.handle_spectrum(
        sc.SpectrumRequest(
            model=_model_spec(cfg), grid=_grid_spec(cfg), quad=_quad_spec(cfg),
            include_profile=True,
        )
    )
    print(f"regime: {resp.regime}")
    if resp.message:
        print(resp.message)
    if resp.fit is not None:
        f = resp.fit
        print(
            f"fit: lam={f.lam:.10g} alpha={f.alpha:.10g} v0={f.v0:.10g} "
            f"residual={f.residual:.3e} exact={f.exact}"
        )
    for lev in resp.bound:
        parts = [f"bound n={lev.n}"]
        if lev.energy_closed_form is not None:
            parts.append(f"E_closed={lev.energy_closed_form:.12g}")
        if lev.energy_numerical is not None:
            parts.append(f"E_numerical={lev.energy_numerical:.12g}")
        if lev.rel_diff is not None:
            parts.append(f"rel_diff={lev.rel_diff:.3e}")
        print(" ".join(parts))
    if not resp.bound and resp.fit is not None:
        print("no bound states (well strength 0 at this rate/convention)")
    out = _out_dir(cfg)
    if resp.profile_csv:
        (out / "profile.csv").write_text(resp.profile_csv)
        print(f"wrote {out / 'profile.csv'}")
    if resp.spectrum_csv:
        (out / "spectrum.csv").write_text(resp.spectrum_csv)
        print(f"wrote {out / 'spectrum.csv'}")
    return 0


def cmd_kernel(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    resp = handlers.handle_kernel(
        sc.KernelRequest(
            model=_model_spec(cfg), tau=args.tau,
            grid=_grid_spec(cfg), quad=_quad_spec(cfg), stride=args.stride,
        )
    )
    out = _out_dir(cfg)
    path = out / "kernel.csv"
    path.write_text(resp.kernel_csv)
    print(f"kernel: {resp.n_states} states on {resp.n_grid} nodes; wrote {path}")
    return 0


def cmd_price(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    table = None
    if args.payoff_table:
        rows = []
        for line in Path(args.payoff_table).read_text().splitlines():
            line = line.strip()
            if not line or line.lower().startswith(("s,", "spot,")):
                continue
            s_str, p_str = line.split(",")[:2]
            rows.append((float(s_str), float(p_str)))
        table = rows
    contract = sc.ContractSpec(
        kind=args.kind, strike=args.strike, maturity=args.maturity, table=table,
    )
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    spots = [float(s) for s in args.spots.split(",")] if args.spots else None
    resp = handlers.handle_price(
        sc.PriceRequest(
            model=_model_spec(cfg), contract=contract, methods=methods, spots=spots,
            grid=_grid_spec(cfg), quad=_quad_spec(cfg),
            mc=sc.McSpec(paths=args.mc_paths, steps=args.mc_steps, seed=cfg.seed),
        )
    )
    lines = ["spot,price_spectral,price_cn,price_mc,mc_se"]
    for row in resp.rows:
        def fmt(v: float | None) -> str:
            return f"{v:.17g}" if v is not None else ""
        lines.append(
            f"{row.spot:.17g},{fmt(row.price_spectral)},{fmt(row.price_cn)},"
            f"{fmt(row.price_mc)},{fmt(row.mc_se)}"
        )
    csv_text = "\n".join(lines) + "\n"
    out = _out_dir(cfg)
    path = out / "prices.csv"
    path.write_text(csv_text)
    print(csv_text, end="")
    print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    criteria = [c.strip() for c in args.criteria.split(",")] if args.criteria else None
    resp = handlers.handle_validate(
        sc.ValidateRequest(
            criteria=criteria, seed=cfg.seed, grid_nodes=cfg.grid_nodes,
            k_nodes=cfg.k_nodes, kmax_mult=cfg.kmax_mult,
            tolerance_overrides=cfg.tolerance_overrides,
        )
    )
    print(resp.report)
    out = _out_dir(cfg)
    (out / "validation.txt").write_text(resp.report + "\n")
    return 0 if resp.all_passed else 1


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smilekernel",
        description="spectral pricing for quadratic normal volatility models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="discriminant regime and roots")
    _add_shared_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("spectrum", help="potential profile, fit, bound levels")
    _add_shared_flags(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("kernel", help="export the propagator matrix as CSV")
    _add_shared_flags(p)
    p.add_argument("--tau", type=float, required=True, help="time to maturity")
    p.add_argument("--stride", type=int, default=1, help="matrix downsampling stride")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("price", help="price a contract on a spot ladder")
    _add_shared_flags(p)
    p.add_argument("--kind", choices=["call", "put", "digital_call", "custom"],
                   default="call")
    p.add_argument("--strike", type=float, default=0.0)
    p.add_argument("--maturity", type=float, default=1.0)
    p.add_argument("--payoff-table", type=str, default=None,
                   help="CSV of S,payoff nodes for kind=custom")
    p.add_argument("--methods", type=str, default="spectral,crank_nicolson,monte_carlo")
    p.add_argument("--spots", type=str, default=None, help="comma-separated spot list")
    p.add_argument("--mc-paths", type=int, default=100_000)
    p.add_argument("--mc-steps", type=int, default=None)
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("validate", help="run the acceptance battery")
    _add_shared_flags(p)
    p.add_argument("--criteria", type=str, default=None,
                   help="comma-separated subset, e.g. AC-1,AC-5")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", type=str, default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
