"""Command-line front end.

Every subcommand reads a scenario file, writes CSV (and PNG figures unless
``--no-figures``) into ``--out`` and records what it wrote in
``manifest.json``.

Exit codes: 0 success, 1 configuration or input error, 2 infeasible power
policy or blind Bob, 3 security violation.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .blind import compute_blind_map, intensities, subchannel_capacity_bits, swept_plan, total_rate
from .coding import (
    Scheme,
    certify_leakage,
    decode_stream,
    efficiency,
    encode_stream,
    pack_bits,
    read_codewords,
    unpack_symbols,
    worst_individual_leakage,
    write_codewords,
)
from .config import ScenarioConfig, load_config
from .errors import BlindLinkError, BobBlind, ConfigError, InsufficientObservations, PolicyInfeasible
from .link import (
    LinkScenario,
    OokPlan,
    blind_interval_report,
    ook_ber_vs_angle,
    pattern_minimum_angles,
    run_link,
)

log = logging.getLogger("blindlink")

EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_INSECURE = 3


class SecurityViolation(BlindLinkError):
    pass


def fmt(x) -> str:
    """Twelve significant digits, the universal float format of every CSV."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def write_csv(path: Path, header: list[str], rows) -> Path:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


@dataclass
class RunManifest:
    command: str
    config: dict
    version: str = __version__
    grid: dict = field(default_factory=dict)
    quadrature_points: int | None = None
    outputs: list[str] = field(default_factory=list)
    results: dict = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)
    exit_code: int = 0

    def add(self, path: Path) -> None:
        self.outputs.append(Path(path).name)

    def write(self, out_dir: Path) -> Path:
        path = out_dir / "manifest.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True, default=_jsonable)
            fh.write("\n")
        return path


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


def _ghz(f: float) -> str:
    return f"{f / 1e9:g}GHz"


# -- subcommands -------------------------------------------------------------

def cmd_patterns(cfg: ScenarioConfig, out: Path, man: RunManifest, figures: bool) -> None:
    antenna = cfg.antenna()
    grid = cfg.grid()
    man.grid = asdict(grid)
    freqs = cfg.section("patterns")["frequencies"]
    if freqs is None:
        freqs = [cfg.plan().f_center] if cfg.has("plan") else [cfg.section("plan")["f_c"]]
    theta = grid.degrees()
    curves = {}
    for f in freqs:
        db = antenna.gain_db(f, np.radians(theta))
        curves[_ghz(f)] = db
        man.add(write_csv(out / f"pattern_{_ghz(f)}.csv", ["theta_deg", "gain_db"], zip(theta, db)))
    if figures:
        from .plotting import plot_patterns
        man.add(plot_patterns(theta, curves, out / "patterns.png"))


def cmd_blindmap(cfg: ScenarioConfig, out: Path, man: RunManifest, figures: bool) -> None:
    plan, antenna, grid = cfg.plan(), cfg.antenna(), cfg.grid()
    man.grid, man.quadrature_points = asdict(grid), plan.quadrature_points
    bob = cfg.bob()
    bm = compute_blind_map(plan, antenna, cfg.gain_model(), cfg.eve_range(), grid, bob)
    header = ["theta_deg", "gamma"] + [f"S_ch{i}" for i in range(plan.q)]
    rows = ([t, int(g), *s] for t, g, s in zip(bm.theta_deg, bm.gamma, bm.intensity))
    man.add(write_csv(out / "blindmap.csv", header, rows))
    man.results.update(
        q=plan.q,
        blind_fraction=bm.blind_fraction,
        blind_fraction_excluding_main_lobe=bm.blind_fraction_excluding_lobe(np.degrees(bob.theta)),
        blind_intervals=len(blind_interval_report(bm)),
    )
    if figures:
        from .plotting import plot_blindmap
        man.add(plot_blindmap(bm.theta_deg, bm.gamma, plan.q, out / "blindmap.png"))


def _sweep_unit(kind: str) -> tuple[str, float]:
    return ("subchannel width w (GHz)", 1e9) if kind == "w" else \
        ("bandwidth B (GHz)", 1e9) if kind == "bandwidth" else ("P_AB (dB)", 1.0)


def cmd_sweep(cfg: ScenarioConfig, out: Path, man: RunManifest, figures: bool) -> None:
    from .blind import blind_fraction_sweep

    plan, antenna, grid = cfg.plan(), cfg.antenna(), cfg.grid()
    man.grid, man.quadrature_points = asdict(grid), plan.quadrature_points
    kind, values = cfg.sweep()
    points = blind_fraction_sweep(plan, antenna, kind, values, cfg.gain_model(), grid,
                                  cfg.eve_range(), cfg.bob())
    man.add(write_csv(out / "sweep.csv", ["swept_value", "blind_fraction"],
                      ((p.value, p.blind_fraction) for p in points)))
    man.errors.extend(f"{fmt(p.value)}: {p.error}" for p in points if p.error)
    man.results.update(parameter=kind, points=len(points))
    if figures:
        from .plotting import plot_sweep
        label, scale = _sweep_unit(kind)
        man.add(plot_sweep([p.value for p in points], [p.blind_fraction for p in points], label,
                           out / "sweep.png", scale))


def cmd_capacity(cfg: ScenarioConfig, out: Path, man: RunManifest, figures: bool) -> None:
    plan, antenna, gm, bob = cfg.plan(), cfg.antenna(), cfg.gain_model(), cfg.bob()
    man.quadrature_points = plan.quadrature_points
    from .blind import transmit_density
    density = transmit_density(plan, antenna, gm, bob)
    s_bob = intensities(plan, antenna, gm, bob.r, [bob.theta], density)[0]
    rows = [(i, f, s, subchannel_capacity_bits(float(s), plan.delta, plan.w))
            for i, (f, s) in enumerate(zip(plan.centers(), s_bob))]
    man.add(write_csv(out / "capacity.csv", ["channel", "f_center_hz", "S_bob", "capacity_bps"], rows))
    man.results["total_rate_bps"] = sum(r[3] for r in rows)
    if cfg.has("sweep"):
        kind, values = cfg.sweep()
        if kind != "bandwidth":
            raise ConfigError("capacity sweeps only over B")
        rates = []
        for v in values:
            try:
                rates.append((v, total_rate(swept_plan(plan, kind, v), antenna, gm, bob)))
            except (ValueError, PolicyInfeasible) as exc:
                rates.append((v, float("nan")))
                man.errors.append(f"{fmt(v)}: {type(exc).__name__}: {exc}")
        man.add(write_csv(out / "rate_sweep.csv", ["swept_value", "total_rate_bps"], rates))
        if figures:
            from .plotting import plot_rate
            man.add(plot_rate([r[0] for r in rates], [r[1] for r in rates], out / "rate_sweep.png"))


def _message_bits(cfg: ScenarioConfig, override: str | None) -> str:
    if override is not None:
        return override
    sec = cfg.section("message")
    if sec["bits"] is not None:
        return sec["bits"].replace("_", "").replace(" ", "")
    if sec["n_bits"] is not None:
        rng = np.random.default_rng(sec["seed"])
        return "".join(str(b) for b in rng.integers(0, 2, sec["n_bits"]))
    raise ConfigError("[message] needs bits or n_bits (or pass --bits)")


def cmd_encode(cfg: ScenarioConfig, out: Path, man: RunManifest, figures: bool, bits: str | None = None) -> None:
    code = cfg.code()
    message = _message_bits(cfg, bits)
    symbols, pad = pack_bits(message, code.field)
    rng = np.random.default_rng(cfg.section("code")["seed"])
    words, fill = encode_stream(code, symbols, rng)
    header = {"p": code.p, "q": code.q, "scheme": int(code.scheme), "n_bits": len(message),
              "pad_bits": pad, "fill_symbols": fill}
    path = out / "codewords.txt"
    with open(path, "w", encoding="utf-8") as fh:
        write_codewords(fh, words, header=header)
    man.add(path)
    man.results.update(header, codewords=int(words.shape[0]), efficiency=str(efficiency(code)))


def cmd_decode(cfg: ScenarioConfig, out: Path, man: RunManifest, figures: bool, source: Path | None = None) -> None:
    source = source or out / "codewords.txt"
    if not Path(source).exists():
        raise ConfigError(f"codeword file {source} not found")
    p = cfg.section("code")["p"]
    with open(source, encoding="utf-8") as fh:
        words, header = read_codewords(fh, p)
    if "p" in header and int(header["p"]) != p:
        raise ConfigError(f"codewords are over F_{header['p']} but the config says p = {p}")
    q = int(header.get("q", words[0].q if words else 3))
    code = cfg.code(q)
    if "scheme" in header and Scheme.parse(header["scheme"]) is not code.scheme:
        raise ConfigError("codeword scheme disagrees with the config")
    erased = sum(w.erased for w in words)
    if erased:
        raise InsufficientObservations(erased)
    arr = np.array([w.values() for w in words], dtype=np.int64).reshape(-1, q)
    symbols = decode_stream(code, arr, int(header.get("fill_symbols", 0)))
    bits = unpack_symbols(symbols, code.field, int(header.get("pad_bits", 0)))
    path = out / "message_bits.txt"
    path.write_text("".join(map(str, bits)) + "\n", encoding="utf-8")
    man.add(path)
    man.results.update(n_bits=len(bits), codewords=len(words))


def cmd_leakage(cfg: ScenarioConfig, out: Path, man: RunManifest, figures: bool) -> None:
    code = cfg.code()
    sec = cfg.require("leakage")
    if sec["subset"] is None:
        raise ConfigError("[leakage] missing required keys: subset")
    subset = [i - 1 for i in sec["subset"]]
    target = sec["target"].lower()
    if target in ("all", "m", "full"):
        report = certify_leakage(code, subset, None)
    elif target == "worst":
        report = worst_individual_leakage(code, subset)
    else:
        report = certify_leakage(code, subset, int(target) - 1)
    line = report.summary()
    path = out / "leakage.txt"
    path.write_text(
        f"p = {code.p}\nq = {code.q}\nscheme = {int(code.scheme)}\n"
        f"observed = {','.join(str(i + 1) for i in report.observed_subset)}\n"
        f"target = {','.join(str(i + 1) for i in report.target)}\n"
        f"mutual_information_bits = {fmt(report.mutual_information_bits)}\n"
        f"joint_factorizes = {str(report.joint_factorizes).lower()}\n"
        f"{line}\n",
        encoding="utf-8",
    )
    man.add(path)
    man.results.update(report=line, mutual_information_bits=report.mutual_information_bits,
                       exact_zero=report.joint_factorizes)
    print(line)
    if len(report.observed_subset) < code.q and not report.joint_factorizes:
        raise SecurityViolation(f"{line} with only {len(report.observed_subset)} of {code.q} channels observed")


def cmd_simulate(cfg: ScenarioConfig, out: Path, man: RunManifest, figures: bool, bits: str | None = None) -> None:
    plan, antenna, gm = cfg.plan(), cfg.antenna(), cfg.gain_model()
    man.quadrature_points = plan.quadrature_points
    scenario = LinkScenario(plan, antenna, cfg.bob(), cfg.eve(), cfg.code(plan.q), gm)
    message = _message_bits(cfg, bits)
    transcript = run_link(scenario, message, cfg.section("code")["seed"])

    density = scenario.density()
    s_bob = intensities(plan, antenna, gm, scenario.bob.r, [scenario.bob.theta], density)[0]
    s_eve = intensities(plan, antenna, gm, scenario.eve.r, [scenario.eve.theta], density)[0]
    rows = zip(range(plan.q), plan.centers(), s_bob, s_eve, transcript.bob_mask, transcript.eve_mask)
    man.add(write_csv(out / "channels.csv",
                      ["channel", "f_center_hz", "S_bob", "S_eve", "bob_observed", "eve_observed"], rows))
    summary = transcript.summary()
    path = out / "summary.txt"
    path.write_text("".join(f"{k} = {fmt(v) if isinstance(v, float) else str(v).lower() if isinstance(v, bool) else v}\n"
                            for k, v in summary.items()), encoding="utf-8")
    man.add(path)
    man.results.update(summary)
    for k, v in summary.items():
        print(f"{k} = {v}")
    if not transcript.bob_decoded:
        raise SecurityViolation("Bob failed to recover the message")
    if transcript.gamma_eve >= 1 and not transcript.eve_secure:
        raise SecurityViolation("Eve is blind on a channel yet leakage is nonzero")


def cmd_ber(cfg: ScenarioConfig, out: Path, man: RunManifest, figures: bool) -> None:
    antenna = cfg.antenna() if cfg.has("antenna") else None
    sec = cfg.section("ook")
    plan = OokPlan(tuple(sec["frequencies"]), sec["w"], sec["snr_db"])
    grid = cfg.grid() if cfg.has("grid") else None
    table = ook_ber_vs_angle(plan, antenna, grid)
    if grid is not None:
        man.grid = asdict(grid)
    labels = [_ghz(f) for f in plan.frequencies]
    header = ["theta_deg"] + [f"ber_{lab}" for lab in labels]
    man.add(write_csv(out / "ber.csv", header, (np.concatenate([[t], b]) for t, b in zip(table.theta_deg, table.ber))))
    from .antennas import HornWithBlock
    minima = pattern_minimum_angles(plan, antenna or HornWithBlock())
    intervals = blind_interval_report(table, exclude_deg=0.0)
    man.results.update(
        minimum_angles_deg=dict(zip(labels, minima)),
        blind_intervals_deg=[list(iv) for iv in intervals],
    )
    if figures:
        from .plotting import plot_ber
        man.add(plot_ber(table.theta_deg, table.ber, labels, intervals, out / "ber.png"))


COMMANDS = {
    "patterns": (cmd_patterns, "Normalized radiation patterns, one CSV per frequency.\n"
                 "Sections: [antenna] kind + geometry (mm/cm/m), [patterns] frequencies (GHz),\n"
                 "[grid] theta_min/theta_max/step (deg)."),
    "blindmap": (cmd_blindmap, "Gamma(theta) and per-channel intensity at Eve's range.\n"
                 "Sections: [antenna], [plan] f_c/B/w (GHz), delta (W/(m^2 Hz) or 'thermal'),\n"
                 "policy (equalize|uniform), p_ab (dB); [locations] bob_r (m), bob_theta (deg), eve_r; [grid]."),
    "sweep": (cmd_sweep, "Blind fraction versus B, w or P_AB.\n"
              "Sections: as blindmap plus [sweep] parameter (B|w|p_ab), values (list or start:stop:step unit)."),
    "capacity": (cmd_capacity, "Per-channel detection-limited capacity at Bob; optional [sweep] over B.\n"
                 "Sections: [antenna], [plan], [locations]."),
    "encode": (cmd_encode, "Pack bits into F_p symbols and encode them to codewords.txt.\n"
               "Sections: [code] p, q, scheme (1|2), points, seed; [message] bits or n_bits + seed."),
    "decode": (cmd_decode, "Decode codewords.txt (or --input) back to message_bits.txt.\n"
               "Sections: [code] p, scheme."),
    "leakage": (cmd_leakage, "Exact mutual information between a target and observed channels.\n"
                "Sections: [code]; [leakage] subset (1-based channels), target (all|worst|k)."),
    "simulate": (cmd_simulate, "End-to-end link: encode, erase per receiver, decode, certify leakage.\n"
                 "Sections: [antenna], [plan], [locations] incl. eve_theta (deg), [code], [message]."),
    "ber": (cmd_ber, "OOK bit error rate versus angle for widely spaced carriers.\n"
            "Sections: [antenna] (default horn_block), [ook] frequencies (GHz), w, snr_db (dB); [grid]."),
}


def _apply_overrides(cfg: ScenarioConfig, grid_step: float | None, quad_points: int | None) -> None:
    if grid_step is not None:
        cfg.sections.setdefault("grid", {})["step"] = grid_step
    if quad_points is not None and cfg.has("plan"):
        cfg.sections["plan"]["quad_points"] = quad_points


def run_subcommand(name: str, config: ScenarioConfig, out_dir, figures: bool = True, **kwargs) -> RunManifest:
    """Run one subcommand, write its outputs and manifest, and return the manifest.

    Errors propagate; :func:`main` turns them into exit codes.
    """
    func = COMMANDS[name][0]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    man = RunManifest(name, config.echo())
    try:
        func(config, out, man, figures, **kwargs)
    except BaseException as exc:
        man.exit_code = exit_code_for(exc)
        man.errors.append(f"{type(exc).__name__}: {exc}")
        man.write(out)
        raise
    man.write(out)
    return man


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, SecurityViolation):
        return EXIT_INSECURE
    if isinstance(exc, (PolicyInfeasible, BobBlind)):
        return EXIT_INFEASIBLE
    return EXIT_CONFIG


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blindlink",
        description="Blind-region secrecy simulations: antenna patterns, blind maps, sweeps and secure coding.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, helptext) in COMMANDS.items():
        sp = sub.add_parser(name, help=helptext.splitlines()[0], description=helptext,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.add_argument("config", type=Path, help="scenario file (INI-style sections, SI units or suffixes)")
        sp.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: ./out)")
        sp.add_argument("--grid-step-deg", type=float, default=None, help="override [grid] step in degrees")
        sp.add_argument("--quad-points", type=int, default=None, help="override Gauss-Legendre nodes per subchannel")
        sp.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
        if name in ("encode", "simulate"):
            sp.add_argument("--bits", default=None, help="message bits, overriding [message]")
        if name == "decode":
            sp.add_argument("--input", type=Path, default=None, help="codeword file (default: OUT/codewords.txt)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    kwargs = {}
    if args.command in ("encode", "simulate"):
        kwargs["bits"] = args.bits
    if args.command == "decode":
        kwargs["source"] = args.input
    try:
        cfg = load_config(args.config)
        _apply_overrides(cfg, args.grid_step_deg, args.quad_points)
        run_subcommand(args.command, cfg, args.out, not args.no_figures, **kwargs)
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (BlindLinkError, ValueError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return exit_code_for(exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
