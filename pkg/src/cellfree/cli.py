"""Scenario-file parsing, experiment orchestration and CSV emission.

Scenario files are flat key=value text with '#' comments. Every output CSV
embeds the scenario hash, seed and package version in a leading comment
line so results stay attributable to their configuration.
"""

import os

# Pin BLAS to one thread before numpy loads: results must be byte-identical
# regardless of --threads, and trial-level threading supplies the parallelism.
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")

import argparse
import hashlib
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__, simulate
from .errors import CellfreeError, ParseError, ValidationError

#: scenario keys holding sequences of floats
_FLOAT_TUPLE_KEYS = {"snr_grid_db", "n_values", "gamma_grid"}
_INT_KEYS = {"m_aps", "u_users", "trials", "seed", "packet_symbols",
             "iters_prec", "iters_pa"}
_STR_KEYS = {"modulation"}
_ALIASES = {"n_csi": "n_values", "snr_db": "snr_grid_db"}


def _parse_series(text):
    series = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "+" not in item:
            raise ParseError(f"series entry {item!r} must look like RMMSE+UPA")
        prec, pa = item.split("+", 1)
        series.append((prec.strip().upper(), pa.strip().upper()))
    return tuple(series)


def _parse_float_tuple(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def parse_scenario(path):
    """Read a key=value scenario file into a validated Scenario."""
    known = {f.name for f in fields(simulate.Scenario)}
    raw = {}
    single = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParseError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in body.split("=", 1))
        key = _ALIASES.get(key, key)
        if key in ("precoder", "pa_scheme"):
            single[key] = value.upper()
            continue
        if key == "series":
            raw["series"] = _parse_series(value)
            continue
        if key == "outputs":
            raw["outputs"] = tuple(v.strip() for v in value.split(",") if v.strip())
            continue
        if key not in known:
            raise ParseError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            if key in _FLOAT_TUPLE_KEYS:
                raw[key] = _parse_float_tuple(value)
            elif key in _INT_KEYS:
                raw[key] = int(value)
            elif key in _STR_KEYS:
                raw[key] = value.upper()
            else:
                raw[key] = float(value)
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    if single:
        if "series" in raw:
            raise ParseError(f"{path}: give either series or precoder/pa_scheme")
        raw["series"] = ((single.get("precoder", "RMMSE"),
                          single.get("pa_scheme", "UPA")),)
    for req in ("m_aps", "u_users"):
        if req not in raw:
            raise ValidationError(f"{path}: required key {req} missing")
    return simulate.Scenario(**raw)


def scenario_to_text(sc):
    """Canonical key=value form; parse_scenario round-trips it exactly."""
    lines = []
    for f in sorted(fields(simulate.Scenario), key=lambda f: f.name):
        value = getattr(sc, f.name)
        if f.name == "series":
            value = ", ".join(f"{p}+{a}" for p, a in value)
        elif isinstance(value, tuple):
            value = ", ".join(repr(v) if isinstance(v, float) else str(v)
                              for v in value)
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def scenario_hash(sc):
    return hashlib.sha256(scenario_to_text(sc).encode()).hexdigest()[:12]


def _header(sc):
    return f"# scenario={scenario_hash(sc)} seed={sc.seed} version={__version__}\n"


def _fmt(x):
    return repr(float(x))


def write_ber_csv(path, sc, points):
    with open(path, "w", newline="\n") as fh:
        fh.write(_header(sc))
        fh.write("snr_db,precoder,pa,n,ber,stderr,bits\n")
        for p in points:
            fh.write(f"{_fmt(p.snr_db)},{p.precoder},{p.pa},{_fmt(p.n)},"
                     f"{_fmt(p.ber)},{_fmt(p.stderr)},{p.bit_count}\n")


def write_rates_csv(path, sc, points):
    u = sc.u_users
    with open(path, "w", newline="\n") as fh:
        fh.write(_header(sc))
        cols = ",".join(f"rate_u{i+1}" for i in range(u))
        fh.write(f"snr_db,precoder,pa,n,sum_rate,{cols}\n")
        for p in points:
            per_user = ",".join(_fmt(r) for r in p.per_user)
            fh.write(f"{_fmt(p.snr_db)},{p.precoder},{p.pa},{_fmt(p.n)},"
                     f"{_fmt(p.sum_rate)},{per_user}\n")


def write_cdf_csv(path, sc, series):
    with open(path, "w", newline="\n") as fh:
        fh.write(_header(sc))
        fh.write("precoder,pa,n,rate_sample\n")
        for s in series:
            for sample in s.samples:
                fh.write(f"{s.precoder},{s.pa},{_fmt(s.n)},{_fmt(sample)}\n")


def write_bisection_csv(path, sc, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(_header(sc))
        fh.write("trial,n,snr_db,precoder,pa,t_b,t_e,feasible\n")
        for trial, n, snr_db, prec, pa, t_b, t_e, ok in rows:
            fh.write(f"{trial},{_fmt(n)},{_fmt(snr_db)},{prec},{pa},"
                     f"{_fmt(t_b)},{_fmt(t_e)},{int(ok)}\n")


def dump_geometry(out_dir, sc):
    """First realization's node placement and large-scale gains, for debugging."""
    from . import channel

    rng = np.random.default_rng(np.random.SeedSequence(entropy=(sc.seed, 1, 0, 0)))
    geom = channel.place_nodes(sc.m_aps, sc.u_users, sc.area_side, rng)
    ls = channel.large_scale_fading(geom, sc.sigma_sh_db, rng,
                                    carrier_mhz=sc.carrier_mhz, h_ap=sc.h_ap,
                                    h_user=sc.h_user, d0=sc.d0, d1=sc.d1)
    with open(Path(out_dir) / "geometry.csv", "w", newline="\n") as fh:
        fh.write(_header(sc))
        fh.write("kind,index,x,y\n")
        for i, (x, y) in enumerate(geom.ap_positions):
            fh.write(f"ap,{i},{_fmt(x)},{_fmt(y)}\n")
        for i, (x, y) in enumerate(geom.user_positions):
            fh.write(f"user,{i},{_fmt(x)},{_fmt(y)}\n")
    with open(Path(out_dir) / "beta.csv", "w", newline="\n") as fh:
        fh.write(_header(sc))
        fh.write("ap,user,beta,distance_m\n")
        for m in range(sc.m_aps):
            for u in range(sc.u_users):
                fh.write(f"{m},{u},{_fmt(ls.beta[m, u])},"
                         f"{_fmt(ls.distances[m, u])}\n")


def run(sc, out_dir, threads=1, debug_bisection=False, dump_geom=False):
    """Execute the scenario and write its CSV outputs; returns exit status."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        result = simulate.run_experiment(sc, threads=threads,
                                         collect_traces=debug_bisection)
        if "ber" in sc.outputs:
            path = out / "ber.csv"
            write_ber_csv(path, sc, result.ber_points)
            written.append(path)
        if "rates" in sc.outputs:
            path = out / "rates.csv"
            write_rates_csv(path, sc, result.rate_points)
            written.append(path)
        if "cdf" in sc.outputs:
            path = out / "cdf.csv"
            write_cdf_csv(path, sc, result.cdf_series)
            written.append(path)
        if debug_bisection:
            path = out / "bisect_trace.csv"
            write_bisection_csv(path, sc, result.bisection_rows)
            written.append(path)
        if dump_geom:
            dump_geometry(out, sc)
    except CellfreeError:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    for event, count in sorted(result.event_counters.items()):
        print(f"event {event}: {count}")
    for path in written:
        print(f"wrote {path}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="cellfree",
        description="Cell-free massive MIMO downlink experiments")
    parser.add_argument("--scenario", required=True, help="scenario file path")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--threads", type=int, default=1,
                        help="trial-level parallelism (results unchanged)")
    parser.add_argument("--dry-run", action="store_true",
                        help="print the resolved scenario and exit")
    parser.add_argument("--dump-geometry", action="store_true",
                        help="also write geometry.csv and beta.csv")
    parser.add_argument("--debug-bisection", action="store_true",
                        help="also write bisect_trace.csv")
    args = parser.parse_args(argv)

    try:
        sc = parse_scenario(args.scenario)
        env_seed = os.environ.get("CELLFREE_SEED")
        if env_seed is not None:
            from dataclasses import replace
            sc = replace(sc, seed=int(env_seed))
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.dry_run:
        print(scenario_to_text(sc), end="")
        return 0

    try:
        return run(sc, args.out, threads=args.threads,
                   debug_bisection=args.debug_bisection,
                   dump_geom=args.dump_geometry)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CellfreeError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
