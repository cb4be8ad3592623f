"""Command-line front end: ``sriplab <command> [options]``."""
from __future__ import annotations

import argparse
import json
import shlex
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dictionary import (AtomId, DictionaryFormatError, DictionaryValidationError,
                         InvalidPrimeError, build_heisenberg, build_random_onb_union,
                         check_prime, coherence, load_dictionary, save_dictionary)
from .sparse import omp
from .spectral import BudgetExceededError, rip_exact_check
from .stats import (POLICIES, UNIFORM, ConfigError, InsufficientDataError, ScanConfig,
                    error_spectrum, fit_decay, sample_support, srip_scan, trial_seed)
from .svg import histogram_svg

PATH_FLAGS = {"--out", "-o", "--svg", "--summary"}


class UsageError(Exception):
    pass


def _provenance(argv, schema, master_seed=None):
    # output paths are left out so identical runs give identical files
    kept, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a in PATH_FLAGS:
            skip = True
            continue
        if a.split("=", 1)[0] in PATH_FLAGS:
            continue
        kept.append(a)
    line = f"# sriplab {__version__} schema={schema} command={shlex.quote(shlex.join(kept))}"
    if master_seed is not None:
        line += f" master_seed={master_seed}"
    return line


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _summary_path(args, suffix=".summary.json"):
    if getattr(args, "summary", None):
        return Path(args.summary)
    return Path(args.out).with_suffix(suffix) if args.out else None


def _build_dictionary(args):
    chosen = [x for x in (args.heisenberg, args.random, args.load) if x is not None]
    if len(chosen) != 1:
        raise UsageError("choose exactly one of --heisenberg/--p, --random, --load")
    if args.heisenberg is not None:
        return build_heisenberg(args.heisenberg, include_delta=not args.no_delta)
    if args.random is not None:
        p, m = args.random
        return build_random_onb_union(p, m, args.seed)
    return load_dictionary(args.load)


def _dict_spec_args(parser):
    g = parser.add_argument_group("dictionary")
    g.add_argument("--heisenberg", "--p", dest="heisenberg", type=int, metavar="P",
                   help="Heisenberg chirp dictionary over F_P")
    g.add_argument("--random", type=int, nargs=2, metavar=("P", "M"),
                   help="union of M seeded random orthonormal bases of C^P")
    g.add_argument("--load", metavar="PATH", help="dictionary file written by `dict`")
    g.add_argument("--seed", type=int, default=0, help="seed for --random (default 0)")
    g.add_argument("--no-delta", action="store_true",
                   help="omit the delta basis from the Heisenberg dictionary")


def _scan_args(parser, need_threshold=True):
    parser.add_argument("--trials", type=int, default=500)
    parser.add_argument("--master-seed", type=int, default=1)
    mode = parser.add_mutually_exclusive_group()
    mode.add_argument("--epsilon", type=float, help="support size n = round(p^(1-eps))")
    mode.add_argument("--alpha", type=float, help="support size n = round(alpha p)")
    if need_threshold:
        parser.add_argument("--threshold", type=float,
                            help="tail threshold (default p^(-eps/2); in alpha mode "
                                 "defaults to (n/p)^(1/2))")
    parser.add_argument("--policy", choices=POLICIES, default=UNIFORM)


def _out_args(parser, fmt=True):
    parser.add_argument("--out", "-o", metavar="PATH")
    if fmt:
        parser.add_argument("--format", choices=("csv", "json"), default="csv")


def cmd_dict(args, argv):
    d = _build_dictionary(args)
    mu = coherence(d) if d.n_atoms <= 40_000 else float("nan")
    if args.out:
        save_dictionary(d, args.out)
    print(f"p={d.p} bases={d.n_bases} atoms={d.n_atoms} mu={mu:.10f}")
    return 0


def cmd_coherence(args, argv):
    d = _build_dictionary(args)
    mu = coherence(d)
    rec = {"p": d.p, "bases": d.n_bases, "atoms": d.n_atoms, "mu": mu}
    if args.format == "json":
        text = _dump_json(rec)
    else:
        text = _provenance(argv, "coherence/1") + "\np,bases,atoms,mu\n" \
            + f"{d.p},{d.n_bases},{d.n_atoms},{mu!r}\n"
    if args.out:
        _write(args.out, text)
    print(f"mu={mu:.10f}")
    return 0


def _scan_config(args, d):
    eps, alpha = args.epsilon, args.alpha
    if eps is None and alpha is None:
        eps = 0.5
    thr = args.threshold
    if alpha is not None and thr is None:
        thr = (round(alpha * d.p) / d.p) ** 0.5
    return ScanConfig(trials=args.trials, master_seed=args.master_seed, epsilon=eps,
                      alpha=alpha, threshold=thr, policy=args.policy)


def cmd_srip(args, argv):
    d = _build_dictionary(args)
    cfg = _scan_config(args, d)
    rep = srip_scan(d, cfg)
    summary = rep.summary()
    if args.out:
        if args.format == "json":
            trials = [{"trial_index": i, "seed": s, "n": rep.n, "deviation": float(v)}
                      for i, (s, v) in enumerate(zip(rep.seeds, rep.deviations))]
            _write(args.out, _dump_json({"summary": summary, "trials": trials}))
        else:
            lines = [_provenance(argv, "srip-trials/1", cfg.master_seed),
                     "trial_index,seed,n,deviation"]
            lines += [f"{i},{s},{rep.n},{float(v)!r}"
                      for i, (s, v) in enumerate(zip(rep.seeds, rep.deviations))]
            _write(args.out, "\n".join(lines) + "\n")
            _write(_summary_path(args), _dump_json(summary))
    print(_dump_json(summary), end="")
    return 0


def cmd_spectrum(args, argv):
    d = _build_dictionary(args)
    if args.n is not None:
        n = args.n
    elif args.alpha is not None:
        n = round(args.alpha * d.p)
    else:
        eps = 0.5 if args.epsilon is None else args.epsilon
        n = min(max(round(d.p ** (1 - eps)), 2), d.n_atoms)
    res = error_spectrum(d, n, args.trials, args.master_seed, args.policy)
    summary = res.summary()
    if args.out:
        if args.format == "json":
            _write(args.out, _dump_json({
                "summary": summary,
                "eigenvalues": [[float(v) for v in ev] for ev in res.per_trial]}))
        else:
            lines = [_provenance(argv, "spectrum-eigenvalues/1", args.master_seed),
                     "trial_index,eigenvalue"]
            for i, ev in enumerate(res.per_trial):
                lines += [f"{i},{float(v)!r}" for v in ev]
            _write(args.out, "\n".join(lines) + "\n")
            _write(_summary_path(args), _dump_json(summary))
    svg_path = args.svg or (Path(args.out).with_suffix(".svg") if args.out else None)
    if svg_path:
        _write(svg_path, histogram_svg(res.eigenvalues, bins=args.bins, lo=args.lo, hi=args.hi,
                                       title=f"p={d.p} n={n} trials={args.trials}"))
    print(_dump_json(summary), end="")
    return 0


def cmd_decay(args, argv):
    if len(args.primes) < 2:
        raise UsageError("--primes needs at least two primes")
    if args.alpha is not None:
        raise UsageError("decay scans use --epsilon; --alpha is not supported here")
    eps = 0.5 if args.epsilon is None else args.epsilon
    cfg = ScanConfig(trials=args.trials, master_seed=args.master_seed, epsilon=eps,
                     threshold=args.threshold, policy=args.policy)
    reports = []
    for p in args.primes:
        if args.family == "heisenberg":
            d = build_heisenberg(p)
        else:
            d = build_random_onb_union(p, args.bases, args.seed)
        reports.append(srip_scan(d, cfg))
    rows = [_provenance(argv, "decay/1", args.master_seed),
            "p,n,threshold,exceed_count,trials,p_hat"]
    rows += [f"{r.p},{r.n},{r.threshold!r},{r.exceed_count},{r.trials},{r.p_hat!r}"
             for r in reports]
    if args.out:
        _write(args.out, "\n".join(rows) + "\n")
    else:
        print("\n".join(rows))
    fit = fit_decay(args.primes, [r.p_hat for r in reports], eps)
    summary = {"slope": fit.slope, "intercept": fit.intercept, "primes_used": fit.primes_used,
               "primes_zero": fit.primes_zero, "epsilon": eps}
    if args.out:
        _write(_summary_path(args), _dump_json(summary))
    print(_dump_json(summary), end="")
    return 0


def _read_signal(path, p):
    vals = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                re_s, _, im_s = line.partition(":")
                vals.append(complex(float(re_s), float(im_s or 0.0)))
            except ValueError:
                raise DictionaryFormatError(f"bad signal entry {line!r}", lineno) from None
    if len(vals) != p:
        raise UsageError(f"signal file has {len(vals)} entries, dictionary needs p={p}")
    return np.array(vals)


def cmd_recover(args, argv):
    d = _build_dictionary(args)
    out = {}
    if args.signal:
        y = _read_signal(args.signal, d.p)
        k = args.k or args.sparsity or 1
    else:
        if not args.sparsity:
            raise UsageError("synthetic mode needs --sparsity (or pass --signal)")
        rng = np.random.default_rng(trial_seed(args.seed, 0))
        planted = sample_support(d, args.sparsity, trial_seed(args.seed, 1))
        c = rng.uniform(0.5, 2.0, len(planted)) * np.exp(2j * np.pi * rng.random(len(planted)))
        y = d.atoms(planted) @ c
        k = args.k or args.sparsity
        out["planted_support"] = [list(a) for a in planted]
        out["planted_coefficients"] = [[float(v.real), float(v.imag)] for v in c]
    res = omp(d, y, k, args.tol)
    out.update(res.to_json())
    if "planted_support" in out:
        out["exact_recovery"] = sorted(res.support_found) == sorted(
            AtomId(*a) for a in out["planted_support"])
    text = _dump_json(out)
    if args.out:
        _write(args.out, text)
    print(text, end="")
    return 0


def cmd_rip_exact(args, argv):
    d = _build_dictionary(args)
    rep = rip_exact_check(d, args.n_max, args.budget)
    text = _dump_json({"n_max": rep.n_max, "delta": rep.delta, "upper": rep.upper,
                       "lower": rep.lower, "supports": rep.n_supports,
                       "argmax_support": [list(a) for a in rep.argmax_support]})
    if args.out:
        _write(args.out, text)
    print(text, end="")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sriplab",
        description="Incoherent union-of-ONB dictionaries: coherence, RIP tails, "
                    "Gram spectra, sparse recovery.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dict", help="build (and save) a dictionary")
    _dict_spec_args(p)
    _out_args(p, fmt=False)
    p.set_defaults(func=cmd_dict)

    p = sub.add_parser("coherence", help="coherence coefficient mu")
    _dict_spec_args(p)
    _out_args(p)
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("srip", help="tail probability of ||G(S) - Id|| over random supports")
    _dict_spec_args(p)
    _scan_args(p)
    _out_args(p)
    p.add_argument("--summary", metavar="PATH")
    p.set_defaults(func=cmd_srip)

    p = sub.add_parser("spectrum", help="pooled spectrum of the normalized Gram error")
    _dict_spec_args(p)
    _scan_args(p, need_threshold=False)
    p.add_argument("--n", type=int, help="explicit support size")
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--lo", type=float, default=-2.5)
    p.add_argument("--hi", type=float, default=2.5)
    p.add_argument("--svg", metavar="PATH")
    _out_args(p)
    p.add_argument("--summary", metavar="PATH")
    p.set_defaults(func=cmd_spectrum, trials=200)

    p = sub.add_parser("decay", help="log-log fit of tail probability against p")
    p.add_argument("--primes", type=int, nargs="+", required=True)
    p.add_argument("--family", choices=("heisenberg", "random"), default="heisenberg")
    p.add_argument("--bases", type=int, default=1, help="bases per prime for --family random")
    p.add_argument("--seed", type=int, default=0)
    _scan_args(p)
    _out_args(p, fmt=False)
    p.add_argument("--summary", metavar="PATH")
    p.set_defaults(func=cmd_decay, trials=2000)

    p = sub.add_parser("recover", help="orthogonal matching pursuit demo")
    _dict_spec_args(p)
    p.add_argument("--sparsity", type=int, help="planted sparsity for a synthetic signal")
    p.add_argument("--signal", metavar="PATH", help="input vector file, one re:im per line")
    p.add_argument("--k", type=int, help="OMP iteration cap (default: sparsity)")
    p.add_argument("--tol", type=float, default=1e-10)
    _out_args(p, fmt=False)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("rip-exact", help="exhaustive worst-case RIP deviation")
    _dict_spec_args(p)
    p.add_argument("--n-max", type=int, default=2)
    p.add_argument("--budget", type=int, default=2_000_000)
    _out_args(p, fmt=False)
    p.set_defaults(func=cmd_rip_exact)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "heisenberg", None) is not None:
            check_prime(args.heisenberg)
        return args.func(args, argv)
    except InsufficientDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ConfigError, InvalidPrimeError, DictionaryFormatError,
            DictionaryValidationError, BudgetExceededError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
