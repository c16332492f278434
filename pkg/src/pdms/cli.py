"""Command-line interface: ``pdms construct|search|encode|decode|partial|audit``.

Exit codes:
  0 ok, 1 audit found a failing property, 2 bad parameters or share count,
  3 construction failed, 4 search budget exhausted, 5 IO error,
  6 shares do not match the scheme (digest/header mismatch or corrupt),
  7 a mandatory audit check was truncated by a budget.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from .audit import Budgets, classify
from .codec import (CodecError, CorruptShareError, Share, ShareMismatchError, decode_file,
                    decode_group_file, encode_file)
from .construction import (ConstructionError, ParameterError, SchemeParams, build_scheme,
                           load_matrix, load_scheme, validate_params)
from .gf import FieldError, OsSource, SeededSource
from .superregular import GuardExceeded, SearchBudget, SearchExhausted, search_pmu_superregular

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_PARAM = 2
EXIT_CONSTRUCT = 3
EXIT_SEARCH = 4
EXIT_IO = 5
EXIT_MISMATCH = 6
EXIT_TRUNCATED = 7


class CliError(Exception):
    def __init__(self, code: int, msg: str) -> None:
        self.code = code
        super().__init__(msg)


def _atomic_write(path: Path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write_many(items: list[tuple[Path, bytes]]) -> None:
    """Write every file to a temp name first; rename only if all succeeded."""
    staged = []
    try:
        for path, data in items:
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            staged.append((tmp, path))
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
        for tmp, path in staged:
            os.replace(tmp, path)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise


def _params(args) -> SchemeParams:
    params = SchemeParams(args.q, args.n, args.k, args.mu, args.p)
    try:
        validate_params(params)
    except ParameterError as exc:
        raise CliError(EXIT_PARAM, "invalid parameters: " + "; ".join(exc.problems)) from None
    return params


def _load_scheme(path):
    try:
        return load_scheme(path)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read scheme: {exc}") from None
    except (ParameterError, FieldError) as exc:
        raise CliError(EXIT_PARAM, f"bad scheme descriptor: {exc}") from None
    except ConstructionError as exc:
        raise CliError(EXIT_CONSTRUCT, f"bad scheme descriptor: {exc}") from None


def _load_shares(paths) -> list[Share]:
    shares = []
    for path in paths:
        try:
            blob = Path(path).read_bytes()
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot read share: {exc}") from None
        try:
            shares.append(Share.from_bytes(blob))
        except CorruptShareError as exc:
            raise CliError(EXIT_MISMATCH, f"{path}: {exc}") from None
    return shares


def _write_descriptor(scheme, out: Path) -> None:
    try:
        _atomic_write(out, scheme.canonical_json() + b"\n")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {out}: {exc}") from None
    print(scheme.digest.hex())


def cmd_construct(args) -> int:
    params = _params(args)
    if args.source is None and args.seed is None:
        raise CliError(EXIT_PARAM, "construct needs --seed or --source")
    source = None
    if args.source is not None:
        try:
            source = load_matrix(args.source, params.q)
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot read source: {exc}") from None
        except (ParameterError, ValueError) as exc:
            raise CliError(EXIT_PARAM, f"bad source matrix: {exc}") from None
    try:
        scheme = build_scheme(params, source, seed=args.seed, layout=args.layout)
    except ConstructionError as exc:
        raise CliError(EXIT_CONSTRUCT, f"construction failed: {exc}") from None
    _write_descriptor(scheme, Path(args.out))
    return EXIT_OK


def cmd_search(args) -> int:
    params = _params(args)
    try:
        found = search_pmu_superregular(params, SearchBudget(args.tries, args.seed))
    except SearchExhausted as exc:
        print(f"search exhausted after {exc.attempts} attempts over F_{exc.q}; "
              "try a larger field", file=sys.stderr)
        return EXIT_SEARCH
    except (GuardExceeded, ValueError) as exc:
        raise CliError(EXIT_PARAM, str(exc)) from None
    try:
        scheme = build_scheme(params, found.matrix, seed=args.seed,
                              extra={"perfect_candidate": True,
                                     "search": {"attempts": found.attempts, "method": found.method}})
    except ConstructionError as exc:
        raise CliError(EXIT_CONSTRUCT, f"construction failed: {exc}") from None
    print(f"found after {found.attempts} attempt(s) ({found.method}); audit advised",
          file=sys.stderr)
    _write_descriptor(scheme, Path(args.out))
    return EXIT_OK


def cmd_encode(args) -> int:
    scheme = _load_scheme(args.scheme)
    try:
        data = Path(args.input).read_bytes()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read input: {exc}") from None
    rng = SeededSource(args.seed) if args.seed is not None else OsSource()
    try:
        shares = encode_file(scheme, data, rng)
    except CodecError as exc:
        raise CliError(EXIT_PARAM, str(exc)) from None
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        _atomic_write_many([(out / f"share_{sh.node_index}.pdms", sh.to_bytes()) for sh in shares])
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write shares: {exc}") from None
    return EXIT_OK


def _codec_error(exc: CodecError) -> CliError:
    if isinstance(exc, (ShareMismatchError, CorruptShareError)):
        return CliError(EXIT_MISMATCH, str(exc))
    return CliError(EXIT_PARAM, str(exc))


def cmd_decode(args) -> int:
    scheme = _load_scheme(args.scheme)
    shares = _load_shares(args.shares)
    try:
        data = decode_file(scheme, shares)
    except CodecError as exc:
        raise _codec_error(exc) from None
    try:
        _atomic_write(Path(args.out), data)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write output: {exc}") from None
    return EXIT_OK


def cmd_partial(args) -> int:
    scheme = _load_scheme(args.scheme)
    shares = _load_shares(args.shares)
    try:
        chunk = decode_group_file(scheme, args.group, shares)
    except CodecError as exc:
        raise _codec_error(exc) from None
    out = Path(args.out)
    side = out.with_name(out.name + ".json")
    meta = json.dumps(chunk.sidecar(), sort_keys=True).encode() + b"\n"
    try:
        _atomic_write_many([(out, chunk.data), (side, meta)])
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write output: {exc}") from None
    return EXIT_OK


def cmd_audit(args) -> int:
    scheme = _load_scheme(args.scheme)
    try:
        budgets = Budgets.from_env()
    except ValueError as exc:
        raise CliError(EXIT_PARAM, str(exc)) from None
    if args.budget_subsets is not None:
        budgets = Budgets(args.budget_subsets, budgets.states)
    if args.budget_states is not None:
        budgets = Budgets(budgets.subsets, args.budget_states)
    report = classify(scheme, budgets, entropy=args.entropy)
    print(report.to_json())
    if report.mandatory_truncated:
        return EXIT_TRUNCATED
    return EXIT_OK if report.mandatory_ok else EXIT_FAILED


def _add_params(sp) -> None:
    sp.add_argument("--q", type=int, default=257, help="prime field size (default 257)")
    sp.add_argument("--n", type=int, required=True, help="number of nodes")
    sp.add_argument("--k", type=int, required=True, help="reconstruction threshold")
    sp.add_argument("--mu", type=int, required=True, help="strong-security threshold")
    sp.add_argument("--p", type=int, required=True, help="partial-decode group size")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pdms", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("construct", help="build a scheme descriptor")
    _add_params(sp)
    sp.add_argument("--seed", type=int, help="seed for a random Cauchy source")
    sp.add_argument("--source", help="JSON file with a k x n superregular source matrix")
    sp.add_argument("--layout", choices=("auto", "partial", "source"), default="auto")
    sp.add_argument("--out", default="scheme.json")
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("search", help="search a (p,mu)-superregular source and build a scheme")
    _add_params(sp)
    sp.add_argument("--tries", type=int, default=1000)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", default="scheme.json")
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("encode", help="encode a file into n shares")
    sp.add_argument("--scheme", required=True)
    sp.add_argument("--input", required=True)
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--seed", type=int, help="deterministic randomness (default: OS entropy)")
    sp.set_defaults(func=cmd_encode)

    sp = sub.add_parser("decode", help="decode a file from any k shares")
    sp.add_argument("--scheme", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("shares", nargs="+")
    sp.set_defaults(func=cmd_decode)

    sp = sub.add_parser("partial", help="decode one group of file symbols")
    sp.add_argument("--scheme", required=True)
    sp.add_argument("--group", type=int, required=True, help="0-based group index")
    sp.add_argument("--out", required=True)
    sp.add_argument("shares", nargs="+")
    sp.set_defaults(func=cmd_partial)

    sp = sub.add_parser("audit", help="check MDS, security and decodability")
    sp.add_argument("--scheme", required=True)
    sp.add_argument("--entropy", action="store_true", help="also run the brute-force oracle")
    sp.add_argument("--budget-subsets", type=int)
    sp.add_argument("--budget-states", type=int)
    sp.set_defaults(func=cmd_audit)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"pdms: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
