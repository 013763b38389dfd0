"""Command-line entry point: ``ecg-rr {generate,train,eval,experiment,estimate}``.

Exit codes: 0 success, 1 usage error, 2 data/model error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path


from .datagen import GenConfig, generate_dataset, read_record_csv
from .errors import NumericFailure
from .harness import (CLI_METHODS, METHOD_ARCH, Method, Report, estimate_rr, load_spectra,
                      metrics_from_errors, run_experiment, split_data, N_TRAIN)
from .spectral import EcgRecord
from .training import TrainConfig, load_model, save_model, train

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("ecg_rr")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed_list(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _load_method(name: str, model_path: str | None) -> Method:
    method = CLI_METHODS[name]
    model = None
    if method != "DFT":
        if model_path is None:
            raise argparse.ArgumentTypeError(f"--model is required for method {name}")
        model = load_model(model_path, METHOD_ARCH[method])
    return Method(method, model)


def cmd_generate(args) -> int:
    cfg = GenConfig(uneven_fraction=args.uneven_fraction)
    manifest = generate_dataset(args.n, cfg, args.seed, args.out)
    print(f"wrote {len(manifest.records)} records to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    spectra, labels = load_spectra(args.data)
    data, _, _ = split_data(spectra, labels, args.split_seed, args.n_train)
    seed = args.split_seed if args.seed is None else args.seed
    cfg = TrainConfig(learning_rate=args.lr, epochs=args.epochs, arch=args.arch, seed=seed)
    model, hist = train(data, cfg)
    save_model(model, args.model_out)
    print(f"best test RR-MSE {hist.best_metric:.4f} at epoch {hist.best_epoch}; "
          f"model written to {args.model_out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    method = _load_method(args.method, args.model)
    spectra, labels = load_spectra(args.data)
    data, _, _ = split_data(spectra, labels, args.split_seed, args.n_train)
    m = metrics_from_errors(method.estimate_spectra(data.test_x) - data.test_rr)
    report = Report()
    report.add(str(args.split_seed), method.name, m)
    Path(args.report).write_text(report.to_csv())
    sys.stdout.write(report.to_table())
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = TrainConfig(learning_rate=args.lr, epochs=args.epochs)
    report = run_experiment(args.data, args.seeds, cfg, args.report, args.n_train)
    sys.stdout.write(report.to_table())
    return EXIT_OK


def cmd_estimate(args) -> int:
    method = _load_method(args.method, args.model)
    record = EcgRecord(read_record_csv(Path(args.input)), args.sample_rate_hz, 0)
    print(estimate_rr(method, record))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ecg-rr", description="ECG-derived respiration rate estimation.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a synthetic ECG dataset")
    g.add_argument("--out", required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--uneven-fraction", type=float, default=GenConfig.uneven_fraction)
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="train one network on a seeded split")
    t.add_argument("--data", required=True)
    t.add_argument("--arch", choices=sorted(METHOD_ARCH.values()), required=True)
    t.add_argument("--split-seed", type=int, required=True)
    t.add_argument("--seed", type=int, default=None,
                   help="parameter init seed (default: the split seed)")
    t.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    t.add_argument("--lr", type=float, default=TrainConfig.learning_rate)
    t.add_argument("--n-train", type=int, default=N_TRAIN)
    t.add_argument("--model-out", required=True)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="score one method on the test part of a split")
    e.add_argument("--data", required=True)
    e.add_argument("--method", choices=sorted(CLI_METHODS), required=True)
    e.add_argument("--model")
    e.add_argument("--split-seed", type=int, required=True)
    e.add_argument("--n-train", type=int, default=N_TRAIN)
    e.add_argument("--report", required=True)
    e.set_defaults(func=cmd_eval)

    x = sub.add_parser("experiment", help="three-split DFT / AE / AE+DCT comparison")
    x.add_argument("--data", required=True)
    x.add_argument("--seeds", type=_seed_list, default=[0, 1, 2])
    x.add_argument("--report", required=True)
    x.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    x.add_argument("--lr", type=float, default=TrainConfig.learning_rate)
    x.add_argument("--n-train", type=int, default=N_TRAIN)
    x.set_defaults(func=cmd_experiment)

    s = sub.add_parser("estimate", help="estimate the RR of one record CSV")
    s.add_argument("--input", required=True)
    s.add_argument("--method", choices=sorted(CLI_METHODS), required=True)
    s.add_argument("--model")
    s.add_argument("--sample-rate-hz", type=float, default=GenConfig.sample_rate_hz)
    s.set_defaults(func=cmd_estimate)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        print(f"ecg-rr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericFailure as exc:
        print(f"ecg-rr: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"ecg-rr: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
