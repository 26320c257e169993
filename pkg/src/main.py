"""Command-line entry point for plotminer."""

import argparse
import logging
import sys
from typing import List, Optional

from cli.commands import COMMANDS, EXIT_FAILURES, EXIT_USAGE, UsageError
from cli.settings import DEFAULT_SEED, resolve_seed
from errors import ConfigError, PlotMinerError
from storage.logger import setup_logging

logger = logging.getLogger(__name__)


def _common(parser: argparse.ArgumentParser):
	parser.add_argument("--seed", type=int, default=None, help=f"random seed (default {DEFAULT_SEED})")
	parser.add_argument("--config", help="JSON file with features/segmentation/anneal settings")
	parser.add_argument("--lexicon", help="caption keyword file, one word per line")
	parser.add_argument("--out", help="output file (default stdout)")
	parser.add_argument("--log-dir", default="logs", help="directory for plotminer.log")
	parser.add_argument("--verbose", "-v", action="count", default=0, help="more console logging")
	parser.add_argument("--workers", type=int, default=1, help="threads for batch work")


def _anneal_flags(parser: argparse.ArgumentParser):
	parser.add_argument("--iters", type=int, help="annealing iterations")
	parser.add_argument("--temp-const", type=float, help="cooling constant e in (0, 1)")


def build_parser() -> argparse.ArgumentParser:
	parser = argparse.ArgumentParser(prog="plotminer", description="Extract data points from 2-D plot images.")
	sub = parser.add_subparsers(dest="command", required=True)

	p = sub.add_parser("classify", help="decide which figures are 2-D plots")
	_common(p)
	p.add_argument("images", nargs="*", help="PGM/PNG files or directories")
	p.add_argument("--model", required=True, help="trained SVM model file")
	p.add_argument("--captions", nargs="*", help="caption files paired with images by stem")
	p.add_argument("--invert", action="store_true", help="light ink on dark background")

	p = sub.add_parser("extract", help="extract axes, text boxes and data points")
	_common(p)
	_anneal_flags(p)
	p.add_argument("images", nargs="*", help="PGM/PNG file(s)")
	p.add_argument("--model", help="SVM model; without it classification is skipped")
	p.add_argument("--caption", help="caption file for the image")
	p.add_argument("--templates", help="directory of <shape_id>.pgm marker templates")
	p.add_argument("--invert", action="store_true")

	p = sub.add_parser("train", help="train the plot classifier on a features.jsonl corpus")
	_common(p)
	p.add_argument("corpus", help="JSON lines of {features, label, layout}")
	p.add_argument("--model", help="where to save the trained model")
	p.add_argument("--families", help="comma separated subset of IS,CA,CT")
	p.add_argument("--ablation", action="store_true", help="report CV accuracy per family combination")
	p.add_argument("--test-fraction", type=float, default=0.0, help="hold out this fraction for a test matrix")
	p.add_argument("--k", type=int, default=3, help="cross-validation folds (0 disables)")
	p.add_argument("--c", type=float, default=1.0, help="soft-margin constant")
	p.add_argument("--epochs", type=int, default=200)

	p = sub.add_parser("eval", help="disambiguation recall over generated overlap images")
	_common(p)
	_anneal_flags(p)
	p.add_argument("--images", type=int, default=10)
	p.add_argument("--shapes", default="diamond=3,triangle=2")
	p.add_argument("--min-overlap", type=int, default=1)
	p.add_argument("--height", type=int, default=90)
	p.add_argument("--width", type=int, default=90)
	p.add_argument("--tol", type=int, default=2)
	p.add_argument("--templates")

	p = sub.add_parser("gen", help="write synthetic images with truth sidecars")
	_common(p)
	p.add_argument("--kind", choices=("overlap", "plot", "corpus"), default="overlap")
	p.add_argument("--count", type=int, default=1)
	p.add_argument("--negatives", type=int, help="corpus negatives (default: --count)")
	p.add_argument("--out-dir", default="generated")
	p.add_argument("--name", default="image")
	p.add_argument("--shapes", help="e.g. diamond=3,triangle=2")
	p.add_argument("--min-overlap", type=int, default=1)
	p.add_argument("--height", type=int)
	p.add_argument("--width", type=int)
	p.add_argument("--noise", type=float, default=0.0)
	p.add_argument("--fused", type=int, default=0, help="overlapping marker pairs per plot")
	p.add_argument("--connect", action="store_true", help="join markers with a polyline")
	p.add_argument("--templates")

	p = sub.add_parser("disambiguate", help="anneal one overlap blob image")
	_common(p)
	_anneal_flags(p)
	p.add_argument("image")
	p.add_argument("--templates")
	p.add_argument("--tol", type=int, default=2)
	p.add_argument("--invert", action="store_true")
	return parser


def _default_canvas(args: argparse.Namespace):
	if getattr(args, "command", None) != "gen":
		return
	height, width = (90, 90) if args.kind == "overlap" else (120, 150)
	args.height = args.height or height
	args.width = args.width or width
	if args.kind == "overlap" and not args.shapes:
		args.shapes = "diamond=3,triangle=2"


def main(argv: Optional[List[str]] = None) -> int:
	parser = build_parser()
	try:
		args = parser.parse_args(argv)
	except SystemExit as e:
		return int(e.code or 0)
	_default_canvas(args)
	level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
	setup_logging(log_dir=args.log_dir, log_level=level, run_label=f"{args.command} seed={resolve_seed(args.seed)}")
	logger.info(f"plotminer {args.command} (seed {resolve_seed(args.seed)})")

	try:
		return COMMANDS[args.command](args)
	except (UsageError, ConfigError) as e:
		parser.print_usage(sys.stderr)
		print(f"plotminer {args.command}: error: {e}", file=sys.stderr)
		return EXIT_USAGE
	except PlotMinerError as e:
		logger.error(f"{args.command} failed: {e}")
		return EXIT_FAILURES


if __name__ == "__main__":
	sys.exit(main())
