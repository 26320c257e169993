"""
Command implementations behind ``main.py``.

Each ``cmd_*`` takes the parsed argparse namespace and returns the process
exit code: 0 on success, 1 when some input failed, 2 for usage errors.
"""

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Sequence, Tuple, TypeVar

import numpy as np

from anneal.annealer import Placement, anneal
from anneal.matching import match_placements
from cli.pipeline import PlotExtractor
from cli.settings import Settings, apply_overrides, caption_pairs, load_settings, resolve_templates
from errors import MalformedModelFile, ModelIoError, NoTemplates, PlotMinerError
from features.vector import FAMILIES, FeatureVector, extract_image_features, parse_families
from plotseg.templates import standard_templates
from raster.images import GrayImage, binarize, load_image, write_pgm
from storage.data_storage import (
    JsonLinesWriter,
    dumps_canonical,
    ensure_dir,
    list_images,
    read_caption,
    read_json_lines,
    read_truth,
    write_caption,
    write_json,
    write_truth,
)
from svm.evaluation import (
    ablation_table,
    cross_validate,
    evaluate,
    format_ablation,
    train_test_split,
)
from svm.linear_svm import predict, train
from svm.model_io import load_model, save_model
from synth.evaluation import eval_disambiguation
from synth.overlap import OverlapSpec, gen_overlap_image, overlap_templates
from synth.plots import PlotSpec, build_classifier_corpus, gen_plot_image, make_caption

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURES = 1
EXIT_USAGE = 2

T = TypeVar("T")


class UsageError(PlotMinerError):
    """Bad command-line arguments detected after parsing."""


def settings_from_args(args: argparse.Namespace) -> Settings:
    settings = load_settings(getattr(args, "config", None))
    return apply_overrides(
        settings,
        seed=args.seed,
        iters=getattr(args, "iters", None),
        temp_const=getattr(args, "temp_const", None),
        lexicon_path=getattr(args, "lexicon", None),
    )


def parse_shape_counts(text: str) -> Dict[str, int]:
    """``"diamond=3,triangle=2"`` -> ``{"diamond": 3, "triangle": 2}``."""
    counts: Dict[str, int] = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        name, _, count = part.partition("=")
        try:
            counts[name.strip()] = int(count) if count else 1
        except ValueError:
            raise UsageError(f"bad shape count '{part}', expected NAME=COUNT") from None
    if not counts:
        raise UsageError("no shapes given")
    return counts


def run_ordered(func: Callable[[Path], T], items: Sequence[Path], workers: int) -> List[T]:
    """Map over inputs, optionally on a thread pool, keeping input order."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, items))
    return [func(item) for item in items]


def _load_model_or_usage(path):
    try:
        return load_model(path)
    except (ModelIoError, MalformedModelFile) as e:
        raise UsageError(str(e)) from None


# classify -------------------------------------------------------------------

def cmd_classify(args: argparse.Namespace) -> int:
    images = list_images(args.images)
    if not images:
        raise UsageError("classify needs at least one image")
    settings = settings_from_args(args)
    model = _load_model_or_usage(args.model)
    explicit = caption_pairs(images, args.captions)

    def classify_one(path: Path) -> Dict:
        try:
            caption = Path(explicit[str(path)]).read_text() if str(path) in explicit else read_caption(path)
            vector = extract_image_features(load_image(path), caption, settings.features, invert=args.invert)
            label, score = predict(model, vector)
            return {"file": str(path), "is_plot": label > 0, "score": score}
        except (PlotMinerError, OSError) as e:
            logger.error(f"{path}: {e}")
            return {"file": str(path), "error": str(e)}

    records = run_ordered(classify_one, images, args.workers)
    with JsonLinesWriter(args.out) as writer:
        for record in records:
            writer.write(record)
    failures = sum("error" in r for r in records)
    logger.info(f"Classified {len(records) - failures}/{len(records)} files (seed {settings.anneal.seed})")
    return EXIT_FAILURES if failures else EXIT_OK


# extract --------------------------------------------------------------------

def cmd_extract(args: argparse.Namespace) -> int:
    settings = settings_from_args(args)
    model = _load_model_or_usage(args.model) if args.model else None
    extractor = PlotExtractor(resolve_templates(args.templates), settings, model, invert=args.invert)

    images = list_images(args.images)
    if not images:
        raise UsageError("extract needs at least one image")
    explicit = caption_pairs(images, [args.caption] if args.caption else None)

    def extract_one(path: Path) -> Dict:
        try:
            caption = Path(explicit[str(path)]).read_text() if str(path) in explicit else read_caption(path)
            return extractor.extract(path, caption).to_dict()
        except (PlotMinerError, OSError) as e:
            logger.error(f"{path}: {e}")
            return {"source": str(path), "error": str(e), "seed": settings.anneal.seed}

    records = run_ordered(extract_one, images, args.workers)
    if len(records) == 1:
        text = dumps_canonical(records[0], indent=2)
        if args.out:
            Path(args.out).write_text(text + "\n")
        else:
            sys.stdout.write(text + "\n")
    else:
        with JsonLinesWriter(args.out) as writer:
            for record in records:
                writer.write(record)
    return EXIT_FAILURES if any("error" in r for r in records) else EXIT_OK


# train ----------------------------------------------------------------------

def load_corpus(path, default_layout) -> Tuple[List[FeatureVector], List[int]]:
    vectors, labels = [], []
    try:
        records = list(read_json_lines(path))
    except (OSError, ValueError) as e:
        raise UsageError(f"cannot read corpus: {e}") from None
    for n, record in enumerate(records, start=1):
        try:
            layout = tuple(record.get("layout", default_layout))
            vectors.append(FeatureVector.from_flat(record["features"], layout))
            label = record["label"]
        except (AttributeError, KeyError, TypeError, ValueError) as e:
            raise UsageError(f"{path}:{n}: bad corpus record ({e})") from None
        if isinstance(label, bool) or label not in (-1, 1):
            raise UsageError(f"{path}:{n}: label must be +1 or -1, got {label!r}")
        labels.append(int(label))
    if not vectors:
        raise UsageError(f"{path} holds no samples")
    return vectors, labels


def check_train_args(args: argparse.Namespace):
    if args.test_fraction and not 0.0 < args.test_fraction < 1.0:
        raise UsageError(f"--test-fraction must lie in (0, 1), got {args.test_fraction}")
    if args.k == 1 or args.k < 0:
        raise UsageError(f"--k must be 0 or at least 2, got {args.k}")
    if args.c <= 0:
        raise UsageError(f"--c must be positive, got {args.c}")
    if args.epochs < 1:
        raise UsageError(f"--epochs must be >= 1, got {args.epochs}")


def cmd_train(args: argparse.Namespace) -> int:
    check_train_args(args)
    settings = settings_from_args(args)
    seed = settings.anneal.seed
    vectors, labels = load_corpus(args.corpus, settings.features.layout)
    families = parse_families(args.families.split(",")) if args.families else frozenset(FAMILIES)
    vectors = [v.with_mask(families) for v in vectors]
    print(f"seed: {seed}")
    print(f"samples: {len(vectors)}  families: {'+'.join(f for f in FAMILIES if f in families)}")

    if args.ablation:
        rows = ablation_table(vectors, labels, k=args.k, c=args.c, seed=seed, epochs=args.epochs, workers=args.workers)
        print(format_ablation(rows, args.k))

    report = {"seed": seed, "samples": len(vectors), "families": sorted(families)}
    if args.k >= 2:
        cv = cross_validate(vectors, labels, k=args.k, c=args.c, seed=seed, epochs=args.epochs, workers=args.workers)
        print(f"\n{args.k}-fold CV accuracy: {cv.accuracy:.2f}%")
        for n, matrix in enumerate(cv.folds, start=1):
            print(f"\nFold {n}\n{matrix.format_table()}")
        report["cv_accuracy"] = cv.accuracy
        report["folds"] = [m.to_dict() for m in cv.folds]

    train_idx = np.arange(len(vectors))
    if args.test_fraction:
        train_idx, test_idx = train_test_split(len(vectors), args.test_fraction, seed)
    model = train([vectors[i] for i in train_idx], [labels[i] for i in train_idx], c=args.c, epochs=args.epochs, seed=seed)
    if args.test_fraction:
        train_matrix = evaluate(model, [vectors[i] for i in train_idx], [labels[i] for i in train_idx])
        test_matrix = evaluate(model, [vectors[i] for i in test_idx], [labels[i] for i in test_idx])
        print(f"\nTraining set ({train_matrix.total})\n{train_matrix.format_table()}")
        print(f"\nTest set ({test_matrix.total})\n{test_matrix.format_table()}")
        report["train"] = train_matrix.to_dict()
        report["test"] = test_matrix.to_dict()

    if args.model:
        save_model(model, args.model)
        report["model"] = str(args.model)
    if args.out:
        write_json(report, args.out)
    return EXIT_OK


# eval -----------------------------------------------------------------------

def cmd_eval(args: argparse.Namespace) -> int:
    settings = settings_from_args(args)
    if args.images < 1:
        raise UsageError("--images must be >= 1")
    spec = OverlapSpec(
        canvas=(args.height, args.width),
        shape_counts=parse_shape_counts(args.shapes),
        min_overlap_pairs=args.min_overlap,
        seed=settings.anneal.seed,
    )
    templates = resolve_templates(args.templates) if args.templates else overlap_templates()
    table = eval_disambiguation(args.images, spec, settings.anneal, args.tol, templates, workers=args.workers)
    print(f"seed: {settings.anneal.seed}")
    print(table.format_text())
    if args.out:
        write_json(dict(table.to_dict(), seed=settings.anneal.seed, spec=spec.to_dict()), args.out)
    return EXIT_OK


# gen ------------------------------------------------------------------------

def _gen_overlap(args, out_dir: Path, seed: int) -> int:
    spec = OverlapSpec(
        canvas=(args.height, args.width),
        shape_counts=parse_shape_counts(args.shapes),
        min_overlap_pairs=args.min_overlap,
        seed=seed,
    )
    templates = resolve_templates(args.templates) if args.templates else overlap_templates()
    for k in range(args.count):
        image, truth = gen_overlap_image(spec.with_seed(seed + k), templates)
        path = write_pgm(GrayImage.from_binary(image), out_dir / f"{args.name}_{k:04d}.pgm")
        write_truth(path, {"kind": "overlap", "spec": spec.with_seed(seed + k).to_dict(),
                           "placements": [p.to_dict() for p in truth]})
    return args.count


def _gen_plot(args, out_dir: Path, seed: int) -> int:
    rng = np.random.default_rng(seed)
    series = tuple(parse_shape_counts(args.shapes).items()) if args.shapes else (("diamond", 10),)
    templates = resolve_templates(args.templates) if args.templates else standard_templates()
    for k in range(args.count):
        spec = PlotSpec(
            canvas=(args.height, args.width),
            series=series,
            noise=args.noise,
            caption=make_caption(True, rng),
            seed=seed + k,
            connect_points=args.connect,
            fused_pairs=args.fused,
        )
        image, truth = gen_plot_image(spec, templates)
        path = write_pgm(image, out_dir / f"{args.name}_{k:04d}.pgm")
        write_truth(path, truth.to_dict())
        write_caption(path, spec.caption)
    return args.count


def _gen_corpus(args, out_dir: Path, seed: int, settings: Settings) -> int:
    negatives = args.negatives if args.negatives is not None else args.count
    items = build_classifier_corpus(
        args.count, negatives, seed, canvas=(args.height, args.width), lexicon=settings.features.lexicon
    )
    layout = settings.features.layout
    with JsonLinesWriter(out_dir / "features.jsonl") as writer:
        for item in items:
            path = write_pgm(item.image, out_dir / f"{item.name}.pgm")
            write_caption(path, item.caption)
            if item.truth is not None:
                write_truth(path, item.truth)
            vector = extract_image_features(item.image, item.caption, settings.features)
            writer.write({"name": item.name, "features": vector.values, "label": item.label, "layout": list(layout)})
    return len(items)


def cmd_gen(args: argparse.Namespace) -> int:
    settings = settings_from_args(args)
    seed = settings.anneal.seed
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    out_dir = ensure_dir(args.out_dir)
    if args.kind == "overlap":
        written = _gen_overlap(args, out_dir, seed)
    elif args.kind == "plot":
        written = _gen_plot(args, out_dir, seed)
    else:
        written = _gen_corpus(args, out_dir, seed, settings)
    print(dumps_canonical({"kind": args.kind, "images": written, "out_dir": str(out_dir), "seed": seed}))
    return EXIT_OK


# disambiguate ---------------------------------------------------------------

def cmd_disambiguate(args: argparse.Namespace) -> int:
    settings = settings_from_args(args)
    truth_record = read_truth(args.image)
    truth = [Placement.from_dict(p) for p in truth_record["placements"]] if truth_record else None

    if args.templates:
        templates = resolve_templates(args.templates)
    elif truth:
        wanted = {p.shape_id for p in truth}
        templates = [t for t in standard_templates() if t.shape_id in wanted]
        unknown = sorted(wanted - {t.shape_id for t in templates})
        if unknown:
            raise NoTemplates(f"truth shapes {', '.join(unknown)} have no built-in template; pass --templates")
    else:
        templates = overlap_templates()

    target = binarize(load_image(args.image), invert=args.invert)
    result = anneal(target, templates, settings.anneal)
    output = {"source": str(args.image), "result": result.to_dict(), "seed": settings.anneal.seed}
    if truth is not None:
        report = match_placements(result, truth, args.tol)
        output["match"] = report.to_dict()
        for t, f in report.matched:
            logger.info(f"matched {t.shape_id} truth ({t.i}, {t.j}) -> found ({f.i}, {f.j})")
        for t in report.missed:
            logger.warning(f"missed {t.shape_id} at ({t.i}, {t.j})")
        for f in report.spurious:
            logger.warning(f"spurious {f.shape_id} at ({f.i}, {f.j})")

    text = dumps_canonical(output, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "extract": cmd_extract,
    "train": cmd_train,
    "eval": cmd_eval,
    "gen": cmd_gen,
    "disambiguate": cmd_disambiguate,
}
