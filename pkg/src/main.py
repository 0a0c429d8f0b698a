import argparse
import logging
import os
import sys

from .commands import HANDLERS, apply_preset, seed_everything
from .config import load_config, snapshot_config
from .errors import ConfigError, EmoStarGANError
from .logging_config import setup_run_logging

TRAIN_COMMANDS = (
    "pretrain-f0",
    "pretrain-ling",
    "train-emotion-stage1",
    "train-emotion-stage2",
    "train-vc",
)


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        type=str,
        help="Configuration file to use (default: configs/config-default.yaml)",
    )
    parser.add_argument("--seed", type=int, help="Random seed (overrides training.seed)")
    parser.add_argument("--out-dir", type=str, help="Run directory (overrides out_dir)")
    parser.add_argument(
        "--log-level", type=str, help="Console log level (DEBUG, INFO, WARNING, ERROR)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emo-stargan", description="Emotion-preserving voice conversion"
    )
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    toy = commands.add_parser("make-toy-data", help="Synthesise the toy emotional corpus")
    _common(toy)

    descriptions = {
        "pretrain-f0": "Pre-train the pitch network on oracle F0",
        "pretrain-ling": "Pre-train the linguistic network on frame labels",
        "train-emotion-stage1": "Stage I: emotion conversion with emotions as domains",
        "train-emotion-stage2": "Stage II: fine-tune the emotion embedding extractor",
        "train-vc": "Train the voice-conversion model",
    }
    for name in TRAIN_COMMANDS:
        sub = commands.add_parser(name, help=descriptions[name])
        _common(sub)
        sub.add_argument("--manifest", type=str, help="Dataset manifest (default: toy corpus)")
        sub.add_argument("--max-steps", type=int, help="Stop after this many steps")
        sub.add_argument("--resume", action="store_true", help="Resume from the latest checkpoint")
        sub.add_argument("--preset", type=str, help="Loss preset (e.g. baseline, emo_stargan)")
        if name == "train-emotion-stage2":
            sub.add_argument("--stage1-dir", type=str, help="Directory holding the Stage-I output")

    conv = commands.add_parser("convert", help="Convert an utterance or a manifest split")
    _common(conv)
    conv.add_argument("--checkpoint", required=True, help="Voice-conversion checkpoint directory")
    conv.add_argument("--in", dest="input", type=str, help="Source WAV")
    conv.add_argument("--target", type=int, help="Target speaker code")
    conv.add_argument("--reference", type=str, help="Reference WAV for the target style")
    conv.add_argument("--out", dest="output", type=str, help="Output WAV")
    conv.add_argument("--manifest", type=str, help="Manifest to convert when --in is absent")
    conv.add_argument("--split", default="test", choices=["train", "val", "test"])

    feats = commands.add_parser("extract-features", help="Dump per-window descriptor values")
    _common(feats)
    feats.add_argument("--in", dest="input", nargs="+", help="WAV files")
    feats.add_argument("--manifest", type=str, help="Manifest to read when --in is absent")
    feats.add_argument("--split", default="train", choices=["train", "val", "test"])
    feats.add_argument("--all-kinds", action="store_true", help="All four descriptor kinds")

    ev = commands.add_parser("evaluate", help="Objective metrics over a pairs corpus")
    _common(ev)
    ev.add_argument("--pairs", required=True, help="Pairs JSONL file")
    ev.add_argument("--report", type=str, help="Report directory (default: <out-dir>/report)")
    ev.add_argument("--extractor", type=str, help="Emotion embedding extractor checkpoint")
    ev.add_argument("--ling-net", type=str, help="Linguistic network checkpoint (for CER)")
    ev.add_argument("--svm-manifest", type=str, help="Manifest whose train split trains the SVM")

    cmp = commands.add_parser("compare", help="Compare two evaluation reports")
    _common(cmp)
    cmp.add_argument("--baseline", required=True, help="Baseline report directory")
    cmp.add_argument("--candidate", required=True, help="Candidate report directory")

    sel = commands.add_parser("select-descriptor", help="Pick the best single descriptor")
    _common(sel)
    sel.add_argument("--reports", required=True, help="Directory with one af_<kind> report each")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    overrides: dict = {}
    if args.seed is not None:
        overrides.setdefault("training", {})["seed"] = args.seed
    if args.out_dir:
        overrides["out_dir"] = args.out_dir
    if args.log_level:
        overrides.setdefault("logging", {})["level"] = args.log_level

    try:
        try:
            config = load_config(args.config, overrides or None)
        except FileNotFoundError as e:
            raise ConfigError(str(e)) from e
        config = apply_preset(config, getattr(args, "preset", None))

        log_file = setup_run_logging(
            log_dir=config.logging.log_dir,
            log_level=config.logging.level,
            silence_third_party=config.logging.silence_third_party,
            third_party_level=config.logging.third_party_level,
        )
        logger = logging.getLogger("emo-stargan")
        logger.info(f"Log file for this run: {log_file}")
        logger.info(f"App version: {os.getenv('APP_VERSION', 'unknown')}")
        logger.info(f"Command line arguments: {vars(args)}")

        seed_everything(config.training.seed)
        snapshot_config(config, config.out_dir)
        return HANDLERS[args.command](args, config)
    except ConfigError as e:
        print(f"error={e.category} message={e}", file=sys.stderr)
        return ConfigError.exit_code
    except EmoStarGANError as e:
        print(f"error={e.category} message={e}", file=sys.stderr)
        return e.exit_code
    except (FileNotFoundError, ValueError) as e:
        print(f"error=runtime message={e}", file=sys.stderr)
        return 1
    except Exception as e:
        # full traceback goes to the run log file only
        logging.getLogger("emo-stargan").debug("Unhandled failure", exc_info=True)
        print(f"error=runtime message={type(e).__name__}: {e}", file=sys.stderr)
        return 1


def cli_main():
    """Sync entrypoint for Poetry scripts."""
    sys.exit(main())


if __name__ == "__main__":
    cli_main()
