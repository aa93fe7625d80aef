# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import argparse
import sys
from utils import debug_utils
debug_utils.setup_debug_mode()
import logging
logger = logging.getLogger(__name__)

COMMANDS = ("verify-constants", "solve", "sweep")


def _seed(text):
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser():
    from utils.constants import APP_NAME, APP_VERSION
    parser = argparse.ArgumentParser(prog=APP_NAME, description="Numerical lab for the two-phase Stefan problem.")
    parser.add_argument("--version", action="version", version=f"{APP_NAME} {APP_VERSION}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="YAML run configuration")
    parser.add_argument("--out", default=None, help="output directory (overrides experiments.output_dir)")
    parser.add_argument("--seed", type=_seed, default=None, help="random seed (overrides experiments.seed)")
    return parser


def main(argv=None):
    log_level = logging.DEBUG if debug_utils.IS_DEBUG_MODE else logging.INFO
    logging.basicConfig(
        level=log_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    from utils.localization import lang_manager
    lang_manager.setup_translation()
    from utils.constants import EXIT_CONFIG_ERROR
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG_ERROR if e.code not in (0, None) else 0

    from utils.config_manager import ConfigError, load_config
    from services import experiment_service
    handlers = {
        "verify-constants": experiment_service.cmd_verify_constants,
        "solve": experiment_service.cmd_solve,
        "sweep": experiment_service.cmd_sweep,
    }
    try:
        config = load_config(args.config, out=args.out, seed=args.seed)
        return handlers[args.command](config)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR
    except ValueError as e:
        logger.error(f"Invalid input for {args.command}: {e}")
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
