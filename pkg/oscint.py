import argparse
import sys
import traceback
from pathlib import Path

import classify
import closedform
import config
import dui
import fresnel
import oscquad
import report
from common import AccuracyError, DomainError, UsageError, __version__, log

COMMAND_MODULES = {
    "fresnel": fresnel,
    "eval": closedform,
    "ibp-check": oscquad,
    "classify": classify,
    "dui": dui,
    "report": report,
}

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2


class OscintArgumentParser(argparse.ArgumentParser):
    """Prints help and exits with the usage code on bad arguments."""

    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(EXIT_USAGE, f"\n{self.prog}: error: {message}\n")


def create_main_parser():
    parser = OscintArgumentParser(
        prog="oscint",
        description="oscint: Fresnel-type oscillatory integrals, their divergent table entries,\n"
                    "and checks for differentiation under the integral sign.",
        epilog="Run 'oscint.py <command> --help' for more information on a specific command.",
        formatter_class=argparse.RawTextHelpFormatter
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", title="Available Commands", parser_class=OscintArgumentParser)

    for name, module in COMMAND_MODULES.items():
        module.add_parser(subparsers)

    return parser

def cli_main(argv=None) -> int:
    main_parser = create_main_parser()
    try:
        args = main_parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    if not hasattr(args, 'func'):
        main_parser.print_help()
        return EXIT_USAGE

    try:
        return args.func(args)
    except (UsageError, DomainError) as e:
        log.error(str(e))
        return EXIT_USAGE
    except AccuracyError as e:
        log.error(f"{e} (best estimate: {e.best_estimate}, error bound: {e.error_bound})")
        return EXIT_NUMERICAL
    except OSError as e:
        log.error(f"I/O failure: {e}")
        return EXIT_USAGE
    except Exception as e:
        log.error(f"An unexpected error occurred: {e}")
        traceback.print_exc()
        return EXIT_NUMERICAL

def main():
    if not Path(config.CONFIG_FILENAME).exists():
        config.create_default_config(config.CONFIG_FILENAME)
    sys.exit(cli_main(sys.argv[1:]))

if __name__ == "__main__":
    main()
