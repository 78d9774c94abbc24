import argparse
import logging
import sys

import yaml

from curvlab import _suites, config_path
from curvlab.utilities.errors import ConfigError, CurvlabError, InputError
from curvlab.utilities.misc import RunConfig, load_yaml, run_suite

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    #Bad flags are configuration errors (exit 2) rather than SystemExit
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    parser = _Parser(prog='curvlab', description='Nonnegative curvature toolkit for left-invariant metrics')
    parser.add_argument('command', choices=sorted(_suites), help='what to run')
    parser.add_argument('--input', dest='input_path', type=str, default=None, help='metric or direction file (analyze)')
    parser.add_argument('--seed', type=int, default=None, help='root seed')
    parser.add_argument('--samples', type=int, default=None, help='sample budget')
    parser.add_argument('--tol', type=float, default=None, help='run tolerance')
    parser.add_argument('--format', choices=['json', 'csv'], default=None, help='report format')
    parser.add_argument('--out', dest='out_path', type=str, default=None,
                        help='report file (catalog: output directory)')
    parser.add_argument('--algebra', type=str, default=None, help='so3, so4 or a JSON descriptor')
    parser.add_argument('--config', type=str, default=None, help='user YAML layered over the defaults')
    parser.add_argument('--options', nargs='*', default=None, metavar='KEY[=VALUE]',
                        help='command options; a bare key sets it to true')
    parser.add_argument('--debug', action='store_true', help='debug logging')
    return parser


def parse_options(items):
    options = {}
    for item in items or []:
        key, sep, value = item.partition('=')
        if not key:
            raise ConfigError(f'malformed option {item!r}')
        try:
            options[key] = yaml.safe_load(value) if sep else True
        except yaml.YAMLError as error:
            raise ConfigError(f'cannot parse option {item!r}: {error}') from error
    return options


def make_config(args):
    defaults = load_yaml(config_path(args.command))
    user = load_yaml(args.config) if args.config else None
    flags = {'seed': args.seed, 'samples': args.samples, 'tol': args.tol, 'format': args.format,
             'algebra': args.algebra, 'input_path': args.input_path, 'out_path': args.out_path}
    options = parse_options(args.options)
    if options:
        flags['options'] = options
    return RunConfig.from_layers(args.command, defaults, user, flags)


def main(argv=None):
    debug = '--debug' in (sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.DEBUG if debug else logging.INFO, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s', force=True)
    try:
        args = build_parser().parse_args(argv)
        config = make_config(args)
        result = run_suite(config)
    except (ConfigError, InputError) as error:
        logger.error(str(error))
        return 2
    except CurvlabError as error:
        logger.error(str(error))
        return 1
    except Exception:
        logger.exception('unexpected failure')
        return 1
    return result.exit_code


if __name__ == '__main__':
    sys.exit(main())
