import sys
import argparse
import logging
from dotmap import DotMap

from src.systems import qrng_systems
from src.utils.errors import QRNGError
from src.utils.setup import process_config, setup_logging

logger = logging.getLogger('run_qrng')

SYSTEM = {
    'gen': qrng_systems.GenerateBitsSystem,
    'dist': qrng_systems.DistributionSystem,
    'sweep': qrng_systems.EntropySweepSystem,
    'test': qrng_systems.BatteryTestSystem,
    'rate': qrng_systems.RateComparisonSystem,
    'perm': qrng_systems.PermanentSystem,
    'sources': qrng_systems.SourceSweepSystem,
    'collisions': qrng_systems.CollisionTrendSystem,
}

# Flags that override keys of a generator config file, only if given.
GEN_OVERRIDES = ('bits', 'out', 'format', 'seed', 'exp_base')


def load_command_config(args):
    '''Builds the DotMap a system runs on.

    ``gen`` reads its JSON config through process_config (experiment dir,
    logs, saved config); the other commands are fully described by flags.
    '''
    if args.command == 'gen':
        overrides = DotMap({k: getattr(args, k) for k in GEN_OVERRIDES
                            if getattr(args, k) is not None})
        config = process_config(args.config, override_dotmap=overrides)
        config.config_path = args.config
        return config
    setup_logging()
    options = {k: v for k, v in vars(args).items() if v is not None and k != 'command'}
    return DotMap(options)


def run(args):
    '''Runs one command.

    Args:
        args: parsed arguments; args.command names the entry of SYSTEM
    '''
    config = load_command_config(args)
    SystemClass = SYSTEM[args.command]
    system = SystemClass(config)
    return system.run()


def _add_optics(parser):
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument('--unitary', type=str, help='matrix JSON file or "paper_u5"')
    group.add_argument('--mesh', type=str, help='mesh JSON file')


def build_parser():
    parser = argparse.ArgumentParser(description='Boson-sampling random number generator.')
    commands = parser.add_subparsers(dest='command', required=True)

    gen = commands.add_parser('gen', help='generate a bit stream from a config')
    gen.add_argument('config', type=str, help='path to config file')
    gen.add_argument('--bits', type=int, required=True)
    gen.add_argument('--out', type=str, required=True)
    gen.add_argument('--format', type=str, choices=['packed', 'ascii'], default=None)
    gen.add_argument('--seed', type=int, default=None)
    gen.add_argument('--exp-base', dest='exp_base', type=str, default=None)

    dist = commands.add_parser('dist', help='exact output distribution as CSV')
    _add_optics(dist)
    dist.add_argument('--input', type=str, required=True)
    dist.add_argument('--out', type=str, required=True)
    dist.add_argument('--postselect', action='store_true', default=None)

    sweep = commands.add_parser('sweep', help='entropy versus one MZI angle')
    sweep.add_argument('--mesh', type=str, required=True)
    sweep.add_argument('--labels', type=lambda s: [t.strip() for t in s.split(',') if t.strip()],
                       default=None, help='comma-separated labels such as 1I,2I,1E')
    sweep.add_argument('--input', type=str, required=True)
    sweep.add_argument('--grid', type=int, default=128)
    sweep.add_argument('--out', type=str, required=True)

    test = commands.add_parser('test', help='run the randomness battery on a bit file')
    test.add_argument('--in', dest='in', type=str, required=True)
    test.add_argument('--format', type=str, choices=['packed', 'ascii'], default='packed')
    test.add_argument('--out', type=str, required=True)

    rate = commands.add_parser('rate', help='bits per pair: Boson sampling vs branching path')
    rate.add_argument('--modes', type=int, required=True)
    rate.add_argument('--photons', type=int, required=True)
    rate.add_argument('--pairs', type=int, required=True)
    rate.add_argument('--seed', type=int, required=True)
    rate.add_argument('--out', type=str, default=None)

    perm = commands.add_parser('perm', help='permanent of a matrix file')
    perm.add_argument('--matrix', type=str, required=True)
    perm.add_argument('--naive', action='store_true', default=None)
    perm.add_argument('--out', type=str, default=None)

    sources = commands.add_parser('sources', help='bias per input state')
    _add_optics(sources)
    sources.add_argument('--inputs', type=str, required=True, help='occupations separated by ";"')
    sources.add_argument('--bits', type=int, required=True)
    sources.add_argument('--seed', type=int, required=True)
    sources.add_argument('--alternating', action='store_true', default=None)
    sources.add_argument('--postselect', action='store_true', default=None)
    sources.add_argument('--emission', type=str, choices=['pair_major', 'mode_major'], default=None)
    sources.add_argument('--out', type=str, required=True)

    collisions = commands.add_parser('collisions', help='multi-photon probability versus photon number')
    collisions.add_argument('--modes', type=int, required=True)
    collisions.add_argument('--max-photons', dest='max_photons', type=int, required=True)
    collisions.add_argument('--seed', type=int, required=True)
    collisions.add_argument('--out', type=str, required=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        result = run(args)
    except QRNGError as err:
        logger.error('%s: %s', type(err).__name__, err)
        return err.exit_code
    if args.command == 'perm':
        print(f'{result.real:.17g}{result.imag:+.17g}j')
    elif args.command == 'rate':
        print(', '.join(f'{k}={v}' for k, v in sorted(result.items())))
    return 0


if __name__ == "__main__":
    sys.exit(main())
