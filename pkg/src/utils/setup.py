import os
import logging
from pprint import pformat
from dotmap import DotMap
from logging import Formatter
from logging.handlers import RotatingFileHandler

from src.utils.errors import ConfigurationError
from src.utils.utils import load_json, save_json, makedirs

DEFAULT_EXP_BASE = os.environ.get(
    'QRNG_EXP_BASE',
    os.path.join(os.path.dirname(__file__), '../../experiments'),
)


def process_config(config_path, override_dotmap=None, exp_name_suffix=None,
                   create_dirs=True):
    try:
        config_json = load_json(config_path)
    except (OSError, ValueError) as err:
        raise ConfigurationError(f'Cannot read config {config_path}: {err}') from err
    if not isinstance(config_json, dict):
        raise ConfigurationError(f'Config {config_path} must hold a JSON object.')
    config_json.setdefault('config_dir', os.path.dirname(os.path.abspath(config_path)))
    return _process_config(config_json, override_dotmap=override_dotmap,
                           exp_name_suffix=exp_name_suffix, create_dirs=create_dirs)


def _process_config(config_json, override_dotmap=None, exp_name_suffix=None,
                    create_dirs=True):
    """
    Processes config file:
        1) Converts it to a DotMap
        2) Creates the experiment path and its logs subdir
        3) Set up logging
    """
    config = DotMap(config_json)
    if override_dotmap is not None:
        config.update(override_dotmap)

    if not config.exp_name:
        config.exp_name = 'qrng'
    if exp_name_suffix is not None:
        config.exp_name = f'{config.exp_name}_{exp_name_suffix}'

    if create_dirs:
        exp_base = config.exp_base or DEFAULT_EXP_BASE
        exp_dir = os.path.join(exp_base, config.exp_name)
        config.exp_dir = exp_dir
        config.log_dir = os.path.join(exp_dir, 'logs/')
        makedirs([config.log_dir])
        save_json(config.toDict(), os.path.join(exp_dir, 'config.json'))
        setup_logging(config.log_dir)

    logger = logging.getLogger(__name__)
    logger.info('Loaded configuration:\n%s', pformat(config.toDict()))
    logger.info('Running experiment %s', config.exp_name)
    return config


def resolve_path(config, path):
    '''Resolves ``path`` against the directory the config file lives in.'''
    if path is None or os.path.isabs(path):
        return path
    base = config.config_dir if isinstance(config.config_dir, str) else os.getcwd()
    return os.path.normpath(os.path.join(base, path))


def setup_logging(log_dir=None, level=logging.INFO):
    log_file_format = "[%(levelname)s] - %(asctime)s - %(name)s - : %(message)s in %(pathname)s:%(lineno)d"
    log_console_format = "[%(levelname)s]: %(message)s"

    # Main logger
    main_logger = logging.getLogger()
    main_logger.setLevel(logging.DEBUG if log_dir else level)
    # Repeated runs in one process (tests, notebooks) must not stack handlers.
    for handler in list(main_logger.handlers):
        if getattr(handler, '_qrng_handler', False):
            main_logger.removeHandler(handler)
            handler.close()

    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(Formatter(log_console_format))
    handlers = [console_handler]

    if log_dir:
        makedirs([log_dir])
        exp_file_handler = RotatingFileHandler(
            os.path.join(log_dir, 'exp_debug.log'), maxBytes=10**6, backupCount=5)
        exp_file_handler.setLevel(logging.DEBUG)
        exp_file_handler.setFormatter(Formatter(log_file_format))

        exp_errors_file_handler = RotatingFileHandler(
            os.path.join(log_dir, 'exp_error.log'), maxBytes=10**6, backupCount=5)
        exp_errors_file_handler.setLevel(logging.WARNING)
        exp_errors_file_handler.setFormatter(Formatter(log_file_format))
        handlers += [exp_file_handler, exp_errors_file_handler]

    for handler in handlers:
        handler._qrng_handler = True
        main_logger.addHandler(handler)
