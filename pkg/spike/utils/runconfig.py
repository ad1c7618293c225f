"""
Run-level configuration: plain-text `key=value` files with flag overrides.

Every key has exactly one effective source. A flag beats the file, the file
beats the environment (SPIKE_DTYPE through the runtime), and the environment
beats the built-in default. The resolved configuration is written back
as `key=value  # source` lines, and feeding that dump in again reproduces
the run.
"""

import logging
import re
from dataclasses import fields

from spike.errors import ConfigError
from spike.models import HyperParams, SegmentationConfig, TrainConfig

logger = logging.getLogger(__name__)

SOURCE_DEFAULT = 'default'
SOURCE_FLAG = 'flag'
SOURCE_ENV = 'env'

# Keys that are not part of a config record: (type, default)
EXTRA_KEYS = {
    'data': (str, None),
    'format': (str, 'native'),
    'checkpoint': (str, None),
    'out': (str, None),
    'threshold': (float, 0.10),
    'warmup': (int, 5),
    'iters': (int, 50),
}

RECORDS = (
    ('hp', HyperParams),
    ('train', TrainConfig),
    ('seg', SegmentationConfig),
)

_TRUE = ('1', 'true', 'yes', 'on')
_FALSE = ('0', 'false', 'no', 'off')
_INLINE_COMMENT = re.compile(r'\s+#.*$')


def _schema():
    schema = {}
    for group, record in RECORDS:
        for f in fields(record):
            schema[f.name] = (type(f.default), f.default, group)
    for key, (kind, default) in EXTRA_KEYS.items():
        schema[key] = (kind, default, 'run')
    return schema


SCHEMA = _schema()


def parse_value(key, raw):
    """Typed value for `key` from its text (or already-typed) form"""
    if key not in SCHEMA:
        raise ConfigError(key, 'unknown configuration key')
    kind, default, _ = SCHEMA[key]
    if not isinstance(raw, str):
        if kind is float and isinstance(raw, int) and not isinstance(raw, bool):
            return float(raw)
        if raw is None or isinstance(raw, kind):
            return raw
        raise ConfigError(key, f'expected {kind.__name__}, got {raw!r}')

    text = raw.strip()
    if text == '' and default is None:
        return None
    try:
        if kind is bool:
            if text.lower() in _TRUE:
                return True
            if text.lower() in _FALSE:
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigError(key, f'cannot parse {text!r} as {kind.__name__}') from None


def format_value(value):
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    return str(value)


def read_config_file(path):
    """{key: raw text} from a key=value file; '#' starts a comment"""
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as e:
        raise ConfigError('config', f'cannot read {path}: {e}') from e

    for line_no, line in enumerate(lines, 1):
        text = _INLINE_COMMENT.sub('', line).strip()
        if not text or text.startswith('#'):
            continue
        key, sep, value = text.partition('=')
        key = key.strip()
        if not sep:
            raise ConfigError(key or f'line {line_no}', f'{path}:{line_no}: expected key=value')
        if key not in SCHEMA:
            raise ConfigError(key, f'unknown configuration key ({path}:{line_no})')
        values[key] = value.strip()
    return values


def parse_overrides(pairs):
    """['key=value', ...] from repeated --set flags"""
    values = {}
    for pair in pairs or ():
        key, sep, value = pair.partition('=')
        if not sep:
            raise ConfigError(pair, 'expected key=value')
        values[key.strip()] = value.strip()
    return values


class RunConfig:
    """Resolved values with their sources, plus the typed records built from them"""

    def __init__(self, values, sources):
        self.values = dict(values)
        self.sources = dict(sources)
        # Build the records eagerly so invalid combinations fail at resolve time
        self.hp = self._record(HyperParams, 'hp')
        self.train = self._record(TrainConfig, 'train')
        self.seg = self._record(SegmentationConfig, 'seg')

    def __repr__(self):
        changed = sum(1 for s in self.sources.values() if s != SOURCE_DEFAULT)
        return f'<RunConfig {changed} non-default keys>'

    def __getitem__(self, key):
        if key not in self.values:
            raise ConfigError(key, 'unknown configuration key')
        return self.values[key]

    def _record(self, record, group):
        kwargs = {key: self.values[key] for key, (_, _, g) in SCHEMA.items() if g == group}
        return record(**kwargs)

    @classmethod
    def resolve(cls, path=None, overrides=None):
        """Defaults, then the file at `path`, then `overrides` (flag values)"""
        values = {key: default for key, (_, default, _) in SCHEMA.items()}
        sources = {key: SOURCE_DEFAULT for key in SCHEMA}

        if path is not None:
            for key, raw in read_config_file(path).items():
                values[key] = parse_value(key, raw)
                sources[key] = f'file:{path}'

        for key, raw in (overrides or {}).items():
            if raw is None:
                continue
            values[key] = parse_value(key, raw)
            sources[key] = SOURCE_FLAG

        run = cls(values, sources)
        logger.debug('Resolved %r', run)
        return run

    def with_overrides(self, **overrides):
        """Copy with further flag-level values"""
        values, sources = dict(self.values), dict(self.sources)
        for key, value in overrides.items():
            values[key] = parse_value(key, value)
            sources[key] = SOURCE_FLAG
        return RunConfig(values, sources)

    def with_environment(self, **values):
        """Copy where keys still at their built-in default take the environment value"""
        merged, sources = dict(self.values), dict(self.sources)
        for key, value in values.items():
            if sources[key] == SOURCE_DEFAULT:
                merged[key] = parse_value(key, value)
                sources[key] = SOURCE_ENV
        return RunConfig(merged, sources)

    def to_lines(self):
        return [f'{key}={format_value(self.values[key])}  # {self.sources[key]}'
                for key in SCHEMA]

    def dump(self, path):
        with open(path, 'w') as fh:
            fh.write('\n'.join(self.to_lines()) + '\n')
        logger.info('Wrote resolved configuration to %s', path)
        return path
