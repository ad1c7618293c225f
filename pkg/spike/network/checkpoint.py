"""
Versioned binary checkpoints.

Layout (all integers little-endian):

    b'SPIK' | u32 version | u32 n | n bytes HyperParams JSON
    u32 tensor count
    per tensor, in declaration order:
        u16 name length | name (utf-8) | u8 ndim | ndim × u32 extents
        prod(extents) × float32

Files are parsed completely before any parameter object is built, so a
corrupt or truncated file never yields partial state.
"""

import json
import logging
import struct

import numpy as np

from spike.autodiff import Tensor
from spike.errors import CheckpointError, ConfigError
from spike.models import HyperParams
from spike.network.params import ModelParams, expected_shapes
from spike.utils.binary import ByteReader

logger = logging.getLogger(__name__)

MAGIC = b'SPIK'
FORMAT_VERSION = 1


def encode_tensors(named_arrays, dtype='<f4'):
    """u32 count then (name, shape, data) records; float32 unless `dtype` says otherwise"""
    parts = [struct.pack('<I', len(named_arrays))]
    for name, array in named_arrays:
        raw = name.encode('utf-8')
        array = np.asarray(array)
        parts.append(struct.pack('<H', len(raw)) + raw)
        parts.append(struct.pack('<B', array.ndim))
        parts.append(struct.pack(f'<{array.ndim}I', *array.shape))
        parts.append(np.ascontiguousarray(array, dtype=dtype).tobytes())
    return b''.join(parts)


def decode_tensors(reader, dtype='<f4'):
    itemsize = np.dtype(dtype).itemsize
    (count,) = reader.unpack('<I', 'tensor count')
    tensors = []
    for i in range(count):
        (name_len,) = reader.unpack('<H', f'name length of tensor {i}')
        try:
            name = reader.take(name_len, f'name of tensor {i}').decode('utf-8')
        except UnicodeDecodeError:
            reader.fail(f'tensor {i} name is not utf-8')
        (ndim,) = reader.unpack('<B', f'rank of {name}')
        shape = reader.unpack(f'<{ndim}I', f'shape of {name}') if ndim else ()
        size = int(np.prod(shape, dtype=np.int64))
        data = np.frombuffer(reader.take(itemsize * size, f'values of {name}'), dtype=dtype)
        tensors.append((name, data.reshape(shape).copy()))
    return tensors


def save_checkpoint(params, hp, path):
    """Write params (declaration order, float32) with their HyperParams"""
    header = json.dumps(hp.to_dict(), sort_keys=True).encode('utf-8')
    payload = b''.join([
        MAGIC,
        struct.pack('<I', FORMAT_VERSION),
        struct.pack('<I', len(header)),
        header,
        encode_tensors([(name, t.data) for name, t in params.items()]),
    ])
    with open(path, 'wb') as fh:
        fh.write(payload)
    logger.info('Saved checkpoint %s (%d tensors)', path, len(params))


def read_header(reader):
    if reader.take(4, 'magic') != MAGIC:
        reader.fail('not a SPiKE checkpoint (bad magic)', offset=0)
    (version,) = reader.unpack('<I', 'format version')
    if version != FORMAT_VERSION:
        reader.fail(f'unsupported format version {version} (expected {FORMAT_VERSION})', offset=4)
    (size,) = reader.unpack('<I', 'header length')
    start = reader.offset
    try:
        values = json.loads(reader.take(size, 'hyperparameter header').decode('utf-8'))
        return HyperParams.from_dict(values)
    except (ValueError, TypeError) as e:
        reader.fail(f'invalid hyperparameter header: {e}', offset=start)


def load_checkpoint(path, expected_hp=None, dtype='float32'):
    """Return (ModelParams, HyperParams); reject any mismatch with `expected_hp`"""
    try:
        with open(path, 'rb') as fh:
            buffer = fh.read()
    except OSError as e:
        raise CheckpointError(f'cannot open checkpoint: {e}', path=path) from e

    reader = ByteReader(buffer, path, error=CheckpointError)
    hp = read_header(reader)
    tensors_at = reader.offset
    tensors = decode_tensors(reader)
    if not reader.at_end():
        reader.fail(f'{len(buffer) - reader.offset} trailing bytes after last tensor')

    expected = expected_shapes(hp)
    if [name for name, _ in tensors] != [name for name, _ in expected]:
        raise CheckpointError('parameter names do not match the declared architecture',
                              path=path, offset=tensors_at)
    for (name, array), (_, shape) in zip(tensors, expected):
        if array.shape != shape:
            raise CheckpointError(f'{name} has shape {array.shape}, expected {shape}',
                                  path=path, offset=tensors_at)

    if expected_hp is not None:
        mismatched = hp.diff(expected_hp)
        if mismatched:
            field = mismatched[0]
            raise ConfigError(field, f'checkpoint has {getattr(hp, field)!r}, '
                                     f'run expects {getattr(expected_hp, field)!r}')

    params = ModelParams(hp, {name: Tensor(array, dtype=dtype) for name, array in tensors})
    return params, hp
