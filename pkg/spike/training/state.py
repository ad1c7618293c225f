"""
Training-state file for resuming a run.

    b'SPIS' | u32 version | u32 next epoch | f64 best validation loss
    u32 n | n bytes HyperParams JSON
    tensor block: parameters (float64)
    tensor block: SGD velocities (float64)

Tensor blocks use the checkpoint record layout. Values are stored at
float64 so a resumed run continues from exactly the interrupted state.
"""

import json
import logging
import struct

from spike.autodiff import Tensor
from spike.errors import CheckpointError
from spike.models import HyperParams
from spike.network.checkpoint import decode_tensors, encode_tensors
from spike.network.params import ModelParams
from spike.utils.binary import ByteReader

logger = logging.getLogger(__name__)

STATE_MAGIC = b'SPIS'
STATE_VERSION = 1
STATE_NAME = 'train_state.spk'


def save_train_state(path, params, optimizer, next_epoch, best_val_loss):
    header = json.dumps(params.hp.to_dict(), sort_keys=True).encode('utf-8')
    payload = b''.join([
        STATE_MAGIC,
        struct.pack('<IId', STATE_VERSION, next_epoch, best_val_loss),
        struct.pack('<I', len(header)),
        header,
        encode_tensors([(name, t.data) for name, t in params.items()], dtype='<f8'),
        encode_tensors(list(optimizer.velocity.items()), dtype='<f8'),
    ])
    with open(path, 'wb') as fh:
        fh.write(payload)
    logger.debug('Saved training state %s (next epoch %d)', path, next_epoch)


def load_train_state(path, dtype='float32'):
    """Return (params, velocity dict, next epoch, best validation loss)"""
    try:
        with open(path, 'rb') as fh:
            reader = ByteReader(fh.read(), path, error=CheckpointError)
    except OSError as e:
        raise CheckpointError(f'cannot open training state: {e}', path=path) from e

    if reader.take(4, 'magic') != STATE_MAGIC:
        reader.fail('not a training-state file (bad magic)', offset=0)
    version, next_epoch, best_val_loss = reader.unpack('<IId', 'state header')
    if version != STATE_VERSION:
        reader.fail(f'unsupported state version {version}', offset=4)
    (size,) = reader.unpack('<I', 'header length')
    start = reader.offset
    try:
        hp = HyperParams.from_dict(json.loads(reader.take(size, 'hyperparameters').decode('utf-8')))
    except (ValueError, TypeError) as e:
        reader.fail(f'invalid hyperparameter header: {e}', offset=start)

    tensors = decode_tensors(reader, dtype='<f8')
    velocity = dict(decode_tensors(reader, dtype='<f8'))
    if not reader.at_end():
        reader.fail('trailing bytes after velocities')

    try:
        params = ModelParams(hp, {name: Tensor(a, dtype=dtype) for name, a in tensors})
    except ValueError as e:
        raise CheckpointError(f'parameters do not match the stored architecture: {e}',
                              path=path) from e
    return params, velocity, next_epoch, best_val_loss
