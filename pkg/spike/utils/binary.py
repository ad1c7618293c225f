"""Little-endian byte cursor shared by the checkpoint and point-file readers"""

import struct

from spike.errors import DataError


class ByteReader:
    """Cursor over a byte buffer that reports the offset of every failure"""

    def __init__(self, buffer, path, error=DataError):
        self.buffer = buffer
        self.path = path
        self.offset = 0
        self.error = error

    def fail(self, message, offset=None):
        raise self.error(message, path=self.path,
                         offset=self.offset if offset is None else offset)

    def take(self, size, what):
        if self.offset + size > len(self.buffer):
            self.fail(f'truncated while reading {what} '
                      f'(need {size} bytes, {len(self.buffer) - self.offset} left)')
        chunk = self.buffer[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt, what):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))

    def at_end(self):
        return self.offset == len(self.buffer)
