from spike.utils.binary import ByteReader
from spike.utils.log import LOG_FORMAT, configure_logging

__all__ = ['ByteReader', 'LOG_FORMAT', 'configure_logging']
