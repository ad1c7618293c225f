"""Process-wide logging setup"""

import logging

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

_handler = None


def configure_logging(level='INFO'):
    """Install a single stream handler on the `spike` logger (idempotent)"""
    global _handler
    logger = logging.getLogger('spike')
    if _handler is None:
        _handler = logging.StreamHandler()
        _handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(_handler)
    logger.setLevel(getattr(logging, str(level).upper(), logging.INFO))
    return logger
